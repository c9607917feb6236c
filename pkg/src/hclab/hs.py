"""Hilbert-Schmidt machinery: the column-sum norm, left multiplication,
finite-rank truncation, the column-stacking equivalence between left
multiplication and a direct sum of copies, and witness construction for
approximating a finite-rank pair (A, B) by one operator S with S near A and
(T^n) S near B in the Hilbert-Schmidt norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULTS
from .linalg import Ball, constrained_lsq, norm, op_norm
from .oracle import PowerCache, intersects
from .zoo import DirectSum, TruncatedOperator, ZooError, exponent_cap

__all__ = [
    "WitnessError",
    "WitnessReport",
    "hs_norm",
    "left_multiply",
    "finite_rank_approx",
    "vectorize_equivalence",
    "construct_witness",
    "construct_witness_oracle",
]


class WitnessError(ValueError):
    """Raised for invalid witness-construction inputs."""


def hs_norm(A: np.ndarray) -> float:
    """Hilbert-Schmidt norm: square root of the column-norm sum (equals the
    Frobenius norm and is invariant under unitary basis change)."""
    return float(np.linalg.norm(np.asarray(A)))


def left_multiply(T: TruncatedOperator, S: np.ndarray, d: int) -> np.ndarray:
    """The left multiplication T S at truncation d."""
    S = np.asarray(S, dtype=complex)
    if S.shape != (d, d):
        raise WitnessError(f"expected a {d}x{d} matrix, got {S.shape}")
    return T.materialize(d) @ S


def finite_rank_approx(A: np.ndarray, N: int) -> np.ndarray:
    """Keep the first N columns of A and zero the rest.

    The squared truncation error ||A - F||_2^2 equals the dropped-column sum
    exactly.
    """
    A = np.asarray(A, dtype=complex)
    d = A.shape[1]
    if not 1 <= N <= d:
        raise WitnessError(f"column count N={N} outside 1..{d}")
    F = A.copy()
    F[:, N:] = 0.0
    return F


def vectorize_equivalence(T: TruncatedOperator, S: np.ndarray, d: int) -> float:
    """|| vec(T S) - (direct sum of d copies of T) vec(S) || with column
    stacking as the vectorization; zero up to rounding."""
    S = np.asarray(S, dtype=complex)
    if S.shape != (d, d):
        raise WitnessError(f"expected a {d}x{d} matrix, got {S.shape}")
    lhs = (T.materialize(d) @ S).ravel(order="F")
    big = DirectSum(T, d).materialize(d * d) if d > 1 else T.materialize(1)
    rhs = big @ S.ravel(order="F")
    return norm(lhs - rhs)


def _column_support(A: np.ndarray) -> int:
    """Largest 1-based index of a nonzero column (0 for the zero matrix)."""
    nz = np.nonzero(np.any(A != 0, axis=0))[0]
    return int(nz[-1]) + 1 if nz.size else 0


def _row_support(v: np.ndarray) -> int:
    nz = np.nonzero(v)[0]
    return int(nz[-1]) + 1 if nz.size else 0


@dataclass
class WitnessReport:
    """Everything the two triangle-inequality chains need, term by term.

    ``column_bounds_a[i]`` is ||T^{a_i} y - A e_{i+1}|| and must stay below
    ``ball_radius``; ``column_bounds_b[i]`` is the matching quantity for the
    B side driven by the final exponent. ``s2_column_norms`` carry the norms
    ||T^{b_i} x|| with their per-index caps ``zero_radius * ||T||^{b_i}``,
    and ``y_tail_norms`` the norms ||T^{a_i} (T^n y)||.
    """

    success: bool
    mode: str
    operator: str
    d: int
    eps: float
    n_support: int
    ball_radius: float
    zero_radius: float
    norm_source: str
    op_norm_used: float
    exponents_a: list[int]
    exponents_b: list[int]
    n_final: int | None
    gap: int | None
    reason: str | None
    column_bounds_a: list[float] = field(default_factory=list)
    column_bounds_b: list[float] = field(default_factory=list)
    s2_column_norms: list[float] = field(default_factory=list)
    s2_column_caps: list[float] = field(default_factory=list)
    y_tail_norms: list[float] = field(default_factory=list)
    x_norm: float | None = None
    y_into_zero_norm: float | None = None
    chain_a: dict = field(default_factory=dict)
    chain_b: dict = field(default_factory=dict)
    residual_a: float | None = None
    residual_b: float | None = None
    y: np.ndarray | None = None
    x: np.ndarray | None = None
    s1: np.ndarray | None = None
    s2: np.ndarray | None = None
    s: np.ndarray | None = None

    def to_json(self) -> dict:
        doc = {
            "schema": 1,
            "kind": "witness-report",
            "success": self.success,
            "mode": self.mode,
            "operator": self.operator,
            "d": self.d,
            "eps": self.eps,
            "n_support": self.n_support,
            "ball_radius": self.ball_radius,
            "zero_radius": self.zero_radius,
            "norm_source": self.norm_source,
            "op_norm_used": self.op_norm_used,
            "exponents_a": self.exponents_a,
            "exponents_b": self.exponents_b,
            "n_final": self.n_final,
            "gap": self.gap,
            "reason": self.reason,
            "column_bounds_a": self.column_bounds_a,
            "column_bounds_b": self.column_bounds_b,
            "s2_column_norms": self.s2_column_norms,
            "s2_column_caps": self.s2_column_caps,
            "y_tail_norms": self.y_tail_norms,
            "x_norm": self.x_norm,
            "y_into_zero_norm": self.y_into_zero_norm,
            "chain_a": self.chain_a,
            "chain_b": self.chain_b,
            "residual_a": self.residual_a,
            "residual_b": self.residual_b,
        }
        if self.s is not None and self.n_support * self.d <= 64:
            doc["matrices"] = {
                "s1": _encode_mat(self.s1),
                "s2": _encode_mat(self.s2),
                "s": _encode_mat(self.s),
            }
        return doc


def _encode_mat(M: np.ndarray) -> list:
    return [[[float(c.real), float(c.imag)] for c in row] for row in M]


def _operator_norm_info(T: TruncatedOperator, d: int) -> tuple[float, str]:
    formula = T.norm_formula(d)
    if formula is not None:
        return float(formula), "closed-form"
    return op_norm(T.materialize(d)), "svd"


def _normalize_pair(
    A: np.ndarray, B: np.ndarray, d: int
) -> tuple[np.ndarray, np.ndarray, int]:
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    for M in (A, B):
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise WitnessError(f"targets must be square matrices, got shape {M.shape}")
    size = max(A.shape[0], B.shape[0])
    if size > d:
        raise WitnessError(f"targets of size {size} do not fit in truncation d={d}")

    def embed(M: np.ndarray) -> np.ndarray:
        out = np.zeros((d, d), dtype=complex)
        out[: M.shape[0], : M.shape[1]] = M
        return out

    A_d, B_d = embed(A), embed(B)
    N = max(_column_support(A_d), _column_support(B_d), 1)
    return A_d, B_d, N


def _evaluate_witness(
    T: TruncatedOperator,
    A: np.ndarray,
    B: np.ndarray,
    eps: float,
    N: int,
    exps_a: list[int],
    exps_b: list[int],
    n: int,
    y: np.ndarray,
    x: np.ndarray,
    d: int,
    norm_t: float,
    norm_source: str,
    mode: str,
    gap: int | None,
) -> WitnessReport:
    """Assemble S = S1 + S2 from the witnesses and measure every quantity in
    the two triangle-inequality chains; success requires each per-index bound
    and both chain totals to hold strictly."""
    r = eps / (2.0 * math.sqrt(N))
    delta = min(r / norm_t**e for e in (*exps_a, *exps_b)) if norm_t > 0 else r
    M = T.materialize(d)

    def power_apply(v: np.ndarray, k: int) -> np.ndarray:
        out = v
        for _ in range(k):
            out = M @ out
        return out

    t_y = [power_apply(y, e) for e in exps_a]  # columns of S1
    t_x = [power_apply(x, e) for e in exps_b]  # columns of S2
    S1 = np.zeros((d, d), dtype=complex)
    S2 = np.zeros((d, d), dtype=complex)
    for i in range(N):
        S1[:, i] = t_y[i]
        S2[:, i] = t_x[i]
    S = S1 + S2

    bounds_a = [norm(t_y[i] - A[:, i]) for i in range(N)]
    s2_norms = [norm(t_x[i]) for i in range(N)]
    s2_caps = [delta * norm_t ** exps_b[i] for i in range(N)]
    Tn_y = power_apply(y, n)
    y_tails = [norm(power_apply(Tn_y, e)) for e in exps_a]
    bounds_b = [norm(power_apply(t_x[i], n) - B[:, i]) for i in range(N)]

    Mn = np.eye(d, dtype=complex)
    for _ in range(n):
        Mn = Mn @ M
    residual_a = hs_norm(S - A)
    residual_b = hs_norm(Mn @ S - B)
    s1_minus_a = hs_norm(S1 - A)
    s2_norm = hs_norm(S2)
    ltn_s2_minus_b = hs_norm(Mn @ S2 - B)
    ltn_s1 = hs_norm(Mn @ S1)

    x_norm = norm(x)
    y_zero = norm(Tn_y)
    checks = {
        "column_bounds_a": all(v < r for v in bounds_a),
        "column_bounds_b": all(v < r for v in bounds_b),
        "s2_columns_below_caps": all(v < c for v, c in zip(s2_norms, s2_caps)),
        # the binding cap equals r only up to rounding of norm_t powers
        "s2_caps_below_radius": all(c <= r * (1.0 + 1e-12) for c in s2_caps),
        "y_tail_below_radius": all(v < r for v in y_tails),
        "x_inside_zero_ball": x_norm < delta,
        "final_power_of_y_inside_zero_ball": y_zero < delta,
        "chain_a_total": s1_minus_a + s2_norm < eps,
        "chain_b_total": ltn_s2_minus_b + ltn_s1 < eps,
        "residual_a": residual_a < eps,
        "residual_b": residual_b < eps,
    }
    success = all(checks.values())
    reason = None
    if not success:
        reason = "violated: " + ", ".join(k for k, v in checks.items() if not v)
    return WitnessReport(
        success=success,
        mode=mode,
        operator=T.label,
        d=d,
        eps=eps,
        n_support=N,
        ball_radius=r,
        zero_radius=delta,
        norm_source=norm_source,
        op_norm_used=norm_t,
        exponents_a=list(exps_a),
        exponents_b=list(exps_b),
        n_final=n,
        gap=gap,
        reason=reason,
        column_bounds_a=bounds_a,
        column_bounds_b=bounds_b,
        s2_column_norms=s2_norms,
        s2_column_caps=s2_caps,
        y_tail_norms=y_tails,
        x_norm=x_norm,
        y_into_zero_norm=y_zero,
        chain_a={
            "s1_minus_a": s1_minus_a,
            "s2_norm": s2_norm,
            "bound": s1_minus_a + s2_norm,
            "residual": residual_a,
            "eps": eps,
        },
        chain_b={
            "ltn_s2_minus_b": ltn_s2_minus_b,
            "ltn_s1_norm": ltn_s1,
            "bound": ltn_s2_minus_b + ltn_s1,
            "residual": residual_b,
            "eps": eps,
        },
        residual_a=residual_a,
        residual_b=residual_b,
        y=y,
        x=x,
        s1=S1,
        s2=S2,
        s=S,
    )


def _failure(
    T: TruncatedOperator,
    d: int,
    eps: float,
    N: int,
    norm_t: float,
    norm_source: str,
    mode: str,
    reason: str,
    gap: int | None = None,
    exps: list[int] | None = None,
) -> WitnessReport:
    r = eps / (2.0 * math.sqrt(N))
    exps = exps if exps is not None else []
    delta = min((r / norm_t**e for e in exps), default=r) if norm_t > 0 else r
    return WitnessReport(
        success=False,
        mode=mode,
        operator=T.label,
        d=d,
        eps=eps,
        n_support=N,
        ball_radius=r,
        zero_radius=delta,
        norm_source=norm_source,
        op_norm_used=norm_t,
        exponents_a=exps,
        exponents_b=list(exps),
        n_final=None,
        gap=gap,
        reason=reason,
    )


def construct_witness(
    T: TruncatedOperator,
    A: np.ndarray,
    B: np.ndarray,
    eps: float,
    n_max: int = DEFAULTS.n_max,
    d: int = DEFAULTS.dim,
) -> WitnessReport:
    """Constructive witness for operators with an exact right inverse S_r.

    With spaced exponents a_i = b_i = i*gap, the vector
    y = sum_i S_r^{a_{i-1}} (A e_i) reproduces the A columns up to cross
    terms, and v = sum_i S_r^{b_{i-1}} (B e_i) likewise for B; the final
    exponent n is the first one with ||S_r||^n ||v|| below the
    zero-neighborhood radius, and x = S_r^n v satisfies T^n x = v exactly.
    The gap doubles (1, 2, 4, ...) until every per-index bound holds or the
    exponent budget runs out, in which case the report names the violated
    bound.
    """
    if eps <= 0:
        raise WitnessError(f"eps must be positive, got {eps}")
    A_d, B_d, N = _normalize_pair(A, B, d)
    try:
        S_r = T.right_inverse
    except ZooError as exc:
        raise WitnessError(str(exc)) from exc
    if S_r is None:
        raise WitnessError(
            f"{T.label} exposes no exact right inverse; use construct_witness_oracle "
            "for a bounded generic search"
        )
    r = eps / (2.0 * math.sqrt(N))
    norm_t, norm_source = _operator_norm_info(T, d)
    norm_s, _ = _operator_norm_info(S_r, d)
    Mt = T.materialize(d)
    Ms = S_r.materialize(d)

    last_reason = "no exponent spacing satisfied the column bounds"
    last_exps: list[int] = []
    gap = 1
    while (N - 1) * gap <= n_max:
        exps = [i * gap for i in range(N)]
        last_exps = exps
        if N + exps[-1] > d:
            last_reason = (
                f"guard band exhausted: columns shifted by {exps[-1]} need d > {N + exps[-1]}"
            )
            break
        s_pow_cols_a = []
        s_pow_cols_b = []
        for i in range(N):
            vec_a, vec_b = A_d[:, i], B_d[:, i]
            for _ in range(exps[i]):
                vec_a = Ms @ vec_a
                vec_b = Ms @ vec_b
            s_pow_cols_a.append(vec_a)
            s_pow_cols_b.append(vec_b)
        y = np.sum(s_pow_cols_a, axis=0)
        v = np.sum(s_pow_cols_b, axis=0)
        delta = min(r / norm_t**e for e in exps) if norm_t > 0 else r

        def bounds_hold(vec: np.ndarray, target: np.ndarray) -> tuple[bool, int, float]:
            cur = vec
            prev = 0
            for i in range(N):
                for _ in range(exps[i] - prev):
                    cur = Mt @ cur
                prev = exps[i]
                err = norm(cur - target[:, i])
                if not err < r:
                    return False, i, err
            return True, -1, 0.0

        ok_a, idx_a, err_a = bounds_hold(y, A_d)
        ok_v, idx_v, err_v = bounds_hold(v, B_d)
        if not (ok_a and ok_v):
            side = f"A column {idx_a + 1} ({err_a:.3g})" if not ok_a else f"B column {idx_v + 1} ({err_v:.3g})"
            last_reason = f"column bound above the ball radius {r:.3g} at gap {gap}: {side} side"
            gap, stop = _next_gap(gap, N)
            if stop:
                break
            continue

        norm_v = norm(v)
        found_n = None
        v_support = _row_support(v)
        for n in range(1, n_max + 1):
            if norm_s**n * norm_v >= delta:
                continue
            if v_support + n > d:
                last_reason = (
                    f"guard band exhausted: the final exponent needs d >= {v_support + n}"
                )
                found_n = None
                break
            x = v
            for _ in range(n):
                x = Ms @ x
            report = _evaluate_witness(
                T, A_d, B_d, eps, N, exps, exps, n, y, x, d,
                norm_t, norm_source, "constructive", gap,
            )
            if report.success:
                return report
            last_reason = report.reason or "witness checks failed"
            found_n = n
        if found_n is None and norm_s >= 1.0 and norm_v >= delta:
            last_reason = (
                f"no final exponent shrinks the right-inverse powers below the "
                f"zero-neighborhood radius ({norm_s:.3g}^n * {norm_v:.3g} never < {delta:.3g})"
            )
        gap, stop = _next_gap(gap, N)
        if stop:
            break
    return _failure(
        T, d, eps, N, norm_t, norm_source, "constructive", last_reason,
        gap=gap, exps=last_exps,
    )


def _next_gap(gap: int, N: int) -> tuple[int, bool]:
    """Doubling schedule; a single column needs no spacing, so stop there."""
    if N == 1:
        return gap, True
    return gap * 2, False


def construct_witness_oracle(
    T: TruncatedOperator,
    A: np.ndarray,
    B: np.ndarray,
    eps: float,
    n_max: int = 16,
    d: int = 6,
) -> WitnessReport:
    """Generic witness search through the ball oracles on the nested preimage
    sets, without a right inverse. Exponential in the column count, so it is
    deliberately bounded to N <= 2 and d <= 6.
    """
    if d > 6:
        raise WitnessError(f"oracle mode is bounded to d <= 6, got {d}")
    A_d, B_d, N = _normalize_pair(A, B, d)
    if N > 2:
        raise WitnessError(f"oracle mode is bounded to targets on at most 2 columns, got {N}")
    if eps <= 0:
        raise WitnessError(f"eps must be positive, got {eps}")
    r = eps / (2.0 * math.sqrt(N))
    norm_t, norm_source = _operator_norm_info(T, d)
    Mt = T.materialize(d)
    shrink = 1.0 - DEFAULTS.ball_shrink
    cache = PowerCache(T, d)

    guard_vectors = [A_d[:, i] for i in range(N)] + [B_d[:, i] for i in range(N)]
    n_cap = exponent_cap(T, guard_vectors, d, n_max)

    if N == 1:
        delta = r
        U = Ball(A_d[:, 0], r)
        V = Ball(B_d[:, 0], r)
        W = Ball(np.zeros(d, dtype=complex), delta)
        for n in range(1, n_cap + 1):
            feas_y, y, _ = intersects(T, n, U, W, d, cache=cache)
            feas_x, x, _ = intersects(T, n, W, V, d, cache=cache)
            if feas_y and feas_x:
                report = _evaluate_witness(
                    T, A_d, B_d, eps, N, [0], [0], n, y, x, d,
                    norm_t, norm_source, "oracle-search", None,
                )
                if report.success:
                    return report
        return _failure(
            T, d, eps, N, norm_t, norm_source, "oracle-search",
            "no exponent produced witnesses inside every ball", exps=[0],
        )

    cap = min(n_cap, 8)
    for n1 in range(1, cap + 1):
        for m1 in range(1, cap + 1):
            delta = min(r / norm_t**n1, r / norm_t**m1) if norm_t > 0 else r
            for n in range(1, max(1, n_cap - max(n1, m1)) + 1):
                pow_n = cache.power(n)
                stacked_y = np.vstack([cache.power(n1), pow_n])
                target_y = np.concatenate([A_d[:, 1], np.zeros(d, dtype=complex)])
                y, _ = constrained_lsq(stacked_y, A_d[:, 0], r * shrink, target_y)
                if not (norm(cache.power(n1) @ y - A_d[:, 1]) < r and norm(pow_n @ y) < delta):
                    continue
                stacked_x = np.vstack([pow_n, cache.power(n + m1)])
                target_x = np.concatenate([B_d[:, 0], B_d[:, 1]])
                x, _ = constrained_lsq(
                    stacked_x, np.zeros(d, dtype=complex), delta * shrink, target_x
                )
                if not (
                    norm(pow_n @ x - B_d[:, 0]) < r
                    and norm(cache.power(n + m1) @ x - B_d[:, 1]) < r
                ):
                    continue
                report = _evaluate_witness(
                    T, A_d, B_d, eps, N, [0, n1], [0, m1], n, y, x, d,
                    norm_t, norm_source, "oracle-search", None,
                )
                if report.success:
                    return report
    return _failure(
        T, d, eps, N, norm_t, norm_source, "oracle-search",
        "bounded search exhausted without an admissible witness pair", exps=[0],
    )
