"""Ball-intersection oracles: decide conditions of the form T^n U before V
by exact reduction to the norm-ball constrained least-squares solver.

Strictness convention: the U-side radius is shrunk by a relative margin, so
a feasible answer comes with a witness strictly inside both open balls. An
infeasible answer is conclusive only up to solver tolerance; results carry
the achieved distances so callers can inspect margins.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .config import DEFAULTS
from .linalg import Ball, constrained_lsq
from .zoo import TruncatedOperator, check_guard, exponent_cap

__all__ = [
    "OracleResult",
    "PowerCache",
    "intersects",
    "first_hit",
    "through_zero_condition",
    "forward_backward_condition",
    "eventual_hit",
]


class PowerCache:
    """Incremental powers of a materialized operator plus their SVDs.

    Scanning exponents for many ball pairs reuses the same M^n and its
    factorization, so both are cached per exponent.
    """

    def __init__(self, T: TruncatedOperator, d: int):
        self.T = T
        self.d = d
        base = T.materialize(d)
        self._powers: list[np.ndarray] = [np.eye(d, dtype=complex), base]
        self._svds: dict[int, tuple] = {}

    def power(self, n: int) -> np.ndarray:
        while len(self._powers) <= n:
            self._powers.append(self._powers[-1] @ self._powers[1])
        return self._powers[n]

    def svd(self, n: int) -> tuple:
        if n not in self._svds:
            self._svds[n] = np.linalg.svd(self.power(n), full_matrices=False)
        return self._svds[n]


def _embed(v: np.ndarray, d: int) -> np.ndarray:
    v = np.asarray(v, dtype=complex).ravel()
    if v.size == d:
        return v
    if v.size > d:
        raise ValueError(f"center of support dimension {v.size} does not fit in d={d}")
    return np.concatenate([v, np.zeros(d - v.size, dtype=complex)])


def intersects(
    T: TruncatedOperator,
    n: int,
    U: Ball,
    V: Ball,
    d: int,
    *,
    cache: PowerCache | None = None,
) -> tuple[bool, np.ndarray, float]:
    """Decide whether some x with ||x - U.center|| < U.radius has
    ||T^n x - V.center|| < V.radius, at truncation d.

    Returns ``(feasible, x_witness, dist)`` where ``dist`` is the minimum of
    ||T^n x - V.center|| over the shrunken closed U ball; feasibility means
    ``dist < V.radius`` strictly, and then the witness is strictly interior
    to U.
    """
    if n < 0:
        raise ValueError(f"exponent must be nonnegative, got {n}")
    a = _embed(U.center, d)
    b = _embed(V.center, d)
    check_guard(T, [a, b], n, d)
    if cache is None:
        cache = PowerCache(T, d)
    Mn = cache.power(n)
    r_in = U.radius * (1.0 - DEFAULTS.ball_shrink)
    x, dist = constrained_lsq(Mn, a, r_in, b, svd=cache.svd(n))
    return dist < V.radius, x, dist


@dataclass
class OracleResult:
    """Outcome of an exponent scan, with the full scanned-distance table."""

    kind: str
    operator: str
    feasible: bool
    n: int | None
    dist: float | None
    witnesses: dict = field(default_factory=dict)
    scanned: list[dict] = field(default_factory=list)
    d: int = 0
    query: dict = field(default_factory=dict)

    def scan_rows(self) -> list[dict]:
        return list(self.scanned)

    def to_json(self) -> dict:
        doc = {
            "schema": 1,
            "kind": self.kind,
            "operator": self.operator,
            "feasible": self.feasible,
            "n": self.n,
            "dist": self.dist,
            "d": self.d,
            "query": self.query,
            "scanned": self.scanned,
        }
        doc["witnesses"] = {
            name: [[float(c.real), float(c.imag)] for c in vec]
            for name, vec in self.witnesses.items()
        }
        return doc


def _query_doc(T: TruncatedOperator, d: int, n_max: int | None, balls: dict[str, Ball]) -> dict:
    doc = {"operator": T.label, "d": d}
    if n_max is not None:
        doc["n_max"] = n_max
    for name, ball in balls.items():
        doc[name] = ball.describe()
    return doc


def first_hit(
    T: TruncatedOperator,
    U: Ball,
    V: Ball,
    n_max: int,
    d: int,
    *,
    exponents: Sequence[int] | None = None,
    cache: PowerCache | None = None,
) -> OracleResult:
    """Smallest exponent in 1..n_max (or in ``exponents``) whose power maps
    U into reach of V; scanning stops at the first hit.

    Exponents whose guard band does not fit inside d are not scanned; the
    result records exactly which exponents were examined.
    """
    if n_max < 1 and exponents is None:
        raise ValueError(f"n_max must be positive, got {n_max}")
    a = _embed(U.center, d)
    b = _embed(V.center, d)
    cap = exponent_cap(T, [a, b], d, n_max if exponents is None else max(exponents, default=0))
    pool = range(1, cap + 1) if exponents is None else [n for n in exponents if 1 <= n <= cap]
    cache = cache or PowerCache(T, d)
    scanned: list[dict] = []
    for n in pool:
        feasible, x, dist = intersects(T, n, U, V, d, cache=cache)
        scanned.append({"n": n, "dist": dist, "feasible": feasible})
        if feasible:
            return OracleResult(
                kind="first-hit",
                operator=T.label,
                feasible=True,
                n=n,
                dist=dist,
                witnesses={"x": x},
                scanned=scanned,
                d=d,
                query=_query_doc(T, d, n_max, {"U": U, "V": V}),
            )
    return OracleResult(
        kind="first-hit",
        operator=T.label,
        feasible=False,
        n=None,
        dist=min((row["dist"] for row in scanned), default=None),
        scanned=scanned,
        d=d,
        query=_query_doc(T, d, n_max, {"U": U, "V": V}),
    )


def _require_zero_center(W: Ball) -> None:
    if np.count_nonzero(W.center) != 0:
        raise ValueError("the zero-neighborhood ball must be centered at the origin")


def through_zero_condition(
    T: TruncatedOperator,
    U: Ball,
    V: Ball,
    W: Ball,
    n_max: int,
    d: int,
    *,
    cache: PowerCache | None = None,
) -> OracleResult:
    """Smallest n <= n_max with both T^n U meeting W and T^n W meeting V.

    The returned witnesses are named after their roles: ``y`` starts in U and
    is driven into the zero neighborhood, ``x`` starts in the zero
    neighborhood and is driven into V.
    """
    _require_zero_center(W)
    a_u = _embed(U.center, d)
    b_v = _embed(V.center, d)
    zero = np.zeros(d, dtype=complex)
    cap = exponent_cap(T, [a_u, b_v, zero], d, n_max)
    cache = cache or PowerCache(T, d)
    scanned: list[dict] = []
    for n in range(1, cap + 1):
        feas_y, y, dist_y = intersects(T, n, U, W, d, cache=cache)
        row = {"n": n, "dist_u_to_w": dist_y, "feasible": False}
        if feas_y:
            feas_x, x, dist_x = intersects(T, n, W, V, d, cache=cache)
            row["dist_w_to_v"] = dist_x
            if feas_x:
                row["feasible"] = True
                scanned.append(row)
                return OracleResult(
                    kind="through-zero",
                    operator=T.label,
                    feasible=True,
                    n=n,
                    dist=max(dist_y, dist_x),
                    witnesses={"y": y, "x": x},
                    scanned=scanned,
                    d=d,
                    query=_query_doc(T, d, n_max, {"U": U, "V": V, "W": W}),
                )
        scanned.append(row)
    return OracleResult(
        kind="through-zero",
        operator=T.label,
        feasible=False,
        n=None,
        dist=None,
        scanned=scanned,
        d=d,
        query=_query_doc(T, d, n_max, {"U": U, "V": V, "W": W}),
    )


def forward_backward_condition(
    T: TruncatedOperator,
    U: Ball,
    W: Ball,
    n_max: int,
    d: int,
    *,
    cache: PowerCache | None = None,
) -> OracleResult:
    """Smallest n <= n_max with T^n U meeting W and the preimage of U under
    T^n meeting W.

    The preimage side is decided without any matrix inversion through the
    identity: the preimage of U under T^n meets W exactly when T^n W meets U.
    """
    _require_zero_center(W)
    a_u = _embed(U.center, d)
    zero = np.zeros(d, dtype=complex)
    cap = exponent_cap(T, [a_u, zero], d, n_max)
    cache = cache or PowerCache(T, d)
    scanned: list[dict] = []
    for n in range(1, cap + 1):
        feas_f, y, dist_f = intersects(T, n, U, W, d, cache=cache)
        feas_b, w, dist_b = intersects(T, n, W, U, d, cache=cache)
        row = {
            "n": n,
            "dist_forward": dist_f,
            "dist_backward": dist_b,
            "feasible": feas_f and feas_b,
        }
        scanned.append(row)
        if feas_f and feas_b:
            return OracleResult(
                kind="forward-backward",
                operator=T.label,
                feasible=True,
                n=n,
                dist=max(dist_f, dist_b),
                witnesses={"y": y, "w": w},
                scanned=scanned,
                d=d,
                query=_query_doc(T, d, n_max, {"U": U, "W": W}),
            )
    return OracleResult(
        kind="forward-backward",
        operator=T.label,
        feasible=False,
        n=None,
        dist=None,
        scanned=scanned,
        d=d,
        query=_query_doc(T, d, n_max, {"U": U, "W": W}),
    )


def eventual_hit(
    T: TruncatedOperator,
    seq: Sequence[int],
    U: Ball,
    V: Ball,
    K_window: int,
    d: int,
    *,
    cache: PowerCache | None = None,
) -> tuple[int | None, OracleResult]:
    """Smallest N such that T^{n_k} U meets V for every k = N..K_window along
    the exponent sequence; ``None`` when no such N exists inside the window.

    Unlike the scanning oracles this check must examine every exponent in the
    window, so an unsatisfiable guard band is an error rather than a cap.
    """
    seq = [int(n) for n in seq]
    if any(b <= a for a, b in zip(seq, seq[1:])):
        raise ValueError("exponent sequence must be strictly increasing")
    if K_window < 1 or len(seq) < K_window:
        raise ValueError(f"window {K_window} exceeds the provided sequence length {len(seq)}")
    a = _embed(U.center, d)
    b = _embed(V.center, d)
    check_guard(T, [a, b], seq[K_window - 1], d)
    cache = cache or PowerCache(T, d)
    scanned = []
    flags = []
    for k in range(1, K_window + 1):
        n_k = seq[k - 1]
        feasible, _, dist = intersects(T, n_k, U, V, d, cache=cache)
        scanned.append({"k": k, "n": n_k, "dist": dist, "feasible": feasible})
        flags.append(feasible)
    n_found: int | None = None
    if flags and flags[-1]:
        k = K_window
        while k >= 1 and flags[k - 1]:
            k -= 1
        n_found = k + 1
    result = OracleResult(
        kind="eventual-hit",
        operator=T.label,
        feasible=n_found is not None,
        n=n_found,
        dist=scanned[-1]["dist"] if scanned else None,
        scanned=scanned,
        d=d,
        query=_query_doc(T, d, None, {"U": U, "V": V}) | {"window": K_window},
    )
    return n_found, result
