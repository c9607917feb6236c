"""Certificates for the Hypercyclicity Criterion and their numerical checks.

A certificate packages the data of the criterion: a strictly increasing
exponent sequence {n_k}, finite generator lists for the two dense subspaces
(finitely supported vectors at desk scale), and a right-inverse family
k -> S_{n_k}. ``check_certificate`` evaluates the three residual families

    ||T^{n_k} y||,   ||S_{n_k} z||,   ||T^{n_k} S_{n_k} z - z||

at k = 1..K and judges convergence. The verification covers the listed
generators at a finite truncation, never the full dense subspaces; reports
say so explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .config import DEFAULTS
from .linalg import basis_vector, cvec, norm, op_norm, support
from .zoo import (
    GuardBandError,
    OperatorPower,
    TruncatedOperator,
    ZooError,
    check_guard,
    make_operator,
)

__all__ = [
    "Certificate",
    "CertificateError",
    "CriterionReport",
    "OperatorSequence",
    "orbit",
    "series_converges",
    "check_certificate",
    "check_commuting",
]

SCOPE_NOTE = (
    "finite-truncation evidence: residuals are evaluated on the listed "
    "generators only, not on the full dense subspaces"
)


class CertificateError(ValueError):
    """Raised for malformed certificates or missing right-inverse data."""


def orbit(T: TruncatedOperator, x: np.ndarray, n_max: int, d: int) -> list[np.ndarray]:
    """[x, Tx, ..., T^{n_max} x] by repeated application at truncation d."""
    x = cvec(x)
    if x.size != d:
        x = np.concatenate([x, np.zeros(d - x.size, dtype=complex)]) if x.size < d else x[:d]
    check_guard(T, [x], n_max, d)
    M = T.materialize(d)
    out = [x.copy()]
    for _ in range(n_max):
        out.append(M @ out[-1])
    return out


@dataclass
class Certificate:
    """Criterion data: exponents, generators, and the right-inverse family.

    ``s_rule`` selects the family:
      * ``"right-inverse-power"``: S_{n_k} = S^{n_k} for a single base S,
        taken from ``s_operator`` or, failing that, the checked operator's
        own exact right inverse;
      * ``"custom"``: ``s_terms(k)`` yields S_{n_k} (1-based k), not
        serializable.
    """

    seq: Sequence[int]
    y_gens: list[np.ndarray]
    z_gens: list[np.ndarray]
    s_rule: str = "right-inverse-power"
    s_operator: TruncatedOperator | None = None
    s_operator_id: str | None = None
    s_terms: Callable[[int], TruncatedOperator] | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        self.seq = [int(n) for n in self.seq]
        if any(b <= a for a, b in zip(self.seq, self.seq[1:])) or any(n < 1 for n in self.seq):
            raise CertificateError("exponent sequence must be strictly increasing and positive")
        self.y_gens = [cvec(y) for y in self.y_gens]
        self.z_gens = [cvec(z) for z in self.z_gens]
        if not self.y_gens or not self.z_gens:
            raise CertificateError("generator lists must be nonempty")
        bound = DEFAULTS.max_generator_support
        for g in (*self.y_gens, *self.z_gens):
            if support(g) > bound:
                raise CertificateError(f"generator support {support(g)} exceeds bound {bound}")
        if self.s_rule == "custom" and self.s_terms is None:
            raise CertificateError("custom s_rule needs s_terms")
        if self.s_operator is None and self.s_operator_id:
            self.s_operator = make_operator(self.s_operator_id)

    @classmethod
    def default_for(cls, K: int, generators: int = 3) -> "Certificate":
        """Basis-vector generators e_1..e_g with the full sequence n_k = k."""
        d = generators
        gens = [basis_vector(i, d) for i in range(1, generators + 1)]
        return cls(seq=list(range(1, K + 1)), y_gens=gens, z_gens=[g.copy() for g in gens])

    def to_json(self) -> dict:
        if self.s_rule == "custom":
            raise CertificateError("custom right-inverse families are not serializable")
        doc = {
            "schema": 1,
            "kind": "certificate",
            "seq": list(self.seq),
            "y_gens": [_encode_vec(v) for v in self.y_gens],
            "z_gens": [_encode_vec(v) for v in self.z_gens],
            "s_rule": self.s_rule,
        }
        if self.s_operator_id:
            doc["s_operator"] = self.s_operator_id
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "Certificate":
        if doc.get("kind") != "certificate":
            raise CertificateError(f"not a certificate document: kind={doc.get('kind')!r}")
        return cls(
            seq=doc["seq"],
            y_gens=[_decode_vec(v) for v in doc["y_gens"]],
            z_gens=[_decode_vec(v) for v in doc["z_gens"]],
            s_rule=doc.get("s_rule", "right-inverse-power"),
            s_operator_id=doc.get("s_operator"),
        )


def _encode_vec(v: np.ndarray) -> list[list[float]]:
    return [[float(c.real), float(c.imag)] for c in v]


def _decode_vec(entries: list) -> np.ndarray:
    return np.array([complex(re, im) for re, im in entries], dtype=complex)


def series_converges(series: list[float], tol: float) -> bool:
    """A residual series counts as converging to zero when its final value is
    below ``tol``, or when the last three samples decay monotonically with a
    per-step ratio of at most ``DEFAULTS.trend_ratio``."""
    final = series[-1]
    if final <= tol:
        return True
    if len(series) < 3:
        return False
    r0, r1, r2 = series[-3], series[-2], series[-1]
    rho = DEFAULTS.trend_ratio
    return r2 <= rho * r1 and r1 <= rho * r0


@dataclass
class CriterionReport:
    """Per-k residual families, exactness flags, and the verdict."""

    operator: str
    d_used: int
    K: int
    tol: float
    seq: list[int]
    t_residuals: list[list[float]]
    s_residuals: list[list[float]]
    ts_residuals: list[list[float]]
    verdict: bool
    series_pass: dict
    scope_note: str = SCOPE_NOTE

    def final_exact_zero(self, family: str) -> list[bool]:
        table = {"t": self.t_residuals, "s": self.s_residuals, "ts": self.ts_residuals}[family]
        return [series[-1] == 0.0 for series in table]

    def to_json(self) -> dict:
        return {
            "schema": 1,
            "kind": "criterion-report",
            "operator": self.operator,
            "d_used": self.d_used,
            "K": self.K,
            "tol": self.tol,
            "seq": self.seq,
            "t_residuals": self.t_residuals,
            "s_residuals": self.s_residuals,
            "ts_residuals": self.ts_residuals,
            "t_final_exact_zero": self.final_exact_zero("t"),
            "ts_final_exact_zero": self.final_exact_zero("ts"),
            "series_pass": self.series_pass,
            "verdict": "pass" if self.verdict else "fail",
            "scope_note": self.scope_note,
        }


def _resolve_s_terms(
    T: TruncatedOperator, cert: Certificate, K: int
) -> tuple[list[TruncatedOperator] | None, TruncatedOperator | None]:
    """Return (custom terms per k, power base); exactly one is non-None."""
    if cert.s_rule == "custom":
        terms = [cert.s_terms(k) for k in range(1, K + 1)]
        if any(t is None for t in terms):
            raise CertificateError("right-inverse family undefined at some k")
        return terms, None
    base = cert.s_operator
    if base is None:
        try:
            base = T.right_inverse
        except ZooError as exc:
            raise CertificateError(str(exc)) from exc
    if base is None:
        raise CertificateError(
            f"{T.label} exposes no exact right inverse; supply the right-inverse "
            "family with the certificate"
        )
    return None, base


def check_certificate(
    T: TruncatedOperator,
    cert: Certificate,
    K: int,
    tol: float = DEFAULTS.tol,
    d: int | None = None,
) -> CriterionReport:
    """Evaluate the three criterion residual families at k = 1..K.

    The truncation is sized (or validated) with a guard band so that every
    shift-power application is exact: exact zeros in the report are exact,
    not merely small.
    """
    if K < 1:
        raise CertificateError(f"K must be positive, got {K}")
    if len(cert.seq) < K:
        raise CertificateError(f"exponent sequence has {len(cert.seq)} terms, needs {K}")
    seq = list(cert.seq[:K])
    terms, base = _resolve_s_terms(T, cert, K)

    gen_support = max(support(g) for g in (*cert.y_gens, *cert.z_gens))
    width_s = base.shift_width if base is not None else max(t.shift_width for t in terms)
    required = gen_support + seq[-1] * (T.shift_width + width_s)
    d_used = d if d is not None else max(required, DEFAULTS.dim)
    if d_used < required:
        raise GuardBandError(
            required, f"certificate check at K={K} needs d >= {required}, got {d_used}"
        )

    M = T.materialize(d_used)
    y_vecs = [np.concatenate([y, np.zeros(d_used - y.size, complex)]) for y in cert.y_gens]
    z_vecs = [np.concatenate([z, np.zeros(d_used - z.size, complex)]) for z in cert.z_gens]

    t_res = [[] for _ in y_vecs]
    s_res = [[] for _ in z_vecs]
    ts_res = [[] for _ in z_vecs]

    t_pow = np.eye(d_used, dtype=complex)
    s_pow = np.eye(d_used, dtype=complex) if base is not None else None
    s_base = base.materialize(d_used) if base is not None else None
    prev_n = 0
    for k in range(1, K + 1):
        n_k = seq[k - 1]
        for _ in range(n_k - prev_n):
            t_pow = t_pow @ M
            if s_pow is not None:
                s_pow = s_pow @ s_base
        prev_n = n_k
        s_mat = s_pow if s_pow is not None else terms[k - 1].materialize(d_used)
        for j, y in enumerate(y_vecs):
            t_res[j].append(norm(t_pow @ y))
        for j, z in enumerate(z_vecs):
            sz = s_mat @ z
            s_res[j].append(norm(sz))
            ts_res[j].append(norm(t_pow @ sz - z))

    series_pass = {
        "t": [series_converges(s, tol) for s in t_res],
        "s": [series_converges(s, tol) for s in s_res],
        "ts": [series_converges(s, tol) for s in ts_res],
    }
    verdict = all(all(v) for v in series_pass.values())
    return CriterionReport(
        operator=T.label,
        d_used=d_used,
        K=K,
        tol=tol,
        seq=seq,
        t_residuals=t_res,
        s_residuals=s_res,
        ts_residuals=ts_res,
        verdict=verdict,
        series_pass=series_pass,
    )


@dataclass
class OperatorSequence:
    """A rule k -> T_k of operators, for sequence-form experiments."""

    terms: Callable[[int], TruncatedOperator]
    label: str = "operator-sequence"

    @classmethod
    def powers_of(cls, T: TruncatedOperator) -> "OperatorSequence":
        return cls(terms=lambda k: OperatorPower(T, k), label=f"powers of {T.label}")

    def dense_range_ok(self, k: int, d: int, rtol: float = DEFAULTS.rank_rtol) -> bool:
        """True when T_k materialized at d is surjective up to the configured
        rank tolerance (singular values below rtol * sigma_max count as 0)."""
        s = np.linalg.svd(self.terms(k).materialize(d), compute_uv=False)
        if s.size == 0 or s[0] == 0:
            return False
        return bool(s[-1] > rtol * s[0])


def check_commuting(
    seq: OperatorSequence,
    pairs: int,
    d: int,
    tol: float = DEFAULTS.tol,
) -> bool:
    """True iff ||T_n T_m - T_m T_n|| <= tol for the first ``pairs`` index
    pairs (n, m), n < m, enumerated deterministically."""
    checked = 0
    m_hi = 2
    while checked < pairs:
        for n in range(1, m_hi):
            if checked >= pairs:
                break
            A = seq.terms(n).materialize(d)
            B = seq.terms(m_hi).materialize(d)
            if op_norm(A @ B - B @ A) > tol:
                return False
            checked += 1
        m_hi += 1
    return True
