"""Five-way equivalence battery plus the sequence-form variants.

The battery evaluates, on one operator at a truncation, the five mutually
equivalent characterizations: a criterion certificate, hereditary behaviour
along sampled subsequences, a direct sum of copies, left multiplication on
the Hilbert-Schmidt class (through column stacking), and the through-zero
ball condition. Equivalence is tested as mutual consistency of verdicts
against sampled ball pairs, never proved.

Every condition consumes a forked, labeled random stream derived from the
configured seed, so results are reproducible and independent of evaluation
order. Sample draws are arranged so that growing the scan ceiling or the
sample count never changes the shared prefix of samples.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, replace
from typing import Sequence

import numpy as np

from .config import DEFAULTS
from .criterion import (
    Certificate,
    CertificateError,
    check_certificate,
    orbit,
    series_converges,
)
from .linalg import Ball, basis_vector, norm
from .oracle import PowerCache, eventual_hit, first_hit, through_zero_condition
from .zoo import TruncatedOperator, direct_sum, exponent_cap

__all__ = [
    "BatteryConfig",
    "BatteryReport",
    "orbit_coverage",
    "hereditary_sample",
    "run_battery",
    "sequence_battery",
]

_STREAM_LABELS = {
    "certificate": 0,
    "hereditary": 1,
    "direct_sum": 2,
    "left_multiplication": 3,
    "through_zero": 4,
    "sequence": 5,
    "eventual": 6,
}

CONDITIONS = (
    "certificate",
    "hereditary",
    "direct_sum",
    "left_multiplication",
    "through_zero",
)


@dataclass(frozen=True)
class BatteryConfig:
    """Sampling plan and sizes for one battery run; the seed fixes the full
    random stream."""

    d: int = DEFAULTS.dim
    n_max: int = DEFAULTS.n_max
    m_copies: int = 3
    hs_dim: int = 8
    ball_samples: int = 20
    subsequence_samples: int = 5
    radius_min: float = 0.05
    radius_max: float = 1.0
    patch_span: int = 4
    patch_dim: int = 2
    rng_seed: int = 0
    tol: float = DEFAULTS.tol
    cert_k: int = 10
    generators: int = 3

    def __post_init__(self) -> None:
        numeric = {
            "d": self.d,
            "n_max": self.n_max,
            "m_copies": self.m_copies,
            "hs_dim": self.hs_dim,
            "ball_samples": self.ball_samples,
            "subsequence_samples": self.subsequence_samples,
            "patch_span": self.patch_span,
            "patch_dim": self.patch_dim,
            "cert_k": self.cert_k,
            "generators": self.generators,
        }
        for name, value in numeric.items():
            if value < 1:
                raise ValueError(f"{name} must be positive, got {value}")
        if not 0 < self.radius_min <= self.radius_max:
            raise ValueError("radius range must satisfy 0 < min <= max")
        if self.patch_dim > self.patch_span:
            raise ValueError("patch_dim cannot exceed patch_span")
        if self.patch_span >= self.d:
            raise ValueError("patch_span must stay below the truncation dimension")

    def to_json(self) -> dict:
        return {"schema": 1, "kind": "battery-config", **asdict(self)}

    @classmethod
    def from_json(cls, doc: dict) -> "BatteryConfig":
        fields = {k: v for k, v in doc.items() if k not in ("schema", "kind")}
        return cls(**fields)

    def override(self, **kwargs) -> "BatteryConfig":
        return replace(self, **{k: v for k, v in kwargs.items() if v is not None})


def _stream(seed: int, label: str) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(_STREAM_LABELS[label],))
    )


def _sample_center(rng: np.random.Generator, d: int, cfg: BatteryConfig) -> np.ndarray:
    """Unit-norm center supported on a random low coordinate patch."""
    idx = rng.choice(cfg.patch_span, size=cfg.patch_dim, replace=False)
    coeffs = rng.standard_normal(cfg.patch_dim) + 1j * rng.standard_normal(cfg.patch_dim)
    center = np.zeros(d, dtype=complex)
    center[np.sort(idx)] = coeffs
    return center / norm(center)


def _sample_radius(rng: np.random.Generator, cfg: BatteryConfig) -> float:
    lo, hi = np.log(cfg.radius_min), np.log(cfg.radius_max)
    return float(np.exp(rng.uniform(lo, hi)))


def _sample_pair(rng: np.random.Generator, d: int, cfg: BatteryConfig) -> tuple[Ball, Ball]:
    u = Ball(_sample_center(rng, d, cfg), _sample_radius(rng, cfg))
    v = Ball(_sample_center(rng, d, cfg), _sample_radius(rng, cfg))
    return u, v


def _sample_block_center(
    rng: np.random.Generator, blocks: int, db: int, cfg: BatteryConfig
) -> np.ndarray:
    """Unit-norm center of a block-contiguous space, patch-supported per block."""
    parts = [_sample_center(rng, db, cfg) for _ in range(blocks)]
    center = np.concatenate(parts)
    return center / norm(center)


def _sample_hs_center(rng: np.random.Generator, h: int, cfg: BatteryConfig) -> np.ndarray:
    """Unit Hilbert-Schmidt-norm matrix supported on a low row/column patch,
    returned column-stacked."""
    span = min(cfg.patch_span, h)
    mat = np.zeros((h, h), dtype=complex)
    rows = rng.choice(span, size=min(cfg.patch_dim, span), replace=False)
    cols = rng.choice(span, size=min(cfg.patch_dim, span), replace=False)
    for i in np.sort(rows):
        for j in np.sort(cols):
            mat[i, j] = rng.standard_normal() + 1j * rng.standard_normal()
    mat /= np.linalg.norm(mat)
    return mat.ravel(order="F")


def orbit_coverage(
    T: TruncatedOperator,
    x: np.ndarray,
    targets: Sequence[Ball],
    n_max: int,
    d: int,
) -> float:
    """Fraction of target balls containing some orbit element of index
    0..n_max (a density proxy for the orbit)."""
    if not targets:
        return 0.0
    points = orbit(T, x, n_max, d)
    hits = 0
    for ball in targets:
        center = np.concatenate(
            [ball.center, np.zeros(d - ball.center.size, dtype=complex)]
        ) if ball.center.size < d else ball.center[:d]
        if any(norm(p - center) < ball.radius for p in points):
            hits += 1
    return hits / len(targets)


def _subsequence(seq: list[int], stride: int, offset: int) -> list[int]:
    return seq[offset::stride]


def hereditary_sample(
    T: TruncatedOperator,
    seq: Sequence[int],
    cfg: BatteryConfig,
) -> dict:
    """Hereditary proxy: random subsequences of the exponent sequence (random
    stride and offset, the full sequence always included) each scanned with
    the first-hit oracle over sampled ball pairs; pass means every sampled
    subsequence served every sampled pair."""
    rng = _stream(cfg.rng_seed, "hereditary")
    seq = [int(n) for n in seq]
    patterns = [(1, 0)]
    for _ in range(cfg.subsequence_samples - 1):
        stride = int(rng.integers(2, 4))
        offset = int(rng.integers(0, 3))
        patterns.append((stride, offset))
    pairs = [_sample_pair(rng, cfg.d, cfg) for _ in range(cfg.ball_samples)]
    cache = PowerCache(T, cfg.d)
    records = []
    verdict = True
    for s_idx, (stride, offset) in enumerate(patterns):
        sub = _subsequence(seq, stride, offset)
        for p_idx, (U, V) in enumerate(pairs):
            result = first_hit(T, U, V, cfg.n_max, cfg.d, exponents=sub, cache=cache)
            records.append(
                {
                    "subsequence": s_idx,
                    "stride": stride,
                    "offset": offset,
                    "pair": p_idx,
                    "feasible": result.feasible,
                    "n": result.n,
                    "dist": result.dist,
                }
            )
            verdict = verdict and result.feasible
    return {"verdict": "pass" if verdict else "fail", "records": records}


def _cond_certificate(T: TruncatedOperator, cfg: BatteryConfig) -> dict:
    try:
        cert = Certificate.default_for(cfg.cert_k, cfg.generators)
        report = check_certificate(T, cert, cfg.cert_k, cfg.tol)
    except CertificateError as exc:
        return {"verdict": "not_evaluated", "reason": str(exc)}
    return {"verdict": "pass" if report.verdict else "fail", "report": report.to_json()}


def _scan_pairs(
    T: TruncatedOperator,
    d: int,
    cfg: BatteryConfig,
    pairs: list[tuple[Ball, Ball]],
) -> dict:
    cache = PowerCache(T, d)
    records = []
    verdict = True
    for p_idx, (U, V) in enumerate(pairs):
        result = first_hit(T, U, V, cfg.n_max, d, cache=cache)
        records.append(
            {"pair": p_idx, "feasible": result.feasible, "n": result.n, "dist": result.dist}
        )
        verdict = verdict and result.feasible
    return {"verdict": "pass" if verdict else "fail", "records": records}


def _cond_direct_sum(T: TruncatedOperator, cfg: BatteryConfig) -> dict:
    rng = _stream(cfg.rng_seed, "direct_sum")
    m = cfg.m_copies
    D = m * cfg.d
    op = direct_sum(T, m)
    pairs = []
    for _ in range(cfg.ball_samples):
        u = Ball(_sample_block_center(rng, m, cfg.d, cfg), _sample_radius(rng, cfg))
        v = Ball(_sample_block_center(rng, m, cfg.d, cfg), _sample_radius(rng, cfg))
        pairs.append((u, v))
    out = _scan_pairs(op, D, cfg, pairs)
    out["copies"] = m
    return out


def _cond_left_multiplication(T: TruncatedOperator, cfg: BatteryConfig) -> dict:
    rng = _stream(cfg.rng_seed, "left_multiplication")
    h = cfg.hs_dim
    op = direct_sum(T, h)
    pairs = []
    for _ in range(cfg.ball_samples):
        u = Ball(_sample_hs_center(rng, h, cfg), _sample_radius(rng, cfg))
        v = Ball(_sample_hs_center(rng, h, cfg), _sample_radius(rng, cfg))
        pairs.append((u, v))
    out = _scan_pairs(op, h * h, cfg, pairs)
    out["hs_dim"] = h
    return out


def _cond_through_zero(T: TruncatedOperator, cfg: BatteryConfig) -> dict:
    rng = _stream(cfg.rng_seed, "through_zero")
    cache = PowerCache(T, cfg.d)
    records = []
    verdict = True
    for p_idx in range(cfg.ball_samples):
        U, V = _sample_pair(rng, cfg.d, cfg)
        W = Ball(np.zeros(cfg.d, dtype=complex), _sample_radius(rng, cfg))
        result = through_zero_condition(T, U, V, W, cfg.n_max, cfg.d, cache=cache)
        records.append(
            {"pair": p_idx, "feasible": result.feasible, "n": result.n, "dist": result.dist}
        )
        verdict = verdict and result.feasible
    return {"verdict": "pass" if verdict else "fail", "records": records}


@dataclass
class BatteryReport:
    operator: str
    config: BatteryConfig
    conditions: dict
    consistent: bool
    overall_pass: bool

    def verdicts(self) -> dict:
        return {name: self.conditions[name]["verdict"] for name in CONDITIONS}

    def to_json(self) -> dict:
        return {
            "schema": 1,
            "kind": "battery-report",
            "operator": self.operator,
            "config": self.config.to_json(),
            "conditions": self.conditions,
            "verdicts": self.verdicts(),
            "consistent": self.consistent,
            "overall": "pass" if self.overall_pass else "fail",
        }


def run_battery(T: TruncatedOperator, cfg: BatteryConfig) -> BatteryReport:
    """Evaluate the five conditions and flag whether their verdicts agree."""
    conditions = {
        "certificate": _cond_certificate(T, cfg),
        "hereditary": hereditary_sample(T, list(range(1, cfg.n_max + 1)), cfg),
        "direct_sum": _cond_direct_sum(T, cfg),
        "left_multiplication": _cond_left_multiplication(T, cfg),
        "through_zero": _cond_through_zero(T, cfg),
    }
    evaluated = [c["verdict"] for c in conditions.values() if c["verdict"] != "not_evaluated"]
    consistent = len(set(evaluated)) <= 1
    overall = bool(evaluated) and all(v == "pass" for v in evaluated)
    return BatteryReport(
        operator=T.label,
        config=cfg,
        conditions=conditions,
        consistent=consistent,
        overall_pass=overall,
    )


def _decay_along(T: TruncatedOperator, seq: list[int], cfg: BatteryConfig) -> dict:
    """Residuals ||T^{n_k} g|| for basis-vector generators along the sequence,
    judged with the certificate convergence rule."""
    gens = [basis_vector(i, cfg.generators) for i in range(1, cfg.generators + 1)]
    d = max(cfg.generators + seq[-1] * T.shift_width, cfg.d)
    M = T.materialize(d)
    series = []
    for g in gens:
        vec = np.concatenate([g, np.zeros(d - g.size, dtype=complex)])
        res = []
        power = vec
        prev = 0
        for n_k in seq:
            for _ in range(n_k - prev):
                power = M @ power
            prev = n_k
            res.append(norm(power))
        series.append(res)
    ok = all(series_converges(s, cfg.tol) for s in series)
    return {"verdict": "pass" if ok else "fail", "residuals": series}


def sequence_battery(T: TruncatedOperator, seq: Sequence[int], cfg: BatteryConfig) -> dict:
    """The two sequence-form conditions along {n_k}, compared against the
    certificate verdict.

    Condition one pairs a sequence-hypercyclicity proxy (first hits restricted
    to the sequence exponents over sampled ball pairs) with decay of the
    generator residuals along the sequence. Condition two asks, per sampled
    pair, for a threshold index past which every sequence exponent produces an
    intersection.
    """
    seq = [int(n) for n in seq]
    rng = _stream(cfg.rng_seed, "sequence")
    pairs = [_sample_pair(rng, cfg.d, cfg) for _ in range(cfg.ball_samples)]
    cache = PowerCache(T, cfg.d)

    hit_records = []
    hits_ok = True
    for p_idx, (U, V) in enumerate(pairs):
        result = first_hit(T, U, V, cfg.n_max, cfg.d, exponents=seq, cache=cache)
        hit_records.append(
            {"pair": p_idx, "feasible": result.feasible, "n": result.n, "dist": result.dist}
        )
        hits_ok = hits_ok and result.feasible
    decay = _decay_along(T, seq, cfg)
    verdict_seq = hits_ok and decay["verdict"] == "pass"

    rng_e = _stream(cfg.rng_seed, "eventual")
    eventual_records = []
    eventual_ok = True
    for p_idx in range(cfg.ball_samples):
        U, V = _sample_pair(rng_e, cfg.d, cfg)
        cap = exponent_cap(T, [U.center, V.center], cfg.d, cfg.n_max)
        window = sum(1 for n in seq if n <= cap)
        if window == 0:
            eventual_records.append({"pair": p_idx, "N": None, "window": 0})
            eventual_ok = False
            continue
        n_found, result = eventual_hit(T, seq, U, V, window, cfg.d, cache=cache)
        eventual_records.append({"pair": p_idx, "N": n_found, "window": window})
        eventual_ok = eventual_ok and n_found is not None

    try:
        cert = Certificate(
            seq=seq[: cfg.cert_k],
            y_gens=[basis_vector(i, cfg.generators) for i in range(1, cfg.generators + 1)],
            z_gens=[basis_vector(i, cfg.generators) for i in range(1, cfg.generators + 1)],
        )
        cert_report = check_certificate(T, cert, min(cfg.cert_k, len(seq)), cfg.tol)
        cert_verdict = "pass" if cert_report.verdict else "fail"
    except CertificateError as exc:
        cert_verdict = "not_evaluated"
        cert_report = None

    verdicts = {
        "sequence_and_decay": "pass" if verdict_seq else "fail",
        "eventual": "pass" if eventual_ok else "fail",
        "certificate": cert_verdict,
    }
    comparable = [v for v in verdicts.values() if v != "not_evaluated"]
    return {
        "schema": 1,
        "kind": "sequence-battery",
        "operator": T.label,
        "seq_prefix": seq[: min(len(seq), 16)],
        "verdicts": verdicts,
        "agree": len(set(comparable)) <= 1,
        "sequence_hits": hit_records,
        "decay": decay,
        "eventual": eventual_records,
        "certificate_report": cert_report.to_json() if cert_report else None,
        "config": cfg.to_json(),
    }
