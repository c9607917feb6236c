"""Structured operator families that materialize at any truncation dimension.

Each operator is defined by its action on the standard basis and can be
realized as an exact d x d matrix for every d. Shift-class operators carry
their shift width (coordinate lookahead per application) so callers can size
truncations with a guard band that keeps power applications exact, and an
exact right inverse where one exists.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .config import DEFAULTS
from .linalg import cvec, norm
from .linalg import support as _support

__all__ = [
    "ZooError",
    "GuardBandError",
    "UnknownOperatorError",
    "TruncatedOperator",
    "Identity",
    "WeightedBackwardShift",
    "WeightedForwardShift",
    "Diagonal",
    "RankOne",
    "DenseOperator",
    "Scaled",
    "OperatorSum",
    "Composed",
    "DirectSum",
    "OperatorPower",
    "identity_plus",
    "weighted_backward_shift",
    "rank_one",
    "direct_sum",
    "check_guard",
    "exponent_cap",
    "make_operator",
    "zoo_entries",
]

WeightFn = Callable[[int], complex]


class ZooError(ValueError):
    """Raised for invalid operator constructions or materializations."""


class GuardBandError(ZooError):
    """Raised when a truncation dimension is too small for an exact power
    application. Carries the smallest sufficient dimension."""

    def __init__(self, required: int, message: str):
        super().__init__(message)
        self.required = required


class UnknownOperatorError(ZooError):
    """Raised by the registry for an unrecognized operator id."""


def _as_weight_fn(w: complex | Sequence[complex] | WeightFn) -> WeightFn:
    if callable(w):
        return w
    if np.isscalar(w):
        const = complex(w)
        return lambda i: const
    seq = [complex(x) for x in w]

    def from_seq(i: int) -> complex:
        if i > len(seq):
            raise ZooError(f"weight sequence of length {len(seq)} has no index {i}")
        return seq[i - 1]

    return from_seq


class TruncatedOperator:
    """Base class: a lazily generated operator family on the basis {e_i}.

    ``materialize(d)`` returns the exact compression to span{e_1..e_d} as a
    read-only complex matrix, cached per dimension. Materialization is
    deterministic, so concurrent calls always agree.
    """

    shift_width: int = 0
    block_count: int = 1

    def __init__(self, label: str):
        self.label = label
        self._cache: dict[int, np.ndarray] = {}

    def _build(self, d: int) -> np.ndarray:
        raise NotImplementedError

    def materialize(self, d: int) -> np.ndarray:
        if not isinstance(d, (int, np.integer)) or d < 1:
            raise ZooError(f"truncation dimension must be a positive integer, got {d}")
        d = int(d)
        mat = self._cache.get(d)
        if mat is None:
            mat = np.ascontiguousarray(self._build(d), dtype=complex)
            if mat.shape != (d, d):
                raise ZooError(f"{self.label}: materialization returned shape {mat.shape}")
            mat.flags.writeable = False
            self._cache[d] = mat
        return mat

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = cvec(x)
        return self.materialize(x.size) @ x

    def norm_formula(self, d: int) -> float | None:
        """Exact closed form for the operator norm at truncation d, if known."""
        return None

    @property
    def right_inverse(self) -> "TruncatedOperator | None":
        return None

    def required_dim(self, support: int, n: int) -> int:
        """Smallest truncation at which applying the operator ``n`` times to
        vectors supported on e_1..e_support stays exact (no boundary loss).

        For a direct sum, ``support`` is measured per block and the result is
        a total dimension.
        """
        return max(1, support + n * self.shift_width)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"<{type(self).__name__} {self.label!r}>"

    def __str__(self) -> str:
        return self.label


class Identity(TruncatedOperator):
    def __init__(self):
        super().__init__("identity")

    def _build(self, d: int) -> np.ndarray:
        return np.eye(d, dtype=complex)

    def norm_formula(self, d: int) -> float:
        return 1.0

    @property
    def right_inverse(self) -> "TruncatedOperator":
        return self


class WeightedBackwardShift(TruncatedOperator):
    """(Tx)_i = w_i * x_{i+1}; norm at truncation d equals max_{i<d} |w_i|."""

    shift_width = 1

    def __init__(self, weights: complex | Sequence[complex] | WeightFn, label: str | None = None):
        self.weight = _as_weight_fn(weights)
        self._constant = complex(weights) if np.isscalar(weights) else None
        super().__init__(label or "backward-shift")

    def _build(self, d: int) -> np.ndarray:
        vals = [self.weight(i) for i in range(1, d)]
        wmax = max((abs(v) for v in vals), default=0.0)
        if d * wmax > DEFAULTS.weight_guard:
            raise ZooError(
                f"{self.label}: refusing materialization at d={d}, "
                f"d * max|w| = {d * wmax:.3e} exceeds {DEFAULTS.weight_guard:.0e}"
            )
        M = np.zeros((d, d), dtype=complex)
        for i in range(1, d):
            M[i - 1, i] = vals[i - 1]
        return M

    def norm_formula(self, d: int) -> float:
        return max((abs(self.weight(i)) for i in range(1, d)), default=0.0)

    @property
    def right_inverse(self) -> "TruncatedOperator":
        if self._constant is not None and self._constant == 0:
            raise ZooError(f"{self.label}: zero weight admits no right inverse")
        w = self.weight

        def reciprocal(i: int) -> complex:
            wi = w(i)
            if wi == 0:
                raise ZooError(f"{self.label}: weight w_{i} = 0 admits no right inverse")
            return 1.0 / wi

        return WeightedForwardShift(reciprocal, label=f"{self.label}^r")


class WeightedForwardShift(TruncatedOperator):
    """(Sx)_{i+1} = v_i * x_i; e_d is annihilated at truncation d."""

    shift_width = 1

    def __init__(self, weights: complex | Sequence[complex] | WeightFn, label: str | None = None):
        self.weight = _as_weight_fn(weights)
        super().__init__(label or "forward-shift")

    def _build(self, d: int) -> np.ndarray:
        M = np.zeros((d, d), dtype=complex)
        for i in range(1, d):
            M[i, i - 1] = self.weight(i)
        return M

    def norm_formula(self, d: int) -> float:
        return max((abs(self.weight(i)) for i in range(1, d)), default=0.0)


class Diagonal(TruncatedOperator):
    def __init__(self, entries: complex | Sequence[complex] | WeightFn, label: str | None = None):
        self.entry = _as_weight_fn(entries)
        super().__init__(label or "diagonal")

    def _build(self, d: int) -> np.ndarray:
        return np.diag([self.entry(i) for i in range(1, d + 1)]).astype(complex)

    def norm_formula(self, d: int) -> float:
        return max(abs(self.entry(i)) for i in range(1, d + 1))

    @property
    def right_inverse(self) -> "TruncatedOperator":
        entry = self.entry

        def reciprocal(i: int) -> complex:
            ei = entry(i)
            if ei == 0:
                raise ZooError(f"{self.label}: zero diagonal entry admits no inverse")
            return 1.0 / ei

        return Diagonal(reciprocal, label=f"{self.label}^-1")


class RankOne(TruncatedOperator):
    """g (x) h: f -> <f, h> g. Matrix is outer(g, conj(h)) at truncation."""

    def __init__(self, g: np.ndarray, h: np.ndarray, label: str | None = None):
        self.g = cvec(g)
        self.h = cvec(h)
        if norm(self.g) == 0 or norm(self.h) == 0:
            raise ZooError("rank-one factors must be nonzero")
        super().__init__(label or "rank-one")

    def _pad(self, v: np.ndarray, d: int) -> np.ndarray:
        out = np.zeros(d, dtype=complex)
        out[: min(d, v.size)] = v[: min(d, v.size)]
        return out

    def _build(self, d: int) -> np.ndarray:
        return np.outer(self._pad(self.g, d), self._pad(self.h, d).conj())

    def norm_formula(self, d: int) -> float:
        return norm(self._pad(self.g, d)) * norm(self._pad(self.h, d))


class DenseOperator(TruncatedOperator):
    """A fixed matrix, extended by zeros (or cut top-left) at other dims."""

    def __init__(self, mat: np.ndarray, label: str | None = None):
        self.mat = np.asarray(mat, dtype=complex)
        if self.mat.ndim != 2 or self.mat.shape[0] != self.mat.shape[1]:
            raise ZooError(f"dense operator needs a square matrix, got {self.mat.shape}")
        super().__init__(label or "dense")

    def _build(self, d: int) -> np.ndarray:
        k = min(d, self.mat.shape[0])
        out = np.zeros((d, d), dtype=complex)
        out[:k, :k] = self.mat[:k, :k]
        return out


class Scaled(TruncatedOperator):
    def __init__(self, alpha: complex, inner_op: TruncatedOperator, label: str | None = None):
        self.alpha = complex(alpha)
        self.inner = inner_op
        self.shift_width = inner_op.shift_width
        super().__init__(label or f"{alpha}*{inner_op.label}")

    def _build(self, d: int) -> np.ndarray:
        return self.alpha * self.inner.materialize(d)

    def norm_formula(self, d: int) -> float | None:
        base = self.inner.norm_formula(d)
        return None if base is None else abs(self.alpha) * base

    @property
    def right_inverse(self) -> "TruncatedOperator | None":
        if self.alpha == 0:
            return None
        base = self.inner.right_inverse
        if base is None:
            return None
        return Scaled(1.0 / self.alpha, base, label=f"{self.label}^r")


class OperatorSum(TruncatedOperator):
    def __init__(self, terms: Sequence[TruncatedOperator], label: str | None = None):
        if not terms:
            raise ZooError("operator sum needs at least one term")
        self.terms = list(terms)
        self.shift_width = max(t.shift_width for t in self.terms)
        super().__init__(label or "+".join(t.label for t in self.terms))

    def _build(self, d: int) -> np.ndarray:
        out = np.zeros((d, d), dtype=complex)
        for t in self.terms:
            out = out + t.materialize(d)
        return out


class Composed(TruncatedOperator):
    """Composition, first factor applied last: Composed([A, B]) acts as A(B x).

    The compression of a composition is computed as the product of the
    factors' compressions; with the guard band (widths add) this is exact on
    vectors supported away from the truncation edge.
    """

    def __init__(self, factors: Sequence[TruncatedOperator], label: str | None = None):
        if not factors:
            raise ZooError("composition needs at least one factor")
        self.factors = list(factors)
        self.shift_width = sum(f.shift_width for f in self.factors)
        super().__init__(label or "*".join(f.label for f in self.factors))

    def _build(self, d: int) -> np.ndarray:
        out = self.factors[0].materialize(d)
        for f in self.factors[1:]:
            out = out @ f.materialize(d)
        return out


class DirectSum(TruncatedOperator):
    """m block-contiguous copies: block j occupies coordinates
    (j-1)*db+1 .. j*db at per-block truncation db = d / m."""

    def __init__(self, inner_op: TruncatedOperator, copies: int, label: str | None = None):
        if copies < 1:
            raise ZooError(f"direct sum needs at least one copy, got {copies}")
        if inner_op.block_count != 1:
            raise ZooError("nested direct sums are not supported")
        self.inner = inner_op
        self.copies = int(copies)
        self.block_count = self.copies
        self.shift_width = inner_op.shift_width
        super().__init__(label or f"(+)^{copies} {inner_op.label}")

    def _build(self, d: int) -> np.ndarray:
        if d % self.copies:
            raise ZooError(
                f"{self.label}: total dimension {d} is not divisible by {self.copies} blocks"
            )
        db = d // self.copies
        blk = self.inner.materialize(db)
        out = np.zeros((d, d), dtype=complex)
        for j in range(self.copies):
            out[j * db : (j + 1) * db, j * db : (j + 1) * db] = blk
        return out

    def norm_formula(self, d: int) -> float | None:
        if d % self.copies:
            return None
        return self.inner.norm_formula(d // self.copies)

    @property
    def right_inverse(self) -> "TruncatedOperator | None":
        base = self.inner.right_inverse
        if base is None:
            return None
        return DirectSum(base, self.copies, label=f"{self.label}^r")

    def required_dim(self, support: int, n: int) -> int:
        return self.copies * self.inner.required_dim(support, n)


class OperatorPower(TruncatedOperator):
    """T^k as a lazily materialized operator (repeated multiplication)."""

    def __init__(self, base: TruncatedOperator, k: int):
        if k < 0:
            raise ZooError(f"power must be nonnegative, got {k}")
        self.base = base
        self.k = int(k)
        self.shift_width = base.shift_width * self.k
        self.block_count = base.block_count
        super().__init__(f"{base.label}^{k}")

    def _build(self, d: int) -> np.ndarray:
        out = np.eye(d, dtype=complex)
        M = self.base.materialize(d)
        for _ in range(self.k):
            out = out @ M
        return out


def check_guard(T: TruncatedOperator, vectors: Sequence[np.ndarray], n: int, d: int) -> None:
    """Validate the guard band for applying T^n at truncation d to vectors
    (and witnesses reachable from them); raises GuardBandError naming the
    smallest sufficient dimension. Supports of direct-sum inputs are measured
    per block."""
    if T.block_count == 1:
        supp = max((_support(v) for v in vectors), default=0)
        required = T.required_dim(supp, n)
        if d < required:
            raise GuardBandError(
                required,
                f"{T.label}: exponent {n} with support {supp} needs d >= {required}, got {d}",
            )
        return
    m = T.block_count
    if d % m:
        raise ZooError(f"{T.label}: dimension {d} is not divisible by {m} blocks")
    db = d // m
    supp = 0
    for v in vectors:
        blocks = cvec(v).reshape(m, db)
        supp = max(supp, max((_support(row) for row in blocks), default=0))
    required_block = T.inner.required_dim(supp, n)
    if db < required_block:
        raise GuardBandError(
            m * required_block,
            f"{T.label}: exponent {n} with per-block support {supp} needs "
            f"d >= {m * required_block}, got {d}",
        )


def exponent_cap(
    T: TruncatedOperator, vectors: Sequence[np.ndarray], d: int, n_max: int
) -> int:
    """Largest exponent <= n_max whose guard band fits inside dimension d."""
    if T.block_count == 1:
        width = T.shift_width
        supp = max((_support(v) for v in vectors), default=0)
        room = d
    else:
        width = T.inner.shift_width
        room = d // T.block_count
        supp = 0
        for v in vectors:
            blocks = cvec(v).reshape(T.block_count, room)
            supp = max(supp, max((_support(row) for row in blocks), default=0))
    if width == 0:
        return n_max
    return min(n_max, max(0, (room - supp) // width))


def weighted_backward_shift(
    weights: complex | Sequence[complex] | WeightFn, label: str | None = None
) -> WeightedBackwardShift:
    return WeightedBackwardShift(weights, label=label)


def rank_one(g: np.ndarray, h: np.ndarray, label: str | None = None) -> RankOne:
    return RankOne(g, h, label=label)


def direct_sum(op: TruncatedOperator, copies: int) -> TruncatedOperator:
    if copies == 1:
        return op
    return DirectSum(op, copies)


def identity_plus(op: TruncatedOperator, label: str | None = None) -> OperatorSum:
    return OperatorSum([Identity(), op], label=label or f"I+{op.label}")


def _parse_scalar(text: str, default: complex) -> complex:
    if not text:
        return default
    try:
        return complex(float(text))
    except ValueError:
        return complex(text)


_ZOO_DOC: list[tuple[str, str]] = [
    ("identity", "the identity operator (never hypercyclic)"),
    ("backshift", "unweighted unilateral backward shift (contractive, not hypercyclic)"),
    ("rolewicz:<lambda>", "lambda * backward shift; hypercyclic for |lambda| > 1 (default 2.0)"),
    ("salas:ones", "identity plus the unweighted backward shift (hypercyclic)"),
    ("maclane", "differentiation in Taylor coordinates: backward shift with weights w_i = i"),
    ("diag:<lambda>", "constant diagonal lambda * I (default 0.5; never hypercyclic)"),
]


def zoo_entries() -> list[tuple[str, str]]:
    """(id pattern, description) rows for the registry listing."""
    return list(_ZOO_DOC)


def make_operator(op_id: str) -> TruncatedOperator:
    """Resolve a registry id like ``rolewicz:2.0`` into an operator."""
    name, _, arg = op_id.partition(":")
    name = name.strip().lower()
    if name == "identity":
        return Identity()
    if name == "backshift":
        return WeightedBackwardShift(1.0, label="backshift")
    if name == "rolewicz":
        lam = _parse_scalar(arg, 2.0)
        if lam == 0:
            raise UnknownOperatorError("rolewicz scale must be nonzero")
        return WeightedBackwardShift(lam, label=f"rolewicz:{arg or '2.0'}")
    if name == "salas":
        if arg not in ("", "ones"):
            raise UnknownOperatorError(f"unknown salas variant {arg!r}; only 'ones' is available")
        return identity_plus(WeightedBackwardShift(1.0), label="salas:ones")
    if name == "maclane":
        return WeightedBackwardShift(lambda i: complex(i), label="maclane")
    if name == "diag":
        lam = _parse_scalar(arg, 0.5)
        return Diagonal(lam, label=f"diag:{arg or '0.5'}")
    known = ", ".join(pattern for pattern, _ in _ZOO_DOC)
    raise UnknownOperatorError(f"unknown operator id {op_id!r}; known ids: {known}")
