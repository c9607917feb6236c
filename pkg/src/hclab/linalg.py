"""Complex vector/matrix kernel: inner products, norms, open balls, and the
norm-ball constrained least-squares solver that the set oracles reduce to.

All vectors are 1-D complex ``numpy`` arrays indexed against the standard
basis ``e_1, e_2, ...`` (1-based in the mathematical convention, 0-based in
storage). Everything here is a pure function of its inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import DEFAULTS

__all__ = [
    "DimensionMismatch",
    "Ball",
    "basis_vector",
    "cvec",
    "inner",
    "norm",
    "op_norm",
    "support",
    "constrained_lsq",
]


class DimensionMismatch(ValueError):
    """Raised when two operands live in different coordinate dimensions."""


def cvec(entries: Sequence[complex] | np.ndarray) -> np.ndarray:
    """Coerce ``entries`` to a 1-D complex vector."""
    v = np.asarray(entries, dtype=complex)
    if v.ndim != 1:
        raise DimensionMismatch(f"expected a 1-D vector, got shape {v.shape}")
    return v


def basis_vector(i: int, d: int) -> np.ndarray:
    """Standard basis vector e_i (1-based) in dimension ``d``."""
    if not 1 <= i <= d:
        raise DimensionMismatch(f"basis index {i} outside 1..{d}")
    v = np.zeros(d, dtype=complex)
    v[i - 1] = 1.0
    return v


def support(v: np.ndarray) -> int:
    """Largest 1-based index with a nonzero entry (0 for the zero vector)."""
    nz = np.nonzero(np.asarray(v).ravel())[0]
    return int(nz[-1]) + 1 if nz.size else 0


def norm(v: np.ndarray) -> float:
    """Euclidean norm (Frobenius norm for matrices)."""
    return float(np.linalg.norm(v))


def inner(u: np.ndarray, v: np.ndarray) -> complex:
    """Inner product, linear in ``u`` and conjugate-linear in ``v``."""
    u = np.asarray(u)
    v = np.asarray(v)
    if u.shape != v.shape:
        raise DimensionMismatch(f"inner product needs equal shapes, got {u.shape} and {v.shape}")
    return complex(np.vdot(v, u))


def op_norm(M: np.ndarray) -> float:
    """Operator 2-norm (largest singular value)."""
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    return float(np.linalg.svd(M, compute_uv=False)[0])


@dataclass(frozen=True)
class Ball:
    """Open metric ball around a vector or matrix center.

    Membership is strict: the boundary does not belong to the ball.
    """

    center: np.ndarray
    radius: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", np.asarray(self.center, dtype=complex))
        if not self.radius > 0:
            raise ValueError(f"ball radius must be positive, got {self.radius}")

    def contains(self, p: np.ndarray) -> bool:
        return norm(np.asarray(p) - self.center) < self.radius

    @property
    def support(self) -> int:
        return support(self.center)

    def describe(self) -> dict:
        return {"support": self.support, "center_norm": norm(self.center), "radius": self.radius}


def _secular_root(s2: np.ndarray, w2: np.ndarray, r: float) -> float:
    """Multiplier lam > 0 with ||step(lam)|| = r for the boundary-constrained
    least-squares step, where ||step(lam)||^2 = sum s2*w2 / (s2+lam)^2.

    Bisection brackets the root, Newton (on 1/r - 1/||step||, which is smooth
    and monotone) refines it; iterates are projected back into the bracket.
    """

    def step_norm(lam: float) -> float:
        return math.sqrt(float(np.sum(s2 * w2 / (s2 + lam) ** 2)))

    target = r
    lo = 0.0
    hi = math.sqrt(float(np.sum(s2 * w2))) / r  # ||step(lam)|| <= ||M^H c|| / lam
    while step_norm(hi) > target:
        hi *= 2.0
    lam = 0.5 * hi
    tol = DEFAULTS.secular_tol * max(1.0, r)
    for _ in range(DEFAULTS.secular_max_iter):
        n_lam = step_norm(lam)
        if abs(n_lam - target) <= tol:
            return lam
        if n_lam > target:
            lo = lam
        else:
            hi = lam
        # Newton on f(lam) = 1/r - 1/n(lam); f' = n'(lam) / n(lam)^2
        phi_prime = -2.0 * float(np.sum(s2 * w2 / (s2 + lam) ** 3))
        n_prime = phi_prime / (2.0 * n_lam)
        f_val = 1.0 / target - 1.0 / n_lam
        f_prime = n_prime / (n_lam * n_lam)
        step = f_val / f_prime if f_prime != 0 else 0.0
        lam_new = lam - step
        if not lo < lam_new < hi:
            lam_new = 0.5 * (lo + hi)
        lam = lam_new
    return lam


def constrained_lsq(
    M: np.ndarray,
    a: np.ndarray,
    r: float,
    b: np.ndarray,
    *,
    svd: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None,
) -> tuple[np.ndarray, float]:
    """Minimize ||M x - b|| subject to ||x - a|| <= r.

    Returns ``(x, dist)`` with ``dist = ||M x - b||`` at the minimizer. The
    problem is always feasible (``x = a`` is admissible). Solved through the
    SVD of ``M``: if the minimum-norm unconstrained step fits inside the
    ball the pseudoinverse solution is returned, otherwise the boundary
    multiplier is found by a safeguarded 1-D root find on the secular
    equation. ``svd`` may carry a precomputed ``numpy.linalg.svd(M)`` triple
    (``full_matrices=False``) to share factorizations across calls.

    ``r == 0`` degenerates to ``(a, ||M a - b||)`` by continuity.
    """
    M = np.asarray(M, dtype=complex)
    a = cvec(a)
    b = cvec(b)
    if M.ndim != 2 or M.shape[1] != a.size or M.shape[0] != b.size:
        raise DimensionMismatch(
            f"incompatible shapes: M {M.shape}, a {a.shape}, b {b.shape}"
        )
    if r < 0:
        raise ValueError(f"ball radius must be nonnegative, got {r}")
    if r == 0:
        return a.copy(), norm(M @ a - b)

    c = b - M @ a
    if svd is None:
        U, s, Vh = np.linalg.svd(M, full_matrices=False)
    else:
        U, s, Vh = svd
    w = U.conj().T @ c
    cutoff = (s[0] * max(M.shape) * np.finfo(float).eps) if s.size and s[0] > 0 else 0.0
    pos = s > cutoff

    coef = np.zeros_like(w)
    if np.any(pos):
        coef[pos] = w[pos] / s[pos]
    if norm(coef) <= r:
        x = a + Vh.conj().T @ coef
        return x, norm(M @ x - b)

    s2 = (s[pos] * s[pos]).astype(float)
    w2 = np.abs(w[pos]) ** 2
    lam = _secular_root(s2, w2, r)
    coef = np.zeros_like(w)
    coef[pos] = s[pos] * w[pos] / (s[pos] * s[pos] + lam)
    x = a + Vh.conj().T @ coef
    return x, norm(M @ x - b)
