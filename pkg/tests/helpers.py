"""Independent brute-force oracles and sampling utilities for the tests.

The projected-gradient minimizer decides the same ball-constrained
least-squares problems as the library solver but shares none of its path:
no SVD, no secular equation, only matrix-vector products, a power-iteration
step size, and Euclidean ball projections.
"""

from __future__ import annotations

import numpy as np


def project_ball(x: np.ndarray, a: np.ndarray, r: float) -> np.ndarray:
    s = x - a
    ns = np.linalg.norm(s)
    if ns <= r:
        return x
    return a + s * (r / ns)


def sample_in_ball(rng: np.random.Generator, a: np.ndarray, r: float, count: int) -> np.ndarray:
    """Uniform samples in the complex ball around a (rows of the output)."""
    d = a.size
    g = rng.standard_normal((count, d)) + 1j * rng.standard_normal((count, d))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    radii = rng.random((count, 1)) ** (1.0 / (2 * d))
    return a + r * radii * g / norms


def power_iteration_sq(M: np.ndarray, iters: int = 300, seed: int = 0) -> float:
    """Largest eigenvalue of M^H M (squared top singular value) by power
    iteration; avoids any factorization."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(M.shape[1]) + 1j * rng.standard_normal(M.shape[1])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(iters):
        w = M.conj().T @ (M @ v)
        lam = np.linalg.norm(w)
        if lam == 0:
            return 0.0
        v = w / lam
    return float(lam)


def pgd_min_dist(
    M: np.ndarray,
    a: np.ndarray,
    r: float,
    b: np.ndarray,
    iters: int = 20000,
    grid: int = 32,
    seed: int = 0,
) -> tuple[np.ndarray, float]:
    """Grid seeding plus accelerated projected gradient descent (restarting
    FISTA) for min ||Mx - b|| over the closed ball ||x - a|| <= r."""
    rng = np.random.default_rng(seed)
    pts = np.vstack([sample_in_ball(rng, a, r, grid), a[None, :]])
    residuals = np.linalg.norm(pts @ M.T - b, axis=1)
    x = pts[int(np.argmin(residuals))]

    L = 2.0 * power_iteration_sq(M, seed=seed) * 1.02
    if L == 0:
        return a.copy(), float(np.linalg.norm(b))
    y = x.copy()
    t = 1.0
    f_prev = np.inf
    for _ in range(iters):
        grad = 2.0 * (M.conj().T @ (M @ y - b))
        x_new = project_ball(y - grad / L, a, r)
        f_new = float(np.linalg.norm(M @ x_new - b) ** 2)
        if f_new > f_prev:  # adaptive restart
            t = 1.0
            y = x
            continue
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        y = x_new + ((t - 1.0) / t_new) * (x_new - x)
        x, t, f_prev = x_new, t_new, f_new
    return x, float(np.linalg.norm(M @ x - b))


def pgd_min_dist_batch(
    Ms: np.ndarray,
    centers: np.ndarray,
    radii: np.ndarray,
    targets: np.ndarray,
    kappas: np.ndarray,
    Ls: np.ndarray,
    iters: int = 8000,
) -> np.ndarray:
    """Strongly-convex projected FISTA, vectorized over a batch of instances
    with known curvature bounds (step 1/L, momentum from the condition
    number). Returns the achieved distances."""
    B, m, n = Ms.shape
    x = centers.copy()
    y = centers.copy()
    beta = ((np.sqrt(kappas) - 1.0) / (np.sqrt(kappas) + 1.0))[:, None]
    step = (1.0 / Ls)[:, None]

    def apply(mats, vecs):
        return np.einsum("bij,bj->bi", mats, vecs)

    Mh = Ms.conj().transpose(0, 2, 1)
    for _ in range(iters):
        grad = 2.0 * apply(Mh, apply(Ms, y) - targets)
        x_new = y - step * grad
        s = x_new - centers
        ns = np.linalg.norm(s, axis=1)
        scale = np.minimum(1.0, radii / np.maximum(ns, 1e-300))
        x_new = centers + s * scale[:, None]
        y = x_new + beta * (x_new - x)
        x = x_new
    return np.linalg.norm(apply(Ms, x) - targets, axis=1)


def random_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    """Haar-ish unitary from the QR factorization of a complex Gaussian."""
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_spectrum_matrix(
    rng: np.random.Generator, d: int, sigma_lo: float, sigma_hi: float
) -> tuple[np.ndarray, float, float]:
    """Random matrix with singular values log-uniform in [sigma_lo, sigma_hi];
    returns (matrix, sigma_min, sigma_max)."""
    sigmas = np.exp(rng.uniform(np.log(sigma_lo), np.log(sigma_hi), size=d))
    Q = random_unitary(rng, d)
    P = random_unitary(rng, d)
    M = Q @ np.diag(sigmas) @ P.conj().T
    return M, float(sigmas.min()), float(sigmas.max())
