"""Central defaults for dimensions, scan lengths, and numeric tolerances.

Every runtime knob lives here so that the resolution order is uniform across
the CLI and the library: command-line flags override config files, config
files override these defaults.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Defaults:
    """Package-wide settings. Tolerances are absolute unless noted otherwise.

    dim            default truncation dimension
    n_max          default exponent scan ceiling
    tol            residual tolerance for certificate verdicts
    trend_ratio    per-step decay factor a residual series must beat, over the
                   last sampled steps, to count as converging when it has not
                   yet dropped below ``tol``
    ball_shrink    relative radius shrink used to certify strict-interior
                   witnesses for open balls
    secular_tol    constraint-residual tolerance of the boundary solver in
                   ``constrained_lsq``
    secular_max_iter  iteration cap of that boundary solver
    weight_guard   refuse shift materialization once d * max|weight| exceeds
                   this (keeps powers of unbounded-weight shifts representable)
    rank_rtol      singular values below rank_rtol * sigma_max count as zero
                   in the dense-range test for operator sequences
    max_generator_support  cap on the support of certificate generators
    """

    dim: int = 32
    n_max: int = 64
    tol: float = 1e-8
    trend_ratio: float = 0.9
    ball_shrink: float = 1e-9
    secular_tol: float = 1e-12
    secular_max_iter: int = 100
    weight_guard: float = 1e12
    rank_rtol: float = 1e-10
    max_generator_support: int = 64


DEFAULTS = Defaults()
