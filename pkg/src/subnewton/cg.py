"""Conjugate gradient for H p = -g with best-iterate tracking.

Classical CG with one modification: the iterate with the smallest
residual norm seen so far is remembered and returned, so an early stop
never hands back a worse direction than an earlier one.  The operator
is applied exactly once per iteration.
"""

from dataclasses import dataclass

import numpy as np

from .errors import CurvatureError, DataError

# s^T H s below this multiple of ||s||^2 counts as non-positive curvature
CURVATURE_EPS = 1e-32


@dataclass(frozen=True)
class CgConfig:
    """theta: relative residual tolerance; max_iters: maximum number of
    operator applications."""

    theta: float = 1e-4
    max_iters: int = 10

    def __post_init__(self):
        if not 0.0 < self.theta < 1.0:
            raise DataError(f"theta must be in (0, 1), got {self.theta}")
        if self.max_iters < 1:
            raise DataError(f"max_iters must be >= 1, got {self.max_iters}")


@dataclass
class CgReport:
    """Result of one CG solve.

    solution is the iterate with the smallest residual norm seen; when
    no iterate improved on the initial residual ||g|| within the
    iteration cap, it is the steepest-descent fallback -g (the
    algorithm's initialization) and residual_norm reports ||g||, still
    the smallest residual seen.
    """

    solution: np.ndarray
    residual_norm: float
    iterations: int
    converged: bool


def cg_solve(apply_H, g, cfg):
    """Approximately solve H p = -g to ||H p + g|| <= theta ||g||.

    apply_H must be symmetric positive definite on the relevant
    subspace; non-positive curvature raises CurvatureError.  Returns the
    best iterate by residual norm, which satisfies the tolerance iff
    `converged` is set.  The best solution starts at -g, so a truncated
    solve always hands back a descent direction for SPD H.
    """
    g = np.asarray(g, dtype=np.float64)
    g_norm = float(np.linalg.norm(g))
    if g_norm == 0.0:
        return CgReport(np.zeros_like(g), 0.0, 0, True)
    threshold = cfg.theta * g_norm

    r = -g
    s = r.copy()
    p = np.zeros_like(g)
    p_best = s.copy()
    r_best_norm = g_norm
    rs = float(r @ r)

    iterations = 0
    converged = False
    for _ in range(cfg.max_iters):
        Hs = apply_H(s)
        iterations += 1
        curvature = float(s @ Hs)
        if curvature <= CURVATURE_EPS * float(s @ s):
            raise CurvatureError(
                f"non-positive curvature s^T H s = {curvature:.3e} at CG iteration "
                f"{iterations}; operator is not positive definite"
            )
        alpha = rs / curvature
        p = p + alpha * s
        r = r - alpha * Hs
        r_norm = float(np.linalg.norm(r))
        if r_norm <= r_best_norm:
            r_best_norm = r_norm
            p_best = p.copy()
        if r_norm <= threshold:
            converged = True
            break
        rs_next = float(r @ r)
        s = r + (rs_next / rs) * s
        rs = rs_next

    return CgReport(p_best, r_best_norm, iterations, converged)
