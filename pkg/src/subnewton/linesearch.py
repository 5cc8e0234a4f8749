"""Armijo back-tracking line search.

Tries the geometric ladder alpha0, rho*alpha0, rho^2*alpha0, ... and
accepts the first (largest) step with

    F(x + alpha p) <= F(x) + alpha * beta * p^T g.

Non-finite trial values count as failed tests, so back-tracking
recovers from overflow regions.  If no tested step passes, a
LineSearchError is raised rather than returning an unvalidated step.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DataError, LineSearchError


@dataclass(frozen=True)
class LineSearchConfig:
    beta: float = 1e-4
    rho: float = 0.5
    max_iters: int = 50
    alpha0: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.beta < 1.0:
            raise DataError(f"beta must be in (0, 1), got {self.beta}")
        if not 0.0 < self.rho < 1.0:
            raise DataError(f"rho must be in (0, 1), got {self.rho}")
        if self.max_iters < 1 or self.alpha0 <= 0.0:
            raise DataError("max_iters must be >= 1 and alpha0 > 0")


def line_search(f, f0, slope, cfg=LineSearchConfig()):
    """Back-track until the Armijo test holds.

    Parameters
    ----------
    f : callable
        alpha -> F(x + alpha p).
    f0 : float
        F(x).
    slope : float
        Directional derivative p^T g; must be negative (descent).
    cfg : LineSearchConfig
        At most max_iters reductions, i.e. max_iters + 1 evaluations.

    Returns
    -------
    (alpha, evals) : accepted step and total number of f evaluations.
    """
    if not np.isfinite(f0):
        raise LineSearchError(f"objective at the current point is not finite: {f0}")
    if slope >= 0.0:
        raise LineSearchError(f"not a descent direction: p^T g = {slope:.3e} >= 0")

    alpha = cfg.alpha0
    evals = 0
    for _ in range(cfg.max_iters + 1):
        trial = f(alpha)
        evals += 1
        if np.isfinite(trial) and trial <= f0 + alpha * cfg.beta * slope:
            return alpha, evals
        alpha *= cfg.rho
    raise LineSearchError(
        f"no step satisfied the Armijo condition after {evals} evaluations "
        f"(last alpha tested: {alpha / cfg.rho:.3e})"
    )
