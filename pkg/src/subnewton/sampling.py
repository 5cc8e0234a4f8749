"""Sub-sampled gradient and Hessian estimators.

Index sets S_g and S_H are drawn uniformly (with or without
replacement) and the data terms scaled by n/|S|, so the estimators are
unbiased for the full-data quantities; the lam*x regularization term is
added deterministically and never sampled.  Draws are keyed by
(seed, iteration, purpose) so every outer iteration sees fresh,
reproducible sets.
"""

from dataclasses import dataclass

import numpy as np

from . import softmax
from .errors import DataError
from .rng import GRAD_STREAM, HESS_STREAM, stream_rng


@dataclass(frozen=True)
class SampleConfig:
    gradient_fraction: float = 1.0
    hessian_fraction: float = 1.0
    with_replacement: bool = False
    seed: int = 0

    def __post_init__(self):
        for name in ("gradient_fraction", "hessian_fraction"):
            f = getattr(self, name)
            if not 0.0 < f <= 1.0:
                raise DataError(f"{name} must be in (0, 1], got {f}")


def sample_size(fraction, n):
    return max(1, int(round(fraction * n)))


def _draw(rng, n, size, with_replacement):
    if with_replacement:
        return np.sort(rng.integers(0, n, size=size))
    if size == n:
        # full sample, in order: keeps f = 1 runs bit-identical to
        # the unsampled evaluation
        return np.arange(n)
    return np.sort(rng.choice(n, size=size, replace=False))


def draw_samples(cfg, n, iteration):
    """Index sets (S_g, S_H) for one outer iteration.

    Sizes are max(1, round(f*n)); sets are sorted ascending (summation
    order is fixed), drawn independently from streams keyed by
    (seed, iteration, purpose).
    """
    if n < 1:
        raise DataError("cannot sample from an empty dataset")
    s_g = _draw(
        stream_rng(cfg.seed, iteration, GRAD_STREAM),
        n,
        sample_size(cfg.gradient_fraction, n),
        cfg.with_replacement,
    )
    s_h = _draw(
        stream_rng(cfg.seed, iteration, HESS_STREAM),
        n,
        sample_size(cfg.hessian_fraction, n),
        cfg.with_replacement,
    )
    return s_g, s_h


class SubsampledOracle:
    """Gradient/Hessian estimators closed over one iteration's samples."""

    def __init__(self, prob, cfg, iteration):
        self.prob = prob
        n = prob.dataset.n_rows
        self.s_g, self.s_h = draw_samples(cfg, n, iteration)
        self._view_g = prob.dataset.take(self.s_g)
        self._view_h = prob.dataset.take(self.s_h)
        self.scale_g = n / len(self.s_g)
        self.scale_h = n / len(self.s_h)

    def gradient(self, x):
        """(n/|S_g|) * sum_{j in S_g} grad f_j(x) + lam * x."""
        data = softmax.data_gradient(self._view_g, x)
        return self.scale_g * data + self.prob.lam * np.asarray(x, dtype=np.float64)

    def hessian_operator(self, x):
        """Linear map v -> (n/|S_H|) * sum_{j in S_H} H_j(x) v + lam * v."""
        return softmax.HessianOperator(
            self._view_h, x, self.prob.lam, scale=self.scale_h
        )

    def hess_vec(self, x, v):
        return self.hessian_operator(x).apply(v)
