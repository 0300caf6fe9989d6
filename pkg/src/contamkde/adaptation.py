"""Lepski-type data-driven bandwidth selection on a dyadic grid.

Two families of rules:

* forward rules (``standard``, ``epsilon_reference``) keep the largest
  ``h`` whose estimate agrees with every smaller-bandwidth estimate up to a
  variance-scale threshold;
* reverse rules (``reverse``, ``reverse_conservative``) keep the smallest
  ``h`` whose estimate agrees with every larger-bandwidth estimate up to a
  bias-scale threshold ``c1 l^beta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_count, check_epsilon, check_positive, check_sample
from .estimators import Normalization, kde_at_zero
from .kernels import Kernel, make_order_kernel

__all__ = [
    "VARIANTS",
    "dyadic_grid",
    "default_c1",
    "LepskiConfig",
    "LepskiResult",
    "kde_on_grid",
    "lepski_standard",
    "lepski_epsilon_reference",
    "lepski_reverse",
    "lepski_reverse_conservative",
    "lepski_select",
    "LepskiKDE",
]

VARIANTS = ("standard", "epsilon_reference", "reverse", "reverse_conservative")
DEFAULT_ADAPTIVE_ORDER = 6


def dyadic_grid(n: int) -> np.ndarray:
    """Descending ``1, 1/2, ..., 2^-m`` with ``2^-m <= 1/n < 2^-(m-1)``."""
    n = check_count(n, "n")
    m = (n - 1).bit_length()
    return np.ldexp(1.0, -np.arange(m + 1))


def default_c1(k: Kernel) -> float:
    """``4 sqrt(sup|K| int K^2)``."""
    return 4.0 * math.sqrt(k.sup_norm_bound * k.l2_bound)


@dataclass(frozen=True)
class LepskiConfig:
    """Selector settings.

    ``grid=None`` means the dyadic grid of the sample size at hand.
    ``epsilon`` feeds ``epsilon_reference`` and ``beta0`` feeds the reverse
    rules (for ``reverse_conservative`` it is the known lower bound).
    """

    c1: float
    variant: str = "standard"
    norm: Normalization = field(default_factory=Normalization.plain)
    grid: Optional[Tuple[float, ...]] = None
    epsilon: Optional[float] = None
    beta0: Optional[float] = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        c1 = float(self.c1)
        if np.isnan(c1) or c1 < 0:
            raise ValueError(f"c1 must be nonnegative, got {self.c1}")
        object.__setattr__(self, "c1", c1)
        if self.grid is not None:
            g = tuple(float(v) for v in self.grid)
            if not g or any(v <= 0 for v in g) or any(a <= b for a, b in zip(g, g[1:])):
                raise ValueError("grid must be a nonempty strictly decreasing list of positive bandwidths")
            object.__setattr__(self, "grid", g)

    def grid_for(self, n: int) -> np.ndarray:
        return dyadic_grid(n) if self.grid is None else np.asarray(self.grid)


@dataclass
class LepskiResult:
    """Selected bandwidth and the full diagnostic record.

    ``tests[i, j]`` is True when the pair ``(grid[i], grid[j])`` passes its
    comparison (only pairs in the rule's quantifier range are meaningful;
    the rest are True). ``admissible[i]`` says whether ``grid[i]`` belongs to
    the defining set.
    """

    h_hat: float
    estimate: float
    grid: np.ndarray
    estimates: np.ndarray
    thresholds: np.ndarray
    tests: np.ndarray
    admissible: np.ndarray
    empty: bool
    variant: str

    def __iter__(self):
        # allows ``h_hat, estimate = lepski_standard(...)``
        return iter((self.h_hat, self.estimate))


def kde_on_grid(points, k: Kernel, grid, norm: Normalization) -> np.ndarray:
    """Estimates at every bandwidth of ``grid``; points are summed in sorted order."""
    x = np.sort(check_sample(points))
    return np.array([kde_at_zero(x, k, float(h), norm) for h in grid])


def _select(points, k: Kernel, cfg: LepskiConfig, thr_of_l: np.ndarray, forward: bool,
            variant: str) -> LepskiResult:
    x = np.sort(check_sample(points))
    grid = cfg.grid_for(x.size)
    est = kde_on_grid(x, k, grid, cfg.norm)
    diff = np.abs(est[:, None] - est[None, :])
    # rows: candidate h (index i), columns: comparison l (index j)
    i, j = np.indices(diff.shape)
    in_range = grid[j] <= grid[i] if forward else grid[j] >= grid[i]
    thr = np.broadcast_to(thr_of_l[None, :], diff.shape)
    tests = np.where(in_range, diff <= thr, True)
    admissible = tests.all(axis=1)
    empty = not admissible.any()
    if empty:
        h_hat = 1.0 / x.size if forward else 1.0
    else:
        h_hat = float(grid[admissible].max() if forward else grid[admissible].min())
    idx = np.flatnonzero(grid == h_hat)
    estimate = float(est[idx[0]]) if idx.size else kde_at_zero(x, k, h_hat, cfg.norm)
    return LepskiResult(h_hat, estimate, grid, est, np.asarray(thr_of_l, dtype=float),
                        tests, admissible, empty, variant)


def _log_n(points) -> Tuple[int, float]:
    n = np.asarray(points).shape[0]
    if n < 2:
        raise ValueError("forward Lepski rules need at least 2 points (log n must be positive)")
    return n, math.log(n)


def lepski_standard(points, k: Kernel, cfg: LepskiConfig) -> LepskiResult:
    """Largest ``h`` with ``|f_h - f_l| <= c1 sqrt(log n / (n l))`` for all ``l <= h``.

    Empty defining set gives ``h_hat = 1/n``.
    """
    n, logn = _log_n(check_sample(points))
    grid = cfg.grid_for(n)
    thr = cfg.c1 * np.sqrt(logn / (n * grid))
    return _select(points, k, cfg, thr, True, "standard")


def lepski_epsilon_reference(points, k: Kernel, epsilon: float, cfg: LepskiConfig) -> LepskiResult:
    """Standard rule with threshold ``c1 (sqrt(log n / (n l)) + epsilon / l)``.

    ``epsilon`` is only a threshold scale here, so values above 1/2 are allowed.
    """
    epsilon = float(epsilon)
    if np.isnan(epsilon) or epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    n, logn = _log_n(check_sample(points))
    grid = cfg.grid_for(n)
    thr = cfg.c1 * (np.sqrt(logn / (n * grid)) + epsilon / grid)
    return _select(points, k, cfg, thr, True, "epsilon_reference")


def lepski_reverse(points, k: Kernel, beta0: float, cfg: LepskiConfig) -> LepskiResult:
    """Smallest ``h`` with ``|f_h - f_l| <= c1 l^beta0`` for all ``l >= h``.

    Empty defining set gives ``h_hat = 1``.
    """
    beta0 = check_positive(beta0, "beta0")
    x = check_sample(points)
    grid = cfg.grid_for(x.size)
    thr = cfg.c1 * grid**beta0
    return _select(x, k, cfg, thr, False, "reverse")


def lepski_reverse_conservative(points, k: Kernel, beta0_lower: float, cfg: LepskiConfig) -> LepskiResult:
    """The reverse rule run with a known lower bound on the smoothness."""
    res = lepski_reverse(points, k, beta0_lower, cfg)
    res.variant = "reverse_conservative"
    return res


def lepski_select(points, k: Kernel, cfg: LepskiConfig) -> LepskiResult:
    """Dispatch on ``cfg.variant``."""
    if cfg.variant == "standard":
        return lepski_standard(points, k, cfg)
    if cfg.variant == "epsilon_reference":
        if cfg.epsilon is None:
            raise ValueError("epsilon_reference needs cfg.epsilon")
        return lepski_epsilon_reference(points, k, cfg.epsilon, cfg)
    if cfg.beta0 is None:
        raise ValueError(f"{cfg.variant} needs cfg.beta0")
    if cfg.variant == "reverse":
        return lepski_reverse(points, k, cfg.beta0, cfg)
    return lepski_reverse_conservative(points, k, cfg.beta0, cfg)


class LepskiKDE(BaseEstimator):
    """Kernel estimate of ``f(0)`` with a Lepski-selected bandwidth.

    Parameters
    ----------
    variant : {"standard", "epsilon_reference", "reverse", "reverse_conservative"}
    c1 : float, optional
        Threshold constant; defaults to ``4 sqrt(sup|K| int K^2)``.
    kernel_order : int
    normalization : {"plain", "known_epsilon"}
    epsilon : float, optional
        Needed by ``epsilon_reference`` and by ``known_epsilon``.
    beta0 : float, optional
        Needed by the reverse rules (a lower bound for the conservative one).

    Attributes
    ----------
    h_hat_, estimate_ : float
    result_ : LepskiResult
    kernel_ : Kernel
    c1_ : float
    """

    def __init__(self, variant="standard", c1=None, kernel_order=DEFAULT_ADAPTIVE_ORDER,
                 normalization="plain", epsilon=None, beta0=None):
        self.variant = variant
        self.c1 = c1
        self.kernel_order = kernel_order
        self.normalization = normalization
        self.epsilon = epsilon
        self.beta0 = beta0

    def fit(self, X, y=None):
        x = check_sample(X, name="X")
        self.kernel_ = make_order_kernel(self.kernel_order)
        self.c1_ = default_c1(self.kernel_) if self.c1 is None else float(self.c1)
        if self.normalization == "plain":
            norm = Normalization.plain()
        elif self.normalization == "known_epsilon":
            if self.epsilon is None:
                raise ValueError("known_epsilon normalization needs epsilon")
            norm = Normalization.known_epsilon(check_epsilon(self.epsilon))
        else:
            raise ValueError(f"unknown normalization {self.normalization!r}")
        cfg = LepskiConfig(self.c1_, self.variant, norm, epsilon=self.epsilon, beta0=self.beta0)
        self.result_ = lepski_select(x, self.kernel_, cfg)
        self.h_hat_ = self.result_.h_hat
        self.estimate_ = self.result_.estimate
        return self

    def predict(self, X=None):
        check_is_fitted(self, "estimate_")
        return self.estimate_
