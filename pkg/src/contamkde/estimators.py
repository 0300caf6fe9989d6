"""Kernel point estimators of ``f(0)`` and the oracle bandwidth formulas."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_count, check_epsilon, check_positive, check_sample
from .kernels import Kernel, eval_kernel, make_order_kernel

__all__ = [
    "Normalization",
    "kde_at_zero",
    "kernel_sum",
    "kde_at_zero_multivariate",
    "oracle_bandwidth_structured",
    "oracle_bandwidth_plain",
    "oracle_bandwidth_arbitrary",
    "oracle_kernel_order",
    "PointKDE",
]


@dataclass(frozen=True)
class Normalization:
    """Divide the kernel sum by ``n`` (plain) or ``n (1 - epsilon)`` (known_epsilon)."""

    variant: str = "plain"
    epsilon: float = 0.0

    def __post_init__(self):
        if self.variant not in ("plain", "known_epsilon"):
            raise ValueError(f"unknown normalization {self.variant!r}")
        eps = check_epsilon(self.epsilon)
        if self.variant == "plain" and eps != 0.0:
            raise ValueError("plain normalization takes no epsilon")
        object.__setattr__(self, "epsilon", eps)

    @classmethod
    def plain(cls) -> "Normalization":
        return cls("plain")

    @classmethod
    def known_epsilon(cls, epsilon: float) -> "Normalization":
        return cls("known_epsilon", epsilon)

    def denominator(self, n: int) -> float:
        return n * (1.0 - self.epsilon) if self.variant == "known_epsilon" else float(n)


def kernel_sum(points, k: Kernel, h: float) -> float:
    """Unnormalized ``sum_i K(X_i / h) / h``."""
    x = check_sample(points)
    h = check_positive(h, "h")
    return float(np.sum(eval_kernel(k, x / h)) / h)


def kde_at_zero(points, k: Kernel, h: float, norm: Normalization = Normalization()) -> float:
    """Kernel estimate of ``f(0)`` with bandwidth ``h``.

    Parameters
    ----------
    points : array-like of shape (n,)
    k : Kernel
    h : float
        Bandwidth, positive.
    norm : Normalization
        Plain ``1/n`` or contamination-aware ``1/(n (1 - epsilon))``.
    """
    x = check_sample(points)
    return kernel_sum(x, k, h) / norm.denominator(x.size)


def kde_at_zero_multivariate(points, k: Kernel, h: float, norm: Normalization = Normalization()) -> float:
    """Product-kernel estimate at the origin of ``R^d``."""
    x = check_sample(points, multivariate=True)
    h = check_positive(h, "h")
    d = x.shape[1]
    vals = np.prod(eval_kernel(k, x / h), axis=1)
    return float(np.sum(vals) / h**d / norm.denominator(x.shape[0]))


def _rate_args(n, beta0, dim):
    n = check_count(n, "n")
    beta0 = check_positive(beta0, "beta0")
    dim = check_count(dim, "dim")
    return n, beta0, dim


def oracle_bandwidth_plain(n: int, beta0: float, dim: int = 1) -> float:
    """``n^(-1/(2 beta0 + d))``."""
    n, beta0, dim = _rate_args(n, beta0, dim)
    return n ** (-1.0 / (2.0 * beta0 + dim))


def oracle_bandwidth_structured(n: int, epsilon: float, beta0: float, beta1: float, dim: int = 1) -> float:
    """``n^(-1/(2b0+d)) ^ n^(-1/(2b1+d)) eps^(-2/(2b1+d))``; ``eps = 0`` keeps the first branch."""
    n, beta0, dim = _rate_args(n, beta0, dim)
    beta1 = check_positive(beta1, "beta1")
    epsilon = check_epsilon(epsilon)
    first = n ** (-1.0 / (2.0 * beta0 + dim))
    if epsilon == 0.0:
        return first
    # log scale: tiny epsilon would overflow the second branch
    log_second = -(math.log(n) + 2.0 * math.log(epsilon)) / (2.0 * beta1 + dim)
    return first if log_second >= math.log(first) else math.exp(log_second)


def oracle_bandwidth_arbitrary(n: int, epsilon: float, beta0: float, dim: int = 1) -> float:
    """``n^(-1/(2b0+d)) v eps^(1/(b0+d))``."""
    n, beta0, dim = _rate_args(n, beta0, dim)
    epsilon = check_epsilon(epsilon)
    first = n ** (-1.0 / (2.0 * beta0 + dim))
    if epsilon == 0.0:
        return first
    return max(first, epsilon ** (1.0 / (beta0 + dim)))


def oracle_kernel_order(beta0: float, beta1: Optional[float] = None) -> int:
    """``floor(max(beta0, beta1))``, the smallest order the bias bound needs."""
    b = beta0 if beta1 is None else max(beta0, beta1)
    return int(math.floor(b))


_ORACLES = ("oracle-plain", "oracle-structured", "oracle-arbitrary")


class PointKDE(BaseEstimator):
    """Kernel estimator of the density at 0 with a fixed or oracle bandwidth.

    Parameters
    ----------
    bandwidth : float or {"oracle-plain", "oracle-structured", "oracle-arbitrary"}
        A positive number is used as is; a string picks the oracle formula,
        evaluated at the sample size seen by ``fit``.
    epsilon : float
        Contamination proportion used by oracle formulas and by the
        ``known_epsilon`` normalization.
    beta0, beta1 : float
        Smoothness of the target and of the contamination. ``beta1``
        defaults to ``beta0``.
    normalization : {"plain", "known_epsilon", "auto"}
        ``"auto"`` uses ``known_epsilon`` for the two oracles that already
        depend on epsilon (``oracle-structured``, ``oracle-arbitrary``) and
        ``plain`` otherwise.
    kernel_order : int, optional
        Defaults to ``floor(max(beta0, beta1))``.

    Attributes
    ----------
    bandwidth_ : float
    estimate_ : float
    kernel_ : Kernel
    normalization_ : Normalization
    n_samples_ : int
    """

    def __init__(self, bandwidth="oracle-plain", epsilon=0.0, beta0=2.0, beta1=None,
                 normalization="auto", kernel_order=None):
        self.bandwidth = bandwidth
        self.epsilon = epsilon
        self.beta0 = beta0
        self.beta1 = beta1
        self.normalization = normalization
        self.kernel_order = kernel_order

    def _resolve_bandwidth(self, n: int) -> float:
        bw = self.bandwidth
        beta1 = self.beta0 if self.beta1 is None else self.beta1
        if isinstance(bw, str):
            if bw == "oracle-plain":
                return oracle_bandwidth_plain(n, self.beta0)
            if bw == "oracle-structured":
                return oracle_bandwidth_structured(n, self.epsilon, self.beta0, beta1)
            if bw == "oracle-arbitrary":
                return oracle_bandwidth_arbitrary(n, self.epsilon, self.beta0)
            raise ValueError(f"unknown bandwidth rule {bw!r}; expected a number or one of {_ORACLES}")
        return check_positive(bw, "bandwidth")

    def _resolve_normalization(self) -> Normalization:
        variant = self.normalization
        if variant == "auto":
            eps_aware = self.bandwidth in ("oracle-structured", "oracle-arbitrary")
            variant = "known_epsilon" if eps_aware else "plain"
        if variant == "plain":
            return Normalization.plain()
        if variant == "known_epsilon":
            return Normalization.known_epsilon(self.epsilon)
        raise ValueError(f"unknown normalization {self.normalization!r}")

    def fit(self, X, y=None):
        """Compute the estimate of ``f(0)`` from the sample ``X``."""
        x = check_sample(X, name="X")
        check_epsilon(self.epsilon)
        beta1 = self.beta0 if self.beta1 is None else self.beta1
        order = oracle_kernel_order(self.beta0, beta1) if self.kernel_order is None else self.kernel_order
        self.kernel_ = make_order_kernel(order)
        self.n_samples_ = x.size
        self.bandwidth_ = self._resolve_bandwidth(x.size)
        self.normalization_ = self._resolve_normalization()
        self.estimate_ = kde_at_zero(x, self.kernel_, self.bandwidth_, self.normalization_)
        return self

    def predict(self, X=None):
        """The fitted estimate (the estimator targets a single point)."""
        check_is_fitted(self, "estimate_")
        return self.estimate_
