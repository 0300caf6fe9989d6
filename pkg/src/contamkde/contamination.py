"""Contaminated data-generating processes and labeled sampling."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Tuple, Union

import numpy as np

from ._validation import check_count, check_epsilon
from .densities import SmoothDensity, sample

__all__ = [
    "GOOD",
    "CONTAMINATED",
    "ArbitrarySampler",
    "ContaminatedModel",
    "point_mass",
    "adversarial_spike",
    "sample_mixture",
    "mixture_density",
]

GOOD = "good"
CONTAMINATED = "contaminated"


@dataclass(frozen=True)
class ArbitrarySampler:
    """Black-box contamination: ``draw(rng, n)`` returns ``n`` points."""

    draw: Callable[[np.random.Generator, int], np.ndarray]
    label: str = "arbitrary"

    def __call__(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return np.asarray(self.draw(rng, n), dtype=float)


def point_mass(location: float) -> ArbitrarySampler:
    """All points equal to ``location``."""
    loc = float(location)
    return ArbitrarySampler(lambda rng, n: np.full(n, loc), f"point({loc:g})")


def adversarial_spike(scale: float, location: float = 0.0, mass_count: Optional[int] = None) -> ArbitrarySampler:
    """Uniform spike on ``[location - scale, location + scale]``.

    ``scale = 0`` gives a point mass. ``mass_count`` is accepted for
    interface compatibility and has no effect; the number of contaminated
    points is always the Bernoulli count of the mixture.
    """
    scale = float(scale)
    if not np.isfinite(scale) or scale < 0:
        raise ValueError(f"scale must be nonnegative and finite, got {scale}")
    loc = float(location)
    if scale == 0.0:
        return point_mass(loc)
    return ArbitrarySampler(lambda rng, n: loc + scale * (2.0 * rng.random(n) - 1.0),
                            f"spike({loc:g}, {scale:g})")


@dataclass(frozen=True)
class ContaminatedModel:
    """``X ~ (1 - epsilon) target + epsilon contamination``.

    ``m`` is the declared level bound ``g(0) <= m`` for structured
    contamination; it is checked at construction.
    """

    epsilon: float
    target: SmoothDensity
    contamination: Union[SmoothDensity, ArbitrarySampler]
    m: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "epsilon", check_epsilon(self.epsilon))
        if not isinstance(self.contamination, (SmoothDensity, ArbitrarySampler)):
            raise TypeError("contamination must be a SmoothDensity or an ArbitrarySampler")
        if self.m is not None:
            if self.m < 0:
                raise ValueError("m must be nonnegative")
            if self.structured and self.contamination(0.0) > self.m + 1e-10:
                raise ValueError(
                    f"contamination level g(0) = {self.contamination(0.0):.6g} exceeds m = {self.m}")

    @property
    def structured(self) -> bool:
        return isinstance(self.contamination, SmoothDensity)


def sample_mixture(model: ContaminatedModel, n: int, rng_seed=0) -> Tuple[np.ndarray, np.ndarray]:
    """Draw ``n`` points with per-point Bernoulli(epsilon) contamination.

    Returns
    -------
    points : ndarray of shape (n,)
    labels : ndarray of str, ``"good"`` or ``"contaminated"``
    """
    n = check_count(n, "n")
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    bad = rng.random(n) < model.epsilon
    n_bad = int(bad.sum())
    points = np.empty(n)
    points[~bad] = sample(model.target, n - n_bad, rng)
    if n_bad:
        if model.structured:
            points[bad] = sample(model.contamination, n_bad, rng)
        else:
            points[bad] = model.contamination(rng, n_bad)
    labels = np.where(bad, CONTAMINATED, GOOD)
    return points, labels


def mixture_density(model: ContaminatedModel, x):
    """``(1 - epsilon) f(x) + epsilon g(x)``; structured contamination only."""
    if not model.structured:
        raise TypeError("mixture density is undefined for arbitrary contamination")
    x = np.asarray(x, dtype=float)
    out = (1.0 - model.epsilon) * model.target.evaluate(x) + model.epsilon * model.contamination.evaluate(x)
    return float(out) if np.ndim(out) == 0 else out
