"""Divergences and two-point lower-bound certificates.

All integrals use adaptive Simpson over the union of the effective supports
widened by 10%, with the densities' breakpoints as panel boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ._quadrature import adaptive_simpson
from ._validation import check_count, check_epsilon, check_positive
from .densities import (
    PerturbationPair,
    SmoothDensity,
    bump_b,
    default_baseline,
    holder_seminorm_estimate,
    mollifier_integral,
    verification_grid,
)

__all__ = [
    "TwoPointCertificate",
    "ConstrainedRiskBound",
    "ModulusSearch",
    "ModulusResult",
    "chi_squared",
    "support_mismatch",
    "total_variation",
    "le_cam_bound",
    "risk_inequality_bound",
    "constrained_risk_bound",
    "is_density_difference",
    "density_difference_decompose",
    "modulus_of_continuity",
    "modulus_search",
]

_QUAD_TOL = 1e-13
_MISMATCH_LEVEL = 1e-12


def _domain(p: SmoothDensity, q: SmoothDensity) -> Tuple[float, float, Tuple[float, ...]]:
    lo = min(p.support[0], q.support[0])
    hi = max(p.support[1], q.support[1])
    pad = 0.1 * (hi - lo)
    bps = tuple(sorted(set(p.support + q.support + p.breakpoints + q.breakpoints)))
    return lo - pad, hi + pad, bps


def _panels(p: SmoothDensity, q: SmoothDensity, lo: float, hi: float) -> int:
    fs = min(p.feature_scale, q.feature_scale)
    return int(min(4096, max(64, math.ceil(4.0 * (hi - lo) / fs))))


def support_mismatch(p: SmoothDensity, q: SmoothDensity) -> bool:
    """True when ``p`` puts visible mass where ``q`` vanishes."""
    grid = np.union1d(verification_grid(p), verification_grid(q))
    pv, qv = p.evaluate(grid), q.evaluate(grid)
    return bool(np.any((qv <= 0.0) & (pv > _MISMATCH_LEVEL)))


def chi_squared(p: SmoothDensity, q: SmoothDensity) -> float:
    """``chi^2(p, q) = int p^2 / q - 1``.

    Evaluated as ``int (p - q)^2 / q``, which is the same number for
    normalized densities and does not lose digits to cancellation when the
    two are close. Returns ``inf`` on a support mismatch.
    """
    if support_mismatch(p, q):
        return math.inf
    lo, hi, bps = _domain(p, q)

    def integrand(x):
        pv, qv = p.evaluate(x), q.evaluate(x)
        safe = np.where(qv > 0.0, qv, 1.0)
        return np.where(qv > 0.0, (pv - qv) ** 2 / safe, 0.0)

    val = adaptive_simpson(integrand, lo, hi, _QUAD_TOL, breakpoints=bps,
                           initial_panels=_panels(p, q, lo, hi))
    return max(val, 0.0)


def total_variation(p: SmoothDensity, q: SmoothDensity) -> float:
    """``TV(p, q) = (1/2) int |p - q|``, clipped to ``[0, 1]``."""
    lo, hi, bps = _domain(p, q)
    val = 0.5 * adaptive_simpson(lambda x: np.abs(p.evaluate(x) - q.evaluate(x)), lo, hi,
                                 1e-12, breakpoints=bps, initial_panels=_panels(p, q, lo, hi))
    return float(min(max(val, 0.0), 1.0))


@dataclass
class TwoPointCertificate:
    """Le Cam two-point bound for a :class:`PerturbationPair` at sample size ``n``."""

    pair: PerturbationPair
    n: int
    chi2_single: float
    chi2_joint: float
    delta: float
    lecam_bound: float
    notes: Dict[str, float] = field(default_factory=dict)
    support_violation: bool = False

    @property
    def feasible(self) -> bool:
        return not self.support_violation and math.isfinite(self.chi2_joint)


def _tensorize(chi2: float, n: int) -> float:
    if not math.isfinite(chi2):
        return math.inf
    try:
        return math.expm1(n * math.log1p(chi2))
    except OverflowError:
        return math.inf


def le_cam_bound(pair: PerturbationPair, n: int) -> TwoPointCertificate:
    """Certificate with ``chi2_joint = (1 + chi2)^n - 1`` and bound ``e^-chi2_joint Delta^2 / 8``.

    ``chi2_single`` is ``chi^2(q, p)`` with ``q`` the tilde mixture and ``p``
    the base mixture, so the base mixture sits in the denominator.
    """
    n = check_count(n, "n")
    p, q = pair.mixtures()
    chi2 = chi_squared(q, p)
    joint = _tensorize(chi2, n)
    delta = float(pair.separation)
    bound = 0.0 if not math.isfinite(joint) else 0.125 * math.exp(-joint) * delta**2
    notes = dict(pair.constants)
    notes.update({"epsilon": pair.epsilon, "epsilon_tilde": pair.epsilon_tilde, "m": pair.m})
    return TwoPointCertificate(pair, n, chi2, joint, delta, bound, notes,
                               support_violation=not math.isfinite(chi2))


@dataclass
class ConstrainedRiskBound:
    """Outcome of the constrained risk inequality; ``bound`` is 0 when not applicable."""

    bound: float
    I: float
    delta: float
    delta_small: float
    applicable: bool
    support_violation: bool = False

    def __float__(self) -> float:
        return float(self.bound)


def risk_inequality_bound(delta: float, delta_small: float, I: float) -> ConstrainedRiskBound:
    """``(Delta - delta I)^2`` when ``delta I <= Delta``, else 0 flagged not applicable."""
    if delta < 0 or delta_small < 0:
        raise ValueError("separations must be nonnegative")
    if not math.isfinite(I):
        return ConstrainedRiskBound(0.0, I, delta, delta_small, False, True)
    if delta_small * I > delta:
        return ConstrainedRiskBound(0.0, I, delta, delta_small, False)
    return ConstrainedRiskBound((delta - delta_small * I) ** 2, I, delta, delta_small, True)


def constrained_risk_bound(pair: PerturbationPair, n: int, delta_small: float) -> ConstrainedRiskBound:
    """Risk under the tilde mixture for an estimator ``delta``-accurate under the base one.

    ``I = (int q^2 / p)^(n/2)`` with ``q`` the tilde mixture and ``p`` the base.
    """
    n = check_count(n, "n")
    p, q = pair.mixtures()
    chi2 = chi_squared(q, p)
    if not math.isfinite(chi2):
        return ConstrainedRiskBound(0.0, math.inf, pair.separation, delta_small, False, True)
    I = math.exp(0.5 * n * math.log1p(chi2))
    return risk_inequality_bound(float(pair.separation), float(delta_small), I)


def _difference_integrals(d, support, breakpoints) -> Tuple[float, float]:
    lo, hi = support
    bps = tuple(breakpoints)
    kw = dict(breakpoints=bps, initial_panels=max(64, int(8 * (hi - lo))))
    s = adaptive_simpson(lambda x: np.asarray(d(x), dtype=float), lo, hi, 1e-12, **kw)
    a = adaptive_simpson(lambda x: np.abs(np.asarray(d(x), dtype=float)), lo, hi, 1e-12, **kw)
    return s, a


def is_density_difference(
    d: Callable,
    tol: float = 1e-8,
    *,
    support: Tuple[float, float] = (-40.0, 40.0),
    breakpoints: Sequence[float] = (),
) -> Tuple[bool, Dict[str, float]]:
    """Whether ``d`` is a difference of two densities: ``int d = 0`` and ``int |d| <= 2``.

    Returns the verdict and the two integrals, keyed ``"integral"`` and
    ``"abs_integral"``.
    """
    check_positive(tol, "tol")
    s, a = _difference_integrals(d, support, breakpoints)
    ok = abs(s) <= tol and a <= 2.0 + tol
    return ok, {"integral": s, "abs_integral": a}


def density_difference_decompose(
    d: Callable,
    base: SmoothDensity,
    *,
    support: Optional[Tuple[float, float]] = None,
    breakpoints: Sequence[float] = (),
    tol: float = 1e-8,
) -> Tuple[SmoothDensity, SmoothDensity]:
    """Split ``d`` as ``g_plus - g_minus`` with both densities.

    ``g_plus = d_+ + (1 - int|d|/2) base`` and ``g_minus = d_- + (1 - int|d|/2) base``.
    The outputs carry no smoothness claim.
    """
    if support is None:
        support = base.support
    lo = min(support[0], base.support[0])
    hi = max(support[1], base.support[1])
    ok, ints = is_density_difference(d, tol, support=support, breakpoints=breakpoints)
    if not ok:
        raise ValueError(
            f"not a density difference: int d = {ints['integral']:.3e}, "
            f"int |d| = {ints['abs_integral']:.6f}")
    w = 1.0 - 0.5 * ints["abs_integral"]

    def plus(x):
        x = np.asarray(x, dtype=float)
        return np.maximum(d(x), 0.0) + w * base.evaluate(x)

    def minus(x):
        x = np.asarray(x, dtype=float)
        return np.maximum(-np.asarray(d(x), dtype=float), 0.0) + w * base.evaluate(x)

    bps = tuple(sorted(set(tuple(breakpoints) + base.breakpoints + tuple(support))))
    fs = min(base.feature_scale, (support[1] - support[0]) / 8.0)
    return (SmoothDensity(plus, (lo, hi), base.beta, math.inf, "g_plus", bps, fs),
            SmoothDensity(minus, (lo, hi), base.beta, math.inf, "g_minus", bps, fs))


# ------------------------------------------------------------ modulus


@dataclass(frozen=True)
class ModulusSearch:
    """Golden-section settings for :func:`modulus_of_continuity`."""

    iterations: int = 60
    h_min: Optional[float] = None  # defaults to eps^2
    h_max: float = 1.0
    grid_points: int = 4001


@dataclass
class ModulusResult:
    value: float
    h_star: float
    c_star: float
    binding: str
    c_holder: float
    profile: List[Tuple[float, float]]


@lru_cache(maxsize=None)
def _b_holder(beta0: float) -> float:
    return holder_seminorm_estimate(bump_b, beta0, 1e-4, bounds=(-1.0, 1.0))


def modulus_search(beta0: float, L0: float, epsilon: float,
                   search: Optional[ModulusSearch] = None) -> ModulusResult:
    """Maximize ``(c h^beta0 b(0))^2`` over ``f~ = f0 + c h^beta0 b(x/h)``.

    For each ``h`` the largest admissible ``c`` is the smallest of three
    caps: Hölder (``c H(b) + H(f0) <= L0``, by the triangle inequality),
    total variation (``TV(f0, f~) <= eps/(1-eps)``) and nonnegativity of
    ``f~``. The search runs over ``log h``.
    """
    search = search or ModulusSearch()
    epsilon = check_epsilon(epsilon)
    beta0 = check_positive(beta0, "beta0")
    L0 = check_positive(L0, "L0")
    if epsilon == 0:
        return ModulusResult(0.0, float("nan"), 0.0, "tv", 0.0, [])
    f0 = default_baseline(beta0, L0)
    h_f0 = holder_seminorm_estimate(f0, beta0, 1e-3)
    c_hol = (L0 - h_f0) / _b_holder(beta0)
    if c_hol <= 0:
        return ModulusResult(0.0, float("nan"), 0.0, "holder", c_hol, [])
    r = epsilon / (1.0 - epsilon)
    abs_b = mollifier_integral()
    b0 = float(bump_b(0.0))
    u = np.linspace(-1.0, 1.0, search.grid_points)
    bu = bump_b(u)
    neg = bu < 0

    def caps(h):
        c_tv = 2.0 * r / (h ** (beta0 + 1.0) * abs_b)
        c_nn = float(np.min(f0.evaluate(h * u[neg]) / (h**beta0 * -bu[neg])))
        return {"holder": c_hol, "tv": c_tv, "nonneg": c_nn}

    profile: List[Tuple[float, float]] = []

    def objective(t):
        h = math.exp(t)
        cs = caps(h)
        c = min(cs.values())
        val = (c * h**beta0 * b0) ** 2
        profile.append((h, val))
        return val

    a = math.log(search.h_min if search.h_min is not None else epsilon**2)
    b = math.log(search.h_max)
    gr = (math.sqrt(5.0) - 1.0) / 2.0
    x1, x2 = b - gr * (b - a), a + gr * (b - a)
    f1, f2 = objective(x1), objective(x2)
    for _ in range(search.iterations):
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + gr * (b - a)
            f2 = objective(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - gr * (b - a)
            f1 = objective(x1)
    objective(math.log(search.h_max))
    objective(math.log(search.h_min if search.h_min is not None else epsilon**2))
    h_star, value = max(profile, key=lambda hv: hv[1])
    cs = caps(h_star)
    binding = min(cs, key=cs.get)
    profile.sort()
    return ModulusResult(value, h_star, cs[binding], binding, c_hol, profile)


def modulus_of_continuity(beta0: float, L0: float, epsilon: float,
                          search: Optional[ModulusSearch] = None) -> float:
    """Lower estimate of the modulus ``omega(eps)`` from the bump family."""
    return modulus_search(beta0, L0, epsilon, search).value
