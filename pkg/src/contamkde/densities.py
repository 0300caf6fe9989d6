"""Building-block functions, baseline densities, Hölder checks and sampling.

Also hosts the two-pair perturbation constructions used by the lower-bound
certificates. Every "sufficiently small" constant is found by halving from 1
until the numeric class checks pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.special import comb

from ._quadrature import adaptive_simpson, integrate_density
from ._validation import check_count, check_epsilon, check_positive

__all__ = [
    "InfeasibleConstruction",
    "SmoothDensity",
    "DensityCheck",
    "PerturbationPair",
    "mollifier",
    "mollifier_integral",
    "bump_a",
    "bump_a_constant",
    "bump_b",
    "gaussian_baseline",
    "laplace_baseline",
    "scaled_bump_a",
    "mixture",
    "holder_seminorm_estimate",
    "check_density",
    "verification_grid",
    "sample",
    "default_baseline",
    "pair_level",
    "pair_neighborhood",
    "pair_proportion",
    "pair_arbitrary",
    "pair_unidentifiable",
]

_TAIL = 1e-16
_HOLDER_SLACK = 1e-3
_MAX_HALVINGS = 40


class InfeasibleConstruction(RuntimeError):
    """Raised when constant halving cannot satisfy the class constraints."""


@dataclass(frozen=True)
class SmoothDensity:
    """Evaluable density with claimed Hölder parameters.

    Parameters
    ----------
    evaluate : callable
        Vectorized map from an array of reals to nonnegative values. Must
        return zero outside ``support`` (up to the tail truncation).
    support : tuple of float
        Effective support ``(lo, hi)`` used for quadrature and sampling.
    beta : float
        Claimed smoothness.
    holder_radius : float
        Claimed radius ``L``. ``inf`` means no smoothness claim; such
        densities pass the Hölder check vacuously.
    label : str
        Short identifier.
    breakpoints : tuple of float
        Points where the density or its derivatives are only piecewise
        smooth; passed to quadrature as panel boundaries.
    feature_scale : float
        Width of the narrowest feature; sets verification grid spacing.
    """

    evaluate: Callable[[np.ndarray], np.ndarray]
    support: Tuple[float, float]
    beta: float
    holder_radius: float
    label: str = ""
    breakpoints: Tuple[float, ...] = ()
    feature_scale: float = 1.0

    def __call__(self, x):
        out = self.evaluate(np.asarray(x, dtype=float))
        return float(out) if np.ndim(out) == 0 else out

    def with_claim(self, beta: float, holder_radius: float, label: Optional[str] = None):
        """Copy with a different claimed (beta, L)."""
        return SmoothDensity(
            self.evaluate, self.support, float(beta), float(holder_radius),
            self.label if label is None else label, self.breakpoints, self.feature_scale,
        )


# ---------------------------------------------------------------- blocks


def mollifier(x):
    """``exp(-1 / (1 - x^2))`` on ``|x| < 1`` and 0 elsewhere."""
    x = np.asarray(x, dtype=float)
    inside = np.abs(x) < 1.0
    xs = np.where(inside, x, 0.0)
    out = np.where(inside, np.exp(-1.0 / (1.0 - xs * xs)), 0.0)
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=None)
def mollifier_integral() -> float:
    """``int_{-1}^{1} l``, computed once by adaptive Simpson."""
    return adaptive_simpson(mollifier, -1.0, 1.0, 1e-14)


@lru_cache(maxsize=None)
def bump_a_constant() -> float:
    """Normalizer ``c0 = 1 / (2 int l)`` making ``bump_a`` a density."""
    return 1.0 / (2.0 * mollifier_integral())


def bump_a(x):
    """Even density on ``[-2, 2]`` built from two shifted mollifiers; vanishes at 0."""
    x = np.asarray(x, dtype=float)
    out = bump_a_constant() * mollifier(np.abs(x) - 1.0)
    return float(out) if np.ndim(out) == 0 else out


def bump_b(x):
    """Even, mean-zero function on ``[-1, 1]`` with ``b(0) = l(0)``."""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    out = np.where(ax <= 0.5, mollifier(2.0 * x), -mollifier(4.0 * ax - 3.0))
    return float(out) if out.ndim == 0 else out


# ------------------------------------------------------------- baselines


def _gaussian_halfwidth(scale: float) -> float:
    # solve phi(x / s) / s = _TAIL
    peak = 1.0 / (scale * math.sqrt(2.0 * math.pi))
    return scale * math.sqrt(2.0 * math.log(peak / _TAIL))


def gaussian_baseline(scale: float = 1.0, *, beta: float = 2.0, holder_radius: float = np.inf) -> SmoothDensity:
    """Centered normal density truncated where it drops below 1e-16."""
    scale = check_positive(scale, "scale")
    w = _gaussian_halfwidth(scale)
    norm = 1.0 / (scale * math.sqrt(2.0 * math.pi))

    def evaluate(x):
        x = np.asarray(x, dtype=float)
        return np.where(np.abs(x) <= w, norm * np.exp(-0.5 * (x / scale) ** 2), 0.0)

    return SmoothDensity(evaluate, (-w, w), beta, holder_radius, f"gauss({scale:g})",
                         (0.0,), feature_scale=scale)


def laplace_baseline(scale: float = 1.0, *, holder_radius: float = np.inf) -> SmoothDensity:
    """Centered Laplace density; Hölder-1 (derivative jumps at 0), not smoother."""
    scale = check_positive(scale, "scale")
    w = scale * math.log(1.0 / (2.0 * scale * _TAIL))

    def evaluate(x):
        x = np.asarray(x, dtype=float)
        return np.where(np.abs(x) <= w, np.exp(-np.abs(x) / scale) / (2.0 * scale), 0.0)

    return SmoothDensity(evaluate, (-w, w), 1.0, holder_radius, f"laplace({scale:g})",
                         (0.0,), feature_scale=scale)


def scaled_bump_a(c: float, *, beta: float, holder_radius: float) -> SmoothDensity:
    """The density ``c * a(c x)`` on ``[-2/c, 2/c]``."""
    c = check_positive(c, "c")

    def evaluate(x):
        return c * bump_a(c * np.asarray(x, dtype=float))

    r = 2.0 / c
    return SmoothDensity(evaluate, (-r, r), beta, holder_radius, f"a({c:g})",
                         (-r, -1.0 / c, 0.0, 1.0 / c, r), feature_scale=1.0 / c)


def mixture(components: Sequence[SmoothDensity], weights: Sequence[float], label: str = "mixture") -> SmoothDensity:
    """Weighted sum of densities; claims the weakest smoothness and summed radii."""
    if len(components) != len(weights) or not components:
        raise ValueError("components and weights must be nonempty and of equal length")
    ws = [float(w) for w in weights]
    comps = [c for c, w in zip(components, ws) if w != 0.0] or [components[0]]
    ws_nz = [w for w in ws if w != 0.0] or [0.0]

    def evaluate(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for c, w in zip(comps, ws_nz):
            out = out + w * c.evaluate(x)
        return out

    lo = min(c.support[0] for c in comps)
    hi = max(c.support[1] for c in comps)
    bps = tuple(sorted({p for c in comps for p in c.support + c.breakpoints}))
    beta = min(c.beta for c in comps)
    radius = sum(abs(w) * c.holder_radius for c, w in zip(comps, ws_nz))
    return SmoothDensity(evaluate, (lo, hi), beta, radius, label, bps,
                         min(c.feature_scale for c in comps))


# ---------------------------------------------------------- Hölder check


def _central_difference(f, x, k: int, s: float) -> np.ndarray:
    if k == 0:
        return np.asarray(f(x), dtype=float)
    out = np.zeros_like(x)
    for i in range(k + 1):
        out += (-1) ** i * comb(k, i, exact=True) * f(x + (k / 2.0 - i) * s)
    return out / s**k


def holder_seminorm_estimate(d, beta: float, grid_step: float = 1e-3, *, bounds=None) -> float:
    """Numerical Hölder seminorm of ``d`` at smoothness ``beta``.

    With ``k = floor(beta)`` and ``alpha = beta - k`` this is the largest
    ratio ``|D^k f(x1) - D^k f(x2)| / |x1 - x2|^alpha`` over pairs of grid
    points, where ``D^k`` is a central difference. For integer ``beta``
    (``alpha = 0``) that is the oscillation of ``D^k f``.

    Parameters
    ----------
    d : SmoothDensity or callable
        Vectorized function. A bare callable requires ``bounds``.
    beta : float
        Smoothness index, positive.
    grid_step : float
        Spacing of the evaluation grid and the difference step. For
        ``k >= 1`` the difference step is raised to ``eps**(1/(k+2))`` when
        ``grid_step`` is smaller, to keep round-off from dominating.
    bounds : tuple of float, optional
        Grid range; defaults to ``d.support``.
    """
    beta = check_positive(beta, "beta")
    grid_step = check_positive(grid_step, "grid_step")
    f = d.evaluate if isinstance(d, SmoothDensity) else d
    if bounds is None:
        if not isinstance(d, SmoothDensity):
            raise ValueError("bounds are required for a bare callable")
        bounds = d.support
    lo, hi = float(bounds[0]), float(bounds[1])
    k = int(math.floor(beta))
    alpha = beta - k
    x = np.arange(lo, hi + 0.5 * grid_step, grid_step)
    s = grid_step if k == 0 else max(grid_step, np.finfo(float).eps ** (1.0 / (k + 2)))
    D = _central_difference(f, x, k, s)
    if alpha == 0.0:
        return float(D.max() - D.min())
    osc = float(D.max() - D.min())
    best = 0.0
    for lag in range(1, D.size):
        dist = lag * grid_step
        if osc / dist**alpha <= best:
            break
        diff = np.abs(D[lag:] - D[:-lag]).max()
        best = max(best, float(diff) / dist**alpha)
    return best


def verification_grid(d: SmoothDensity, points: int = 10_000) -> np.ndarray:
    """Uniform grid over the support, refined on ``[-1, 1]`` and near 0."""
    lo, hi = d.support
    parts = [np.linspace(lo, hi, points)]
    w = min(1.0, hi, -lo)
    if w > 0:
        parts.append(np.linspace(-w, w, points))
    fs = min(d.feature_scale, w) if w > 0 else d.feature_scale
    if fs > 0:
        parts.append(np.linspace(-fs, fs, points // 10 + 1))
    return np.unique(np.concatenate(parts))


@dataclass
class DensityCheck:
    """Outcome of :func:`check_density`."""

    label: str
    min_value: float
    integral: float
    holder_estimate: float
    holder_radius: float
    nonnegative: bool
    normalized: bool
    holder_ok: bool

    @property
    def passed(self) -> bool:
        return self.nonnegative and self.normalized and self.holder_ok


def _holder_step(d: SmoothDensity) -> float:
    return min(1e-3, d.feature_scale / 200.0)


def check_density(
    d: SmoothDensity,
    *,
    grid_step: Optional[float] = None,
    integral_tol: float = 1e-8,
    check_integral: bool = True,
) -> DensityCheck:
    """Check nonnegativity, normalization and the claimed Hölder membership."""
    grid = verification_grid(d)
    vals = d.evaluate(grid)
    min_value = float(vals.min())
    nonneg = min_value >= -1e-14
    integral = integrate_density(d) if check_integral else 1.0
    if np.isinf(d.holder_radius):
        holder = float("nan")
        ok = True
    else:
        holder = holder_seminorm_estimate(d, d.beta, grid_step or _holder_step(d))
        ok = holder <= d.holder_radius * (1.0 + _HOLDER_SLACK)
    return DensityCheck(d.label, min_value, integral, holder, d.holder_radius,
                        nonneg, abs(integral - 1.0) <= integral_tol, ok)


# -------------------------------------------------------------- sampling


def sample(d: SmoothDensity, n: int, rng_seed=0, *, cells: int = 4096) -> np.ndarray:
    """Draw ``n`` i.i.d. points from ``d`` by envelope rejection sampling.

    The envelope is piecewise constant on ``cells`` uniform cells of the
    effective support, each at 1.01 times the largest of the density at the
    cell's endpoints and midpoint.
    """
    n = check_count(n, "n", minimum=0)
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    if n == 0:
        return np.empty(0)
    lo, hi = d.support
    edges = np.linspace(lo, hi, cells + 1)
    width = edges[1] - edges[0]
    heights = 1.01 * np.maximum.reduce([
        d.evaluate(edges[:-1]), d.evaluate(edges[1:]), d.evaluate(edges[:-1] + 0.5 * width),
    ])
    if not np.all(np.isfinite(heights)):
        raise ValueError("density is not bounded on its support; cannot build envelope")
    total = heights.sum()
    if total <= 0:
        raise ValueError("density vanishes on its support")
    probs = heights / total
    out = np.empty(n)
    filled = 0
    while filled < n:
        batch = max(2 * (n - filled), 1024)
        cell = rng.choice(cells, size=batch, p=probs)
        x = edges[cell] + width * rng.random(batch)
        u = rng.random(batch) * heights[cell]
        acc = x[u < d.evaluate(x)]
        take = min(acc.size, n - filled)
        out[filled:filled + take] = acc[:take]
        filled += take
    return out


# --------------------------------------------------------- constructions


@dataclass
class PerturbationPair:
    """Two (target, contamination) pairs with matching or close mixtures.

    ``constants`` records every tuned constant plus bandwidths.
    """

    name: str
    f: SmoothDensity
    f_tilde: SmoothDensity
    g: SmoothDensity
    g_tilde: SmoothDensity
    epsilon: float
    epsilon_tilde: float
    m: float
    separation: float
    constants: Dict[str, float] = field(default_factory=dict)
    flags: Dict[str, bool] = field(default_factory=dict)

    def mixtures(self) -> Tuple[SmoothDensity, SmoothDensity]:
        """``p = (1-eps) f + eps g`` and ``q = (1-eps~) f~ + eps~ g~``."""
        e, et = self.epsilon, self.epsilon_tilde
        p = mixture([self.f, self.g], [1.0 - e, e], f"p[{self.name}]")
        q = mixture([self.f_tilde, self.g_tilde], [1.0 - et, et], f"q[{self.name}]")
        return p, q

    def members(self) -> Dict[str, SmoothDensity]:
        return {"f": self.f, "f_tilde": self.f_tilde, "g": self.g, "g_tilde": self.g_tilde}

    def mixture_discrepancy(self, grid: Optional[np.ndarray] = None) -> float:
        """Max over a grid of ``|p - q|``."""
        p, q = self.mixtures()
        if grid is None:
            grid = np.union1d(verification_grid(p), verification_grid(q))
        return float(np.max(np.abs(p.evaluate(grid) - q.evaluate(grid))))


def _halve_until(pred, what: str, start: float = 1.0) -> float:
    c = start
    for _ in range(_MAX_HALVINGS):
        if pred(c):
            return c
        c *= 0.5
    raise InfeasibleConstruction(f"no feasible value of {what} after {_MAX_HALVINGS} halvings")


def _passes(d: SmoothDensity, *, check_integral: bool = False) -> bool:
    return check_density(d, check_integral=check_integral).passed


_MAX_BASELINE_SCALE = 64.0


@lru_cache(maxsize=None)
def _default_baseline_scale(beta0: float, L0: float) -> float:
    # dilation by s multiplies the seminorm by s^-(1+beta) exactly
    unit = holder_seminorm_estimate(gaussian_baseline(1.0), beta0, 1e-3)
    scale = 1.0
    while scale <= _MAX_BASELINE_SCALE:
        if unit * scale ** -(1.0 + beta0) <= 0.5 * L0:
            return scale
        scale *= 2.0
    raise InfeasibleConstruction(
        f"no Gaussian baseline with scale <= {_MAX_BASELINE_SCALE:g} fits (beta={beta0}, L={L0 / 2})")


def default_baseline(beta0: float, L0: float) -> SmoothDensity:
    """Gaussian ``f0`` of the smallest scale in {1, 2, 4, ...} inside ``P(beta0, L0/2)``."""
    scale = _default_baseline_scale(float(beta0), float(L0))
    return gaussian_baseline(scale, beta=beta0, holder_radius=L0)


def _perturbed(base: SmoothDensity, coef: float, shape, width: float, *, beta, radius, label, bps=()):
    """``base + coef * shape(x / width)``, support widened to cover the shape."""

    def evaluate(x):
        x = np.asarray(x, dtype=float)
        return base.evaluate(x) + coef * shape(x / width)

    lo = min(base.support[0], -width)
    hi = max(base.support[1], width)
    return SmoothDensity(evaluate, (lo, hi), beta, radius, label,
                         tuple(sorted(set(base.breakpoints) | set(bps))),
                         min(base.feature_scale, width))


def _b_breakpoints(h: float) -> Tuple[float, ...]:
    return tuple(h * t for t in (-1.0, -0.5, 0.0, 0.5, 1.0))


def _validate_smoothness(beta0, beta1, L0, L1):
    for v, nm in ((beta0, "beta0"), (beta1, "beta1"), (L0, "L0"), (L1, "L1")):
        check_positive(v, nm)


def pair_level(epsilon: float, m: float, beta0: float = 1.0, beta1: float = 1.0,
               L0: float = 5.0, L1: float = 5.0) -> PerturbationPair:
    """Pair separating by ``~ eps (m ^ 1)`` with identical mixtures.

    ``f = f0``, ``f~ = f0 + c1 eps/(1-eps) m' b``, ``g = c2 a(c2 x) + c1 m' b``,
    ``g~ = c2 a(c2 x)``, where ``m' = min(m, 1)``.
    """
    epsilon = check_epsilon(epsilon)
    if epsilon == 0:
        raise ValueError("epsilon must be positive")
    if m < 0 or np.isnan(m):
        raise ValueError("m must be nonnegative")
    _validate_smoothness(beta0, beta1, L0, L1)
    mm = min(float(m), 1.0)
    f0 = default_baseline(beta0, L0)
    r = epsilon / (1.0 - epsilon)

    c2 = _halve_until(
        lambda c: _passes(scaled_bump_a(c, beta=beta1, holder_radius=L1 / 2)), "c2")
    g_tilde = scaled_bump_a(c2, beta=beta1, holder_radius=L1)

    def build(c1):
        ft = _perturbed(f0, c1 * r * mm, bump_b, 1.0, beta=beta0, radius=L0,
                        label="f_tilde", bps=_b_breakpoints(1.0))
        g = _perturbed(g_tilde, c1 * mm, bump_b, 1.0, beta=beta1, radius=L1,
                       label="g", bps=_b_breakpoints(1.0))
        return ft, g

    def ok(c1):
        ft, g = build(c1)
        g_at_zero = float(g.evaluate(np.array([0.0]))[0])
        return g_at_zero <= m + 1e-10 and _passes(ft) and _passes(g)

    # with m = 0 the perturbation vanishes and any c1 is feasible
    c1 = 1.0 if mm == 0 else _halve_until(ok, "c1")
    f_tilde, g = build(c1)
    f = f0.with_claim(beta0, L0, "f")
    sep = abs(float(f.evaluate(np.array([0.0]))[0] - f_tilde.evaluate(np.array([0.0]))[0]))
    return PerturbationPair(
        "level", f, f_tilde, g, g_tilde.with_claim(beta1, L1, "g_tilde"),
        epsilon, epsilon, float(m), sep,
        constants={"c1": c1, "c2": c2, "m_eff": mm, "f0_scale": _default_baseline_scale(float(beta0), float(L0))},
    )


def _neighborhood_shape(h: float, c4: float):
    """``l(x/h) - l(2(x - c4)/h) - l(2(x + c4)/h)``, integrates to 0."""

    def shape(x):
        x = np.asarray(x, dtype=float)
        return (mollifier(x / h) - mollifier(2.0 * (x - c4) / h)
                - mollifier(2.0 * (x + c4) / h))

    return shape


def pair_neighborhood(epsilon: float, n: int, beta0: float = 2.0, beta1: float = 1.0,
                      L0: float = 5.0, L1: float = 5.0) -> PerturbationPair:
    """Pair whose contamination densities both vanish at 0.

    The target perturbation has bandwidth ``h`` and the contamination
    perturbation has bandwidth ``h~ = (n eps^2)^(-1/(2 beta1 + 1))``; they
    are tied by ``c2 h^beta0 l(0) = c3 h~^beta1 b(0)`` so that ``g(0) = 0``.
    """
    epsilon = check_epsilon(epsilon)
    n = check_count(n, "n")
    _validate_smoothness(beta0, beta1, L0, L1)
    if beta1 > beta0:
        raise ValueError(f"requires beta1 <= beta0, got beta1={beta1} > beta0={beta0}")
    if n * epsilon**2 < 1:
        raise ValueError(f"requires n * epsilon^2 >= 1, got {n * epsilon ** 2:g}")
    f0 = default_baseline(beta0, L0)
    r = epsilon / (1.0 - epsilon)
    ht = (n * epsilon**2) ** (-1.0 / (2.0 * beta1 + 1.0))
    l0 = float(mollifier(0.0))
    b0 = float(bump_b(0.0))

    c1 = _halve_until(
        lambda c: _passes(scaled_bump_a(c, beta=beta1, holder_radius=L1 / 2)), "c1")
    c4 = 0.25 * (2.0 / c1)
    base_a = scaled_bump_a(c1, beta=beta1, holder_radius=L1)
    h_target = min(ht ** (beta1 / beta0), c4)

    def build(c3):
        c2 = c3 * ht**beta1 * b0 / (h_target**beta0 * l0)
        # solve the bandwidth relation for h given (c2, c3)
        h = (c3 * ht**beta1 * b0 / (c2 * l0)) ** (1.0 / beta0)
        shape = _neighborhood_shape(h, c4)
        bps = (-c4 - h / 2, -c4, -c4 + h / 2, -h, 0.0, h, c4 - h / 2, c4, c4 + h / 2)
        ft = _perturbed(f0, c2 * r * h**beta0, shape, 1.0, beta=beta0, radius=L0,
                        label="f_tilde", bps=bps)
        ft = SmoothDensity(ft.evaluate, ft.support, beta0, L0, "f_tilde", ft.breakpoints, h / 4)
        inner = _perturbed(base_a, c2 * h**beta0, shape, 1.0, beta=beta1, radius=L1,
                           label="g", bps=bps)
        g = _perturbed(inner, -c3 * ht**beta1, bump_b, ht, beta=beta1, radius=L1,
                       label="g", bps=_b_breakpoints(ht))
        g = SmoothDensity(g.evaluate, g.support, beta1, L1, "g", g.breakpoints, min(h, ht) / 4)
        return c2, h, ft, g

    def ok(c3):
        c2, h, ft, g = build(c3)
        if not (ht / 2 <= h <= 2 * c4):
            return False
        return _passes(ft) and _passes(g)

    c3 = _halve_until(ok, "c3")
    c2, h, f_tilde, g = build(c3)
    f = f0.with_claim(beta0, L0, "f")
    sep = abs(float(f.evaluate(np.array([0.0]))[0] - f_tilde.evaluate(np.array([0.0]))[0]))
    return PerturbationPair(
        "neighborhood", f, f_tilde, g, base_a.with_claim(beta1, L1, "g_tilde"),
        epsilon, epsilon, 0.0, sep,
        constants={
            "c1": c1, "c2": c2, "c3": c3, "c4": c4, "h": h, "h_tilde": ht,
            "relation_residual": abs(c2 * h**beta0 * l0 - c3 * ht**beta1 * b0),
            "f0_scale": _default_baseline_scale(float(beta0), float(L0)),
        },
    )


def pair_proportion(epsilon: float, epsilon_tilde: float, beta0: float = 1.0, beta1: float = 1.0,
                    L0: float = 5.0, L1: float = 5.0) -> PerturbationPair:
    """Pair with different contamination proportions and identical mixtures."""
    epsilon = check_epsilon(epsilon)
    epsilon_tilde = check_epsilon(epsilon_tilde, name="epsilon_tilde")
    if epsilon_tilde > epsilon:
        raise ValueError("requires epsilon_tilde <= epsilon")
    _validate_smoothness(beta0, beta1, L0, L1)
    f0 = default_baseline(beta0, L0)

    def ok(c):
        return (_passes(scaled_bump_a(c, beta=beta0, holder_radius=L0 / 2))
                and _passes(scaled_bump_a(c, beta=beta1, holder_radius=L1 / 2)))

    c1 = _halve_until(ok, "c1")
    g = scaled_bump_a(c1, beta=beta1, holder_radius=L1)
    w_a = (epsilon - epsilon_tilde) / (1.0 - epsilon_tilde)
    f_tilde = mixture([f0, scaled_bump_a(c1, beta=beta0, holder_radius=L0)],
                      [(1.0 - epsilon) / (1.0 - epsilon_tilde), w_a], "f_tilde").with_claim(beta0, L0)
    f = f0.with_claim(beta0, L0, "f")
    sep = abs(float(f.evaluate(np.array([0.0]))[0] - f_tilde.evaluate(np.array([0.0]))[0]))
    return PerturbationPair(
        "proportion", f, f_tilde, g.with_claim(beta1, L1, "g"), g.with_claim(beta1, L1, "g_tilde"),
        epsilon, epsilon_tilde, 0.0, sep,
        constants={"c1": c1, "f0_scale": _default_baseline_scale(float(beta0), float(L0))},
    )


def pair_arbitrary(epsilon: float, beta0: float = 1.0, L0: float = 5.0) -> PerturbationPair:
    """Pair for unstructured contamination with separation ``~ eps^(beta0/(beta0+1))``.

    ``f~ = f0 + c h^beta0 b(x/h)`` with ``h`` the largest dyadic value for
    which ``d = (1-eps)/eps (f~ - f)`` has ``int |d| <= 2``; ``g`` and ``g~``
    come from splitting ``d`` against the base ``f0``.
    """
    from .certificates import density_difference_decompose

    epsilon = check_epsilon(epsilon)
    if epsilon == 0:
        raise ValueError("epsilon must be positive")
    check_positive(beta0, "beta0")
    check_positive(L0, "L0")
    f0 = default_baseline(beta0, L0)

    def build(c, h):
        return _perturbed(f0, c * h**beta0, bump_b, h, beta=beta0, radius=L0,
                          label="f_tilde", bps=_b_breakpoints(h))

    c = _halve_until(lambda c: _passes(build(c, 1.0)), "c")
    r = (1.0 - epsilon) / epsilon
    abs_b = mollifier_integral()  # int |b| equals int l
    h = 1.0
    while c * r * h ** (beta0 + 1.0) * abs_b > 2.0:
        h *= 0.5
    f_tilde = build(c, h)
    coef = c * r * h**beta0

    def d(x):
        return coef * bump_b(np.asarray(x, dtype=float) / h)

    g, g_tilde = density_difference_decompose(d, f0, support=(-h, h), breakpoints=_b_breakpoints(h))
    f = f0.with_claim(beta0, L0, "f")
    sep = abs(float(f.evaluate(np.array([0.0]))[0] - f_tilde.evaluate(np.array([0.0]))[0]))
    return PerturbationPair(
        "arbitrary", f, f_tilde, g, g_tilde, epsilon, epsilon, np.inf, sep,
        constants={"c": c, "h": h, "int_abs_d": coef * h * abs_b,
                   "f0_scale": _default_baseline_scale(float(beta0), float(L0))},
    )


def pair_unidentifiable(epsilon: float, beta0_tilde: float = 1.0, L0: float = 5.0) -> PerturbationPair:
    """Gaussian pair where a contaminated model and a clean one coincide.

    ``f = c3 phi(c3 x)``, ``g`` a Gaussian of width ``eps^(1/(beta~+1)) / c4``,
    ``f~ = (1-eps) f + eps g`` (contamination-free), ``g~ = phi``.
    """
    epsilon = check_epsilon(epsilon)
    if epsilon == 0:
        raise ValueError("epsilon must be positive")
    bt = check_positive(beta0_tilde, "beta0_tilde")
    L0 = check_positive(L0, "L0")
    s = epsilon ** (1.0 / (bt + 1.0))

    c3 = _halve_until(
        lambda c: _passes(gaussian_baseline(1.0 / c, beta=bt, holder_radius=L0 / 2)), "c3")
    f = gaussian_baseline(1.0 / c3, beta=bt, holder_radius=L0)

    def eps_g(c4):
        gg = gaussian_baseline(s / c4)
        return SmoothDensity(lambda x: epsilon * gg.evaluate(x), gg.support, bt, L0 / 2,
                             "eps*g", gg.breakpoints, gg.feature_scale)

    c4 = _halve_until(lambda c: _passes(eps_g(c)), "c4")
    g = gaussian_baseline(s / c4).with_claim(bt, np.inf, "g")
    f_tilde = mixture([f, g], [1.0 - epsilon, epsilon], "f_tilde").with_claim(bt, L0)
    g_tilde = gaussian_baseline(1.0).with_claim(bt, np.inf, "g_tilde")
    phi0 = 1.0 / math.sqrt(2.0 * math.pi)
    c0 = c4 * phi0 / 2.0
    sep = abs(float(f_tilde.evaluate(np.array([0.0]))[0] - f.evaluate(np.array([0.0]))[0]))
    return PerturbationPair(
        "unidentifiable", f.with_claim(bt, L0, "f"), f_tilde, g, g_tilde,
        epsilon, 0.0, np.inf, sep,
        constants={"c0": c0, "c3": c3, "c4": c4, "width": s / c4},
        flags={"separation_bound_holds": s <= c4 / (2.0 * c3)},
    )
