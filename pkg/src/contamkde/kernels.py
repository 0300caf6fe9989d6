"""Compactly supported higher-order kernels and class-membership checks.

Kernels are built from the Legendre expansion of the point evaluation
functional at zero on [-1, 1]:

    K(x) = sum_{j=0}^{l} (2j + 1)/2 * P_j(0) * P_j(x),   |x| <= 1,

which reproduces every polynomial of degree <= l, so ``int K = 1`` and
``int x^j K = 0`` for ``j = 1..l``. Odd Legendre polynomials vanish at zero,
so the kernels are even.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import List, Sequence

import numpy as np
from numpy.polynomial import legendre as npleg

from ._quadrature import adaptive_simpson

__all__ = [
    "Kernel",
    "KernelCheckRow",
    "KernelClassReport",
    "make_order_kernel",
    "eval_kernel",
    "check_kernel_class",
    "product_kernel_eval",
]

_BOUND_SLACK = 1e-9


@dataclass(frozen=True)
class Kernel:
    """Polynomial kernel on ``[-support_radius, support_radius]``.

    ``coefficients`` are Legendre-series coefficients in the rescaled
    variable ``x / support_radius``.
    """

    order: int
    coefficients: tuple
    support_radius: float = 1.0
    sup_norm_bound: float = field(default=np.inf, compare=False)
    l2_bound: float = field(default=np.inf, compare=False)
    abs_moment_bound: float = field(default=np.inf, compare=False)

    def __call__(self, x):
        return eval_kernel(self, x)

    @property
    def roots(self) -> np.ndarray:
        """Real sign changes of K inside the support (useful quadrature breakpoints)."""
        r = npleg.legroots(np.asarray(self.coefficients, dtype=float))
        r = r[np.isreal(r)].real if np.iscomplexobj(r) else r
        r = r[np.abs(r) < 1.0] * self.support_radius
        return np.sort(r)


def make_order_kernel(order: int) -> Kernel:
    """Return the Legendre kernel of the given order on ``[-1, 1]``.

    Order 0 and order 1 both give the box kernel ``1/2``.
    """
    if isinstance(order, bool) or int(order) != order:
        raise TypeError("order must be an integer")
    order = int(order)
    if order < 0:
        raise ValueError(f"kernel order must be nonnegative, got {order}")
    return _make_order_kernel(order)


@lru_cache(maxsize=None)
def _make_order_kernel(order: int) -> Kernel:
    j = np.arange(order + 1)
    p_at_zero = np.array([npleg.legval(0.0, np.eye(order + 1)[k]) for k in j])
    coef = (2 * j + 1) / 2.0 * p_at_zero
    coef[np.abs(coef) < 1e-15] = 0.0
    coefficients = tuple(float(c) for c in coef)

    bare = Kernel(order=order, coefficients=coefficients)
    sup = _sup_abs(bare)
    # Parseval for an orthogonal expansion on [-1, 1]
    l2 = float(np.sum(coef**2 * 2.0 / (2 * j + 1)))
    absmom = _integrate_on_support(
        bare, lambda x: np.abs(x) ** order * np.abs(eval_kernel(bare, x))
    )
    return Kernel(
        order=order,
        coefficients=coefficients,
        sup_norm_bound=sup * (1 + _BOUND_SLACK) + _BOUND_SLACK,
        l2_bound=l2 * (1 + _BOUND_SLACK) + _BOUND_SLACK,
        abs_moment_bound=absmom * (1 + _BOUND_SLACK) + _BOUND_SLACK,
    )


def eval_kernel(k: Kernel, x):
    """Evaluate K at ``x`` (scalar or array); exactly zero outside the support."""
    x = np.asarray(x, dtype=float)
    u = x / k.support_radius
    inside = np.abs(u) <= 1.0
    out = np.where(inside, npleg.legval(np.where(inside, u, 0.0), k.coefficients), 0.0)
    out = out / k.support_radius
    return float(out) if out.ndim == 0 else out


def product_kernel_eval(k: Kernel, x: Sequence[float]) -> float:
    """Product kernel ``prod_j K(x_j)`` for a single d-vector."""
    x = np.asarray(x, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("product kernel needs at least one coordinate")
    return float(np.prod(eval_kernel(k, x)))


@dataclass
class KernelCheckRow:
    condition: str
    measured: float
    bound: float
    passed: bool


@dataclass
class KernelClassReport:
    """Outcome of :func:`check_kernel_class`, one row per class condition."""

    order: int
    radius: float
    tol: float
    rows: List[KernelCheckRow]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def failures(self) -> List[KernelCheckRow]:
        return [r for r in self.rows if not r.passed]

    def to_text(self) -> str:
        width = max(len(r.condition) for r in self.rows)
        lines = [f"{'condition':<{width}}  {'measured':>14}  {'bound':>14}  pass"]
        for r in self.rows:
            lines.append(
                f"{r.condition:<{width}}  {r.measured:>14.6e}  {r.bound:>14.6e}  "
                f"{'yes' if r.passed else 'NO'}"
            )
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


def check_kernel_class(k: Kernel, l: int, L: float, tol: float = 1e-8) -> KernelClassReport:
    """Check membership of ``k`` in the order-``l`` kernel class with radius ``L``.

    Moments are computed by adaptive Simpson quadrature on the support; the
    sup-norm is taken over a dense grid plus the critical points of K.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if l < 0:
        raise ValueError("l must be nonnegative")
    rows = []
    mass = _integrate_on_support(k, lambda x: eval_kernel(k, x))
    rows.append(KernelCheckRow("int K = 1", mass, 1.0, abs(mass - 1.0) <= tol))
    for j in range(1, l + 1):
        mom = _integrate_on_support(k, lambda x, j=j: x**j * eval_kernel(k, x))
        rows.append(KernelCheckRow(f"int x^{j} K = 0", mom, 0.0, abs(mom) <= tol))
    sup = _sup_abs(k)
    l2 = _integrate_on_support(k, lambda x: eval_kernel(k, x) ** 2)
    absmom = _integrate_on_support(k, lambda x: np.abs(x) ** l * np.abs(eval_kernel(k, x)))
    rows.append(KernelCheckRow("sup|K| <= L", sup, L, sup <= L))
    rows.append(KernelCheckRow("int K^2 <= L", l2, L, l2 <= L))
    rows.append(KernelCheckRow(f"int |x|^{l} |K| <= L", absmom, L, absmom <= L))
    return KernelClassReport(order=l, radius=L, tol=tol, rows=rows)


def _integrate_on_support(k: Kernel, g) -> float:
    r = k.support_radius
    return adaptive_simpson(g, -r, r, 1e-12, breakpoints=tuple(k.roots) + (0.0,))


def _sup_abs(k: Kernel) -> float:
    r = k.support_radius
    crit = npleg.legroots(npleg.legder(np.asarray(k.coefficients))) if len(k.coefficients) > 1 else []
    crit = np.asarray(crit)
    if np.iscomplexobj(crit):
        crit = crit[np.isreal(crit)].real
    crit = crit[np.abs(crit) <= 1.0] * r
    grid = np.concatenate([np.linspace(-r, r, 4001), crit])
    return float(np.max(np.abs(eval_kernel(k, grid))))
