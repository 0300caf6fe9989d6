"""Monte Carlo risk estimation, rate fitting and sweep orchestration."""

from __future__ import annotations

import csv
import dataclasses
import math
import os
from dataclasses import dataclass
from typing import Callable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from scipy import stats

from ._validation import check_count, check_epsilon, check_positive
from .adaptation import DEFAULT_ADAPTIVE_ORDER, LepskiConfig, default_c1, lepski_select
from .contamination import ContaminatedModel, adversarial_spike, point_mass, sample_mixture
from .densities import SmoothDensity, gaussian_baseline, laplace_baseline, scaled_bump_a
from .estimators import (
    Normalization,
    kde_at_zero,
    oracle_bandwidth_arbitrary,
    oracle_bandwidth_plain,
    oracle_bandwidth_structured,
    oracle_kernel_order,
)
from .kernels import make_order_kernel

__all__ = [
    "ConfigError",
    "REGIMES",
    "ESTIMATORS",
    "CSV_COLUMNS",
    "ExperimentConfig",
    "CellRisk",
    "RiskReport",
    "derive_seed",
    "build_model",
    "monte_carlo_risk",
    "fit_rate_exponent",
    "theory_rate",
    "rate_sweep",
    "write_report_csv",
]

REGIMES = (
    "structured",
    "structured_adapt_eps",
    "structured_adapt_smooth",
    "structured_adapt_both",
    "arbitrary",
    "arbitrary_adapt_one",
)
ESTIMATORS = (
    "oracle-plain",
    "oracle-structured",
    "oracle-arbitrary",
    "lepski-standard",
    "lepski-eps-ref",
    "lepski-reverse",
    "lepski-reverse-cons",
)
_LEPSKI_VARIANT = {
    "lepski-standard": "standard",
    "lepski-eps-ref": "epsilon_reference",
    "lepski-reverse": "reverse",
    "lepski-reverse-cons": "reverse_conservative",
}
CSV_COLUMNS = (
    "regime", "estimator", "n", "epsilon", "beta0", "beta1", "m", "c1",
    "kernel_order", "mse", "stderr", "mean_h_hat", "theory_rate", "seed",
)
MIN_REPLICATIONS_FOR_FIT = 30


class ConfigError(ValueError):
    """Invalid experiment configuration."""


# ---------------------------------------------------------------- seeds

_MASK = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return x ^ (x >> 31)


def derive_seed(master_seed: int, cell_index: int, replication: int) -> int:
    """64-bit seed for one replication, independent of execution order."""
    s = _splitmix64(int(master_seed) & _MASK)
    s = _splitmix64(s ^ (int(cell_index) & _MASK))
    return _splitmix64(s ^ (int(replication) & _MASK))


# --------------------------------------------------------------- config


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: model, estimator, sweep cells and Monte Carlo settings.

    Model specs are short strings:

    * ``target``: ``gauss:<scale>`` or ``laplace:<scale>``;
    * ``contamination``: ``none``, ``gauss:<scale>``, ``level:<g(0)>``
      (centered Gaussian with that value at 0), ``bump:<c>`` (``c a(c x)``),
      ``point:<x>``, ``spike:<half-width>`` or ``spike:oracle`` (half-width
      equal to the cell's arbitrary-contamination oracle bandwidth).

    ``sweep_axis`` is ``n`` (cells over ``n_grid`` at ``epsilon``),
    ``epsilon`` (cells over ``epsilon_grid`` at ``n_grid[0]``) or ``path``
    (cells ``zip(n_grid, epsilon_grid)``, no slope fit).
    """

    regime: str = "structured"
    estimator: str = "oracle-plain"
    target: str = "gauss:1"
    contamination: str = "none"
    epsilon: float = 0.0
    m: Optional[float] = None
    beta0: float = 2.0
    beta1: Optional[float] = None
    beta0_lower: Optional[float] = None
    normalization: str = "auto"
    c1: Optional[float] = None
    kernel_order: Optional[int] = None
    n_grid: Tuple[int, ...] = tuple(2**k for k in range(9, 15))
    epsilon_grid: Optional[Tuple[float, ...]] = None
    sweep_axis: str = "n"
    replications: int = 200
    master_seed: int = 0
    output_path: Optional[str] = None
    n_jobs: int = 1

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise ConfigError(f"unknown regime {self.regime!r}; expected one of {REGIMES}")
        if self.estimator not in ESTIMATORS:
            raise ConfigError(f"unknown estimator {self.estimator!r}; expected one of {ESTIMATORS}")
        if self.normalization not in ("auto", "plain", "known_epsilon"):
            raise ConfigError(f"unknown normalization {self.normalization!r}")
        if self.sweep_axis not in ("n", "epsilon", "path"):
            raise ConfigError(f"unknown sweep axis {self.sweep_axis!r}")
        n_grid = tuple(int(v) for v in self.n_grid)
        if not n_grid or any(v < 1 for v in n_grid):
            raise ConfigError("n_grid must be a nonempty list of positive integers")
        if any(a >= b for a, b in zip(n_grid, n_grid[1:])):
            raise ConfigError("n_grid must be strictly increasing")
        object.__setattr__(self, "n_grid", n_grid)
        if self.epsilon_grid is not None:
            eg = tuple(float(v) for v in self.epsilon_grid)
            try:
                for v in eg:
                    check_epsilon(v)
            except (TypeError, ValueError) as exc:
                raise ConfigError(str(exc)) from None
            object.__setattr__(self, "epsilon_grid", eg)
        if self.sweep_axis in ("epsilon", "path") and not self.epsilon_grid:
            raise ConfigError(f"sweep_axis={self.sweep_axis} needs epsilon_grid")
        if self.sweep_axis == "path" and len(self.epsilon_grid) != len(n_grid):
            raise ConfigError("path sweeps need n_grid and epsilon_grid of equal length")
        try:
            check_epsilon(float(self.epsilon))
            check_count(int(self.replications), "replications")
            check_positive(float(self.beta0), "beta0")
            if self.beta1 is not None:
                check_positive(float(self.beta1), "beta1")
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
        if self.estimator == "lepski-reverse-cons" and self.beta0_lower is None:
            raise ConfigError("lepski-reverse-cons needs beta0_lower")
        _parse_spec(self.target)
        _parse_spec(self.contamination)

    @property
    def beta1_eff(self) -> float:
        return float(self.beta0 if self.beta1 is None else self.beta1)

    def cells(self) -> List[Tuple[int, float]]:
        if self.sweep_axis == "n":
            return [(n, float(self.epsilon)) for n in self.n_grid]
        if self.sweep_axis == "epsilon":
            return [(self.n_grid[0], e) for e in self.epsilon_grid]
        return list(zip(self.n_grid, self.epsilon_grid))

    @classmethod
    def from_mapping(cls, values: Mapping[str, object]) -> "ExperimentConfig":
        """Build from string-valued keys (as read from a config file)."""
        types = {f.name: f for f in dataclasses.fields(cls)}
        kwargs = {}
        for key, raw in values.items():
            if key not in types:
                raise ConfigError(f"unknown config key {key!r}")
            kwargs[key] = _coerce(key, raw)
        return cls(**kwargs)


_INT_TUPLES = {"n_grid"}
_FLOAT_TUPLES = {"epsilon_grid"}
_INTS = {"replications", "master_seed", "n_jobs", "kernel_order"}
_FLOATS = {"epsilon", "m", "beta0", "beta1", "beta0_lower", "c1"}


def _coerce(key: str, raw):
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    if text.lower() in ("", "none", "null"):
        return None
    try:
        if key in _INT_TUPLES:
            return tuple(int(float(v)) for v in text.replace(",", " ").split())
        if key in _FLOAT_TUPLES:
            return tuple(float(v) for v in text.replace(",", " ").split())
        if key in _INTS:
            return int(text)
        if key in _FLOATS:
            return float(text)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None
    return text


# ---------------------------------------------------------------- model


def _parse_spec(spec: str) -> Tuple[str, Optional[str]]:
    kind, _, arg = str(spec).partition(":")
    kind = kind.strip().lower()
    known = {"none", "gauss", "laplace", "level", "bump", "point", "spike"}
    if kind not in known:
        raise ConfigError(f"unknown model string {spec!r}")
    if kind != "none" and not arg:
        raise ConfigError(f"model string {spec!r} needs an argument")
    return kind, (arg.strip() or None)


def _spec_float(spec: str, arg: str) -> float:
    try:
        return float(arg)
    except ValueError:
        raise ConfigError(f"bad number in model string {spec!r}") from None


def _target_density(cfg: ExperimentConfig) -> SmoothDensity:
    kind, arg = _parse_spec(cfg.target)
    if kind == "gauss":
        return gaussian_baseline(_spec_float(cfg.target, arg), beta=cfg.beta0)
    if kind == "laplace":
        return laplace_baseline(_spec_float(cfg.target, arg))
    raise ConfigError(f"target must be gauss:<s> or laplace:<s>, got {cfg.target!r}")


def build_model(cfg: ExperimentConfig, n: int, epsilon: float) -> ContaminatedModel:
    """The data-generating model of one sweep cell."""
    target = _target_density(cfg)
    kind, arg = _parse_spec(cfg.contamination)
    if kind == "none":
        if epsilon > 0:
            raise ConfigError("contamination 'none' requires epsilon = 0")
        return ContaminatedModel(0.0, target, point_mass(0.0))
    if kind == "gauss":
        g = gaussian_baseline(_spec_float(cfg.contamination, arg), beta=cfg.beta1_eff)
    elif kind == "level":
        level = _spec_float(cfg.contamination, arg)
        if level <= 0:
            raise ConfigError("level:<m> needs m > 0")
        g = gaussian_baseline(1.0 / (level * math.sqrt(2.0 * math.pi)), beta=cfg.beta1_eff)
    elif kind == "bump":
        g = scaled_bump_a(_spec_float(cfg.contamination, arg), beta=cfg.beta1_eff, holder_radius=np.inf)
    elif kind == "point":
        return ContaminatedModel(epsilon, target, point_mass(_spec_float(cfg.contamination, arg)))
    elif kind == "spike":
        if arg == "oracle":
            width = oracle_bandwidth_arbitrary(n, epsilon, cfg.beta0)
        else:
            width = _spec_float(cfg.contamination, arg)
        return ContaminatedModel(epsilon, target, adversarial_spike(width, 0.0))
    else:
        raise ConfigError(f"{cfg.contamination!r} is not a contamination string")
    return ContaminatedModel(epsilon, target, g, m=cfg.m)


# ------------------------------------------------------------ estimators


@dataclass(frozen=True)
class _CellEstimator:
    """Per-cell estimator; returns ``(estimate, bandwidth)``."""

    kind: str
    kernel_order: int
    h: float = float("nan")
    norm: Normalization = Normalization()
    lepski: Optional[LepskiConfig] = None

    def __call__(self, points) -> Tuple[float, float]:
        k = make_order_kernel(self.kernel_order)
        if self.lepski is None:
            return kde_at_zero(points, k, self.h, self.norm), self.h
        res = lepski_select(points, k, self.lepski)
        return res.estimate, res.h_hat


def _kernel_order(cfg: ExperimentConfig) -> int:
    if cfg.kernel_order is not None:
        return int(cfg.kernel_order)
    if cfg.estimator.startswith("lepski"):
        return DEFAULT_ADAPTIVE_ORDER
    if cfg.estimator == "oracle-structured":
        return oracle_kernel_order(cfg.beta0, cfg.beta1_eff)
    return oracle_kernel_order(cfg.beta0)


def _normalization(cfg: ExperimentConfig, epsilon: float) -> Normalization:
    variant = cfg.normalization
    if variant == "auto":
        eps_aware = cfg.estimator in ("oracle-structured", "oracle-arbitrary")
        variant = "known_epsilon" if eps_aware else "plain"
    return Normalization.plain() if variant == "plain" else Normalization.known_epsilon(epsilon)


def _cell_estimator(cfg: ExperimentConfig, n: int, epsilon: float) -> _CellEstimator:
    order = _kernel_order(cfg)
    norm = _normalization(cfg, epsilon)
    if cfg.estimator == "oracle-plain":
        return _CellEstimator("oracle", order, oracle_bandwidth_plain(n, cfg.beta0), norm)
    if cfg.estimator == "oracle-structured":
        h = oracle_bandwidth_structured(n, epsilon, cfg.beta0, cfg.beta1_eff)
        return _CellEstimator("oracle", order, h, norm)
    if cfg.estimator == "oracle-arbitrary":
        return _CellEstimator("oracle", order, oracle_bandwidth_arbitrary(n, epsilon, cfg.beta0), norm)
    c1 = default_c1(make_order_kernel(order)) if cfg.c1 is None else float(cfg.c1)
    variant = _LEPSKI_VARIANT[cfg.estimator]
    beta = cfg.beta0_lower if variant == "reverse_conservative" else cfg.beta0
    lcfg = LepskiConfig(c1, variant, norm, epsilon=epsilon, beta0=beta)
    return _CellEstimator("lepski", order, norm=norm, lepski=lcfg)


def _effective_c1(cfg: ExperimentConfig) -> Optional[float]:
    if not cfg.estimator.startswith("lepski"):
        return None
    return default_c1(make_order_kernel(_kernel_order(cfg))) if cfg.c1 is None else float(cfg.c1)


# ---------------------------------------------------------- Monte Carlo


@dataclass
class CellRisk:
    """Monte Carlo risk at one ``(n, epsilon)`` cell."""

    n: int
    epsilon: float
    mse: float
    stderr: float
    replications: int
    mean_h_hat: float
    seed: int
    theory_rate: float = float("nan")

    def __iter__(self):
        return iter((self.mse, self.stderr))


def _run_block(model, estimator, n, seeds, truth):
    out = np.empty((len(seeds), 2))
    for i, s in enumerate(seeds):
        points, _ = sample_mixture(model, n, np.random.default_rng(s))
        est = estimator(points)
        if isinstance(est, tuple):
            value, h = est
        else:
            value, h = est, float("nan")
        out[i, 0] = (float(value) - truth) ** 2
        out[i, 1] = h
    return out


def monte_carlo_risk(
    cfg: ExperimentConfig,
    cell: Tuple[int, float],
    *,
    cell_index: int = 0,
    estimator: Optional[Callable] = None,
) -> CellRisk:
    """Average squared error of the estimator of ``f(0)`` over replications.

    Parameters
    ----------
    cfg : ExperimentConfig
    cell : (n, epsilon)
    cell_index : int
        Mixed into every replication seed; keep it equal to the cell's
        position in the sweep for reproducible output.
    estimator : callable, optional
        ``points -> estimate`` or ``points -> (estimate, h)``; overrides the
        estimator described by ``cfg``.

    Returns
    -------
    CellRisk
        ``stderr`` is the sample standard deviation of the squared errors
        over the square root of the replication count.
    """
    n, epsilon = int(cell[0]), float(cell[1])
    model = build_model(cfg, n, epsilon)
    truth = float(model.target(0.0))
    est = estimator if estimator is not None else _cell_estimator(cfg, n, epsilon)
    reps = int(cfg.replications)
    seeds = [derive_seed(cfg.master_seed, cell_index, r) for r in range(reps)]
    n_jobs = int(cfg.n_jobs)
    if n_jobs == 1:
        res = _run_block(model, est, n, seeds, truth)
    else:
        blocks = np.array_split(np.arange(reps), max(1, min(reps, 4 * abs(n_jobs))))
        parts = Parallel(n_jobs=n_jobs)(
            delayed(_run_block)(model, est, n, [seeds[i] for i in b], truth) for b in blocks if b.size)
        res = np.concatenate(parts, axis=0)
    sq = res[:, 0]
    mse = float(np.sum(sq) / reps)
    stderr = float(np.std(sq, ddof=1) / math.sqrt(reps)) if reps > 1 else 0.0
    hs = res[:, 1]
    mean_h = float(np.sum(hs) / reps) if np.all(np.isfinite(hs)) else float("nan")
    return CellRisk(n, epsilon, mse, stderr, reps, mean_h, int(cfg.master_seed))


# ----------------------------------------------------------- rate tools


def fit_rate_exponent(cells: Sequence[Tuple[float, float]]) -> Tuple[float, float]:
    """Least-squares slope of ``log mse`` on ``log x`` and its standard error."""
    if len(cells) < 3:
        raise ValueError("need at least 3 cells to fit a rate exponent")
    x = np.array([c[0] for c in cells], dtype=float)
    y = np.array([c[1] for c in cells], dtype=float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("all cell coordinates and mse values must be positive")
    fit = stats.linregress(np.log(x), np.log(y))
    return float(fit.slope), float(fit.stderr)


def theory_rate(regime: str, n: float, epsilon: float, beta0: float,
                beta1: Optional[float] = None, m: Optional[float] = None) -> float:
    """Displayed minimax or adaptive rate for ``regime`` (natural log)."""
    if regime not in REGIMES:
        raise ValueError(f"unknown regime {regime!r}")
    n = float(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    epsilon = check_epsilon(float(epsilon))
    beta0 = check_positive(beta0, "beta0")
    adapt_n = regime in ("structured_adapt_smooth", "structured_adapt_both", "arbitrary_adapt_one")
    if adapt_n:
        if n < 2:
            raise ValueError("adaptive rates need n >= 2")
        n_eff = n / math.log(n)
    else:
        n_eff = n
    first = n_eff ** (-2.0 * beta0 / (2.0 * beta0 + 1.0))
    if regime.startswith("arbitrary"):
        return max(first, epsilon ** (2.0 * beta0 / (beta0 + 1.0)))
    if beta1 is None:
        raise ValueError(f"regime {regime} needs beta1")
    beta1 = check_positive(beta1, "beta1")
    if regime in ("structured_adapt_eps", "structured_adapt_both"):
        level = 1.0
    else:
        if m is None:
            raise ValueError(f"regime {regime} needs m")
        if m < 0:
            raise ValueError("m must be nonnegative")
        level = min(1.0, float(m))
    second = (epsilon * level) ** 2
    third = n_eff ** (-2.0 * beta1 / (2.0 * beta1 + 1.0)) * epsilon ** (2.0 / (2.0 * beta1 + 1.0))
    return max(first, second, third)


@dataclass
class RiskReport:
    """Per-cell results of a sweep plus the fitted exponent along its axis."""

    config: ExperimentConfig
    cells: List[CellRisk]
    slope: Optional[float] = None
    slope_stderr: Optional[float] = None
    slope_note: str = ""

    def mses(self) -> np.ndarray:
        return np.array([c.mse for c in self.cells])


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return ""
    return repr(v)


def write_report_csv(report: RiskReport, stream) -> None:
    """Write the sweep CSV (fixed columns, full-precision floats)."""
    cfg = report.config
    c1 = _effective_c1(cfg)
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for c in report.cells:
        w.writerow([
            cfg.regime, cfg.estimator, c.n, _fmt(c.epsilon), _fmt(float(cfg.beta0)),
            _fmt(cfg.beta1_eff), _fmt(cfg.m), _fmt(c1), _kernel_order(cfg),
            _fmt(c.mse), _fmt(c.stderr), _fmt(c.mean_h_hat), _fmt(c.theory_rate), c.seed,
        ])


def _theory_for(cfg: ExperimentConfig, n: int, epsilon: float) -> float:
    try:
        return theory_rate(cfg.regime, n, epsilon, cfg.beta0, cfg.beta1_eff, cfg.m)
    except ValueError:
        return float("nan")


def rate_sweep(cfg: ExperimentConfig, *, estimator: Optional[Callable] = None) -> RiskReport:
    """Run every cell, fit the exponent along the sweep axis, write the CSV.

    The slope is left undefined (with ``slope_note`` set) for single or
    path sweeps, fewer than 3 cells, fewer than 30 replications, or any
    zero mse.
    """
    cells = []
    for i, (n, eps) in enumerate(cfg.cells()):
        risk = monte_carlo_risk(cfg, (n, eps), cell_index=i, estimator=estimator)
        risk.theory_rate = _theory_for(cfg, n, eps)
        cells.append(risk)
    report = RiskReport(cfg, cells)
    if cfg.sweep_axis == "path":
        report.slope_note = "path sweep: no slope"
    elif len(cells) < 3:
        report.slope_note = "fewer than 3 cells"
    elif cfg.replications < MIN_REPLICATIONS_FOR_FIT:
        report.slope_note = f"fewer than {MIN_REPLICATIONS_FOR_FIT} replications"
    elif any(c.mse <= 0 for c in cells):
        report.slope_note = "nonpositive mse: slope undefined"
    else:
        xs = [c.n if cfg.sweep_axis == "n" else c.epsilon for c in cells]
        report.slope, report.slope_stderr = fit_rate_exponent(list(zip(xs, [c.mse for c in cells])))
    if cfg.output_path:
        parent = os.path.dirname(os.path.abspath(cfg.output_path))
        os.makedirs(parent, exist_ok=True)
        with open(cfg.output_path, "w", newline="") as fh:
            write_report_csv(report, fh)
    return report
