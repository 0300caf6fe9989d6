"""Command-line entry point: ``rate-sweep``, ``adapt-demo``, ``certificate``, ``kernel-check``."""

from __future__ import annotations

import argparse
import configparser
import csv
import math
import sys
from typing import Dict, List, Optional, Sequence

import numpy as np

from .adaptation import LepskiConfig, default_c1, lepski_select
from .bench import ConfigError, ExperimentConfig, build_model, rate_sweep, write_report_csv
from .certificates import ModulusSearch, le_cam_bound, modulus_search
from .contamination import sample_mixture
from .densities import (
    InfeasibleConstruction,
    pair_arbitrary,
    pair_level,
    pair_neighborhood,
    pair_proportion,
    pair_unidentifiable,
)
from .estimators import Normalization
from .kernels import check_kernel_class, make_order_kernel

__all__ = ["main", "read_config_file", "build_parser"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3

_VARIANTS = {
    "standard": "standard",
    "eps-ref": "epsilon_reference",
    "reverse": "reverse",
    "reverse-cons": "reverse_conservative",
}
CERTIFICATE_COLUMNS = ("name", "n", "epsilon", "beta0", "beta1", "m", "chi2_single",
                       "chi2_joint", "delta", "lecam_bound", "feasible")


def read_config_file(path: str) -> Dict[str, str]:
    """Parse ``key = value`` lines (``#`` comments allowed) into a dict."""
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"),
                                       inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        with open(path) as fh:
            parser.read_string("[config]\n" + fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"malformed config file {path}: {exc}") from None
    return dict(parser["config"])


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _globals(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--seed", type=int, default=d, help="master seed")
    p.add_argument("--out", default=d, metavar="PATH", help="CSV output path (default: stdout)")
    p.add_argument("--config", default=d, metavar="PATH", help="key = value config file")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="contamkde", description=__doc__)
    _globals(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    rs = sub.add_parser("rate-sweep", help="Monte Carlo risk over a grid of cells")
    _globals(rs, suppress=True)
    for name in ("regime", "estimator", "target", "contamination", "normalization", "sweep-axis"):
        rs.add_argument(f"--{name}")
    for name in ("epsilon", "m", "beta0", "beta1", "beta0-lower", "c1"):
        rs.add_argument(f"--{name}", type=float)
    for name in ("kernel-order", "replications", "n-jobs"):
        rs.add_argument(f"--{name}", type=int)
    rs.add_argument("--n-grid", help="comma-separated sample sizes")
    rs.add_argument("--epsilon-grid", help="comma-separated contamination proportions")

    ad = sub.add_parser("adapt-demo", help="run one Lepski selector and dump its diagnostics")
    _globals(ad, suppress=True)
    ad.add_argument("--variant", choices=sorted(_VARIANTS), default="standard")
    ad.add_argument("--c1", type=float)
    ad.add_argument("--n", type=int, default=4096)
    ad.add_argument("--epsilon", type=float, default=0.0)
    ad.add_argument("--beta0", type=float, default=2.0)
    ad.add_argument("--kernel-order", type=int, default=6)
    ad.add_argument("--target", default="gauss:1")
    ad.add_argument("--contamination", default="none")
    ad.add_argument("--normalization", choices=("plain", "known_epsilon"), default="plain")

    ce = sub.add_parser("certificate", help="build a lower-bound construction and report its certificate")
    _globals(ce, suppress=True)
    ce.add_argument("--name", required=True,
                    choices=("level", "neighborhood", "proportion", "arbitrary", "unidentifiable", "modulus"))
    ce.add_argument("--params", default="", help="comma-separated key=value overrides")
    ce.add_argument("--n", type=int, default=10000)
    ce.add_argument("--epsilon", type=float, default=0.1)
    ce.add_argument("--epsilon-tilde", type=float)
    ce.add_argument("--m", type=float, default=1.0)
    ce.add_argument("--beta0", type=float)
    ce.add_argument("--beta1", type=float)
    ce.add_argument("--L0", type=float, default=5.0)
    ce.add_argument("--L1", type=float, default=5.0)

    kc = sub.add_parser("kernel-check", help="verify the kernel-class conditions of an order-l kernel")
    _globals(kc, suppress=True)
    kc.add_argument("--order", type=int, required=True)
    kc.add_argument("--tol", type=float, default=1e-8)
    kc.add_argument("--L", type=float, help="class constant (default: the kernel's own bounds)")
    kc.add_argument("--csv", metavar="PATH", help="also write the report rows as CSV")
    return parser


def _open_out(path: Optional[str]):
    return sys.stdout if not path else open(path, "w", newline="")


def _close_out(fh) -> None:
    if fh is not sys.stdout:
        fh.close()


def _split_list(text: str) -> List[str]:
    return [t for t in text.replace(",", " ").split() if t]


def _cmd_rate_sweep(args, config: Dict[str, str]) -> int:
    values: Dict[str, object] = dict(config)
    for key in ("regime", "estimator", "target", "contamination", "normalization", "sweep_axis",
                "epsilon", "m", "beta0", "beta1", "beta0_lower", "c1", "kernel_order",
                "replications", "n_jobs"):
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    if args.n_grid is not None:
        values["n_grid"] = args.n_grid
    if args.epsilon_grid is not None:
        values["epsilon_grid"] = args.epsilon_grid
    if getattr(args, "seed", None) is not None:
        values["master_seed"] = args.seed
    out = getattr(args, "out", None) or values.pop("output_path", None)
    values.pop("output_path", None)
    cfg = ExperimentConfig.from_mapping(values)
    report = rate_sweep(cfg)
    fh = _open_out(out)
    try:
        write_report_csv(report, fh)
    finally:
        _close_out(fh)
    if report.slope is not None:
        print(f"slope = {report.slope:.4f} +/- {report.slope_stderr:.4f}", file=sys.stderr)
    else:
        print(f"slope undefined: {report.slope_note}", file=sys.stderr)
    return EXIT_OK


def _apply_config(args, config: Dict[str, str], parser_defaults: Dict[str, object]) -> None:
    for key, raw in config.items():
        dest = key.replace("-", "_")
        if dest not in parser_defaults:
            raise ConfigError(f"unknown config key {key!r} for {args.command}")
        if getattr(args, dest) == parser_defaults[dest]:
            default = parser_defaults[dest]
            try:
                if isinstance(default, bool):
                    value = raw.strip().lower() in ("1", "true", "yes")
                elif isinstance(default, int):
                    value = int(raw)
                elif isinstance(default, float) or dest in ("c1", "beta0", "beta1", "epsilon_tilde", "L"):
                    value = float(raw)
                else:
                    value = raw.strip()
            except ValueError:
                raise ConfigError(f"bad value for {key}: {raw!r}") from None
            setattr(args, dest, value)


def _cmd_adapt_demo(args) -> int:
    variant = _VARIANTS[args.variant]
    cfg = ExperimentConfig(target=args.target, contamination=args.contamination,
                           epsilon=args.epsilon, beta0=args.beta0, n_grid=(args.n,))
    model = build_model(cfg, args.n, args.epsilon)
    seed = 0 if getattr(args, "seed", None) is None else args.seed
    points, _ = sample_mixture(model, args.n, np.random.default_rng(seed))
    k = make_order_kernel(args.kernel_order)
    c1 = default_c1(k) if args.c1 is None else args.c1
    norm = Normalization.plain() if args.normalization == "plain" else Normalization.known_epsilon(args.epsilon)
    lcfg = LepskiConfig(c1, variant, norm, epsilon=args.epsilon, beta0=args.beta0)
    res = lepski_select(points, k, lcfg)
    fh = _open_out(getattr(args, "out", None))
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["h", "estimate", "threshold", "admissible", "selected", "tests"])
        for i, h in enumerate(res.grid):
            w.writerow([repr(float(h)), repr(float(res.estimates[i])), repr(float(res.thresholds[i])),
                        int(res.admissible[i]), int(h == res.h_hat),
                        "".join("1" if t else "0" for t in res.tests[i])])
        if not np.any(res.grid == res.h_hat):
            w.writerow([repr(res.h_hat), repr(res.estimate), "", "", 1, ""])
    finally:
        _close_out(fh)
    truth = float(model.target(0.0))
    print(f"variant={variant} c1={c1:.6g} h_hat={res.h_hat:.6g} estimate={res.estimate:.6g} "
          f"f(0)={truth:.6g} empty={res.empty}", file=sys.stderr)
    return EXIT_OK


def _parse_params(text: str) -> Dict[str, float]:
    out = {}
    for item in _split_list(text):
        key, sep, val = item.partition("=")
        if not sep:
            raise ConfigError(f"--params entries must be key=value, got {item!r}")
        try:
            out[key.strip()] = float(val)
        except ValueError:
            raise ConfigError(f"bad number in --params: {item!r}") from None
    return out


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    return "" if math.isnan(v) else repr(v)


_CERT_SMOOTHNESS = {
    "level": (1.0, 1.0),
    "neighborhood": (2.0, 1.0),
    "proportion": (1.0, 1.0),
    "arbitrary": (1.0, None),
    "unidentifiable": (1.0, None),
    "modulus": (1.0, None),
}


def _cmd_certificate(args) -> int:
    p = {"n": args.n, "epsilon": args.epsilon, "epsilon_tilde": args.epsilon_tilde, "m": args.m,
         "beta0": args.beta0, "beta1": args.beta1, "L0": args.L0, "L1": args.L1}
    extra = _parse_params(args.params)
    unknown = set(extra) - set(p)
    if unknown:
        raise ConfigError(f"unknown certificate parameter(s): {sorted(unknown)}")
    p.update(extra)
    n, eps = int(p["n"]), float(p["epsilon"])
    name = args.name
    b0_default, b1_default = _CERT_SMOOTHNESS[name]
    if p["beta0"] is None:
        p["beta0"] = b0_default
    if p["beta1"] is None:
        p["beta1"] = b1_default
    if name == "modulus":
        beta0 = float(p["beta0"])
        res = modulus_search(beta0, float(p["L0"]), eps, ModulusSearch())
        row = {"name": name, "n": None, "epsilon": eps, "beta0": beta0, "beta1": None, "m": None,
               "chi2_single": None, "chi2_joint": None, "delta": math.sqrt(res.value),
               "lecam_bound": res.value, "feasible": res.value > 0}
        detail = f"omega={res.value:.6g} h*={res.h_star:.6g} c*={res.c_star:.6g} binding={res.binding}"
    else:
        if name == "level":
            pair = pair_level(eps, p["m"], beta0=p["beta0"], beta1=p["beta1"],
                              L0=p["L0"], L1=p["L1"])
        elif name == "neighborhood":
            pair = pair_neighborhood(eps, n, beta0=p["beta0"], beta1=p["beta1"],
                                     L0=p["L0"], L1=p["L1"])
        elif name == "proportion":
            et = p["epsilon_tilde"] if p["epsilon_tilde"] is not None else eps / 2.0
            pair = pair_proportion(eps, et, beta0=p["beta0"], beta1=p["beta1"],
                                   L0=p["L0"], L1=p["L1"])
        elif name == "arbitrary":
            pair = pair_arbitrary(eps, beta0=p["beta0"], L0=p["L0"])
        else:
            pair = pair_unidentifiable(eps, beta0_tilde=p["beta0"], L0=p["L0"])
        cert = le_cam_bound(pair, n)
        row = {"name": name, "n": n, "epsilon": eps, "beta0": p["beta0"], "beta1": p["beta1"],
               "m": pair.m, "chi2_single": cert.chi2_single, "chi2_joint": cert.chi2_joint,
               "delta": cert.delta, "lecam_bound": cert.lecam_bound, "feasible": cert.feasible}
        detail = " ".join(f"{k}={_fmt(v)}" for k, v in sorted(cert.notes.items())
                          if isinstance(v, (int, float)))
    for key in CERTIFICATE_COLUMNS:
        print(f"{key}: {_fmt(row[key])}")
    if detail:
        print(detail)
    out = getattr(args, "out", None)
    if out:
        with open(out, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CERTIFICATE_COLUMNS)
            w.writerow([_fmt(row[k]) for k in CERTIFICATE_COLUMNS])
    return EXIT_OK


def _cmd_kernel_check(args) -> int:
    k = make_order_kernel(args.order)
    L = args.L if args.L is not None else max(k.sup_norm_bound, k.l2_bound, k.abs_moment_bound)
    report = check_kernel_class(k, args.order, L, args.tol)
    print(report.to_text())
    target = args.csv or getattr(args, "out", None)
    if target:
        with open(target, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["condition", "measured", "bound", "passed"])
            for r in report.rows:
                w.writerow([r.condition, repr(float(r.measured)), repr(float(r.bound)), r.passed])
    return EXIT_OK if report.passed else 1


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the CLI; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        config = read_config_file(args.config) if getattr(args, "config", None) else {}
        if args.command == "rate-sweep":
            return _cmd_rate_sweep(args, config)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        defaults = {a.dest: a.default for a in sub._actions
                    if a.dest not in ("help", "seed", "out", "config")}
        _apply_config(args, config, defaults)
        if args.command == "adapt-demo":
            return _cmd_adapt_demo(args)
        if args.command == "certificate":
            return _cmd_certificate(args)
        return _cmd_kernel_check(args)
    except InfeasibleConstruction as exc:
        print(f"infeasible construction: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ConfigError, ValueError, TypeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
