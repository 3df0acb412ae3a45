"""Command-line front end.

Exit codes: 0 success, 1 domain or numerical failure, 2 usage or configuration error.
Data goes to ``--out`` (or standard output), diagnostics to standard error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from functools import partial
from pathlib import Path

from . import harness
from .config import ConfigError, ExperimentConfig, load_config, load_model, parse_config
from .errors import HeavyTrafficError, InfiniteMean
from .limits import ml_cdf
from .models import HeavyTrafficFamily, mean
from .normalize import solve_contraction, solve_defna, tail_index
from .rng import stream
from .parallel import sample_chunks
from .simulate import (
    SupSample,
    exact_supremum,
    levy_sup_grid,
    default_horizon,
    format_samples_csv,
    rw_supremum_sample,
    stopping_level,
    write_samples_csv,
)

__all__ = ["run", "main", "build_parser"]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _common(p: argparse.ArgumentParser, config: bool = True) -> None:
    p.add_argument("--model", help="model JSON file")
    if config:
        p.add_argument("--config", help="experiment config JSON file")
    p.add_argument("--out", help="output path (.json or .csv); standard output if omitted")
    p.add_argument("--seed", type=int, help="nonnegative integer seed")
    p.add_argument("--workers", type=int, help="worker processes (results do not depend on it)")
    p.add_argument("--timings", action="store_true", help="include wall times in reports")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="heavytraffic", description="Heavy-traffic limits of Lévy suprema.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("model-info", help="mean, tail index and class of a model")
    p.add_argument("--model", required=True)
    p.add_argument("--out")

    p = sub.add_parser("solve-delta", help="solve a normalization equation")
    p.add_argument("--model", required=True)
    p.add_argument("--mode", choices=("contraction", "defna"), required=True)
    p.add_argument("--rho", type=float, help="traffic intensity (contraction)")
    p.add_argument("--a", type=float, help="net drift of the centred model (defna)")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--out")

    p = sub.add_parser("ml-cdf", help="Mittag-Leffler distribution function")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--x", type=float, required=True)

    p = sub.add_parser("sample-sup", help="draw suprema to a CSV sample file")
    _common(p, config=False)
    p.add_argument("--a", type=float, required=True, help="drain rate")
    p.add_argument("--method", choices=("ladder", "rw", "grid"), default="ladder")
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--eps", type=float, default=1e-4)
    p.add_argument("--horizon", type=float)
    p.add_argument("--step", type=float, default=1.0)

    for name, text in (
        ("sweep", "heavy-traffic sweep against the limit law"),
        ("equivalence", "walk maximum versus path supremum"),
        ("pruitt", "Pruitt-type bound on finite-horizon suprema"),
        ("htip", "condition (I) of the heavy-traffic invariance principle"),
    ):
        p = sub.add_parser(name, help=text)
        _common(p)
        p.add_argument("--rho", type=_float_list, help="comma-separated traffic intensities")
        p.add_argument("--a", type=_float_list, help="comma-separated drain rates")
        p.add_argument("--n-samples", type=int)
        if name == "pruitt":
            p.add_argument("--t-grid", type=_float_list)
            p.add_argument("--x-grid", type=_float_list)
        if name == "htip":
            p.add_argument("--family", choices=("gaussian", "truncated"))
    return parser


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _experiment_config(args) -> ExperimentConfig:
    overrides = {}
    if args.model is not None:
        overrides["model"] = json.loads(json.dumps(load_model(args.model).to_dict()))
    for key, attr in (("seed", "seed"), ("workers", "workers"), ("out", "out"), ("n_samples", "n_samples"),
                      ("rho_list", "rho"), ("a_list", "a"), ("t_grid", "t_grid"), ("x_grid", "x_grid"),
                      ("family", "family")):
        val = getattr(args, attr, None)
        if val is not None:
            overrides[key] = val
    if args.config is not None:
        return load_config(args.config, overrides)
    return parse_config(overrides, "<flags>")


def _write_report(report, cfg: ExperimentConfig, timings: bool) -> None:
    out = cfg.out
    text = report.to_csv(timings) if out is not None and out.endswith(".csv") else report.to_json(timings)
    _emit(text, out)


def _cmd_model_info(args) -> int:
    model = load_model(args.model)
    try:
        mu = mean(model)
    except InfiniteMean:
        mu = None
    info = {
        "model": model.to_dict(),
        "mean": mu,
        "tail_index": tail_index(model),
        "gaussian": model.is_gaussian,
        "compound_poisson": model.is_compound_poisson,
        "spectrally_positive": model.is_spectrally_positive,
        "spectrally_negative": model.is_spectrally_negative,
    }
    _emit(harness._dump_json(info), args.out)
    return 0


def _cmd_solve_delta(args) -> int:
    model = load_model(args.model)
    if args.mode == "contraction":
        if args.rho is None:
            raise ConfigError("--rho is required for --mode contraction")
        sol = solve_contraction(model, args.rho, args.tol)
    else:
        if args.a is None:
            raise ConfigError("--a is required for --mode defna")
        sol = solve_defna(model.centered(), args.a, args.tol)
    out = sol.to_dict()
    if sol.n is not None:
        out["n"] = sol.n
    _emit(harness._dump_json(out), args.out)
    return 0


def _cmd_ml_cdf(args) -> int:
    print(f"{ml_cdf(args.alpha, args.x):.17g}")
    return 0


def _ladder_values(model, a, rng, size):
    return exact_supremum(model, a, rng, size).value


def _walk_values(inc, kappa, eps, rng, size):
    return rw_supremum_sample(inc, rng, eps, size, kappa=kappa).value


def _grid_values(model, a, horizon, step, rng, size):
    return levy_sup_grid(model, a, horizon, step, rng, size).value


def _cmd_sample_sup(args) -> int:
    if args.seed is None:
        raise ConfigError("--seed is required")
    if args.seed < 0:
        raise ConfigError("--seed must be nonnegative")
    model = load_model(args.model) if args.model else None
    if model is None:
        raise ConfigError("--model is required")
    workers = args.workers or 1
    if args.method == "ladder":
        method, horizon, err = ("ladder", None, 0.0)
        sampler = partial(_ladder_values, model, args.a)
    elif args.method == "rw":
        inc = model.with_drain(args.a)
        kappa = stopping_level(inc, args.eps, stream(args.seed, 1 << 20))
        method, horizon, err = ("rw_truncated", None, args.eps)
        sampler = partial(_walk_values, inc, kappa, args.eps)
    else:
        horizon = args.horizon if args.horizon is not None else default_horizon(model, args.a)
        horizon = math.ceil(horizon / args.step) * args.step
        method, err = ("grid", 0.0)
        sampler = partial(_grid_values, model, args.a, horizon, args.step)
    values = sample_chunks(sampler, args.n, args.seed, (0,), workers)
    sample = SupSample(values, method, horizon, err)
    if args.out is None:
        sys.stdout.write(format_samples_csv(sample))
    else:
        write_samples_csv(args.out, sample)
    return 0


def _cmd_sweep(args) -> int:
    cfg = _experiment_config(args)
    params = cfg.rho_list if cfg.rho_list is not None else cfg.a_list
    if params is None:
        raise ConfigError("sweep needs rho_list or a_list")
    family = HeavyTrafficFamily(cfg.levy_model())
    if cfg.rho_list is not None and family.parameterization != "rho":
        raise ConfigError("rho_list needs a model with positive mean; use a_list for centred models")
    report = harness.sweep_heavy_traffic(
        family, params, cfg.n_samples, cfg.seed, workers=cfg.workers, tol=cfg.tol,
        c_horizon=cfg.c_horizon, step=cfg.step, n_reference=cfg.n_reference, log=_log,
    )
    _write_report(report, cfg, args.timings)
    return 0


def _cmd_equivalence(args) -> int:
    cfg = _experiment_config(args)
    model = cfg.levy_model()
    if cfg.a_list is not None:
        a_list = cfg.a_list
    elif cfg.rho_list is not None:
        a_list = [mean(model) / r for r in cfg.rho_list]
    else:
        raise ConfigError("equivalence needs a_list or rho_list")
    report = harness.rw_levy_equivalence(
        model, a_list, cfg.n_samples, cfg.seed, eps=cfg.eps, workers=cfg.workers, tol=cfg.tol,
        dominance_paths=cfg.dominance_paths, log=_log,
    )
    _write_report(report, cfg, args.timings)
    return 0


def _cmd_pruitt(args) -> int:
    cfg = _experiment_config(args)
    if cfg.t_grid is None or cfg.x_grid is None:
        raise ConfigError("pruitt needs t_grid and x_grid")
    table = harness.pruitt_check(cfg.levy_model().centered(), cfg.t_grid, cfg.x_grid, cfg.n_samples,
                                 cfg.seed, workers=cfg.workers)
    _log(f"max unflagged ratio {table.max_ratio:.4g}")
    _write_report(table, cfg, args.timings)
    return 0


def _cmd_htip(args) -> int:
    cfg = _experiment_config(args)
    if cfg.a_list is None:
        raise ConfigError("htip needs a_list")
    family = cfg.family or ("gaussian" if cfg.model is None else "truncated")
    if family == "gaussian":
        fns = harness.gaussian_htip_family(cfg.sigma2)
    else:
        fns = harness.truncated_variance_htip_family(cfg.levy_model().centered(), cfg.tol)
    table = harness.htip_condition_check(*fns, cfg.a_list)
    table.metadata = {"kind": "htip", "family": family, "seed": cfg.seed}
    if cfg.model is not None:
        table.metadata["model"] = cfg.model
    _write_report(table, cfg, args.timings)
    return 0


_COMMANDS = {
    "model-info": _cmd_model_info,
    "solve-delta": _cmd_solve_delta,
    "ml-cdf": _cmd_ml_cdf,
    "sample-sup": _cmd_sample_sup,
    "sweep": _cmd_sweep,
    "equivalence": _cmd_equivalence,
    "pruitt": _cmd_pruitt,
    "htip": _cmd_htip,
}


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        _log(f"config error: {exc}")
        return 2
    except HeavyTrafficError as exc:
        _log(f"error: {type(exc).__name__}: {exc}")
        return 1


def main() -> None:
    sys.exit(run())
