"""Command-line entry point ``fraccal``."""

from __future__ import annotations

import argparse
import logging
import sys
import time

from .config import (
    SCHEME_NAMES,
    ConfigError,
    Experiment,
    ExperimentConfig,
    load_config,
    load_preset,
    preset_names,
)
from .experiments import run_experiment
from .output import write_outputs

log = logging.getLogger("fraccal")

DEFAULT_SCHEMES = {
    Experiment.SCALAR_POWER: ("DE1", "DE2", "DE3", "sinc", "balakrishnan"),
    Experiment.SCALAR_ML: ("DE1", "DE2", "DE3", "sinc"),
    Experiment.LAMBDA_SWEEP: ("DE1", "DE3", "sinc"),
    Experiment.ELLIPTIC_2D: ("DE1", "DE2", "DE3", "sinc", "balakrishnan"),
    Experiment.PARABOLIC_2D: ("DE1", "DE2", "DE3", "sinc"),
    Experiment.POLE_MAP: ("DE1", "DE2", "DE3"),
}

DEFAULT_NQ = {
    Experiment.PARABOLIC_2D: tuple(range(20, 121, 5)),
    Experiment.ELLIPTIC_2D: tuple(range(10, 121, 2)),
}


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="fraccal",
        description="Quadrature for functions of elliptic operators: reproduction experiments.",
    )
    choices = ["run", "list"] + [e.value for e in Experiment]
    p.add_argument("experiment", help=f"one of: {', '.join(choices)} (case-insensitive); "
                   "'run' takes the experiment from the preset or config, 'list' prints the presets")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--preset", metavar="NAME")
    src.add_argument("--config", metavar="PATH")
    p.add_argument("--schemes", help=f"comma-separated subset of {','.join(SCHEME_NAMES)}")
    p.add_argument("--nq-max", type=int, help="truncate the N_q range at this value")
    for name in ("beta", "alpha", "theta", "kappa", "t", "omega"):
        p.add_argument(f"--{name}", type=float)
    p.add_argument("--sigma", type=float, choices=(0.5, 1.0))
    p.add_argument("--output", metavar="PATH", help="CSV path (figure and metadata are written next to it)")
    p.add_argument("--emit-plot", action="store_true", help="also write a standalone plot script")
    p.add_argument("--no-figure", action="store_true", help="skip rendering the PNG figure")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    name = args.experiment
    requested = None if name.lower() == "run" else Experiment.parse(name)
    if args.preset:
        cfg = load_preset(args.preset)
    elif args.config:
        cfg = load_config(args.config)
    elif requested is None:
        raise ConfigError("'run' needs --preset or --config")
    else:
        cfg = ExperimentConfig(
            experiment=requested,
            schemes=DEFAULT_SCHEMES[requested],
            n_q=DEFAULT_NQ.get(requested, tuple(range(2, 121))),
            name=requested.value.lower(),
            output=f"results/{requested.value.lower()}.csv",
        )
    if requested is not None and cfg.experiment is not requested:
        raise ConfigError(f"preset/config describes {cfg.experiment.value}, not {requested.value}")

    over = {k: getattr(args, k) for k in ("beta", "alpha", "theta", "kappa", "t", "omega", "sigma")}
    if args.schemes is not None:
        over["schemes"] = tuple(s.strip() for s in args.schemes.split(",") if s.strip())
    if args.nq_max is not None:
        over["n_q"] = tuple(n for n in cfg.n_q if n <= args.nq_max) or (args.nq_max,)
    if args.output:
        over["output"] = args.output
    return cfg.with_overrides(**over)


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.experiment.lower() == "list":
        for n in preset_names():
            cfg = load_preset(n)
            print(f"{n:28s} {cfg.experiment.value}")
        return 0
    try:
        cfg = build_config(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"fraccal: error: {exc}", file=sys.stderr)
        return 2
    t0 = time.perf_counter()
    try:
        result = run_experiment(cfg)
        paths = write_outputs(result, cfg.output, figure=not args.no_figure, emit_plot=args.emit_plot)
    except Exception as exc:  # noqa: BLE001 - any failure means the run did not complete
        print(f"fraccal: run failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    n_div = sum(r.value is None for r in result.rows)
    log.info("%s: %d rows (%d diverged) in %.1f s", cfg.name, len(result.rows), n_div, time.perf_counter() - t0)
    for kind, path in paths.items():
        print(f"{kind}: {path}")
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
