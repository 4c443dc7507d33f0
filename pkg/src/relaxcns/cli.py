"""Command line entry point: ``relaxcns <subcommand> --config FILE``."""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from . import harness
from .harness import ConfigError, ExperimentConfig, Summary

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERIC = 0, 2, 3

SUBCOMMANDS = {
    "profile": "profile_only",
    "simulate": None,
    "stability": "stability",
    "relax-sweep": "relax_sweep",
    "entropy-check": "entropy_check",
}


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="relaxcns", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="flat TOML config; built-in defaults when omitted")
        s.add_argument("--out", help="output directory (overrides output_dir)")
        s.add_argument("--format", default="csv,json", help="comma list from csv,json,svg")
        s.add_argument("--jobs", type=int, default=1, help="concurrent sweep jobs")
    return p


def _simulate(cfg: ExperimentConfig) -> Summary:
    setup = harness.prepare(cfg)
    traj = harness.simulate(cfg, setup)
    es = setup.waves.end_states
    sc = {
        "steps": traj.result.steps,
        "X_T": traj.result.X,
        "sup_error_T": float(traj.diagnostics.column("supE")[-1]),
    }
    return Summary(
        "simulate",
        cfg,
        sc,
        {"diagnostics": traj.diagnostics, "shift": traj.shift},
        [],
        {"state_final": (traj.result.final, es.sigma, setup.model)},
    )


def _report(kind: str, exc: BaseException):
    doc = {"error": kind, "type": type(exc).__name__, "cause": str(exc)}
    for attr in ("step", "t"):
        if getattr(exc, attr, None) is not None:
            doc[attr] = getattr(exc, attr)
    print(json.dumps(doc, sort_keys=True), file=sys.stderr)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        formats = [f.strip() for f in args.format.split(",") if f.strip()]
        if not formats or set(formats) - set(harness.FORMATS):
            raise ConfigError(f"--format must be a comma list from {harness.FORMATS}")
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        cfg = harness.load_config(args.config) if args.config else ExperimentConfig()
        want = SUBCOMMANDS[args.command]
        if want is not None and cfg.experiment != want:
            if args.config:
                raise ConfigError(f"config experiment {cfg.experiment!r} does not match '{args.command}'")
            cfg = replace(cfg, experiment=want)
        if want == "relax_sweep" and not cfg.tau_list:
            cfg = replace(cfg, tau_list=(1e-2, 1e-3, 1e-4))
        harness.validate_config(cfg)
        out = args.out or cfg.output_dir
    except ConfigError as exc:
        _report("validation", exc)
        return EXIT_VALIDATION
    try:
        summary = _simulate(cfg) if want is None else harness.run_experiment(cfg, args.jobs)
    except (ArithmeticError, RuntimeError, ValueError) as exc:
        _report("numeric", exc)
        return EXIT_NUMERIC
    try:
        paths = harness.emit_outputs(summary, out, formats)
    except OSError as exc:
        _report("io", exc)
        return EXIT_NUMERIC
    for p in paths:
        print(p)
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
