"""Command line interface: ``cellts {simulate,contaminate,filter,fit,bench}``.

Exit status: 0 on success, 1 for configuration or input errors, 2 when a
bench run had per-seed failures.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import yaml

from . import serialize
from .arma import ArmaModel, ModelError, simulate
from .bench import ConfigError, ExperimentConfig, default_config, load_config, render_tables, run_experiment
from .contamination import (
    BernoulliContamSpec,
    draw_bernoulli_specs,
    inject,
    periodic_contaminate,
)
from .estimators import EstimationError, ars, artsgs, hannan_rissanen, nofilter_s, yule_walker
from .filters import apply_filter, flag_metrics

EXIT_OK, EXIT_CONFIG, EXIT_PARTIAL = 0, 1, 2


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()] if text else []


def _read_yaml(path) -> dict:
    if not path:
        return {}
    with open(path) as fh:
        return yaml.safe_load(fh) or {}


def _model(args, cfg: dict) -> ArmaModel:
    m = dict(cfg.get("model", {}))
    if args.phi is not None:
        m["phi"] = _floats(args.phi)
    if args.theta is not None:
        m["theta"] = _floats(args.theta)
    if args.sigma is not None:
        m["sigma"] = args.sigma
    if "phi" not in m:
        m["phi"] = [0.5, 0.2, 0.2]
    return ArmaModel.from_dict(m).validate()


def _emit(text: str, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_simulate(args) -> int:
    cfg = _read_yaml(args.config)
    model = _model(args, cfg)
    length = args.length or int(cfg.get("length", 1000))
    burn = args.burn_in if args.burn_in is not None else int(cfg.get("burn_in", 500))
    series = simulate(model, length, args.seed if args.seed is not None else 0, burn)
    serialize.write_series_csv(args.out or sys.stdout, series)
    return EXIT_OK


def cmd_contaminate(args) -> int:
    cfg = _read_yaml(args.config)
    model = _model(args, cfg)
    clean = serialize.read_series_csv(args.input)
    if args.ledger:
        specs = serialize.ledger_from_json(Path(args.ledger).read_text())
        cs = inject(model, clean, specs)
    elif args.bernoulli:
        pa, pi, sd = _floats(args.bernoulli)
        specs = draw_bernoulli_specs(len(clean), BernoulliContamSpec(pa, pi, sd), [args.seed or 0, 1])
        cs = inject(model, clean, specs)
    else:
        cs = periodic_contaminate(clean, args.period, args.value, args.start)
    serialize.write_contaminated_csv(args.out or sys.stdout, cs)
    if args.ledger_out:
        Path(args.ledger_out).write_text(serialize.ledger_to_json(cs.ledger) + "\n")
    return EXIT_OK


def cmd_filter(args) -> int:
    series = serialize.read_series_csv(args.input)
    flags = apply_filter(series, args.filter, args.alpha)
    serialize.write_flags_csv(args.out or sys.stdout, flags)
    if args.truth:
        _, _, truth = serialize.read_contaminated_csv(args.truth)
        print(flag_metrics(flags, truth).render(flags.label), file=sys.stderr)
    return EXIT_OK


def cmd_fit(args) -> int:
    series = serialize.read_series_csv(args.input)
    if args.method == "yw":
        obj = yule_walker(series, args.p).to_dict()
    elif args.method == "hr":
        obj = hannan_rissanen(series, args.p, args.q, args.m).to_dict()
    elif args.method == "artsgs":
        obj = artsgs(series, args.p, args.filter, args.alpha).to_dict()
    elif args.method == "ars":
        obj = ars(series, args.p, args.filter, args.alpha).to_dict()
    else:
        obj = nofilter_s(series, args.p).to_dict()
    _emit(json.dumps(obj, indent=2, sort_keys=True) + "\n", args.out)
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.config:
        config = load_config(args.config)
    else:
        config = default_config(args.seeds or 30)
    if args.seed is not None or args.seeds:
        d = config.to_dict()
        start = args.seed if args.seed is not None else min(config.seeds)
        d["seeds"] = list(range(start, start + (args.seeds or len(config.seeds))))
        config = ExperimentConfig.from_dict(d | {"output": config.output})
    report = run_experiment(config, workers=args.workers)
    outputs = dict(config.output)
    if args.out:
        base = Path(args.out)
        base.mkdir(parents=True, exist_ok=True)
        outputs = {fmt: str(base / f"report.{fmt if fmt != 'text' else 'txt'}") for fmt in ("json", "csv", "text")}
    for fmt, path in outputs.items():
        Path(path).write_text(render_tables(report, fmt, args.timing))
    sys.stdout.write(render_tables(report, args.format, args.timing))
    if report.failures:
        print(f"{len(report.failures)} run(s) failed", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="random seed")
    common.add_argument("--config", help="YAML config; flags override its fields")
    common.add_argument("--out", help="output path (directory for bench)")

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--phi", help="comma-separated AR coefficients")
    model.add_argument("--theta", help="comma-separated MA coefficients")
    model.add_argument("--sigma", type=float)

    parser = argparse.ArgumentParser(prog="cellts", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common, model], help="simulate a clean ARMA series")
    p.add_argument("--length", type=int)
    p.add_argument("--burn-in", type=int)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("contaminate", parents=[common, model], help="inject outliers into a series")
    p.add_argument("--input", required=True, help="CSV with a `value` column")
    p.add_argument("--period", type=int, default=7)
    p.add_argument("--value", type=float, default=4.0)
    p.add_argument("--start", type=int, default=1)
    p.add_argument("--bernoulli", help="p_A,p_I,magnitude_sd")
    p.add_argument("--ledger", help="JSON list of {kind, time, magnitude}")
    p.add_argument("--ledger-out", help="write the outlier ledger as JSON")
    p.set_defaults(func=cmd_contaminate)

    p = sub.add_parser("filter", parents=[common], help="flag outlying cells")
    p.add_argument("--input", required=True)
    p.add_argument("--filter", default="UHS", choices=["UGY", "UHS"])
    p.add_argument("--alpha", type=float, default=0.88)
    p.add_argument("--truth", help="contaminated CSV; prints the confusion table")
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("fit", parents=[common], help="fit an AR/ARMA model")
    p.add_argument("--input", required=True)
    p.add_argument("--method", default="artsgs", choices=["yw", "hr", "artsgs", "ars", "nofilter-s"])
    p.add_argument("--p", type=int, default=3)
    p.add_argument("--q", type=int, default=0)
    p.add_argument("--m", type=int)
    p.add_argument("--filter", default="UHS", choices=["UGY", "UHS"])
    p.add_argument("--alpha", type=float, default=0.88)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("bench", parents=[common], help="run a Monte Carlo experiment")
    p.add_argument("--seeds", type=int, help="number of seeds (from --seed or 0)")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--format", default="text", choices=["text", "csv", "json"])
    p.add_argument("--timing", action="store_true",
                   help="include per-run wall-clock seconds (reports are then not byte-reproducible)")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        # reader went away (e.g. `| head`); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK
    except (ConfigError, ModelError, OSError, KeyError, ValueError, yaml.YAMLError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EstimationError as exc:
        print(f"estimation failed: {exc}", file=sys.stderr)
        return EXIT_PARTIAL


if __name__ == "__main__":
    sys.exit(main())
