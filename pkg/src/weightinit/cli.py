"""Command-line entry point: ``weightinit {init,propagate,simulate,pdf}``.

Every command writes one table as CSV (header row first) or a JSON document
``{command, parameters, results, tool_version}``.  Exit status is 0 on
success, 2 for usage or validation errors and 3 for numeric failures.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

from . import __version__
from .activations import resolve
from .density import SPACINGS, curve, saturation_fraction
from .errors import NumericOverflowError, WeightInitError
from .propagation import ENGINES, NetworkConfig, initial_state, propagate, recommend_init
from .quadrature import DEFAULT_NODES
from .simulator import INPUT_KINDS, SimConfig, WeightDistribution, run

EXIT_USAGE = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    pass


def _fmt(value):
    # repr round-trips every double, so no precision is lost
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _jsonable(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def render(command, parameters, rows, fmt, metadata=None):
    if fmt == "json":
        doc = {
            "command": command,
            "parameters": parameters,
            "results": [{k: _jsonable(v) for k, v in row.items()} for row in rows],
            "tool_version": __version__,
        }
        if metadata is not None:
            doc["metadata"] = {k: _jsonable(v) for k, v in metadata.items()}
        return json.dumps(doc, indent=2) + "\n"

    buf = io.StringIO()
    fields = list(rows[0]) if rows else []
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for row in rows:
        writer.writerow([_fmt(row.get(f, "")) for f in fields])
    for key, value in (metadata or {}).items():
        buf.write(f"# {key}={_fmt(value)}\n")
    return buf.getvalue()


def _activation(name):
    try:
        return resolve(name)
    except (WeightInitError, OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"bad --activation {name!r}: {exc}") from exc


def _weight_variance(token, activation, width):
    """Number, or one of ``he`` (exact ReLU fixed point), ``xavier`` (1/N), ``recommended``."""
    if token == "he":
        return recommend_init(resolve("relu"), width).weight_variance
    if token == "xavier":
        return 1.0 / width
    if token == "recommended":
        return recommend_init(activation, width).weight_variance
    try:
        value = float(token)
    except ValueError:
        raise UsageError(f"--weight-variance must be a number, he, xavier or recommended; got {token!r}") from None
    if not value > 0:
        raise UsageError("--weight-variance must be positive")
    return value


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


# --------------------------------------------------------------------- commands


def cmd_init(args):
    act = _activation(args.activation)
    rec = recommend_init(act, args.width)
    row = {
        "activation": act.name,
        "width": args.width,
        "weight_stddev": rec.weight_stddev,
        "weight_variance": rec.weight_variance,
        "engine": rec.engine,
    }
    row.update({k: v for k, v in rec.derivation.items() if k != "width"})
    params = {"activation": args.activation, "width": args.width}
    return render("init", params, [row], args.format)


def cmd_propagate(args):
    act = _activation(args.activation)
    v_sq = _weight_variance(args.weight_variance, act, args.width)
    engine = None if args.engine == "auto" else args.engine
    config = NetworkConfig(args.width, args.depth, v_sq, act)
    states = propagate(initial_state(args.initial_mean, args.initial_variance), config, engine, args.nodes)
    rows = [
        {"layer": s.layer_index, "mean": s.mean, "variance": s.variance, "preact_variance": s.preact_variance}
        for s in states
    ]
    params = {
        "activation": args.activation,
        "width": args.width,
        "depth": args.depth,
        "weight_variance": v_sq,
        "engine": engine or ("relu_exact" if act.is_relu else "linearized"),
        "initial_mean": args.initial_mean,
        "initial_variance": args.initial_variance,
    }
    return render("propagate", params, rows, args.format)


def _sim_weights(args, act):
    if args.half_width is not None:
        if args.weights != "uniform":
            raise UsageError("--half-width only applies to --weights uniform")
        if args.weight_variance is not None:
            raise UsageError("give either --half-width or --weight-variance, not both")
        if args.half_width == "xavier":
            half = 1.0 / math.sqrt(args.width)
        else:
            try:
                half = float(args.half_width)
            except ValueError:
                raise UsageError(f"--half-width must be a number or xavier, got {args.half_width!r}") from None
            if not half > 0:
                raise UsageError("--half-width must be positive")
        return WeightDistribution.uniform(half)
    v_sq = _weight_variance(args.weight_variance or "recommended", act, args.width)
    return WeightDistribution.with_variance(args.weights, v_sq)


def cmd_simulate(args):
    act = _activation(args.activation)
    weights = _sim_weights(args, act)
    if args.engine == "auto":
        engine = "relu_exact" if act.is_relu else "quadrature"
    else:
        engine = args.engine
    config = SimConfig(args.width, args.depth, weights, act, args.trials, args.seed, args.inputs)
    # validate the prediction engine before spending time on the simulation
    theory_cfg = NetworkConfig(args.width, args.depth, weights.variance(), act)
    propagate(initial_state(), NetworkConfig(args.width, 1, weights.variance(), act), engine)

    report = run(config, workers=args.workers)
    try:
        predicted = propagate(initial_state(), theory_cfg, engine, args.nodes)
    except NumericOverflowError as exc:
        predicted = propagate(initial_state(), NetworkConfig(args.width, exc.layer - 1, weights.variance(), act), engine)

    rows = []
    for stats in report.per_layer:
        row = {
            "layer": stats.layer_index,
            "act_mean": stats.act_mean,
            "act_variance": stats.act_variance,
            "preact_mean": stats.preact_mean,
            "preact_variance": stats.preact_variance,
            "preact_skewness": stats.preact_skewness,
            "preact_excess_kurtosis": stats.preact_excess_kurtosis,
            "samples": stats.samples,
            "valid": stats.valid,
            "overflow": stats.overflow,
        }
        if stats.layer_index <= len(predicted):
            pred = predicted[stats.layer_index - 1]
            row["pred_mean"] = pred.mean
            row["pred_variance"] = pred.variance
            row["rel_error"] = (
                abs(stats.act_variance - pred.variance) / pred.variance if pred.variance > 0 else math.nan
            )
        else:
            row.update(pred_mean=math.nan, pred_variance=math.nan, rel_error=math.nan)
        rows.append(row)
    params = {
        "activation": args.activation,
        "width": args.width,
        "depth": args.depth,
        "weights": weights.kind,
        "weight_parameter": weights.parameter,
        "weight_variance": weights.variance(),
        "trials": args.trials,
        "seed": args.seed,
        "inputs": args.inputs,
        "engine": engine,
    }
    out = render("simulate", params, rows, args.format)
    if report.overflow_layer is not None:
        return out, NumericOverflowError(
            f"activations became non-finite at layer {report.overflow_layer}", report.overflow_layer
        )
    return out


def cmd_pdf(args):
    if not args.u > 0:
        raise UsageError("--u must be positive")
    if not 0 < args.threshold < 1:
        raise UsageError("--threshold must lie in (0, 1)")
    dc = curve(args.u, args.grid, args.spacing)
    rows = [{"y": y, "density": d} for y, d in dc.points]
    meta = {
        "u": args.u,
        "threshold": args.threshold,
        "saturation_fraction": saturation_fraction(args.u, args.threshold),
        "integral": dc.integral(),
        "modes": dc.modality(),
    }
    params = {"u": args.u, "grid": args.grid, "threshold": args.threshold, "spacing": args.spacing}
    return render("pdf", params, rows, args.format, metadata=meta)


# ----------------------------------------------------------------------- parser


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default=argparse.SUPPRESS)
    common.add_argument("--output", metavar="PATH", default=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(
        prog="weightinit", parents=[common], description="Weight initialization and signal propagation tools."
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init", parents=[common], help="recommended weight variance")
    p.add_argument("--activation", required=True, help="identity, tanh, sigmoid, relu, or a custom .json file")
    p.add_argument("--width", type=_positive_int, required=True)
    p.set_defaults(func=cmd_init)

    p = sub.add_parser("propagate", parents=[common], help="layer-by-layer moment recursion")
    p.add_argument("--activation", required=True)
    p.add_argument("--width", type=_positive_int, required=True)
    p.add_argument("--depth", type=_positive_int, required=True)
    p.add_argument("--weight-variance", default="recommended", help="number, he, xavier or recommended")
    p.add_argument("--engine", choices=("auto",) + ENGINES, default="auto")
    p.add_argument("--nodes", type=_positive_int, default=DEFAULT_NODES)
    p.add_argument("--initial-mean", type=float, default=0.0)
    p.add_argument("--initial-variance", type=float, default=1.0)
    p.set_defaults(func=cmd_propagate)

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo forward passes")
    p.add_argument("--activation", required=True)
    p.add_argument("--width", type=_positive_int, required=True)
    p.add_argument("--depth", type=_positive_int, required=True)
    p.add_argument("--weights", choices=("gaussian", "uniform"), default="gaussian")
    p.add_argument("--weight-variance", default=None, help="number, he, xavier or recommended (default)")
    p.add_argument("--half-width", default=None, help="uniform half-width: number or xavier (1/sqrt(N))")
    p.add_argument("--trials", type=_positive_int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--inputs", choices=INPUT_KINDS, default="normal")
    p.add_argument("--engine", choices=("auto",) + ENGINES, default="auto", help="engine for the prediction columns")
    p.add_argument("--nodes", type=_positive_int, default=DEFAULT_NODES)
    p.add_argument("--workers", type=_positive_int, default=1)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("pdf", parents=[common], help="density of tanh of a Gaussian")
    p.add_argument("--u", type=float, required=True, help="pre-activation standard deviation")
    p.add_argument("--grid", type=int, default=1001)
    p.add_argument("--threshold", type=float, default=0.9)
    p.add_argument("--spacing", choices=SPACINGS, default="tanh")
    p.set_defaults(func=cmd_pdf)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    args.format = getattr(args, "format", "csv")
    args.output = getattr(args, "output", None)

    failure = None
    try:
        result = args.func(args)
    except UsageError as exc:
        print(f"weightinit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericOverflowError as exc:
        print(f"weightinit: numeric failure at layer {exc.layer}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except WeightInitError as exc:
        print(f"weightinit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if isinstance(result, tuple):
        result, failure = result

    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(result)
    else:
        sys.stdout.write(result)
    if failure is not None:
        print(f"weightinit: numeric failure at layer {failure.layer}: {failure}", file=sys.stderr)
        return EXIT_NUMERIC
    return 0


if __name__ == "__main__":
    sys.exit(main())
