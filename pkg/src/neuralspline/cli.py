"""``neuralspline`` command-line entry point.

Exit codes: 0 on success, 1 for bad input, 2 for numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .activations import check_admissibility, parse_activation, sample_grid
from .data import generate, load_dataset, save_dataset, write_xy_csv
from .errors import InputError, NumericalError
from .experiment import DEFAULT_CONFIG, StepFailed, format_report, run_experiment, sample_sites
from .model import save_params
from .oracle import oracle_seminorm, solve_data
from .regularizers import RegKind, path_norm, seminorm_of_network
from .splines import connect_the_dots, natural_cubic, save_spline, spline_seminorm
from .training import TrainConfig, train

EXIT_OK, EXIT_INPUT, EXIT_NUMERICAL = 0, 1, 2

NAMED_FUNCTIONS = {
    "tanh": np.tanh,
    "sigmoid": lambda x: 1.0 / (1.0 + np.exp(-x)),
    "square": lambda x: x * x,
    "softplus": lambda x: np.logaddexp(0.0, x),
    "elu": lambda x: np.where(x >= 0, x, np.expm1(np.minimum(x, 0.0))),
}


def _echo(args: argparse.Namespace, out) -> None:
    skip = {"func", "command"}
    for key, value in sorted(vars(args).items()):
        if key not in skip and value is not None:
            out.write(f"# {key} = {value}\n")


def _cmd_gen(args, out):
    data = generate(args.n, args.seed, args.noise)
    if args.out:
        save_dataset(data, args.out)
    else:
        out.write("x,y\n")
        for a, b in zip(data.x, data.y):
            out.write(f"{float(a)!r},{float(b)!r}\n")


def _cmd_train(args, out):
    data = load_dataset(args.data)
    cfg = TrainConfig(
        activation=parse_activation(args.activation), width=args.width, lam=args.lam,
        reg=RegKind.parse(args.reg), learning_rate=args.lr, epochs=args.epochs,
        seed=args.seed, init_scale=args.init_scale)
    params, hist = train(cfg, data, log_every=args.log_every)
    if args.params_out:
        save_params(params, args.params_out)
    if args.curve_out:
        xs = sample_sites(data)
        write_xy_csv(args.curve_out, xs, params(xs), header=("x", "f"))
    err = float(np.max(np.abs(params(data.x) - data.y)))
    _echo(args, out)
    out.write(f"objective {hist.objective[-1]:.10g}\n")
    out.write(f"max_err {err:.6g}\n")
    out.write(f"path_norm {path_norm(params):.10g}\n")
    out.write(f"seminorm {seminorm_of_network(params, scale=data.x_range):.10g}\n")


def _cmd_spline(args, out):
    data = load_dataset(args.data)
    spline = connect_the_dots(data) if args.kind == "linear" else natural_cubic(data)
    if args.out:
        save_spline(spline, args.out)
    _echo(args, out)
    out.write(f"knots {len(spline)}\n")
    out.write(f"seminorm {spline_seminorm(spline):.10g}\n")


def _cmd_oracle(args, out):
    data = load_dataset(args.data)
    problem, sol = solve_data(data, args.gamma, args.lam, args.grid_size,
                              max_iters=args.max_iters, kkt_tol=args.kkt_tol)
    if args.out:
        save_spline(sol.to_spline(problem), args.out)
    _echo(args, out)
    out.write(f"grid_points {problem.grid.size}\n")
    out.write(f"objective {sol.objective:.10g}\n")
    out.write(f"seminorm {oracle_seminorm(sol):.10g}\n")
    out.write(f"kkt {sol.kkt:.3g}\n")
    out.write(f"iterations {sol.iterations}\n")
    out.write(f"converged {'yes' if sol.converged else 'no'}\n")
    if args.strict and not sol.converged:
        raise NumericalError(f"no KKT certificate within {args.max_iters} iterations")


def _cmd_admissibility(args, out):
    if args.samples:
        data = load_dataset(args.samples)
        x, values = data.x, data.y
    else:
        x = sample_grid()
        if args.function:
            values = NAMED_FUNCTIONS[args.function](x)
        else:
            values = np.asarray(parse_activation(args.activation)(x))
    rep = check_admissibility(x, values, args.tol)
    _echo(args, out)
    if rep.admissible:
        act = rep.fitted
        out.write(f"admissible alpha={act.alpha:.10g} beta={act.beta:.10g} gamma={act.gamma:.10g}\n")
        out.write(f"max_residual {rep.max_residual:.3g}\n")
    else:
        out.write(f"rejected: {rep.rejection_reason}\n")


def _cmd_experiment(args, out):
    if args.write_default:
        Path(args.write_default).write_text(DEFAULT_CONFIG)
        out.write(f"wrote {args.write_default}\n")
        return
    if not args.config:
        raise InputError("experiment needs a config file (or --write-default PATH)")
    report = run_experiment(args.config, args.out,
                            progress=lambda name: sys.stderr.write(f"running {name}\n"))
    timing = report.config["experiment"].get("timing", True)
    out.write(format_report(report, timing=timing))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="neuralspline",
                                description="Shallow power-activation networks and their spline counterparts.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a seeded synthetic dataset")
    g.add_argument("--n", type=int, default=8, help="number of points (default 8)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--noise", type=float, default=0.1, help="Gaussian noise level")
    g.add_argument("--out", help="CSV path (default: stdout)")
    g.set_defaults(func=_cmd_gen)

    t = sub.add_parser("train", help="train a network on a CSV dataset")
    base = TrainConfig()
    t.add_argument("data")
    t.add_argument("--activation", default="relu", help="alias or alpha,beta,gamma")
    t.add_argument("--width", type=int, default=base.width)
    t.add_argument("--lam", type=float, default=base.lam)
    t.add_argument("--reg", default="weight_decay", choices=[k.value for k in RegKind])
    t.add_argument("--lr", type=float, default=base.learning_rate)
    t.add_argument("--epochs", type=int, default=base.epochs)
    t.add_argument("--seed", type=int, default=base.seed)
    t.add_argument("--init-scale", type=float, default=base.init_scale)
    t.add_argument("--log-every", type=int, help="print loss CSV lines to stderr every P epochs")
    t.add_argument("--params-out", help="save trained parameters here")
    t.add_argument("--curve-out", help="save sampled x,f curve here")
    t.set_defaults(func=_cmd_train)

    s = sub.add_parser("spline", help="interpolating spline through a dataset")
    s.add_argument("data")
    s.add_argument("--kind", choices=["linear", "cubic"], default="linear")
    s.add_argument("--out", help="save the canonical spline here")
    s.set_defaults(func=_cmd_spline)

    o = sub.add_parser("oracle", help="grid-restricted convex reference solution")
    o.add_argument("data")
    o.add_argument("--gamma", type=float, default=2.0)
    o.add_argument("--lam", type=float, default=1e-5)
    o.add_argument("--grid-size", type=int, help="grid points (default 20 N)")
    o.add_argument("--max-iters", type=int, default=200_000)
    o.add_argument("--kkt-tol", type=float, default=1e-8)
    o.add_argument("--strict", action="store_true", help="exit 2 without a KKT certificate")
    o.add_argument("--out", help="save the canonical spline here")
    o.set_defaults(func=_cmd_oracle)

    a = sub.add_parser("admissibility", help="test whether an activation is a power Green's function")
    src = a.add_mutually_exclusive_group(required=True)
    src.add_argument("--activation", help="alias or alpha,beta,gamma")
    src.add_argument("--function", choices=sorted(NAMED_FUNCTIONS))
    src.add_argument("--samples", help="CSV with header x,y of sampled activation values")
    a.add_argument("--tol", type=float, default=1e-6)
    a.set_defaults(func=_cmd_admissibility)

    e = sub.add_parser("experiment", help="run every method in a config file")
    e.add_argument("config", nargs="?")
    e.add_argument("--out", default="results", help="output directory (default ./results)")
    e.add_argument("--write-default", metavar="PATH", help="write the default config and exit")
    e.set_defaults(func=_cmd_experiment)
    return p


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        args.func(args, out)
    except StepFailed as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_NUMERICAL if isinstance(exc.cause, (NumericalError, FloatingPointError)) else EXIT_INPUT
    except (NumericalError, FloatingPointError) as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERICAL
    except (ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
