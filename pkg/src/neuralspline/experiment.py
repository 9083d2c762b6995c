"""Experiment orchestration: fit several methods to one dataset and tabulate seminorms.

Configs are INI-style ``key = value`` files. The ``[experiment]`` section
names the dataset (a CSV path, or ``n``/``seed``/``noise`` for the built-in
generator) and output options; every other section is one method, selected
by its ``method`` key (``network``, ``linear_spline``, ``natural_cubic`` or
``oracle``). Unknown keys are errors.
"""

from __future__ import annotations

import configparser
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .activations import parse_activation
from .data import Dataset, generate, load_dataset, write_xy_csv
from .errors import InputError
from .model import save_params
from .oracle import make_grid, oracle_seminorm, solve, GridProblem
from .regularizers import RegKind, path_norm, seminorm_of_network
from .splines import connect_the_dots, natural_cubic, save_spline, spline_seminorm
from .training import TrainConfig, train

EXPERIMENT_KEYS = {
    "dataset": str, "n": int, "seed": int, "noise": float,
    "samples": int, "svg": bool, "timing": bool,
}
METHOD_KEYS = {
    "network": {
        "activation": str, "width": int, "lambda": float, "reg": str,
        "learning_rate": float, "epochs": int, "seed": int, "init_scale": float,
        "epsilon": float,
    },
    "linear_spline": {},
    "natural_cubic": {},
    "oracle": {"gamma": float, "lambda": float, "grid_size": int, "max_iters": int,
               "tol": float},
}
EXPERIMENT_DEFAULTS = {"n": 8, "seed": 0, "noise": 0.1, "samples": 1000, "svg": True,
                       "timing": True}

DEFAULT_CONFIG = """\
[experiment]
n = 8
seed = 0
noise = 0.1
samples = 1000
svg = true

[relu-reg]
method = network
activation = relu
lambda = 1e-5

[relu-unreg]
method = network
activation = relu
lambda = 0

[cubic-reg]
method = network
activation = 0,1,4
lambda = 1e-5

[cubic-unreg]
method = network
activation = 0,1,4
lambda = 0

[linear-spline]
method = linear_spline

[cubic-spline]
method = natural_cubic

[oracle-linear]
method = oracle
gamma = 2
lambda = 1e-5

[oracle-cubic]
method = oracle
gamma = 4
lambda = 1.6666666666666667e-06
"""


class StepFailed(Exception):
    def __init__(self, step: str, cause: BaseException):
        super().__init__(f"step {step!r} failed: {cause}")
        self.step = step
        self.cause = cause


@dataclass
class MethodRecord:
    method: str
    kind: str
    gamma: float
    max_err: float
    seminorm: float
    path_norm: float = float("nan")
    oracle_seminorm: float = float("nan")
    time_s: float = float("nan")
    curve: Optional[np.ndarray] = field(default=None, repr=False)


@dataclass
class ExperimentReport:
    records: list
    fingerprint: str
    config: dict
    sample_x: np.ndarray = field(repr=False, default=None)

    def record(self, name: str) -> MethodRecord:
        for rec in self.records:
            if rec.method == name:
                return rec
        raise KeyError(name)


def _convert(section: str, key: str, raw: str, kind):
    try:
        if kind is bool:
            low = raw.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        return kind(raw.strip())
    except ValueError:
        raise InputError(f"[{section}] {key}: cannot parse {raw!r} as {kind.__name__}") from None


def parse_config(text: str) -> tuple[dict, dict]:
    """Return ``(experiment_options, {method_name: options})`` in file order."""
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise InputError(f"malformed config: {exc}") from None
    if "experiment" not in cp:
        raise InputError("config needs an [experiment] section")
    exp = dict(EXPERIMENT_DEFAULTS)
    for key, raw in cp["experiment"].items():
        if key not in EXPERIMENT_KEYS:
            raise InputError(f"[experiment] unknown key {key!r}")
        exp[key] = _convert("experiment", key, raw, EXPERIMENT_KEYS[key])
    methods = {}
    for name in cp.sections():
        if name == "experiment":
            continue
        sec = cp[name]
        kind = sec.get("method")
        if kind not in METHOD_KEYS:
            raise InputError(f"[{name}] method must be one of {', '.join(METHOD_KEYS)}")
        opts = {"method": kind}
        for key, raw in sec.items():
            if key == "method":
                continue
            if key not in METHOD_KEYS[kind]:
                raise InputError(f"[{name}] unknown key {key!r} for method {kind}")
            opts[key] = _convert(name, key, raw, METHOD_KEYS[kind][key])
        methods[name] = opts
    if not methods:
        raise InputError("config defines no methods")
    return exp, methods


def _train_config(opts: dict) -> TrainConfig:
    base = TrainConfig()
    return TrainConfig(
        activation=parse_activation(opts.get("activation", "relu")),
        width=opts.get("width", base.width),
        lam=opts.get("lambda", base.lam),
        reg=RegKind.parse(opts.get("reg", base.reg)),
        learning_rate=opts.get("learning_rate", base.learning_rate),
        epochs=opts.get("epochs", base.epochs),
        seed=opts.get("seed", base.seed),
        init_scale=opts.get("init_scale", base.init_scale),
        epsilon=opts.get("epsilon", base.epsilon),
    )


def sample_sites(data: Dataset, count: int = 1000) -> np.ndarray:
    """Uniform sites over the data range widened by 10% on each side."""
    pad = 0.1 * data.x_range
    return np.linspace(data.x[0] - pad, data.x[-1] + pad, count)


def _fit(name: str, opts: dict, data: Dataset, out_dir: Optional[Path]):
    """Fit one method; returns (record, evaluator)."""
    kind = opts["method"]
    scale = data.x_range
    if kind == "network":
        cfg = _train_config(opts)
        params, _ = train(cfg, data)
        if out_dir is not None:
            save_params(params, out_dir / f"{name}.params")
        rec = MethodRecord(name, kind, cfg.activation.gamma, 0.0,
                           seminorm_of_network(params, scale=scale), path_norm(params))
        return rec, params
    if kind in ("linear_spline", "natural_cubic"):
        spline = connect_the_dots(data) if kind == "linear_spline" else natural_cubic(data)
        if out_dir is not None:
            save_spline(spline, out_dir / f"{name}.spline")
        return MethodRecord(name, kind, spline.gamma, 0.0, spline_seminorm(spline)), spline
    gamma = opts.get("gamma", 2.0)
    problem = GridProblem(gamma, make_grid(data, opts.get("grid_size")), opts.get("lambda", 1e-5), data)
    kwargs = {k: opts[k] for k in ("max_iters", "tol") if k in opts}
    sol = solve(problem, **kwargs)
    spline = sol.to_spline(problem)
    if out_dir is not None:
        save_spline(spline, out_dir / f"{name}.spline")
    rec = MethodRecord(name, kind, gamma, 0.0, spline_seminorm(spline))
    rec.oracle_seminorm = oracle_seminorm(sol)
    return rec, spline


def run_experiment(config_path=None, out_dir=None, config_text: Optional[str] = None,
                   progress: Optional[Callable[[str], None]] = None) -> ExperimentReport:
    """Fit every configured method, write ``<method>.csv``, ``report.txt`` and ``plot.svg``."""
    if config_text is None:
        config_text = Path(config_path).read_text()
    exp, methods = parse_config(config_text)
    if "dataset" in exp:
        path = Path(exp["dataset"])
        if config_path is not None and not path.is_absolute():
            path = Path(config_path).parent / path
        data = load_dataset(path)
    else:
        data = generate(exp["n"], exp["seed"], exp["noise"])
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)

    xs = sample_sites(data, exp["samples"])
    records = []
    for name, opts in methods.items():
        if progress:
            progress(name)
        t0 = time.perf_counter()
        try:
            rec, model = _fit(name, opts, data, out)
        except Exception as exc:
            raise StepFailed(name, exc) from exc
        rec.time_s = time.perf_counter() - t0
        rec.max_err = float(np.max(np.abs(np.asarray(model(data.x)) - data.y)))
        rec.curve = np.asarray(model(xs))
        if out is not None:
            write_xy_csv(out / f"{name}.csv", xs, rec.curve, header=("x", "f"))
        records.append(rec)

    for rec in records:
        if rec.kind == "network":
            refs = [r for r in records if r.kind == "oracle" and r.gamma == rec.gamma]
            if refs:
                rec.oracle_seminorm = refs[0].oracle_seminorm

    echo = {"experiment": exp, **methods}
    report = ExperimentReport(records, data.fingerprint(), echo, xs)
    if out is not None:
        (out / "report.txt").write_text(format_report(report, timing=exp["timing"]))
        if exp["svg"]:
            (out / "plot.svg").write_text(render_svg(report, data))
    return report


def _num(value: float) -> str:
    return "-" if not np.isfinite(value) else f"{value:.6g}"


def format_report(report: ExperimentReport, timing: bool = True) -> str:
    lines = [f"dataset {report.fingerprint}", ""]
    header = f"{'method':<20} {'max_err':>12} {'path_norm':>12} {'seminorm':>12} {'time_s':>9}"
    lines += [header, "-" * len(header)]
    for r in report.records:
        t = f"{r.time_s:9.2f}" if timing else f"{'-':>9}"
        lines.append(f"{r.method:<20} {_num(r.max_err):>12} {_num(r.path_norm):>12} "
                     f"{_num(r.seminorm):>12} {t}")
    comparisons = [r for r in report.records if r.kind == "network" and np.isfinite(r.oracle_seminorm)]
    if comparisons:
        lines += ["", "seminorm relative to grid oracle of the same order:"]
        for r in comparisons:
            lines.append(f"  {r.method:<20} {r.seminorm / r.oracle_seminorm:.4f}")
    lines += ["", "config:"]
    for section, opts in report.config.items():
        lines.append(f"  [{section}]")
        for key in sorted(opts):
            lines.append(f"    {key} = {opts[key]!r}")
    return "\n".join(lines) + "\n"


_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"]


def render_svg(report: ExperimentReport, data: Dataset, width: int = 720, height: int = 440) -> str:
    """Overlay every fitted curve and the data dots on one set of axes."""
    xs = report.sample_x
    curves = [r.curve for r in report.records]
    ys = np.concatenate([data.y] + curves)
    lo, hi = float(np.min(ys)), float(np.max(ys))
    pad = 0.05 * (hi - lo or 1.0)
    lo, hi = lo - pad, hi + pad
    margin = 40

    def px(x):
        return margin + (x - xs[0]) / (xs[-1] - xs[0]) * (width - 2 * margin)

    def py(y):
        return height - margin - (y - lo) / (hi - lo) * (height - 2 * margin)

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
             f'<rect x="{margin}" y="{margin}" width="{width - 2 * margin}" '
             f'height="{height - 2 * margin}" fill="none" stroke="#888"/>']
    for i, rec in enumerate(report.records):
        color = _PALETTE[i % len(_PALETTE)]
        pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, rec.curve))
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        parts.append(f'<text x="{width - margin - 150}" y="{margin + 16 + 14 * i}" '
                     f'font-size="12" fill="{color}">{rec.method}</text>')
    for x, y in zip(data.x, data.y):
        parts.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="3.5" fill="black"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
