"""Full-batch AdaGrad training of the regularized least-squares objective

    sum_n (y_n - f(x_n))^2 + lam * R(theta),

with ``R`` the generalized weight decay (default) or the matched path-norm.
"""

from __future__ import annotations

import logging
import math
import sys
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernel
from .activations import RELU, PowerActivation
from .data import Dataset
from .errors import TrainingError
from .model import Gradient, NetworkParams, data_loss
from .regularizers import RegKind, penalty

log = logging.getLogger(__name__)

# keeps non-integer-order networks inside the w > 0 constraint set
W_FLOOR = 1e-8

_REG_CODES = {
    RegKind.NONE: _kernel.REG_NONE,
    RegKind.WEIGHT_DECAY: _kernel.REG_WEIGHT_DECAY,
    RegKind.PATH_NORM: _kernel.REG_PATH_NORM,
}


@dataclass(frozen=True)
class TrainConfig:
    activation: PowerActivation = RELU
    width: int = 200
    lam: float = 1e-5
    reg: RegKind = RegKind.WEIGHT_DECAY
    learning_rate: float = 0.1
    epochs: int = 3_000_000
    seed: int = 0
    init_scale: float = 2.0
    epsilon: float = 1e-10
    full_batch: bool = True

    def __post_init__(self):
        object.__setattr__(self, "reg", RegKind.parse(self.reg))
        if int(self.width) != self.width or self.width < 1:
            raise ValueError(f"width must be a positive integer, got {self.width}")
        if int(self.epochs) != self.epochs or self.epochs < 1:
            raise ValueError(f"epochs must be a positive integer, got {self.epochs}")
        if not self.lam >= 0:
            raise ValueError(f"lambda must be >= 0, got {self.lam}")
        for name in ("learning_rate", "init_scale", "epsilon"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if not self.full_batch:
            raise ValueError("only full-batch training is supported")


@dataclass(frozen=True, eq=False)
class TrainHistory:
    data_loss: np.ndarray
    regularizer: np.ndarray
    lam: float
    objective: np.ndarray = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "objective", self.data_loss + self.lam * self.regularizer)

    def __len__(self) -> int:
        return self.data_loss.size


def init_params(config: TrainConfig, data: Dataset) -> NetworkParams:
    """Random network whose knots are spread uniformly over the data range."""
    rng = np.random.default_rng(config.seed)
    k, s = config.width, config.init_scale
    act = config.activation
    if act.is_integer_order:
        w = rng.uniform(-s, s, k)
    else:
        w = rng.uniform(0.0, s, k)
    # uniform draws hit exactly zero with negligible probability; replace defensively
    w[w == 0] = s
    knots = rng.uniform(data.x[0], data.x[-1], k)
    v = rng.uniform(-s / math.sqrt(k), s / math.sqrt(k), k)
    return NetworkParams(act, v, w, knots * w, np.zeros(act.null_space_dim))


def zero_accumulators(params: NetworkParams) -> Gradient:
    return Gradient(np.zeros(params.width), np.zeros(params.width),
                    np.zeros(params.width), np.zeros(params.poly.size))


def adagrad_step(params: NetworkParams, accumulators: Gradient, grad: Gradient,
                 learning_rate: float, epsilon: float = 1e-10) -> tuple[NetworkParams, Gradient]:
    """One AdaGrad update: ``G += g^2; p -= lr * g / (sqrt(G) + eps)``."""
    new = {}
    acc = {}
    for name in ("v", "w", "b", "poly"):
        g = getattr(grad, "d" + name)
        a = getattr(accumulators, "d" + name) + g * g
        new[name] = getattr(params, name) - learning_rate * g / (np.sqrt(a) + epsilon)
        acc["d" + name] = a
    if not params.activation.is_integer_order:
        new["w"] = np.maximum(new["w"], W_FLOOR)
    return params.replace(**new), Gradient(**acc)


def loss(params: NetworkParams, data: Dataset, lam: float, reg: RegKind) -> float:
    return data_loss(params, data) + lam * penalty(params, RegKind.parse(reg))


def train(config: TrainConfig, data: Dataset, log_every: int | None = None,
          stream=None) -> tuple[NetworkParams, TrainHistory]:
    """Minimize the regularized objective from :func:`init_params`.

    ``log_every`` emits ``epoch,data_loss,reg,objective`` CSV lines to
    ``stream`` (standard error by default). Neurons whose input weight ends
    exactly at zero are folded into the constant term, so the returned
    network can be narrower than ``config.width``.
    """
    n0 = config.activation.null_space_dim
    if config.width < len(data) - n0:
        warnings.warn(f"width {config.width} is below N - N0 = {len(data) - n0}; "
                      "the network may be unable to reach a minimal-seminorm interpolant",
                      stacklevel=2)
    params = init_params(config, data)
    v, w, b, poly = (np.array(a) for a in (params.v, params.w, params.b, params.poly))
    acc = [np.zeros_like(a) for a in (v, w, b, poly)]
    data_hist = np.empty(config.epochs)
    reg_hist = np.empty(config.epochs)
    act = config.activation
    w_floor = 0.0 if act.is_integer_order else W_FLOOR
    stream = sys.stderr if stream is None else stream
    chunk = config.epochs if not log_every else int(log_every)
    if log_every:
        stream.write("epoch,data_loss,reg,objective\n")
    start = 0
    while start < config.epochs:
        stop = min(start + chunk, config.epochs)
        bad = _kernel.run_epochs(
            data.x, data.y, v, w, b, poly, *acc,
            act.alpha, act.beta, act.gamma, act.is_integer_order,
            float(config.lam), _REG_CODES[config.reg], float(config.learning_rate),
            float(config.epsilon), w_floor, data_hist, reg_hist, start, stop)
        if bad >= 0:
            raise TrainingError(bad)
        if log_every:
            last = stop - 1
            obj = data_hist[last] + config.lam * reg_hist[last]
            stream.write(f"{last},{data_hist[last]:.10g},{reg_hist[last]:.10g},{obj:.10g}\n")
        start = stop
    if not (np.all(np.isfinite(v)) and np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
        raise TrainingError(config.epochs)
    dead = w == 0
    if np.any(dead):
        # a zero input weight leaves the constant v * rho(-b); fold it into the bias
        poly[0] += float(np.sum(v[dead] * np.asarray(act(-b[dead]))))
        v, w, b = v[~dead], w[~dead], b[~dead]
        log.debug("folded %d neurons with zero input weight", int(dead.sum()))
    final = NetworkParams(act, v, w, b, poly)
    log.debug("trained width %d for %d epochs", config.width, config.epochs)
    return final, TrainHistory(data_hist, reg_hist, config.lam)
