"""Matched path-norm, generalized weight decay and the measure-norm seminorm of a network."""

from __future__ import annotations

from enum import Enum

import numpy as np


class RegKind(Enum):
    PATH_NORM = "path_norm"
    WEIGHT_DECAY = "weight_decay"
    NONE = "none"

    @classmethod
    def parse(cls, text) -> RegKind:
        if isinstance(text, cls):
            return text
        key = str(text).strip().lower().replace("-", "_")
        for kind in cls:
            if kind.value == key or kind.name.lower() == key:
                return kind
        raise ValueError(f"unknown regularizer {text!r}; expected one of "
                         + ", ".join(k.value for k in cls))


def path_norm(params) -> float:
    """``sum_k |v_k| |w_k|^(gamma-1)``."""
    g = params.activation.gamma
    return float(np.sum(np.abs(params.v) * np.abs(params.w) ** (g - 1)))


def weight_decay(params) -> float:
    """``1/2 sum_k (v_k^2 + |w_k|^(2 gamma - 2))``; bounds the path-norm from above by AM-GM."""
    g = params.activation.gamma
    return float(0.5 * np.sum(params.v ** 2 + np.abs(params.w) ** (2 * g - 2)))


def theorem_objective(params) -> float:
    """``sum_k |v_k| |g(w_k)| / |w_k|`` with the operator dilation factor ``g(w) = w^gamma``."""
    act = params.activation
    g = np.array([act.dilation_factor(wk) for wk in params.w])
    return float(np.sum(np.abs(params.v) * np.abs(g) / np.abs(params.w)))


def penalty(params, reg: RegKind) -> float:
    if reg is RegKind.WEIGHT_DECAY:
        return weight_decay(params)
    if reg is RegKind.PATH_NORM:
        return path_norm(params)
    return 0.0


def penalty_gradient(params, reg: RegKind) -> tuple[np.ndarray, np.ndarray]:
    """Gradient (a subgradient for the path-norm) of :func:`penalty` in ``(v, w)``.

    Biases and the generalized bias are never penalized.
    """
    g = params.activation.gamma
    v, w = params.v, params.w
    aw = np.abs(w)
    if reg is RegKind.WEIGHT_DECAY:
        return v.copy(), (g - 1) * aw ** (2 * g - 3) * np.sign(w)
    if reg is RegKind.PATH_NORM:
        # sign(0) = 0 picks the zero subgradient at v = 0
        return np.sign(v) * aw ** (g - 1), np.abs(v) * (g - 1) * aw ** (g - 2) * np.sign(w)
    return np.zeros_like(v), np.zeros_like(w)


def seminorm_of_network(params, scale: float = 1.0) -> float:
    """Exact ``||D^gamma f||_M`` of the network, after merging coincident knots.

    Reported in the units of the normalized Green's function, so it equals
    ``|green_constant| * path_norm`` when no two neurons share a knot.
    """
    from .model import reduce, to_canonical_spline
    from .splines import spline_seminorm

    return spline_seminorm(to_canonical_spline(reduce(params), scale=scale))
