"""Single-hidden-layer univariate networks with a polynomial generalized bias.

    f(x) = sum_k v_k rho(w_k x - b_k) + sum_j poly_j x^j

The generalized bias spans the null space of ``D^gamma``; for the ReLU it is
the usual skip connection ``u x + s``.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.polynomial import polynomial as P

from .activations import PowerActivation
from .data import Dataset
from .errors import InputError, UnsupportedOperation
from .regularizers import RegKind, penalty_gradient
from .splines import CanonicalSpline, prune

KNOT_RTOL = 1e-9
# knots farther out than this are folded into the polynomial (see to_canonical_spline)
FAR_KNOT = 1e100


@dataclass(frozen=True, eq=False)
class NetworkParams:
    activation: PowerActivation
    v: np.ndarray
    w: np.ndarray
    b: np.ndarray
    poly: np.ndarray

    def __post_init__(self):
        arrays = {}
        for name in ("v", "w", "b", "poly"):
            arr = np.array(getattr(self, name), dtype=float).ravel()
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite values")
            arrays[name] = arr
        if not (arrays["v"].size == arrays["w"].size == arrays["b"].size):
            raise ValueError("v, w and b must have the same length")
        if np.any(arrays["w"] == 0):
            raise ValueError("input weights must be nonzero")
        dim = self.activation.null_space_dim
        if arrays["poly"].size != dim:
            raise ValueError(f"poly must have {dim} coefficients, got {arrays['poly'].size}")
        if not self.activation.is_integer_order and np.any(arrays["w"] < 0):
            raise ValueError("non-integer order requires positive input weights")
        for name, arr in arrays.items():
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def width(self) -> int:
        return self.v.size

    @property
    def knots(self) -> np.ndarray:
        return self.b / self.w

    def replace(self, **changes) -> NetworkParams:
        return dataclasses.replace(self, **changes)

    def __call__(self, x):
        return forward(self, x)

    @classmethod
    def empty(cls, activation: PowerActivation, poly=None) -> NetworkParams:
        poly = np.zeros(activation.null_space_dim) if poly is None else poly
        return cls(activation, [], [], [], poly)


@dataclass(frozen=True)
class Gradient:
    dv: np.ndarray
    dw: np.ndarray
    db: np.ndarray
    dpoly: np.ndarray


def _hidden(params: NetworkParams, x: np.ndarray) -> np.ndarray:
    return np.outer(x, params.w) - params.b[None, :]


def forward(params: NetworkParams, x):
    x_arr = np.asarray(x, dtype=float)
    flat = x_arr.reshape(-1)
    out = P.polyval(flat, params.poly)
    if params.width:
        out = out + np.asarray(params.activation(_hidden(params, flat))) @ params.v
    return float(out[0]) if x_arr.ndim == 0 else out.reshape(x_arr.shape)


def data_loss(params: NetworkParams, data: Dataset) -> float:
    r = forward(params, data.x) - data.y
    return float(r @ r)


def gradient(params: NetworkParams, data: Dataset, lam: float, reg: RegKind) -> Gradient:
    """Analytic gradient of ``sum (f(x_n) - y_n)^2 + lam * penalty``."""
    act = params.activation
    x = data.x
    z = _hidden(params, x)
    a = np.asarray(act(z))
    res = a @ params.v + P.polyval(x, params.poly) - data.y
    dz = 2.0 * res[:, None] * np.asarray(act.derivative(z)) * params.v[None, :]
    dv = 2.0 * a.T @ res
    dw = x @ dz
    db = -dz.sum(axis=0)
    dpoly = 2.0 * np.vander(x, params.poly.size, increasing=True).T @ res
    if lam and reg is not RegKind.NONE:
        pv, pw = penalty_gradient(params, reg)
        dv = dv + lam * pv
        dw = dw + lam * pw
    return Gradient(dv, dw, db, dpoly)


def rescale_neuron(params: NetworkParams, k: int, t: float) -> NetworkParams:
    """Move neuron ``k`` along its invariance orbit ``(v / t^(gamma-1), t w, t b)``."""
    if not t > 0:
        raise ValueError(f"rescaling factor must be positive, got {t}")
    g = params.activation.gamma
    v, w, b = params.v.copy(), params.w.copy(), params.b.copy()
    v[k] /= t ** (g - 1)
    w[k] *= t
    b[k] *= t
    return params.replace(v=v, w=w, b=b)


def balance(params: NetworkParams) -> NetworkParams:
    """Rescale every neuron so that ``|v_k| = |w_k|^(gamma-1)``.

    After balancing, weight decay equals the path-norm; the function is unchanged.
    """
    g = params.activation.gamma
    if g - 1 <= 1e-12:
        raise UnsupportedOperation("order 1 neurons cannot be balanced: |w|^0 is constant")
    av, aw = np.abs(params.v), np.abs(params.w)
    t = np.ones_like(av)
    nz = av > 0
    t[nz] = (av[nz] / aw[nz] ** (g - 1)) ** (1.0 / (2 * g - 2))
    return params.replace(v=params.v / t ** (g - 1), w=params.w * t, b=params.b * t)


def _groups(sorted_values: np.ndarray, tol: float) -> np.ndarray:
    """Group labels for a sorted 1-D array, chaining while within ``tol`` of the group start."""
    labels = np.empty(sorted_values.size, dtype=int)
    label, start = -1, None
    for i, value in enumerate(sorted_values):
        if start is None or value - start > tol:
            label += 1
            start = value
        labels[i] = label
    return labels


def reduce(params: NetworkParams, rtol: float = 1e-12) -> NetworkParams:
    """Merge neurons sharing a weight-bias pair and drop the silent ones."""
    keep = params.v != 0
    v, w, b = params.v[keep], params.w[keep], params.b[keep]
    if v.size == 0:
        return params.replace(v=v, w=w, b=b)
    order = np.lexsort((b, w))
    v, w, b = v[order], w[order], b[order]
    merged_v, merged_w, merged_b = [], [], []
    i = 0
    while i < v.size:
        j = i + 1
        total = v[i]
        while (j < v.size
               and abs(w[j] - w[i]) <= rtol * max(1.0, abs(w[i]))
               and abs(b[j] - b[i]) <= rtol * max(1.0, abs(b[i]))):
            total += v[j]
            j += 1
        if total != 0:
            merged_v.append(total)
            merged_w.append(w[i])
            merged_b.append(b[i])
        i = j
    return params.replace(v=merged_v, w=merged_w, b=merged_b)


def to_canonical_spline(params: NetworkParams, scale: float = 1.0,
                        knot_rtol: float = KNOT_RTOL) -> CanonicalSpline:
    """Rewrite the network as one-sided atoms at its knots ``b_k / w_k``.

    Each neuron ``v rho(w (x - t))`` equals ``v |w|^(gamma-1) rho'(x - t)``, with
    ``rho'`` the activation itself (``w > 0``) or its reflection (``w < 0``). The
    left branch of ``rho'`` is a polynomial plus a right-sided atom, so the
    result has only right-sided atoms. Knots closer than ``knot_rtol * scale``
    are merged; knots beyond ``FAR_KNOT`` (a vanishing input weight) become
    a constant.
    """
    act = params.activation
    g = act.gamma
    poly = params.poly.copy()
    if params.width == 0:
        return CanonicalSpline(g, [], [], poly)
    if not act.is_integer_order and np.any(params.w < 0):
        raise UnsupportedOperation("negative input weights need an integer order")

    with np.errstate(over="ignore"):
        t = params.b / params.w
    far = ~(np.abs(t) <= FAR_KNOT)
    if np.any(far):
        # |w| < |b| / FAR_KNOT: the neuron equals v * rho(-b) up to O(w x / b), and its
        # atom weight v |w|^(gamma-1) is negligible, so keep only the constant
        poly[0] += float(np.sum(params.v[far] * np.asarray(act(-params.b[far]))))
        params = params.replace(v=params.v[~far], w=params.w[~far], b=params.b[~far])
        t = t[~far]
        if params.width == 0:
            return CanonicalSpline(g, [], [], poly)
    amp = params.v * np.abs(params.w) ** (g - 1)
    coeffs = amp * act.green_constant
    left = amp * act.alpha
    neg = params.w < 0
    if np.any(neg):
        reflected, _ = act.reflect()
        coeffs[neg] = amp[neg] * reflected.green_constant
        left[neg] = amp[neg] * reflected.alpha

    if act.is_integer_order and np.any(left != 0):
        m = int(round(g - 1))
        for j in range(m + 1):
            poly[j] += math.comb(m, j) * np.sum(left * (-t) ** (m - j))

    order = np.argsort(t, kind="stable")
    t, coeffs = t[order], coeffs[order]
    labels = _groups(t, knot_rtol * scale)
    n_groups = labels[-1] + 1
    merged_c = np.bincount(labels, weights=coeffs, minlength=n_groups)
    merged_t = np.bincount(labels, weights=t, minlength=n_groups) / np.bincount(labels)
    knots, merged_c = prune(merged_t, merged_c, np.max(np.abs(coeffs)))
    return CanonicalSpline(g, knots, merged_c, poly)


def save_params(params: NetworkParams, path) -> None:
    act = params.activation
    lines = [f"{act.gamma!r} {act.alpha!r} {act.beta!r} {params.width}"]
    lines += [f"{v:.17g} {w:.17g} {b:.17g}" for v, w, b in zip(params.v, params.w, params.b)]
    lines.append(" ".join(f"{c:.17g}" for c in params.poly))
    Path(path).write_text("\n".join(lines) + "\n")


def load_params(path) -> NetworkParams:
    rows = [ln.split() for ln in Path(path).read_text().splitlines() if ln.strip()]
    try:
        gamma, alpha, beta = (float(t) for t in rows[0][:3])
        k = int(rows[0][3])
        neurons = np.array([[float(t) for t in r] for r in rows[1:1 + k]]).reshape(k, 3)
        poly = [float(t) for t in rows[1 + k]] if len(rows) > 1 + k else []
    except (IndexError, ValueError) as exc:
        raise InputError(f"{path}: malformed parameter file ({exc})") from None
    act = PowerActivation(alpha, beta, gamma)
    return NetworkParams(act, neurons[:, 0], neurons[:, 1], neurons[:, 2], poly)
