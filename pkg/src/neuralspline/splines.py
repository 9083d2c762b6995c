"""Canonical splines: translates of a one-sided power plus a polynomial.

A :class:`CanonicalSpline` of order ``gamma`` is

    s(x) = sum_k coeffs[k] * (x - knots[k])_+^(gamma-1) / Gamma(gamma) + poly(x)

so that ``D^gamma s = sum_k coeffs[k] * delta(x - knots[k])`` and the measure
norm of ``D^gamma s`` is simply ``sum |coeffs|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.linalg import solve_banded

from .data import Dataset
from .errors import InputError

PRUNE_RTOL = 1e-12


def null_space_dim(gamma: float) -> int:
    return math.ceil(gamma - 1e-12)


def one_sided_power(u, gamma: float):
    """``u_+^(gamma-1) / Gamma(gamma)``, the normalized Green's function of ``D^gamma``."""
    u = np.asarray(u, dtype=float)
    pos = u >= 0
    return np.where(pos, np.where(pos, u, 0.0) ** (gamma - 1), 0.0) / math.gamma(gamma)


@dataclass(frozen=True, eq=False)
class CanonicalSpline:
    gamma: float
    knots: np.ndarray
    coeffs: np.ndarray
    poly: np.ndarray

    def __post_init__(self):
        knots = np.array(self.knots, dtype=float).ravel()
        coeffs = np.array(self.coeffs, dtype=float).ravel()
        poly = np.array(self.poly, dtype=float).ravel()
        if knots.shape != coeffs.shape:
            raise ValueError("knots and coeffs differ in length")
        if np.any(np.diff(knots) <= 0):
            raise ValueError("knots must be strictly increasing")
        dim = null_space_dim(self.gamma)
        if poly.size != dim:
            raise ValueError(f"poly must have {dim} coefficients for gamma={self.gamma}")
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "poly", poly)

    def __call__(self, x):
        return eval_spline(self, x)

    def __len__(self) -> int:
        return self.knots.size


def eval_spline(s: CanonicalSpline, x):
    x_arr = np.asarray(x, dtype=float)
    flat = x_arr.reshape(-1)
    out = P.polyval(flat, s.poly)
    if s.knots.size:
        out = out + one_sided_power(flat[:, None] - s.knots[None, :], s.gamma) @ s.coeffs
    return float(out[0]) if x_arr.ndim == 0 else out.reshape(x_arr.shape)


def spline_seminorm(s: CanonicalSpline) -> float:
    """``||D^gamma s||_M``: total variation of the Dirac train."""
    return float(np.sum(np.abs(s.coeffs)))


def prune(knots, coeffs, scale: float):
    """Drop atoms whose coefficient is a numerical zero relative to ``scale``."""
    knots = np.asarray(knots, dtype=float)
    coeffs = np.asarray(coeffs, dtype=float)
    keep = np.abs(coeffs) > PRUNE_RTOL * scale
    return knots[keep], coeffs[keep]


def connect_the_dots(data: Dataset) -> CanonicalSpline:
    """Piecewise-linear interpolant, continued linearly beyond the end points."""
    slopes = np.diff(data.y) / np.diff(data.x)
    jumps = np.diff(slopes)
    scale = max(np.max(np.abs(slopes)), np.max(np.abs(jumps), initial=0.0))
    knots, coeffs = prune(data.x[1:-1], jumps, scale)
    poly = [data.y[0] - slopes[0] * data.x[0], slopes[0]]
    return CanonicalSpline(2.0, knots, coeffs, poly)


def natural_moments(x, y) -> np.ndarray:
    """Second derivatives of the natural cubic interpolant at the sites (tridiagonal solve)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.size
    h = np.diff(x)
    moments = np.zeros(n)
    if n < 3:
        return moments
    rhs = 6.0 * np.diff(np.diff(y) / h)
    ab = np.zeros((3, n - 2))
    ab[0, 1:] = h[1:-1]
    ab[1, :] = 2.0 * (h[:-1] + h[1:])
    ab[2, :-1] = h[1:-1]
    moments[1:-1] = solve_banded((1, 1), ab, rhs)
    return moments


def natural_cubic(data: Dataset) -> CanonicalSpline:
    """Natural cubic interpolant in canonical form.

    The atoms sit at the interior sites with weights equal to the jumps of
    the third derivative; the end pieces are continued as cubics, which adds
    no boundary atoms.
    """
    if len(data) < 3:
        raise InputError("natural cubic spline needs at least 3 points")
    x, y = data.x, data.y
    h = np.diff(x)
    m = natural_moments(x, y)
    third = np.diff(m) / h
    jumps = np.diff(third)
    knots, coeffs = prune(x[1:-1], jumps, max(np.max(np.abs(third)), np.max(np.abs(jumps))))
    # first piece around x0: y0 + d1*(x-x0) + m0/2*(x-x0)^2 + t0/6*(x-x0)^3
    d1 = (y[1] - y[0]) / h[0] - h[0] * (2.0 * m[0] + m[1]) / 6.0
    local = np.array([y[0], d1, m[0] / 2.0, third[0] / 6.0])
    poly = _shift_poly(local, x[0])
    return CanonicalSpline(4.0, knots, coeffs, poly)


def _shift_poly(local, x0: float) -> np.ndarray:
    """Monomial coefficients of ``sum local[j] * (x - x0)**j``."""
    out = np.zeros(len(local))
    for j, c in enumerate(local):
        for i in range(j + 1):
            out[i] += c * math.comb(j, i) * (-x0) ** (j - i)
    return out


def save_spline(s: CanonicalSpline, path) -> None:
    lines = [f"{s.gamma!r} {s.knots.size}"]
    lines += [f"{k:.17g} {c:.17g}" for k, c in zip(s.knots, s.coeffs)]
    lines.append(" ".join(f"{c:.17g}" for c in s.poly))
    Path(path).write_text("\n".join(lines) + "\n")


def load_spline(path) -> CanonicalSpline:
    rows = [ln.split() for ln in Path(path).read_text().splitlines() if ln.strip()]
    try:
        gamma, n = float(rows[0][0]), int(rows[0][1])
        atoms = np.array([[float(t) for t in r] for r in rows[1:1 + n]]).reshape(n, 2)
        poly = [float(t) for t in rows[1 + n]]
    except (IndexError, ValueError) as exc:
        raise InputError(f"{path}: malformed spline file ({exc})") from None
    return CanonicalSpline(gamma, atoms[:, 0], atoms[:, 1], poly)
