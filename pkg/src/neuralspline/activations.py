"""Power activation functions and their dilation algebra.

A power activation of order ``gamma`` is ``alpha * x**(gamma - 1)`` on the
negative half-line and ``beta * x**(gamma - 1)`` on the non-negative one.
Up to the constant :attr:`PowerActivation.green_constant` it is a Green's
function of the ``gamma``-th derivative, so networks built from it are
splines whose knots sit at ``b / w``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InputError, UnsupportedOperation

_INT_ATOL = 1e-12


def _scalar_or_array(out: np.ndarray, like) -> float | np.ndarray:
    return float(out) if np.ndim(like) == 0 else out


@dataclass(frozen=True)
class PowerActivation:
    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value)
        if self.gamma < 1:
            raise ValueError(f"order gamma must be >= 1, got {self.gamma}")
        if self.alpha == self.beta:
            raise ValueError("alpha equals beta: the activation has no Dirac part")
        if not self.is_integer_order and self.alpha != 0:
            raise ValueError("non-integer order requires alpha = 0 (left branch is not real-valued)")

    @property
    def is_integer_order(self) -> bool:
        return abs(self.gamma - round(self.gamma)) <= _INT_ATOL

    @property
    def null_space_dim(self) -> int:
        """Number of polynomial coefficients in the generalized bias."""
        return math.ceil(self.gamma - _INT_ATOL)

    @property
    def green_constant(self) -> float:
        """``(beta - alpha) * Gamma(gamma)``: the weight of the Dirac impulse in ``D^gamma rho``."""
        return (self.beta - self.alpha) * math.gamma(self.gamma)

    def __call__(self, x):
        x_arr = np.asarray(x, dtype=float)
        pos = x_arr >= 0
        if self.is_integer_order:
            p = x_arr ** int(round(self.gamma - 1))
            out = np.where(pos, self.beta * p, self.alpha * p)
        else:
            out = np.where(pos, self.beta * np.where(pos, x_arr, 0.0) ** (self.gamma - 1), 0.0)
        return _scalar_or_array(out, x)

    def derivative(self, x):
        # 0 at the origin: a subgradient element for gamma = 2, the true limit for gamma > 2
        x_arr = np.asarray(x, dtype=float)
        e = self.gamma - 1
        if e <= _INT_ATOL:
            return _scalar_or_array(np.zeros_like(x_arr), x)
        pos = x_arr > 0
        if self.is_integer_order:
            p = e * x_arr ** int(round(e - 1))
            out = np.where(pos, self.beta * p, self.alpha * p)
        else:
            safe = np.where(pos, x_arr, 1.0)
            out = np.where(pos, self.beta * e * safe ** (e - 1), 0.0)
        out = np.where(x_arr == 0, 0.0, out)
        return _scalar_or_array(out, x)

    def homogeneity_factor(self, w: float) -> float:
        """Factor ``g`` with ``rho(w x) = g * rho(sign(w) x)``, i.e. ``|w|**(gamma - 1)``."""
        if w == 0:
            raise ValueError("dilation by w = 0 is undefined")
        return abs(w) ** (self.gamma - 1)

    def dilation_factor(self, w: float) -> float:
        """Operator-level factor ``w**gamma`` with ``D^gamma Dil_w = w**gamma Dil_w D^gamma``."""
        if w == 0:
            raise ValueError("dilation by w = 0 is undefined")
        if self.is_integer_order:
            return float(w) ** int(round(self.gamma))
        if w < 0:
            raise UnsupportedOperation("w**gamma is not real for w < 0 and non-integer gamma")
        return float(w) ** self.gamma

    def reflect(self) -> tuple[PowerActivation, int]:
        """Return ``(act, s)`` with ``act(x) == self(-x)``.

        ``s = (-1)**gamma`` is the ratio of the two Green's constants, i.e. the
        sign flip of the Dirac coefficient under reflection.
        """
        if not self.is_integer_order:
            raise UnsupportedOperation("reflection is only defined for integer order")
        g = int(round(self.gamma))
        flip = (-1) ** (g - 1)
        return PowerActivation(flip * self.beta, flip * self.alpha, g), (-1) ** g

    def __str__(self) -> str:
        return f"{self.alpha!r},{self.beta!r},{self.gamma!r}"


RELU = PowerActivation(0.0, 1.0, 2.0)


def parse_activation(text: str) -> PowerActivation:
    """Parse ``alpha,beta,gamma`` or one of ``relu``, ``leaky_relu:A``, ``tpow:G``."""
    text = text.strip()
    try:
        if text == "relu":
            return RELU
        if text.startswith("leaky_relu:"):
            return PowerActivation(float(text.split(":", 1)[1]), 1.0, 2.0)
        if text.startswith("tpow:"):
            g = text.split(":", 1)[1]
            order = int(g)
            if order < 1 or str(order) != g.strip():
                raise ValueError
            return PowerActivation(0.0, 1.0 / math.gamma(order), order)
        parts = [float(p) for p in text.split(",")]
        if len(parts) != 3:
            raise ValueError
        return PowerActivation(*parts)
    except ValueError as exc:
        detail = f": {exc}" if str(exc) else ""
        raise InputError(f"cannot parse activation {text!r}{detail}") from None


@dataclass(frozen=True)
class AdmissibilityReport:
    admissible: bool
    fitted: Optional[PowerActivation]
    gamma_estimate: float
    max_residual: float
    rejection_reason: Optional[str] = None


def sample_grid(n: int = 200, span: float = 3.0) -> np.ndarray:
    """Symmetric log-spaced sample sites ``+-exp(t)``, ``t`` uniform on ``[-span, span]``."""
    t = np.linspace(-span, span, n)
    return np.concatenate([-np.exp(t[::-1]), np.exp(t)])


def _fit_branch(s: np.ndarray, r: np.ndarray, zero_level: float):
    """Fit ``|r| = a * s**e`` on a log-log line. Returns None for an identically zero branch."""
    if np.all(np.abs(r) <= zero_level):
        return None
    sign = np.sign(r)
    if np.any(sign == 0) or np.any(sign != sign[0]):
        return "sign"
    slope, intercept = np.polyfit(np.log(s), np.log(np.abs(r)), 1)
    return slope, intercept, sign[0]


def _branch_residual(fit, s: np.ndarray, r: np.ndarray) -> float:
    slope, intercept, sign = fit
    pred = sign * np.exp(intercept) * s ** slope
    return float(np.max(np.abs(pred - r) / np.abs(r)))


def check_admissibility(x, values, tolerance: float = 1e-6) -> AdmissibilityReport:
    """Decide whether sampled values come from a power activation.

    With ``P(t) = ln rho(e^t)``, dilation invariance forces ``P`` to be affine,
    so each half-line is fitted with a line in log-log coordinates. The slope
    gives ``gamma - 1``, the intercepts give ``beta`` and ``alpha``. Half of
    the samples are held out and the fitted activation must reproduce them to
    ``tolerance`` (relative), which checks ``rho(w x) = |w|^(gamma-1) rho(sgn(w) x)``
    on the held-out sites.
    """
    x = np.asarray(x, dtype=float).ravel()
    values = np.asarray(values, dtype=float).ravel()
    if x.shape != values.shape:
        raise InputError("sample sites and values differ in length")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(values))):
        raise InputError("samples contain non-finite values")
    if np.count_nonzero(x > 0) < 4 or np.count_nonzero(x < 0) < 4:
        raise InputError("samples must cover both signs of x")

    def reject(reason, gamma_est=float("nan"), residual=float("inf")):
        return AdmissibilityReport(False, None, gamma_est, residual, reason)

    scale = float(np.max(np.abs(values)))
    if scale == 0:
        return reject("activation is identically zero")
    zero_level = 1e-14 * scale

    fit_idx = np.zeros(x.size, dtype=bool)
    for side in (x > 0, x < 0):
        idx = np.flatnonzero(side)
        fit_idx[idx[::2]] = True

    fits = {}
    for name, side in (("right", x > 0), ("left", x < 0)):
        sel = side & fit_idx
        fits[name] = _fit_branch(np.abs(x[sel]), values[sel], zero_level)
        if fits[name] == "sign":
            return reject(f"sign of rho changes on the {name} branch")
        held = side & ~fit_idx
        if fits[name] is not None:
            if np.any(values[held] == 0):
                return reject(f"sign of rho changes on the {name} branch")
            resid = _branch_residual(fits[name], np.abs(x[held]), values[held])
            if resid > tolerance:
                return reject(f"no power law fits the {name} branch: log-log profile is not "
                              f"affine (max relative residual {resid:.3g})", residual=resid)

    lead = fits["right"] if fits["right"] is not None else fits["left"]
    if lead is None:
        return reject("activation vanishes away from the origin")
    gamma_est = float(lead[0] + 1.0)
    if gamma_est < 1 - tolerance:
        return reject(f"fitted order {gamma_est:.6g} is below 1", gamma_est)
    gamma = float(round(gamma_est)) if abs(gamma_est - round(gamma_est)) <= tolerance else gamma_est
    gamma = max(gamma, 1.0)
    integer = abs(gamma - round(gamma)) <= _INT_ATOL

    def amplitude(side):
        s = np.abs(x[side & fit_idx])
        r = values[side & fit_idx]
        return float(np.sign(r[0]) * np.exp(np.mean(np.log(np.abs(r)) - (gamma - 1) * np.log(s))))

    beta = amplitude(x > 0) if fits["right"] is not None else 0.0
    if fits["left"] is None:
        alpha = 0.0
    elif not integer:
        return reject("non-integer order with a non-vanishing left branch", gamma_est)
    else:
        alpha = amplitude(x < 0) * (-1) ** (int(round(gamma)) - 1)

    if abs(alpha - beta) <= tolerance * max(abs(alpha), abs(beta)):
        # a pure power x^(gamma-1) is a null-space polynomial, not a Green's function
        return reject("alpha equals beta: no Dirac part, the function lies in the null space", gamma_est)

    fitted = PowerActivation(alpha, beta, gamma)
    pred = np.asarray(fitted(x))
    residual = float(np.max(np.abs(values - pred) / np.maximum(np.abs(values), 1e-12 * scale)))
    if residual > tolerance:
        return reject(
            f"no power law fits: log-log profile is not affine (max relative residual {residual:.3g})",
            gamma_est, residual)
    return AdmissibilityReport(True, fitted, gamma_est, residual)
