"""Compiled full-batch AdaGrad loop.

Mirrors :func:`neuralspline.model.gradient` and
:func:`neuralspline.training.adagrad_step` exactly; the training module
checks one epoch of this kernel against those reference functions in the
test suite.
"""

import numba
import numpy as np

REG_NONE = 0
REG_WEIGHT_DECAY = 1
REG_PATH_NORM = 2


@numba.njit(inline="always")
def _pow(z, e, ie):
    # ie >= 0 selects exact repeated multiplication for integer exponents
    if ie >= 0:
        r = 1.0
        for _ in range(ie):
            r *= z
        return r
    return z ** e


@numba.njit(cache=True)
def run_epochs(x, y, v, w, b, poly, acc_v, acc_w, acc_b, acc_p,
               alpha, beta, gamma, integer, lam, reg, lr, eps, w_floor,
               data_hist, reg_hist, start, stop):
    """Run epochs ``start..stop-1`` in place. Returns the first bad epoch or -1."""
    n = x.shape[0]
    k_width = v.shape[0]
    d = poly.shape[0]
    e1 = gamma - 1.0
    e2 = gamma - 2.0
    ie1 = int(round(e1)) if integer else -1
    ie2 = int(round(e2)) if (integer and gamma >= 2.0) else -1
    ie_wd = int(round(2.0 * gamma - 3.0)) if (integer and gamma >= 2.0) else -1
    ie_pn = ie2
    act = np.empty((n, k_width))
    dact = np.empty((n, k_width))
    res = np.empty(n)
    gv = np.empty(k_width)
    gw = np.empty(k_width)
    gb = np.empty(k_width)
    gp = np.empty(d)
    for epoch in range(start, stop):
        dl = 0.0
        for i in range(n):
            f = 0.0
            xp = 1.0
            for j in range(d):
                f += poly[j] * xp
                xp *= x[i]
            for k in range(k_width):
                z = w[k] * x[i] - b[k]
                c = beta if z >= 0.0 else alpha
                if c == 0.0:
                    a = 0.0
                    da = 0.0
                else:
                    a = c * _pow(z, e1, ie1)
                    if z == 0.0 or e1 == 0.0:
                        da = 0.0
                    else:
                        da = c * e1 * _pow(z, e2, ie2)
                act[i, k] = a
                dact[i, k] = da
                f += v[k] * a
            res[i] = f - y[i]
            dl += res[i] * res[i]

        rv = 0.0
        for k in range(k_width):
            sv = 0.0
            sd = 0.0
            sdx = 0.0
            for i in range(n):
                sv += act[i, k] * res[i]
                t = res[i] * dact[i, k]
                sd += t
                sdx += x[i] * t
            gv[k] = 2.0 * sv
            gw[k] = 2.0 * v[k] * sdx
            gb[k] = -2.0 * v[k] * sd
            aw = abs(w[k])
            sw = 1.0 if w[k] > 0 else -1.0
            if reg == REG_WEIGHT_DECAY:
                rv += 0.5 * (v[k] * v[k] + _pow(aw, 2.0 * gamma - 2.0, 2 * ie1 if ie1 >= 0 else -1))
                if lam != 0.0:
                    gv[k] += lam * v[k]
                    gw[k] += lam * e1 * _pow(aw, 2.0 * gamma - 3.0, ie_wd) * sw
            elif reg == REG_PATH_NORM:
                av = abs(v[k])
                rv += av * _pow(aw, e1, ie1)
                if lam != 0.0:
                    sv_ = 0.0
                    if v[k] > 0:
                        sv_ = 1.0
                    elif v[k] < 0:
                        sv_ = -1.0
                    gv[k] += lam * sv_ * _pow(aw, e1, ie1)
                    gw[k] += lam * av * e1 * _pow(aw, e2, ie_pn) * sw
        for j in range(d):
            s = 0.0
            for i in range(n):
                s += res[i] * _pow(x[i], float(j), j)
            gp[j] = 2.0 * s

        data_hist[epoch] = dl
        reg_hist[epoch] = rv
        if not np.isfinite(dl + lam * rv):
            return epoch

        for k in range(k_width):
            acc_v[k] += gv[k] * gv[k]
            v[k] -= lr * gv[k] / (np.sqrt(acc_v[k]) + eps)
            acc_w[k] += gw[k] * gw[k]
            w[k] -= lr * gw[k] / (np.sqrt(acc_w[k]) + eps)
            if w_floor > 0.0 and w[k] < w_floor:
                w[k] = w_floor
            acc_b[k] += gb[k] * gb[k]
            b[k] -= lr * gb[k] / (np.sqrt(acc_b[k]) + eps)
        for j in range(d):
            acc_p[j] += gp[j] * gp[j]
            poly[j] -= lr * gp[j] / (np.sqrt(acc_p[j]) + eps)
    return -1
