import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from neuralspline.activations import PowerActivation
from neuralspline.model import NetworkParams, gradient
from neuralspline.training import loss

settings.register_profile(
    "default", max_examples=60, deadline=None,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# filled by test_acceptance; echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_network(rng, act: PowerActivation, width: int = 6, spread: float = 2.0,
                   positive_w: bool = False) -> NetworkParams:
    """Random network with input weights bounded away from zero."""
    mag = rng.uniform(0.3, spread, width)
    sign = np.ones(width) if positive_w or not act.is_integer_order else rng.choice([-1.0, 1.0], width)
    w = sign * mag
    knots = rng.uniform(-1.0, 1.0, width)
    v = rng.normal(0.0, 1.0, width)
    poly = rng.normal(0.0, 1.0, act.null_space_dim)
    return NetworkParams(act, v, w, knots * w, poly)


def flat_params(p: NetworkParams):
    return np.concatenate([p.v, p.w, p.b, p.poly])


def _unflat(p: NetworkParams, theta):
    k = p.width
    return p.replace(v=theta[:k], w=theta[k:2 * k], b=theta[2 * k:3 * k], poly=theta[3 * k:])


def finite_difference_check(params, data, lam, reg, h=1e-6):
    """Return (analytic, numeric, mask) with kink-adjacent neurons masked out."""
    g = gradient(params, data, lam, reg)
    analytic = np.concatenate([g.dv, g.dw, g.db, g.dpoly])
    theta = flat_params(params)
    numeric = np.empty_like(theta)
    for i in range(theta.size):
        tp, tm = theta.copy(), theta.copy()
        tp[i] += h
        tm[i] -= h
        numeric[i] = (loss(_unflat(params, tp), data, lam, reg)
                      - loss(_unflat(params, tm), data, lam, reg)) / (2 * h)
    k = params.width
    kink = np.min(np.abs(np.outer(data.x, params.w) - params.b), axis=0) < 1e-3
    neuron_mask = np.tile(~kink, 3)
    mask = np.concatenate([neuron_mask, np.ones(params.poly.size, bool)])
    if params.activation.gamma > 2:
        mask[:] = True
    assert mask.size == 3 * k + params.poly.size
    return analytic, numeric, mask


def relative_errors(analytic, numeric, mask):
    scale = max(1.0, float(np.max(np.abs(numeric))))
    return np.abs(analytic - numeric)[mask] / np.maximum(np.abs(numeric[mask]), 1e-3 * scale)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
