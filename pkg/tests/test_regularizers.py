import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_network
from neuralspline.activations import RELU, PowerActivation
from neuralspline.model import NetworkParams, balance, rescale_neuron
from neuralspline.regularizers import (
    RegKind, path_norm, penalty, penalty_gradient, seminorm_of_network, theorem_objective,
    weight_decay)

acts = st.sampled_from([
    RELU, PowerActivation(0.1, 1, 2), PowerActivation(0, 1, 3), PowerActivation(0, 1, 4),
    PowerActivation(0.5, -1, 4), PowerActivation(0, 1, 2.5), PowerActivation(0, 2, 3.7)])
seeds = st.integers(0, 2**32 - 1)


def net(g, v, w):
    act = PowerActivation(0.0, 1.0, g)
    return NetworkParams(act, v, w, np.zeros(len(v)), np.zeros(act.null_space_dim))


def test_path_norm_examples():
    assert path_norm(net(2, [2, -3], [0.5, 2])) == 7.0
    assert path_norm(net(3, [2, -3], [0.5, 2])) == 12.5
    assert path_norm(NetworkParams.empty(RELU)) == 0.0


def test_weight_decay_examples():
    assert weight_decay(net(2, [2, -3], [0.5, 2])) == 8.625
    balanced = net(2, [2], [2])
    assert weight_decay(balanced) == path_norm(balanced) == 4.0
    assert weight_decay(NetworkParams.empty(RELU)) == 0.0


def test_theorem_objective_examples():
    p = net(2, [2, -3], [0.5, -2])
    assert theorem_objective(p) == path_norm(p)
    assert theorem_objective(net(4, [1], [-2])) == 8.0
    assert theorem_objective(NetworkParams.empty(RELU)) == 0.0


def test_seminorm_examples():
    cancel = NetworkParams(RELU, [1, -1], [1, 1], [0, 0], [0, 0])
    assert seminorm_of_network(cancel) == 0.0 and path_norm(cancel) == 2.0
    assert seminorm_of_network(NetworkParams(RELU, [3], [2], [0], [0, 0])) == 6.0


def test_penalty_dispatch():
    p = net(3, [2, -3], [0.5, 2])
    assert penalty(p, RegKind.WEIGHT_DECAY) == weight_decay(p)
    assert penalty(p, RegKind.PATH_NORM) == path_norm(p)
    assert penalty(p, RegKind.NONE) == 0.0


def test_regkind_parse():
    assert RegKind.parse("weight-decay") is RegKind.WEIGHT_DECAY
    assert RegKind.parse("PATH_NORM") is RegKind.PATH_NORM
    assert RegKind.parse(RegKind.NONE) is RegKind.NONE
    with pytest.raises(ValueError):
        RegKind.parse("l2")


@given(acts, seeds)
def test_theorem_objective_equals_path_norm(act, seed):
    p = random_network(np.random.default_rng(seed), act, 8)
    assert theorem_objective(p) == pytest.approx(path_norm(p), rel=1e-12)


@given(acts, seeds)
def test_am_gm(act, seed):
    p = random_network(np.random.default_rng(seed), act, 8)
    assert weight_decay(p) >= path_norm(p) * (1 - 1e-15)
    b = balance(p)
    assert weight_decay(b) == pytest.approx(path_norm(b), rel=1e-12)
    assert path_norm(b) == pytest.approx(path_norm(p), rel=1e-12)


@given(acts, seeds)
def test_seminorm_bounded_by_scaled_path_norm(act, seed):
    rng = np.random.default_rng(seed)
    p = random_network(rng, act, 8)
    # force a shared knot with opposite output weights so cancellation is exercised
    p = p.replace(v=np.r_[p.v, -p.v[0]], w=np.r_[p.w, p.w[0]], b=np.r_[p.b, p.b[0]])
    bound = abs(act.green_constant) * path_norm(p)
    assert seminorm_of_network(p) <= bound + 1e-12 * max(1.0, bound)


@given(acts, seeds, st.floats(0.01, 100.0))
def test_rescale_invariance(act, seed, t):
    p = random_network(np.random.default_rng(seed), act, 5)
    q = rescale_neuron(p, 2, t)
    assert path_norm(q) == pytest.approx(path_norm(p), rel=1e-12)


@pytest.mark.parametrize("reg", [RegKind.WEIGHT_DECAY, RegKind.PATH_NORM])
@pytest.mark.parametrize("gamma", [2.0, 2.5, 3.0, 4.0])
def test_penalty_gradient_finite_differences(reg, gamma):
    rng = np.random.default_rng(int(gamma * 10))
    p = random_network(rng, PowerActivation(0, 1, gamma), 6)
    dv, dw = penalty_gradient(p, reg)
    h = 1e-6
    for k in range(p.width):
        for name, analytic in (("v", dv[k]), ("w", dw[k])):
            up, dn = getattr(p, name).copy(), getattr(p, name).copy()
            up[k] += h
            dn[k] -= h
            num = (penalty(p.replace(**{name: up}), reg) - penalty(p.replace(**{name: dn}), reg)) / (2 * h)
            assert analytic == pytest.approx(num, rel=1e-6, abs=1e-8)


def test_penalty_gradient_none():
    p = net(2, [1, 2], [1, 2])
    dv, dw = penalty_gradient(p, RegKind.NONE)
    assert not dv.any() and not dw.any()
