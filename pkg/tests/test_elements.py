"""Element model checks: rate law shape, hard limits, parameter validation."""

import numpy as np
import pytest

from memnet.elements import MemristorParams, clamp_resistance, rate, rate_profile

BENCH = MemristorParams(
    alpha=146_000.0,
    beta=146_000.0,
    v_threshold=4.0,
    r_min=675.0,
    r_max=10_000.0,
    r_init=10_000.0,
)


def test_rate_below_threshold_uses_low_slope():
    assert rate(BENCH, 0.5) == pytest.approx(73_000.0, rel=1e-15)
    assert rate(BENCH, 0.0) == 0.0


def test_rate_above_threshold_mixes_slopes():
    p = MemristorParams(1_000.0, 100_000.0, 4.0, 1.0, 1e6, 1.0)
    # beta*v + (alpha-beta)*v_t = 100000*5 + (1000-100000)*4
    assert rate(p, 5.0) == pytest.approx(104_000.0, rel=1e-15)


def test_rate_is_odd():
    rng = np.random.default_rng(7)
    for _ in range(200):
        alpha, beta = rng.uniform(-2.0, 2.0, size=2)
        v_t = rng.uniform(0.0, 3.0)
        p = MemristorParams(alpha, beta, v_t, 1.0, 2.0, 1.5)
        v = rng.uniform(-10.0, 10.0)
        assert rate(p, -v) == pytest.approx(-rate(p, v), abs=1e-12)


def test_rate_continuous_at_threshold():
    p = MemristorParams(2.0, 50.0, 1.5, 1.0, 2.0, 1.0)
    # exact value at the kink collapses to alpha * v_t
    assert rate(p, 1.5) == pytest.approx(2.0 * 1.5, rel=1e-15)
    for eps in (1e-6, 1e-9, 1e-12):
        below = rate(p, 1.5 - eps)
        above = rate(p, 1.5 + eps)
        assert abs(above - below) < 100.0 * eps, f"jump at threshold, eps={eps}"


def test_equal_slopes_make_threshold_irrelevant():
    # alpha == beta cancels the threshold term exactly, bit for bit
    v = np.linspace(-9.0, 9.0, 73)
    outs = []
    for v_t in (0.1, 4.0, 100.0):
        p = MemristorParams(146_000.0, 146_000.0, v_t, 1.0, 2.0, 1.0)
        outs.append(rate_profile(p.alpha, p.beta, p.v_threshold, v))
    assert np.array_equal(outs[0], outs[1])
    assert np.array_equal(outs[1], outs[2])
    assert np.array_equal(outs[0], 146_000.0 * v)


def test_clamp_pins_to_limits():
    assert clamp_resistance(BENCH, 12_000.0) == 10_000.0
    assert clamp_resistance(BENCH, 100.0) == 675.0
    assert clamp_resistance(BENCH, 5_000.0) == 5_000.0


def test_clamp_is_idempotent():
    rng = np.random.default_rng(3)
    for _ in range(100):
        proposed = rng.uniform(-5e4, 5e4)
        once = clamp_resistance(BENCH, proposed)
        assert clamp_resistance(BENCH, once) == once
        assert BENCH.r_min <= once <= BENCH.r_max


def test_passive_element():
    p = MemristorParams.passive(10_000.0)
    assert p.is_passive
    assert p.r_min == p.r_max == p.r_init == 10_000.0
    for v in (-5.0, 0.0, 2.5, 100.0):
        assert rate(p, v) == 0.0
    assert not BENCH.is_passive


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(alpha=1.0, beta=1.0, v_threshold=1.0, r_min=0.0, r_max=2.0, r_init=1.0),
        dict(alpha=1.0, beta=1.0, v_threshold=1.0, r_min=-1.0, r_max=2.0, r_init=1.0),
        dict(alpha=1.0, beta=1.0, v_threshold=1.0, r_min=3.0, r_max=2.0, r_init=2.5),
        dict(alpha=1.0, beta=1.0, v_threshold=1.0, r_min=1.0, r_max=2.0, r_init=2.5),
        dict(alpha=1.0, beta=1.0, v_threshold=1.0, r_min=1.0, r_max=2.0, r_init=0.5),
        dict(alpha=1.0, beta=1.0, v_threshold=-0.1, r_min=1.0, r_max=2.0, r_init=1.5),
    ],
)
def test_invalid_params_rejected(kwargs):
    with pytest.raises(ValueError):
        MemristorParams(**kwargs)
