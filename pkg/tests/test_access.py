import math

import numpy as np
import pytest

from pencilspec.access import (AccessModel, default_alpha_p, entry_scale, estimate_signal_entry,
                               hadamard_sample, qae_queries, qae_sample, sample_series)
from pencilspec.errors import InvalidAccuracy, InvalidProbability, NormalizedValueOutOfRange
from pencilspec.instances import scaling_instance
from pencilspec.signals import Family, SignalFamily, ideal_signal
from pencilspec.spectral import InitialState, eig_decompose, expand_initial_state


@pytest.fixture(scope="module")
def inst():
    return scaling_instance()


def _family(inst, tag=Family.POWER):
    return SignalFamily(tag, inst.model.alpha)


def test_hadamard_deterministic_extremes():
    rng = np.random.default_rng(0)
    assert hadamard_sample(1.0, 17, rng) == 1.0
    assert hadamard_sample(0.0, 17, rng) == -1.0


def test_hadamard_concentration():
    rng = np.random.default_rng(1)
    vals = [hadamard_sample(0.5, 10 ** 6, rng) for _ in range(50)]
    assert max(abs(v) for v in vals) <= 5e-3


def test_hadamard_normal_limit_for_huge_counts():
    rng = np.random.default_rng(2)
    v = hadamard_sample(0.75, 10 ** 30, rng)
    assert abs(v - 0.5) < 1e-12


@pytest.mark.parametrize("p", [-0.1, 1.1])
def test_invalid_probability(p):
    with pytest.raises(InvalidProbability):
        hadamard_sample(p, 10, np.random.default_rng(0))


def test_qae_success_interval():
    rng = np.random.default_rng(3)
    hits = [qae_sample(0.5, 0.01, 1e-6, rng)[0] for _ in range(2000)]
    assert all(0.49 <= h <= 0.51 for h in hits)
    zero = [qae_sample(0.0, 0.1, 1e-6, rng)[0] for _ in range(200)]
    assert all(0 <= h <= 0.1 for h in zero)


def test_qae_failure_rate():
    rng = np.random.default_rng(4)
    outcomes = np.array([qae_sample(0.5, 0.01, 0.2, rng)[0] for _ in range(5000)])
    miss = np.mean(np.abs(outcomes - 0.5) > 0.01)
    # failures draw uniformly on [0, 1], so about 98 percent of them miss the window
    assert abs(miss - 0.2 * 0.98) < 0.03


def test_qae_query_count():
    q = qae_queries(1e-3, 1e-2)
    assert q == math.ceil(1e3 * math.log(100))
    ratio = qae_queries(1e-4, 1e-2) / q
    assert abs(ratio - 10) <= 10 / q


@pytest.mark.parametrize("eps, delta", [(0, 0.1), (0.5, 0.1), (0.1, 0), (0.1, 1)])
def test_qae_invalid_accuracy(eps, delta):
    with pytest.raises(InvalidAccuracy):
        qae_sample(0.5, eps, delta, np.random.default_rng(0))


def test_exact_entry_bitwise(inst):
    fam = _family(inst)
    ideal = ideal_signal(inst.model, inst.expansion, fam, 3).values
    for t in range(6):
        est = estimate_signal_entry(inst.model, inst.expansion, fam, t, AccessModel.exact())
        assert est.value == ideal[t]
        assert est.shots_or_queries == 0


def test_power_scale_and_noise_amplification():
    m = eig_decompose(np.diag([0.5, -0.25]), alpha_A=2.0)
    exp = expand_initial_state(InitialState.pure(np.array([1.0, 1.0]) / np.sqrt(2)), m)
    fam = SignalFamily(Family.POWER, 2.0)
    est = estimate_signal_entry(m, exp, fam, 3, AccessModel.hadamard(10 ** 4))
    assert est.scale_applied == 8.0
    assert entry_scale(fam, 3, None) == 8.0
    series = sample_series(m, exp, fam, 2, AccessModel.hadamard(10 ** 4))
    assert series.noise_scale == pytest.approx(8.0 * 1e-2 * math.sqrt(2))


def test_large_m_close_to_ideal(inst):
    fam = _family(inst)
    ideal = ideal_signal(inst.model, inst.expansion, fam, 2).values
    s = sample_series(inst.model, inst.expansion, fam, 2, AccessModel.hadamard(10 ** 7, seed=9))
    scale = inst.model.alpha ** np.arange(4)
    assert np.all(np.abs(s.values - ideal) <= 3e-3 * scale)


def test_series_cost_counts_distinct_entries(inst):
    fam = _family(inst)
    s = sample_series(inst.model, inst.expansion, fam, 3, AccessModel.hadamard(100))
    assert len(s) == 6
    assert s.cost_total == 6 * 2 * 100
    q = sample_series(inst.model, inst.expansion, fam, 3, AccessModel.amplitude_estimation(1e-3, 1e-2))
    assert q.cost_total == 12 * qae_queries(1e-3, 1e-2)


def test_exact_series_is_ideal(inst):
    fam = _family(inst)
    s = sample_series(inst.model, inst.expansion, fam, 3, AccessModel.exact())
    assert s.ideal and s.noise_scale == 0
    assert np.array_equal(s.values, ideal_signal(inst.model, inst.expansion, fam, 3).values)


def test_same_seed_same_series(inst):
    fam = _family(inst)
    acc = AccessModel.amplitude_estimation(1e-3, 0.1, seed=11)
    a = sample_series(inst.model, inst.expansion, fam, 3, acc, trial=4)
    b = sample_series(inst.model, inst.expansion, fam, 3, acc, trial=4)
    c = sample_series(inst.model, inst.expansion, fam, 3, acc, trial=5)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)


def test_entry_matches_series_substream(inst):
    fam = _family(inst)
    acc = AccessModel.hadamard(1000, seed=3)
    s = sample_series(inst.model, inst.expansion, fam, 3, acc, trial=2)
    for t in range(6):
        e = estimate_signal_entry(inst.model, inst.expansion, fam, t, acc, trial=2)
        assert e.value == s.values[t]


def test_default_alpha_p_contraction():
    m = eig_decompose(np.diag([-0.3, -1.0]))
    assert default_alpha_p(m, SignalFamily(Family.EXPONENTIAL, m.alpha), 3) == 0.5


def test_out_of_range_normalization(inst):
    fam = SignalFamily(Family.POWER, 0.1)
    with pytest.raises(NormalizedValueOutOfRange):
        sample_series(inst.model, inst.expansion, fam, 2, AccessModel.hadamard(10))
