import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pencilspec.bounds import (THEOREMS, bernstein_experiment, bernstein_tail, fourier_perturbation_bound,
                               frobenius_inflation, instance_bound_reports, kappa_bound_fourier,
                               kappa_bound_general, kappa_V, node_vandermonde, perturbation_bound,
                               perturbation_experiment, qevt_degree, query_cost_model,
                               sample_complexity_general, vandermonde, vandermonde_inverse_explicit,
                               vinv_frobenius_bound)
from pencilspec.errors import CoincidentNodes, MissingParameter, PreconditionViolated

BASE = {"r": 3, "eps": 1e-3, "delta": 0.05, "c_min": 0.1, "alpha_A": 1.0, "Delta_prime": 0.3,
        "kappa_J": 2.0, "kappa_V": 5.0, "zeta": 0.0, "alpha_beta": 1.0, "alpha_F": 1.0}


def disk_nodes(rng, r, min_gap):
    while True:
        z = np.sqrt(rng.uniform(size=r)) * np.exp(2j * np.pi * rng.uniform(size=r))
        if r == 1 or (np.abs(z[:, None] - z[None, :]) + 3 * np.eye(r)).min() >= min_gap:
            return z


def test_vandermonde_conventions():
    z = np.array([2.0, 3.0])
    assert np.array_equal(vandermonde(z), [[1, 1], [2, 3]])
    assert np.array_equal(node_vandermonde(z), [[1, 2], [1, 3]])
    assert vandermonde(z, 4).shape == (4, 2)


def test_explicit_inverse_small_cases():
    assert np.allclose(vandermonde_inverse_explicit([0.4j]), [[1]])
    a, b = 0.3 + 0.1j, -0.6
    W = vandermonde_inverse_explicit([a, b])
    assert np.allclose(W, np.array([[b, -a], [-1, 1]]) / (b - a))
    assert np.allclose(node_vandermonde([a, b]) @ W, np.eye(2))
    with pytest.raises(CoincidentNodes):
        vandermonde_inverse_explicit([0.5, 0.5])


def test_explicit_inverse_random():
    rng = np.random.default_rng(0)
    for _ in range(100):
        r = int(rng.integers(1, 6))
        z = disk_nodes(rng, r, 0.3)
        assert np.max(np.abs(vandermonde_inverse_explicit(z) - np.linalg.inv(node_vandermonde(z)))) <= 1e-8


def test_frobenius_and_kappa_bounds_random():
    rng = np.random.default_rng(1)
    for _ in range(500):
        r = int(rng.integers(1, 6))
        z = disk_nodes(rng, r, 0.05)
        gap = 2.0 if r == 1 else float((np.abs(z[:, None] - z[None, :]) + 3 * np.eye(r)).min())
        assert np.linalg.norm(np.linalg.inv(node_vandermonde(z)), "fro") <= vinv_frobenius_bound(r, gap) * (1 + 1e-9)
        assert kappa_V(z) <= kappa_bound_general(r, gap) * (1 + 1e-9)


def test_kappa_bound_examples():
    assert kappa_bound_general(1, 1.0) == pytest.approx(2 / math.sqrt(math.pi))
    assert kappa_V([0.4]) == pytest.approx(1.0)
    assert kappa_bound_general(2, 0.5) == pytest.approx(16 / math.sqrt(math.pi))
    assert kappa_bound_fourier(10, 0.25) == pytest.approx(math.sqrt(13 / 5))
    assert kappa_bound_fourier(10 ** 7, 0.25) == pytest.approx(1.0, abs=1e-6)
    with pytest.raises(PreconditionViolated):
        kappa_bound_fourier(4, 0.25)


def test_fourier_kappa_bound_on_nodes():
    rng = np.random.default_rng(2)
    for _ in range(50):
        f = np.sort(rng.uniform(size=3))
        gaps = np.diff(np.append(f, f[0] + 1))
        if gaps.min() < 0.1:
            continue
        z = np.exp(-2j * np.pi * f)
        rows = int(1 / gaps.min() + 2)
        assert kappa_V(z, rows) <= kappa_bound_fourier(rows, gaps.min()) * (1 + 1e-9)


def test_perturbation_bound_examples():
    assert perturbation_bound(0.0, 3.0, 0.5, 0.1) == 0.0
    assert perturbation_bound(1e-6, 1.0, 1.0, 1.0) == pytest.approx(2e-6)
    assert fourier_perturbation_bound(1e-6, 1.0, 1, 1.0) == pytest.approx(2e-6)
    assert frobenius_inflation(1e-4, 5) == pytest.approx(5e-4)


def test_perturbation_experiment_never_violates():
    rng = np.random.default_rng(3)
    for r in (2, 3):
        z = disk_nodes(rng, r, 0.3)
        reports = perturbation_experiment(z, np.full(r, 1 / r), 1e-7, 20, rng)
        assert all(rep.satisfied for rep in reports)


def test_bernstein_tail_examples():
    assert bernstein_tail(3, 1000, 0) == 6
    vals = [bernstein_tail(3, 1000, g) for g in (10, 100, 300, 1000)]
    assert all(a >= b for a, b in zip(vals, vals[1:]))


def test_bernstein_experiment_small():
    reports = bernstein_experiment(2, 200, [0, 20, 60, 120], 200, np.random.default_rng(4))
    assert all(rep.satisfied for rep in reports)


def test_sample_complexity_scaling():
    m1 = sample_complexity_general(2, 0.5, 0.1, 0.3, 0.05)
    m2 = sample_complexity_general(2, 0.5, 0.05, 0.3, 0.05)
    assert m2 / m1 == pytest.approx(4, rel=1e-9)
    one = sample_complexity_general(1, 0.5, 0.1, 0.3, 0.05)
    assert one == math.ceil(2 ** 8 / (0.5 ** 4 * 0.1 * 0.3) ** 2 * math.log(1 / 0.05))


def test_cost_model_examples():
    base = query_cost_model("GeneralPurified", BASE)[2]
    tenth = query_cost_model("GeneralPurified", dict(BASE, eps=BASE["eps"] / 10))[2]
    assert tenth / base == pytest.approx(10)
    s1 = query_cost_model("GeneralSample", BASE)[1]
    s2 = query_cost_model("GeneralSample", dict(BASE, eps=BASE["eps"] / 10))[1]
    assert s2 / s1 == pytest.approx(100)
    params = dict(BASE, r=8, kappa_J=1.0, kappa_V=1.0, c_min=0.1)
    assert qevt_degree("RealPurified", params) == pytest.approx(8 + math.log(1e4))


def test_missing_parameter():
    with pytest.raises(MissingParameter):
        query_cost_model("RealSample", {k: v for k, v in BASE.items() if k != "kappa_V"})


@pytest.mark.parametrize("theorem", THEOREMS)
@settings(max_examples=25, deadline=None)
@given(eps=st.floats(1e-6, 1e-1), c=st.floats(1e-3, 0.9), dp=st.floats(0.05, 1.5))
def test_costs_monotone(theorem, eps, c, dp):
    p = dict(BASE, eps=eps, c_min=c, Delta_prime=dp)
    total = query_cost_model(theorem, p)[2]
    for key, val in (("eps", eps), ("c_min", c), ("Delta_prime", dp)):
        smaller = query_cost_model(theorem, dict(p, **{key: val * 0.9}))[2]
        assert smaller >= total * (1 - 1e-12), key


@settings(max_examples=50, deadline=None)
@given(r=st.integers(1, 5), gap=st.floats(0.05, 2.0))
def test_closed_form_bounds_monotone_in_gap(r, gap):
    assert kappa_bound_general(r, gap * 0.9) >= kappa_bound_general(r, gap)
    assert sample_complexity_general(r, gap * 0.9, 0.1, 0.2, 0.05) >= sample_complexity_general(r, gap, 0.1, 0.2, 0.05)


def test_instance_reports_serializable():
    import json
    reps = instance_bound_reports([0.9, -0.4], [0.6, 0.4], E_norm=1e-6, alpha=1.0, kappa_J=1.0,
                                  eps=1e-3, delta=0.05)
    names = {r.name for r in reps}
    assert {"kappa_V", "kappa_bound_general", "perturbation_bound", "GeneralSample.total"} <= names
    json.dumps([r.to_dict() for r in reps])
    assert all(r.satisfied in (None, True) for r in reps)
