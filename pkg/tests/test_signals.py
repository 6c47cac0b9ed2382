import numpy as np
import pytest

from pencilspec.errors import FamilySpectrumMismatch, PreconditionError
from pencilspec.signals import Family, SignalFamily, ideal_signal, ideal_signal_bruteforce
from pencilspec.spectral import InitialState, eig_decompose, expand_initial_state

PLUS = InitialState.pure(np.array([1.0, 1.0]) / np.sqrt(2))


def _series(A, rho, tag, R, alpha=None):
    m = eig_decompose(A, alpha_A=alpha)
    exp = expand_initial_state(rho, m)
    return ideal_signal(m, exp, SignalFamily(tag, m.alpha), R)


def test_power_geometric():
    s = _series(np.array([[0.5]]), InitialState.pure([1.0]), Family.POWER, 3)
    assert np.allclose(s.values, 0.5 ** np.arange(6))
    assert s.ideal and len(s) == 6


def test_fourier_cosine():
    s = _series(np.diag([0.25, -0.25]), PLUS, Family.FOURIER, 4, alpha=1.0)
    t = np.arange(8)
    assert np.allclose(s.values, np.cos(np.pi * t / 2), atol=1e-14)
    assert np.allclose(s.values[:4], [1, 0, -1, 0], atol=1e-14)


def test_exponential_zero_mode_constant():
    s = _series(np.diag([0.0, -1.0]), PLUS, Family.EXPONENTIAL, 4, alpha=1.0)
    t = np.arange(8)
    assert np.allclose(s.values, 0.5 + 0.5 * np.exp(-t), atol=1e-14)


def test_family_spectrum_checks():
    with pytest.raises(FamilySpectrumMismatch):
        _series(np.diag([0.5j, -0.5j]), PLUS, Family.FOURIER, 2)
    with pytest.raises(FamilySpectrumMismatch):
        _series(np.diag([0.1, -1.0]), PLUS, Family.EXPONENTIAL, 2)


def test_bad_R():
    m = eig_decompose(np.diag([0.5, 0.2]))
    exp = expand_initial_state(PLUS, m)
    with pytest.raises(PreconditionError):
        ideal_signal(m, exp, SignalFamily(Family.POWER, m.alpha), 0)


def test_bruteforce_power_two_by_two():
    A = np.array([[0.3, 0.7], [-0.2, 0.1 + 0.4j]])
    rho = np.array([[0.7, 0.1 - 0.2j], [0.1 + 0.2j, 0.3]])
    s = ideal_signal_bruteforce(A, rho, SignalFamily(Family.POWER, 1.0), 2)
    A2 = np.array([[0.3 * 0.3 + 0.7 * -0.2, 0.3 * 0.7 + 0.7 * (0.1 + 0.4j)],
                   [-0.2 * 0.3 + (0.1 + 0.4j) * -0.2, -0.2 * 0.7 + (0.1 + 0.4j) ** 2]])
    assert s.values[2] == pytest.approx(np.trace(rho @ A2), abs=1e-15)


@pytest.mark.parametrize("tag", list(Family))
def test_sparse_state_bruteforce_agrees(tag):
    rng = np.random.default_rng(5)
    N = 5
    P = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    if tag is Family.POWER:
        lam = 0.9 * np.exp(2j * np.pi * rng.uniform(size=N)) * rng.uniform(0.2, 1, N)
    elif tag is Family.FOURIER:
        lam = rng.uniform(-1, 1, N).astype(complex)
    else:
        lam = -rng.uniform(0, 1, N) + 1j * rng.standard_normal(N)
    A = (P * lam) @ np.linalg.inv(P)
    psi = P[:, :2] @ np.array([1.0, 0.7j])
    rho = InitialState.pure(psi, normalize=True)
    m = eig_decompose(A, fourier=tag is Family.FOURIER)
    exp = expand_initial_state(rho, m, drop_tol=1e-9)
    fam = SignalFamily(tag, m.alpha)
    a = ideal_signal(m, exp, fam, 4).values
    b = ideal_signal_bruteforce(A, rho, fam, 4).values
    assert exp.r == 2
    assert np.max(np.abs(a - b)) <= 1e-10 * max(1.0, m.kappa_J)


def test_offsupport_mass_deviation():
    A = np.diag([0.9, 0.5, 0.2])
    rho = InitialState.density(np.diag([0.5, 0.499, 0.001]))
    m = eig_decompose(A)
    exp = expand_initial_state(rho, m, r_cap=2)
    fam = SignalFamily(Family.POWER, m.alpha)
    dev = np.abs(ideal_signal(m, exp, fam, 4).values - ideal_signal_bruteforce(A, rho, fam, 4).values)
    assert np.all(dev <= 1e-3 * np.max(np.abs(0.2 ** np.arange(8))) + 1e-15)


def test_power_signal_bounded_by_alpha_powers():
    rng = np.random.default_rng(2)
    for _ in range(20):
        A = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        m = eig_decompose(A)
        rho = InitialState.pure(rng.standard_normal(4) + 0j, normalize=True)
        s = ideal_signal(m, expand_initial_state(rho, m, drop_tol=0.0), SignalFamily(Family.POWER, m.alpha), 3)
        assert np.all(np.abs(s.values) <= m.alpha ** np.arange(6) * (1 + 1e-9))


def test_shifted_series():
    s = _series(np.array([[0.5]]), InitialState.pure([1.0]), Family.POWER, 3)
    assert np.allclose(s.shifted(2).values, 0.5 ** np.arange(2, 6))
