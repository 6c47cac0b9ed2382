import numpy as np
import pytest

from pencilspec import _kernels

BACKENDS = sorted(_kernels.IMPLEMENTATIONS)


def _c(a):
    return np.ascontiguousarray(a, dtype=np.complex128)


@pytest.fixture(params=BACKENDS)
def impl(request):
    return _kernels.IMPLEMENTATIONS[request.param]


def test_clenshaw_matches_cosine_definition(impl):
    theta = np.linspace(0, np.pi, 101)
    x = np.cos(theta)
    for d in (0, 1, 7, 50, 100):
        coeffs = np.zeros(d + 1, complex)
        coeffs[d] = 1.0
        got = impl["chebyshev_clenshaw"](_c(coeffs), x)
        assert np.max(np.abs(got - np.cos(d * theta))) <= 1e-10


def test_clenshaw_t3_at_half(impl):
    got = impl["chebyshev_clenshaw"](_c([0, 0, 0, 1]), np.array([0.5]))
    assert got[0] == pytest.approx(-1.0, abs=1e-15)


def test_horner_against_polyval(impl):
    rng = np.random.default_rng(1)
    c = rng.standard_normal(9) + 1j * rng.standard_normal(9)
    z = rng.standard_normal(20) + 1j * rng.standard_normal(20)
    got = impl["horner"](_c(c), _c(z))
    assert np.allclose(got, np.polyval(c[::-1], z), rtol=1e-12, atol=1e-12)


def test_elementary_symmetric_from_polynomial(impl):
    z = np.array([1.0, 2.0, -0.5 + 1j])
    e = impl["elementary_symmetric"](_c(z))
    # prod (x - z_k) = sum (-1)^k e_k x^(n-k)
    poly = np.poly(z)
    assert np.allclose(e, poly * (-1.0) ** np.arange(4))


def test_hankel_layout(impl):
    g = _c(np.arange(8))
    H = impl["hankel"](g, 3, 3, 1)
    expected = np.array([[1, 2, 3], [2, 3, 4], [3, 4, 5]])
    assert np.array_equal(H, expected)


def test_min_pairwise_distance(impl):
    assert impl["min_pairwise_distance"](_c([0, 1, 0.25j, 3])) == pytest.approx(0.25)
    assert impl["min_pairwise_distance"](_c([2.0])) == np.inf


def test_wrap_gap_uses_circle_metric(impl):
    f = np.array([0.05, 0.95, 0.5])
    assert impl["wrap_min_gap"](f) == pytest.approx(0.1)


@pytest.mark.skipif(len(BACKENDS) < 2, reason="numba unavailable")
def test_backends_agree():
    rng = np.random.default_rng(7)
    np_impl, nb_impl = (_kernels.IMPLEMENTATIONS[k] for k in ("numpy", "numba"))
    c = _c(rng.standard_normal(30) + 1j * rng.standard_normal(30))
    x = rng.uniform(-1, 1, 200)
    z = _c(rng.standard_normal(200) + 1j * rng.standard_normal(200)) / 3
    assert np.allclose(np_impl["chebyshev_clenshaw"](c, x), nb_impl["chebyshev_clenshaw"](c, x))
    assert np.allclose(np_impl["horner"](c, z), nb_impl["horner"](c, z))
    assert np.allclose(np_impl["elementary_symmetric"](z[:8]), nb_impl["elementary_symmetric"](z[:8]))
    assert np.array_equal(np_impl["hankel"](c, 10, 12, 3), nb_impl["hankel"](c, 10, 12, 3))
    assert np_impl["min_pairwise_distance"](z) == pytest.approx(nb_impl["min_pairwise_distance"](z))
    assert np_impl["wrap_min_gap"](x) == pytest.approx(nb_impl["wrap_min_gap"](x))


def test_env_flag_selects_numpy(monkeypatch):
    monkeypatch.setenv("PENCILSPEC_NUMBA", "0")
    assert not _kernels._env_wants_numba()
    monkeypatch.setenv("PENCILSPEC_NUMBA", "1")
    assert _kernels._env_wants_numba() or not _kernels.HAVE_NUMBA
