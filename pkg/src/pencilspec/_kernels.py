"""Inner-loop kernels with a numba path and a pure-numpy fallback.

The numba versions are used unless ``PENCILSPEC_NUMBA=0`` is set in the
environment (or numba cannot be imported). Both variants are always importable
through ``IMPLEMENTATIONS`` so tests and the benchmark can compare them.
"""

import os

import numpy as np

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False


def _env_wants_numba():
    flag = os.environ.get("PENCILSPEC_NUMBA", "1").strip().lower()
    return flag not in ("0", "false", "no", "off")


# ---------------------------------------------------------------- numpy path

def _chebyshev_clenshaw_np(coeffs, x):
    # f(x) = sum_k coeffs[k] T_k(x), evaluated pointwise on x
    x = np.asarray(x, dtype=np.float64)
    b1 = np.zeros(x.shape, dtype=np.complex128)
    b2 = np.zeros(x.shape, dtype=np.complex128)
    for k in range(len(coeffs) - 1, 0, -1):
        b1, b2 = coeffs[k] + 2.0 * x * b1 - b2, b1
    return coeffs[0] + x * b1 - b2


def _horner_np(coeffs, z):
    z = np.asarray(z, dtype=np.complex128)
    acc = np.zeros(z.shape, dtype=np.complex128)
    for k in range(len(coeffs) - 1, -1, -1):
        acc = acc * z + coeffs[k]
    return acc


def _elementary_symmetric_np(z):
    n = len(z)
    e = np.zeros(n + 1, dtype=np.complex128)
    e[0] = 1.0
    for k in range(n):
        e[1:k + 2] = e[1:k + 2] + z[k] * e[0:k + 1]
    return e


def _hankel_np(g, rows, cols, shift):
    idx = np.arange(rows)[:, None] + np.arange(cols)[None, :] + shift
    return np.asarray(g, dtype=np.complex128)[idx]


def _min_pairwise_distance_np(z):
    z = np.asarray(z, dtype=np.complex128)
    if len(z) < 2:
        return np.inf
    d = np.abs(z[:, None] - z[None, :])
    d[np.diag_indices(len(z))] = np.inf
    return float(d.min())


def _wrap_min_gap_np(freqs):
    f = np.mod(np.asarray(freqs, dtype=np.float64), 1.0)
    if len(f) < 2:
        return np.inf
    d = np.abs(f[:, None] - f[None, :])
    d = np.minimum(d, 1.0 - d)
    d[np.diag_indices(len(f))] = np.inf
    return float(d.min())


# ---------------------------------------------------------------- numba path

if HAVE_NUMBA:
    njit = numba.njit(cache=True, nogil=True)

    @njit
    def _chebyshev_clenshaw_nb(coeffs, x):
        # point loop innermost so it vectorizes across x
        n = x.shape[0]
        b1 = np.zeros(n, dtype=np.complex128)
        b2 = np.zeros(n, dtype=np.complex128)
        for k in range(coeffs.shape[0] - 1, 0, -1):
            ck = coeffs[k]
            for i in range(n):
                tmp = ck + 2.0 * x[i] * b1[i] - b2[i]
                b2[i] = b1[i]
                b1[i] = tmp
        out = np.empty(n, dtype=np.complex128)
        for i in range(n):
            out[i] = coeffs[0] + x[i] * b1[i] - b2[i]
        return out

    @njit
    def _horner_nb(coeffs, z):
        n = z.shape[0]
        acc = np.zeros(n, dtype=np.complex128)
        for k in range(coeffs.shape[0] - 1, -1, -1):
            ck = coeffs[k]
            for i in range(n):
                acc[i] = acc[i] * z[i] + ck
        return acc

    @njit
    def _elementary_symmetric_nb(z):
        n = z.shape[0]
        e = np.zeros(n + 1, dtype=np.complex128)
        e[0] = 1.0
        for k in range(n):
            for m in range(k + 1, 0, -1):
                e[m] += z[k] * e[m - 1]
        return e

    @njit
    def _hankel_nb(g, rows, cols, shift):
        out = np.empty((rows, cols), dtype=np.complex128)
        for j in range(rows):
            for k in range(cols):
                out[j, k] = g[j + k + shift]
        return out

    @njit
    def _min_pairwise_distance_nb(z):
        # compare squared distances; one sqrt at the end
        best = np.inf
        re = z.real.copy()
        im = z.imag.copy()
        for j in range(z.shape[0]):
            for k in range(j + 1, z.shape[0]):
                dr = re[j] - re[k]
                di = im[j] - im[k]
                d = dr * dr + di * di
                if d < best:
                    best = d
        return np.sqrt(best)

    @njit
    def _wrap_min_gap_nb(freqs):
        best = np.inf
        n = freqs.shape[0]
        for j in range(n):
            for k in range(j + 1, n):
                d = abs(freqs[j] - freqs[k]) % 1.0
                d = min(d, 1.0 - d)
                if d < best:
                    best = d
        return best


IMPLEMENTATIONS = {
    "numpy": {
        "chebyshev_clenshaw": _chebyshev_clenshaw_np,
        "horner": _horner_np,
        "elementary_symmetric": _elementary_symmetric_np,
        "hankel": _hankel_np,
        "min_pairwise_distance": _min_pairwise_distance_np,
        "wrap_min_gap": _wrap_min_gap_np,
    }
}
if HAVE_NUMBA:
    IMPLEMENTATIONS["numba"] = {
        "chebyshev_clenshaw": _chebyshev_clenshaw_nb,
        "horner": _horner_nb,
        "elementary_symmetric": _elementary_symmetric_nb,
        "hankel": _hankel_nb,
        "min_pairwise_distance": _min_pairwise_distance_nb,
        "wrap_min_gap": _wrap_min_gap_nb,
    }

BACKEND = "numba" if (HAVE_NUMBA and _env_wants_numba()) else "numpy"
_active = IMPLEMENTATIONS[BACKEND]


def chebyshev_clenshaw(coeffs, x):
    """Sum of ``coeffs[k] * T_k(x)`` for each point of ``x`` (standard, unscaled T_0)."""
    return _active["chebyshev_clenshaw"](
        np.ascontiguousarray(coeffs, dtype=np.complex128),
        np.ascontiguousarray(np.atleast_1d(x), dtype=np.float64))


def horner(coeffs, z):
    return _active["horner"](
        np.ascontiguousarray(coeffs, dtype=np.complex128),
        np.ascontiguousarray(np.atleast_1d(z), dtype=np.complex128))


def elementary_symmetric(z):
    """Return ``[e_0, e_1, ..., e_n]`` of the values ``z``."""
    return _active["elementary_symmetric"](np.ascontiguousarray(z, dtype=np.complex128))


def hankel(g, rows, cols, shift=0):
    g = np.ascontiguousarray(g, dtype=np.complex128)
    return _active["hankel"](g, int(rows), int(cols), int(shift))


def min_pairwise_distance(z):
    return float(_active["min_pairwise_distance"](np.ascontiguousarray(z, dtype=np.complex128)))


def wrap_min_gap(freqs):
    """Minimal pairwise distance of ``freqs`` on the circle of circumference one."""
    return float(_active["wrap_min_gap"](np.ascontiguousarray(freqs, dtype=np.float64)))
