"""Closed-form conditioning, perturbation, concentration and cost formulas,
plus Monte Carlo experiments that test them.

Asymptotic cost formulas are evaluated with unit leading constants by default;
they are scaling models, not absolute predictions.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .errors import CoincidentNodes, MissingParameter, PreconditionError, PreconditionViolated

COINCIDENT_TOL = 1e-12


@dataclass
class BoundReport:
    name: str
    predicted: float
    observed: Optional[float] = None
    satisfied: Optional[bool] = None
    params: dict = field(default_factory=dict)
    model: str = "bound"

    def to_dict(self):
        def clean(v):
            if isinstance(v, (complex, np.complexfloating)):
                return [float(v.real), float(v.imag)]
            if isinstance(v, (np.floating, np.integer)):
                return v.item()
            return v
        return {"name": self.name, "predicted": clean(self.predicted),
                "observed": clean(self.observed), "satisfied": self.satisfied,
                "model": self.model,
                "params": {k: clean(v) for k, v in sorted(self.params.items())}}


# ---------------------------------------------------------------- Vandermonde

def vandermonde(z, rows=None):
    """Power-indexed Vandermonde: entry [a, j] = z_j ** a, a = 0..rows-1."""
    z = np.asarray(z, dtype=np.complex128)
    rows = len(z) if rows is None else int(rows)
    return z[None, :] ** np.arange(rows)[:, None]


def node_vandermonde(z):
    """Node-indexed Vandermonde: entry [j, k] = z_j ** k."""
    return vandermonde(z).T


def vandermonde_inverse_explicit(z):
    """Closed-form inverse of the node-indexed Vandermonde matrix.

    Entry [j, k] (1-based j) is (-1)^(r-j) e_{r-j}(z without z_k) / prod_{l != k}(z_k - z_l),
    so that ``node_vandermonde(z) @ W = I``.
    """
    z = np.asarray(z, dtype=np.complex128)
    r = len(z)
    if r == 0:
        raise PreconditionError("need at least one node")
    if r > 1 and _kernels.min_pairwise_distance(z) <= COINCIDENT_TOL:
        raise CoincidentNodes("nodes are not pairwise distinct")
    W = np.empty((r, r), dtype=np.complex128)
    for k in range(r):
        others = np.delete(z, k)
        e = _kernels.elementary_symmetric(others)
        denom = np.prod(z[k] - others)
        for j in range(1, r + 1):
            W[j - 1, k] = (-1) ** (r - j) * e[r - j] / denom
    return W


def kappa_V(z, rows=None):
    sv = np.linalg.svd(vandermonde(z, rows), compute_uv=False)
    return float(sv[0] / sv[-1])


def sigma_min_V(z, rows=None):
    return float(np.linalg.svd(vandermonde(z, rows), compute_uv=False)[-1])


def kappa_bound_general(r, Delta):
    if r < 1 or not (0 < Delta <= 2):
        raise PreconditionError("need r >= 1 and Delta in (0, 2]")
    return 2 ** r * r / (math.sqrt(math.pi) * Delta ** (r - 1))


def vinv_frobenius_bound(r, Delta):
    """sqrt(r * binom(2r-2, r-1)) / Delta^(r-1), the pre-Stirling Frobenius bound."""
    return math.sqrt(r * math.comb(2 * r - 2, r - 1)) / Delta ** (r - 1)


def kappa_bound_fourier(r, Delta_w):
    """Square root of (r + 1/Dw - 1)/(r - 1/Dw - 1) for ``r`` rows and wrap gap ``Delta_w`` in cycles."""
    if not Delta_w > 0 or not r > 1 / Delta_w + 1:
        raise PreconditionViolated(f"need r > 1/Delta_w + 1 (r={r}, Delta_w={Delta_w})")
    return math.sqrt((r + 1 / Delta_w - 1) / (r - 1 / Delta_w - 1))


def frobenius_inflation(eps_entry, r):
    """Operator-norm budget r * eps for an r x r matrix with entries off by at most eps."""
    return r * eps_entry


def perturbation_bound(E_norm, kappaV, sigma_minV, c_min):
    return E_norm * (kappaV ** 2 + kappaV) / (sigma_minV ** 2 * c_min)


def fourier_perturbation_bound(E_norm, kappaV, r, c_min):
    return E_norm * (kappaV ** 4 + kappaV ** 3) / (r * c_min)


def bernstein_tail(r, m, gamma, R_bound=None, sigma2=None):
    if R_bound is None:
        R_bound = 2 * math.sqrt(2) * r
    if sigma2 is None:
        sigma2 = 2 * r * m
    if gamma == 0:
        return 2.0 * r
    return 2 * r * math.exp(-(gamma ** 2 / 2) / (sigma2 + R_bound * gamma / 3))


def sample_complexity_general(r, Delta, eps1, c_min, delta, C=1.0):
    if r < 1 or not (Delta > 0 and eps1 > 0 and c_min > 0 and 0 < delta < 1):
        raise PreconditionError("invalid parameters for the sample-complexity formula")
    m = C * r ** 5 * 2 ** (8 * r) / (Delta ** (4 * r) * eps1 * c_min) ** 2 * math.log(r / delta)
    return max(int(math.ceil(m)), 1)


# ---------------------------------------------------------------- cost models

THEOREMS = ("GeneralSample", "GeneralPurified", "RealSample", "RealPurified",
            "ComplexSample", "ComplexPurified")


def _log(x):
    return max(math.log(x), 1.0)


def _need(params, *keys):
    missing = [k for k in keys if params.get(k) is None]
    if missing:
        raise MissingParameter(f"missing parameter(s): {', '.join(missing)}")
    return [float(params[k]) for k in keys]


def qevt_degree(theorem, params):
    """Polynomial degree d of the real (Chebyshev) or complex (Faber) signal kernels."""
    r, eps, c = _need(params, "r", "eps", "c_min")
    if theorem in ("RealSample", "RealPurified"):
        kJ, kV, alpha = _need(params, "kappa_J", "kappa_V", "alpha_A")
        return r + _log(kJ * kV * alpha / (c * eps))
    if theorem in ("ComplexSample", "ComplexPurified"):
        Dp, zeta = _need(params, "Delta_prime", "zeta")
        return math.exp(zeta) * r + _log(r ** 3 * 2 ** (4 * r) / (eps * c * Dp ** (4 * r)))
    raise PreconditionError(f"{theorem} uses no polynomial approximation")


def query_cost_model(theorem, params):
    """(max coherent queries, sample count, total queries) with unit constants.

    ``params`` keys: r, eps, delta, c_min, alpha_A and, depending on the
    theorem, Delta_prime, kappa_J, kappa_V, zeta, alpha_beta, alpha_F.
    """
    if theorem not in THEOREMS:
        raise PreconditionError(f"unknown theorem {theorem!r}; expected one of {THEOREMS}")
    r, eps, delta, c, alpha = _need(params, "r", "eps", "delta", "c_min", "alpha_A")
    if theorem == "GeneralSample":
        (Dp,) = _need(params, "Delta_prime")
        samples = r ** 5 * alpha ** (4 * r) * 2 ** (8 * r) / (Dp ** (4 * r) * eps * c) ** 2 * _log(2 * r / delta)
        return r, samples, r * samples
    if theorem == "GeneralPurified":
        (Dp,) = _need(params, "Delta_prime")
        block = 2 ** (4 * r) * alpha ** (2 * r) / (Dp ** (4 * r) * eps * c) * _log(r / delta)
        return r ** 3 * block, r, r ** 4 * block
    if theorem in ("RealSample", "RealPurified"):
        kJ, kV = _need(params, "kappa_J", "kappa_V")
        d = qevt_degree(theorem, params)
        depth = d ** 1.5 * kJ ** 2 * _log(r * math.sqrt(d) * kJ * alpha * kV / (c * eps)) \
            * _log(r * alpha * kV / (c * eps))
        if theorem == "RealSample":
            samples = kV ** 8 * alpha ** 2 / (c * eps) ** 2 * _log(r / delta)
            return depth, samples, depth * samples
        coherent = alpha * kV ** 4 / (c * eps) * depth * _log(r / delta)
        return coherent, r, r * coherent
    Dp, zeta, a_beta, a_F = _need(params, "Delta_prime", "zeta", "alpha_beta", "alpha_F")
    X = r ** 3 * 2 ** (4 * r) / (eps * c * Dp ** (4 * r))
    d = qevt_degree(theorem, params)
    depth = a_beta * d ** 1.5 * a_F ** 2 * _log(alpha * a_beta * math.sqrt(d) * a_F * X) * _log(alpha * X)
    if theorem == "ComplexSample":
        samples = r ** 5 * 2 ** (8 * r) * alpha ** 2 / (Dp ** (4 * r) * eps * c) ** 2 * _log(r / delta)
        return depth, samples, depth * samples
    coherent = alpha * X * depth
    return coherent, r, r * coherent * _log(r / delta)


def instance_bound_reports(nodes, coeffs, *, E_norm, alpha, kappa_J, eps, delta,
                           family="power", wrap_gap=None):
    """Every applicable closed-form bound evaluated at one instance's parameters.

    ``nodes`` are the signal nodes z_j (the generalized eigenvalues) and
    ``coeffs`` their amplitudes.
    """
    z = np.asarray(nodes, dtype=np.complex128)
    c = np.asarray(coeffs, dtype=np.complex128)
    r = len(z)
    c_min = float(np.min(np.abs(c)))
    gap = _kernels.min_pairwise_distance(z) if r > 1 else 2.0
    kV, sV = kappa_V(z), sigma_min_V(z)
    base = {"r": r, "Delta": gap, "c_min": c_min, "E_norm": E_norm, "alpha_A": alpha,
            "kappa_J": kappa_J, "kappa_V": kV, "sigma_min_V": sV, "eps": eps, "delta": delta}
    out = [BoundReport("kappa_V", kV, kV, True, dict(base), model="exact")]
    if 0 < gap <= 2:
        kb = kappa_bound_general(r, gap)
        out.append(BoundReport("kappa_bound_general", kb, kV, kV <= kb, dict(base)))
        out.append(BoundReport("sample_complexity_general",
                               sample_complexity_general(r, gap, eps, c_min, delta),
                               params=dict(base), model="scaling model"))
    out.append(BoundReport("frobenius_inflation", frobenius_inflation(E_norm / max(r, 1), r),
                           params=dict(base)))
    out.append(BoundReport("perturbation_bound", perturbation_bound(E_norm, kV, sV, c_min),
                           params=dict(base)))
    if family == "fourier":
        out.append(BoundReport("fourier_perturbation_bound",
                               fourier_perturbation_bound(E_norm, kV, r, c_min), params=dict(base)))
        if wrap_gap is not None and wrap_gap > 0 and r > 1 / wrap_gap + 1:
            fb = kappa_bound_fourier(r, wrap_gap)
            out.append(BoundReport("kappa_bound_fourier", fb, kV, kV <= fb,
                                   dict(base, Delta_w=wrap_gap)))
    cost_params = {"r": r, "eps": eps, "delta": delta, "c_min": c_min, "alpha_A": alpha,
                   "Delta_prime": gap, "kappa_J": kappa_J, "kappa_V": kV, "zeta": 0.0,
                   "alpha_beta": 1.0, "alpha_F": 1.0}
    theorems = {"power": ("GeneralSample", "GeneralPurified"),
                "fourier": ("RealSample", "RealPurified"),
                "exponential": ("ComplexSample", "ComplexPurified")}[family]
    for th in theorems:
        coherent, samples, total = query_cost_model(th, cost_params)
        for label, val in (("coherent", coherent), ("samples", samples), ("total", total)):
            out.append(BoundReport(f"{th}.{label}", val, params=dict(cost_params),
                                   model="scaling model"))
    return out


# ---------------------------------------------------------------- experiments

def _scaled_noise(rng, r, E_norm):
    E = rng.standard_normal((r, r)) + 1j * rng.standard_normal((r, r))
    return E * (E_norm / np.linalg.norm(E, 2))


def _one_sided(est, ref):
    return float(np.max(np.min(np.abs(np.asarray(est)[:, None] - np.asarray(ref)[None, :]), axis=1)))


def perturbation_experiment(z, c, E_norm, trials, rng, fourier=False):
    """Shift of the pencil eigenvalues under random perturbations of norm ``E_norm``.

    Returns a list of :class:`BoundReport`, one per trial, against the general
    bound (and the Fourier bound when ``fourier`` is set).
    """
    from .pencil import HankelPair, solve_gevp

    z = np.asarray(z, dtype=np.complex128)
    c = np.asarray(c, dtype=np.complex128)
    r = len(z)
    W = vandermonde(z)
    H0 = (W * c) @ W.T
    H1 = (W * (c * z)) @ W.T
    kV, sV, c_min = kappa_V(z), sigma_min_V(z), float(np.min(np.abs(c)))
    general = perturbation_bound(E_norm, kV, sV, c_min)
    fb = fourier_perturbation_bound(E_norm, kV, r, c_min) if fourier else None
    params = {"r": r, "E_norm": E_norm, "kappa_V": kV, "sigma_min_V": sV, "c_min": c_min,
              "Delta": _kernels.min_pairwise_distance(z)}
    reports = []
    for _ in range(trials):
        E0, E1 = _scaled_noise(rng, r, E_norm), _scaled_noise(rng, r, E_norm)
        zt = solve_gevp(HankelPair(H0 + E0, H1 + E1, r, r))
        shift = _one_sided(zt, z)
        reports.append(BoundReport("gevp_shift", general, shift, shift <= 2 * general, dict(params)))
        if fourier:
            reports.append(BoundReport("fourier_gevp_shift", fb, shift, shift <= 2 * fb, dict(params)))
    return reports


def noise_matrix_sum(r, m, p, rng):
    """Sum of m Hankel noise matrices whose entries are centered +-1 outcomes.

    Entry (j, k) depends only on j + k, so the sum is the Hankel matrix of the
    centered outcome totals over the 2r - 1 distinct time indices.
    """
    p = np.asarray(p, dtype=np.float64)
    totals = 2.0 * rng.binomial(m, p) - m - m * (2 * p - 1)
    return _kernels.hankel(totals, r, r, 0)


def bernstein_experiment(r, m, gammas, trials, rng, p=None):
    """Empirical tail frequencies of ||sum Z_i|| against :func:`bernstein_tail`."""
    if p is None:
        p = rng.uniform(0.1, 0.9, size=2 * r - 1)
    norms = np.array([np.linalg.norm(noise_matrix_sum(r, m, p, rng), 2) for _ in range(trials)])
    reports = []
    for g in gammas:
        freq = float(np.mean(norms >= g))
        bound = bernstein_tail(r, m, g)
        reports.append(BoundReport("bernstein_tail", bound, freq, freq <= bound,
                                   {"r": r, "m": m, "gamma": g, "trials": trials,
                                    "R_bound": 2 * math.sqrt(2) * r, "sigma2": 2 * r * m}))
    return reports
