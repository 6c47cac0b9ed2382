"""Hankel pencils, sparsity estimation, generalized eigenvalues and the map
back to eigenvalue estimates."""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import _kernels
from .errors import AllSingular, PreconditionError, SeriesTooShort, SingularPencil, ZeroModulus
from .signals import Family, SignalFamily
from .spectral import spectral_order

TAU_REL = 1e-6
TAU_ABS_FACTOR = 10.0
MERGE_TOL = 1e-9
SINGULAR_RTOL = 1e-14


@dataclass(frozen=True)
class HankelPair:
    H0: np.ndarray
    H1: np.ndarray
    R_built: int
    r_est: int


def build_hankel_pair(series, r, R_built=None):
    """r x r matrices H0[j, k] = g(j + k) and H1[j, k] = g(j + k + 1)."""
    r = int(r)
    if r < 1:
        raise PreconditionError("pencil size must be positive")
    g = np.asarray(getattr(series, "values", series))
    if len(g) < 2 * r:
        raise SeriesTooShort(f"need {2 * r} samples for a {r}x{r} pencil, have {len(g)}")
    H0 = _kernels.hankel(g, r, r, 0)
    H1 = _kernels.hankel(g, r, r, 1)
    return HankelPair(H0, H1, R_built=int(R_built or r), r_est=r)


def sparsity_threshold(sv, noise_scale, R, tau_rel=TAU_REL, tau_abs_factor=TAU_ABS_FACTOR):
    return max(tau_rel * sv[0], tau_abs_factor * noise_scale * R)


def estimate_sparsity(series, R, noise_scale=None, tau_rel=TAU_REL, tau_abs_factor=TAU_ABS_FACTOR):
    """Numerical rank of the R x R Hankel matrix above the noise-aware threshold."""
    g = np.asarray(series.values)
    if len(g) < 2 * R:
        raise SeriesTooShort(f"need {2 * R} samples for an {R}x{R} Hankel matrix, have {len(g)}")
    if noise_scale is None:
        noise_scale = series.noise_scale
    sv = np.linalg.svd(_kernels.hankel(g, R, R, 0), compute_uv=False)
    if sv[0] == 0.0:
        raise AllSingular("signal is identically zero")
    r = int(np.sum(sv > sparsity_threshold(sv, noise_scale, R, tau_rel, tau_abs_factor)))
    if r == 0:
        raise AllSingular("no singular value rises above the noise threshold")
    return r


@dataclass(frozen=True)
class PencilSolution:
    nodes: np.ndarray
    right: np.ndarray
    left_scaled: np.ndarray


def _reduced_pencil(pair):
    r = pair.r_est
    U, s, Vh = np.linalg.svd(pair.H0)
    if r < 1 or r > len(s):
        raise PreconditionError(f"pencil rank {r} incompatible with a {pair.H0.shape} Hankel")
    if s[r - 1] <= SINGULAR_RTOL * max(s[0], np.finfo(float).tiny):
        raise SingularPencil(f"sigma_{r}(H0) = {s[r - 1]:.3g} is at machine level")
    U, s, V = U[:, :r], s[:r], Vh[:r].conj().T
    M = (U.conj().T @ pair.H1 @ V) / s[:, None]
    return U, s, V, M


def solve_pencil(pair):
    """Eigenvalues of the rank-r reduction of H0^+ H1 with eigenvector data.

    ``right[:, j]`` is the pencil right vector (unit norm); ``left_scaled[:, j]``
    is the left vector normalized so that y^H H0 x = 1.
    """
    U, s, V, M = _reduced_pencil(pair)
    z, X = np.linalg.eig(M)
    X = X / np.linalg.norm(X, axis=0)
    W = np.linalg.inv(X)
    right = V @ X
    left = U @ (W.conj().T / s[:, None])
    order = spectral_order(z)
    return PencilSolution(z[order], right[:, order], left[:, order])


def merge_close(z, tol=MERGE_TOL):
    """Replace clusters of nodes closer than ``tol`` by their mean."""
    z = list(np.asarray(z, dtype=np.complex128))
    merged = []
    while z:
        head = z.pop(0)
        group = [head] + [w for w in z if abs(w - head) < tol]
        z = [w for w in z if abs(w - head) >= tol]
        merged.append(np.mean(group))
    out = np.array(merged, dtype=np.complex128)
    return out[spectral_order(out)]


def solve_gevp(pair):
    return merge_close(solve_pencil(pair).nodes)


def postprocess(z_hat, family, alpha=None):
    """Map generalized eigenvalues to eigenvalue estimates for the given family."""
    tag = family.tag if isinstance(family, SignalFamily) else Family(family)
    if alpha is None:
        alpha = family.alpha
    z = np.asarray(z_hat, dtype=np.complex128)
    if tag is Family.POWER:
        return z.copy()
    if np.any(np.abs(z) == 0) or not np.all(np.isfinite(z)):
        raise ZeroModulus("zero or non-finite generalized eigenvalue has no argument")
    if tag is Family.FOURIER:
        return (-alpha * np.angle(z / np.abs(z)) / (2 * np.pi)).astype(np.complex128)
    return alpha * np.log(z)


def postprocess_derivative(z, family, alpha):
    """|d lambda / d z| for propagating node errors to eigenvalue errors."""
    tag = family.tag if isinstance(family, SignalFamily) else Family(family)
    z = np.abs(np.asarray(z))
    if tag is Family.POWER:
        return np.ones_like(z)
    with np.errstate(divide="ignore"):
        if tag is Family.FOURIER:
            return alpha / (2 * np.pi * z)
        return alpha / z


@dataclass(frozen=True)
class MatchResult:
    pairs: tuple
    matched_error: float
    one_sided_error: float
    unmatched_estimates: tuple
    unmatched_truth: tuple


def match_eigenvalues(lambda_hat, truth):
    est = np.asarray(lambda_hat, dtype=np.complex128).ravel()
    ref = np.asarray(truth, dtype=np.complex128).ravel()
    if len(est) == 0 or len(ref) == 0:
        raise PreconditionError("both eigenvalue sets must be nonempty")
    cost = np.abs(est[:, None] - ref[None, :])
    rows, cols = linear_sum_assignment(cost)
    pairs = tuple((int(i), int(j)) for i, j in zip(rows, cols))
    return MatchResult(
        pairs=pairs,
        matched_error=float(cost[rows, cols].max()),
        one_sided_error=float(cost.min(axis=1).max()),
        unmatched_estimates=tuple(int(i) for i in range(len(est)) if i not in set(rows)),
        unmatched_truth=tuple(int(j) for j in range(len(ref)) if j not in set(cols)))


def power_vandermonde(z, rows):
    """W[a, j] = z_j ** a for a = 0..rows-1, so that H0 = W diag(c) W^T."""
    z = np.asarray(z, dtype=np.complex128)
    return z[None, :] ** np.arange(rows)[:, None]


def vandermonde_residual(pair, z, c):
    z = np.asarray(z, dtype=np.complex128)
    c = np.asarray(c, dtype=np.complex128)
    W = power_vandermonde(z, pair.H0.shape[0])
    res0 = np.linalg.norm(pair.H0 - (W * c) @ W.T, 2)
    res1 = np.linalg.norm(pair.H1 - (W * (c * z)) @ W.T, 2)
    return float(res0), float(res1)


def fit_coefficients(series, z, t_start=0):
    """Least-squares amplitudes for the nodes ``z`` using samples from ``t_start`` on."""
    g = np.asarray(getattr(series, "values", series))[t_start:]
    z = np.asarray(z, dtype=np.complex128)
    if len(z) == 0:
        return np.zeros(0, dtype=np.complex128)
    t = np.arange(t_start, t_start + len(g))
    V = z[None, :] ** t[:, None]
    c, *_ = np.linalg.lstsq(V, g, rcond=None)
    return c


def prony_roots(series, r):
    """Roots of the Prony polynomial from the linear prediction system.

    Independent of the pencil solver; used as a cross-check.
    """
    g = np.asarray(series.values)
    if len(g) < 2 * r:
        raise SeriesTooShort(f"need {2 * r} samples, have {len(g)}")
    H = _kernels.hankel(g, r, r, 0)
    rhs = -g[r:2 * r]
    p = np.linalg.solve(H, rhs)
    # z^r + p[r-1] z^(r-1) + ... + p[0]
    return np.roots(np.concatenate([[1.0], p[::-1]]))


def node_error_estimates(solution, noise_norm, floor=0.0):
    """First-order bound |dz| <= ||E|| (1 + |z|) ||x|| ||y|| per mode."""
    x = np.linalg.norm(solution.right, axis=0)
    y = np.linalg.norm(solution.left_scaled, axis=0)
    return noise_norm * (1 + np.abs(solution.nodes)) * x * y + floor


@dataclass(frozen=True)
class EstimateReport:
    z_hat: np.ndarray
    lambda_hat: np.ndarray
    family: SignalFamily
    cost_total: int
    r_est: int
    coeffs: np.ndarray
    error_estimate: np.ndarray
    noise_scale: float
    possible_zero: bool = False
    matched_error: Optional[float] = None
    one_sided_error: Optional[float] = None
    unmatched_estimates: tuple = ()
    dropped_zero_nodes: int = 0
    notes: tuple = field(default_factory=tuple)

    def to_dict(self):
        def cplx(a):
            return [[float(v.real), float(v.imag)] for v in np.asarray(a)]
        return {
            "family": self.family.tag.value, "alpha": self.family.alpha,
            "z_hat": cplx(self.z_hat), "lambda_hat": cplx(self.lambda_hat),
            "coeffs": cplx(self.coeffs), "error_estimate": [float(e) for e in self.error_estimate],
            "cost_total": int(self.cost_total), "r_est": int(self.r_est),
            "noise_scale": float(self.noise_scale), "possible_zero": bool(self.possible_zero),
            "matched_error": self.matched_error, "one_sided_error": self.one_sided_error,
            "unmatched_estimates": list(self.unmatched_estimates),
            "dropped_zero_nodes": int(self.dropped_zero_nodes), "notes": list(self.notes),
        }


def estimate_from_series(series, *, r=None, R=None, truth=None, tau_rel=TAU_REL,
                         tau_abs_factor=TAU_ABS_FACTOR):
    """Run the pencil pipeline on a sampled series.

    ``R`` is the probe dimension for sparsity estimation (defaults to half the
    series length); pass ``r`` to skip estimation.
    """
    family = series.family
    g = np.asarray(series.values)
    if R is None:
        R = len(g) // 2
    if r is None:
        r = estimate_sparsity(series, R, series.noise_scale, tau_rel, tau_abs_factor)
    pair = build_hankel_pair(series, r, R_built=R)
    sol = solve_pencil(pair)
    eps = np.finfo(float).eps
    noise_norm = r * series.noise_scale
    floor = 10 * eps * max(1.0, np.linalg.norm(pair.H0, 2))
    node_err = node_error_estimates(sol, noise_norm + floor)

    z = sol.nodes
    notes = []
    dropped = 0
    possible_zero = False
    if family.tag is Family.POWER:
        # A zero eigenvalue only shows up in g(0); its node is numerically zero.
        # Node errors comparable to the largest node carry no information about
        # whether a node is zero; those nodes only face the rounding floor.
        scale = max(1.0, np.max(np.abs(z)))
        informative = node_err < 0.5 * np.max(np.abs(z))
        zero_floor = np.where(informative, np.maximum(node_err, 1e-8 * scale), 1e-8 * scale)
        keep = np.abs(z) > zero_floor
        dropped = int(np.sum(~keep))
        z, node_err = z[keep], node_err[keep]
        merged = merge_close(z)
        if len(merged) != len(z):
            node_err = np.full(len(merged), np.max(node_err) if len(node_err) else 0.0)
            z = merged
        coeffs = fit_coefficients(g, z, t_start=1) if len(z) else np.zeros(0, complex)
        tol = max(3 * series.noise_scale * np.sqrt(len(g)), 1e-8 * max(1.0, abs(g[0])))
        if dropped or abs(g[0] - np.sum(coeffs)) > tol:
            possible_zero = True
            notes.append("possible zero eigenvalue: the power family cannot resolve it; "
                         "rerun with the exponential family")
    else:
        merged = merge_close(z)
        if len(merged) != len(z):
            node_err = np.full(len(merged), np.max(node_err))
            z = merged
        coeffs = fit_coefficients(g, z)

    lam = postprocess(z, family) if len(z) else np.zeros(0, complex)
    lam_err = node_err * postprocess_derivative(z, family, family.alpha)
    order = spectral_order(lam)
    z, lam, lam_err, coeffs = z[order], lam[order], lam_err[order], coeffs[order]

    matched = one_sided = None
    unmatched = ()
    if truth is not None and len(lam):
        m = match_eigenvalues(lam, truth)
        matched, one_sided, unmatched = m.matched_error, m.one_sided_error, m.unmatched_estimates
    return EstimateReport(
        z_hat=z, lambda_hat=lam, family=family, cost_total=series.cost_total, r_est=r,
        coeffs=coeffs, error_estimate=lam_err, noise_scale=series.noise_scale,
        possible_zero=possible_zero, matched_error=matched, one_sided_error=one_sided,
        unmatched_estimates=unmatched, dropped_zero_nodes=dropped, notes=tuple(notes))


def estimate_eigenvalues(model, expansion, family, R, access, *, r=None, trial=0,
                         truth=None, alpha_p=None, rng=None, **kwargs):
    """Sample the signal through ``access`` and run the pencil pipeline."""
    from .access import sample_series
    series = sample_series(model, expansion, family, R, access, rng, trial=trial, alpha_p=alpha_p)
    return estimate_from_series(series, r=r, R=R, truth=truth, **kwargs)
