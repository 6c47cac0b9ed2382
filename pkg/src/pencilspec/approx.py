"""Truncated Chebyshev (interval) and Faber (unit disk) expansions of the
signal kernels, with a-posteriori truncation-order selection."""

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import _kernels
from .errors import DomainViolation, PreconditionError
from .signals import Family, SignalSeries

DOMAIN_TOL = 1e-12
MATRIX_DOMAIN_TOL = 1e-9
GRID_POINTS = 1000


@dataclass(frozen=True)
class Kernel:
    """Scalar kernel x -> f(x) on the normalized spectrum."""

    family: str
    t: float = 0.0
    func: Optional[Callable] = None

    def __call__(self, x):
        x = np.asarray(x, dtype=np.complex128)
        if self.family == "fourier":
            return np.exp(-2j * np.pi * x * self.t)
        if self.family == "exponential":
            return np.exp(x * self.t)
        if self.func is None:
            raise PreconditionError("custom kernel needs a callable")
        return np.asarray(self.func(x), dtype=np.complex128)

    @classmethod
    def custom(cls, func, label="custom"):
        return cls(label, 0.0, func)


@dataclass(frozen=True)
class PolySeries:
    """``coeffs`` are the standard-convention coefficients: f = sum beta_j T_j
    (Chebyshev) or f = sum beta_j z^j (Faber on the unit disk)."""

    basis: str
    coeffs: np.ndarray
    target: Optional[Kernel] = None

    def __post_init__(self):
        if self.basis not in ("chebyshev", "faber_disk"):
            raise PreconditionError(f"unknown basis {self.basis!r}")
        c = np.array(self.coeffs, dtype=np.complex128)
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self):
        return len(self.coeffs) - 1

    @property
    def rescaled_coeffs(self):
        """Coefficients against the rescaled basis with T_0 halved (first entry doubled)."""
        c = np.array(self.coeffs)
        if self.basis == "chebyshev":
            c[0] *= 2
        return c


def _as_kernel(f):
    return f if isinstance(f, Kernel) else Kernel.custom(f)


def chebyshev_coeffs(f, d):
    """Chebyshev-Gauss projection of ``f`` onto T_0..T_{d-1} using 4d nodes."""
    d = int(d)
    if d < 1:
        raise PreconditionError("d must be at least 1")
    f = _as_kernel(f)
    M = 4 * d
    theta = np.pi * (np.arange(M) + 0.5) / M
    fx = f(np.cos(theta))
    beta = (2.0 / M) * (np.cos(np.outer(np.arange(d), theta)) @ fx)
    beta[0] /= 2
    return PolySeries("chebyshev", beta, f)


def faber_disk_coeffs(f, d):
    """Taylor coefficients of ``f`` at 0 (Faber polynomials are monomials on the disk).

    Exponential kernels use the closed form t^k / k!; other callables use a
    trapezoid Cauchy integral on the unit circle.
    """
    d = int(d)
    if d < 1:
        raise PreconditionError("d must be at least 1")
    f = _as_kernel(f)
    if f.family == "exponential":
        c = np.empty(d, dtype=np.complex128)
        c[0] = 1.0
        for k in range(1, d):
            c[k] = c[k - 1] * f.t / k
        return PolySeries("faber_disk", c, f)
    M = max(4 * d, 64)
    zs = np.exp(2j * np.pi * np.arange(M) / M)
    c = np.fft.fft(f(zs))[:d] / M
    return PolySeries("faber_disk", c, f)


def _check_scalar_domain(series, x):
    x = np.asarray(x)
    if series.basis == "chebyshev":
        if np.iscomplexobj(x) and np.any(np.abs(x.imag) > DOMAIN_TOL):
            raise DomainViolation("Chebyshev series evaluated off the real axis")
        xr = np.real(x)
        if np.any(np.abs(xr) > 1 + DOMAIN_TOL):
            raise DomainViolation("Chebyshev series evaluated outside [-1, 1]")
        return np.clip(xr, -1.0, 1.0)
    if np.any(np.abs(x) > 1 + DOMAIN_TOL):
        raise DomainViolation("Faber-disk series evaluated outside the unit disk")
    return x


def eval_series_scalar(series, x):
    """Clenshaw (Chebyshev) or Horner (disk) evaluation; scalar in, scalar out."""
    scalar = np.ndim(x) == 0
    pts = _check_scalar_domain(series, x)
    if series.basis == "chebyshev":
        out = _kernels.chebyshev_clenshaw(series.coeffs, np.ravel(pts))
    else:
        out = _kernels.horner(series.coeffs, np.ravel(pts))
    out = out.reshape(np.shape(x))
    return complex(out) if scalar else out


def eval_series_naive(series, x):
    """Term-by-term sum, used as a reference for the stable evaluators."""
    x = np.asarray(x, dtype=np.complex128)
    out = np.zeros(x.shape, dtype=np.complex128)
    if series.basis == "chebyshev":
        theta = np.arccos(np.clip(x.real, -1, 1))
        for j, b in enumerate(series.coeffs):
            out += b * np.cos(j * theta)
    else:
        for j, b in enumerate(series.coeffs):
            out += b * x ** j
    return out


def eval_series_matrix(series, X):
    """Matrix Clenshaw / Horner evaluation of the series at a normalized matrix."""
    X = np.asarray(X, dtype=np.complex128)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        from .errors import NonSquare
        raise NonSquare(f"expected a square matrix, got shape {X.shape}")
    eig = np.linalg.eigvals(X)
    if np.max(np.abs(eig)) > 1 + MATRIX_DOMAIN_TOL:
        raise DomainViolation(f"spectral radius {np.max(np.abs(eig)):.6g} exceeds 1")
    if series.basis == "chebyshev" and np.max(np.abs(eig.imag)) > MATRIX_DOMAIN_TOL:
        raise DomainViolation("Chebyshev series needs a real spectrum")
    n = X.shape[0]
    eye = np.eye(n, dtype=np.complex128)
    c = series.coeffs
    if series.basis == "chebyshev":
        b1 = np.zeros_like(X)
        b2 = np.zeros_like(X)
        for k in range(len(c) - 1, 0, -1):
            b1, b2 = c[k] * eye + 2 * (X @ b1) - b2, b1
        return c[0] * eye + X @ b1 - b2
    acc = np.zeros_like(X)
    for k in range(len(c) - 1, -1, -1):
        acc = X @ acc + c[k] * eye
    return acc


def _grid(basis):
    if basis == "chebyshev":
        return np.linspace(-1.0, 1.0, GRID_POINTS)
    return np.exp(2j * np.pi * np.arange(GRID_POINTS) / GRID_POINTS)


def sup_error(series, f=None):
    """Max |series - f| on the validation grid (boundary circle for the disk)."""
    f = _as_kernel(f if f is not None else series.target)
    pts = _grid(series.basis)
    return float(np.max(np.abs(eval_series_scalar(series, pts) - f(pts))))


def truncation_order_estimate(family, t, eps2, zeta=0.0, kappa_J=1.0, C1=None, C2=2.0):
    """Closed-form truncation order before a-posteriori validation."""
    if not (0 < eps2 < 1):
        raise PreconditionError(f"eps2 must lie in (0, 1), got {eps2}")
    real = Family(family) in (Family.FOURIER,)
    if C1 is None:
        C1 = 2 * math.e if real else math.exp(zeta) * math.e
    d = math.ceil(C1 * abs(t) + C2 * math.log(max(kappa_J, 1.0) / eps2))
    return max(int(d), 1)


def _fit(family, t, d):
    kern = Kernel(Family(family).value, t)
    if Family(family) is Family.FOURIER:
        return chebyshev_coeffs(kern, d)
    return faber_disk_coeffs(kern, d)


def fit_kernel(family, t, eps2, zeta=0.0, kappa_J=1.0, C1=None, C2=2.0, max_d=1 << 14):
    """Series for the family kernel at time ``t`` with kappa_J * sup error <= eps2.

    Returns ``(series, measured_sup_error)``.
    """
    fam = Family(family)
    if fam is Family.POWER:
        raise PreconditionError("the power family needs no polynomial approximation")
    d = truncation_order_estimate(fam, t, eps2, zeta, kappa_J, C1, C2)
    kappa = max(kappa_J, 1.0)
    while True:
        series = _fit(fam, t, d)
        err = sup_error(series)
        if kappa * err <= eps2:
            return series, err
        if d >= max_d:
            raise PreconditionError(
                f"no truncation order up to {max_d} reaches eps2={eps2:g} (error {err:.3g})")
        d = min(2 * d, max_d)


def truncation_order(family, t, eps2, zeta=0.0, kappa_J=1.0, C1=None, C2=2.0):
    return len(fit_kernel(family, t, eps2, zeta, kappa_J, C1, C2)[0].coeffs)


def generating_function_residual(x, y, d):
    """|sum_{j<d} y^j T~_j(x) - (1 - y^2) / (2 (1 - 2 y x + y^2))| with T~_0 = 1/2."""
    if abs(y) > 0.5 or abs(x) > 1:
        raise DomainViolation("need |y| <= 1/2 and x in [-1, 1]")
    coeffs = np.asarray(y, dtype=np.complex128) ** np.arange(int(d))
    coeffs[0] = 0.5
    partial = _kernels.chebyshev_clenshaw(coeffs, np.array([float(x)]))[0]
    closed = 0.5 * (1 - y * y) / (1 - 2 * y * x + y * y)
    return float(abs(partial - closed))


def approximate_signal(A, rho, family, R, eps2, kappa_J=1.0, alpha=None):
    """Signal tr(rho p_t(A / alpha)) with each p_t a validated truncated series."""
    from .spectral import InitialState, as_matrix
    A = as_matrix(A)
    fam = family.tag
    alpha = family.alpha if alpha is None else alpha
    dm = rho.density_matrix() if isinstance(rho, InitialState) else np.asarray(rho)
    X = A / alpha
    vals = np.empty(2 * R, dtype=np.complex128)
    for t in range(2 * R):
        series, _ = fit_kernel(fam, t, eps2, kappa_J=kappa_J)
        vals[t] = np.sum(dm * eval_series_matrix(series, X).T)
    return SignalSeries(family, vals, ideal=False)
