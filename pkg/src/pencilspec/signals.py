"""Noiseless signal series tr(rho f_t(A)) for the power, Fourier and
exponential kernels."""

from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.linalg

from .errors import FamilySpectrumMismatch, NumericalError, PreconditionError
from .spectral import InitialState, as_matrix

SPECTRUM_TOL = 1e-9
EXPM_CROSSCHECK_TOL = 1e-9


class Family(str, Enum):
    POWER = "power"
    FOURIER = "fourier"
    EXPONENTIAL = "exponential"

    @property
    def code(self):
        return {"power": 0, "fourier": 1, "exponential": 2}[self.value]


@dataclass(frozen=True)
class SignalFamily:
    tag: Family
    alpha: float

    def __post_init__(self):
        object.__setattr__(self, "tag", Family(self.tag))
        if not self.alpha > 0:
            raise PreconditionError(f"alpha must be positive, got {self.alpha}")

    def kernel(self, lam, t):
        """f_t evaluated at eigenvalues ``lam``."""
        lam = np.asarray(lam, dtype=np.complex128)
        if self.tag is Family.POWER:
            return lam ** t
        if self.tag is Family.FOURIER:
            return np.exp(-2j * np.pi * lam * t / self.alpha)
        return np.exp(lam * t / self.alpha)

    def node(self, lam):
        """The generalized eigenvalue z = f_1(lambda) carried by each mode."""
        return self.kernel(lam, 1)

    def check_spectrum(self, eigenvalues):
        lam = np.asarray(eigenvalues, dtype=np.complex128)
        tol = SPECTRUM_TOL * max(1.0, self.alpha)
        if self.tag is Family.FOURIER and np.any(np.abs(lam.imag) > tol):
            raise FamilySpectrumMismatch("Fourier family requires a real spectrum")
        if self.tag is Family.EXPONENTIAL and np.any(lam.real > tol):
            raise FamilySpectrumMismatch("exponential family requires Re(lambda) <= 0")


def family_for(model, tag):
    return SignalFamily(Family(tag), model.alpha)


@dataclass(frozen=True)
class SignalSeries:
    """Samples g(0..len-1). ``noise_scale`` is the per-entry noise level
    (0 for ideal series) and ``cost_total`` the consumed shots or queries."""

    family: SignalFamily
    values: np.ndarray
    ideal: bool
    cost_total: int = 0
    noise_scale: float = 0.0

    def __post_init__(self):
        v = np.array(self.values, dtype=np.complex128)
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def __len__(self):
        return len(self.values)

    def shifted(self, k):
        return SignalSeries(self.family, self.values[k:], self.ideal, self.cost_total, self.noise_scale)


def _check_R(R):
    if int(R) != R or R < 1:
        raise PreconditionError(f"R must be a positive integer, got {R}")
    return int(R)


def ideal_signal(model, expansion, family, R):
    """Sum over the retained modes of c_i f_t(lambda_i), t = 0..2R-1."""
    R = _check_R(R)
    family.check_spectrum(model.eigenvalues)
    lam = model.eigenvalues[expansion.support]
    t = np.arange(2 * R)
    vals = family.kernel(lam[None, :], t[:, None]) @ expansion.coeffs
    return SignalSeries(family, vals, ideal=True)


def ideal_signal_bruteforce(A, rho, family, R):
    """Dense tr(rho f_t(A)) over all eigen-components.

    Exponential kernels are formed both from the eigendecomposition and by
    scaling and squaring; disagreement beyond 1e-9 raises NumericalError.
    """
    R = _check_R(R)
    A = as_matrix(A)
    if not isinstance(rho, InitialState):
        rho = InitialState.density(rho)
    if rho.N != A.shape[0]:
        from .errors import DimensionMismatch
        raise DimensionMismatch(f"state has dimension {rho.N}, matrix has {A.shape[0]}")
    w, P = np.linalg.eig(A)
    family.check_spectrum(w)
    dm = rho.density_matrix()
    vals = np.empty(2 * R, dtype=np.complex128)
    if family.tag is Family.POWER:
        F = np.eye(A.shape[0], dtype=np.complex128)
        for t in range(2 * R):
            vals[t] = np.sum(dm * F.T)
            F = F @ A
        return SignalSeries(family, vals, ideal=True)

    Pinv = np.linalg.inv(P)
    rate = -2j * np.pi / family.alpha if family.tag is Family.FOURIER else 1.0 / family.alpha
    for t in range(2 * R):
        F = scipy.linalg.expm(rate * t * A)
        F_eig = (P * np.exp(rate * t * w)) @ Pinv
        gap = np.linalg.norm(F - F_eig, 2)
        if gap > EXPM_CROSSCHECK_TOL * max(1.0, np.linalg.norm(F, 2)):
            raise NumericalError(
                f"matrix exponential cross-check failed at t={t}: paths differ by {gap:.3g}")
        vals[t] = np.sum(dm * F.T)
    return SignalSeries(family, vals, ideal=True)
