"""Biorthogonal eigendecomposition of dense complex matrices and the diagonal
expansion of an initial state in that eigenbasis."""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from . import _kernels
from .errors import (DimensionMismatch, InvalidState, NearDefective, NonSquare,
                     PreconditionError)

DEFECT_THRESHOLD = 1e8
BIORTHO_TOL = 1e-10
STATE_TOL = 1e-12


def as_matrix(A):
    """Validate and return ``A`` as a square, finite complex128 array."""
    A = np.asarray(A, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise NonSquare(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise PreconditionError("matrix has non-finite entries")
    return A


def _frozen(a):
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


def spectral_order(w):
    """Indices sorting eigenvalues by real part descending, then imaginary part ascending."""
    w = np.asarray(w)
    return np.lexsort((np.round(w.imag, 12), -np.round(w.real, 12)))


def is_normal(A, tol=1e-12):
    scale = max(np.linalg.norm(A, 2) ** 2, 1e-300)
    return np.linalg.norm(A @ A.conj().T - A.conj().T @ A, 2) <= tol * scale


@dataclass(frozen=True)
class SpectralModel:
    """Eigenvalues with right eigenvectors (columns of ``right``) and the
    matching left eigenvectors stored as rows of ``left`` = P^-1, so that
    ``left[i] @ right[:, j]`` reads <phi_i|psi_j>."""

    eigenvalues: np.ndarray
    right: np.ndarray
    left: np.ndarray
    alpha: float
    kappa_J: float
    gap: float
    normalized_gap: float
    wraparound_gap: Optional[float] = None
    real_spectrum: bool = False

    @property
    def N(self):
        return len(self.eigenvalues)

    @property
    def left_vectors(self):
        """phi_i as columns (conjugated rows of P^-1)."""
        return self.left.conj().T

    def matrix(self):
        return (self.right * self.eigenvalues) @ self.left

    def apply(self, func):
        """Dense f(A) = P f(Lambda) P^-1 for a scalar function ``func``."""
        return (self.right * func(self.eigenvalues)) @ self.left


def eig_decompose(A, alpha_A=None, *, fourier=False, defect_threshold=DEFECT_THRESHOLD):
    """Diagonalize ``A`` into a :class:`SpectralModel`.

    ``alpha_A`` defaults to 1.01 times the spectral norm, or 2.01 times when the
    model feeds the Fourier (real-spectrum) pipeline.
    """
    A = as_matrix(A)
    N = A.shape[0]
    norm = np.linalg.norm(A, 2)
    if alpha_A is None:
        alpha_A = (2.01 if fourier else 1.01) * norm
        if alpha_A == 0.0:
            alpha_A = 1.0
    elif not alpha_A > 0:
        raise PreconditionError(f"alpha_A must be positive, got {alpha_A}")

    if is_normal(A):
        T, P = scipy.linalg.schur(A, output="complex")
        w = np.diag(T).copy()
    else:
        w, P = np.linalg.eig(A)
        P = P / np.linalg.norm(P, axis=0)
    cond = np.linalg.cond(P)
    if not np.isfinite(cond) or cond > defect_threshold:
        raise NearDefective(
            f"eigenvector matrix condition {cond:.3g} exceeds {defect_threshold:.1g}; "
            "matrix is (numerically) defective")

    order = spectral_order(w)
    w, P = w[order], P[:, order]
    Pinv = np.linalg.inv(P)
    eye = np.eye(N)
    if np.max(np.abs(Pinv @ P - eye)) > BIORTHO_TOL:
        Pinv = Pinv @ (2 * eye - P @ Pinv)

    gap = _kernels.min_pairwise_distance(w)
    real = bool(np.all(np.abs(w.imag) <= 1e-9 * max(1.0, norm)))
    wrap = _kernels.wrap_min_gap(w.real / alpha_A) if real else None
    return SpectralModel(
        eigenvalues=_frozen(w), right=_frozen(P), left=_frozen(Pinv), alpha=float(alpha_A),
        kappa_J=float(cond), gap=gap, normalized_gap=gap / alpha_A,
        wraparound_gap=wrap, real_spectrum=real)


def biorthogonality_error(model):
    return float(np.max(np.abs(model.left @ model.right - np.eye(model.N))))


def jordan_condition_estimate(model):
    """Condition number of the column-normalized eigenvector matrix.

    This is an upper estimate of the infimum over all diagonalizers.
    """
    P = model.right / np.linalg.norm(model.right, axis=0)
    return float(np.linalg.cond(P))


def hermitian_split(A):
    """Return ``(A_h, A_a)`` with ``A = A_h + 1j * A_a`` and both parts Hermitian."""
    A = as_matrix(A)
    Ah = (A + A.conj().T) / 2
    Aa = (A - A.conj().T) / 2j
    return Ah, Aa


@dataclass(frozen=True)
class InitialState:
    kind: str
    payload: np.ndarray
    purified: bool = False

    def __post_init__(self):
        p = np.array(self.payload, dtype=np.complex128)
        if self.kind == "density_matrix":
            if p.ndim != 2 or p.shape[0] != p.shape[1]:
                raise InvalidState(f"density matrix must be square, got {p.shape}")
            if np.max(np.abs(p - p.conj().T)) > STATE_TOL:
                raise InvalidState("density matrix is not Hermitian")
            if abs(np.trace(p) - 1) > STATE_TOL:
                raise InvalidState(f"density matrix trace is {np.trace(p).real:.15g}, expected 1")
            if np.min(np.linalg.eigvalsh((p + p.conj().T) / 2)) < -STATE_TOL:
                raise InvalidState("density matrix has negative eigenvalues")
        elif self.kind == "pure_vector":
            if p.ndim != 1:
                raise InvalidState(f"pure state must be a vector, got shape {p.shape}")
            if abs(np.linalg.norm(p) - 1) > STATE_TOL:
                raise InvalidState("pure state is not normalized")
        else:
            raise InvalidState(f"unknown state kind {self.kind!r}")
        p.flags.writeable = False
        object.__setattr__(self, "payload", p)

    @classmethod
    def density(cls, rho, purified=False):
        return cls("density_matrix", rho, purified)

    @classmethod
    def pure(cls, psi, normalize=False):
        psi = np.asarray(psi, dtype=np.complex128)
        if normalize:
            psi = psi / np.linalg.norm(psi)
        return cls("pure_vector", psi, True)

    @property
    def N(self):
        return self.payload.shape[0]

    def density_matrix(self):
        if self.kind == "pure_vector":
            return np.outer(self.payload, self.payload.conj())
        return np.array(self.payload)


@dataclass(frozen=True)
class SparseExpansion:
    coeffs: np.ndarray
    support: np.ndarray
    c_min: float
    residual_offdiag_norm: float
    discarded_mass: complex = 0j
    full_coeffs: np.ndarray = field(default=None, repr=False)

    @property
    def r(self):
        return len(self.coeffs)


def diagonal_coefficients(rho, model):
    """All N coefficients c_i = <phi_i| rho |psi_i>."""
    if rho.N != model.N:
        raise DimensionMismatch(f"state has dimension {rho.N}, matrix has {model.N}")
    if rho.kind == "pure_vector":
        psi = rho.payload
        return (model.left @ psi) * (psi.conj() @ model.right)
    return np.einsum("ij,jk,ki->i", model.left, rho.payload, model.right)


def expand_initial_state(rho, model, r_cap=None, drop_tol=1e-10):
    """Keep the eigen-components whose diagonal coefficient exceeds ``drop_tol``,
    largest first, at most ``r_cap`` of them."""
    c = diagonal_coefficients(rho, model)
    order = np.argsort(-np.abs(c), kind="stable")
    keep = [i for i in order if abs(c[i]) > drop_tol]
    if r_cap is not None:
        keep = keep[:r_cap]
    keep = np.array(keep, dtype=int)
    if rho.kind == "pure_vector":
        full = np.outer(model.left @ rho.payload, rho.payload.conj() @ model.right)
    else:
        full = model.left @ rho.payload @ model.right
    off = full - np.diag(np.diag(full))
    mask = np.ones(model.N, dtype=bool)
    mask[keep] = False
    coeffs = c[keep]
    return SparseExpansion(
        coeffs=_frozen(coeffs), support=_frozen(keep),
        c_min=float(np.min(np.abs(coeffs))) if len(coeffs) else 0.0,
        residual_offdiag_norm=float(np.linalg.norm(off)),
        discarded_mass=complex(np.sum(c[mask])), full_coeffs=_frozen(c))


def support_statistics(model, expansion):
    """Gap, normalized gap and (real spectra only) wrap-around gap of the retained eigenvalues."""
    lam = model.eigenvalues[expansion.support]
    gap = _kernels.min_pairwise_distance(lam)
    stats = {"gap": gap, "normalized_gap": gap / model.alpha,
             "c_min": expansion.c_min, "kappa_J": model.kappa_J, "alpha": model.alpha,
             "r": expansion.r}
    if model.real_spectrum:
        stats["wraparound_gap"] = _kernels.wrap_min_gap(lam.real / model.alpha)
    return stats
