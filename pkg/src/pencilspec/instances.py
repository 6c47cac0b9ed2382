"""Random and hand-built test instances with exactly sparse initial states."""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import PreconditionError
from .spectral import InitialState, eig_decompose, expand_initial_state


@dataclass(frozen=True)
class Instance:
    matrix: np.ndarray
    state: InitialState
    model: object
    expansion: object
    truth: np.ndarray

    @property
    def r(self):
        return len(self.truth)


def _draw_eigenvalues(rng, N, spectrum, radius, min_modulus):
    out = []
    while len(out) < N:
        if spectrum == "real":
            v = complex(rng.uniform(-radius, radius))
        elif spectrum == "stable":
            rad = radius * np.sqrt(rng.uniform())
            v = rad * np.exp(1j * rng.uniform(np.pi / 2, 3 * np.pi / 2))
        else:
            rad = radius * np.sqrt(rng.uniform())
            v = rad * np.exp(1j * rng.uniform(0, 2 * np.pi))
        if abs(v) >= min_modulus:
            out.append(v)
    return np.array(out, dtype=np.complex128)


def random_instance(rng, N, r, *, spectrum="complex", min_gap=0.1, c_min=0.05,
                    nonnormality=0.5, radius=0.95, min_modulus=0.05, fourier=False,
                    mixed=False, max_tries=2000):
    """Diagonalizable N x N matrix with an initial state supported on exactly r modes.

    The state lies in the span of r right eigenvectors, so every other diagonal
    coefficient vanishes. Rejection sampling enforces the normalized support gap
    and the minimal coefficient modulus.
    """
    if not 1 <= r <= N:
        raise PreconditionError("need 1 <= r <= N")
    for _ in range(max_tries):
        U = np.linalg.qr(rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N)))[0]
        K = (rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))) / np.sqrt(2 * N)
        P = U @ (np.eye(N) + nonnormality * K)
        P /= np.linalg.norm(P, axis=0)
        lam = _draw_eigenvalues(rng, N, spectrum, radius, min_modulus)
        A = (P * lam) @ np.linalg.inv(P)
        if spectrum == "real":
            A_alpha = (2.01 if fourier else 1.01) * np.linalg.norm(A, 2)
        else:
            A_alpha = 1.01 * np.linalg.norm(A, 2)
        support = lam[:r]
        if r > 1 and _kernels.min_pairwise_distance(support) / A_alpha < min_gap:
            continue
        if _kernels.min_pairwise_distance(lam) < 1e-6:
            continue
        state = _sparse_state(rng, P, r, mixed)
        try:
            model = eig_decompose(A, fourier=fourier)
        except Exception:
            continue
        exp = expand_initial_state(state, model, r_cap=r, drop_tol=1e-9)
        if exp.r != r or exp.c_min < c_min:
            continue
        truth = model.eigenvalues[exp.support]
        if not np.allclose(np.sort_complex(truth), np.sort_complex(support), atol=1e-8):
            continue
        return Instance(A, state, model, exp, truth)
    raise PreconditionError("could not draw an instance meeting the gap and c_min constraints")


def _sparse_state(rng, P, r, mixed):
    N = P.shape[0]
    if not mixed:
        a = rng.standard_normal(r) + 1j * rng.standard_normal(r)
        return InitialState.pure(P[:, :r] @ a, normalize=True)
    rho = np.zeros((N, N), dtype=np.complex128)
    weights = rng.dirichlet(np.ones(2))
    for w in weights:
        a = rng.standard_normal(r) + 1j * rng.standard_normal(r)
        v = P[:, :r] @ a
        v /= np.linalg.norm(v)
        rho += w * np.outer(v, v.conj())
    rho = (rho + rho.conj().T) / 2
    rho /= np.trace(rho).real
    return InitialState.density(rho)


def instance_from_eigen(eigenvalues, P, weights):
    """Matrix P diag(eigenvalues) P^-1 with the pure state sum_i weights[i] P[:, i]."""
    lam = np.asarray(eigenvalues, dtype=np.complex128)
    P = np.asarray(P, dtype=np.complex128)
    A = (P * lam) @ np.linalg.inv(P)
    v = P @ np.asarray(weights, dtype=np.complex128)
    state = InitialState.pure(v, normalize=True)
    model = eig_decompose(A)
    exp = expand_initial_state(state, model, drop_tol=1e-9)
    return Instance(A, state, model, exp, model.eigenvalues[exp.support])


def scaling_instance():
    """Fixed non-normal r = 2 instance used for the cost-scaling sweeps."""
    P = np.array([[1.0, 0.6, 0.0, 0.2],
                  [0.0, 0.8, 0.3, 0.0],
                  [0.0, 0.0, 1.0, 0.4],
                  [0.0, 0.0, 0.0, 0.9]], dtype=np.complex128)
    P /= np.linalg.norm(P, axis=0)
    return instance_from_eigen([0.8, -0.5, 0.3j, -0.2 - 0.2j], P, [1.0, 0.8, 0.0, 0.0])


def zero_eigenvalue_instance():
    """Non-normal matrix with eigenvalues {0, -0.5, -1} and a state exciting all three."""
    P = np.array([[1.0, 0.5, 0.2],
                  [0.0, 1.0, 0.6],
                  [0.0, 0.0, 1.0]], dtype=np.complex128)
    P /= np.linalg.norm(P, axis=0)
    return instance_from_eigen([0.0, -0.5, -1.0], P, [1.0, 0.7, 0.6])
