"""Lindblad superoperators, Liouvillian-gap estimation and spectral-abscissa
stability checks built on the estimation pipeline."""

from dataclasses import dataclass
from functools import reduce
from typing import Callable, Optional

import numpy as np

from .errors import NoSteadyStateDetected, OnlySteadyState, PreconditionError, TooLarge
from .pencil import EstimateReport, estimate_eigenvalues
from .signals import Family, SignalFamily
from .spectral import InitialState, eig_decompose, expand_initial_state

MAX_QUBITS = 6
ZERO_TOL_FACTOR = 3.0
# absolute floor on the zero test, relative to the normalization alpha
ZERO_TOL_FLOOR = 1e-9

PAULI = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


def pauli_matrix(word):
    return reduce(np.kron, (PAULI[ch] for ch in word.upper()))


@dataclass(frozen=True)
class JumpOperator:
    """sqrt(rate) * sum_k amplitude_k * pauli(word_k)."""

    rate: float
    terms: tuple

    def matrix(self):
        op = sum(complex(a) * pauli_matrix(w) for a, w in self.terms)
        return np.sqrt(self.rate) * op


@dataclass(frozen=True)
class LindbladSpec:
    n_qubits: int
    hamiltonian_terms: tuple = ()
    jump_operators: tuple = ()

    def __post_init__(self):
        if self.n_qubits < 1:
            raise PreconditionError("need at least one qubit")
        for coeff, word in self.hamiltonian_terms:
            _check_word(word, self.n_qubits)
            if isinstance(coeff, complex) or not np.isfinite(coeff):
                raise PreconditionError("Hamiltonian coefficients must be finite reals")
        for jump in self.jump_operators:
            if jump.rate < 0:
                raise PreconditionError("jump rates must be non-negative")
            for _, word in jump.terms:
                _check_word(word, self.n_qubits)

    @property
    def dim(self):
        return 2 ** self.n_qubits

    def hamiltonian(self):
        H = np.zeros((self.dim, self.dim), dtype=np.complex128)
        for coeff, word in self.hamiltonian_terms:
            H += coeff * pauli_matrix(word)
        return H

    def jumps(self):
        return [j.matrix() for j in self.jump_operators]

    def combined(self, other):
        """Same Hamiltonian, jump lists concatenated."""
        return LindbladSpec(self.n_qubits, self.hamiltonian_terms,
                            self.jump_operators + other.jump_operators)


def _check_word(word, n):
    if len(word) != n or not set(word.upper()) <= set(PAULI):
        raise PreconditionError(f"invalid Pauli word {word!r} for {n} qubit(s)")


def vec(rho):
    """Row-major vectorization: |rho>> = sum rho_jk |j>|k>."""
    return np.asarray(rho).reshape(-1)


def unvec(v):
    n = int(round(np.sqrt(len(v))))
    return np.asarray(v).reshape(n, n)


def vectorize_lindblad(spec):
    """Superoperator acting on row-major vectorized density matrices."""
    if spec.n_qubits > MAX_QUBITS:
        raise TooLarge(f"{spec.n_qubits} qubits exceeds the dense limit of {MAX_QUBITS}")
    d = spec.dim
    eye = np.eye(d, dtype=np.complex128)
    H = spec.hamiltonian()
    sup = -1j * (np.kron(H, eye) - np.kron(eye, H.T))
    for L in spec.jumps():
        LdL = L.conj().T @ L
        sup += np.kron(L, L.conj()) - 0.5 * np.kron(LdL, eye) - 0.5 * np.kron(eye, LdL.T)
    return sup


def lindblad_rhs(spec, rho):
    """Master-equation right-hand side evaluated directly on a density matrix."""
    H = spec.hamiltonian()
    out = -1j * (H @ rho - rho @ H)
    for L in spec.jumps():
        LdL = L.conj().T @ L
        out += L @ rho @ L.conj().T - 0.5 * (LdL @ rho + rho @ LdL)
    return out


def damped_qubit_spec(gamma, omega=0.0):
    """Single qubit with amplitude damping at rate ``gamma`` and H = omega Z / 2."""
    ham = ((omega / 2, "Z"),) if omega else ()
    lower = JumpOperator(gamma, ((0.5, "X"), (0.5j, "Y")))
    return LindbladSpec(1, ham, (lower,))


def excited_state(model, weights):
    """Pure state proportional to sum_i weights[i] psi_i (weights keyed by eigen index)."""
    v = np.zeros(model.N, dtype=np.complex128)
    for idx, w in weights.items():
        v += w * model.right[:, idx]
    return InitialState.pure(v, normalize=True)


def default_excitation(model, amplitude=0.5, modes=3):
    """Steady state plus ``amplitude`` times each of the next slowest modes.

    Modes sharing an eigenvalue are represented by a single eigenvector.
    """
    order = np.argsort(-model.eigenvalues.real, kind="stable")
    chosen = []
    for idx in order:
        if all(abs(model.eigenvalues[idx] - model.eigenvalues[j]) > 1e-9 for j in chosen):
            chosen.append(int(idx))
        if len(chosen) == modes:
            break
    weights = {chosen[0]: 1.0}
    weights.update({i: amplitude for i in chosen[1:]})
    return excited_state(model, weights)


def distinct_eigenvalues(values, tol=1e-9):
    out = []
    for v in np.asarray(values):
        if all(abs(v - w) > tol for w in out):
            out.append(v)
    return np.array(out, dtype=np.complex128)


@dataclass(frozen=True)
class LiouvillianResult:
    report: EstimateReport
    gap: float
    exact_spectrum: np.ndarray
    exact_gap: float
    support_eigenvalues: np.ndarray


def _zero_tol(report, i):
    return max(ZERO_TOL_FACTOR * float(report.error_estimate[i]), ZERO_TOL_FLOOR * report.family.alpha)


def liouvillian_gap(report):
    """Smallest nonzero |Re lambda| after clamping near-zero real parts."""
    lam = np.asarray(report.lambda_hat)
    zero = np.array([abs(lam[i].real) <= _zero_tol(report, i) for i in range(len(lam))], dtype=bool)
    if not (zero.any() or report.possible_zero):
        raise NoSteadyStateDetected("no estimated mode has a vanishing real part")
    rest = np.abs(lam[~zero].real)
    if len(rest) == 0:
        raise OnlySteadyState("only steady-state modes were estimated")
    return float(rest.min())


def exact_gap(eigenvalues, tol=1e-9):
    re = np.asarray(eigenvalues).real
    nonzero = np.abs(re[np.abs(re) > tol])
    return float(nonzero.min()) if len(nonzero) else 0.0


def liouvillian_pipeline(spec, access, *, R=4, family="exponential", amplitude=0.5,
                         modes=3, r=None, trial=0):
    """Estimate the Liouvillian gap of ``spec`` from an excited steady state."""
    Lsup = vectorize_lindblad(spec)
    model = eig_decompose(Lsup, fourier=Family(family) is Family.FOURIER)
    rho = default_excitation(model, amplitude, modes)
    exp = expand_initial_state(rho, model, drop_tol=1e-10)
    fam = SignalFamily(Family(family), model.alpha)
    truth = distinct_eigenvalues(model.eigenvalues[exp.support])
    report = estimate_eigenvalues(model, exp, fam, R, access, r=r, trial=trial, truth=truth)
    return LiouvillianResult(report, liouvillian_gap(report), model.eigenvalues,
                             exact_gap(model.eigenvalues), truth)


@dataclass(frozen=True)
class StabilityVerdict:
    abscissa: float
    classification: str
    margin: float
    zero_test_used: bool = False

    def to_dict(self):
        return {"abscissa": self.abscissa, "classification": self.classification,
                "margin": self.margin, "zero_test_used": self.zero_test_used}


ASYMPTOTIC = "AsymptoticallyStable"
MARGINAL = "MarginallyStable"
UNSTABLE = "Unstable"


def spectral_abscissa(report, zero_test: Optional[Callable[[], EstimateReport]] = None):
    """Classify stability from max Re lambda at the estimated error level.

    ``zero_test`` returns an exponential-family report; it runs when the
    abscissa is negative and upgrades the verdict if it finds a zero mode.
    """
    lam = np.asarray(report.lambda_hat)
    if len(lam) == 0:
        raise PreconditionError("no eigenvalue estimates")
    i = int(np.argmax(lam.real))
    abscissa = float(lam[i].real)
    err = _zero_tol(report, i)
    margin = float(abs(abscissa) / err)
    if abscissa > err:
        return StabilityVerdict(abscissa, UNSTABLE, margin)
    if abscissa >= -err:
        return StabilityVerdict(abscissa, MARGINAL, margin)
    if zero_test is None:
        return StabilityVerdict(abscissa, ASYMPTOTIC, margin)
    follow = zero_test()
    lz = np.asarray(follow.lambda_hat)
    hits = [k for k in range(len(lz)) if abs(lz[k]) <= _zero_tol(follow, k)]
    if hits:
        k = hits[0]
        return StabilityVerdict(float(lz[k].real), MARGINAL,
                                float(abs(lz[k].real) / _zero_tol(follow, k)), zero_test_used=True)
    return StabilityVerdict(abscissa, ASYMPTOTIC, margin, zero_test_used=True)


def abscissa_pipeline(A, access, *, rho=None, R=4, r=None, zero_test=True, trial=0):
    """Power-family estimate of the spectrum of ``A`` with an exponential-family
    zero test. The default initial state is maximally mixed, which puts weight
    1/N on every eigen-component."""
    model = eig_decompose(A)
    N = model.N
    if rho is None:
        rho = InitialState.density(np.eye(N) / N)
    exp = expand_initial_state(rho, model, drop_tol=1e-10)
    R = max(R, exp.r)
    report = estimate_eigenvalues(model, exp, SignalFamily(Family.POWER, model.alpha), R, access,
                                  r=r, trial=trial)
    test = None
    if zero_test:
        if np.any(model.eigenvalues.real > 1e-9 * max(1.0, model.alpha)):
            test = None
        else:
            fam = SignalFamily(Family.EXPONENTIAL, model.alpha)

            def test():
                return estimate_eigenvalues(model, exp, fam, R, access, r=r, trial=trial)
    return spectral_abscissa(report, test), report


def report_from_values(lambdas, family=None, error=0.0):
    """EstimateReport built from given eigenvalues, for classification helpers and tests."""
    lam = np.asarray(lambdas, dtype=np.complex128)
    family = family or SignalFamily(Family.POWER, 1.0)
    return EstimateReport(z_hat=lam, lambda_hat=lam, family=family, cost_total=0, r_est=len(lam),
                          coeffs=np.ones(len(lam), complex), error_estimate=np.full(len(lam), error),
                          noise_scale=0.0)
