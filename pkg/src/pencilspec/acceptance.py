"""End-to-end acceptance checks, shared by the test suite and ``pencilspec selftest``.

Each check returns a :class:`CriterionResult` with a pass flag and the numbers
behind it; the caller decides how to report them.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from . import bounds as B
from .access import AccessModel
from .applications import (abscissa_pipeline, damped_qubit_spec, JumpOperator, LindbladSpec,
                           liouvillian_pipeline, lindblad_rhs, vec, vectorize_lindblad)
from .approx import approximate_signal, fit_kernel, generating_function_residual
from .instances import random_instance, scaling_instance, zero_eigenvalue_instance
from .pencil import estimate_eigenvalues
from .signals import Family, SignalFamily, ideal_signal
from .spectral import InitialState, eig_decompose, expand_initial_state


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.number}: {self.name} ({self.seconds:.1f}s)"


def _timed(number, name, fn, *args, **kwargs):
    t0 = time.perf_counter()
    passed, details = fn(*args, **kwargs)
    return CriterionResult(number, name, bool(passed), details, time.perf_counter() - t0)


# ---------------------------------------------------------------- 1

def check_exact_recovery(seed=0, instances=200, tol=1e-7, runtime_limit=60.0):
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    worst, failures = 0.0, []
    for k in range(instances):
        r = int(rng.integers(1, 5))
        N = int(rng.integers(max(r, 2), 17))
        inst = random_instance(rng, N, r, min_gap=0.1, c_min=0.05)
        fam = SignalFamily(Family.POWER, inst.model.alpha)
        rep = estimate_eigenvalues(inst.model, inst.expansion, fam, 5, AccessModel.exact(),
                                   truth=inst.truth)
        err = rep.matched_error if rep.r_est == r else math.inf
        worst = max(worst, err)
        if not err <= tol:
            failures.append({"instance": k, "N": N, "r": r, "r_est": rep.r_est, "error": err})
    elapsed = time.perf_counter() - t0
    return (not failures and elapsed <= runtime_limit,
            {"worst_matched_error": worst, "failures": failures, "seconds": elapsed,
             "tolerance": tol})


# ---------------------------------------------------------------- 2

HADAMARD_SHOTS = (10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6, 10 ** 7, 3 * 10 ** 7)
QAE_EPS = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 3e-7)


def scaling_sweep(mode, grid, trials=60, seed=0, delta=1e-2, c_qae=1.0, instance=None):
    """Median matched error and total cost per grid point on a fixed r = 2 instance."""
    inst = instance or scaling_instance()
    fam = SignalFamily(Family.POWER, inst.model.alpha)
    rows = []
    for g in grid:
        if mode == "hadamard":
            access = AccessModel.hadamard(int(g), seed=seed)
        else:
            access = AccessModel.amplitude_estimation(g, delta, seed=seed, c_qae=c_qae)
        errs, cost = [], 0
        for trial in range(trials):
            rep = estimate_eigenvalues(inst.model, inst.expansion, fam, 2, access, r=2,
                                       trial=trial, truth=inst.truth)
            errs.append(rep.matched_error if rep.matched_error is not None else math.inf)
            cost = rep.cost_total
        rows.append({"mode": mode, "setting": float(g), "cost": int(cost),
                     "median_error": float(np.median(errs))})
    return rows


def fit_slope(rows):
    x = np.log([r["cost"] for r in rows])
    y = np.log([r["median_error"] for r in rows])
    return float(np.polyfit(x, y, 1)[0])


def check_scaling(seed=0, trials=60):
    had = scaling_sweep("hadamard", HADAMARD_SHOTS, trials, seed)
    qae = scaling_sweep("qae", QAE_EPS, trials, seed)
    s_h, s_q = fit_slope(had), fit_slope(qae)
    decades = min(math.log10(rows[-1]["cost"] / rows[0]["cost"]) for rows in (had, qae))
    ok = abs(s_h + 0.5) <= 0.1 and abs(s_q + 1.0) <= 0.15 and decades >= 4 and trials >= 50
    return ok, {"hadamard_slope": s_h, "qae_slope": s_q, "decades": decades,
                "trials_per_point": trials, "hadamard": had, "qae": qae}


# ---------------------------------------------------------------- 3

def _random_disk_nodes(rng, r, min_gap=0.2):
    while True:
        z = np.sqrt(rng.uniform(0.05, 1, size=r)) * np.exp(2j * np.pi * rng.uniform(size=r))
        if r == 1 or _kernels.min_pairwise_distance(z) >= min_gap:
            return z


def _random_coeffs(rng, r, c_min=0.05):
    while True:
        c = rng.dirichlet(np.ones(r)) * np.exp(1j * rng.uniform(-0.3, 0.3, size=r))
        if np.min(np.abs(c)) >= c_min:
            return c


def check_perturbation(seed=0, trials=100, instances_per_r=3):
    rng = np.random.default_rng(seed)
    worst_general, worst_fourier, violations = 0.0, 0.0, 0
    for r in (2, 3):
        for _ in range(instances_per_r):
            c = _random_coeffs(rng, r)
            disk = _random_disk_nodes(rng, r)
            freqs = np.sort(rng.uniform(size=r))
            while r > 1 and _kernels.wrap_min_gap(freqs) < 0.15:
                freqs = np.sort(rng.uniform(size=r))
            circle = np.exp(2j * np.pi * freqs)
            for E in (1e-8, 1e-6):
                reps = B.perturbation_experiment(disk, c, E, trials, rng)
                reps += B.perturbation_experiment(circle, c, E, trials, rng, fourier=True)
                for rep in reps:
                    ratio = rep.observed / rep.predicted
                    if rep.name == "gevp_shift":
                        worst_general = max(worst_general, ratio)
                    else:
                        worst_fourier = max(worst_fourier, ratio)
                    violations += not rep.satisfied
    return violations == 0, {"worst_ratio_general": worst_general,
                             "worst_ratio_fourier": worst_fourier, "violations": violations,
                             "margin": 2.0}


# ---------------------------------------------------------------- 4

def check_conditioning(seed=0, node_sets=500):
    rng = np.random.default_rng(seed)
    worst_general = 0.0
    for _ in range(node_sets):
        r = int(rng.integers(1, 6))
        z = _random_disk_nodes(rng, r, min_gap=1e-3)
        gap = _kernels.min_pairwise_distance(z) if r > 1 else 2.0
        worst_general = max(worst_general, B.kappa_V(z) / B.kappa_bound_general(r, min(gap, 2.0)))

    worst_fourier, fourier_sets = 0.0, 0
    while fourier_sets < node_sets:
        k = int(rng.integers(2, 6))
        freqs = rng.uniform(size=k)
        dw = _kernels.wrap_min_gap(freqs)
        if dw < 0.05:
            continue
        rows = int(math.floor(1 / dw + 1)) + 1 + int(rng.integers(0, 5))
        worst_fourier = max(worst_fourier,
                            B.kappa_V(np.exp(2j * np.pi * freqs), rows) / B.kappa_bound_fourier(rows, dw))
        fourier_sets += 1

    worst_inverse = 0.0
    for _ in range(node_sets):
        r = int(rng.integers(1, 6))
        z = _random_disk_nodes(rng, r, min_gap=0.3)
        W = B.vandermonde_inverse_explicit(z)
        worst_inverse = max(worst_inverse, float(np.max(np.abs(W - np.linalg.inv(B.node_vandermonde(z))))))
    ok = worst_general <= 1 and worst_fourier <= 1 and worst_inverse <= 1e-8
    return ok, {"worst_kappa_ratio_general": worst_general,
                "worst_kappa_ratio_fourier": worst_fourier,
                "worst_inverse_error": worst_inverse}


# ---------------------------------------------------------------- 5

def lemma_instance():
    """r = 2 instance normalized so the signal nodes are the eigenvalues themselves."""
    A = np.array([[0.8, 0.3], [0.0, 0.2]], dtype=np.complex128)
    model = eig_decompose(A, alpha_A=1.0)
    psi = model.right[:, 0] + model.right[:, 1]
    rho = InitialState.pure(psi, normalize=True)
    return model, expand_initial_state(rho, model)


def sample_complexity_trial_success(m, eps1, trials, seed, model, exp):
    fam = SignalFamily(Family.POWER, model.alpha)
    truth = model.eigenvalues[exp.support]
    ok = 0
    for trial in range(trials):
        rep = estimate_eigenvalues(model, exp, fam, 2, AccessModel.hadamard(m, seed=seed), r=2,
                                   trial=trial, truth=truth)
        ok += rep.matched_error is not None and rep.matched_error <= eps1
    return ok / trials


def check_sample_complexity(seed=0, trials=200, eps1=0.05, delta=0.05):
    model, exp = lemma_instance()
    gap = _kernels.min_pairwise_distance(model.eigenvalues)
    m_unit = B.sample_complexity_general(2, gap, eps1, exp.c_min, delta)
    rate_unit = sample_complexity_trial_success(m_unit, eps1, trials, seed, model, exp)
    calibrated, calib_rate = 1.0, rate_unit
    C = 1.0
    while C > 1e-20:
        C_next = C / 10
        m = B.sample_complexity_general(2, gap, eps1, exp.c_min, delta, C=C_next)
        rate = sample_complexity_trial_success(m, eps1, trials, seed, model, exp)
        if rate < 1 - delta:
            break
        C, calibrated, calib_rate = C_next, C_next, rate
    return rate_unit >= 1 - delta, {
        "m_unit_constant": m_unit, "success_rate_unit_constant": rate_unit,
        "calibrated_constant": calibrated,
        "m_calibrated": B.sample_complexity_general(2, gap, eps1, exp.c_min, delta, C=calibrated),
        "success_rate_calibrated": calib_rate, "eps1": eps1, "delta": delta, "trials": trials,
        "Delta": gap, "c_min": exp.c_min}


# ---------------------------------------------------------------- 6

def check_approximation(seed=0, instances=50, R=3, eps2=1e-8):
    worst_fit = 0.0
    for t in range(6):
        for eps in (1e-4, 1e-6, 1e-8, 1e-10):
            _, err = fit_kernel("fourier", t, eps)
            worst_fit = max(worst_fit, err / eps)

    geometric = True
    for y in (0.25, 0.5):
        for d in (4, 8, 12, 16, 20):
            for x in np.linspace(-1, 1, 41):
                if generating_function_residual(x, y, d) > y ** d / (1 - y) + 1e-15:
                    geometric = False
            for x in (1.0, -1.0):
                ratio = generating_function_residual(x, y, 2 * d) / generating_function_residual(x, y, d)
                if generating_function_residual(x, y, 2 * d) > 1e-13 and abs(ratio / y ** d - 1) > 1e-3:
                    geometric = False

    rng = np.random.default_rng(seed)
    worst_signal = 0.0
    for _ in range(instances):
        r = int(rng.integers(1, 5))
        inst = random_instance(rng, int(rng.integers(max(r, 2), 9)), r, spectrum="real",
                               fourier=True, min_gap=0.05)
        fam = SignalFamily(Family.FOURIER, inst.model.alpha)
        exact = ideal_signal(inst.model, inst.expansion, fam, R).values
        approx = approximate_signal(inst.matrix, inst.state, fam, R, eps2, kappa_J=inst.model.kappa_J).values
        worst_signal = max(worst_signal, float(np.max(np.abs(exact - approx))))
    ok = worst_fit <= 1 and geometric and worst_signal <= eps2
    return ok, {"worst_fit_ratio": worst_fit, "generating_function_geometric": geometric,
                "worst_signal_error": worst_signal, "eps2": eps2}


# ---------------------------------------------------------------- 7

def random_lindblad(rng, n):
    words = ["".join(rng.choice(list("IXYZ"), size=n)) for _ in range(3)]
    ham = tuple((float(rng.normal()), w) for w in words)
    jumps = []
    for _ in range(int(rng.integers(1, 3))):
        terms = tuple((complex(rng.normal(), rng.normal()), "".join(rng.choice(list("IXYZ"), size=n)))
                      for _ in range(int(rng.integers(1, 3))))
        jumps.append(JumpOperator(float(rng.uniform(0, 1)), terms))
    return LindbladSpec(n, ham, tuple(jumps))


def random_density(rng, d):
    G = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = G @ G.conj().T
    return rho / np.trace(rho).real


def check_applications(seed=0, gamma=0.4, eps=1e-3, delta=0.05, trials=100):
    details = {}
    spec = damped_qubit_spec(gamma)
    dense = np.sort(np.linalg.eigvals(vectorize_lindblad(spec)).real)
    expected = np.sort([0.0, -gamma / 2, -gamma / 2, -gamma])
    details["dense_spectrum_error"] = float(np.max(np.abs(dense - expected)))

    exact = liouvillian_pipeline(spec, AccessModel.exact())
    truth = np.array([0.0, -gamma / 2, -gamma])
    est = np.sort(exact.report.lambda_hat.real)
    details["exact_spectrum_error"] = float(np.max(np.abs(est - np.sort(truth)))) if len(est) == 3 else math.inf
    details["exact_gap_error"] = abs(exact.gap - gamma / 2)

    # sampled access with the shot count from the sample-complexity formula
    model = eig_decompose(vectorize_lindblad(spec))
    nodes = np.exp(exact.support_eigenvalues / model.alpha)
    eps1 = eps * np.min(np.abs(nodes)) / model.alpha
    m = B.sample_complexity_general(3, _kernels.min_pairwise_distance(nodes), eps1,
                                    float(np.min(np.abs(exact.report.coeffs))), delta)
    hits = 0
    for trial in range(trials):
        res = liouvillian_pipeline(spec, AccessModel.hadamard(m, seed=seed), trial=trial)
        hits += abs(res.gap - gamma / 2) <= eps
    details.update({"sampled_shots": m, "sampled_success_rate": hits / trials, "eps": eps})

    rng = np.random.default_rng(seed)
    worst_vec = 0.0
    for _ in range(100):
        n = int(rng.integers(1, 3))
        s = random_lindblad(rng, n)
        rho = random_density(rng, 2 ** n)
        worst_vec = max(worst_vec, float(np.max(np.abs(vectorize_lindblad(s) @ vec(rho) - vec(lindblad_rhs(s, rho))))))
    details["worst_vectorization_residual"] = worst_vec

    verdict, _ = abscissa_pipeline(np.array([[-1.0, 5.0], [0.0, -0.5]]), AccessModel.exact())
    details["triangular_verdict"] = verdict.classification
    details["triangular_abscissa"] = verdict.abscissa

    inst = zero_eigenvalue_instance()
    zero_verdict, power_report = abscissa_pipeline(inst.matrix, AccessModel.exact(), rho=inst.state)
    power_misses = not np.any(np.abs(power_report.lambda_hat) < 1e-6) and power_report.possible_zero
    details.update({"power_family_estimates": [complex(v) for v in power_report.lambda_hat],
                    "power_flags_possible_zero": bool(power_report.possible_zero),
                    "zero_instance_verdict": zero_verdict.classification,
                    "zero_test_used": zero_verdict.zero_test_used})
    ok = (details["dense_spectrum_error"] <= 1e-10 and details["exact_spectrum_error"] <= 1e-8
          and details["exact_gap_error"] <= 1e-8 and hits / trials >= 1 - delta
          and worst_vec <= 1e-12 and verdict.classification == "AsymptoticallyStable"
          and abs(verdict.abscissa + 0.5) <= 1e-8 and power_misses
          and zero_verdict.classification == "MarginallyStable" and zero_verdict.zero_test_used)
    return ok, details


# ---------------------------------------------------------------- 8

def check_bernstein(seed=0, r=3, m=1000, trials=1000):
    rng = np.random.default_rng(seed)
    gammas = [25.0 * k for k in range(1, 17)]
    reps = B.bernstein_experiment(r, m, gammas, trials, rng)
    ok = all(rep.satisfied for rep in reps)
    informative = [rep for rep in reps if rep.predicted < 1]
    return ok, {"r": r, "m": m, "trials": trials, "violations": sum(not rep.satisfied for rep in reps),
                "informative_gammas": len(informative),
                "max_observed_in_informative_range": max((rep.observed for rep in informative), default=0.0),
                "table": [{"gamma": rep.params["gamma"], "observed": rep.observed,
                           "bound": rep.predicted} for rep in reps]}


CRITERIA = (
    (1, "exact recovery, 200 random instances", check_exact_recovery),
    (2, "Hadamard -0.5 and amplitude-estimation -1.0 cost scaling", check_scaling),
    (3, "GEVP perturbation bounds never violated", check_perturbation),
    (4, "Vandermonde conditioning bounds and explicit inverse", check_conditioning),
    (5, "sample-complexity shot count meets eps1", check_sample_complexity),
    (6, "Chebyshev truncation, generating function and signal path", check_approximation),
    (7, "Lindblad gap, vectorization, abscissa and zero-mode detection", check_applications),
    (8, "matrix Bernstein tail", check_bernstein),
)


def run_criterion(number, seed=0):
    for num, name, fn in CRITERIA:
        if num == number:
            return _timed(num, name, fn, seed=seed)
    raise KeyError(number)


def run_all(seed=0, numbers=None):
    return [run_criterion(num, seed) for num, _, _ in CRITERIA if numbers is None or num in numbers]
