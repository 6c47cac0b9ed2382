"""Command-line experiment runner.

Config files hold ``key = value`` lines (``#`` starts a comment). Recognised keys:

instance
    matrix           path to a matrix file (otherwise a random instance is generated)
    state            path to a state file (default: maximally mixed)
    dim, sparsity    generated dimension and sparsity (defaults 8 and 2)
    min_gap          minimal normalized support gap (0.1)
    c_min            minimal coefficient modulus (0.05)
    spectrum         complex | real | stable (matches the family by default)
    nonnormality     eigenvector skew of generated matrices (0.5)
    instance_seed    seed of the generator (defaults to ``seed``)
estimation
    family           power | fourier | exponential (power)
    access           exact | hadamard | qae (exact)
    shots            Hadamard shot count per entry part (100000)
    eps, delta       amplitude-estimation accuracy and failure rate (1e-3, 1e-2)
    c_qae            amplitude-estimation query constant (1.0)
    probe            Hankel probe dimension (4)
    known_sparsity   true to skip sparsity estimation (false)
    trials, seed     repetitions and master seed (1, 0)
scaling
    hadamard_shots   comma list of shot counts
    qae_eps          comma list of accuracies
bounds
    bounds_sparsity  sparsity of the bound sweep (3)
    gap_grid         comma list of normalized gaps
liouvillian
    lindblad         path to a Lindblad spec (otherwise a damped qubit)
    gamma, omega     damped-qubit rate and splitting (0.4, 0.0)

Exit codes: 0 ok, 2 config error, 3 precondition violation, 4 numerical failure.
"""

import argparse
import csv
import io as _io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from . import bounds as B
from .access import AccessModel, default_alpha_p
from .acceptance import HADAMARD_SHOTS, QAE_EPS, fit_slope, run_all, scaling_sweep
from .applications import (abscissa_pipeline, damped_qubit_spec, distinct_eigenvalues,
                           liouvillian_pipeline)
from .errors import ConfigError, PencilError
from .instances import random_instance, scaling_instance
from .io import atomic_write, read_config, read_lindblad, read_matrix, read_state
from .pencil import estimate_eigenvalues
from .signals import Family, SignalFamily
from .spectral import InitialState, eig_decompose, expand_initial_state, support_statistics

FAMILIES = ("power", "fourier", "exponential")
ACCESS = ("exact", "hadamard", "qae")


@dataclass
class ExperimentConfig:
    matrix: Optional[str] = None
    state: Optional[str] = None
    dim: int = 8
    sparsity: int = 2
    min_gap: float = 0.1
    c_min: float = 0.05
    spectrum: Optional[str] = None
    nonnormality: float = 0.5
    instance_seed: Optional[int] = None
    family: str = "power"
    access: str = "exact"
    shots: int = 100000
    eps: float = 1e-3
    delta: float = 1e-2
    c_qae: float = 1.0
    probe: int = 4
    known_sparsity: bool = False
    trials: int = 1
    seed: int = 0
    hadamard_shots: tuple = HADAMARD_SHOTS
    qae_eps: tuple = QAE_EPS
    bounds_sparsity: int = 3
    gap_grid: tuple = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.8, 1.0)
    lindblad: Optional[str] = None
    gamma: float = 0.4
    omega: float = 0.0
    base_dir: str = field(default=".", repr=False)

    def resolve(self, path):
        return path if path is None or os.path.isabs(path) else os.path.join(self.base_dir, path)

    def access_model(self):
        if self.access == "hadamard":
            return AccessModel.hadamard(self.shots, seed=self.seed)
        if self.access == "qae":
            return AccessModel.amplitude_estimation(self.eps, self.delta, seed=self.seed, c_qae=self.c_qae)
        return AccessModel.exact(seed=self.seed)


def _to_bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _to_int(text):
    val = float(text)
    if val != int(val):
        raise ValueError(f"expected an integer, got {text!r}")
    return int(val)


def _float_list(text):
    return tuple(float(t) for t in text.split(",") if t.strip())


_PARSERS = {
    "matrix": str, "state": str, "lindblad": str, "spectrum": str, "family": str, "access": str,
    "dim": _to_int, "sparsity": _to_int, "probe": _to_int, "trials": _to_int, "seed": _to_int,
    "instance_seed": _to_int, "shots": _to_int, "bounds_sparsity": _to_int,
    "min_gap": float, "c_min": float, "nonnormality": float, "eps": float, "delta": float,
    "c_qae": float, "gamma": float, "omega": float, "known_sparsity": _to_bool,
    "hadamard_shots": _float_list, "qae_eps": _float_list, "gap_grid": _float_list,
}


def config_from_entries(entries, path="<config>", base_dir="."):
    cfg = ExperimentConfig(base_dir=base_dir)
    for key, (raw, line) in entries.items():
        if key not in _PARSERS:
            raise ConfigError(f"{path}:{line}: unknown key {key!r}")
        try:
            setattr(cfg, key, _PARSERS[key](raw))
        except ValueError as exc:
            raise ConfigError(f"{path}:{line}: {key}: {exc}") from None
    where = {k: line for k, (_, line) in entries.items()}

    def fail(key, msg):
        loc = f"{path}:{where[key]}" if key in where else path
        raise ConfigError(f"{loc}: {key}: {msg}")

    if cfg.family not in FAMILIES:
        fail("family", f"expected one of {', '.join(FAMILIES)}")
    if cfg.access not in ACCESS:
        fail("access", f"expected one of {', '.join(ACCESS)}")
    if cfg.spectrum is not None and cfg.spectrum not in ("complex", "real", "stable"):
        fail("spectrum", "expected complex, real or stable")
    for key in ("dim", "sparsity", "probe", "trials", "shots", "bounds_sparsity"):
        if getattr(cfg, key) < 1:
            fail(key, "must be positive")
    if cfg.sparsity > cfg.dim:
        fail("sparsity", "cannot exceed dim")
    return cfg


def load_config(path):
    if path is None:
        return ExperimentConfig()
    entries = read_config(path)
    return config_from_entries(entries, str(path), os.path.dirname(os.path.abspath(path)))


# ---------------------------------------------------------------- helpers

def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(report):
    return json.dumps(_jsonable(report), sort_keys=True, indent=2) + "\n"


def to_csv(rows):
    if not rows:
        return ""
    buf = _io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _jsonable(v) for k, v in row.items()})
    return buf.getvalue()


def thread_count(cli_value):
    if cli_value is not None:
        return max(1, cli_value)
    env = os.environ.get("PENCILSPEC_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"PENCILSPEC_THREADS: expected an integer, got {env!r}") from None
    return 1


def _parallel(fn, items, threads):
    """Map ``fn`` over ``items`` and return results in input order."""
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def build_instance(cfg):
    """(model, expansion, truth, description) for the configured instance."""
    family = Family(cfg.family)
    fourier = family is Family.FOURIER
    if cfg.matrix:
        A = read_matrix(cfg.resolve(cfg.matrix))
        model = eig_decompose(A, fourier=fourier)
        if cfg.state:
            rho = read_state(cfg.resolve(cfg.state))
        else:
            rho = InitialState.density(np.eye(model.N) / model.N)
        exp = expand_initial_state(rho, model)
        truth = distinct_eigenvalues(model.eigenvalues[exp.support])
        return model, exp, truth, {"source": "file", "matrix": cfg.matrix, "state": cfg.state}
    spectrum = cfg.spectrum or {"power": "complex", "fourier": "real", "exponential": "stable"}[cfg.family]
    seed = cfg.seed if cfg.instance_seed is None else cfg.instance_seed
    inst = random_instance(np.random.default_rng(seed), cfg.dim, cfg.sparsity, spectrum=spectrum,
                           min_gap=cfg.min_gap, c_min=cfg.c_min, nonnormality=cfg.nonnormality,
                           fourier=fourier)
    return inst.model, inst.expansion, inst.truth, {
        "source": "generated", "dim": cfg.dim, "sparsity": cfg.sparsity, "spectrum": spectrum,
        "instance_seed": seed, "min_gap": cfg.min_gap, "c_min": cfg.c_min}


# ---------------------------------------------------------------- subcommands

def run_estimate(cfg, threads=1):
    model, exp, truth, desc = build_instance(cfg)
    fam = SignalFamily(Family(cfg.family), model.alpha)
    access = cfg.access_model()
    R = max(cfg.probe, exp.r) if cfg.known_sparsity else cfg.probe
    r = exp.r if cfg.known_sparsity else None
    alpha_p = None if fam.tag is Family.POWER else default_alpha_p(model, fam, R)

    def one(trial):
        return estimate_eigenvalues(model, exp, fam, R, access, r=r, trial=trial, truth=truth,
                                    alpha_p=alpha_p)

    reports = _parallel(one, range(cfg.trials), threads)
    nodes = fam.node(truth)
    noise = max(rep.noise_scale for rep in reports)
    bound_reports = B.instance_bound_reports(
        nodes, exp.coeffs[:len(nodes)] if len(nodes) == exp.r else np.ones(len(nodes)),
        E_norm=B.frobenius_inflation(noise, len(nodes)), alpha=model.alpha, kappa_J=model.kappa_J,
        eps=cfg.eps, delta=cfg.delta, family=cfg.family,
        wrap_gap=_kernels.wrap_min_gap(np.real(truth) / model.alpha) if model.real_spectrum else None)
    trials = []
    for k, rep in enumerate(reports):
        d = rep.to_dict()
        d["trial"] = k
        trials.append(d)
    return {
        "command": "estimate", "seed": cfg.seed, "instance": desc,
        "family": cfg.family, "access": access.to_dict(), "R": R, "alpha_A": model.alpha,
        "alpha_p": alpha_p, "truth": list(truth), "r_true": len(truth), "support": support_statistics(model, exp),
        "trials": trials,
        "cost_ledger": {"per_trial": [rep.cost_total for rep in reports],
                        "total": int(sum(rep.cost_total for rep in reports))},
        "matched_error_max": max((rep.matched_error for rep in reports if rep.matched_error is not None),
                                 default=None),
        "bounds": [b.to_dict() for b in bound_reports],
    }


def run_scaling(cfg, threads=1):
    inst = scaling_instance()
    trials = max(cfg.trials, 50)
    sweeps = [("hadamard", tuple(int(s) for s in cfg.hadamard_shots)), ("qae", cfg.qae_eps)]
    results = _parallel(lambda s: scaling_sweep(s[0], s[1], trials, cfg.seed, cfg.delta, cfg.c_qae, inst),
                        sweeps, threads)
    rows = [row for block in results for row in block]
    fits = {mode: fit_slope(block) for (mode, _), block in zip(sweeps, results)}
    exact = estimate_eigenvalues(inst.model, inst.expansion, SignalFamily(Family.POWER, inst.model.alpha),
                                 2, AccessModel.exact(), r=2, truth=inst.truth)
    return {"command": "scaling", "seed": cfg.seed, "trials_per_point": trials,
            "slopes": fits, "exact_error_floor": exact.matched_error, "table": rows}, rows


def run_bounds(cfg, threads=1):
    r = cfg.bounds_sparsity
    rows = []
    for gap in cfg.gap_grid:
        row = {"sparsity": r, "gap": gap}
        row["kappa_bound_general"] = B.kappa_bound_general(r, gap) if 0 < gap <= 2 else None
        row["vinv_frobenius_bound"] = B.vinv_frobenius_bound(r, gap)
        row["sample_complexity_general"] = B.sample_complexity_general(r, gap, cfg.eps, cfg.c_min, cfg.delta)
        params = {"r": r, "eps": cfg.eps, "delta": cfg.delta, "c_min": cfg.c_min, "alpha_A": 1.0,
                  "Delta_prime": gap, "zeta": 0.0, "alpha_beta": 1.0, "alpha_F": 1.0}
        for th in ("GeneralSample", "GeneralPurified", "ComplexSample", "ComplexPurified"):
            row[f"{th}_total"] = B.query_cost_model(th, params)[2]
        rows.append(row)
    monotone = all(
        all(rows[i][k] >= rows[i + 1][k] for k in rows[0] if k not in ("sparsity", "gap") and rows[i][k] is not None)
        for i in range(len(rows) - 1)) if list(cfg.gap_grid) == sorted(cfg.gap_grid) else None
    return {"command": "bounds", "sparsity": r, "eps": cfg.eps, "delta": cfg.delta, "c_min": cfg.c_min,
            "model": "scaling model (unit constants)", "monotone_in_gap": monotone,
            "table": rows}, rows


def run_liouvillian(cfg, threads=1):
    if cfg.lindblad:
        spec = read_lindblad(cfg.resolve(cfg.lindblad))
        source = cfg.lindblad
    else:
        spec = damped_qubit_spec(cfg.gamma, cfg.omega)
        source = {"damped_qubit": {"gamma": cfg.gamma, "omega": cfg.omega}}
    access = cfg.access_model()
    family = cfg.family if cfg.family != "power" else "exponential"
    results = _parallel(lambda k: liouvillian_pipeline(spec, access, R=cfg.probe, family=family, trial=k),
                        range(cfg.trials), threads)
    return {"command": "liouvillian", "spec": source, "family": family, "access": access.to_dict(),
            "exact_spectrum": list(results[0].exact_spectrum), "exact_gap": results[0].exact_gap,
            "trials": [{"trial": k, "gap": res.gap, "report": res.report.to_dict()}
                       for k, res in enumerate(results)],
            "note": "initial-state sparsity and c_min come from the dense eigenbasis; "
                    "a physical run cannot certify them"}


def run_abscissa(cfg, threads=1):
    if not cfg.matrix:
        raise ConfigError("abscissa needs 'matrix' in the config")
    A = read_matrix(cfg.resolve(cfg.matrix))
    rho = read_state(cfg.resolve(cfg.state)) if cfg.state else None
    access = cfg.access_model()
    results = _parallel(lambda k: abscissa_pipeline(A, access, rho=rho, R=cfg.probe, trial=k),
                        range(cfg.trials), threads)
    return {"command": "abscissa", "matrix": cfg.matrix, "access": access.to_dict(),
            "trials": [{"trial": k, "verdict": v.to_dict(), "report": rep.to_dict()}
                       for k, (v, rep) in enumerate(results)]}


def run_selftest(cfg, threads=1, stream=sys.stdout):
    results = run_all(seed=cfg.seed)
    for res in results:
        print(res.line(), file=stream)
    return {"command": "selftest", "seed": cfg.seed,
            "criteria": [{"number": r.number, "name": r.name, "passed": r.passed,
                          "details": r.details} for r in results]}, all(r.passed for r in results)


# ---------------------------------------------------------------- entry point

def build_parser():
    parser = argparse.ArgumentParser(prog="pencilspec", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("estimate", "scaling", "bounds", "liouvillian", "abscissa", "selftest"):
        p = sub.add_parser(name)
        p.add_argument("--config", help="key = value experiment config")
        p.add_argument("--seed", type=int, help="master seed (overrides the config)")
        p.add_argument("--out", help="report path (JSON); tables go next to it as .csv")
        p.add_argument("--trials", type=int, help="number of trials (overrides the config)")
        p.add_argument("--threads", type=int, help="worker threads (default: PENCILSPEC_THREADS or 1)")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            if args.seed < 0 or args.seed >= 2 ** 64:
                raise ConfigError("--seed must be an unsigned 64-bit integer")
            cfg.seed = args.seed
        if args.trials is not None:
            if args.trials < 1:
                raise ConfigError("--trials must be positive")
            cfg.trials = args.trials
        threads = thread_count(args.threads)
        table = None
        ok = True
        if args.command == "estimate":
            report = run_estimate(cfg, threads)
        elif args.command == "scaling":
            report, table = run_scaling(cfg, threads)
        elif args.command == "bounds":
            report, table = run_bounds(cfg, threads)
        elif args.command == "liouvillian":
            report = run_liouvillian(cfg, threads)
        elif args.command == "abscissa":
            report = run_abscissa(cfg, threads)
        else:
            report, ok = run_selftest(cfg, threads)
        text = dumps(report)
        if args.out:
            if table is not None:
                atomic_write(os.path.splitext(args.out)[0] + ".csv", to_csv(table))
            atomic_write(args.out, text)
        elif args.command != "selftest":
            sys.stdout.write(text)
    except PencilError as exc:
        print(f"pencilspec: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except np.linalg.LinAlgError as exc:
        print(f"pencilspec: numerical failure: {exc}", file=sys.stderr)
        return 4
    return 0 if ok else 4


if __name__ == "__main__":
    sys.exit(main())
