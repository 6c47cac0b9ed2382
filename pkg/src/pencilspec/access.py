"""Measurement-statistics emulation for Hadamard tests and amplitude estimation.

Each signal entry (t, real/imag part) draws from its own random substream keyed
by ``(seed, trial, family, t, part)``, so entries can be sampled in any order or
concurrently and still reproduce the serial result.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (InvalidAccuracy, InvalidProbability, NormalizedValueOutOfRange,
                     PreconditionError)
from .signals import Family, SignalSeries, ideal_signal

PROB_SLACK = 1e-12
# Beyond this shot count the binomial draw is replaced by its normal limit.
NORMAL_APPROX_SHOTS = 2 ** 62


@dataclass(frozen=True)
class AccessModel:
    mode: str = "exact"
    shots: Optional[int] = None
    eps: Optional[float] = None
    delta: Optional[float] = None
    seed: int = 0
    c_qae: float = 1.0

    def __post_init__(self):
        if self.mode not in ("exact", "hadamard", "qae"):
            raise PreconditionError(f"unknown access mode {self.mode!r}")
        if self.mode == "hadamard" and (self.shots is None or int(self.shots) < 1):
            raise PreconditionError("Hadamard access needs a positive shot count")
        if self.mode == "qae":
            _check_accuracy(self.eps, self.delta)
            if not self.c_qae > 0:
                raise PreconditionError("c_qae must be positive")

    @classmethod
    def exact(cls, seed=0):
        return cls("exact", seed=seed)

    @classmethod
    def hadamard(cls, shots, seed=0):
        return cls("hadamard", shots=int(shots), seed=seed)

    @classmethod
    def amplitude_estimation(cls, eps, delta, seed=0, c_qae=1.0):
        return cls("qae", eps=float(eps), delta=float(delta), seed=seed, c_qae=c_qae)

    def part_noise(self):
        """Typical error of one normalized real or imaginary part."""
        if self.mode == "hadamard":
            return 1.0 / math.sqrt(self.shots)
        if self.mode == "qae":
            return 2.0 * self.eps
        return 0.0

    def to_dict(self):
        return {"mode": self.mode, "shots": self.shots, "eps": self.eps,
                "delta": self.delta, "seed": self.seed, "c_qae": self.c_qae}


@dataclass(frozen=True)
class NoisySignalEstimate:
    value: complex
    scale_applied: float
    shots_or_queries: int


def _check_probability(p):
    if not (-PROB_SLACK <= p <= 1 + PROB_SLACK):
        raise InvalidProbability(f"probability {p!r} outside [0, 1]")
    return min(max(float(p), 0.0), 1.0)


def _check_accuracy(eps, delta):
    if eps is None or not (0 < eps < 0.5):
        raise InvalidAccuracy(f"eps must lie in (0, 1/2), got {eps}")
    if delta is None or not (0 < delta < 1):
        raise InvalidAccuracy(f"delta must lie in (0, 1), got {delta}")


def hadamard_sample(p_plus, m, rng):
    """Mean of ``m`` independent +-1 outcomes with P(+1) = ``p_plus``."""
    p = _check_probability(p_plus)
    m = int(m)
    if m < 1:
        raise PreconditionError("shot count must be positive")
    if m >= NORMAL_APPROX_SHOTS:
        mean = 2 * p - 1
        std = 2 * math.sqrt(p * (1 - p) / m)
        return float(np.clip(mean + std * rng.standard_normal(), -1.0, 1.0))
    plus = int(rng.binomial(m, p))
    return (2 * plus - m) / m


def qae_queries(eps, delta, c_qae=1.0):
    return int(math.ceil(c_qae / eps * math.log(1.0 / delta)))


def qae_sample(p, eps, delta, rng, c_qae=1.0):
    """Amplitude-estimation outcome: within ``eps`` of ``p`` with probability 1-delta,
    otherwise uniform on [0, 1]."""
    _check_accuracy(eps, delta)
    p = _check_probability(p)
    if rng.random() < delta:
        p_tilde = rng.random()
    else:
        p_tilde = rng.uniform(max(0.0, p - eps), min(1.0, p + eps))
    return float(p_tilde), qae_queries(eps, delta, c_qae)


def entry_rng(seed, trial, family, t, part):
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(trial), Family(family).code, int(t), int(part)]))


def default_alpha_p(model, family, R):
    """Smallest admissible normalization keeping normalized values in [-1, 1].

    Equal to 1/2 when every f_t(A) is a contraction.
    """
    if family.tag is Family.POWER:
        return None
    worst = 0.0
    for t in range(2 * R):
        F = model.apply(lambda lam: family.kernel(lam, t))
        worst = max(worst, np.linalg.norm(F, 2))
    return max(0.5, worst / 2)


def entry_scale(family, t, alpha_p):
    if family.tag is Family.POWER:
        return family.alpha ** t
    return 2.0 * alpha_p


def _estimate_value(ideal, scale, access, rngs):
    target = ideal / scale
    if max(abs(target.real), abs(target.imag)) > 1 + PROB_SLACK:
        raise NormalizedValueOutOfRange(
            f"normalized value {target:.6g} outside the unit square; check alpha")
    if access.mode == "exact":
        return NoisySignalEstimate(complex(ideal), float(scale), 0)
    parts = []
    cost = 0
    for part, rng in zip((target.real, target.imag), rngs):
        p_plus = min(max((1 + part) / 2, 0.0), 1.0)
        if access.mode == "hadamard":
            parts.append(hadamard_sample(p_plus, access.shots, rng))
            cost += access.shots
        else:
            p_tilde, q = qae_sample(p_plus, access.eps, access.delta, rng, access.c_qae)
            parts.append(2 * p_tilde - 1)
            cost += q
    return NoisySignalEstimate(scale * complex(parts[0], parts[1]), float(scale), cost)


def estimate_signal_entry(model, expansion, family, t, access, rng=None, *, trial=0, alpha_p=None):
    """One noisy sample of the signal at time ``t``.

    Without ``rng`` the two parts use the keyed substreams, matching
    :func:`sample_series`.
    """
    ideal = ideal_signal(model, expansion, family, t // 2 + 1).values[t]
    if family.tag is not Family.POWER and alpha_p is None:
        alpha_p = default_alpha_p(model, family, t // 2 + 1)
    scale = entry_scale(family, t, alpha_p)
    if rng is None:
        rngs = [entry_rng(access.seed, trial, family.tag, t, part) for part in (0, 1)]
    else:
        rngs = [rng, rng]
    return _estimate_value(ideal, scale, access, rngs)


def sample_series(model, expansion, family, R, access, rng=None, *, trial=0, alpha_p=None):
    """Estimate t = 0..2R-1 once each. With ``rng`` given, substream seeds are
    drawn from it instead of from ``access.seed``."""
    ideal = ideal_signal(model, expansion, family, R).values
    if family.tag is not Family.POWER:
        if alpha_p is None:
            alpha_p = default_alpha_p(model, family, R)
        elif not alpha_p > 0:
            raise PreconditionError("alpha_p must be positive")
    base_seed = access.seed if rng is None else int(rng.integers(2 ** 63))
    values = np.empty(2 * R, dtype=np.complex128)
    cost = 0
    noise = 0.0
    for t in range(2 * R):
        scale = entry_scale(family, t, alpha_p)
        rngs = [entry_rng(base_seed, trial, family.tag, t, part) for part in (0, 1)]
        est = _estimate_value(ideal[t], scale, access, rngs)
        values[t] = est.value
        cost += est.shots_or_queries
        noise = max(noise, scale * access.part_noise() * math.sqrt(2))
    return SignalSeries(family, values, ideal=access.mode == "exact",
                        cost_total=cost, noise_scale=noise)
