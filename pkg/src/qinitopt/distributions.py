"""Initializing distributions for circuit parameters.

Two families: Beta(alpha, beta) scaled onto [0, scale] (full rotation period
2*pi by default) and Gaussian(mu, sigma). Hyperparameter search happens in an
unconstrained view (log alpha, log beta) or (mu, log sigma), so any update
maps back to valid constrained values.

Sampling is built from uniform draws only (Box-Muller normals, Marsaglia-Tsang
gammas): the draw sequence then depends on nothing but this file and the
counter-based bit stream, so results stay bit-identical across numpy versions
and across parallel schedules.
"""
from __future__ import annotations

from dataclasses import dataclass
import math
import zlib

import numpy as np

BETA = "beta"
GAUSSIAN = "gaussian"
FAMILIES = (BETA, GAUSSIAN)

DEFAULT_BETA_SCALE = 2.0 * math.pi


@dataclass(frozen=True)
class HyperParams:
    """Distribution hyperparameters: (alpha, beta) or (mu, sigma)."""

    family: str
    values: tuple[float, float]

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        a, b = self.values
        if not (math.isfinite(a) and math.isfinite(b)):
            raise ValueError("hyperparameters must be finite")
        if self.family == BETA and (a <= 0 or b <= 0):
            raise ValueError("Beta needs alpha > 0 and beta > 0")
        if self.family == GAUSSIAN and b <= 0:
            raise ValueError("Gaussian needs sigma > 0")

    @property
    def alpha(self) -> float:
        if self.family != BETA:
            raise AttributeError("alpha is a Beta hyperparameter")
        return self.values[0]

    @property
    def beta(self) -> float:
        if self.family != BETA:
            raise AttributeError("beta is a Beta hyperparameter")
        return self.values[1]

    @property
    def mu(self) -> float:
        if self.family != GAUSSIAN:
            raise AttributeError("mu is a Gaussian hyperparameter")
        return self.values[0]

    @property
    def sigma(self) -> float:
        if self.family != GAUSSIAN:
            raise AttributeError("sigma is a Gaussian hyperparameter")
        return self.values[1]


def to_unconstrained(hp: HyperParams) -> np.ndarray:
    """(log alpha, log beta) for Beta; (mu, log sigma) for Gaussian."""
    if hp.family == BETA:
        return np.array([math.log(hp.alpha), math.log(hp.beta)])
    return np.array([hp.mu, math.log(hp.sigma)])


def from_unconstrained(family: str, vec) -> HyperParams:
    vec = np.asarray(vec, dtype=float)
    if vec.shape != (2,) or not np.all(np.isfinite(vec)):
        raise ValueError("unconstrained vector must be two finite reals")
    if family == BETA:
        return HyperParams(BETA, (math.exp(vec[0]), math.exp(vec[1])))
    if family == GAUSSIAN:
        return HyperParams(GAUSSIAN, (float(vec[0]), math.exp(vec[1])))
    raise ValueError(f"unknown family {family!r}")


def child_rng(master_seed: int, *labels) -> np.random.Generator:
    """Counter-based generator for the stream (master_seed, *labels).

    Labels are ints or short strings; equal label paths give bit-identical
    streams, which makes every parallel rollout reproducible on its own.
    """
    parts = [int(master_seed)]
    for label in labels:
        parts.append(zlib.crc32(label.encode()) if isinstance(label, str)
                     else int(label))
    if any(part < 0 for part in parts):
        raise ValueError("seeds and labels must be non-negative")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(parts)))


def standard_normals(n: int, rng: np.random.Generator) -> np.ndarray:
    """n i.i.d. N(0,1) draws via Box-Muller on this generator's uniforms."""
    pairs = (n + 1) // 2
    u1 = 1.0 - rng.random(pairs)  # (0, 1], keeps the log finite
    u2 = rng.random(pairs)
    radius = np.sqrt(-2.0 * np.log(u1))
    z = np.concatenate([radius * np.cos(2.0 * np.pi * u2),
                        radius * np.sin(2.0 * np.pi * u2)])
    return z[:n]


def gamma_samples(shape: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """n Gamma(shape, 1) draws via Marsaglia-Tsang squeeze rejection."""
    if shape <= 0:
        raise ValueError("gamma shape must be positive")
    boost = None
    a = shape
    if a < 1.0:
        # Gamma(a) = Gamma(a+1) * U^(1/a)
        boost = rng.random(n) ** (1.0 / a)
        a = a + 1.0
    d = a - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    out = np.empty(n)
    filled = 0
    while filled < n:
        need = n - filled
        x = standard_normals(need, rng)
        v = (1.0 + c * x) ** 3
        u = rng.random(need)
        ok = v > 0
        logv = np.log(np.where(ok, v, 1.0))
        ok &= np.log(u) < 0.5 * x * x + d - d * v + d * logv
        accepted = d * v[ok]
        out[filled:filled + accepted.size] = accepted
        filled += accepted.size
    if boost is not None:
        out *= boost
    return out


def beta_samples(alpha: float, beta: float, n: int,
                 rng: np.random.Generator) -> np.ndarray:
    x = gamma_samples(alpha, n, rng)
    y = gamma_samples(beta, n, rng)
    return x / (x + y)


def sample_params(hp: HyperParams, p: int, rng: np.random.Generator,
                  scale: float = DEFAULT_BETA_SCALE) -> np.ndarray:
    """Draw a circuit parameter vector theta of length p from p(theta | hp)."""
    if p < 1:
        raise ValueError("need at least one parameter")
    if hp.family == GAUSSIAN:
        return hp.mu + hp.sigma * standard_normals(p, rng)
    return scale * beta_samples(hp.alpha, hp.beta, p, rng)


def init_guess(family: str, rng: np.random.Generator) -> HyperParams:
    """Starting hyperparameters for the search: mu ~ U(0.1, 0.5) and
    sigma ~ U(0.5, 1.0); log alpha and log beta each the log of a U(1, 5) draw."""
    if family == GAUSSIAN:
        mu = 0.1 + 0.4 * rng.random()
        sigma = 0.5 + 0.5 * rng.random()
        return HyperParams(GAUSSIAN, (mu, sigma))
    if family == BETA:
        log_a = math.log(1.0 + 4.0 * rng.random())
        log_b = math.log(1.0 + 4.0 * rng.random())
        return from_unconstrained(BETA, [log_a, log_b])
    raise ValueError(f"unknown family {family!r}")


def manual_baseline(family: str) -> HyperParams:
    """Hand-picked reference hyperparameters the searched ones are compared to."""
    if family == BETA:
        return HyperParams(BETA, (0.1, 1.5))
    if family == GAUSSIAN:
        return HyperParams(GAUSSIAN, (0.0, 1.0))
    raise ValueError(f"unknown family {family!r}")
