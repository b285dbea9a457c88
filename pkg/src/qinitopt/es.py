"""Evolutionary search over distribution hyperparameters.

Each iteration perturbs the unconstrained hyperparameter vector with N_s
Gaussian rows (antithetic pairs by default), scores one parameter sample per
perturbation, optionally rank-shapes the scores, and ascends the resulting
gradient estimate. Every rollout draws from its own child stream keyed by
(master_seed, iteration, rollout), so trajectories are bit-identical whether
rollouts run serially or on a thread pool.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .distributions import (HyperParams, child_rng, from_unconstrained,
                            standard_normals, to_unconstrained)
from .scoring import utility_shape


@dataclass(frozen=True)
class EsConfig:
    eta: float = 0.05
    sigma_es: float = 0.1
    n_samples: int = 16
    n_iters: int = 50
    eps_converge: float = 1e-3
    antithetic: bool = True
    use_utility: bool = True

    def __post_init__(self):
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        if self.sigma_es <= 0:
            raise ValueError("sigma_es must be positive")
        if self.n_samples < 2:
            raise ValueError("need at least two rollouts")
        if self.antithetic and self.n_samples % 2:
            raise ValueError("antithetic sampling needs an even population")
        if self.n_iters < 0:
            raise ValueError("n_iters must be non-negative")
        if self.eps_converge <= 0:
            raise ValueError("eps_converge must be positive")


@dataclass
class EsTrace:
    """Per-iteration record of the search; one entry per completed iteration."""

    hyperparams: list = field(default_factory=list)  # constrained values
    unconstrained: list = field(default_factory=list)
    mean_score: list = field(default_factory=list)
    best_score: list = field(default_factory=list)
    update_l1: list = field(default_factory=list)
    converged: bool = False

    @property
    def n_iterations(self) -> int:
        return len(self.update_l1)


def perturbation_matrix(n_samples: int, dim: int, antithetic: bool,
                        rng: np.random.Generator) -> np.ndarray:
    """(n_samples, dim) standard-normal rows; antithetic mirrors the first half."""
    if n_samples < 1 or dim < 1:
        raise ValueError("population and dimension must be at least 1")
    if antithetic:
        if n_samples % 2:
            raise ValueError("antithetic sampling needs an even population")
        half = standard_normals(n_samples // 2 * dim, rng).reshape(-1, dim)
        return np.vstack([half, -half])
    return standard_normals(n_samples * dim, rng).reshape(n_samples, dim)


def es_optimize(score_eval, hp0, cfg: EsConfig, master_seed: int,
                workers: int | None = None):
    """Maximize E[score] over hyperparameters by evolutionary ascent.

    hp0 may be a HyperParams (searched through its unconstrained view) or a
    plain real vector (searched as-is, useful for direct objectives).
    score_eval(candidate, rng) must return a finite scalar. Returns the tuned
    hyperparameters in the input's form plus the iteration trace.
    """
    is_hp = isinstance(hp0, HyperParams)
    if is_hp:
        lam = to_unconstrained(hp0)
        materialize = lambda vec: from_unconstrained(hp0.family, vec)
    else:
        lam = np.array(hp0, dtype=float).reshape(-1)
        if lam.size == 0:
            raise ValueError("empty hyperparameter vector")
        materialize = lambda vec: vec.copy()
    trace = EsTrace()

    def run_rollout(iteration, j, lam_p):
        rng = child_rng(master_seed, "rollout", iteration, j)
        value = float(score_eval(materialize(lam_p), rng))
        if not np.isfinite(value):
            raise FloatingPointError("score evaluation returned a non-finite value")
        return value

    for iteration in range(cfg.n_iters):
        gamma = perturbation_matrix(cfg.n_samples, lam.size, cfg.antithetic,
                                    child_rng(master_seed, "perturb", iteration))
        candidates = lam[None, :] + cfg.sigma_es * gamma
        raw = np.empty(cfg.n_samples)
        try:
            if workers is not None and workers > 1:
                with ThreadPoolExecutor(max_workers=workers) as pool:
                    futures = [pool.submit(run_rollout, iteration, j, candidates[j])
                               for j in range(cfg.n_samples)]
                    for j, future in enumerate(futures):
                        raw[j] = future.result()
            else:
                for j in range(cfg.n_samples):
                    raw[j] = run_rollout(iteration, j, candidates[j])
        except FloatingPointError:
            raise
        except Exception as exc:
            raise RuntimeError(
                f"score evaluation failed at iteration {iteration}") from exc
        zeta = utility_shape(raw) if cfg.use_utility else raw
        if cfg.antithetic:
            # paired form: exact cancellation when both halves score equally
            half = cfg.n_samples // 2
            grad = gamma[:half].T @ (zeta[:half] - zeta[half:])
            grad /= cfg.n_samples * cfg.sigma_es
        else:
            grad = gamma.T @ zeta / (cfg.n_samples * cfg.sigma_es)
        delta = cfg.eta * grad
        if not np.all(np.isfinite(delta)):
            raise FloatingPointError("non-finite hyperparameter update")
        lam = lam + delta
        trace.unconstrained.append(tuple(lam))
        constrained = materialize(lam)
        trace.hyperparams.append(tuple(constrained.values) if is_hp
                                 else tuple(constrained))
        trace.mean_score.append(float(raw.mean()))
        trace.best_score.append(float(raw.max()))
        l1 = float(np.sum(np.abs(delta)))
        trace.update_l1.append(l1)
        if l1 <= cfg.eps_converge:
            trace.converged = True
            break
    return materialize(lam), trace
