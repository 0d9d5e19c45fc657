"""
Monte-Carlo estimate of the filtered output covariance.

Classical noises with symmetrised quantum moments reproduce the symmetrised output
statistics of the linear Langevin system. The filtered quadratures z obey

    ż = F z + √(2/τ) (B u − Π ξ)

with F the one-pole filter generator (decay 1/τ, rotation Ω_k), so (u, z) is one
Ornstein-Uhlenbeck process. Each trajectory advances it with the exact one-step
map, which leaves the stationary covariance unchanged for any dt. The estimate is
the trajectory average of the time-averaged z zᵀ after a burn-in; the standard
error comes from the scatter between trajectories.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import asdict, dataclass
from typing import Any, Dict, Mapping, Optional

import numpy as np
from scipy import linalg

from .exceptions import InstabilityError, InvalidParameterError, TrajectoryBlowUpError
from .grids import evaluate_in_order
from .langevin import Frame, LinearModel
from .linalg import symmetrize
from .spectrum import FilterSpec, augmented_system
from .stability import assess_stability

logger = logging.getLogger('optomech')

STEP_SAFETY = 0.01
BLOW_UP_LIMIT = 1e12
NOISE_BLOCK = 2048
MAX_SEED = 2 ** 64


def max_rate(model: LinearModel) -> float:
    params = model.params
    return max(params.kappa_plus, params.kappa_minus, params.gamma_m * (params.n_m + 1.0))


@dataclass(frozen=True)
class SdeConfig:
    dt: float
    n_steps: int
    n_trajectories: int
    burn_in: int
    seed: int = 0
    batch_size: int = 50

    def __post_init__(self):
        if not (isinstance(self.dt, (int, float)) and math.isfinite(self.dt) and self.dt > 0):
            raise InvalidParameterError(f"dt must be > 0, got {self.dt}", field='dt')
        for name, minimum in (('n_steps', 1), ('n_trajectories', 2), ('burn_in', 0), ('batch_size', 1)):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < minimum:
                raise InvalidParameterError(f"{name} must be an integer >= {minimum}, got {value!r}", field=name)
        if isinstance(self.seed, bool) or not isinstance(self.seed, (int, np.integer)) \
                or not 0 <= self.seed < MAX_SEED:
            raise InvalidParameterError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}", field='seed')

    def check_step(self, model: LinearModel):
        limit = STEP_SAFETY / max_rate(model)
        if self.dt > limit * (1 + 1e-12):
            raise InvalidParameterError(
                f"dt={self.dt} exceeds {limit:.4g} = {STEP_SAFETY}/max(κ±, γ_m(n_m+1))", field='dt'
            )

    @classmethod
    def for_model(cls, model: LinearModel, filter: FilterSpec, n_trajectories: int = 200,
                  seed: int = 0, burn_in_time: Optional[float] = None,
                  duration: Optional[float] = None, batch_size: int = 50) -> 'SdeConfig':
        """
        Step from the rate rule (also resolving couplings and filter rotation),
        burn-in of 10 mechanical relaxation times, and a measurement window of
        twenty correlation times.
        """
        params = model.params
        fastest = max(
            max_rate(model), params.g_plus, params.g_minus,
            abs(filter.omega_plus), abs(filter.omega_minus), 1.0 / filter.tau,
        )
        if model.frame is Frame.FULL:
            fastest = max(fastest, params.omega_m, abs(params.delta_plus), abs(params.delta_minus))
        dt = STEP_SAFETY / fastest
        if burn_in_time is None:
            burn_in_time = 10.0 / params.gamma_m
        if duration is None:
            margin = abs(assess_stability(model).margin)
            correlation_time = max(filter.tau, 1.0 / margin if margin > 0 else filter.tau)
            duration = 20.0 * correlation_time
        return cls(
            dt=dt,
            n_steps=max(1, int(math.ceil(duration / dt))),
            n_trajectories=n_trajectories,
            burn_in=int(math.ceil(burn_in_time / dt)),
            seed=seed,
            batch_size=batch_size,
        )

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> 'SdeConfig':
        unknown = set(data) - {'dt', 'n_steps', 'n_trajectories', 'burn_in', 'seed', 'batch_size'}
        if unknown:
            raise InvalidParameterError(f"Unknown SDE config keys: {', '.join(sorted(unknown))}")
        return cls(**data)


@dataclass(frozen=True)
class SdeEstimate:
    estimate: np.ndarray
    stderr: np.ndarray
    config: SdeConfig
    wall_time: float = 0.0

    def within_standard_errors(self, reference, k: float = 3.0) -> bool:
        """|estimate − reference| < k·stderr for every element."""
        difference = np.abs(self.estimate - np.asarray(reference, dtype=float))
        return bool(np.all(difference < k * self.stderr))

    def to_dict(self) -> Dict[str, Any]:
        return {
            'estimate': self.estimate.tolist(),
            'stderr': self.stderr.tolist(),
            'config': self.config.to_dict(),
        }


def _discrete_system(model: LinearModel, filter: FilterSpec, dt: float):
    """
    Exact one-step map of the augmented process: w ← Φ w + ξ with Φ = e^{A dt} and
    Cov ξ = ∫₀^dt e^{As} G e^{Aᵀs} ds (Van Loan). Returns Φ and a square root of Cov ξ.
    """
    drift, noise_input = augmented_system(model, filter)
    size = drift.shape[0]
    diffusion = noise_input @ model.input_diffusion @ noise_input.T
    block = np.zeros((2 * size, 2 * size))
    block[:size, :size] = -drift
    block[:size, size:] = diffusion
    block[size:, size:] = drift.T
    exponential = linalg.expm(block * dt)
    propagator = exponential[size:, size:].T
    step_covariance = symmetrize(propagator @ exponential[:size, size:])
    values, vectors = np.linalg.eigh(step_covariance)
    return propagator, vectors * np.sqrt(np.clip(values, 0.0, None))


def _run_batch(model: LinearModel, propagator: np.ndarray, noise_gain: np.ndarray,
               config: SdeConfig, seeds, first_index: int) -> np.ndarray:
    """Time-averaged z zᵀ for each trajectory in the batch, shape (batch, 4, 4)."""
    generators = [np.random.default_rng(s) for s in seeds]
    batch = len(generators)
    dim = model.dim
    state = np.zeros((batch, propagator.shape[0]))
    second_moment = np.zeros((batch, 4, 4))
    total_steps = config.burn_in + config.n_steps
    propagator_t, gain_t = propagator.T, noise_gain.T

    step = 0
    while step < total_steps:
        block = min(NOISE_BLOCK, total_steps - step)
        # (block, batch, inputs); each trajectory draws from its own stream
        noise = np.stack([g.standard_normal((block, noise_gain.shape[1])) for g in generators], axis=1)
        kicks = noise @ gain_t
        for offset in range(block):
            state = state @ propagator_t + kicks[offset]
            if step + offset >= config.burn_in:
                filtered = state[:, dim:]
                second_moment += filtered[:, :, None] * filtered[:, None, :]
        step += block

        bad = ~np.all(np.isfinite(state) & (np.abs(state) < BLOW_UP_LIMIT), axis=1)
        if bad.any():
            trajectory = first_index + int(np.argmax(bad))
            logger.error(f"Trajectory {trajectory} diverged before step {step}")
            raise TrajectoryBlowUpError(
                f"Trajectory {trajectory} diverged before step {step}; the model or step size is unstable",
                step=step, trajectory=trajectory,
            )
    return second_moment / config.n_steps


def simulate_filtered_covariance(model: LinearModel, filter: FilterSpec, config: SdeConfig,
                                 threads: Optional[int] = None) -> SdeEstimate:
    """Estimate and per-element standard error of the filtered output covariance."""
    verdict = assess_stability(model)
    if not verdict.stable:
        raise InstabilityError(f"Model is unstable (max Re λ = {verdict.margin:.3e})", verdict=verdict)
    config.check_step(model)

    started = time.monotonic()
    propagator, noise_gain = _discrete_system(model, filter, config.dt)
    seeds = np.random.SeedSequence(config.seed).spawn(config.n_trajectories)
    batches = [
        (start, seeds[start:start + config.batch_size])
        for start in range(0, config.n_trajectories, config.batch_size)
    ]
    logger.info(
        f"SDE run: {config.n_trajectories} trajectories × {config.burn_in + config.n_steps} steps "
        f"(dt={config.dt:.4g}, seed={config.seed})"
    )
    results = evaluate_in_order(
        lambda item: _run_batch(model, propagator, noise_gain, config, item[1], item[0]),
        batches, threads,
    )
    samples = np.concatenate(results, axis=0)
    samples = 0.5 * (samples + np.transpose(samples, (0, 2, 1)))
    estimate = samples.mean(axis=0)
    stderr = samples.std(axis=0, ddof=1) / math.sqrt(config.n_trajectories)
    wall_time = time.monotonic() - started
    logger.info(f"SDE run finished in {wall_time:.1f}s, max stderr {stderr.max():.3e}")
    return SdeEstimate(estimate=estimate, stderr=stderr, config=config, wall_time=wall_time)
