"""
Linear Langevin model of the double-cavity optomechanical system.

Two cavities (+ blue-detuned, − red-detuned) share one mechanical mode. After
linearisation the quadrature vector u = [x_m, p_m, X+, Y+, X−, Y−] obeys

    du/dt = A u + L ξ(t),    ½⟨{ξ_i(t), ξ_j(t')}⟩ = N_ij δ(t − t')

and the cavity outputs are y = B u − Π ξ  (a_out = √(2κ) a − a_in).

Frequencies and rates are in units of the mechanical frequency ω_m.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Mapping, Optional, Tuple

import numpy as np
from scipy import constants

from .exceptions import InvalidParameterError, TemperatureDomainError

logger = logging.getLogger('optomech')

STATE_ORDERING: Tuple[str, ...] = ('x_m', 'p_m', 'X+', 'Y+', 'X-', 'Y-')
OUTPUT_ORDERING: Tuple[str, ...] = ('X+', 'Y+', 'X-', 'Y-')

# Caption values of the reference parameter set (units of ω_m)
DEFAULT_KAPPA = 0.02
DEFAULT_G_MINUS = 0.15
DEFAULT_G_RATIO = 0.2
DEFAULT_Q_FACTOR = 1.5e5
DEFAULT_N_M = 500.0


class Frame(Enum):
    RWA = 'rwa'
    FULL = 'full'


# ========== Parameters ==========

@dataclass(frozen=True)
class SystemParams:
    """Physical rates and couplings, normalised to the mechanical frequency."""
    omega_m: float = 1.0
    kappa_plus: float = DEFAULT_KAPPA
    kappa_minus: float = DEFAULT_KAPPA
    gamma_m: float = 1.0 / DEFAULT_Q_FACTOR
    g_plus: float = DEFAULT_G_RATIO * DEFAULT_G_MINUS
    g_minus: float = DEFAULT_G_MINUS
    delta_plus: float = -1.0
    delta_minus: float = 1.0
    n_m: float = DEFAULT_N_M
    frame: Frame = Frame.RWA

    FLOAT_FIELDS = (
        'omega_m', 'kappa_plus', 'kappa_minus', 'gamma_m', 'g_plus', 'g_minus',
        'delta_plus', 'delta_minus', 'n_m',
    )

    def __post_init__(self):
        if isinstance(self.frame, str):
            object.__setattr__(self, 'frame', _parse_frame(self.frame))
        for name in self.FLOAT_FIELDS:
            value = getattr(self, name)
            if not isinstance(value, (int, float, np.floating, np.integer)) or isinstance(value, bool):
                raise InvalidParameterError(f"{name} must be a real number, got {value!r}", field=name)
            if not math.isfinite(value):
                raise InvalidParameterError(f"{name} must be finite, got {value}", field=name)
            object.__setattr__(self, name, float(value))

        for name in ('omega_m', 'kappa_plus', 'kappa_minus', 'gamma_m'):
            if getattr(self, name) <= 0:
                raise InvalidParameterError(f"{name} must be > 0, got {getattr(self, name)}", field=name)
        for name in ('g_plus', 'g_minus', 'n_m'):
            if getattr(self, name) < 0:
                raise InvalidParameterError(f"{name} must be >= 0, got {getattr(self, name)}", field=name)

        if not (math.isfinite(self.q_factor) and math.isfinite(self.cooperativity_minus)):
            raise InvalidParameterError("quality factor and cooperativity must be finite")

    # --- derived quantities ---

    @property
    def q_factor(self) -> float:
        return self.omega_m / self.gamma_m

    @property
    def cooperativity_minus(self) -> float:
        return 4.0 * self.g_minus ** 2 / (self.kappa_minus * self.gamma_m)

    @property
    def cooperativity_plus(self) -> float:
        return 4.0 * self.g_plus ** 2 / (self.kappa_plus * self.gamma_m)

    @property
    def g_ratio(self) -> float:
        return self.g_plus / self.g_minus if self.g_minus > 0 else math.inf

    def replace(self, **changes) -> 'SystemParams':
        """Copy with changed fields; invariants are checked again."""
        return dataclasses.replace(self, **changes)

    # --- serialization ---

    def to_dict(self) -> Dict[str, Any]:
        data = {name: getattr(self, name) for name in self.FLOAT_FIELDS}
        data['frame'] = self.frame.value
        return data

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> 'SystemParams':
        """
        Strict JSON ingestion: unknown keys are rejected.

        A ``temperature_mK`` + ``omega_m_hz`` pair may replace ``n_m``; when both
        are given the direct ``n_m`` wins.
        """
        allowed = set(cls.FLOAT_FIELDS) | {'frame', 'temperature_mK', 'omega_m_hz'}
        unknown = sorted(set(data) - allowed)
        if unknown:
            raise InvalidParameterError(f"Unknown parameter keys: {', '.join(unknown)}")

        values = {k: v for k, v in data.items() if k in cls.FLOAT_FIELDS or k == 'frame'}
        has_temperature = 'temperature_mK' in data or 'omega_m_hz' in data
        if has_temperature:
            if 'temperature_mK' not in data or 'omega_m_hz' not in data:
                raise InvalidParameterError("temperature_mK and omega_m_hz must be given together")
            if 'n_m' in data:
                logger.warning(
                    f"Both n_m={data['n_m']} and temperature_mK={data['temperature_mK']} given; "
                    f"using n_m"
                )
            else:
                values['n_m'] = n_m_from_temperature(
                    float(data['temperature_mK']) * 1e-3,
                    2.0 * math.pi * float(data['omega_m_hz']),
                )
        return cls(**values)


def _parse_frame(value: str) -> Frame:
    try:
        return Frame(value)
    except ValueError:
        raise InvalidParameterError(f"frame must be 'rwa' or 'full', got {value!r}", field='frame')


def n_m_from_temperature(temperature: float, omega_m: float) -> float:
    """
    Bose occupation (e^{ħω_m/k_B T} − 1)^{-1}.

    Args:
        temperature: reservoir temperature in kelvin
        omega_m: mechanical angular frequency in rad/s
    """
    if not temperature > 0:
        raise TemperatureDomainError(f"temperature must be > 0 K, got {temperature}")
    x = constants.hbar * omega_m / (constants.k * temperature)
    if x > 700:
        return 0.0
    return 1.0 / math.expm1(x)


# ========== Linear model ==========

@dataclass(frozen=True)
class LinearModel:
    """Drift, noise and output maps of the linear Langevin system."""
    drift: np.ndarray
    noise_input: np.ndarray
    input_diffusion: np.ndarray
    output_map: np.ndarray
    output_input_projector: np.ndarray
    frame: Frame
    params: SystemParams
    dim: int = 6
    ordering: Tuple[str, ...] = field(default=STATE_ORDERING)

    def __post_init__(self):
        for name in ('drift', 'noise_input', 'input_diffusion', 'output_map', 'output_input_projector'):
            array = np.array(getattr(self, name), dtype=float)
            array.setflags(write=False)
            object.__setattr__(self, name, array)

    @property
    def diffusion(self) -> np.ndarray:
        """D = L N Lᵀ, the diffusion matrix of the Lyapunov equation."""
        return self.noise_input @ self.input_diffusion @ self.noise_input.T

    def to_dict(self) -> Dict[str, Any]:
        return {
            'dim': self.dim,
            'frame': self.frame.value,
            'ordering': list(self.ordering),
            'drift': self.drift.tolist(),
            'noise_input': self.noise_input.tolist(),
            'input_diffusion': self.input_diffusion.tolist(),
            'output_map': self.output_map.tolist(),
            'output_input_projector': self.output_input_projector.tolist(),
            'params': self.params.to_dict(),
        }


def _noise_structure(params: SystemParams):
    rates = np.array([
        params.gamma_m, params.gamma_m,
        params.kappa_plus, params.kappa_plus,
        params.kappa_minus, params.kappa_minus,
    ])
    noise_input = np.diag(np.sqrt(2.0 * rates))
    # Cavity baths are at zero occupation
    input_diffusion = np.diag([params.n_m + 0.5, params.n_m + 0.5, 0.5, 0.5, 0.5, 0.5])

    output_map = np.zeros((4, 6))
    projector = np.zeros((4, 6))
    for row, col in enumerate(range(2, 6)):
        output_map[row, col] = math.sqrt(2.0 * rates[col])
        projector[row, col] = 1.0
    return noise_input, input_diffusion, output_map, projector


def _rwa_drift(params: SystemParams) -> np.ndarray:
    gp, gm = params.g_plus, params.g_minus
    kp, km, g = params.kappa_plus, params.kappa_minus, params.gamma_m
    return np.array([
        [-g, 0.0, 0.0, gp, 0.0, -gm],
        [0.0, -g, gp, 0.0, gm, 0.0],
        [0.0, gp, -kp, 0.0, 0.0, 0.0],
        [gp, 0.0, 0.0, -kp, 0.0, 0.0],
        [0.0, -gm, 0.0, 0.0, -km, 0.0],
        [gm, 0.0, 0.0, 0.0, 0.0, -km],
    ])


def build_rwa_model(params: SystemParams) -> LinearModel:
    """Rotating-frame model: detuning-free drift matrix, mechanics-first ordering."""
    drift = _rwa_drift(params)
    noise_input, input_diffusion, output_map, projector = _noise_structure(params)
    logger.debug(f"Built rwa model: G+={params.g_plus}, G-={params.g_minus}, C-={params.cooperativity_minus:.3g}")
    return LinearModel(
        drift=drift,
        noise_input=noise_input,
        input_diffusion=input_diffusion,
        output_map=output_map,
        output_input_projector=projector,
        frame=Frame.RWA,
        params=params,
    )


def build_full_model(params: SystemParams, rotate_mechanics: bool = True) -> LinearModel:
    """
    Drive-frame model of the linearised Hamiltonian including Δ± a†a and ω_m b†b.

    A term Δ a†a contributes Ẋ = ΔY, Ẏ = −ΔX, so every 2×2 block gains
    [[0, Δ], [−Δ, 0]]. Dissipation and noise are those of the rwa model.
    """
    drift = _rwa_drift(params)
    rotations = (
        (0, params.omega_m if rotate_mechanics else 0.0),
        (2, params.delta_plus),
        (4, params.delta_minus),
    )
    for index, frequency in rotations:
        drift[index, index + 1] += frequency
        drift[index + 1, index] -= frequency

    noise_input, input_diffusion, output_map, projector = _noise_structure(params)
    logger.debug(
        f"Built full model: Δ+={params.delta_plus}, Δ-={params.delta_minus}, "
        f"rotate_mechanics={rotate_mechanics}"
    )
    return LinearModel(
        drift=drift,
        noise_input=noise_input,
        input_diffusion=input_diffusion,
        output_map=output_map,
        output_input_projector=projector,
        frame=Frame.FULL,
        params=params,
    )


def build_model(params: SystemParams) -> LinearModel:
    """Build the model in the frame requested by ``params.frame``."""
    if params.frame is Frame.FULL:
        return build_full_model(params)
    return build_rwa_model(params)


def vacuum_params(**overrides) -> SystemParams:
    """Default parameters with both couplings switched off."""
    values = {'g_plus': 0.0, 'g_minus': 0.0}
    values.update(overrides)
    return SystemParams(**values)
