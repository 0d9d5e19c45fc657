"""
Filtered output covariances of the two cavity ports.

The output quadratures y = B u − Π ξ are passed through causal exponential filters

    h_k(t) = √(2/τ) Θ(t) e^{−(1/τ + iΩ_k) t},    h̃_k(ω) = √(τ/π) / (1 − iτ(ω − Ω_k))

and the stationary covariance of the filtered quadratures is

    V_f = Re ∫ T̃(ω) M(ω) N M(ω)† T̃(ω)† dω,    M(ω) = B χ(ω) L − Π,

with χ(ω) = (−iωI − A)⁻¹ and T̃ the block-diagonal rotation kernels built from the
Fourier transforms of Re h_k and Im h_k. The output spectral matrix is normalised as
S_out = M N M† / 2π, so a vacuum port has S_out = ½I/2π and V_f = ½I.

Because the filters are themselves linear systems, V_f is also the stationary
covariance of the Langevin system augmented by two filter states; that Lyapunov form
is exact and is used both as a cross-check and as the fast method for sweeps.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Optional, Tuple

import numpy as np
from scipy import integrate, linalg

from .conf import get_setting
from .exceptions import (
    InstabilityError, InvalidParameterError, LyapunovSolverError, QuadratureError,
    SingularTransferError, UnphysicalCovarianceError,
)
from .langevin import Frame, LinearModel, OUTPUT_ORDERING, SystemParams
from .linalg import symmetrize, uncertainty_margin
from .stability import assess_stability

logger = logging.getLogger('optomech')

SYMMETRY_TOLERANCE = 1e-10
UNCERTAINTY_TOLERANCE = 1e-8
QUADRATURE_LIMIT = 20000
METHODS = ('quadrature', 'lyapunov')
PORTS = ('+', '-')


# ========== Filters ==========

@dataclass(frozen=True)
class FilterSpec:
    """
    Causal exponential filters in the frame of the model they are applied to.

    tau is in units of 1/ω_m; the centres are in units of ω_m.
    """
    tau: float
    omega_plus: float
    omega_minus: float
    omega_m: float = 1.0

    def __post_init__(self):
        for name in ('tau', 'omega_plus', 'omega_minus', 'omega_m'):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float, np.integer, np.floating)):
                raise InvalidParameterError(f"{name} must be a real number, got {value!r}", field=name)
            if not math.isfinite(value):
                raise InvalidParameterError(f"{name} must be finite", field=name)
            object.__setattr__(self, name, float(value))
        if self.tau <= 0:
            raise InvalidParameterError(f"tau must be > 0, got {self.tau}", field='tau')
        if self.omega_m <= 0:
            raise InvalidParameterError("omega_m must be > 0", field='omega_m')

    @property
    def epsilon(self) -> float:
        return self.tau * self.omega_m

    @classmethod
    def from_epsilon(cls, epsilon: float, omega_plus: float, omega_minus: float,
                     omega_m: float = 1.0) -> 'FilterSpec':
        if not epsilon > 0:
            raise InvalidParameterError(f"epsilon must be > 0, got {epsilon}", field='epsilon')
        return cls(tau=epsilon / omega_m, omega_plus=omega_plus, omega_minus=omega_minus, omega_m=omega_m)

    @classmethod
    def from_drive_frame(cls, epsilon: float, omega_plus: float, omega_minus: float,
                              params: SystemParams) -> 'FilterSpec':
        """
        Convert drive-frame centres (symmetric point Ω+ = −ω_m, Ω− = +ω_m) to the frame
        of the model built from ``params``. The rwa frame demodulates port k by Δ_k.
        """
        if params.frame is Frame.RWA:
            omega_plus = omega_plus - params.delta_plus
            omega_minus = omega_minus - params.delta_minus
        return cls.from_epsilon(epsilon, omega_plus, omega_minus, params.omega_m)

    def center(self, port) -> float:
        if port in (0, '+', 'plus'):
            return self.omega_plus
        if port in (1, '-', 'minus'):
            return self.omega_minus
        raise InvalidParameterError(f"Unknown port {port!r}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            'tau': self.tau,
            'epsilon': self.epsilon,
            'omega_plus': self.omega_plus,
            'omega_minus': self.omega_minus,
            'omega_m': self.omega_m,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> 'FilterSpec':
        values = dict(data)
        epsilon = values.pop('epsilon', None)
        unknown = set(values) - {'tau', 'omega_plus', 'omega_minus', 'omega_m'}
        if unknown:
            raise InvalidParameterError(f"Unknown filter keys: {', '.join(sorted(unknown))}")
        spec = cls(**values)
        if epsilon is not None and not math.isclose(float(epsilon), spec.epsilon, rel_tol=1e-12):
            raise InvalidParameterError(f"epsilon={epsilon} disagrees with tau·omega_m={spec.epsilon}")
        return spec


@dataclass(frozen=True)
class DriveFrameFilter:
    """Filter width ε and the two filter centres in the drive frame."""
    epsilon: float = 10.0
    omega_plus: float = -1.0
    omega_minus: float = 1.0

    def resolve(self, params: SystemParams) -> FilterSpec:
        return FilterSpec.from_drive_frame(self.epsilon, self.omega_plus, self.omega_minus, params)

    def replace(self, **changes) -> 'DriveFrameFilter':
        values = {'epsilon': self.epsilon, 'omega_plus': self.omega_plus, 'omega_minus': self.omega_minus}
        values.update(changes)
        return DriveFrameFilter(**values)

    def to_dict(self) -> Dict[str, float]:
        return {'epsilon': self.epsilon, 'omega_plus': self.omega_plus, 'omega_minus': self.omega_minus}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> 'DriveFrameFilter':
        unknown = set(data) - {'epsilon', 'omega_plus', 'omega_minus'}
        if unknown:
            raise InvalidParameterError(f"Unknown filter keys: {', '.join(sorted(unknown))}")
        return cls(**{k: float(v) for k, v in data.items()})


# ========== Covariance result ==========

@dataclass(frozen=True)
class FilteredCovariance:
    """Symmetric 4×4 covariance of [X+, Y+, X−, Y−] with provenance."""
    matrix: np.ndarray
    params: Optional[SystemParams] = None
    filter: Optional[FilterSpec] = None
    method: str = 'analytic'
    error_estimate: Optional[float] = None
    ordering: Tuple[str, ...] = field(default=OUTPUT_ORDERING)

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=float)
        if matrix.shape != (4, 4):
            raise InvalidParameterError(f"Covariance must be 4×4, got shape {matrix.shape}")
        if not np.all(np.isfinite(matrix)):
            raise UnphysicalCovarianceError("Covariance contains non-finite entries")
        if np.max(np.abs(matrix - matrix.T)) > SYMMETRY_TOLERANCE * max(1.0, np.max(np.abs(matrix))):
            raise UnphysicalCovarianceError("Covariance is not symmetric")
        matrix = symmetrize(matrix)
        margin = uncertainty_margin(matrix)
        if margin < -UNCERTAINTY_TOLERANCE:
            raise UnphysicalCovarianceError(
                f"Covariance violates the uncertainty relation (min eigenvalue {margin:.3e})"
            )
        matrix.setflags(write=False)
        object.__setattr__(self, 'matrix', matrix)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'ordering': list(self.ordering),
            'matrix': self.matrix.tolist(),
            'method': self.method,
            'error_estimate': self.error_estimate,
            'params': self.params.to_dict() if self.params else None,
            'filter': self.filter.to_dict() if self.filter else None,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> 'FilteredCovariance':
        unknown = set(data) - {'ordering', 'matrix', 'method', 'error_estimate', 'params', 'filter'}
        if unknown:
            raise InvalidParameterError(f"Unknown covariance keys: {', '.join(sorted(unknown))}")
        if 'ordering' in data and tuple(data['ordering']) != OUTPUT_ORDERING:
            raise InvalidParameterError(f"Unsupported quadrature ordering {data['ordering']}")
        return cls(
            matrix=np.array(data['matrix'], dtype=float),
            params=SystemParams.from_dict(data['params']) if data.get('params') else None,
            filter=FilterSpec.from_dict(data['filter']) if data.get('filter') else None,
            method=data.get('method', 'analytic'),
            error_estimate=data.get('error_estimate'),
        )


# ========== Frequency-domain building blocks ==========

def transfer(model: LinearModel, omega: float) -> np.ndarray:
    """Resolvent χ(ω) = (−iωI − A)⁻¹."""
    return _solve_resolvent(model, omega, np.eye(model.dim))


def _solve_resolvent(model: LinearModel, omega: float, rhs: np.ndarray) -> np.ndarray:
    system = -1j * omega * np.eye(model.dim) - model.drift
    try:
        result = np.linalg.solve(system, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularTransferError(f"−iωI − A is singular at ω={omega}", omega=omega) from exc
    if not np.all(np.isfinite(result)):
        raise SingularTransferError(f"Resolvent is not finite at ω={omega}", omega=omega)
    return result


def output_noise_map(model: LinearModel, omega: float) -> np.ndarray:
    """M(ω) = B χ(ω) L − Π, mapping input noises to output quadratures."""
    return model.output_map @ _solve_resolvent(model, omega, model.noise_input) - model.output_input_projector


def output_spectral_matrix(model: LinearModel, omega: float) -> np.ndarray:
    """Symmetrised output spectral matrix S_out(ω) = M N M† / 2π (Hermitian)."""
    _require_stable(model)
    m = output_noise_map(model, omega)
    spectrum = m @ model.input_diffusion @ m.conj().T / (2.0 * math.pi)
    return 0.5 * (spectrum + spectrum.conj().T)


def filter_fourier(filter: FilterSpec, k, omega: float) -> complex:
    """h̃_k(ω) = √(τ/π) / (1 − iτ(ω − Ω_k))."""
    tau = filter.tau
    return math.sqrt(tau / math.pi) / (1.0 - 1j * tau * (omega - filter.center(k)))


def rotation_kernel(filter: FilterSpec, omega: float) -> np.ndarray:
    """Block-diagonal T̃(ω) acting on [X+, Y+, X−, Y−]."""
    kernel = np.zeros((4, 4), dtype=complex)
    for index, port in enumerate(PORTS):
        h = filter_fourier(filter, port, omega)
        h_mirror = np.conj(filter_fourier(filter, port, -omega))
        h_real = 0.5 * (h + h_mirror)
        h_imag = (h - h_mirror) / 2j
        block = slice(2 * index, 2 * index + 2)
        kernel[block, block] = [[h_real, -h_imag], [h_imag, h_real]]
    return kernel


# ========== Integration helpers ==========

def integration_window(model: LinearModel, filter: FilterSpec) -> float:
    params = model.params
    return max(
        10.0 / filter.tau,
        10.0 * (params.kappa_plus + params.kappa_minus + params.gamma_m)
        + abs(filter.omega_plus) + abs(filter.omega_minus),
    )


def _breakpoints(model: LinearModel, window: float, centers=()) -> list:
    candidates = {0.0}
    for center in centers:
        candidates.update((center, -center))
    candidates.update(float(v) for v in np.linalg.eigvals(model.drift).imag)
    return sorted(p for p in candidates if -window < p < window)


def _integrate_line(integrand, window: float, points, epsabs: float, label: str, epsrel: float = 1e-10):
    """∫ over the whole real line as two tails plus a panelled central interval."""
    pieces = (
        (-np.inf, -window, None),
        (-window, window, points or None),
        (window, np.inf, None),
    )
    total, total_error = None, 0.0
    for lower, upper, breakpoints in pieces:
        value, error, info = integrate.quad_vec(
            integrand, lower, upper,
            epsabs=epsabs / len(pieces), epsrel=epsrel, norm='max',
            limit=QUADRATURE_LIMIT, points=breakpoints, full_output=True,
        )
        if not info.success:
            raise QuadratureError(
                f"{label}: quadrature on [{lower}, {upper}] did not converge "
                f"(error estimate {error:.3e}): {info.message}",
                error_estimate=float(error),
            )
        total = value if total is None else total + value
        total_error += float(error)

    tolerance = max(epsabs, epsrel * float(np.max(np.abs(total))))
    if total_error > 10.0 * tolerance:
        raise QuadratureError(
            f"{label}: achieved error {total_error:.3e} exceeds tolerance {tolerance:.1e}",
            error_estimate=total_error,
        )
    logger.debug(f"{label}: quadrature converged, error estimate {total_error:.2e}")
    return total, total_error


def _require_stable(model: LinearModel):
    verdict = assess_stability(model)
    if not verdict.stable:
        raise InstabilityError(
            f"Model is unstable (max Re λ = {verdict.margin:.3e}); no steady state exists",
            verdict=verdict,
        )
    return verdict


# ========== Filtered covariance ==========

def filtered_covariance(model: LinearModel, filter: FilterSpec, method: Optional[str] = None,
                        epsabs: Optional[float] = None) -> FilteredCovariance:
    """Stationary covariance of the filtered output quadratures."""
    method = method or get_setting('OMBELL_COVARIANCE_METHOD')
    if method == 'lyapunov':
        return filtered_covariance_lyapunov(model, filter)
    if method != 'quadrature':
        raise InvalidParameterError(f"method must be one of {METHODS}, got {method!r}", field='method')

    _require_stable(model)
    epsabs = float(epsabs if epsabs is not None else get_setting('OMBELL_QUAD_EPSABS'))
    noise = model.input_diffusion

    def integrand(omega):
        dressed = rotation_kernel(filter, omega) @ output_noise_map(model, omega)
        return (dressed @ noise @ dressed.conj().T).real

    window = integration_window(model, filter)
    points = _breakpoints(model, window, (filter.omega_plus, filter.omega_minus))
    matrix, error = _integrate_line(integrand, window, points, epsabs, 'filtered covariance')
    return FilteredCovariance(
        matrix=symmetrize(matrix),
        params=model.params,
        filter=filter,
        method='quadrature',
        error_estimate=error,
    )


def _filter_block(filter: FilterSpec) -> np.ndarray:
    block = np.zeros((4, 4))
    for index, port in enumerate(PORTS):
        center = filter.center(port)
        i = 2 * index
        block[i:i + 2, i:i + 2] = [[-1.0 / filter.tau, center], [-center, -1.0 / filter.tau]]
    return block


def augmented_system(model: LinearModel, filter: FilterSpec):
    """
    Drift and noise input of the Langevin system extended by the filter states.

    Each filter obeys ż_k = −(1/τ + iΩ_k) z_k + √(2/τ) a_k^out, written in quadratures.
    """
    gain = math.sqrt(2.0 / filter.tau)
    drift = np.zeros((model.dim + 4, model.dim + 4))
    drift[:model.dim, :model.dim] = model.drift
    drift[model.dim:, :model.dim] = gain * model.output_map
    drift[model.dim:, model.dim:] = _filter_block(filter)
    noise_input = np.vstack([model.noise_input, -gain * model.output_input_projector])
    return drift, noise_input


def _solve_lyapunov(drift: np.ndarray, diffusion: np.ndarray, label: str) -> np.ndarray:
    try:
        solution = linalg.solve_continuous_lyapunov(drift, -diffusion)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise LyapunovSolverError(f"{label}: Lyapunov solve failed: {exc}") from exc
    if not np.all(np.isfinite(solution)):
        raise LyapunovSolverError(f"{label}: Lyapunov solution is not finite")
    return symmetrize(solution)


def filtered_covariance_lyapunov(model: LinearModel, filter: FilterSpec) -> FilteredCovariance:
    """Exact filtered covariance from the augmented Lyapunov equation."""
    _require_stable(model)
    drift, noise_input = augmented_system(model, filter)
    diffusion = noise_input @ model.input_diffusion @ noise_input.T
    solution = _solve_lyapunov(drift, diffusion, 'filtered covariance')
    return FilteredCovariance(
        matrix=solution[model.dim:, model.dim:],
        params=model.params,
        filter=filter,
        method='lyapunov',
    )


# ========== Intracavity covariance ==========

def intracavity_covariance_lyapunov(model: LinearModel) -> np.ndarray:
    """Solution of A V + V Aᵀ + D = 0 (6×6, ordering of the model state)."""
    _require_stable(model)
    return _solve_lyapunov(model.drift, model.diffusion, 'intracavity covariance')


def intracavity_covariance_spectral(model: LinearModel, epsabs: Optional[float] = None) -> np.ndarray:
    """(1/2π) ∫ χ(ω) D χ(ω)† dω, the frequency-domain form of the Lyapunov solution."""
    _require_stable(model)
    epsabs = float(epsabs if epsabs is not None else get_setting('OMBELL_QUAD_EPSABS'))
    diffusion = model.diffusion

    def integrand(omega):
        chi = transfer(model, omega)
        return (chi @ diffusion @ chi.conj().T).real / (2.0 * math.pi)

    params = model.params
    window = 10.0 * (params.kappa_plus + params.kappa_minus + params.gamma_m) + 2.0 * params.omega_m
    points = _breakpoints(model, window)
    matrix, _ = _integrate_line(integrand, window, points, epsabs, 'intracavity covariance', epsrel=1e-8)
    return symmetrize(matrix)
