"""
Scalar analysis of a two-mode Gaussian covariance matrix (½-vacuum convention).

Conventions: V is ordered [X+, Y+, X−, Y−]; the hybrid quadrature
X = μ+(cos φ+ X+ + sin φ+ Y+) + μ−(cos φ− X− + sin φ− Y−) has variance
S_q = 2 wᵀVw / (μ+² + μ−²), so the vacuum gives the standard quantum limit S_q = 1.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, Tuple, Union

import numpy as np
from scipy import optimize

from .exceptions import InvalidParameterError, UnphysicalCovarianceError
from .linalg import local_rotation, partial_transpose, symmetrize, symplectic_eigenvalues
from .linalg import uncertainty_margin as _uncertainty_margin
from .spectrum import FilteredCovariance

logger = logging.getLogger('optomech')

SQL = 1.0
LOCAL_REALISM_BOUND = 2.0
BELL_CEILING = 2.1906
INVARIANT_TOLERANCE = 1e-10
SEPARABILITY_TOLERANCE = 1e-10

CovarianceLike = Union[FilteredCovariance, np.ndarray]


def _as_matrix(V: CovarianceLike) -> np.ndarray:
    matrix = V.matrix if isinstance(V, FilteredCovariance) else np.asarray(V, dtype=float)
    if matrix.shape != (4, 4):
        raise InvalidParameterError(f"Expected a 4×4 covariance, got shape {matrix.shape}")
    return matrix


# ========== Types ==========

@dataclass(frozen=True)
class QuadratureWeights:
    mu_plus: float
    mu_minus: float
    phi_plus: float
    phi_minus: float

    def __post_init__(self):
        if self.mu_plus < 0 or self.mu_minus < 0:
            raise InvalidParameterError("Quadrature weights must be non-negative")
        if self.mu_plus ** 2 + self.mu_minus ** 2 <= 0:
            raise InvalidParameterError("At least one quadrature weight must be non-zero")

    @property
    def vector(self) -> np.ndarray:
        return np.array([
            self.mu_plus * math.cos(self.phi_plus),
            self.mu_plus * math.sin(self.phi_plus),
            self.mu_minus * math.cos(self.phi_minus),
            self.mu_minus * math.sin(self.phi_minus),
        ])

    @classmethod
    def from_vector(cls, vector) -> 'QuadratureWeights':
        v = np.asarray(vector, dtype=float)
        return cls(
            mu_plus=float(math.hypot(v[0], v[1])),
            mu_minus=float(math.hypot(v[2], v[3])),
            phi_plus=float(math.atan2(v[1], v[0])),
            phi_minus=float(math.atan2(v[3], v[2])),
        )

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


@dataclass(frozen=True)
class StandardFormInvariants:
    n: float
    m: float
    c1: float
    c2: float
    c_tilde: float
    clamped: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class GaussianMetrics:
    s_q_min: float
    optimal_weights: QuadratureWeights
    purity: float
    invariants: StandardFormInvariants
    b_max: float
    entangled_by_sql: bool
    simon_separable: bool
    smallest_pt_eigenvalue: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            's_q_min': self.s_q_min,
            'optimal_weights': self.optimal_weights.to_dict(),
            'purity': self.purity,
            'invariants': self.invariants.to_dict(),
            'b_max': self.b_max,
            'entangled_by_sql': self.entangled_by_sql,
            'simon_separable': self.simon_separable,
            'smallest_pt_eigenvalue': self.smallest_pt_eigenvalue,
        }


# ========== Two-mode squeezing ==========

def s_q(V: CovarianceLike, w: QuadratureWeights) -> float:
    """Hybrid quadrature variance for the weights w."""
    v = _as_matrix(V)
    mp, mm = w.mu_plus, w.mu_minus
    cp, sp = math.cos(w.phi_plus), math.sin(w.phi_plus)
    cm, sm = math.cos(w.phi_minus), math.sin(w.phi_minus)
    variance = (
        mp ** 2 * (v[0, 0] * cp ** 2 + v[1, 1] * sp ** 2 + 2 * v[0, 1] * cp * sp)
        + mm ** 2 * (v[2, 2] * cm ** 2 + v[3, 3] * sm ** 2 + 2 * v[2, 3] * cm * sm)
        + 2 * mp * mm * (v[2, 0] * cp * cm + v[3, 1] * sp * sm + v[3, 0] * cp * sm + v[2, 1] * sp * cm)
    )
    return float(2.0 * variance / (mp ** 2 + mm ** 2))


def s_q_min(V: CovarianceLike) -> Tuple[float, QuadratureWeights]:
    """Global minimum 2·λ_min(V) and the weights read off the minimal eigenvector."""
    eigenvalues, eigenvectors = np.linalg.eigh(symmetrize(_as_matrix(V)))
    return float(2.0 * eigenvalues[0]), QuadratureWeights.from_vector(eigenvectors[:, 0])


def minimize_s_q_numerically(V: CovarianceLike, starts: int = 6) -> Tuple[float, QuadratureWeights]:
    """
    Direct minimisation of s_q over (μ±, φ±), with μ+ = cos θ, μ− = sin θ.

    Several deterministic starting points; the best local minimum is returned.
    """
    v = _as_matrix(V)

    def objective(x):
        theta, phi_plus, phi_minus = x
        w = np.array([
            math.cos(theta) * math.cos(phi_plus), math.cos(theta) * math.sin(phi_plus),
            math.sin(theta) * math.cos(phi_minus), math.sin(theta) * math.sin(phi_minus),
        ])
        return 2.0 * float(w @ v @ w)

    best = None
    for theta0 in np.linspace(0.1, math.pi / 2 - 0.1, starts // 2 or 1):
        for phase0 in (0.3, math.pi - 0.3):
            result = optimize.minimize(
                objective, x0=[theta0, phase0, -phase0], method='BFGS', options={'gtol': 1e-10},
            )
            if best is None or result.fun < best.fun:
                best = result

    theta, phi_plus, phi_minus = best.x
    weights = QuadratureWeights(
        mu_plus=abs(math.cos(theta)),
        mu_minus=abs(math.sin(theta)),
        phi_plus=phi_plus + (math.pi if math.cos(theta) < 0 else 0.0),
        phi_minus=phi_minus + (math.pi if math.sin(theta) < 0 else 0.0),
    )
    return float(best.fun), weights


# ========== Purity and invariants ==========

def _inverse_sqrt(block: np.ndarray) -> Tuple[np.ndarray, float]:
    """Inverse square root of a single-mode block together with its determinant."""
    values, vectors = np.linalg.eigh(symmetrize(block))
    if values.min() <= 0:
        raise UnphysicalCovarianceError("Single-mode blocks must be positive definite")
    return (vectors / np.sqrt(values)) @ vectors.T, float(values.prod())


def _normalized_correlations(v: np.ndarray) -> Tuple[float, float, float, float, bool]:
    """
    Bring both local blocks to the identity and return (n, m, s1, s2, clamped).

    s1 ≥ |s2| are the singular values of V+^{-1/2} V± V−^{-1/2}, s2 signed by det V±.
    They lie in [0, 1] for physical states, so the tolerance below is scale free.
    """
    whiten_plus, det_plus = _inverse_sqrt(v[:2, :2])
    whiten_minus, det_minus = _inverse_sqrt(v[2:, 2:])
    cross = v[:2, 2:]
    singular = np.linalg.svd(whiten_plus @ cross @ whiten_minus, compute_uv=False)
    clamped = False
    if singular[0] > 1.0:
        if singular[0] > 1.0 + INVARIANT_TOLERANCE:
            raise UnphysicalCovarianceError(
                f"Normalized correlation {singular[0]:.12f} exceeds one"
            )
        singular, clamped = np.minimum(singular, 1.0), True
    s1 = float(singular[0])
    s2 = math.copysign(float(singular[1]), np.linalg.det(cross)) if singular[1] > 0 else 0.0
    return math.sqrt(det_plus), math.sqrt(det_minus), s1, s2, clamped


def purity(V: CovarianceLike) -> float:
    """
    μ = 1 / (4√det V), with det V = (nm)²(1 − s1²)(1 − s2²).

    Near-pure states with large local noise lose det V to rounding; within that
    rounding they sit on the uncertainty bound and μ is clamped to 1.
    """
    n, m, s1, s2, _ = _normalized_correlations(_as_matrix(V))
    gaps = [(1.0 - s) * (1.0 + s) for s in (s1, abs(s2))]
    scale = (n * m) ** 2
    determinant = scale * gaps[0] * gaps[1]
    eps = np.finfo(float).eps
    rounding = 8.0 * eps * scale * (gaps[0] + gaps[1] + 8.0 * eps)
    if abs(determinant - 1.0 / 16.0) <= rounding:
        return 1.0
    if determinant < 1.0 / 16.0:
        raise UnphysicalCovarianceError(f"det V = {determinant:.3e} is below the uncertainty bound")
    return 1.0 / (4.0 * math.sqrt(determinant))


def standard_invariants(V: CovarianceLike) -> StandardFormInvariants:
    """
    Local-symplectic invariants (n, m, c1, c2).

    n² = det V+, m² = det V−, c1·c2 = det V±, det V = (nm − c1²)(nm − c2²);
    |c1| ≥ |c2|, c1 ≥ 0 and c2 carries the sign of det V±.
    """
    n, m, s1, s2, clamped = _normalized_correlations(_as_matrix(V))
    x = math.sqrt(n * m)
    if clamped:
        logger.debug("Standard-form invariants clamped at a degenerate point")
    return StandardFormInvariants(n=n, m=m, c1=x * s1, c2=x * s2, c_tilde=x * s1, clamped=clamped)


# ========== Nonlocality and separability ==========

def b_max(V: CovarianceLike) -> float:
    """Maximal CHSH value of the Wigner-function Bell test."""
    invariants = standard_invariants(V)
    x = math.sqrt(invariants.n * invariants.m)
    ratio = min(invariants.c_tilde / x, 1.0)
    base = 1.0 / (1.0 + ratio)
    exponent = 1.0 / (1.0 + 2.0 * ratio)
    return purity(V) * (1.0 + base ** exponent * (1.0 + 2.0 * ratio) / (1.0 + ratio))


def smallest_pt_symplectic_eigenvalue(V: CovarianceLike) -> float:
    return float(symplectic_eigenvalues(partial_transpose(_as_matrix(V)))[0])


def simon_separable(V: CovarianceLike) -> bool:
    """Separable iff the partially transposed state is physical (ν̃_min ≥ ½)."""
    return smallest_pt_symplectic_eigenvalue(V) >= 0.5 - SEPARABILITY_TOLERANCE


def uncertainty_margin(V: CovarianceLike) -> float:
    return _uncertainty_margin(_as_matrix(V))


# ========== Constructions ==========

def pure_tmsv_covariance(r: float) -> FilteredCovariance:
    """Two-mode squeezed vacuum with squeezing parameter r."""
    if not (math.isfinite(r) and r >= 0):
        raise InvalidParameterError(f"r must be >= 0, got {r}", field='r')
    diagonal = 0.5 * math.cosh(2.0 * r)
    off = 0.5 * math.sinh(2.0 * r)
    matrix = np.diag([diagonal] * 4)
    matrix[0, 2] = matrix[2, 0] = off
    matrix[1, 3] = matrix[3, 1] = -off
    return FilteredCovariance(matrix=matrix, method='analytic')


def rotate_locally(V: CovarianceLike, theta_plus: float, theta_minus: float) -> np.ndarray:
    """R V Rᵀ for independent phase rotations of the two modes."""
    rotation = local_rotation(theta_plus, theta_minus)
    return symmetrize(rotation @ _as_matrix(V) @ rotation.T)


def evaluate_metrics(V: CovarianceLike) -> GaussianMetrics:
    minimum, weights = s_q_min(V)
    metrics = GaussianMetrics(
        s_q_min=minimum,
        optimal_weights=weights,
        purity=purity(V),
        invariants=standard_invariants(V),
        b_max=b_max(V),
        entangled_by_sql=minimum < SQL,
        simon_separable=simon_separable(V),
        smallest_pt_eigenvalue=smallest_pt_symplectic_eigenvalue(V),
    )
    if metrics.b_max > BELL_CEILING + 1e-3:
        logger.warning(f"b_max={metrics.b_max:.5f} exceeds the Gaussian ceiling {BELL_CEILING}")
    return metrics
