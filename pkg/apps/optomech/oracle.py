"""
Closed-form output modes in the high-cooperativity limit.

When the red-detuned cavity dominates (κ+G−² > κ−G+²) the adiabatically eliminated
mechanics turns the two cavity outputs into Bogoliubov modes

    a+out =  cosh r a+in + sinh r a−in† + η+ b_in†
    a−out = −cosh r a−in − sinh r a+in† + η− b_in

with vacuum cavity inputs and a thermal mechanical input of occupation n_m. These
expressions are an independent check of the numerical pipeline.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np

from .exceptions import ValidityDomainError
from .langevin import SystemParams

logger = logging.getLogger('optomech')

HIGH_COOPERATIVITY_THRESHOLD = 100.0
RELATIVE_GATE = 0.05
ABSOLUTE_FLOOR = 1e-3


@dataclass(frozen=True)
class BogoliubovPrediction:
    r: float
    sinh_r: float
    cosh_r: float
    eta_plus: complex
    eta_minus: complex
    predicted_covariance: np.ndarray
    params: Optional[SystemParams] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'r': self.r,
            'sinh_r': self.sinh_r,
            'cosh_r': self.cosh_r,
            'eta_plus': [self.eta_plus.real, self.eta_plus.imag],
            'eta_minus': [self.eta_minus.real, self.eta_minus.imag],
            'predicted_covariance': np.asarray(self.predicted_covariance).tolist(),
            'params': self.params.to_dict() if self.params else None,
        }


def _validity_denominator(params: SystemParams) -> float:
    denominator = params.kappa_plus * params.g_minus ** 2 - params.kappa_minus * params.g_plus ** 2
    if not denominator > 0:
        raise ValidityDomainError(
            f"Closed-form modes need κ+G−² > κ−G+² (got κ+G−² − κ−G+² = {denominator:.3e})"
        )
    return denominator


def squeezing_factor(params: SystemParams) -> Tuple[float, float, float]:
    """(r, sinh r, cosh r) from the effective couplings and linewidths."""
    denominator = _validity_denominator(params)
    gp, gm = params.g_plus, params.g_minus
    kp, km = params.kappa_plus, params.kappa_minus
    sinh_r = 2.0 * gm * gp * math.sqrt(km * kp) / denominator
    cosh_r = (gm ** 2 * kp + gp ** 2 * km) / denominator
    return math.asinh(sinh_r), sinh_r, cosh_r


def eta_coefficients(params: SystemParams) -> Tuple[complex, complex]:
    """Weights η± of the mechanical input noise in the two outputs."""
    denominator = _validity_denominator(params)
    gp, gm = params.g_plus, params.g_minus
    kp, km = params.kappa_plus, params.kappa_minus
    eta_plus = -2j * math.sqrt(params.gamma_m * kp) * gp * km / denominator
    eta_minus = -2j * math.sqrt(params.gamma_m * km) * gm * kp / denominator
    return eta_plus, eta_minus


def tanh_r_equal_linewidths(params: SystemParams) -> float:
    """tanh r = 2G+G−/(G+² + G−²), valid for κ+ = κ−."""
    total = params.g_plus ** 2 + params.g_minus ** 2
    return 2.0 * params.g_plus * params.g_minus / total if total > 0 else 0.0


def in_high_cooperativity_regime(params: SystemParams,
                                 threshold: float = HIGH_COOPERATIVITY_THRESHOLD) -> bool:
    """C−/(n_m + 1) ≥ threshold: thermal noise is a small correction to the outputs."""
    return params.cooperativity_minus / (params.n_m + 1.0) >= threshold


def _quadrature_map(creation_free: np.ndarray, creation: np.ndarray) -> np.ndarray:
    """
    Real 4×6 map from input quadratures (x, y per input) to output quadratures
    for outputs o = P c + Q c†.
    """
    a = (creation_free + creation) / math.sqrt(2.0)
    b = 1j * (creation_free - creation) / math.sqrt(2.0)
    rows = []
    for j in range(creation_free.shape[0]):
        x_row, y_row = [], []
        for k in range(creation_free.shape[1]):
            x_row += [a[j, k].real, b[j, k].real]
            y_row += [a[j, k].imag, b[j, k].imag]
        rows += [x_row, y_row]
    return math.sqrt(2.0) * np.array(rows)


def bogoliubov_output_covariance(params: SystemParams) -> BogoliubovPrediction:
    """Output covariance [X+, Y+, X−, Y−] of the closed-form modes."""
    r, sinh_r, cosh_r = squeezing_factor(params)
    eta_plus, eta_minus = eta_coefficients(params)

    # inputs c = (a+in, a−in, b_in)
    annihilation = np.array([
        [cosh_r, 0.0, 0.0],
        [0.0, -cosh_r, eta_minus],
    ], dtype=complex)
    creation = np.array([
        [0.0, sinh_r, eta_plus],
        [-sinh_r, 0.0, 0.0],
    ], dtype=complex)
    transform = _quadrature_map(annihilation, creation)
    noise = np.diag([0.5, 0.5, 0.5, 0.5, params.n_m + 0.5, params.n_m + 0.5])
    covariance = transform @ noise @ transform.T
    covariance = 0.5 * (covariance + covariance.T)

    if not in_high_cooperativity_regime(params):
        logger.warning(
            f"Closed-form prediction outside the high-cooperativity regime "
            f"(C-={params.cooperativity_minus:.3g}, n_m={params.n_m})"
        )
    return BogoliubovPrediction(
        r=r, sinh_r=sinh_r, cosh_r=cosh_r,
        eta_plus=eta_plus, eta_minus=eta_minus,
        predicted_covariance=covariance,
        params=params,
    )


# ========== Comparison ==========

@dataclass(frozen=True)
class CovarianceComparison:
    """Elementwise deviation of a computed covariance from the prediction."""
    predicted: np.ndarray
    computed: np.ndarray
    deviations: np.ndarray
    relative_gate: float = RELATIVE_GATE
    absolute_floor: float = ABSOLUTE_FLOOR

    @property
    def passed(self) -> bool:
        return bool(np.all(self.deviations <= self.relative_gate))

    @property
    def worst(self) -> float:
        return float(self.deviations.max())

    def to_dict(self) -> Dict[str, Any]:
        return {
            'predicted': self.predicted.tolist(),
            'computed': self.computed.tolist(),
            'deviations': self.deviations.tolist(),
            'relative_gate': self.relative_gate,
            'absolute_floor': self.absolute_floor,
            'worst': self.worst,
            'passed': self.passed,
        }


def compare_covariances(predicted, computed, relative_gate: float = RELATIVE_GATE,
                        absolute_floor: float = ABSOLUTE_FLOOR) -> CovarianceComparison:
    """
    Relative deviation per element; elements with |predicted| below the floor are
    compared absolutely and scaled so that the same gate applies.
    """
    predicted = np.asarray(predicted, dtype=float)
    computed = np.asarray(computed, dtype=float)
    difference = np.abs(computed - predicted)
    small = np.abs(predicted) < absolute_floor
    deviations = np.where(
        small,
        difference / absolute_floor * relative_gate,
        difference / np.where(small, 1.0, np.abs(predicted)),
    )
    return CovarianceComparison(
        predicted=predicted,
        computed=computed,
        deviations=deviations,
        relative_gate=relative_gate,
        absolute_floor=absolute_floor,
    )
