"""
Asymptotic stability of the linear Langevin model.

The Routh–Hurwitz condition is evaluated through the eigenvalues of the 6×6 drift
matrix: the system is stable iff every real part is below −STABILITY_TOLERANCE.
Marginal points therefore count as unstable.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from .exceptions import EigenSolverError, InvalidParameterError, OptomechError
from .grids import FILTER_AXES, ParameterAxis, apply_to_params, evaluate_in_order, grid_points
from .langevin import LinearModel, SystemParams, build_model

logger = logging.getLogger('optomech')

STABILITY_TOLERANCE = 1e-12


@dataclass(frozen=True)
class StabilityVerdict:
    stable: bool
    margin: float
    spectral_abscissa_eigenvalue: complex

    def to_dict(self) -> Dict[str, Any]:
        return {
            'stable': self.stable,
            'margin': self.margin,
            'spectral_abscissa_eigenvalue': [
                self.spectral_abscissa_eigenvalue.real,
                self.spectral_abscissa_eigenvalue.imag,
            ],
        }


def assess_stability(model: LinearModel) -> StabilityVerdict:
    """Stable iff max Re(eig A) < −tol (units of ω_m)."""
    try:
        eigenvalues = np.linalg.eigvals(model.drift)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(f"Eigenvalue computation of the drift matrix failed: {exc}") from exc
    if not np.all(np.isfinite(eigenvalues)):
        raise EigenSolverError("Eigen-solver returned non-finite eigenvalues")

    leading = eigenvalues[np.argmax(eigenvalues.real)]
    margin = float(leading.real)
    verdict = StabilityVerdict(
        stable=margin < -STABILITY_TOLERANCE,
        margin=margin,
        spectral_abscissa_eigenvalue=complex(leading),
    )
    logger.debug(f"Stability: stable={verdict.stable}, margin={margin:.3e}")
    return verdict


# ========== Stability maps ==========

@dataclass
class StabilityGrid:
    """Verdicts over a two-axis parameter grid (axis1 rows, axis2 columns)."""
    axis1: ParameterAxis
    axis2: ParameterAxis
    verdicts: List[List[Optional[StabilityVerdict]]]
    errors: Dict[tuple, str] = field(default_factory=dict)

    def stable_mask(self) -> np.ndarray:
        return np.array([
            [bool(v is not None and v.stable) for v in row] for row in self.verdicts
        ])

    def stable_fraction(self, mask: Optional[np.ndarray] = None) -> float:
        """Fraction of (optionally masked) grid points that are stable."""
        stable = self.stable_mask()
        if mask is None:
            mask = np.ones_like(stable, dtype=bool)
        total = int(mask.sum())
        return float((stable & mask).sum()) / total if total else 0.0

    def rows(self):
        """CSV rows: axis1, axis2, stable (0/1), margin."""
        for i, v1 in enumerate(self.axis1.values):
            for j, v2 in enumerate(self.axis2.values):
                verdict = self.verdicts[i][j]
                if verdict is None:
                    yield [v1, v2, '', '']
                else:
                    yield [v1, v2, int(verdict.stable), verdict.margin]

    def header(self) -> List[str]:
        return [
            f"{self.axis1.name} [{self.axis1.unit}]",
            f"{self.axis2.name} [{self.axis2.unit}]",
            'stable',
            'margin [omega_m]',
        ]

    def to_dict(self) -> Dict[str, Any]:
        return {
            'axis1': self.axis1.to_dict(),
            'axis2': self.axis2.to_dict(),
            'stable': self.stable_mask().astype(int).tolist(),
            'margin': [[v.margin if v else None for v in row] for row in self.verdicts],
            'errors': {f"{i},{j}": msg for (i, j), msg in self.errors.items()},
        }


def stability_map(
    base: SystemParams,
    axis1: ParameterAxis,
    axis2: ParameterAxis,
    threads: Optional[int] = None,
) -> StabilityGrid:
    """Verdict per grid point; failing points are recorded, never abort the grid."""
    for axis in (axis1, axis2):
        if axis.name in FILTER_AXES:
            raise InvalidParameterError(f"Stability does not depend on filter setting {axis.name!r}")

    points = list(grid_points((axis1, axis2)))

    def evaluate(point):
        index, assignments = point
        try:
            return index, assess_stability(build_model(apply_to_params(base, assignments))), None
        except OptomechError as exc:
            return index, None, str(exc)

    verdicts: List[List[Optional[StabilityVerdict]]] = [
        [None] * len(axis2) for _ in range(len(axis1))
    ]
    grid = StabilityGrid(axis1=axis1, axis2=axis2, verdicts=verdicts)
    for (i, j), verdict, error in evaluate_in_order(evaluate, points, threads):
        verdicts[i][j] = verdict
        if error:
            grid.errors[(i, j)] = error
            logger.warning(f"Stability map point ({axis1.name}={axis1.values[i]}, "
                           f"{axis2.name}={axis2.values[j]}) failed: {error}")
    logger.info(f"Stability map {axis1.name}×{axis2.name}: {len(points)} points, "
                f"stable fraction {grid.stable_fraction():.3f}")
    return grid
