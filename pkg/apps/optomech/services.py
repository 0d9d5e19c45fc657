"""
Service layer - composes the library modules into the records the commands emit.

=== Architecture ===
MetricsService: full metric record for one parameter point
OracleComparisonService: closed-form prediction vs. computed filtered covariance
SdeCheckService: Monte-Carlo estimate vs. the deterministic covariance
RunRegistry: best-effort bookkeeping of command invocations (SimulationRun rows)
"""

import logging
from typing import Any, Dict, List, Optional

import numpy as np
from django.db import DatabaseError
from django.utils import timezone

from . import gaussian
from .exceptions import InstabilityError, ValidityDomainError
from .langevin import OUTPUT_ORDERING, SystemParams, build_model
from .oracle import (
    HIGH_COOPERATIVITY_THRESHOLD,
    bogoliubov_output_covariance,
    compare_covariances,
    in_high_cooperativity_regime,
)
from .sde import SdeConfig, simulate_filtered_covariance
from .spectrum import DriveFrameFilter, filtered_covariance
from .stability import assess_stability

logger = logging.getLogger('optomech')

# closed-form outputs are the ω → 0 limit; a 5% gate needs ε ≥ 1e4 at the default point
ORACLE_FILTER = DriveFrameFilter(epsilon=1e4, omega_plus=-1.0, omega_minus=1.0)


def _require_stable(params: SystemParams):
    model = build_model(params)
    verdict = assess_stability(model)
    if not verdict.stable:
        raise InstabilityError(
            f"Model is unstable: max Re(λ) = {verdict.margin:.6e} ω_m "
            f"(eigenvalue {verdict.spectral_abscissa_eigenvalue:.4g})",
            verdict=verdict,
        )
    return model, verdict


def covariance_rows(*named_matrices) -> List[List[Any]]:
    """Long-form rows (row, column, value...) for 4×4 matrices given as (name, matrix)."""
    matrices = [np.asarray(m) for _, m in named_matrices]
    rows = []
    for i, row_name in enumerate(OUTPUT_ORDERING):
        for j, column_name in enumerate(OUTPUT_ORDERING):
            rows.append([row_name, column_name] + [float(m[i, j]) for m in matrices])
    return rows


class MetricsService:
    """Metrics at a single parameter point."""

    @classmethod
    def evaluate(cls, params: SystemParams, drive_filter: DriveFrameFilter,
                 method: Optional[str] = None) -> Dict[str, Any]:
        """
        Stability verdict, filtered covariance and every Gaussian metric.

        Raises:
            InstabilityError: the drift matrix has an eigenvalue with Re λ >= 0
        """
        model, verdict = _require_stable(params)
        filter_spec = drive_filter.resolve(params)
        covariance = filtered_covariance(model, filter_spec, method=method)
        metrics = gaussian.evaluate_metrics(covariance)
        logger.info(f"Metrics: s_q_min={metrics.s_q_min:.6g}, b_max={metrics.b_max:.6g}, "
                    f"purity={metrics.purity:.6g}")
        return {
            'params': params.to_dict(),
            'filter': drive_filter.to_dict(),
            'model_filter': filter_spec.to_dict(),
            'stability': verdict.to_dict(),
            'covariance': covariance.to_dict(),
            'metrics': metrics.to_dict(),
        }

    @staticmethod
    def csv_table(record: Dict[str, Any]):
        """One-row table of the scalar metrics."""
        metrics = record['metrics']
        weights = metrics['optimal_weights']
        header = ['s_q_min', 'b_max', 'purity', 'entangled_by_sql', 'simon_separable',
                  'smallest_pt_eigenvalue', 'mu_plus', 'mu_minus', 'phi_plus', 'phi_minus', 'margin']
        row = [
            metrics['s_q_min'], metrics['b_max'], metrics['purity'],
            int(metrics['entangled_by_sql']), int(metrics['simon_separable']),
            metrics['smallest_pt_eigenvalue'],
            weights['mu_plus'], weights['mu_minus'], weights['phi_plus'], weights['phi_minus'],
            record['stability']['margin'],
        ]
        return header, [row]


class OracleComparisonService:
    """Closed-form Bogoliubov prediction against the computed covariance."""

    @classmethod
    def compare(cls, params: SystemParams, drive_filter: DriveFrameFilter = ORACLE_FILTER,
                method: Optional[str] = None) -> Dict[str, Any]:
        report = {
            'params': params.to_dict(),
            'filter': drive_filter.to_dict(),
            'cooperativity_minus': params.cooperativity_minus,
            'high_cooperativity': in_high_cooperativity_regime(params),
            'cooperativity_threshold': HIGH_COOPERATIVITY_THRESHOLD,
            'skipped': False,
            'reason': '',
        }
        try:
            prediction = bogoliubov_output_covariance(params)
        except ValidityDomainError as exc:
            logger.warning(f"Oracle comparison skipped: {exc}")
            report.update(skipped=True, reason=str(exc), passed=None)
            return report

        model, _ = _require_stable(params)
        computed = filtered_covariance(model, drive_filter.resolve(params), method=method)
        comparison = compare_covariances(prediction.predicted_covariance, computed.matrix)
        if not report['high_cooperativity']:
            report['reason'] = (
                f"C-/(n_m+1) = {params.cooperativity_minus / (params.n_m + 1):.3g} is below "
                f"{HIGH_COOPERATIVITY_THRESHOLD:g}; the closed form is not expected to hold"
            )
        report.update(
            prediction=prediction.to_dict(),
            comparison=comparison.to_dict(),
            passed=comparison.passed,
        )
        logger.info(f"Oracle comparison: worst deviation {comparison.worst:.3e}, "
                    f"{'pass' if comparison.passed else 'fail'}")
        return report

    @staticmethod
    def csv_table(report: Dict[str, Any]):
        header = ['row', 'column', 'predicted', 'computed', 'deviation']
        if report['skipped']:
            return header, []
        comparison = report['comparison']
        return header, covariance_rows(
            ('predicted', np.asarray(comparison['predicted'])),
            ('computed', np.asarray(comparison['computed'])),
            ('deviation', np.asarray(comparison['deviations'])),
        )


class SdeCheckService:
    """Monte-Carlo validation of the filtered covariance."""

    @classmethod
    def run(cls, params: SystemParams, drive_filter: DriveFrameFilter, n_trajectories: int = 200,
            seed: int = 0, threads: Optional[int] = None, method: Optional[str] = None,
            k: float = 3.0) -> Dict[str, Any]:
        model, _ = _require_stable(params)
        filter_spec = drive_filter.resolve(params)
        config = SdeConfig.for_model(model, filter_spec, n_trajectories=n_trajectories, seed=seed)
        reference = filtered_covariance(model, filter_spec, method=method)
        estimate = simulate_filtered_covariance(model, filter_spec, config, threads=threads)
        agrees = estimate.within_standard_errors(reference.matrix, k=k)
        if not agrees:
            logger.warning(f"SDE estimate deviates from the deterministic covariance by more than {k:g} stderr")
        return {
            'params': params.to_dict(),
            'filter': drive_filter.to_dict(),
            'sde': estimate.to_dict(),
            'reference': reference.matrix.tolist(),
            'k': k,
            'within_standard_errors': agrees,
        }

    @staticmethod
    def csv_table(report: Dict[str, Any]):
        header = ['row', 'column', 'estimate', 'stderr', 'reference']
        return header, covariance_rows(
            ('estimate', np.asarray(report['sde']['estimate'])),
            ('stderr', np.asarray(report['sde']['stderr'])),
            ('reference', np.asarray(report['reference'])),
        )


class RunRegistry:
    """
    SimulationRun bookkeeping.
    A database failure is logged and never changes the result of a run.
    """

    @classmethod
    def start(cls, command: str, config: Dict[str, Any], config_hash: str,
              preset: Optional[str] = None, seed: Optional[int] = None, versions=None):
        from .models import SimulationRun

        try:
            return SimulationRun.objects.create(
                command=command,
                preset=preset or '',
                config=config,
                config_hash=config_hash,
                # BigIntegerField is signed
                seed=seed if seed is not None and seed < 2 ** 63 else None,
                versions=versions or {},
            )
        except DatabaseError as e:
            logger.error(f"Run registry unavailable, continuing without it: {e}")
            return None

    @classmethod
    def finish(cls, run, status: str, exit_code: int, wall_time: float,
               output_path: str = '', manifest_path: str = '', error_message: str = ''):
        if run is None:
            return
        run.status = status
        run.exit_code = exit_code
        run.wall_time = wall_time
        run.output_path = output_path
        run.manifest_path = manifest_path
        run.error_message = error_message
        run.completed_at = timezone.now()
        try:
            run.save()
        except DatabaseError as e:
            logger.error(f"Could not update run {run.pk}: {e}")
