"""
Parameter-grid evaluation of the Gaussian metrics and level-crossing boundaries.

A sweep evaluates one or two parameter axes around a base point. Each grid point
builds the model, checks stability and, for stable points only, computes the
filtered covariance and the requested metrics. Unstable points and per-point
failures are kept in the table with missing metric values.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from . import gaussian
from .exceptions import InvalidParameterError, OptomechError, ValidityDomainError
from .grids import (
    AXIS_UNITS, ParameterAxis, apply_to_params, evaluate_in_order, grid_points,
    split_assignments,
)
from .langevin import SystemParams, build_model
from .oracle import squeezing_factor
from .spectrum import METHODS, DriveFrameFilter, filtered_covariance
from .stability import assess_stability

logger = logging.getLogger('optomech')

METRICS = (
    's_q_min', 'log10_s_q', 'b_max', 'purity', 'r_oracle', 'stability',
    'simon_separable', 'margin',
)
COVARIANCE_METRICS = ('s_q_min', 'log10_s_q', 'b_max', 'purity', 'simon_separable')
BOUNDARY_METRICS = ('s_q_min', 'log10_s_q', 'b_max', 'purity')
METRIC_UNITS = {
    's_q_min': '1', 'log10_s_q': '1', 'b_max': '1', 'purity': '1', 'r_oracle': '1',
    'simon_separable': 'bool',
}
BOUNDARY_RELATIVE_WIDTH = 1e-3


# ========== Specs ==========

@dataclass(frozen=True)
class SweepSpec:
    name: str
    base: SystemParams
    axes: Tuple[ParameterAxis, ...]
    metrics: Tuple[str, ...] = ('s_q_min', 'b_max', 'purity')
    filter: DriveFrameFilter = field(default_factory=DriveFrameFilter)
    method: Optional[str] = None

    def __post_init__(self):
        axes = tuple(self.axes)
        if not 1 <= len(axes) <= 2:
            raise InvalidParameterError(f"A sweep needs one or two axes, got {len(axes)}")
        if len({a.name for a in axes}) != len(axes):
            raise InvalidParameterError("Sweep axes must name different parameters")
        unknown = [m for m in self.metrics if m not in METRICS]
        if unknown:
            raise InvalidParameterError(f"Unknown metrics: {', '.join(unknown)}", field='metrics')
        if self.method is not None and self.method not in METHODS:
            raise InvalidParameterError(f"method must be one of {METHODS}", field='method')
        object.__setattr__(self, 'axes', axes)
        object.__setattr__(self, 'metrics', tuple(self.metrics))

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(len(a) for a in self.axes)

    def replace(self, **changes) -> 'SweepSpec':
        values = {
            'name': self.name, 'base': self.base, 'axes': self.axes, 'metrics': self.metrics,
            'filter': self.filter, 'method': self.method,
        }
        values.update(changes)
        return SweepSpec(**values)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'name': self.name,
            'base': self.base.to_dict(),
            'filter': self.filter.to_dict(),
            'axes': [a.to_dict() for a in self.axes],
            'metrics': list(self.metrics),
            'method': self.method,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> 'SweepSpec':
        unknown = set(data) - {'name', 'base', 'filter', 'axes', 'metrics', 'method'}
        if unknown:
            raise InvalidParameterError(f"Unknown sweep keys: {', '.join(sorted(unknown))}")
        if 'axes' not in data:
            raise InvalidParameterError("Sweep needs 'axes'")
        return cls(
            name=data.get('name', 'sweep'),
            base=SystemParams.from_dict(data.get('base', {})),
            filter=DriveFrameFilter.from_dict(data.get('filter', {})),
            axes=tuple(ParameterAxis.from_dict(a) for a in data['axes']),
            metrics=tuple(data.get('metrics', ('s_q_min', 'b_max', 'purity'))),
            method=data.get('method'),
        )


# ========== Point evaluation ==========

@dataclass
class SweepRow:
    index: Tuple[int, ...]
    assignments: Dict[str, float]
    stable: Optional[bool] = None
    margin: Optional[float] = None
    values: Dict[str, Any] = field(default_factory=dict)
    error: str = ''


def resolve_point(base: SystemParams, drive_filter: DriveFrameFilter, assignments: Mapping[str, float]):
    """Parameters and model-frame filter for one grid point."""
    param_part, filter_part = split_assignments(assignments)
    params = apply_to_params(base, param_part)
    return params, drive_filter.replace(**filter_part).resolve(params)


def evaluate_point(base: SystemParams, drive_filter: DriveFrameFilter, assignments: Mapping[str, float],
                   metrics: Sequence[str], method: Optional[str] = None) -> SweepRow:
    """One row; failures are recorded on the row, never raised."""
    row = SweepRow(index=(), assignments=dict(assignments))
    try:
        params, filter_spec = resolve_point(base, drive_filter, assignments)
        model = build_model(params)
        verdict = assess_stability(model)
        row.stable, row.margin = verdict.stable, verdict.margin
        if not verdict.stable:
            return row

        if any(m in COVARIANCE_METRICS for m in metrics):
            covariance = filtered_covariance(model, filter_spec, method=method)
            minimum, _ = gaussian.s_q_min(covariance)
            if 's_q_min' in metrics:
                row.values['s_q_min'] = minimum
            if 'log10_s_q' in metrics:
                row.values['log10_s_q'] = math.log10(minimum) if minimum > 0 else None
            if 'b_max' in metrics:
                row.values['b_max'] = gaussian.b_max(covariance)
            if 'purity' in metrics:
                row.values['purity'] = gaussian.purity(covariance)
            if 'simon_separable' in metrics:
                row.values['simon_separable'] = gaussian.simon_separable(covariance)
        if 'r_oracle' in metrics:
            try:
                row.values['r_oracle'] = squeezing_factor(params)[0]
            except ValidityDomainError:
                row.values['r_oracle'] = None
    except OptomechError as exc:
        row.error = str(exc)
        row.values = {}
    return row


# ========== Tables ==========

def _cell(value):
    if value is None:
        return ''
    if isinstance(value, bool):
        return int(value)
    return value


def _parse_cell(text: str):
    if text == '':
        return None
    return float(text)


@dataclass
class SweepTable:
    name: str
    axes: Tuple[ParameterAxis, ...]
    metrics: Tuple[str, ...]
    rows: List[SweepRow]

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(len(a) for a in self.axes)

    @property
    def value_columns(self) -> Tuple[str, ...]:
        return tuple(m for m in self.metrics if m not in ('stability', 'margin'))

    def column(self, name: str) -> np.ndarray:
        """Values of one column on the grid shape; missing values are NaN."""
        if name == 'stable':
            data = [np.nan if r.stable is None else float(r.stable) for r in self.rows]
        elif name == 'margin':
            data = [np.nan if r.margin is None else r.margin for r in self.rows]
        else:
            data = []
            for r in self.rows:
                value = r.values.get(name)
                data.append(np.nan if value is None else float(value))
        return np.array(data, dtype=float).reshape(self.shape)

    def errors(self) -> Dict[Tuple[int, ...], str]:
        return {r.index: r.error for r in self.rows if r.error}

    # --- CSV ---

    def header(self) -> List[str]:
        columns = [f"{a.name} [{a.unit}]" for a in self.axes]
        columns += ['stable', 'margin [omega_m]']
        columns += [f"{m} [{METRIC_UNITS[m]}]" for m in self.value_columns]
        columns.append('error')
        return columns

    def csv_rows(self):
        for row in self.rows:
            yield (
                [row.assignments[a.name] for a in self.axes]
                + [_cell(row.stable), _cell(row.margin)]
                + [_cell(row.values.get(m)) for m in self.value_columns]
                + [row.error]
            )

    @classmethod
    def from_csv(cls, name: str, header: Sequence[str], records: Sequence[Sequence[str]]) -> 'SweepTable':
        columns = [h.split(' [')[0] for h in header]
        try:
            stable_at = columns.index('stable')
        except ValueError:
            raise InvalidParameterError("Sweep CSV has no 'stable' column")
        axis_names = columns[:stable_at]
        metric_names = columns[stable_at + 2:-1]

        axis_values: List[List[float]] = [[] for _ in axis_names]
        for record in records:
            for k in range(len(axis_names)):
                value = float(record[k])
                if value not in axis_values[k]:
                    axis_values[k].append(value)
        axes = tuple(ParameterAxis(n, tuple(v)) for n, v in zip(axis_names, axis_values))

        rows = []
        for position, record in enumerate(records):
            index = tuple(int(i) for i in np.unravel_index(position, tuple(len(v) for v in axis_values)))
            stable = _parse_cell(record[stable_at])
            values = {}
            for offset, metric in enumerate(metric_names):
                value = _parse_cell(record[stable_at + 2 + offset])
                values[metric] = bool(value) if metric == 'simon_separable' and value is not None else value
            rows.append(SweepRow(
                index=index,
                assignments={n: float(record[k]) for k, n in enumerate(axis_names)},
                stable=None if stable is None else bool(stable),
                margin=_parse_cell(record[stable_at + 1]),
                values={k: v for k, v in values.items() if v is not None},
                error=record[-1],
            ))
        return cls(name=name, axes=axes, metrics=tuple(metric_names), rows=rows)

    # --- JSON ---

    def to_dict(self) -> Dict[str, Any]:
        def nested(name):
            grid = self.column(name)
            return np.where(np.isnan(grid), None, grid).tolist()

        return {
            'name': self.name,
            'axes': [a.to_dict() for a in self.axes],
            'metrics': list(self.metrics),
            'shape': list(self.shape),
            'stable': nested('stable'),
            'margin': nested('margin'),
            'grid': {m: nested(m) for m in self.value_columns},
            'errors': {','.join(map(str, k)): v for k, v in self.errors().items()},
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> 'SweepTable':
        axes = tuple(ParameterAxis.from_dict(a) for a in data['axes'])
        metrics = tuple(data['metrics'])
        shape = tuple(len(a) for a in axes)
        errors = {tuple(int(i) for i in k.split(',')): v for k, v in data.get('errors', {}).items()}

        def at(nested, index):
            value = nested
            for i in index:
                value = value[i]
            return value

        rows = []
        for index, assignments in grid_points(axes):
            stable = at(data['stable'], index)
            values = {}
            for metric, nested in data.get('grid', {}).items():
                value = at(nested, index)
                if value is not None:
                    values[metric] = bool(value) if metric == 'simon_separable' else value
            rows.append(SweepRow(
                index=index,
                assignments=assignments,
                stable=None if stable is None else bool(stable),
                margin=at(data['margin'], index),
                values=values,
                error=errors.get(index, ''),
            ))
        table = cls(name=data.get('name', 'sweep'), axes=axes, metrics=metrics, rows=rows)
        if table.shape != shape or len(rows) != int(np.prod(shape)):
            raise InvalidParameterError("Sweep JSON grid does not match its axes")
        return table


# ========== Sweep ==========

def run_sweep(spec: SweepSpec, threads: Optional[int] = None) -> SweepTable:
    """One row per grid point, in row-major grid order."""
    points = list(grid_points(spec.axes))
    logger.info(f"Sweep {spec.name!r}: {len(points)} points, axes "
                f"{', '.join(a.name for a in spec.axes)}, metrics {', '.join(spec.metrics)}")

    def evaluate(point):
        index, assignments = point
        row = evaluate_point(spec.base, spec.filter, assignments, spec.metrics, spec.method)
        row.index = index
        return row

    rows = evaluate_in_order(evaluate, points, threads)
    failures = [r for r in rows if r.error]
    for row in failures:
        logger.warning(f"Sweep {spec.name!r} point {row.assignments} failed: {row.error}")
    unstable = sum(1 for r in rows if r.stable is False)
    logger.info(f"Sweep {spec.name!r} done: {unstable} unstable, {len(failures)} failed")
    return SweepTable(name=spec.name, axes=spec.axes, metrics=spec.metrics, rows=rows)


def containment_violations(table: SweepTable) -> Dict[str, int]:
    """
    Counts of points breaking {b_max > 2} ⊆ {s_q_min < 1} ⊆ {not separable}.

    Only points where both quantities of a pair are available are counted.
    """
    counts = {'bell_outside_sql': 0, 'sql_but_separable': 0, 'bell_but_separable': 0}
    for row in table.rows:
        values = row.values
        bell, squeezing = values.get('b_max'), values.get('s_q_min')
        separable = values.get('simon_separable')
        violates = bell is not None and bell > gaussian.LOCAL_REALISM_BOUND
        squeezed = squeezing is not None and squeezing < gaussian.SQL
        if violates and squeezing is not None and not squeezed:
            counts['bell_outside_sql'] += 1
        if squeezed and separable:
            counts['sql_but_separable'] += 1
        if violates and separable:
            counts['bell_but_separable'] += 1
    return counts


# ========== Boundaries ==========

@dataclass(frozen=True)
class BoundaryPoint:
    axis1_value: float
    axis2_value: float
    bracket_width: float


@dataclass
class BoundaryCurve:
    metric: str
    level: float
    axis1: ParameterAxis
    axis2: ParameterAxis
    points: List[BoundaryPoint] = field(default_factory=list)
    skipped: Dict[float, str] = field(default_factory=dict)
    label: str = ''

    @property
    def tolerance(self) -> float:
        """Largest achieved bracketing width."""
        return max((p.bracket_width for p in self.points), default=0.0)

    def crossing_at(self, axis1_value: float) -> Optional[float]:
        for point in self.points:
            if math.isclose(point.axis1_value, axis1_value, rel_tol=1e-12, abs_tol=1e-15):
                return point.axis2_value
        return None

    def header(self) -> List[str]:
        return [
            f"{self.axis1.name} [{self.axis1.unit}]",
            f"{self.axis2.name} [{self.axis2.unit}]",
            f"bracket_width [{AXIS_UNITS[self.axis2.name]}]",
        ]

    def csv_rows(self):
        for point in self.points:
            yield [point.axis1_value, point.axis2_value, point.bracket_width]

    def to_dict(self) -> Dict[str, Any]:
        return {
            'label': self.label,
            'metric': self.metric,
            'level': self.level,
            'axis1': self.axis1.to_dict(),
            'axis2': self.axis2.to_dict(),
            'tolerance': self.tolerance,
            'points': [[p.axis1_value, p.axis2_value, p.bracket_width] for p in self.points],
            'skipped': [[value, reason] for value, reason in self.skipped.items()],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> 'BoundaryCurve':
        return cls(
            metric=data['metric'],
            level=float(data['level']),
            axis1=ParameterAxis.from_dict(data['axis1']),
            axis2=ParameterAxis.from_dict(data['axis2']),
            points=[BoundaryPoint(*map(float, p)) for p in data.get('points', [])],
            skipped={float(v): reason for v, reason in data.get('skipped', [])},
            label=data.get('label', ''),
        )


def _metric_value(spec: SweepSpec, assignments: Mapping[str, float], metric: str) -> Optional[float]:
    row = evaluate_point(spec.base, spec.filter, assignments, (metric,), spec.method)
    if row.error or not row.stable:
        return None
    return row.values.get(metric)


def _trace_row(spec: SweepSpec, metric: str, level: float, axis1_value: float):
    """(BoundaryPoint or None, reason) for one axis1 value."""
    axis1, axis2 = spec.axes
    fixed = {axis1.name: axis1_value}

    def value_at(x):
        value = _metric_value(spec, {**fixed, axis2.name: x}, metric)
        return None if value is None else value - level

    samples = [value_at(x) for x in axis2.values]
    if all(s is None for s in samples):
        return None, 'no stable points'

    bracket = None
    for j in range(len(samples) - 1):
        left, right = samples[j], samples[j + 1]
        if left is None or right is None:
            continue
        if left == 0.0:
            return BoundaryPoint(axis1_value, axis2.values[j], 0.0), ''
        if left * right < 0 or right == 0.0:
            bracket = (axis2.values[j], axis2.values[j + 1], left)
            break
    if bracket is None:
        return None, 'no crossing'

    low, high, f_low = bracket
    target = BOUNDARY_RELATIVE_WIDTH * axis2.span
    while abs(high - low) > target:
        middle = 0.5 * (low + high)
        f_middle = value_at(middle)
        if f_middle is None:
            return None, 'unstable point inside the crossing bracket'
        if f_middle == 0.0:
            low = high = middle
            break
        if (f_middle < 0) == (f_low < 0):
            low, f_low = middle, f_middle
        else:
            high = middle
    return BoundaryPoint(axis1_value, 0.5 * (low + high), abs(high - low)), ''


def trace_boundary(spec: SweepSpec, metric: str, level: float, threads: Optional[int] = None,
                   label: str = '') -> BoundaryCurve:
    """
    Level crossing of ``metric`` along axis2 for every axis1 value.

    The first sign change on the axis2 grid between two stable points is refined by
    bisection to a bracket no wider than 1e-3 of the axis2 span. A row whose bisection
    lands on an unstable point is skipped rather than reported with a wider bracket.
    """
    if len(spec.axes) != 2:
        raise InvalidParameterError("A boundary needs exactly two axes")
    if metric not in BOUNDARY_METRICS:
        raise InvalidParameterError(f"Boundaries are traced for {BOUNDARY_METRICS}, got {metric!r}")
    axis1, axis2 = spec.axes

    results = evaluate_in_order(
        lambda value: (value, *_trace_row(spec, metric, level, value)),
        axis1.values, threads,
    )
    curve = BoundaryCurve(metric=metric, level=level, axis1=axis1, axis2=axis2, label=label or spec.name)
    for value, point, reason in results:
        if point is None:
            curve.skipped[value] = reason
        else:
            curve.points.append(point)
    logger.info(f"Boundary {metric}={level} ({curve.label}): {len(curve.points)} crossings, "
                f"{len(curve.skipped)} rows without crossing")
    return curve
