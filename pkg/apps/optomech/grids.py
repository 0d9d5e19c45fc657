"""
Parameter axes for grid evaluations (stability maps, sweeps, boundaries).

An axis names either a SystemParams field, a derived quantity (g_ratio, q_factor,
cooperativity_minus) or a filter setting in the drive frame (epsilon,
omega_plus, omega_minus).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, Mapping, Sequence, Tuple

import numpy as np

from .conf import get_setting
from .exceptions import InvalidParameterError
from .langevin import SystemParams

PARAM_AXES = (
    'kappa_plus', 'kappa_minus', 'gamma_m', 'g_plus', 'g_minus',
    'delta_plus', 'delta_minus', 'n_m',
)
DERIVED_AXES = ('q_factor', 'cooperativity_minus', 'g_ratio')
FILTER_AXES = ('epsilon', 'omega_plus', 'omega_minus')

# Derived axes are resolved after plain fields: g_ratio needs the final g_minus,
# cooperativity_minus needs the final kappa_minus and gamma_m.
_APPLY_ORDER = PARAM_AXES + ('q_factor', 'cooperativity_minus', 'g_ratio')

AXIS_UNITS = {
    'kappa_plus': 'omega_m', 'kappa_minus': 'omega_m', 'gamma_m': 'omega_m',
    'g_plus': 'omega_m', 'g_minus': 'omega_m', 'delta_plus': 'omega_m',
    'delta_minus': 'omega_m', 'n_m': 'quanta', 'q_factor': '1',
    'cooperativity_minus': '1', 'g_ratio': '1', 'epsilon': '1',
    'omega_plus': 'omega_m', 'omega_minus': 'omega_m',
}


@dataclass(frozen=True)
class ParameterAxis:
    """A named, strictly monotone grid of values."""
    name: str
    values: Tuple[float, ...]
    scale: str = 'linear'

    def __post_init__(self):
        if self.name not in AXIS_UNITS:
            raise InvalidParameterError(f"Unknown axis parameter: {self.name!r}", field=self.name)
        values = tuple(float(v) for v in self.values)
        if not values:
            raise InvalidParameterError(f"Axis {self.name!r} has no points", field=self.name)
        if not all(math.isfinite(v) for v in values):
            raise InvalidParameterError(f"Axis {self.name!r} contains non-finite values", field=self.name)
        if len(values) > 1:
            steps = np.diff(values)
            if not (np.all(steps > 0) or np.all(steps < 0)):
                raise InvalidParameterError(f"Axis {self.name!r} must be strictly monotone", field=self.name)
        if self.scale not in ('linear', 'log'):
            raise InvalidParameterError(f"Axis scale must be 'linear' or 'log', got {self.scale!r}")
        object.__setattr__(self, 'values', values)

    @classmethod
    def linspace(cls, name: str, start: float, stop: float, num: int) -> 'ParameterAxis':
        return cls(name, tuple(np.linspace(start, stop, num)), 'linear')

    @classmethod
    def logspace(cls, name: str, start: float, stop: float, num: int) -> 'ParameterAxis':
        if start <= 0 or stop <= 0:
            raise InvalidParameterError(f"Log axis {name!r} needs positive bounds")
        return cls(name, tuple(np.geomspace(start, stop, num)), 'log')

    @classmethod
    def single(cls, name: str, value: float) -> 'ParameterAxis':
        return cls(name, (float(value),))

    @property
    def span(self) -> float:
        return abs(self.values[-1] - self.values[0])

    @property
    def unit(self) -> str:
        return AXIS_UNITS[self.name]

    def __len__(self) -> int:
        return len(self.values)

    def to_dict(self) -> Dict[str, Any]:
        return {'name': self.name, 'values': list(self.values), 'scale': self.scale}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> 'ParameterAxis':
        unknown = set(data) - {'name', 'values', 'scale', 'start', 'stop', 'num'}
        if unknown:
            raise InvalidParameterError(f"Unknown axis keys: {', '.join(sorted(unknown))}")
        scale = data.get('scale', 'linear')
        if 'values' in data:
            return cls(data['name'], tuple(data['values']), scale)
        try:
            start, stop, num = float(data['start']), float(data['stop']), int(data['num'])
        except KeyError as exc:
            raise InvalidParameterError(f"Axis needs 'values' or start/stop/num (missing {exc})")
        if scale == 'log':
            return cls.logspace(data['name'], start, stop, num)
        return cls.linspace(data['name'], start, stop, num)


def apply_to_params(params: SystemParams, assignments: Mapping[str, float]) -> SystemParams:
    """Return params with the parameter (and derived) assignments applied."""
    changes: Dict[str, float] = {}
    for name in _APPLY_ORDER:
        if name not in assignments:
            continue
        value = float(assignments[name])
        if name in PARAM_AXES:
            changes[name] = value
            continue
        # derived axes read the fields accumulated so far
        current = params.replace(**changes) if changes else params
        if name == 'q_factor':
            if value <= 0:
                raise InvalidParameterError("q_factor must be > 0", field=name)
            changes['gamma_m'] = current.omega_m / value
        elif name == 'cooperativity_minus':
            if value < 0:
                raise InvalidParameterError("cooperativity_minus must be >= 0", field=name)
            changes['g_minus'] = math.sqrt(value * current.kappa_minus * current.gamma_m / 4.0)
        elif name == 'g_ratio':
            if value < 0:
                raise InvalidParameterError("g_ratio must be >= 0", field=name)
            changes['g_plus'] = value * current.g_minus
    return params.replace(**changes) if changes else params


def split_assignments(assignments: Mapping[str, float]):
    """Separate system-parameter assignments from filter assignments."""
    params_part = {k: v for k, v in assignments.items() if k not in FILTER_AXES}
    filter_part = {k: v for k, v in assignments.items() if k in FILTER_AXES}
    return params_part, filter_part


def grid_points(axes: Sequence[ParameterAxis]):
    """Yield (index tuple, assignment dict) in row-major grid order."""
    if len(axes) == 1:
        for i, value in enumerate(axes[0].values):
            yield (i,), {axes[0].name: value}
        return
    first, second = axes
    for i, v1 in enumerate(first.values):
        for j, v2 in enumerate(second.values):
            yield (i, j), {first.name: v1, second.name: v2}


def resolve_threads(threads=None) -> int:
    """Thread count from the argument, else settings.OMBELL_THREADS, else 1."""
    if threads is None:
        threads = get_setting('OMBELL_THREADS') or 1
    try:
        threads = int(threads)
    except (TypeError, ValueError):
        raise InvalidParameterError(f"threads must be an integer, got {threads!r}")
    if threads < 1:
        raise InvalidParameterError(f"threads must be >= 1, got {threads}")
    return threads


def evaluate_in_order(func, items, threads=None):
    """Map func over items on a thread pool; results keep the input order."""
    items = list(items)
    workers = resolve_threads(threads)
    if workers == 1 or len(items) < 2:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))
