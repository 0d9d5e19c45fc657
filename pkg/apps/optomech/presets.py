"""
Named configurations for the standard parameter scans.

Every preset starts from the reference point (κ± = 0.02, G− = 0.15, G+/G− = 0.2,
Q = 1.5×10⁵, n_m = 500, Δ− = −Δ+ = ω_m) and lists the sweeps, boundaries and stability
maps it is made of. The filter scan uses symmetric filters with ε ∈ {1, 10, 100}; the
region and boundary maps use narrowband symmetric filters (ε = 10⁴).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Mapping, Optional, Sequence, Tuple

from .exceptions import ConfigurationError, InvalidParameterError
from .grids import DERIVED_AXES, PARAM_AXES, ParameterAxis, apply_to_params
from .langevin import SystemParams
from .spectrum import DriveFrameFilter
from .sweep import SweepSpec

logger = logging.getLogger('optomech')

DEFAULT_RESOLUTION = 101
G_MINUS_RANGE = (0.01, 0.3)
G_RATIO_RANGE = (0.0, 0.9)
STABILITY_G_MINUS_RANGE = (0.01, 0.5)
STABILITY_G_RATIO_RANGE = (0.0, 1.5)
SYMMETRIC_FILTER = DriveFrameFilter(epsilon=10.0, omega_plus=-1.0, omega_minus=1.0)
# the reference point has no Bell region for ε below about 10³
NARROWBAND_FILTER = SYMMETRIC_FILTER.replace(epsilon=1e4)

PRESET_NAMES = ('fig2', 'fig3', 'fig4', 'fig5', 'appendix')


@dataclass(frozen=True)
class BoundaryJob:
    spec: SweepSpec
    metric: str
    level: float
    label: str


@dataclass(frozen=True)
class StabilityJob:
    label: str
    base: SystemParams
    axis1: ParameterAxis
    axis2: ParameterAxis


@dataclass
class Preset:
    name: str
    description: str
    sweeps: List[SweepSpec] = field(default_factory=list)
    boundaries: List[BoundaryJob] = field(default_factory=list)
    stability_maps: List[StabilityJob] = field(default_factory=list)


# ========== Variations ==========

def scale_params(params: SystemParams, factors: Mapping[str, float]) -> SystemParams:
    """Multiply parameters (plain or derived) by the given factors."""
    assignments = {}
    for name, factor in factors.items():
        if name not in PARAM_AXES + DERIVED_AXES:
            raise InvalidParameterError(f"Cannot vary unknown parameter {name!r}", field=name)
        assignments[name] = getattr(params, name) * float(factor)
    return apply_to_params(params, assignments)


def variant_label(factors: Mapping[str, float]) -> str:
    return '_'.join(f"{name}_x{float(factor):g}" for name, factor in sorted(factors.items()))


def _variants(base: SystemParams, defaults: Sequence[Tuple[str, Mapping[str, float]]],
              vary: Optional[Mapping[str, float]]) -> List[Tuple[str, SystemParams]]:
    if vary:
        return [('baseline', base), (variant_label(vary), scale_params(base, vary))]
    return [(label, scale_params(base, factors)) for label, factors in defaults]


# ========== Axes ==========

def _g_minus_axis(resolution: int, bounds=G_MINUS_RANGE) -> ParameterAxis:
    return ParameterAxis.linspace('g_minus', bounds[0], bounds[1], resolution)


def _g_ratio_axis(resolution: int, bounds=G_RATIO_RANGE) -> ParameterAxis:
    return ParameterAxis.linspace('g_ratio', bounds[0], bounds[1], resolution)


def _boundary_jobs(label: str, params: SystemParams, resolution: int,
                   method: Optional[str]) -> List[BoundaryJob]:
    spec = SweepSpec(
        name=label,
        base=params,
        axes=(_g_ratio_axis(resolution), _g_minus_axis(resolution)),
        metrics=('s_q_min', 'b_max'),
        filter=NARROWBAND_FILTER,
        method=method,
    )
    return [
        BoundaryJob(spec, 's_q_min', 1.0, f"{label}_sql"),
        BoundaryJob(spec, 'b_max', 2.0, f"{label}_bell"),
    ]


# ========== Presets ==========

def _fig2(base, resolution, vary, method) -> Preset:
    preset = Preset('fig2', 'Blue filter centre scan at Ω− = ω_m for ε ∈ {1, 10, 100}')
    params = scale_params(base, vary) if vary else base
    for epsilon in (1.0, 10.0, 100.0):
        preset.sweeps.append(SweepSpec(
            name=f"fig2_eps{epsilon:g}",
            base=params,
            axes=(ParameterAxis.linspace('omega_plus', -1.5, -0.5, resolution),),
            metrics=('s_q_min', 'b_max', 'purity'),
            filter=SYMMETRIC_FILTER.replace(epsilon=epsilon),
            method=method,
        ))
    return preset


def _fig3(base, resolution, vary, method) -> Preset:
    preset = Preset('fig3', 'log S_q and B_max over (G−, G+/G−), with r and μ insets')
    params = scale_params(base, vary) if vary else base
    preset.sweeps.append(SweepSpec(
        name='fig3_grid',
        base=params,
        axes=(_g_minus_axis(resolution), _g_ratio_axis(resolution)),
        metrics=('log10_s_q', 's_q_min', 'b_max', 'purity', 'r_oracle', 'simon_separable'),
        filter=NARROWBAND_FILTER,
        method=method,
    ))
    preset.sweeps.append(SweepSpec(
        name='fig3_vs_g_minus',
        base=params,
        axes=(ParameterAxis.single('g_ratio', 0.2), _g_minus_axis(resolution)),
        metrics=('r_oracle', 'purity', 's_q_min', 'b_max'),
        filter=NARROWBAND_FILTER,
        method=method,
    ))
    preset.sweeps.append(SweepSpec(
        name='fig3_vs_g_ratio',
        base=params,
        axes=(ParameterAxis.single('g_minus', 0.15), _g_ratio_axis(resolution)),
        metrics=('r_oracle', 'purity', 's_q_min', 'b_max'),
        filter=NARROWBAND_FILTER,
        method=method,
    ))
    return preset


def _fig4(base, resolution, vary, method) -> Preset:
    preset = Preset('fig4', 'SQL and Bell boundaries for κ+ ×{1, 2} and κ− ×{1, ½}')
    defaults = [
        ('baseline', {}),
        ('kappa_plus_x2', {'kappa_plus': 2.0}),
        ('kappa_minus_x0.5', {'kappa_minus': 0.5}),
    ]
    for label, params in _variants(base, defaults, vary):
        preset.boundaries.extend(_boundary_jobs(f"fig4_{label}", params, resolution, method))
        preset.sweeps.append(SweepSpec(
            name=f"fig4_{label}_inset",
            base=params,
            axes=(ParameterAxis.single('g_minus', 0.15), _g_ratio_axis(resolution)),
            metrics=('r_oracle', 'purity'),
            filter=NARROWBAND_FILTER,
            method=method,
        ))
    return preset


def _fig5(base, resolution, vary, method) -> Preset:
    preset = Preset('fig5', 'SQL and Bell boundaries for γ_m ×{1, 10, 100} and n_m ∈ {500, 1000, 2000}')
    defaults = [
        ('baseline', {}),
        ('gamma_m_x10', {'gamma_m': 10.0}),
        ('gamma_m_x100', {'gamma_m': 100.0}),
        ('n_m_x2', {'n_m': 2.0}),
        ('n_m_x4', {'n_m': 4.0}),
    ]
    for label, params in _variants(base, defaults, vary):
        preset.boundaries.extend(_boundary_jobs(f"fig5_{label}", params, resolution, method))
        if label.startswith('gamma_m') or label == 'baseline':
            preset.sweeps.append(SweepSpec(
                name=f"fig5_{label}_inset",
                base=params,
                axes=(ParameterAxis.single('g_ratio', 0.2), _g_minus_axis(resolution)),
                metrics=('purity',),
                filter=NARROWBAND_FILTER,
                method=method,
            ))
    return preset


def _appendix(base, resolution, vary, method) -> Preset:
    preset = Preset('appendix', 'Stability maps for κ+ ∈ {2κ, κ, κ/2}')
    defaults = [
        ('kappa_plus_x2', {'kappa_plus': 2.0}),
        ('baseline', {}),
        ('kappa_plus_x0.5', {'kappa_plus': 0.5}),
    ]
    for label, params in _variants(base, defaults, vary):
        preset.stability_maps.append(StabilityJob(
            label=f"appendix_{label}",
            base=params,
            axis1=ParameterAxis.linspace('g_minus', *STABILITY_G_MINUS_RANGE, resolution),
            axis2=ParameterAxis.linspace('g_ratio', *STABILITY_G_RATIO_RANGE, resolution),
        ))
    return preset


_BUILDERS = {
    'fig2': _fig2,
    'fig3': _fig3,
    'fig4': _fig4,
    'fig5': _fig5,
    'appendix': _appendix,
}


def get_preset(name: str, resolution: Optional[int] = None, vary: Optional[Mapping[str, float]] = None,
               method: Optional[str] = None, base: Optional[SystemParams] = None) -> Preset:
    """Build a named preset; ``vary`` replaces its variants by baseline + one scaled copy."""
    if name not in _BUILDERS:
        raise ConfigurationError(f"Unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}")
    resolution = DEFAULT_RESOLUTION if resolution is None else int(resolution)
    if resolution < 2:
        raise InvalidParameterError(f"resolution must be >= 2, got {resolution}", field='resolution')
    preset = _BUILDERS[name](base or SystemParams(), resolution, dict(vary or {}), method)
    logger.debug(f"Preset {name}: {len(preset.sweeps)} sweeps, {len(preset.boundaries)} boundaries, "
                 f"{len(preset.stability_maps)} stability maps at resolution {resolution}")
    return preset
