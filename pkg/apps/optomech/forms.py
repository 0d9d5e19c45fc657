"""
Strict parsing of run configurations.

A run configuration comes from a --config JSON document merged with command-line
flags (flags win). Unknown keys are fatal so that a misspelt physics parameter can
never be silently ignored.
"""

import json
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

from django import forms
from django.core.exceptions import ValidationError

from .exceptions import ConfigurationError, OptomechError
from .grids import ParameterAxis
from .langevin import SystemParams
from .presets import PRESET_NAMES
from .spectrum import METHODS, DriveFrameFilter
from .storage import FORMATS, read_json
from .sweep import METRICS


class JsonDocumentField(forms.Field):
    """Accepts a parsed JSON value, an inline JSON string or a path to a JSON file."""

    def to_python(self, value):
        if value in self.empty_values:
            return None
        if isinstance(value, (dict, list, int, float)):
            return value
        text = str(value).strip()
        if text[:1] in ('{', '['):
            try:
                return json.loads(text)
            except json.JSONDecodeError as exc:
                raise ValidationError(f'Invalid inline JSON: {exc}')
        try:
            return read_json(Path(text))
        except ConfigurationError as exc:
            raise ValidationError(str(exc))


class RunConfigForm(forms.Form):
    """Validated run configuration shared by all simulation commands."""

    preset = forms.ChoiceField(required=False, choices=[('', '')] + [(p, p) for p in PRESET_NAMES])
    output = forms.CharField(required=False)
    format = forms.ChoiceField(required=False, choices=[(f, f) for f in FORMATS])
    seed = forms.IntegerField(required=False, min_value=0, max_value=2 ** 64 - 1)
    threads = forms.IntegerField(required=False, min_value=1)
    method = forms.ChoiceField(required=False, choices=[('', '')] + [(m, m) for m in METHODS])
    resolution = forms.IntegerField(required=False, min_value=2)
    trajectories = forms.IntegerField(required=False, min_value=2)
    params = JsonDocumentField(required=False)
    filter = JsonDocumentField(required=False)
    axes = JsonDocumentField(required=False)
    metrics = forms.Field(required=False)
    metric = forms.ChoiceField(required=False, choices=[('', ''), ('s_q_min', 's_q_min'),
                                                         ('log10_s_q', 'log10_s_q'),
                                                         ('b_max', 'b_max'), ('purity', 'purity')])
    level = forms.FloatField(required=False)
    vary = forms.Field(required=False)

    def clean_params(self):
        data = self.cleaned_data.get('params') or {}
        if not isinstance(data, dict):
            raise ValidationError('params must be a JSON object')
        try:
            return SystemParams.from_dict(data)
        except OptomechError as exc:
            raise ValidationError(str(exc))

    def clean_filter(self):
        data = self.cleaned_data.get('filter')
        if data is None:
            return None
        if not isinstance(data, dict):
            raise ValidationError('filter must be a JSON object')
        try:
            return DriveFrameFilter.from_dict(data)
        except (OptomechError, TypeError, ValueError) as exc:
            raise ValidationError(str(exc))

    def clean_axes(self):
        data = self.cleaned_data.get('axes')
        if data is None:
            return None
        if not isinstance(data, list) or not 1 <= len(data) <= 2:
            raise ValidationError('axes must be a list of one or two axis objects')
        try:
            return tuple(ParameterAxis.from_dict(axis) for axis in data)
        except (OptomechError, TypeError, ValueError, KeyError) as exc:
            raise ValidationError(f'Invalid axis: {exc}')

    def clean_metrics(self):
        value = self.cleaned_data.get('metrics')
        if value in (None, '', []):
            return None
        names = [v.strip() for v in value.split(',')] if isinstance(value, str) else list(value)
        unknown = [n for n in names if n not in METRICS]
        if unknown:
            raise ValidationError(f"Unknown metrics: {', '.join(unknown)}")
        return tuple(names)

    def clean_vary(self):
        """'name=factor' strings (repeatable flag) or a {name: factor} object."""
        value = self.cleaned_data.get('vary')
        if value in (None, '', [], {}):
            return {}
        if isinstance(value, dict):
            items = value.items()
        else:
            items = []
            for entry in ([value] if isinstance(value, str) else value):
                name, separator, factor = str(entry).partition('=')
                if not separator:
                    raise ValidationError(f"--vary expects name=factor, got {entry!r}")
                items.append((name.strip(), factor))
        factors = {}
        for name, factor in items:
            try:
                factors[name] = float(factor)
            except (TypeError, ValueError):
                raise ValidationError(f"Factor for {name!r} is not a number: {factor!r}")
            if not factors[name] > 0:
                raise ValidationError(f"Factor for {name!r} must be > 0")
        return factors

    def clean(self):
        cleaned = super().clean()
        cleaned['format'] = cleaned.get('format') or 'json'
        cleaned['method'] = cleaned.get('method') or None
        cleaned['preset'] = cleaned.get('preset') or None
        cleaned['metric'] = cleaned.get('metric') or None
        return cleaned


def _drop_unset(values: Mapping[str, Any]) -> Dict[str, Any]:
    return {k: v for k, v in values.items() if v is not None and v != [] and v != ''}


def parse_run_config(document: Optional[Mapping[str, Any]] = None,
                     overrides: Optional[Mapping[str, Any]] = None) -> Dict[str, Any]:
    """Merge a config document with flag values and validate strictly."""
    document = dict(document or {})
    unknown = sorted(set(document) - set(RunConfigForm.base_fields))
    if unknown:
        raise ConfigurationError(f"Unknown configuration keys: {', '.join(unknown)}")
    merged = {**document, **_drop_unset(overrides or {})}
    form = RunConfigForm(data=merged)
    if not form.is_valid():
        problems = '; '.join(
            f"{field}: {' '.join(str(m) for m in messages)}" for field, messages in form.errors.items()
        )
        raise ConfigurationError(f"Invalid configuration: {problems}")
    return form.cleaned_data
