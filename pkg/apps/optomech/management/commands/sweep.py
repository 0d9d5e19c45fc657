"""
Management Command - Metric tables over one- or two-axis parameter grids.

With --preset every sweep of the preset is written next to --output with its
label appended; otherwise --axes (and optionally --metrics) describe one sweep.
"""

import json

from apps.optomech.cli import SimulationCommand, require_preset_or
from apps.optomech.presets import get_preset
from apps.optomech.spectrum import DriveFrameFilter
from apps.optomech.storage import labelled_path
from apps.optomech.sweep import SweepSpec, containment_violations, run_sweep


class Command(SimulationCommand):
    help = 'Evaluate metrics over a parameter grid (CSV rows or nested-grid JSON)'

    command_name = 'sweep'
    default_stem = 'sweep'

    def add_command_arguments(self, parser):
        parser.add_argument('--axes', help='JSON list of one or two axes: [{"name": ..., "values": [...]}]')
        parser.add_argument('--metrics', help='Comma-separated metric names')

    def specs(self, config):
        if config['preset']:
            preset = get_preset(config['preset'], resolution=config['resolution'], vary=config['vary'],
                                method=config['method'], base=config['params'])
            specs = preset.sweeps
            if config['metrics']:
                specs = [spec.replace(metrics=config['metrics']) for spec in specs]
            return [(spec.name[len(preset.name) + 1:], spec) for spec in specs]

        axes = require_preset_or(config, 'axes', 'sweep needs --preset or --axes')
        options = {'metrics': config['metrics']} if config['metrics'] else {}
        spec = SweepSpec(
            name='sweep',
            base=config['params'],
            axes=axes,
            filter=config['filter'] or DriveFrameFilter(),
            method=config['method'],
            **options,
        )
        return [(None, spec)]

    def run(self, config):
        path = self.output_path(config)
        outputs = []
        for label, spec in self.specs(config):
            table = run_sweep(spec, threads=config['threads'])
            violations = containment_violations(table)
            if any(violations.values()):
                self.stdout.write(self.style.WARNING(
                    f"{spec.name}: containment violations {json.dumps(violations)}"
                ))
            target = labelled_path(path, label) if label else path
            outputs.append(self.emit(
                target, config['format'],
                data=table.to_dict(), header=table.header(), rows=table.csv_rows(),
            ))
        return outputs
