"""
Management Command - Level-crossing boundaries (S_q = 1, B_max = 2) over two axes.

With --preset every boundary of the preset is traced; --vary name=factor replaces the
preset's variants by the baseline and one scaled copy.
"""

from apps.optomech.cli import SimulationCommand, require_preset_or
from apps.optomech.exceptions import ConfigurationError
from apps.optomech.presets import get_preset
from apps.optomech.spectrum import DriveFrameFilter
from apps.optomech.storage import labelled_path
from apps.optomech.sweep import SweepSpec, trace_boundary


class Command(SimulationCommand):
    help = 'Trace metric level crossings along the second axis for every value of the first'

    command_name = 'boundary'
    default_stem = 'boundary'

    def add_command_arguments(self, parser):
        parser.add_argument('--axes', help='JSON list of two axes; crossings are searched along the second')
        parser.add_argument('--metric', help='s_q_min, log10_s_q, b_max or purity')
        parser.add_argument('--level', type=float, help='Level of the crossing')

    def jobs(self, config):
        if config['preset']:
            preset = get_preset(config['preset'], resolution=config['resolution'], vary=config['vary'],
                                method=config['method'], base=config['params'])
            if not preset.boundaries:
                raise ConfigurationError(f"Preset {preset.name!r} defines no boundaries")
            return [(job.label[len(preset.name) + 1:], job.spec, job.metric, job.level)
                    for job in preset.boundaries]

        axes = require_preset_or(config, 'axes', 'boundary needs --preset or --axes')
        if config['metric'] is None or config['level'] is None:
            raise ConfigurationError('boundary needs --metric and --level without a preset')
        spec = SweepSpec(
            name='boundary', base=config['params'], axes=axes, metrics=(config['metric'],),
            filter=config['filter'] or DriveFrameFilter(), method=config['method'],
        )
        return [(None, spec, config['metric'], config['level'])]

    def run(self, config):
        path = self.output_path(config)
        outputs = []
        for label, spec, metric, level in self.jobs(config):
            curve = trace_boundary(spec, metric, level, threads=config['threads'], label=label or '')
            target = labelled_path(path, label) if label else path
            outputs.append(self.emit(
                target, config['format'],
                data=curve.to_dict(), header=curve.header(), rows=curve.csv_rows(),
            ))
        return outputs
