"""
Management Command - Stable/unstable classification over two parameter axes.
"""

from apps.optomech.cli import SimulationCommand, require_preset_or
from apps.optomech.exceptions import ConfigurationError
from apps.optomech.presets import get_preset
from apps.optomech.stability import stability_map
from apps.optomech.storage import labelled_path


class Command(SimulationCommand):
    help = 'Map the stable region of the drift matrix over two parameter axes'

    command_name = 'stability_map'
    default_stem = 'stability_map'

    def add_command_arguments(self, parser):
        parser.add_argument('--axes', help='JSON list of two axes')

    def jobs(self, config):
        if config['preset']:
            preset = get_preset(config['preset'], resolution=config['resolution'], vary=config['vary'],
                                base=config['params'])
            if not preset.stability_maps:
                raise ConfigurationError(f"Preset {preset.name!r} defines no stability maps")
            return [(job.label[len(preset.name) + 1:], job.base, job.axis1, job.axis2)
                    for job in preset.stability_maps]

        axes = require_preset_or(config, 'axes', 'stability_map needs --preset or --axes')
        if len(axes) != 2:
            raise ConfigurationError('stability_map needs exactly two axes')
        return [(None, config['params'], axes[0], axes[1])]

    def run(self, config):
        path = self.output_path(config)
        outputs = []
        for label, base, axis1, axis2 in self.jobs(config):
            grid = stability_map(base, axis1, axis2, threads=config['threads'])
            self.stdout.write(f"{label or 'map'}: stable fraction {grid.stable_fraction():.3f}")
            target = labelled_path(path, label) if label else path
            outputs.append(self.emit(
                target, config['format'],
                data=grid.to_dict(), header=grid.header(), rows=grid.rows(),
            ))
        return outputs
