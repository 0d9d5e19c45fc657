"""
Shared base for the simulation management commands.

Parses the common flags into a validated run configuration, records the run,
maps library exceptions to exit codes and writes the manifest next to the outputs.
"""

import logging
import time
from pathlib import Path
from typing import Any, Dict, List, Optional

from django.core.management.base import BaseCommand, CommandError

from .exceptions import ConfigurationError, OptomechError
from .forms import parse_run_config
from .models import SimulationRun
from .services import RunRegistry
from .storage import (
    FORMATS,
    config_hash,
    package_versions,
    read_json,
    resolve_output_path,
    write_csv,
    write_json,
    write_manifest,
)

logger = logging.getLogger('optomech')


def serializable_config(config: Dict[str, Any]) -> Dict[str, Any]:
    """Cleaned run configuration in JSON form (the input of the config hash)."""
    data = {}
    for key, value in sorted(config.items()):
        if value is None or value == {} or key == 'output':
            continue
        if hasattr(value, 'to_dict'):
            value = value.to_dict()
        elif key == 'axes':
            value = [axis.to_dict() for axis in value]
        elif isinstance(value, tuple):
            value = list(value)
        data[key] = value
    return data


class SimulationCommand(BaseCommand):
    """
    Subclasses set ``command_name`` and ``default_stem`` and implement ``run``,
    which returns the list of files it wrote.
    """

    command_name = ''
    default_stem = ''
    uses_seed = False

    def add_arguments(self, parser):
        parser.add_argument('--config', help='JSON run configuration (flags override its keys)')
        parser.add_argument('--preset', help='Named figure preset: fig2, fig3, fig4, fig5, appendix')
        parser.add_argument('--output', help='Output file; bare names go to OMBELL_OUTPUT_DIR')
        parser.add_argument('--format', choices=FORMATS, help='Output format (default json)')
        parser.add_argument('--seed', type=int, help='Random seed (unsigned 64-bit)')
        parser.add_argument('--threads', type=int, help='Worker threads (fallback: OMBELL_THREADS)')
        parser.add_argument('--method', help='Filtered covariance method: quadrature or lyapunov')
        parser.add_argument('--resolution', type=int, help='Grid points per preset axis')
        parser.add_argument('--params', help='SystemParams as inline JSON or a file path')
        parser.add_argument('--filter', help='Filter (epsilon, omega_plus, omega_minus) as inline JSON or a file path')
        parser.add_argument('--vary', action='append', metavar='NAME=FACTOR',
                            help='Scale a base parameter (repeatable)')
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    # ------------------------------------------------------------------
    # Configuration
    # ------------------------------------------------------------------
    def load_config(self, options) -> Dict[str, Any]:
        document = read_json(Path(options['config'])) if options.get('config') else {}
        if not isinstance(document, dict):
            raise CommandError('--config must hold a JSON object', returncode=1)
        overrides = {
            key: options.get(key)
            for key in ('preset', 'output', 'format', 'seed', 'threads', 'method', 'resolution',
                        'params', 'filter', 'vary', 'trajectories', 'axes', 'metrics', 'metric', 'level')
        }
        return parse_run_config(document, overrides)

    def output_path(self, config) -> Path:
        stem = config['preset'] or self.default_stem
        return resolve_output_path(config['output'], stem, config['format'])

    def emit(self, path: Path, fmt: str, data: Any = None, header=None, rows=None) -> Path:
        if fmt == 'csv':
            return write_csv(path, header, rows)
        return write_json(path, data)

    # ------------------------------------------------------------------
    # Execution
    # ------------------------------------------------------------------
    def handle(self, *args, **options):
        started = time.monotonic()
        try:
            config = self.load_config(options)
        except OptomechError as exc:
            raise CommandError(str(exc), returncode=exc.exit_code)

        document = serializable_config(config)
        digest = config_hash(document)
        versions = package_versions()
        run = RunRegistry.start(
            self.command_name, document, digest,
            preset=config['preset'],
            seed=config['seed'] if self.uses_seed else None,
            versions=versions,
        )
        logger.info(f"{self.command_name} started (config {digest[:12]})")

        try:
            outputs = self.run(config)
            wall_time = time.monotonic() - started
            primary = outputs[0] if outputs else None
            manifest = {
                'command': self.command_name,
                'preset': config['preset'],
                'config': document,
                'config_hash': digest,
                'versions': versions,
                'wall_time': wall_time,
                'outputs': [str(p) for p in outputs],
            }
            manifest_file = write_manifest(primary, manifest) if primary else None
        except OptomechError as exc:
            wall_time = time.monotonic() - started
            logger.error(f"{self.command_name} failed after {wall_time:.2f}s: {exc}")
            RunRegistry.finish(run, SimulationRun.STATUS_FAILED, exc.exit_code, wall_time,
                               error_message=str(exc))
            raise CommandError(str(exc), returncode=exc.exit_code)

        RunRegistry.finish(
            run, SimulationRun.STATUS_SUCCEEDED, 0, wall_time,
            output_path=str(primary or ''),
            manifest_path=str(manifest_file or ''),
        )
        logger.info(f"{self.command_name} finished in {wall_time:.2f}s")
        for path in outputs:
            self.stdout.write(f"  {path}")
        self.stdout.write(self.style.SUCCESS(
            f"✓ {self.command_name}: {len(outputs)} file(s) written in {wall_time:.1f}s"
        ))

    def run(self, config: Dict[str, Any]) -> List[Path]:
        raise NotImplementedError


def require_preset_or(config: Dict[str, Any], key: str, message: str) -> Optional[Any]:
    """The value of ``key``, which is required when no preset is given."""
    if config['preset'] is None and not config.get(key):
        raise ConfigurationError(message)
    return config.get(key)
