"""
Management Command - Monte-Carlo check of the filtered covariance.

The same --seed always produces the same output file.
"""

from apps.optomech.cli import SimulationCommand
from apps.optomech.services import SdeCheckService
from apps.optomech.spectrum import DriveFrameFilter

DEFAULT_TRAJECTORIES = 200


class Command(SimulationCommand):
    help = 'Integrate the Langevin equations and compare with the deterministic covariance'

    command_name = 'sde_check'
    default_stem = 'sde_check'
    uses_seed = True

    def add_command_arguments(self, parser):
        parser.add_argument('--trajectories', type=int,
                            help=f'Number of trajectories (default {DEFAULT_TRAJECTORIES})')

    def run(self, config):
        report = SdeCheckService.run(
            config['params'],
            config['filter'] or DriveFrameFilter(),
            n_trajectories=config['trajectories'] or DEFAULT_TRAJECTORIES,
            seed=config['seed'] or 0,
            threads=config['threads'],
            method=config['method'],
        )
        if report['within_standard_errors']:
            self.stdout.write(self.style.SUCCESS(f"Agrees within {report['k']:g} standard errors"))
        else:
            self.stdout.write(self.style.WARNING(f"Deviates by more than {report['k']:g} standard errors"))
        header, rows = SdeCheckService.csv_table(report)
        path = self.output_path(config)
        return [self.emit(path, config['format'], data=report, header=header, rows=rows)]
