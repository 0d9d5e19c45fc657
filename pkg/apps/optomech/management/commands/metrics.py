"""
Management Command - Gaussian metrics at one parameter point.

Exit codes: 0 success, 1 configuration error, 2 unstable model (margin printed),
3 numerical failure.
"""

from apps.optomech.cli import SimulationCommand
from apps.optomech.services import MetricsService
from apps.optomech.spectrum import DriveFrameFilter


class Command(SimulationCommand):
    help = 'Squeezing, Bell, purity and separability metrics of the filtered outputs at one point'

    command_name = 'metrics'
    default_stem = 'metrics'

    def run(self, config):
        record = MetricsService.evaluate(
            config['params'], config['filter'] or DriveFrameFilter(), method=config['method'],
        )
        metrics = record['metrics']
        self.stdout.write(
            f"s_q_min={metrics['s_q_min']:.6g}  b_max={metrics['b_max']:.6g}  "
            f"purity={metrics['purity']:.6g}  separable={metrics['simon_separable']}"
        )
        header, rows = MetricsService.csv_table(record)
        path = self.output_path(config)
        return [self.emit(path, config['format'], data=record, header=header, rows=rows)]
