"""
Run registry: one row per command invocation.

The manifest JSON written next to every output carries the same fields; this table
is the queryable index of those manifests.
"""

from django.db import models


class SimulationRun(models.Model):
    """A single invocation of a simulation command."""

    COMMAND_CHOICES = [
        ('metrics', 'Metrics at one point'),
        ('sweep', 'Parameter sweep'),
        ('boundary', 'Level-crossing boundary'),
        ('stability_map', 'Stability map'),
        ('sde_check', 'Monte-Carlo check'),
        ('oracle_compare', 'Closed-form comparison'),
    ]
    STATUS_RUNNING = 'running'
    STATUS_SUCCEEDED = 'succeeded'
    STATUS_FAILED = 'failed'
    STATUS_CHOICES = [
        (STATUS_RUNNING, 'Running'),
        (STATUS_SUCCEEDED, 'Succeeded'),
        (STATUS_FAILED, 'Failed'),
    ]

    command = models.CharField(max_length=30, choices=COMMAND_CHOICES, verbose_name='Command')
    preset = models.CharField(max_length=30, blank=True, default='', verbose_name='Preset')
    config = models.JSONField(default=dict, blank=True, verbose_name='Configuration')
    config_hash = models.CharField(
        max_length=64, db_index=True, verbose_name='Config hash',
        help_text='sha256 of the canonical JSON configuration'
    )
    seed = models.BigIntegerField(null=True, blank=True, verbose_name='Seed')
    status = models.CharField(
        max_length=20, choices=STATUS_CHOICES, default=STATUS_RUNNING, verbose_name='Status'
    )
    exit_code = models.PositiveSmallIntegerField(null=True, blank=True, verbose_name='Exit code')
    output_path = models.CharField(max_length=500, blank=True, default='', verbose_name='Output path')
    manifest_path = models.CharField(max_length=500, blank=True, default='', verbose_name='Manifest path')
    wall_time = models.FloatField(default=0, verbose_name='Wall time (s)')
    versions = models.JSONField(default=dict, blank=True, verbose_name='Package versions')
    error_message = models.TextField(blank=True, default='', verbose_name='Error message')
    created_at = models.DateTimeField(auto_now_add=True, verbose_name='Started at')
    completed_at = models.DateTimeField(null=True, blank=True, verbose_name='Completed at')

    class Meta:
        db_table = 'simulation_runs'
        verbose_name = 'Simulation run'
        verbose_name_plural = 'Simulation runs'
        ordering = ['-created_at']
        indexes = [
            models.Index(fields=['command', 'created_at'], name='simulation__command_5b1f0e_idx'),
            models.Index(fields=['status'], name='simulation__status_9c2d41_idx'),
        ]

    def __str__(self):
        return f"{self.get_command_display()} [{self.config_hash[:8]}] ({self.get_status_display()})"
