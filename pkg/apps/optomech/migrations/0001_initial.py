# Generated by Django 5.2.10 on 2026-10-19 09:12

from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name='SimulationRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('command', models.CharField(choices=[('metrics', 'Metrics at one point'), ('sweep', 'Parameter sweep'), ('boundary', 'Level-crossing boundary'), ('stability_map', 'Stability map'), ('sde_check', 'Monte-Carlo check'), ('oracle_compare', 'Closed-form comparison')], max_length=30, verbose_name='Command')),
                ('preset', models.CharField(blank=True, default='', max_length=30, verbose_name='Preset')),
                ('config', models.JSONField(blank=True, default=dict, verbose_name='Configuration')),
                ('config_hash', models.CharField(db_index=True, help_text='sha256 of the canonical JSON configuration', max_length=64, verbose_name='Config hash')),
                ('seed', models.BigIntegerField(blank=True, null=True, verbose_name='Seed')),
                ('status', models.CharField(choices=[('running', 'Running'), ('succeeded', 'Succeeded'), ('failed', 'Failed')], default='running', max_length=20, verbose_name='Status')),
                ('exit_code', models.PositiveSmallIntegerField(blank=True, null=True, verbose_name='Exit code')),
                ('output_path', models.CharField(blank=True, default='', max_length=500, verbose_name='Output path')),
                ('manifest_path', models.CharField(blank=True, default='', max_length=500, verbose_name='Manifest path')),
                ('wall_time', models.FloatField(default=0, verbose_name='Wall time (s)')),
                ('versions', models.JSONField(blank=True, default=dict, verbose_name='Package versions')),
                ('error_message', models.TextField(blank=True, default='', verbose_name='Error message')),
                ('created_at', models.DateTimeField(auto_now_add=True, verbose_name='Started at')),
                ('completed_at', models.DateTimeField(blank=True, null=True, verbose_name='Completed at')),
            ],
            options={
                'verbose_name': 'Simulation run',
                'verbose_name_plural': 'Simulation runs',
                'db_table': 'simulation_runs',
                'ordering': ['-created_at'],
                'indexes': [models.Index(fields=['command', 'created_at'], name='simulation__command_5b1f0e_idx'), models.Index(fields=['status'], name='simulation__status_9c2d41_idx')],
            },
        ),
    ]
