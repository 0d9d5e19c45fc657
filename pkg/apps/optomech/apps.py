from django.apps import AppConfig


class OptomechConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.optomech'
    verbose_name = 'Double-cavity optomechanics'
