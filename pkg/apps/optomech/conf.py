"""Access to OMBELL_* settings that also works without configured Django settings."""

from django.core.exceptions import ImproperlyConfigured

DEFAULTS = {
    'OMBELL_THREADS': 1,
    'OMBELL_OUTPUT_DIR': 'results',
    'OMBELL_COVARIANCE_METHOD': 'quadrature',
    'OMBELL_QUAD_EPSABS': 1e-8,
}


def get_setting(name: str):
    try:
        from django.conf import settings
        return getattr(settings, name, DEFAULTS.get(name))
    except ImproperlyConfigured:
        return DEFAULTS.get(name)
