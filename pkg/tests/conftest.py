import warnings

from hypothesis import HealthCheck, settings

settings.register_profile("sharpflat", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("sharpflat")


def pytest_configure(config):
    warnings.filterwarnings("ignore", category=DeprecationWarning)
