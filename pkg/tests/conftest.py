import pytest

from bowlforge import IntegrationConfig, get_speed, integrate


@pytest.fixture(scope="session")
def profile_cache():
    """Profiles shared across test modules, keyed by (spec, dim, config)."""
    cache = {}

    def fetch(spec: str, dim: int, config: IntegrationConfig | None = None):
        key = (spec, dim, config)
        if key not in cache:
            cache[key] = integrate(get_speed(spec, dim), config)
        return cache[key]

    fetch.store = cache
    return fetch
