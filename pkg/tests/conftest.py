import numpy as np
import pytest

from gfdm.config.settings import Settings
from gfdm.models.params import GfdmParams, PrototypeFilter


@pytest.fixture
def mock_settings():
    """Mock settings for testing"""
    return Settings(
        singular_rtol=1e-12,
        zf_tolerance=1e-12,
        quad_limit=200,
        sweep_concurrency=2,
        sweep_cache_size=3,
        verify_seed=7,
        verify_cases=4,
        sentry_dsn=None,
        log_level="DEBUG",
        debug=True,
    )


@pytest.fixture
def rng():
    """Seeded random generator"""
    return np.random.default_rng(1234)


@pytest.fixture
def hand_params():
    """Smallest configuration with hand-derived metric values"""
    return GfdmParams(K=4, M=2, lam=0.5)


@pytest.fixture
def rc_filter():
    """Case A raised cosine with full roll-off"""
    return PrototypeFilter.rc(1.0)


@pytest.fixture
def rrc_filter():
    """Case B root raised cosine with full roll-off"""
    return PrototypeFilter.rrc(1.0)


@pytest.fixture
def all_filters():
    """One filter of every family and generator"""
    return [
        PrototypeFilter.rc(0.5),
        PrototypeFilter.rc(0.8, generator="linear"),
        PrototypeFilter.rrc(0.5, beta=0),
        PrototypeFilter.rrc(0.6, beta=1),
        PrototypeFilter.rrc(0.7, beta=2, generator="linear"),
        PrototypeFilter.rrc(0.4, beta=3),
        PrototypeFilter.xia(0.5),
    ]


@pytest.fixture
def clear_cache():
    """Clear the sweep report cache before each test"""
    from gfdm.services.sweeps import _cache

    _cache.clear()
    yield
    _cache.clear()


@pytest.fixture(autouse=True)
def reset_structlog():
    """Reset structlog context before each test"""
    import structlog

    structlog.contextvars.clear_contextvars()
    yield
    structlog.contextvars.clear_contextvars()
