"""
Pytest configuration and fixtures
"""
import numpy as np
import pytest

from src.config import Settings
from src.models.fock import FockCutoff
from src.models.params import KpoParams, NetworkSpec, OpoParams
from src.services.cache_service import CacheService


@pytest.fixture
def cache_service():
    """Fixture for cache service"""
    service = CacheService()
    yield service
    service.clear()


@pytest.fixture
def settings(tmp_path):
    """Fixture for test settings with default tolerances and a temporary output directory"""
    return Settings(
        rtol=1e-8,
        atol=1e-9,
        integrator="DOP853",
        leakage_tolerance=1e-4,
        max_workers=1,
        output_dir=str(tmp_path / "results"),
        log_level="DEBUG",
        master_seed=20180101,
        _env_file=None,
    )


@pytest.fixture
def kpo_params():
    """KPO with K = Delta = 1"""
    return KpoParams(K=1.0, Delta=1.0)


@pytest.fixture
def opo_params():
    """OPO with kappa = kappa2 = 1"""
    return OpoParams(kappa=1.0, kappa2=1.0)


@pytest.fixture
def pair_network():
    """Two modes with J12 = J21 = 1 and xi0 = 0.5"""
    return NetworkSpec(J=np.array([[0.0, 1.0], [1.0, 0.0]]), xi0=0.5)


@pytest.fixture
def small_cutoff():
    return FockCutoff(n_max=6)
