"""
Unit tests for cache service
"""
import threading
import time
from concurrent.futures import ThreadPoolExecutor

from src.models.fock import FockCutoff
from src.services import phase_space


def test_cache_set_and_get(cache_service):
    """Test basic cache set and get operations"""
    cache_service.set("test_key", "test_value")
    assert cache_service.get("test_key") == "test_value"


def test_cache_entries_persist_until_cleared(cache_service):
    """Test that entries survive until cleared"""
    cache_service.set("projector", 42)
    time.sleep(0.1)
    assert cache_service.get("projector") == 42


def test_cache_miss(cache_service):
    """Test cache miss returns None and is counted"""
    assert cache_service.get("nonexistent_key") is None
    assert cache_service.get_stats()["misses"] == 1


def test_cache_clear(cache_service):
    """Test cache clear removes all entries and resets counters"""
    cache_service.set("key1", "value1")
    cache_service.set("key2", "value2")
    cache_service.get("key1")

    assert len(cache_service.get_stats()["keys"]) == 2

    cache_service.clear()
    stats = cache_service.get_stats()
    assert len(stats["keys"]) == 0
    assert stats["hits"] == 0


def test_cache_stats(cache_service):
    """Test cache statistics"""
    cache_service.set("key1", "value1")
    cache_service.set("key2", "value2")
    cache_service.get("key1")

    stats = cache_service.get_stats()
    assert stats["size"] == 2
    assert "key1" in stats["keys"]
    assert "key2" in stats["keys"]
    assert stats["hits"] == 1


def test_cache_overwrites(cache_service):
    """Test that setting same key overwrites previous value"""
    cache_service.set("key", "value1")
    assert cache_service.get("key") == "value1"

    cache_service.set("key", "value2")
    assert cache_service.get("key") == "value2"


def test_get_or_compute_calls_factory_once(cache_service):
    """Test that get_or_compute only builds a value on the first miss"""
    calls = []

    def factory():
        calls.append(1)
        return "built"

    assert cache_service.get_or_compute("calibration", factory) == "built"
    assert cache_service.get_or_compute("calibration", factory) == "built"
    assert len(calls) == 1


def test_get_or_compute_caches_none(cache_service):
    """Test a factory returning None is not rerun"""
    calls = []

    def factory():
        calls.append(1)

    assert cache_service.get_or_compute("empty", factory) is None
    assert cache_service.get_or_compute("empty", factory) is None
    assert len(calls) == 1


def test_concurrent_misses_share_one_computation(cache_service):
    """Test threads missing on the same key wait for a single factory call"""
    calls = []
    started = threading.Barrier(8)

    def factory():
        calls.append(1)
        time.sleep(0.2)
        return object()

    def request(_):
        started.wait()
        return cache_service.get_or_compute("calibration:rx", factory)

    with ThreadPoolExecutor(max_workers=8) as pool:
        values = list(pool.map(request, range(8)))

    assert len(calls) == 1
    assert all(value is values[0] for value in values)


def test_cache_is_thread_safe(cache_service):
    """Test concurrent writers leave a consistent cache"""
    def writer(offset):
        for i in range(200):
            cache_service.set(f"k{offset}:{i}", i)

    threads = [threading.Thread(target=writer, args=(n,)) for n in range(4)]
    for thread in threads:
        thread.start()
    for thread in threads:
        thread.join()

    assert cache_service.get_stats()["size"] == 800


def test_projectors_are_cached_per_cutoff(cache_service):
    """Test that quadrature-sign projectors are stored once per sign and cutoff"""
    cutoff = FockCutoff(n_max=5)
    first = phase_space.quadrature_sign_projector(1, cutoff, cache_service)
    second = phase_space.quadrature_sign_projector(1, cutoff, cache_service)

    assert first is second
    assert "projector:+1:5" in cache_service.get_stats()["keys"]
