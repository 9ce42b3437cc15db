"""
Cache service for quadrature projectors and gate calibrations
"""
import threading
from typing import Any, Callable, Dict, Optional

_MISSING = object()


class CacheService:
    """In-memory cache safe to share across threads; each key is computed at most once"""

    def __init__(self):
        self._cache: Dict[str, Any] = {}
        self._lock = threading.Lock()
        self._key_locks: Dict[str, threading.Lock] = {}
        self._hits = 0
        self._misses = 0

    def _lookup(self, key: str) -> Any:
        with self._lock:
            value = self._cache.get(key, _MISSING)
            if value is _MISSING:
                self._misses += 1
            else:
                self._hits += 1
            return value

    def get(self, key: str) -> Optional[Any]:
        """
        Get a cached value

        Args:
            key: Cache key

        Returns:
            Cached value or None if not found
        """
        value = self._lookup(key)
        return None if value is _MISSING else value

    def set(self, key: str, value: Any):
        """
        Store a value until the cache is cleared

        Args:
            key: Cache key
            value: Value to cache
        """
        with self._lock:
            self._cache[key] = value

    def get_or_compute(self, key: str, factory: Callable[[], Any]) -> Any:
        """
        Return the cached value for key, computing and storing it on a miss

        Concurrent callers that miss on the same key wait for a single factory call.
        A cached None counts as a hit.

        Args:
            key: Cache key
            factory: Zero-argument callable producing the value

        Returns:
            Cached or freshly computed value
        """
        value = self._lookup(key)
        if value is not _MISSING:
            return value
        with self._lock:
            key_lock = self._key_locks.setdefault(key, threading.Lock())
        with key_lock:
            with self._lock:
                value = self._cache.get(key, _MISSING)
            if value is _MISSING:
                value = factory()
                self.set(key, value)
        return value

    def clear(self):
        """Clear all cache entries (useful for testing)"""
        with self._lock:
            self._cache.clear()
            self._key_locks.clear()
            self._hits = 0
            self._misses = 0

    def get_stats(self) -> Dict[str, Any]:
        """
        Return cache statistics for monitoring

        Returns:
            Dictionary with cache size, keys, hits and misses
        """
        with self._lock:
            return {
                "size": len(self._cache),
                "keys": list(self._cache.keys()),
                "hits": self._hits,
                "misses": self._misses,
            }
