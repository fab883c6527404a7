import threading
from typing import Any

from .interface import KeyValueStore


class MemoryStore(KeyValueStore):
    def __init__(self, max_entries: int = 256) -> None:
        self._data: dict[str, Any] = {}
        self._lock = threading.Lock()
        self._max_entries = max(1, int(max_entries))

    def get(self, key: str) -> Any | None:
        with self._lock:
            return self._data.get(key)

    def set(self, key: str, value: Any) -> None:
        with self._lock:
            # Oldest entry goes first once full (dicts keep insertion order)
            if key not in self._data and len(self._data) >= self._max_entries:
                self._data.pop(next(iter(self._data)))
            self._data[key] = value

    def __len__(self) -> int:
        with self._lock:
            return len(self._data)
