from typing import Any


class KeyValueStore:
    def get(self, key: str) -> Any | None:
        """
        Return the cached value for key, or None when absent.
        """
        raise NotImplementedError

    def set(self, key: str, value: Any) -> None:
        """
        Store value under key, replacing any previous entry.
        """
        raise NotImplementedError
