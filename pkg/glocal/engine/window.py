"""Versioned one-sided memory windows shared between rank threads."""
import zlib
from dataclasses import dataclass

import numpy as np
from readerwriterlock import rwlock

from glocal.errors import NumericalError

__all__ = ["WindowSnapshot", "WindowCell"]


@dataclass(frozen=True, eq=False)
class WindowSnapshot:
    version: int
    payload: np.ndarray
    checksum: int
    # free-form metadata written with the payload (e.g. the trace version it answers)
    tag: int = -1


def _checksum(payload: np.ndarray) -> int:
    return zlib.crc32(payload.tobytes())


class WindowCell:
    """
    A rank's exposed window. `put` publishes a complete new version; `get`
    returns the latest complete one. The lock only covers the reference swap.
    """

    def __init__(self, owner: int, size: int, name: str = ""):
        self.owner = owner
        self.name = name or f"window@{owner}"
        self._lock = rwlock.RWLockWrite()
        empty = np.zeros(size)
        empty.setflags(write=False)
        self._snapshot = WindowSnapshot(version=0, payload=empty, checksum=_checksum(empty))

    @property
    def version(self) -> int:
        with self._lock.gen_rlock():
            return self._snapshot.version

    def put(self, payload: np.ndarray, tag: int = -1) -> int:
        data = np.array(payload, dtype=float, copy=True)
        data.setflags(write=False)
        checksum = _checksum(data)
        with self._lock.gen_wlock():
            version = self._snapshot.version + 1
            self._snapshot = WindowSnapshot(version=version, payload=data, checksum=checksum, tag=int(tag))
        return version

    def get(self) -> WindowSnapshot:
        with self._lock.gen_rlock():
            snap = self._snapshot
        if _checksum(snap.payload) != snap.checksum:
            raise NumericalError(f"{self.name}: torn payload at version {snap.version}")
        return snap
