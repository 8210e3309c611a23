"""Advisory lock files guarding index and cache writes across processes."""

from __future__ import annotations

import os
import time
from contextlib import contextmanager
from pathlib import Path

from .errors import ClaimcheckError


class LockTimeout(ClaimcheckError):
    pass


@contextmanager
def file_lock(target: str | Path, timeout: float = 30.0, poll: float = 0.05):
    """Exclusive advisory lock: ``<target>.lock`` created O_EXCL.

    Stale locks from dead processes are broken when their pid is gone.
    """
    lock_path = Path(str(target) + ".lock")
    deadline = time.monotonic() + timeout
    while True:
        try:
            fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
            os.write(fd, str(os.getpid()).encode())
            os.close(fd)
            break
        except FileExistsError:
            try:
                pid = int(lock_path.read_text() or "0")
            except (OSError, ValueError):
                pid = 0
            if pid > 0:
                try:
                    os.kill(pid, 0)
                except ProcessLookupError:
                    lock_path.unlink(missing_ok=True)
                    continue
                except PermissionError:
                    pass
            if time.monotonic() >= deadline:
                raise LockTimeout(f"could not acquire {lock_path} within {timeout}s")
            time.sleep(poll)
    try:
        yield
    finally:
        lock_path.unlink(missing_ok=True)
