"""Run deeply recursive work on a thread with a large stack."""

from __future__ import annotations

import sys
import threading
from typing import Any, Callable

STACK_BYTES = 512 * 1024 * 1024
RECURSION_LIMIT = 1_000_000


def run_deep(fn: Callable[..., Any], *args: Any, **kwargs: Any) -> Any:
    """Call ``fn`` on a big-stack thread and return its result or re-raise."""
    box: dict = {}

    def target() -> None:
        try:
            box["value"] = fn(*args, **kwargs)
        except BaseException as err:  # re-raised in the caller
            box["error"] = err

    old_size = threading.stack_size()
    old_limit = sys.getrecursionlimit()
    threading.stack_size(STACK_BYTES)
    sys.setrecursionlimit(max(old_limit, RECURSION_LIMIT))
    try:
        t = threading.Thread(target=target)
        t.start()
        t.join()
    finally:
        threading.stack_size(old_size)
        sys.setrecursionlimit(old_limit)
    if "error" in box:
        raise box["error"]
    return box.get("value")
