"""Counter-based random streams.

Every random draw in the package comes from a Philox generator keyed by
``(master seed, purpose tag, index)``. Replication ``i`` of a simulation
therefore sees the same numbers no matter which worker runs it or how the
work is chunked.
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["stream", "tag_id"]


def tag_id(tag: str) -> int:
    """Stable 32-bit integer for a text tag (independent of PYTHONHASHSEED)."""
    return int.from_bytes(hashlib.sha256(tag.encode()).digest()[:4], "little")


def stream(seed: int, tag: str, index: int = 0) -> np.random.Generator:
    """Generator for replication ``index`` of the purpose ``tag``."""
    if seed < 0 or index < 0:
        raise ValueError("seed and index must be nonnegative")
    ss = np.random.SeedSequence(int(seed), spawn_key=(tag_id(tag), int(index)))
    return np.random.Generator(np.random.Philox(ss))
