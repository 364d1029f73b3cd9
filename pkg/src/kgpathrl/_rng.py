"""Deterministic random-stream derivation.

Python's hash() is salted per process, so child streams are derived
through sha256 instead; the same (seed, tags) always yields the same
stream on any machine.
"""

import hashlib
import random


def child_rng(seed, *tags) -> random.Random:
    """Derive an independent, reproducible random stream from a seed and tags."""
    material = repr((int(seed),) + tuple(tags)).encode("utf-8")
    digest = hashlib.sha256(material).digest()
    return random.Random(int.from_bytes(digest[:16], "big"))
