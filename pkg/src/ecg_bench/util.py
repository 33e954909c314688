"""Shared helpers: content hashing, canonical JSON, and seeded generators."""
import json

import numpy as np

FNV64_OFFSET = 0xCBF29CE484222325
FNV64_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a hash of a byte string."""
    h = FNV64_OFFSET
    for b in data:
        h = ((h ^ b) * FNV64_PRIME) & _MASK64
    return h


def fnv1a64_hex(data: bytes) -> str:
    return f"{fnv1a64(data):016x}"


def canonical_json(obj) -> str:
    """Key-sorted, whitespace-free JSON; the hashing form for configs."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def make_rng(*seed_parts) -> np.random.Generator:
    """PCG64 generator keyed by an integer tuple.

    All randomness in the package flows through this constructor so a run is
    a pure function of its explicit seeds.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed_parts)))


def format_float(x: float) -> str:
    """Shortest decimal string that parses back to exactly the same float."""
    return repr(float(x))
