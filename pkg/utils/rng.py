"""
Seeded random streams
One root seed, independent per-purpose substreams derived from fixed labels
"""

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def stable_hash(*parts: str) -> int:
    """64-bit hash of the labels, identical on every platform and Python build"""
    digest = hashlib.sha256("\x1f".join(parts).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def derive_seed(root_seed: int, *labels: str) -> int:
    """Combine a root seed with labels into a new 64-bit seed"""
    digest = hashlib.sha256(
        (root_seed & _MASK64).to_bytes(8, "big") + "\x1f".join(labels).encode("utf-8")
    ).digest()
    return int.from_bytes(digest[:8], "big")


def substream(seed: int, label: str) -> np.random.Generator:
    """Generator for one sampling site; adding a new label never shifts the others"""
    sequence = np.random.SeedSequence([seed & _MASK64, stable_hash(label)])
    return np.random.Generator(np.random.PCG64(sequence))
