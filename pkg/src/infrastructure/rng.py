"""
Seeded random streams with order-independent sub-seed derivation.
"""

import hashlib
from dataclasses import dataclass

import numpy as np

SEED_MASK = (1 << 64) - 1


def derive_seed(seed: int, label: str, index: int = 0) -> int:
    """64-bit sub-seed from (seed, label, index) via SHA-256."""
    digest = hashlib.sha256(f"{seed & SEED_MASK}:{label}:{index}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass(frozen=True)
class RngSpec:
    """Root seed of a family of independent, reproducible random streams."""
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "seed", int(self.seed) & SEED_MASK)

    def sub_seed(self, label: str, index: int = 0) -> int:
        return derive_seed(self.seed, label, index)

    def generator(self, label: str, index: int = 0) -> np.random.Generator:
        """Fresh PCG64 stream; identical (seed, label, index) gives identical draws."""
        return np.random.Generator(np.random.PCG64(self.sub_seed(label, index)))

    def child(self, label: str, index: int = 0) -> "RngSpec":
        return RngSpec(self.sub_seed(label, index))
