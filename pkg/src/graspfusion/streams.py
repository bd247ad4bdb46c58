"""Deterministic random-stream derivation.

A 64-bit master seed plus a purpose string (``"test-sample/17"``,
``"uniform-only/17"``, ``"simulate/img-0042"``) is hashed with SHA-256 into a
child seed, and each child seed drives its own PCG64 generator. Streams for
different purposes never share state, so trials can run in any order, or in
parallel, without changing a single draw.

The generator family is fixed per release; changing it is a breaking change
for anyone relying on byte-identical reports.
"""

from __future__ import annotations

import hashlib

import numpy as np

GENERATOR_FAMILY = "pcg64"


def derive_seed(master_seed: int, purpose: str) -> int:
    """Collapse (master seed, purpose string) into a 64-bit child seed."""
    master = int(master_seed) % (1 << 64)
    digest = hashlib.sha256(
        master.to_bytes(8, "little") + purpose.encode("utf-8")
    ).digest()
    return int.from_bytes(digest[:8], "little")


def derive_rng(master_seed: int, purpose: str) -> np.random.Generator:
    """Independent generator for one named purpose."""
    return np.random.Generator(np.random.PCG64(derive_seed(master_seed, purpose)))
