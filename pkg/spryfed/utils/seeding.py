"""Counter-based seed derivation.

Every random stream in spryfed comes from a numpy ``Philox`` bit generator whose
key is produced by :func:`mix64`. Two replicas that call ``derive_generator`` with
the same integers get bit-identical streams. Normal variates are drawn with
``Generator.standard_normal`` (numpy's 64-bit ziggurat), so replay equality holds
for a fixed numpy release.
"""
from typing import Iterable

import numpy as np

MASK64 = 0xFFFF_FFFF_FFFF_FFFF
GOLDEN_GAMMA = 0x9E37_79B9_7F4A_7C15


def splitmix64(x: int) -> int:
    """SplitMix64 finalizer on a 64-bit unsigned integer."""
    z = (x + GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58_476D_1CE4_E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D0_49BB_1331_11EB) & MASK64
    return z ^ (z >> 31)


def mix64(base_seed: int, *components: int) -> int:
    """Fold integer components into a 64-bit seed.

    ``mix64(s, a, b, c)`` = ``f(f(f(s, a), b), c)`` where
    ``f(h, x) = splitmix64(h ^ splitmix64(x))``. Negative components are taken
    modulo 2**64.
    """
    h = splitmix64(int(base_seed) & MASK64)
    for component in components:
        h = splitmix64(h ^ splitmix64(int(component) & MASK64))
    return h


def make_generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=int(seed) & MASK64))


def derive_generator(base_seed: int, *components: int) -> np.random.Generator:
    return make_generator(mix64(base_seed, *components))


def tag_id(tag: str) -> int:
    """Stable integer for a string tag (never Python's salted ``hash``)."""
    value = 0
    for byte in tag.encode("utf-8"):
        value = splitmix64(value ^ byte)
    return value


def derive_tagged(base_seed: int, tag: str, components: Iterable[int] = ()) -> np.random.Generator:
    return derive_generator(base_seed, tag_id(tag), *components)
