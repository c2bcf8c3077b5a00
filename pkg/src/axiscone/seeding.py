"""Deterministic seed derivation.

Every random draw in the toolkit comes from a numpy Generator whose seed is
an element of a splitmix64 stream: child seed i of master seed m is the
splitmix64 output for state m after i increments.  Nested task trees chain
the derivation, so any (experiment, task, restart) triple maps to one fixed
64-bit seed regardless of execution order or parallelism.
"""

import numpy as np

_MASK64 = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15


def _finalize(z):
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK64
    return z ^ (z >> 31)


def splitmix64(master, index):
    """Element `index` (0-based) of the splitmix64 stream seeded at `master`."""
    state = (int(master) + (int(index) + 1) * _GOLDEN) & _MASK64
    return _finalize(state)


def derive_seed(master, *counters):
    """Chain splitmix64 streams over counter offsets: one child per task path."""
    seed = int(master) & _MASK64
    for c in counters:
        seed = splitmix64(seed, c)
    return seed


def rng_for(master, *counters):
    """numpy Generator for the task identified by the counter path."""
    return np.random.default_rng(derive_seed(master, *counters))
