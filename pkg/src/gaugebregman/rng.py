"""Deterministic random streams.

All randomness in the library flows through Philox, a 64-bit counter-based
generator.  Streams are keyed by a root seed plus an integer index path, so
independent trials get independent, reproducible streams regardless of the
order in which they are run.
"""

from __future__ import annotations

import numpy as np


def stream(seed: int, *path: int) -> np.random.Generator:
    """Return the Philox stream keyed by ``(seed, *path)``.

    The same ``(seed, path)`` always yields the same stream; distinct paths
    yield statistically independent streams.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(i) for i in path))
    return np.random.Generator(np.random.Philox(ss))
