"""Seed handling for replicated simulation runs.

Replication ``i`` of a run with master seed ``m`` uses
``numpy.random.default_rng(spawn_seeds(m, n)[i])``: the integers come from
``SeedSequence(m).generate_state(n)``, so streams are independent, stored as
plain ints in reports, and identical across runs with the same master seed.
"""

import numpy as np


def spawn_seeds(master_seed, n, *, key=()):
    """Return ``n`` 64-bit integer seeds derived from ``master_seed``.

    ``key`` selects an independent family of seeds (e.g. a scenario index).
    """
    seq = np.random.SeedSequence(master_seed, spawn_key=tuple(int(k) for k in key))
    return [int(s) for s in seq.generate_state(n, dtype=np.uint64)]
