"""Per-trial random streams derived from one master seed.

Trial ``i`` of a run with master seed ``s`` uses
``PCG64(SeedSequence(entropy=s, spawn_key=(i,)))``, so any trial can be
reproduced on its own and trials may run in any order or in parallel.
"""

import numpy as np


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(trial),))
    return np.random.Generator(np.random.PCG64(ss))
