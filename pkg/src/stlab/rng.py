"""Counter-based random streams.

Stream ``index`` under ``seed`` is a Philox generator keyed on the pair, so
any block of work can be regenerated on its own, in any order, by any worker.
"""
import numpy as np

_MASK64 = (1 << 64) - 1


def generator(seed: int, index: int = 0) -> np.random.Generator:
    if seed < 0 or index < 0:
        raise ValueError("seed and index must be non-negative")
    key = (seed & _MASK64) | ((index & _MASK64) << 64)
    return np.random.Generator(np.random.Philox(key=key))
