"""NumPy fallback for the bitmask kernels of the full-Hilbert-space oracle.

Same signatures as the compiled module `_fast`; selected at import time by
the package __init__ when the extension is unavailable (or forced off via
MEMAMP_PURE_PYTHON=1).
"""

import numpy as np

BACKEND_NAME = "numpy"


def popcounts(n_atoms: int) -> np.ndarray:
    """Number of set bits for every bitmask in 0..2^n_atoms - 1, as uint8."""
    size = 1 << n_atoms
    bits = (np.arange(size, dtype=np.uint32)[:, None] >> np.arange(n_atoms)) & 1
    return bits.sum(axis=1).astype(np.uint8)


def collective_apply(amps: np.ndarray, n_atoms: int, raising: bool) -> np.ndarray:
    """Apply (1/sqrt(N)) * sum_i of single-atom flips to a 2^N state vector.

    ``raising=True`` flips one atom g->s per term (bit 0 -> 1), else s->g.
    Each atom's flip is a strided copy: splitting the index as
    (high, bit_i, low) turns the bitmask arithmetic into axis slicing.
    """
    size = 1 << n_atoms
    amps = np.asarray(amps, dtype=np.complex128)
    if amps.shape != (size,):
        raise ValueError(f"expected shape ({size},), got {amps.shape}")
    out = np.zeros(size, dtype=np.complex128)
    for i in range(n_atoms):
        shape = (1 << (n_atoms - 1 - i), 2, 1 << i)
        source = amps.reshape(shape)
        target = out.reshape(shape)
        if raising:
            target[:, 1, :] += source[:, 0, :]
        else:
            target[:, 0, :] += source[:, 1, :]
    out /= np.sqrt(n_atoms)
    return out
