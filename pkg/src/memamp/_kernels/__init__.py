"""Kernel backend selection: compiled Cython core with a NumPy fallback.

Set MEMAMP_PURE_PYTHON=1 to force the fallback (used by the benchmark and by
tests that compare the two backends).
"""

import functools
import os

if os.environ.get("MEMAMP_PURE_PYTHON"):
    from . import _pure as _impl
else:
    try:
        from . import _fast as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _pure as _impl

BACKEND = _impl.BACKEND_NAME


@functools.lru_cache(maxsize=16)
def popcounts(n_atoms: int):
    # pure function of the atom count; callers share a read-only array
    counts = _impl.popcounts(n_atoms)
    counts.flags.writeable = False
    return counts


collective_apply = _impl.collective_apply

__all__ = ["BACKEND", "popcounts", "collective_apply"]
