# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled bitmask kernels for the full-Hilbert-space oracle.

Single-pass C loops over all 2^N basis states; the NumPy fallback `_pure`
implements the same contract with one vectorized pass per atom.
"""

from libc.math cimport sqrt

import numpy as np

BACKEND_NAME = "cython"


cdef inline int _popcount(unsigned long long x) nogil:
    x = x - ((x >> 1) & 0x5555555555555555ULL)
    x = (x & 0x3333333333333333ULL) + ((x >> 2) & 0x3333333333333333ULL)
    x = (x + (x >> 4)) & 0x0F0F0F0F0F0F0F0FULL
    return <int>((x * 0x0101010101010101ULL) >> 56)


def popcounts(int n_atoms):
    """Number of set bits for every bitmask in 0..2^n_atoms - 1, as uint8."""
    cdef Py_ssize_t size = 1 << n_atoms
    out_arr = np.empty(size, dtype=np.uint8)
    cdef unsigned char[::1] out = out_arr
    cdef Py_ssize_t m
    with nogil:
        for m in range(size):
            out[m] = <unsigned char>_popcount(<unsigned long long>m)
    return out_arr


def collective_apply(amps, int n_atoms, bint raising):
    """Apply (1/sqrt(N)) * sum_i of single-atom flips to a 2^N state vector.

    ``raising=True`` flips one atom g->s per term (bit 0 -> 1), else s->g.
    """
    cdef Py_ssize_t size = 1 << n_atoms
    amps_arr = np.ascontiguousarray(amps, dtype=np.complex128)
    if amps_arr.shape != (size,):
        raise ValueError(f"expected shape ({size},), got {amps_arr.shape}")
    out_arr = np.zeros(size, dtype=np.complex128)
    cdef const double complex[::1] a = amps_arr
    cdef double complex[::1] out = out_arr
    cdef double scale = 1.0 / sqrt(<double>n_atoms)
    cdef Py_ssize_t m, bit
    cdef int i
    with nogil:
        for m in range(size):
            if a[m] == 0:
                continue
            for i in range(n_atoms):
                bit = (<Py_ssize_t>1) << i
                if raising:
                    if not (m & bit):
                        out[m | bit] = out[m | bit] + a[m]
                else:
                    if m & bit:
                        out[m & ~bit] = out[m & ~bit] + a[m]
    for m in range(size):
        out[m] = out[m] * scale
    return out_arr
