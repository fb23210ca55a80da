# cython: boundscheck=False, wraparound=False, cdivision=True
"""Sequential Gray-code generation of 52-bit Sobol points."""

import numpy as np

cimport numpy as cnp

cdef double _INV52 = 1.0 / 4503599627370496.0  # 2^-52
cdef int _NBITS = 52


def sobol_fill(cnp.uint64_t[:, ::1] directions, cnp.uint64_t[::1] shift,
               unsigned long long n0, cnp.float64_t[:, ::1] out):
    """Fill out[i, j] with shifted Sobol coordinates for point indices n0 .. n0+n-1.

    directions holds one row per coordinate with the 52 direction integers
    already aligned to the top bits; shift is XORed in before scaling.
    """
    cdef Py_ssize_t n = out.shape[0]
    cdef Py_ssize_t d = out.shape[1]
    cdef Py_ssize_t i, j
    cdef int b
    cdef unsigned long long g, idx
    cdef cnp.uint64_t[::1] state = np.zeros(d, dtype=np.uint64)

    # seed the recurrence at an arbitrary start index via its Gray code
    g = n0 ^ (n0 >> 1)
    for b in range(_NBITS):
        if (g >> b) & 1ULL:
            for j in range(d):
                state[j] ^= directions[j, b]
    for i in range(n):
        for j in range(d):
            out[i, j] = <double>(state[j] ^ shift[j]) * _INV52
        idx = n0 + i + 1
        b = 0
        while (idx & 1ULL) == 0:
            idx >>= 1
            b += 1
        if b < _NBITS:
            for j in range(d):
                state[j] ^= directions[j, b]
