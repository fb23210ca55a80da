"""Pure NumPy Sobol kernel, bit-identical to the compiled one.

The compiled kernel walks the Gray-code recurrence point by point; here the
same XOR combination is assembled column-wise: point n is the XOR of the
direction integers selected by the set bits of gray(n).
"""

import numpy as np

_INV52 = 1.0 / 4503599627370496.0  # 2^-52
_NBITS = 52


def sobol_fill(directions: np.ndarray, shift: np.ndarray, n0: int,
               out: np.ndarray) -> None:
    n, d = out.shape
    idx = np.uint64(n0) + np.arange(n, dtype=np.uint64)
    gray = idx ^ (idx >> np.uint64(1))
    acc = np.zeros((n, d), dtype=np.uint64)
    for b in range(_NBITS):
        sel = (gray >> np.uint64(b)) & np.uint64(1)
        if sel.any():
            acc[sel.astype(bool)] ^= directions[:, b]
    out[:] = (acc ^ shift) * _INV52
