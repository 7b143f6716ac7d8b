"""Pure-Python reference kernels.

These are the fallback for :mod:`hyerslab._speedups` and must stay
bit-identical to it: same accumulation order, same integer mixing.
"""
import numpy as np

from .errors import DegreeOverflow

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
DEGREE_LIMIT = 1 << 62
_INV53 = 2.0 ** -53


def _mix(z):
    # splitmix64 finalizer
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31)


def direction_hash(seed, keys):
    """Fold a seed and a sequence of int64 keys into one 64-bit state."""
    h = _mix((seed + GOLDEN) & MASK64)
    for k in keys:
        h = _mix(((h ^ (int(k) & MASK64)) + GOLDEN) & MASK64)
    return h


def unit_uniforms(state, n):
    """``n`` doubles in [-1, 1) from the splitmix64 stream starting at ``state``."""
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        state = (state + GOLDEN) & MASK64
        out[i] = (_mix(state) >> 11) * _INV53 * 2.0 - 1.0
    return out


def poly_mul(da, ca, db, cb, max_terms):
    """Sparse product of two polynomials given as sorted (degree, coeff) arrays.

    Exact zero sums are dropped. Returns ``(degrees, coeffs)`` sorted by degree.
    """
    if len(da) == 0 or len(db) == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.complex128)
    if int(da[-1]) + int(db[-1]) >= DEGREE_LIMIT:
        raise DegreeOverflow("product degree exceeds int64 range")
    acc = {}
    la, lb = da.tolist(), db.tolist()
    xa, xb = ca.tolist(), cb.tolist()
    for i in range(len(la)):
        ar, ai = xa[i].real, xa[i].imag
        for j in range(len(lb)):
            br, bi = xb[j].real, xb[j].imag
            prod = complex(ar * br - ai * bi, ar * bi + ai * br)
            d = la[i] + lb[j]
            acc[d] = acc.get(d, 0j) + prod
    keys = sorted(d for d, v in acc.items() if v != 0)
    if len(keys) > max_terms:
        raise DegreeOverflow(f"product has {len(keys)} terms, cap is {max_terms}")
    return (np.array(keys, dtype=np.int64),
            np.array([acc[d] for d in keys], dtype=np.complex128))
