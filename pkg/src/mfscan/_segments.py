"""Per-offset reductions over the flat factor arena.

A factor table stores all (prime, exponent) pairs of a window in two flat
arrays, with ``offsets[i]:offsets[i+1]`` delimiting the span of entry i.
``np.ufunc.reduceat`` almost does what we want, except that it returns
``values[idx]`` for empty segments and rejects ``idx == len(values)``;
the helpers below paper over both quirks.
"""

import numpy as np


def _reduceat(ufunc, values, offsets, identity, dtype=None):
    n_seg = offsets.size - 1
    out_dtype = dtype if dtype is not None else values.dtype
    if values.size == 0:
        return np.full(n_seg, identity, dtype=out_dtype)
    starts = offsets[:-1]
    empty = starts == offsets[1:]
    safe = np.where(starts < values.size, starts, 0)
    out = ufunc.reduceat(values, safe)
    if dtype is not None:
        out = out.astype(dtype)
    if empty.any():
        out[empty] = identity
    return out


def segment_product(values: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    return _reduceat(np.multiply, values, offsets, 1)


def segment_sum(values: np.ndarray, offsets: np.ndarray, dtype=None) -> np.ndarray:
    return _reduceat(np.add, values, offsets, 0, dtype=dtype)


def segment_any(flags: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    return _reduceat(np.logical_or, flags, offsets, False)


def segment_max(values: np.ndarray, offsets: np.ndarray, empty_value) -> np.ndarray:
    return _reduceat(np.maximum, values, offsets, empty_value)
