"""Arena-free window evaluation for the built-in function kinds.

The generic route (factor table, per-pair values, segment products) is
exact but allocates and fills the whole pair arena.  For the built-ins
the same values come straight out of power-level slicing: stepping
through multiples of p, p^2, p^3, ... touches every integer v_p(n)
times, which is all the Moebius/Liouville/smoothness logic needs, and a
running residual (divided once per power level) identifies the lone
prime factor above sqrt(end).  Results are bit-identical to the generic
route; tests enforce that.
"""

from __future__ import annotations

from math import isqrt, log

import numpy as np

from .sieve import _hitting_primes, primes_up_to

_FAST_KINDS = ("one", "liouville", "moebius", "abs_moebius", "smooth", "neg_primes")


def _power_slices(p: int, start: int, end: int):
    """(first-offset, step) for multiples of p, p^2, ... inside the window.

    Levels are consecutive: multiples of p^(k+1) are a subset of the
    multiples of p^k, so the first empty level ends the walk.
    """
    length = end - start
    step = p
    while True:
        first = (-start) % step
        if first >= length:
            return
        yield first, step
        if step > (end - 1) // p:
            return
        step *= p


def fast_window_values(spec, start: int, length: int, system=None, j_max: int = 0):
    """Values of a built-in spec over [start, start+length), or None.

    Table specs return None and the caller falls back to the
    factor-table route.  With j_max >= 1 the result is zeroed outside
    the S-set of ``system``.
    """
    kind = spec.kind
    if kind not in _FAST_KINDS:
        return None
    end = start + length
    restricted = system is not None and j_max >= 1
    root = isqrt(end - 1)
    vals = np.ones(length)

    # Everything except plain 'one' / 'neg_primes' needs the residual to
    # see the prime factor above sqrt(end); membership always does.
    need_division = restricted or kind in ("liouville", "moebius", "abs_moebius", "smooth")

    if not need_division:
        if kind == "neg_primes":
            for p in spec.neg_set:
                if p < end:
                    for first, step in _power_slices(p, start, end):
                        vals[first::step] *= -1.0
        return vals

    smooth_y = spec.y if kind == "smooth" else None
    divide_bound = root if restricted or kind != "smooth" else min(root, smooth_y)
    zero_mask = np.zeros(length, dtype=bool) if kind in ("moebius", "abs_moebius") else None
    if restricted:
        bounds = [system.intervals[j] for j in range(j_max)]
        interval_flags = [np.zeros(length, dtype=bool) for _ in range(j_max)]

    res = np.arange(start, end, dtype=np.uint64)
    if root >= 2:
        for p, _ in _hitting_primes(primes_up_to(root), start, length):
            divide = p <= divide_bound
            flip_all = kind == "liouville" or (
                kind == "neg_primes" and p in spec.neg_set
            )
            kill = kind == "smooth" and p > smooth_y
            if divide or flip_all:
                max_level = None  # every level
            elif zero_mask is not None:
                max_level = 1
            elif kill or restricted or kind == "moebius":
                max_level = 0
            else:
                continue
            for level, (first, step) in enumerate(_power_slices(p, start, end)):
                if max_level is not None and level > max_level:
                    break
                if divide:
                    res[first::step] //= p
                if flip_all:
                    vals[first::step] *= -1.0
                if level == 0:
                    if kind == "moebius":
                        vals[first::step] *= -1.0
                    if kill:
                        vals[first::step] = 0.0
                    if restricted:
                        lp = log(p)
                        for j in range(j_max):
                            lo, hi = bounds[j]
                            if lo <= lp <= hi:
                                interval_flags[j][first::step] = True
                elif level == 1 and zero_mask is not None:
                    zero_mask[first::step] = True

    big = res > 1
    if kind in ("liouville", "moebius"):
        vals[big] *= -1.0
    elif kind == "smooth":
        vals[res > np.uint64(smooth_y)] = 0.0
    elif kind == "neg_primes":
        tail = [p for p in spec.neg_set if p > root]
        if tail:
            vals[np.isin(res, np.asarray(tail, dtype=np.uint64))] *= -1.0

    if zero_mask is not None:
        vals[zero_mask] = 0.0

    if restricted:
        member = np.ones(length, dtype=bool)
        log_res = np.log(res.astype(np.float64))
        for j in range(j_max):
            lo, hi = bounds[j]
            flags = interval_flags[j]
            flags |= big & (log_res >= lo) & (log_res <= hi)
            member &= flags
        vals = np.where(member, vals, 0.0)
    return vals
