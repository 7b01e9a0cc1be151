"""Desk-scale empirical scans: short-vs-long discrepancies, bilinear
averages, shift correlations, sign changes, and smooth counts in short
intervals.

Sampling is seeded and deterministic (SplitMix64, documented in
``rng``); samples are independent work items and all reductions merge
in a fixed order, so reports are byte-identical for any worker count.
Intervals are inclusive on both ends ([x, x+h] holds h+1 integers)
while averages divide by h; the resulting O(1/h) mismatch against an
exact mean is accepted and documented.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import fsum, isqrt
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ._parallel import map_ordered
from ._segments import segment_max
from .dickman import DickmanTable, default_table, rho, smooth_interval_constant
from .errors import CapacityError, UsageError
from .mfunc import MultiplicativeFunctionSpec, window_values
from .rng import SplitMix64
from .s_system import IntervalSystem
from .sieve import WINDOW_CAPACITY, Window, sieve_factorize

ZERO_EPS = 1.0e-12
PAPER_C_PRIME = 20000.0
DEFAULT_USER_THRESHOLDS = (0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0)
_CHUNK = 1 << 22
_SMOOTH_SQRT_WINDOW_CAP = 10**9

Restriction = Optional[Tuple[IntervalSystem, int]]


# ---------------------------------------------------------------------------
# Prefix-sum sweep engine


def _prefix_at_points(
    spec: MultiplicativeFunctionSpec,
    lo: int,
    hi: int,
    points: Sequence[int],
    restrict: Restriction = None,
    threads: int = 1,
) -> Dict[int, float]:
    """P(t) = sum of f(n) over lo <= n < t for each requested t.

    One chunked sweep of [lo, hi); chunk results merge in chunk order,
    so values do not depend on the worker count.
    """
    points = sorted(set(points))
    if points and (points[0] < lo or points[-1] > hi):
        raise ValueError("prefix points must lie within [lo, hi]")
    chunks = [(c, min(c + _CHUNK, hi)) for c in range(lo, hi, _CHUNK)]

    def sweep(bounds):
        c0, c1 = bounds
        values = window_values(spec, c0, c1 - c0, restrict)
        local = np.cumsum(values)
        wanted = [t for t in points if c0 < t <= c1]
        return float(local[-1]) if values.size else 0.0, [
            (t, float(local[t - c0 - 1])) for t in wanted
        ]

    results = map_ordered(sweep, chunks, threads)
    out: Dict[int, float] = {t: 0.0 for t in points}
    running = 0.0
    for total, locals_ in results:
        for t, val in locals_:
            out[t] = running + val
        running += total
    return out


# ---------------------------------------------------------------------------
# Theorem-1-style discrepancy scan


@dataclass(frozen=True)
class DiscrepancyRecord:
    x: int
    short_avg: float
    long_avg: float
    diff: float


@dataclass(frozen=True)
class ScanParams:
    function: str
    X: int
    h: int
    delta: float
    samples: int
    seed: int
    system: Optional[IntervalSystem] = None
    J: Optional[int] = None


@dataclass(frozen=True)
class ScanReport:
    params: ScanParams
    long_avg: float
    records: Tuple[DiscrepancyRecord, ...]
    paper_threshold: float
    vacuous_at_desk_scale: bool
    exceptional_count: int
    exceptional_counts_user: Dict[float, int] = field(hash=False)
    paper_exceptional_bound: float = 0.0
    mean_square_discrepancy: Optional[float] = None


def paper_threshold(delta: float, h: int) -> float:
    """delta + 20000 loglog h / log h, the headline discrepancy bound."""
    return delta + PAPER_C_PRIME * math.log(math.log(h)) / math.log(h)


def paper_exceptional_bound(X: int, h: int, delta: float) -> float:
    """Shape of the exceptional-set bound with implied constant C = 1."""
    log_h = math.log(h)
    log_x = math.log(X)
    return X * (
        log_h ** (1.0 / 3.0) / (delta**2 * h ** (delta / 25.0))
        + 1.0 / (delta**2 * log_x ** (1.0 / 50.0))
    )


def scan_short(
    spec: MultiplicativeFunctionSpec,
    X: int,
    h: int,
    delta: float,
    samples: int,
    seed: int,
    restrict: Restriction = None,
    user_thresholds: Sequence[float] = DEFAULT_USER_THRESHOLDS,
    threads: int = 1,
) -> ScanReport:
    """Sample short averages over [x, x+h] against the long average.

    x is drawn uniformly from [X, 2X-h] by the seeded generator.  With a
    restriction both averages run over the S-set only and the report
    additionally carries the Monte-Carlo mean-square discrepancy.
    """
    if not 2 <= h <= X:
        raise UsageError(f"scan_short requires 2 <= h <= X, got h={h}, X={X}")
    if samples < 1:
        raise UsageError(f"samples must be >= 1, got {samples}")
    if delta <= 0:
        raise UsageError(f"delta must be positive, got {delta}")
    if 2 * X + 1 > WINDOW_CAPACITY:
        raise CapacityError(f"scan range end {2 * X} exceeds capacity")
    rng = SplitMix64(seed)
    xs = [rng.uniform_int(X, 2 * X - h) for _ in range(samples)]

    points: List[int] = [X, 2 * X + 1]
    for x in xs:
        points.append(x)
        points.append(x + h + 1)
    prefix = _prefix_at_points(spec, X, 2 * X + 1, points, restrict, threads)
    long_avg = (prefix[2 * X + 1] - prefix[X]) / X

    records = []
    for x in xs:
        short_avg = (prefix[x + h + 1] - prefix[x]) / h
        records.append(
            DiscrepancyRecord(x, short_avg, long_avg, abs(short_avg - long_avg))
        )

    threshold = paper_threshold(delta, h)
    exceptional = sum(1 for r in records if r.diff > threshold)
    user_counts = {
        float(t): sum(1 for r in records if r.diff > t) for t in user_thresholds
    }
    msd = None
    if restrict is not None:
        msd = fsum(r.diff * r.diff for r in records) / samples
    system, j_max = restrict if restrict is not None else (None, None)
    return ScanReport(
        params=ScanParams(spec.label(), X, h, delta, samples, seed, system, j_max),
        long_avg=long_avg,
        records=tuple(records),
        paper_threshold=threshold,
        vacuous_at_desk_scale=threshold >= 2.0,
        exceptional_count=exceptional,
        exceptional_counts_user=user_counts,
        paper_exceptional_bound=paper_exceptional_bound(X, h, delta),
        mean_square_discrepancy=msd,
    )


# ---------------------------------------------------------------------------
# Bilinear square-root-interval scan


@dataclass(frozen=True)
class BilinearResult:
    lhs: float
    rhs: float
    diff: float


def scan_bilinear(
    spec: MultiplicativeFunctionSpec,
    x: int,
    h: int,
    restrict: Restriction = None,
) -> BilinearResult:
    """Bilinear average over x <= n1 n2 <= x + h sqrt(x) versus the squared mean.

    The pair region's upper edge is integerized as x + isqrt(h^2 x)
    (= x + floor(h sqrt(x))), so both this scan and any brute-force
    reimplementation count exactly the same lattice pairs.
    """
    if h < 10:
        raise UsageError(f"scan_bilinear requires h >= 10, got {h}")
    if h > x:
        raise UsageError(f"scan_bilinear requires h <= x, got h={h}, x={x}")
    if x > 10**12:
        raise CapacityError(f"scan_bilinear capped at x <= 10^12, got {x}")
    n1_lo = isqrt(x - 1) + 1  # ceil(sqrt(x))
    n1_hi = isqrt(4 * x)  # floor(2 sqrt(x))
    upper = x + isqrt(h * h * x)

    f1 = window_values(spec, n1_lo, n1_hi - n1_lo + 1, restrict)

    n2_lo = x // n1_hi  # lower edge of the union of n2 windows (floor is safe)
    n2_hi = upper // n1_lo
    f2 = window_values(spec, n2_lo, n2_hi - n2_lo + 1, restrict)
    prefix = np.concatenate(([0.0], np.cumsum(f2)))

    n1 = np.arange(n1_lo, n1_hi + 1, dtype=np.int64)
    lo2 = -(-x // n1)  # ceil(x / n1)
    hi2 = upper // n1
    lo_idx = np.clip(lo2 - n2_lo, 0, f2.size)
    hi_idx = np.clip(hi2 - n2_lo + 1, 0, f2.size)
    seg = prefix[np.maximum(hi_idx, lo_idx)] - prefix[lo_idx]
    pair_sum = float(np.dot(f1, seg))

    sqrt_x = math.sqrt(x)
    lhs = pair_sum / (h * sqrt_x * math.log(2.0))
    rhs_avg = float(f1.sum()) / sqrt_x
    rhs = rhs_avg * rhs_avg
    return BilinearResult(lhs, rhs, abs(lhs - rhs))


# ---------------------------------------------------------------------------
# Shift correlations and sign changes


def correlation(
    spec: MultiplicativeFunctionSpec,
    h: int,
    X: int,
    threads: int = 1,
) -> float:
    """(1/X) sum over n <= X of f(n) f(n+h), signed."""
    if h < 1:
        raise UsageError(f"correlation requires h >= 1, got {h}")
    if X < h:
        raise UsageError(f"correlation requires X >= h, got X={X}, h={h}")
    if X + h + 1 > WINDOW_CAPACITY:
        raise CapacityError(f"correlation range end {X + h} exceeds capacity")
    chunks = [(c, min(_CHUNK, X + 1 - c)) for c in range(1, X + 1, _CHUNK)]

    def chunk_sum(args):
        start, length = args
        values = window_values(spec, start, length + h)
        return float(np.dot(values[:length], values[h : h + length]))

    return fsum(map_ordered(chunk_sum, chunks, threads)) / X


class SignChangeCount:
    """Count of adjacent opposite-sign pairs in the zero-skipped sequence."""

    __slots__ = ("count", "nonzero")

    def __init__(self, count: int, nonzero: int):
        self.count = count
        self.nonzero = nonzero

    def __iter__(self):
        return iter((self.count, self.nonzero))

    def __repr__(self):
        return f"SignChangeCount(count={self.count}, nonzero={self.nonzero})"


def sign_changes(
    spec: MultiplicativeFunctionSpec, X: int, threads: int = 1
) -> SignChangeCount:
    """Sign changes of the zero-skipped sequence f(1..X), plus its length.

    Values with |f(n)| < 1e-12 count as zero and are skipped.
    """
    if X < 2:
        raise UsageError(f"sign_changes requires X >= 2, got {X}")
    chunks = [(c, min(_CHUNK, X + 1 - c)) for c in range(1, X + 1, _CHUNK)]

    def summarize(args):
        start, length = args
        values = window_values(spec, start, length)
        nz = values[np.abs(values) >= ZERO_EPS]
        if nz.size == 0:
            return 0, 0, None, None
        signs = np.sign(nz)
        internal = int(np.count_nonzero(signs[1:] != signs[:-1]))
        return internal, int(nz.size), float(signs[0]), float(signs[-1])

    count = 0
    nonzero = 0
    last_sign = None
    for internal, nz, first, last in map_ordered(summarize, chunks, threads):
        count += internal
        nonzero += nz
        if first is not None:
            if last_sign is not None and first != last_sign:
                count += 1
            last_sign = last
    return SignChangeCount(count, nonzero)


def lucht_tuttas_density(negative_primes: Sequence[int]) -> float:
    """Limiting sign-change density for completely multiplicative f that is
    negative exactly on a finite prime set: 1/2 - 1/2 prod (1 - 4/(p+1))."""
    entries = sorted(set(int(p) for p in negative_primes))
    if not entries:
        raise ValueError("lucht_tuttas_density needs a nonempty prime set")
    product = 1.0
    for p in entries:
        if p < 2 or any(p % d == 0 for d in range(2, isqrt(p) + 1)):
            raise ValueError(f"lucht_tuttas_density entry {p} is not prime")
        product *= 1.0 - 4.0 / (p + 1.0)
    return 0.5 - 0.5 * product


def _has_sign_change(values: np.ndarray) -> bool:
    nz = values[np.abs(values) >= ZERO_EPS]
    if nz.size < 2:
        return False
    signs = np.sign(nz)
    return bool(np.any(signs[1:] != signs[:-1]))


@dataclass(frozen=True)
class IntervalSignScan:
    fraction: float
    hits: int
    samples: int
    xs: Tuple[int, ...]


def sign_change_in_intervals(
    spec: MultiplicativeFunctionSpec,
    X: int,
    psi: int,
    samples: int,
    seed: int,
    threads: int = 1,
) -> IntervalSignScan:
    """Fraction of sampled x in [X, 2X] whose [x, x+psi] contains a sign change."""
    if psi < 2:
        raise UsageError(f"psi must be >= 2, got {psi}")
    if samples < 1:
        raise UsageError(f"samples must be >= 1, got {samples}")
    rng = SplitMix64(seed)
    xs = [rng.uniform_int(X, 2 * X) for _ in range(samples)]

    def probe(x):
        return _has_sign_change(window_values(spec, x, psi + 1))

    hits = sum(map_ordered(probe, xs, threads))
    return IntervalSignScan(hits / samples, hits, samples, tuple(xs))


def sqrt_interval_sign_change(
    spec: MultiplicativeFunctionSpec, x: int, C: float
) -> bool:
    """True iff [x, x + C sqrt(x)] contains a sign change of f.

    Only meaningful (and only allowed) for completely multiplicative
    specs, matching the square-root-interval sign-change statement.
    """
    if not spec.completely_multiplicative:
        raise UsageError("sqrt_interval_sign_change needs a completely multiplicative spec")
    if C <= 0:
        raise UsageError(f"C must be positive, got {C}")
    length = int(C * math.sqrt(x)) + 1
    return _has_sign_change(window_values(spec, x, length))


# ---------------------------------------------------------------------------
# Smooth numbers in short intervals


@dataclass(frozen=True)
class SmoothIntervalScan:
    u: float
    X: int
    psi: int
    samples: int
    seed: int
    xs: Tuple[int, ...]
    counts: Tuple[int, ...]
    expected: float  # rho(u) * psi
    mean_count: float
    ratio: float


def smooth_in_intervals(
    u: float,
    X: int,
    psi: int,
    samples: int,
    seed: int,
    table: Optional[DickmanTable] = None,
    threads: int = 1,
) -> SmoothIntervalScan:
    """Counts of x^(1/u)-smooth integers in sampled intervals [x, x+psi]."""
    if u < 1:
        raise UsageError(f"u must be >= 1, got {u}")
    if psi < 10:
        raise UsageError(f"psi must be >= 10, got {psi}")
    if samples < 1:
        raise UsageError(f"samples must be >= 1, got {samples}")
    rng = SplitMix64(seed)
    xs = [rng.uniform_int(X, 2 * X) for _ in range(samples)]

    def count_window(x):
        ftab = sieve_factorize(Window(x, psi + 1))
        largest = segment_max(ftab.primes, ftab.offsets, np.uint64(1))
        return int(np.count_nonzero(largest.astype(np.float64) <= x ** (1.0 / u)))

    counts = map_ordered(count_window, xs, threads)
    expected = rho(u, table) * psi
    mean_count = fsum(counts) / samples
    return SmoothIntervalScan(
        u,
        X,
        psi,
        samples,
        seed,
        tuple(xs),
        tuple(counts),
        expected,
        mean_count,
        mean_count / expected,
    )


@dataclass(frozen=True)
class SqrtSmoothResult:
    eps: float
    X: int
    constant: float  # rho(1/eps)^(-13)
    window_length: int
    truncated: bool
    count: int
    threshold: float  # sqrt(X) (log X)^(-4)


def smooth_in_sqrt_interval(
    eps: float,
    X: int,
    table: Optional[DickmanTable] = None,
) -> SqrtSmoothResult:
    """Exact count of X^eps-smooth integers in [X, X + C(eps) sqrt(X)].

    C(eps) = rho(1/eps)^(-13).  When C(eps) sqrt(X) exceeds the 10^9
    window capacity the window is truncated and flagged rather than
    failing.  Smoothness is the literal bound p <= X^eps, so at eps = 1
    primes inside the window itself are not counted.
    """
    if X < 2:
        raise UsageError(f"X must be >= 2, got {X}")
    constant = smooth_interval_constant(eps, table)
    ideal = math.inf if math.isinf(constant) else constant * math.sqrt(X)
    truncated = not (ideal + 1 <= _SMOOTH_SQRT_WINDOW_CAP)
    length = _SMOOTH_SQRT_WINDOW_CAP if truncated else int(ideal) + 1
    ftab = sieve_factorize(Window(X, length))
    largest = segment_max(ftab.primes, ftab.offsets, np.uint64(1))
    count = int(np.count_nonzero(largest.astype(np.float64) <= float(X) ** eps))
    threshold = math.sqrt(X) * math.log(X) ** -4.0
    return SqrtSmoothResult(eps, X, constant, length, truncated, count, threshold)


# ---------------------------------------------------------------------------
# Lipschitz-scale comparison


@dataclass(frozen=True)
class MediumVsLong:
    X: int
    y: int
    samples: int
    seed: int
    max_diff: float
    mean_diff: float
    long_avg: float


def medium_vs_long(
    spec: MultiplicativeFunctionSpec,
    X: int,
    samples: int,
    seed: int,
    threads: int = 1,
) -> MediumVsLong:
    """Averages over [x, x + X/(log X)^(1/5)] versus the long average.

    The constants in the underlying Lipschitz-type bound are not
    specified, so this measures (max and mean absolute difference) and
    asserts nothing.
    """
    if X < 10**4:
        raise UsageError(f"medium_vs_long requires X >= 10^4, got {X}")
    if samples < 1:
        raise UsageError(f"samples must be >= 1, got {samples}")
    y = math.ceil(X / math.log(X) ** 0.2)
    rng = SplitMix64(seed)
    xs = [rng.uniform_int(X, 2 * X) for _ in range(samples)]
    hi = 2 * X + y + 1
    points: List[int] = [X, 2 * X + 1]
    for x in xs:
        points.extend((x, x + y + 1))
    prefix = _prefix_at_points(spec, X, hi, points, None, threads)
    long_avg = (prefix[2 * X + 1] - prefix[X]) / X
    diffs = [
        abs((prefix[x + y + 1] - prefix[x]) / y - long_avg) for x in xs
    ]
    return MediumVsLong(
        X, y, samples, seed, max(diffs), fsum(diffs) / samples, long_avg
    )
