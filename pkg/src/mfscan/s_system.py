"""Interval systems and S-set membership.

An interval system is an increasing, disjoint sequence of prime ranges
[P_j, Q_j] held in natural-log space: the canonical multi-interval
choice grows so fast (P_2 already exceeds exp(10^4) for realistic first
intervals) that only logarithms fit in machine floats.  Comparisons
against concrete primes drop out of log space via log p.

The S-set attached to a bound X is the set of integers in [X, 2X]
carrying at least one prime factor in every interval j <= J, where J is
the largest index with log Q_j <= sqrt(log X).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ._segments import segment_any
from .errors import CapacityError
from .sieve import FactorEntry, FactorTable, Window, sieve_factorize

MAX_SUBSET_J = 20
MAX_CANONICAL_COUNT = 60


@dataclass(frozen=True)
class IntervalSystem:
    """Sequence of (log P_j, log Q_j) pairs with a density parameter eta."""

    eta: float
    intervals: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        if not 0.0 < self.eta < 1.0 / 6.0:
            raise ValueError(f"eta must lie in (0, 1/6), got {self.eta}")
        if not self.intervals:
            raise ValueError("interval system needs at least one interval")
        prev_q = None
        for j, (lp, lq) in enumerate(self.intervals, start=1):
            if not lp < lq:
                raise ValueError(f"interval {j}: need log P < log Q, got {lp} >= {lq}")
            if prev_q is not None and not prev_q < lp:
                raise ValueError(
                    f"interval {j} overlaps or precedes interval {j - 1}"
                )
            prev_q = lq

    @property
    def count(self) -> int:
        return len(self.intervals)

    def log_p(self, j: int) -> float:
        """log P_j, 1-indexed."""
        return self.intervals[j - 1][0]

    def log_q(self, j: int) -> float:
        """log Q_j, 1-indexed."""
        return self.intervals[j - 1][1]


@dataclass(frozen=True)
class Violation:
    """One failed spacing condition: j, condition id, and both sides."""

    j: int
    condition: str
    lhs: float
    rhs: float


def canonical_system(
    eta: float, log_p1: float, log_q1: float, count: int
) -> IntervalSystem:
    """The standard fast-growing choice of intervals.

    Interval 1 is (log_p1, log_q1); for j >= 2,
    log P_j = j^(4j) (log Q_1)^(j-1) log P_1 and
    log Q_j = j^(4j+2) (log Q_1)^j.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if count > MAX_CANONICAL_COUNT:
        raise CapacityError(
            f"j^(4j) overflows float range for count > {MAX_CANONICAL_COUNT}"
        )
    if not 0 < log_p1 <= log_q1:
        raise ValueError(f"need 0 < log_p1 <= log_q1, got {log_p1}, {log_q1}")
    intervals: List[Tuple[float, float]] = [(log_p1, log_q1)]
    for j in range(2, count + 1):
        lp = float(j) ** (4 * j) * log_q1 ** (j - 1) * log_p1
        lq = float(j) ** (4 * j + 2) * log_q1**j
        if not (math.isfinite(lp) and math.isfinite(lq)):
            raise CapacityError(f"canonical interval {j} overflows float range")
        intervals.append((lp, lq))
    return IntervalSystem(eta, tuple(intervals))


def validate(system: IntervalSystem) -> List[Violation]:
    """Evaluate both spacing conditions for every j >= 2.

    Condition ``not_too_far``:  loglog Q_j / (log P_{j-1} - 1) <= eta / (4 j^2).
    Condition ``not_too_close``: (eta / j^2) log P_j >= 8 log Q_{j-1} + 16 log j.
    Equality satisfies either condition; a single-interval system is
    vacuously valid.  Violations are data, not errors.
    """
    out: List[Violation] = []
    eta = system.eta
    for j in range(2, system.count + 1):
        lq_j = system.log_q(j)
        lp_j = system.log_p(j)
        lp_prev = system.log_p(j - 1)
        lq_prev = system.log_q(j - 1)

        denom = lp_prev - 1.0
        lhs_far = math.log(lq_j) / denom if denom > 0 else math.inf
        rhs_far = eta / (4.0 * j * j)
        if not lhs_far <= rhs_far:
            out.append(Violation(j, "not_too_far", lhs_far, rhs_far))

        lhs_close = (eta / (j * j)) * lp_j
        rhs_close = 8.0 * lq_prev + 16.0 * math.log(j)
        if not lhs_close >= rhs_close:
            out.append(Violation(j, "not_too_close", lhs_close, rhs_close))
    return out


def bind_to_x(
    system: IntervalSystem, x: Optional[float] = None, log_x: Optional[float] = None
) -> int:
    """Largest J with log Q_J <= sqrt(log X); 0 means no usable interval.

    Pass ``log_x`` directly when X itself overflows floats (canonical
    systems need log X beyond (log Q_1)^2, far past any machine number).
    """
    if log_x is None:
        if x is None:
            raise ValueError("bind_to_x needs either x or log_x")
        if x < 16:
            raise ValueError(f"bind_to_x requires X >= 16, got {x}")
        log_x = math.log(x)
    elif log_x < math.log(16):
        raise ValueError(f"bind_to_x requires log X >= log 16, got {log_x}")
    budget = math.sqrt(log_x)
    j = 0
    while j < system.count and system.log_q(j + 1) <= budget:
        j += 1
    return j


def membership(entry: FactorEntry, system: IntervalSystem, j_max: int) -> bool:
    """True iff the integer has a prime factor in every interval j <= j_max."""
    if j_max > system.count:
        raise ValueError(f"J={j_max} exceeds system length {system.count}")
    for j in range(1, j_max + 1):
        lp, lq = system.intervals[j - 1]
        if not any(lp <= math.log(p) <= lq for p, _ in entry):
            return False
    return True


def member_mask(table: FactorTable, system: IntervalSystem, j_max: int) -> np.ndarray:
    """Vectorized membership over a factor table."""
    if j_max > system.count:
        raise ValueError(f"J={j_max} exceeds system length {system.count}")
    mask = np.ones(table.size, dtype=bool)
    if j_max == 0:
        return mask
    log_primes = np.log(table.primes.astype(np.float64))
    for j in range(1, j_max + 1):
        lp, lq = system.intervals[j - 1]
        in_interval = (log_primes >= lp) & (log_primes <= lq)
        mask &= segment_any(in_interval, table.offsets)
    return mask


def nonmember_density_bound(system: IntervalSystem, j_max: int) -> float:
    """Sieve heuristic for the upper density of [X, 2X] \\ S: sum of log P_j / log Q_j."""
    if j_max < 1:
        raise ValueError(f"density bound needs J >= 1, got {j_max}")
    if j_max > system.count:
        raise ValueError(f"J={j_max} exceeds system length {system.count}")
    return sum(
        system.log_p(j) / system.log_q(j) for j in range(1, j_max + 1)
    )


def inclusion_exclusion_check(
    coefficients: Sequence,
    n_start: int,
    system: IntervalSystem,
    j_max: int,
):
    """Both sides of the subset-sum identity for restriction to S.

    The left side sums coefficients over members of S directly; the
    right side runs the alternating sum over subsets of {1..J} of the
    coefficient totals over integers with no prime factor in the chosen
    intervals.  Integer coefficient arrays are summed in exact integer
    arithmetic, so the difference must be exactly zero there.
    """
    if j_max > MAX_SUBSET_J:
        raise CapacityError(f"subset enumeration capped at J <= {MAX_SUBSET_J}")
    if j_max > system.count:
        raise ValueError(f"J={j_max} exceeds system length {system.count}")
    a = np.asarray(coefficients)
    exact = np.issubdtype(a.dtype, np.integer)
    table = sieve_factorize(Window(n_start, len(a)))
    log_primes = np.log(table.primes.astype(np.float64))
    has_factor = []
    for j in range(1, j_max + 1):
        lp, lq = system.intervals[j - 1]
        in_interval = (log_primes >= lp) & (log_primes <= lq)
        has_factor.append(segment_any(in_interval, table.offsets))

    def total(mask):
        picked = a[mask]
        if exact:
            return int(np.sum(picked, dtype=np.int64))
        return float(np.sum(picked))

    member = np.ones(table.size, dtype=bool)
    for flags in has_factor:
        member &= flags
    lhs = total(member)

    rhs = 0
    for subset in range(1 << j_max):
        avoid = np.ones(table.size, dtype=bool)
        sign = 1
        for j in range(j_max):
            if subset >> j & 1:
                avoid &= ~has_factor[j]
                sign = -sign
        rhs += sign * total(avoid)
    return lhs, rhs, abs(lhs - rhs)


def parse_system(text: str) -> IntervalSystem:
    """Parse the CLI system grammar.

    ``auto:eta,logP1,logQ1,count`` builds the canonical system;
    ``explicit:P1-Q1[,P2-Q2,...]`` takes integer bounds (converted to
    logs) with eta fixed at 0.1 for explicit systems.
    """
    text = text.strip()
    if text.startswith("auto:"):
        body = text[len("auto:") :]
        parts = body.split(",")
        if len(parts) != 4:
            raise ValueError(f"auto system needs eta,logP1,logQ1,count, got {body!r}")
        eta, lp1, lq1 = (float(p) for p in parts[:3])
        return canonical_system(eta, lp1, lq1, int(parts[3]))
    if text.startswith("explicit:"):
        body = text[len("explicit:") :]
        intervals = []
        for token in body.split(","):
            bounds = token.split("-")
            if len(bounds) != 2:
                raise ValueError(f"bad interval token {token!r} (want P-Q)")
            p, q = int(bounds[0]), int(bounds[1])
            if p < 2:
                raise ValueError(f"interval lower bound {p} must be >= 2")
            intervals.append((math.log(p), math.log(q)))
        return IntervalSystem(0.1, tuple(intervals))
    raise ValueError(f"unknown system spec token {text!r}")
