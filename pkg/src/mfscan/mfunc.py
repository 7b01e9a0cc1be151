"""Multiplicative functions f: N -> [-1, 1] defined on prime powers.

A spec assigns a value in [-1, 1] to every prime power; evaluation at n
multiplies the values over the prime powers of n's factorization, so
multiplicativity is structural.  Built-ins cover the unit function, the
Moebius and Liouville functions, |mu|, smooth indicators, and the
completely multiplicative functions that are -1 exactly on a finite set
of primes.  Explicit prime-power tables round out user experiments;
unspecified prime powers in a table default to +1 so partial tables stay
total functions (watch out for that default when modelling sparse data).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import isqrt
from typing import Mapping, Optional, Sequence, Tuple

import numpy as np

from ._segments import segment_product
from .errors import CapacityError
from .sieve import FactorEntry, FactorTable, WINDOW_CAPACITY, Window, sieve_factorize

_CHUNK = 1 << 22


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    for d in range(2, isqrt(n) + 1):
        if n % d == 0:
            return False
    return True


@dataclass(frozen=True)
class MultiplicativeFunctionSpec:
    """Rule assigning a value in [-1, 1] to every prime power.

    ``kind`` is one of ``one``, ``moebius``, ``liouville``,
    ``abs_moebius``, ``smooth`` (with bound ``y``), ``neg_primes`` (with
    prime set ``neg_set``) or ``table`` (with ``table`` mapping
    ``(p, e)`` to a value, default +1).  Use the module-level factory
    functions rather than constructing directly.
    """

    kind: str
    completely_multiplicative: bool
    y: int = 0
    neg_set: Tuple[int, ...] = ()
    table: Optional[Mapping[Tuple[int, int], float]] = field(default=None, hash=False)

    def label(self) -> str:
        """Spec in the CLI grammar (table specs get a generic tag)."""
        if self.kind == "smooth":
            return f"smooth:{self.y}"
        if self.kind == "neg_primes":
            return "negp:" + ",".join(str(p) for p in self.neg_set)
        if self.kind == "table":
            return f"table:{len(self.table)}"
        return self.kind

    # -- scalar evaluation ---------------------------------------------------

    def prime_power_value(self, p: int, e: int) -> float:
        k = self.kind
        if k == "one":
            return 1.0
        if k == "moebius":
            return -1.0 if e == 1 else 0.0
        if k == "liouville":
            return -1.0 if e % 2 else 1.0
        if k == "abs_moebius":
            return 1.0 if e == 1 else 0.0
        if k == "smooth":
            return 1.0 if p <= self.y else 0.0
        if k == "neg_primes":
            return -1.0 if (p in self.neg_set and e % 2) else 1.0
        if self.completely_multiplicative:
            return self.table.get((p, 1), 1.0) ** e
        return self.table.get((p, e), 1.0)

    # -- vectorized evaluation over arena pairs -------------------------------

    def pair_values(self, primes: np.ndarray, exps: np.ndarray) -> np.ndarray:
        k = self.kind
        if k == "one":
            return np.ones(primes.size)
        if k == "moebius":
            return np.where(exps == 1, -1.0, 0.0)
        if k == "liouville":
            return np.where(exps % 2 == 1, -1.0, 1.0)
        if k == "abs_moebius":
            return np.where(exps == 1, 1.0, 0.0)
        if k == "smooth":
            return (primes <= np.uint64(self.y)).astype(np.float64)
        if k == "neg_primes":
            neg = np.isin(primes, np.asarray(self.neg_set, dtype=np.uint64))
            return np.where(neg & (exps % 2 == 1), -1.0, 1.0)
        out = np.empty(primes.size)
        for i in range(primes.size):
            out[i] = self.prime_power_value(int(primes[i]), int(exps[i]))
        return out

    def prime_values(self, primes: np.ndarray) -> np.ndarray:
        """f(p) for an array of primes (exponent 1 throughout)."""
        return self.pair_values(primes, np.ones(primes.size, dtype=np.uint32))


def one() -> MultiplicativeFunctionSpec:
    return MultiplicativeFunctionSpec("one", completely_multiplicative=True)


def moebius() -> MultiplicativeFunctionSpec:
    return MultiplicativeFunctionSpec("moebius", completely_multiplicative=False)


def liouville() -> MultiplicativeFunctionSpec:
    return MultiplicativeFunctionSpec("liouville", completely_multiplicative=True)


def abs_moebius() -> MultiplicativeFunctionSpec:
    return MultiplicativeFunctionSpec("abs_moebius", completely_multiplicative=False)


def smooth_indicator(y: int) -> MultiplicativeFunctionSpec:
    """Indicator of y-smooth integers (all prime factors <= y)."""
    if y < 1:
        raise ValueError(f"smooth indicator requires y >= 1, got {y}")
    return MultiplicativeFunctionSpec(
        "smooth", completely_multiplicative=False, y=int(y)
    )


def neg_primes(primes: Sequence[int]) -> MultiplicativeFunctionSpec:
    """Completely multiplicative f with f(p) = -1 exactly on the given primes."""
    entries = tuple(sorted(int(p) for p in primes))
    if not entries:
        raise ValueError("neg_primes requires a nonempty prime set")
    for p in entries:
        if not _is_prime(p):
            raise ValueError(f"neg_primes entry {p} is not prime")
    return MultiplicativeFunctionSpec(
        "neg_primes", completely_multiplicative=True, neg_set=entries
    )


def from_table(
    values: Mapping[Tuple[int, int], float], completely_multiplicative: bool = False
) -> MultiplicativeFunctionSpec:
    """Explicit prime-power table; unlisted prime powers default to +1.

    A table flagged completely multiplicative reads only the (p, 1)
    entries and extends them by f(p^e) = f(p)^e.
    """
    table = dict(values)
    for (p, e), v in table.items():
        if not -1.0 <= v <= 1.0:
            raise ValueError(f"table value f({p}^{e}) = {v} outside [-1, 1]")
        if e < 1:
            raise ValueError(f"table key ({p}, {e}) has exponent < 1")
    return MultiplicativeFunctionSpec(
        "table",
        completely_multiplicative=completely_multiplicative,
        table=table,
    )


def parse_function(text: str) -> MultiplicativeFunctionSpec:
    """Parse the CLI spec grammar.

    Grammar: ``one | moebius | liouville | abs_moebius | smooth:<y> |
    negp:<p1,p2,...>``.  Errors name the offending token.
    """
    text = text.strip()
    plain = {
        "one": one,
        "moebius": moebius,
        "liouville": liouville,
        "abs_moebius": abs_moebius,
    }
    if text in plain:
        return plain[text]()
    if text.startswith("smooth:"):
        token = text[len("smooth:") :]
        try:
            y = int(token)
        except ValueError:
            raise ValueError(f"bad smooth bound token {token!r}") from None
        return smooth_indicator(y)
    if text.startswith("negp:"):
        body = text[len("negp:") :]
        entries = []
        for token in body.split(","):
            try:
                entries.append(int(token))
            except ValueError:
                raise ValueError(f"bad prime token {token!r} in negp spec") from None
        return neg_primes(entries)
    raise ValueError(f"unknown function spec token {text!r}")


# ---------------------------------------------------------------------------
# Evaluation


def evaluate(spec: MultiplicativeFunctionSpec, entry: FactorEntry) -> float:
    """f(n) from n's factorization entry; f(1) = 1 (empty product)."""
    value = 1.0
    for p, e in entry:
        value *= spec.prime_power_value(p, e)
        if value == 0.0:
            return 0.0
    return value


def evaluate_window(spec: MultiplicativeFunctionSpec, table: FactorTable) -> np.ndarray:
    """f over a factor table, aligned with window offsets."""
    values = spec.pair_values(table.primes, table.exps)
    # + 0.0 turns the -0.0 of (-1)*0 products into plain zeros.
    return segment_product(values, table.offsets) + 0.0


def window_values(
    spec: MultiplicativeFunctionSpec,
    start: int,
    length: int,
    restrict=None,
) -> np.ndarray:
    """f over [start, start+length), zeroed outside S when restricted.

    ``restrict`` is an (IntervalSystem, J) pair; membership zeroes
    non-members rather than dropping them so offsets stay aligned.
    Built-in kinds take the arena-free slicing route; table specs build
    the factor table.  Both routes produce identical values.
    """
    from ._fastpath import fast_window_values

    window = Window(start, length)  # enforce range invariants up front
    system, j_max = restrict if restrict is not None else (None, 0)
    fast = fast_window_values(spec, start, length, system, j_max)
    if fast is not None:
        return fast
    table = sieve_factorize(window)
    out = evaluate_window(spec, table)
    if restrict is not None:
        from .s_system import member_mask

        out = np.where(member_mask(table, system, j_max), out, 0.0)
    return out


def range_sum(
    spec: MultiplicativeFunctionSpec,
    lo: int,
    hi: int,
    restrict=None,
    threads: int = 1,
) -> float:
    """Sum of f(n) over lo <= n <= hi, chunked; deterministic for any thread count."""
    from ._parallel import map_ordered
    from math import fsum

    chunks = [(c, min(_CHUNK, hi + 1 - c)) for c in range(lo, hi + 1, _CHUNK)]

    def chunk_sum(args):
        c, ln = args
        return float(window_values(spec, c, ln, restrict).sum())

    return fsum(map_ordered(chunk_sum, chunks, threads))


def long_average(
    spec: MultiplicativeFunctionSpec,
    X: int,
    restrict=None,
    threads: int = 1,
) -> float:
    """(1/X) * sum of f(n) over X <= n <= 2X (X+1 integers, inclusive)."""
    if X < 2:
        raise ValueError(f"long_average requires X >= 2, got {X}")
    if 2 * X + 1 > WINDOW_CAPACITY:
        raise CapacityError(f"long_average range end {2 * X} exceeds capacity")
    return range_sum(spec, X, 2 * X, restrict, threads) / X
