"""The Dickman-de Bruijn density of smooth numbers.

rho is 1 on [0, 1]; beyond that it satisfies the delay relation
u rho'(u) = -rho(u - 1), integrated here step by step on a fixed binary
grid: the first unit panel has the closed form 1 - log u, and past u = 2
each step adds a sixth-order interpolatory quadrature of the integrand
rho(t-1)/t, which is already known a full unit behind (the lag of
exactly one unit lands on grid points because the step divides 1).

Four numerical traps shape the solver.  The update must be one-step in
rho (a two-step Simpson chain has a parasitic mode that swamps the
rapidly decaying solution); quadrature stencils must never span an
interior integer, where rho loses one derivative per unit (stencils are
clamped inside each unit panel instead); the running value is kept in
double-double precision during the build, because one rounding per step
would otherwise leave an absolute error plateau near 1e-17 that
dominates the tail; and the update is multiplicative, so that error
stays relative rather than absolute.  The solver is deliberately
non-adaptive so tables are reproducible bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import CapacityError
from ._segments import segment_max
from .sieve import WINDOW_CAPACITY, Window, sieve_factorize

DEFAULT_STEP = 2.0**-10
DEFAULT_U_MAX = 20.0
CLAMP_THRESHOLD = 1.0e-30
_COUNT_CHUNK = 1 << 22

# Error-free float transforms (Knuth two-sum, Dekker split/product) for
# the double-double running value used during table construction.


def _two_sum(a: float, b: float):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _two_prod(a: float, b: float):
    p = a * b
    split = 134217729.0  # 2^27 + 1
    ca = split * a
    ah = ca - (ca - a)
    al = a - ah
    cb = split * b
    bh = cb - (cb - b)
    bl = b - bh
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


# Sixth-order weights for integrating over [0, 1] (in units of the step)
# from six consecutive nodes; variant i places the interval's left node
# at stencil position i.  Exact rationals, written as floats.
_STENCIL_WEIGHTS = (
    (95 / 288, 1427 / 1440, -133 / 240, 241 / 720, -173 / 1440, 3 / 160),
    (-3 / 160, 637 / 1440, 511 / 720, -43 / 240, 77 / 1440, -11 / 1440),
    (11 / 1440, -31 / 480, 401 / 720, 401 / 720, -31 / 480, 11 / 1440),
    (-11 / 1440, 77 / 1440, -43 / 240, 511 / 720, 637 / 1440, -3 / 160),
    (3 / 160, -173 / 1440, 241 / 720, -133 / 240, 1427 / 1440, 95 / 288),
)


@dataclass(frozen=True)
class DickmanTable:
    """rho sampled on the uniform grid [0, u_max] with the given step.

    ``clamped_from`` is the smallest grid point whose value fell below
    10^-30 and was clamped to zero (None if that never happened).
    """

    u_max: float
    step: float
    values: np.ndarray
    clamped_from: Optional[float] = None

    def __post_init__(self):
        self.values.setflags(write=False)


def build_table(u_max: float = DEFAULT_U_MAX, step: float = DEFAULT_STEP) -> DickmanTable:
    """Solve the delay relation on a uniform grid.

    The step must divide 1 exactly (binary steps like 2^-10 do) so the
    unit lag maps onto the grid.
    """
    if step <= 0 or step > 2.0**-10:
        raise ValueError(f"step must lie in (0, 2^-10], got {step}")
    lag = round(1.0 / step)
    if lag * step != 1.0:
        raise ValueError(f"step {step} must divide 1 exactly")
    if u_max < 1.0:
        raise ValueError(f"u_max must be >= 1, got {u_max}")
    size = int(round(u_max / step))
    values = np.ones(size + 1)
    u = np.arange(size + 1) * step
    top_exact = min(2 * lag, size)
    values[lag + 1 : top_exact + 1] = 1.0 - np.log(u[lag + 1 : top_exact + 1])
    clamped_from = None
    lows = np.zeros(size + 1)  # double-double tails, build-time only
    if 2 * lag <= size:
        # Anchor the march at rho(2) = 1 - log 2 in full double-double
        # precision; a plain-double seed leaves an absolute error near
        # 1e-16 that would decay into a visible floor by u = 10.
        values[2 * lag] = 0.3068528194400547
        lows[2 * lag] = -2.3190468138462996e-17

    def g(j: int) -> float:
        # integrand rho(u_j - 1) / u_j; the unit lag keeps it a step behind
        return values[j - lag] / u[j]

    for k in range(2 * lag + 1, size + 1):
        # Stencil of six consecutive nodes around the step [u_{k-1}, u_k],
        # clamped inside the unit panel so it never spans an interior
        # integer (rho loses a derivative at each one).
        panel = (k - 1) // lag
        lo = min(max(k - 3, panel * lag), (panel + 1) * lag - 5, size - 5)
        lo = max(lo, 0)
        w = _STENCIL_WEIGHTS[k - 1 - lo]
        integral = step * (
            w[0] * g(lo)
            + w[1] * g(lo + 1)
            + w[2] * g(lo + 2)
            + w[3] * g(lo + 3)
            + w[4] * g(lo + 4)
            + w[5] * g(lo + 5)
        )
        ph = values[k - 1]
        pl = lows[k - 1]
        if ph <= 0.0:
            values[k] = 0.0
            continue
        # new = prev - prev * t in double-double; t itself is ~5e-3 so a
        # plain-double t only costs eps * t in relative terms per step.
        t = integral / ph
        qh, ql = _two_prod(ph, t)
        ql += pl * t
        sh, se = _two_sum(ph, -qh)
        se += pl - ql
        hi, lo_part = _two_sum(sh, se)
        if hi < CLAMP_THRESHOLD:
            hi, lo_part = 0.0, 0.0
            if clamped_from is None:
                clamped_from = float(u[k])
        values[k] = hi
        lows[k] = lo_part
    return DickmanTable(float(u[-1]), step, values, clamped_from)


_default_table: Optional[DickmanTable] = None


def default_table() -> DickmanTable:
    global _default_table
    if _default_table is None:
        _default_table = build_table()
    return _default_table


def rho(u: float, table: Optional[DickmanTable] = None) -> float:
    """rho(u) from a table, with closed forms below u = 2.

    Off-grid points above u = 2 use 4-point cubic interpolation; the
    relative error stays below 1e-8 for u <= 10 at the default step.
    """
    if table is None:
        table = default_table()
    if u < 0:
        raise ValueError(f"rho needs u >= 0, got {u}")
    if u > table.u_max:
        raise ValueError(f"u = {u} beyond table range {table.u_max}")
    if u <= 1.0:
        return 1.0
    if u <= 2.0:
        return 1.0 - math.log(u)
    pos = u / table.step
    k = int(math.floor(pos))
    values = table.values
    if float(k) == pos:
        return float(values[k])
    # Cubic Lagrange stencil around the cell, clamped to stay above the
    # C^1 kink at u = 2 where the delayed argument crosses 1.
    lo = min(max(k - 1, 2 * round(1.0 / table.step) - 1), values.size - 4)
    xs = np.arange(lo, lo + 4, dtype=np.float64)
    result = 0.0
    for i in range(4):
        term = float(values[lo + i])
        for j in range(4):
            if j != i:
                term *= (pos - xs[j]) / (xs[i] - xs[j])
        result += term
    return max(result, 0.0)


def smooth_count(x: int, y: int, threads: int = 1) -> int:
    """Exact count of integers n <= x whose prime factors are all <= y.

    n = 1 counts as smooth for every bound.  y = 1 therefore counts
    exactly the single integer 1.
    """
    if x < 1:
        raise ValueError(f"smooth_count needs x >= 1, got {x}")
    if y < 1:
        raise ValueError(f"smooth_count needs y >= 1, got {y}")
    if x + 1 > WINDOW_CAPACITY:
        raise CapacityError(f"smooth_count range {x} exceeds capacity")
    from ._parallel import map_ordered
    from .mfunc import smooth_indicator, window_values

    spec = smooth_indicator(y)
    chunks = [(c, min(_COUNT_CHUNK, x + 1 - c)) for c in range(1, x + 1, _COUNT_CHUNK)]

    def chunk_count(args):
        start, length = args
        return int(window_values(spec, start, length).sum())

    return sum(map_ordered(chunk_count, chunks, threads))


def smooth_interval_constant(eps: float, table: Optional[DickmanTable] = None) -> float:
    """The admissible square-root-interval constant rho(1/eps)^(-13).

    Returns math.inf when rho(1/eps) clamped to zero (tiny eps), rather
    than overflowing.
    """
    if table is None:
        table = default_table()
    if not 0 < eps <= 1:
        raise ValueError(f"eps must lie in (0, 1], got {eps}")
    u = 1.0 / eps
    if u > table.u_max:
        raise ValueError(f"1/eps = {u} beyond table range {table.u_max}")
    value = rho(u, table)
    if value <= 0.0:
        return math.inf
    return value**-13
