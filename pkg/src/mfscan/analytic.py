"""Dirichlet polynomials on a vertical line, mean-square law checks,
pretentious-distance machinery, the duality principle, and the
prime-weighted decomposition identity.

Everything here is pure and deterministic: fixed summation orders, a
seeded generator for the randomized duality search, and exact rational
arithmetic where an identity is testable in integers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import fsum
from typing import NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from ._segments import segment_sum
from .errors import CapacityError, ResolutionError
from .mfunc import MultiplicativeFunctionSpec, window_values
from .sieve import Window, primes_in_range, primes_up_to, sieve_factorize

COEFF_BOUND = 1.0e6
_EVAL_CHUNK = 1 << 15
_PAIR_BLOCK = 1 << 24


@dataclass(frozen=True)
class DirichletPolynomial:
    """Real coefficients a_n on [n_start, n_start + len - 1]."""

    n_start: int
    coefficients: np.ndarray

    def __post_init__(self):
        coeffs = np.ascontiguousarray(self.coefficients, dtype=np.float64)
        if coeffs.ndim != 1 or coeffs.size == 0:
            raise ValueError("coefficients must be a nonempty 1-d array")
        if self.n_start < 1:
            raise ValueError(f"n_start must be >= 1, got {self.n_start}")
        if np.max(np.abs(coeffs)) > COEFF_BOUND:
            raise ValueError(f"coefficient magnitude exceeds sanity bound {COEFF_BOUND}")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def n_end(self) -> int:
        return self.n_start + self.coefficients.size - 1


def build_poly(
    spec: MultiplicativeFunctionSpec,
    X: int,
    restrict=None,
    normalize: bool = False,
) -> DirichletPolynomial:
    """Coefficients f(n) (or f(n)/n when normalized) for X <= n <= 2X.

    With a restriction, coefficients outside the S-set are zeroed.  The
    normalized polynomial evaluated at it equals the raw one at 1 + it.
    """
    if X < 1:
        raise ValueError(f"build_poly requires X >= 1, got {X}")
    values = window_values(spec, X, X + 1, restrict)
    if normalize:
        values = values / np.arange(X, 2 * X + 1, dtype=np.float64)
    return DirichletPolynomial(X, values)


def build_prime_window(
    spec: MultiplicativeFunctionSpec, P: int, Q: int
) -> DirichletPolynomial:
    """Coefficients f(p) at the primes of [P, Q], zero elsewhere."""
    if not 2 <= P <= Q:
        raise ValueError(f"require 2 <= P <= Q, got P={P}, Q={Q}")
    coeffs = np.zeros(Q - P + 1)
    primes = primes_in_range(P, Q)
    if primes.size:
        coeffs[(primes - np.uint64(P)).astype(np.int64)] = spec.prime_values(primes)
    return DirichletPolynomial(P, coeffs)


def eval_at(poly: DirichletPolynomial, sigma: float, t: float) -> complex:
    """Sum of a_n n^(-sigma) (cos(t log n) - i sin(t log n)).

    Terms are produced vectorized; the reduction is compensated
    (Kahan) across fixed-size blocks so large polynomials keep full
    double accuracy in a deterministic order.
    """
    support = np.flatnonzero(poly.coefficients)
    if support.size == 0:
        return 0.0 + 0.0j
    n = (poly.n_start + support).astype(np.float64)
    log_n = np.log(n)
    amp = poly.coefficients[support] * np.exp(-sigma * log_n)
    phase = t * log_n
    real_terms = amp * np.cos(phase)
    imag_terms = -amp * np.sin(phase)

    def kahan_blocks(terms: np.ndarray) -> float:
        total = 0.0
        carry = 0.0
        for i in range(0, terms.size, _EVAL_CHUNK):
            x = float(terms[i : i + _EVAL_CHUNK].sum())
            y = x - carry
            t_new = total + y
            carry = (t_new - total) - y
            total = t_new
        return total

    return complex(kahan_blocks(real_terms), kahan_blocks(imag_terms))


class MeanSquareResult(NamedTuple):
    value: float
    law: float
    residual: float
    step: float
    points: int


def mean_square(poly: DirichletPolynomial, T: float, step: float) -> MeanSquareResult:
    """Composite-trapezoid value of the mean square of |A(it)| over [-T, T].

    The trapezoid grid sum is evaluated in closed form pair by pair:
    for the uniform grid t_k = -T + k s the weighted sum of
    cos(t_k (log n - log m)) telescopes to a Dirichlet-kernel ratio, so
    the full quadrature costs O(support^2) instead of O(support * grid)
    while producing the same trapezoid value.  Returned alongside are
    the mean-value law 2T * sum a_n^2 and the residual against it.
    """
    if T <= 0:
        raise ValueError(f"T must be positive, got {T}")
    if step <= 0:
        raise ValueError(f"step must be positive, got {step}")
    limit = 1.0 / (4.0 * math.log(poly.n_end)) if poly.n_end > 1 else math.inf
    if step > limit:
        raise ResolutionError(
            f"step {step} too coarse: integrand oscillates up to frequency "
            f"log(n_end^2); need step <= {limit}"
        )
    K = int(math.ceil(2.0 * T / step))
    s = 2.0 * T / K

    support = np.flatnonzero(poly.coefficients)
    coeffs = poly.coefficients[support]
    law = float(2.0 * T * np.dot(poly.coefficients, poly.coefficients))
    if support.size == 0:
        return MeanSquareResult(0.0, law, 0.0, s, K + 1)
    log_n = np.log((poly.n_start + support).astype(np.float64))

    # Trapezoid weight of cos(t delta) on the symmetric grid:
    #   W(delta) = s * (sin((K+1) s delta / 2) / sin(s delta / 2) - cos(T delta))
    # with W(0) = 2T; distinct n give distinct log n so only the diagonal
    # needs the limit value.
    block = max(1, _PAIR_BLOCK // support.size)
    total = 0.0
    for i in range(0, support.size, block):
        delta = log_n[i : i + block, None] - log_n[None, :]
        half = 0.5 * s * delta
        num = np.sin((K + 1) * half)
        den = np.sin(half)
        with np.errstate(divide="ignore", invalid="ignore"):
            weight = s * (num / den - np.cos(T * delta))
        weight[delta == 0.0] = 2.0 * T
        total += float(coeffs[i : i + block] @ weight @ coeffs)
    return MeanSquareResult(total, law, total - law, s, K + 1)


# ---------------------------------------------------------------------------
# Pretentious distance


@dataclass(frozen=True)
class DistanceResult:
    """The distance itself (not its square) and the prime cutoff used."""

    value: float
    prime_cutoff: int


ArchimedeanTwist = Union[float, int]


def _distance_squared_terms(
    f: MultiplicativeFunctionSpec, x: int
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    primes = primes_up_to(x)
    pf = primes.astype(np.float64)
    return f.prime_values(primes), 1.0 / pf, np.log(pf)


def halasz_distance(
    f: MultiplicativeFunctionSpec,
    g: Union[MultiplicativeFunctionSpec, ArchimedeanTwist],
    x: int,
) -> DistanceResult:
    """Distance between f and g over primes up to x.

    g may be another spec or a real t0, meaning the archimedean twist
    p -> p^(i t0); for real-valued f the summand is then
    (1 - f(p) cos(t0 log p)) / p.
    """
    if x < 2:
        raise ValueError(f"distance needs x >= 2, got {x}")
    f_vals, inv_p, log_p = _distance_squared_terms(f, x)
    if isinstance(g, MultiplicativeFunctionSpec):
        g_vals = g.prime_values(primes_up_to(x))
        sq = float(np.dot(inv_p, 1.0 - f_vals * g_vals))
    else:
        t0 = float(g)
        sq = float(np.dot(inv_p, 1.0 - f_vals * np.cos(t0 * log_p)))
    return DistanceResult(math.sqrt(max(sq, 0.0)), x)


class MinDistanceResult(NamedTuple):
    value: float  # the squared distance at the minimizer
    argmin: float


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def min_distance(
    f: MultiplicativeFunctionSpec,
    t: float,
    T0: float,
    x: int,
    grid: int,
) -> MinDistanceResult:
    """Approximate min over |t0| <= T0 of the squared distance to p^(i(t+t0)).

    A uniform grid of ``grid`` points is scanned, then one golden-section
    refinement runs on the bracketing cell.  This approximates the true
    continuum minimum from above.
    """
    if grid < 3:
        raise ValueError(f"grid must be >= 3, got {grid}")
    if x < 2:
        raise ValueError(f"min_distance needs x >= 2, got {x}")
    f_vals, inv_p, log_p = _distance_squared_terms(f, x)
    base = float(inv_p.sum())
    weights = f_vals * inv_p

    def dist_sq(t0: float) -> float:
        return base - float(np.dot(weights, np.cos((t + t0) * log_p)))

    t0_grid = np.linspace(-T0, T0, grid)
    # Blocked grid scan keeps the cos matrix in cache-sized pieces.
    best_val = math.inf
    best_idx = 0
    block = max(1, _PAIR_BLOCK // max(log_p.size, 1))
    for i in range(0, grid, block):
        tau = (t + t0_grid[i : i + block])[:, None] * log_p[None, :]
        vals = base - np.cos(tau) @ weights
        j = int(np.argmin(vals))
        if vals[j] < best_val:
            best_val = float(vals[j])
            best_idx = i + j
    spacing = t0_grid[1] - t0_grid[0]
    lo = max(-T0, t0_grid[best_idx] - spacing)
    hi = min(T0, t0_grid[best_idx] + spacing)

    c = hi - _GOLDEN * (hi - lo)
    d = lo + _GOLDEN * (hi - lo)
    fc, fd = dist_sq(c), dist_sq(d)
    for _ in range(80):
        if hi - lo < 1e-13 * max(1.0, T0):
            break
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - _GOLDEN * (hi - lo)
            fc = dist_sq(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _GOLDEN * (hi - lo)
            fd = dist_sq(d)
    candidates = [(best_val, float(t0_grid[best_idx])), (fc, c), (fd, d)]
    value, argmin = min(candidates, key=lambda pair: pair[0])
    return MinDistanceResult(value, argmin)


def halasz_bound_shape(
    f: MultiplicativeFunctionSpec,
    x: int,
    T0: float,
    t: float,
    grid: int = 801,
) -> float:
    """M exp(-M) + 1/T0 + loglog x / log x with M the grid-refined minimum.

    Reported as a shape with implied constant 1; callers compare the
    measured polynomial magnitude against it rather than asserting an
    inequality, because the absolute constant is unspecified.
    """
    if x < 16:
        raise ValueError(f"halasz_bound_shape needs x >= 16, got {x}")
    if T0 < 1:
        raise ValueError(f"halasz_bound_shape needs T0 >= 1, got {T0}")
    m = min_distance(f, t, T0, x, grid).value
    log_x = math.log(x)
    return m * math.exp(-m) + 1.0 / T0 + math.log(log_x) / log_x


# ---------------------------------------------------------------------------
# Duality principle


def _lambda_max_hermitian(gram: np.ndarray) -> float:
    """Largest eigenvalue of a PSD Hermitian matrix by normalized squaring.

    Squaring m times and taking the Frobenius norm gives
    ||G^(2^m)||_F^(1/2^m), which brackets lambda_max within a factor
    rank^(1/2^(m+1)); at m = 60 that factor is indistinguishable from 1
    in double precision.  Fully deterministic, no start vector needed.
    """
    norm = float(np.linalg.norm(gram))
    if norm == 0.0:
        return 0.0
    b = gram / norm
    log_scale = math.log(norm)
    for _ in range(60):
        b = b @ b
        norm = float(np.linalg.norm(b))
        if norm == 0.0:
            return 0.0
        log_scale = 2.0 * log_scale + math.log(norm)
        b = b / norm
    return math.exp(log_scale / 2**60)


def duality_check(
    matrix: np.ndarray,
    trials: int = 10_000,
    method: str = "power",
    seed: int = 0,
) -> Tuple[float, float]:
    """Extremal constants of the two equivalent bilinear inequalities.

    Forward: max over unit a of sum_m |sum_n a_n x_{mn}|^2.  Backward:
    the same with the roles of rows and columns swapped.  Both equal the
    squared spectral norm.  ``method='power'`` uses deterministic
    normalized squaring of the two Gram matrices; ``method='random'``
    does a seeded random search with ``trials`` unit vectors per side
    (accurate to a few percent at 10^4 trials).
    """
    x = np.asarray(matrix, dtype=np.complex128)
    if x.ndim != 2:
        raise ValueError("duality_check needs a 2-d matrix")
    m, n = x.shape
    if m > 64 or n > 64:
        raise CapacityError(f"matrix {m}x{n} exceeds the 64x64 duality cap")
    if method == "power":
        xh = x.conj().T
        return (
            _lambda_max_hermitian(xh @ x),
            _lambda_max_hermitian(x @ xh),
        )
    if method != "random":
        raise ValueError(f"unknown duality method {method!r}")
    rng = np.random.default_rng(seed)

    def search(mat: np.ndarray, dim: int) -> float:
        best = 0.0
        remaining = trials
        while remaining > 0:
            batch = min(remaining, 4096)
            vecs = rng.standard_normal((dim, batch)) + 1j * rng.standard_normal(
                (dim, batch)
            )
            norms = np.linalg.norm(vecs, axis=0)
            images = mat @ vecs
            ratios = (np.linalg.norm(images, axis=0) / norms) ** 2
            best = max(best, float(ratios.max()))
            remaining -= batch
        return best

    return search(x, n), search(x.conj().T, m)


# ---------------------------------------------------------------------------
# Prime-weighted decomposition identity


@dataclass(frozen=True)
class RamareDecomposition:
    """Pieces of the weighted prime decomposition of a coefficient sum.

    lhs = main + coprime + residual, where main runs over (p, m) pairs
    with the 1/(omega(m; P, Q) + 1) weight, coprime collects integers
    with no prime factor in [P, Q], and the residual is supported on
    integers divisible by p^2 for some p in [P, Q].  ``correction`` is
    that deficiency recomputed directly per integer; it always equals
    the residual.  With integer coefficients at s = 0 all five values
    are exact ``Fraction`` instances.
    """

    lhs: object
    main: object
    correction: object
    coprime: object
    residual: object
    exact: bool


def ramare_decompose(
    coefficients: Sequence,
    n_start: int,
    P: int,
    Q: int,
    s: int = 0,
) -> RamareDecomposition:
    """Split sum a_n into prime-window bilinear part, coprime part, and residual.

    At s = 0 the plain coefficient sums are decomposed; at s = 1 each
    a_n is weighted by 1/n.  For each prime p in [P, Q] dividing n with
    exponent e, the bilinear part receives a_n / (omega(n/p; P, Q) + 1),
    where omega(n/p) is omega(n) minus one exactly when e = 1.  On
    integers squarefree with respect to [P, Q] the weights sum to 1, so
    the residual vanishes there identically.
    """
    if not 2 <= P <= Q:
        raise ValueError(f"require 2 <= P <= Q, got P={P}, Q={Q}")
    if s not in (0, 1):
        raise ValueError(f"s must be 0 or 1, got {s}")
    a = np.asarray(coefficients)
    length = a.shape[0]
    table = sieve_factorize(Window(n_start, length))
    in_range = (table.primes >= np.uint64(P)) & (table.primes <= np.uint64(Q))
    omega = segment_sum(in_range.astype(np.int64), table.offsets)
    exact = s == 0 and np.issubdtype(a.dtype, np.integer)

    if exact:
        zero = Fraction(0)
        lhs = Fraction(int(np.sum(a, dtype=np.int64)))
        coprime = Fraction(int(np.sum(a[omega == 0], dtype=np.int64)))
        main = zero
        correction = zero
        offsets = table.offsets
        for i in np.flatnonzero(omega):
            lo, hi = int(offsets[i]), int(offsets[i + 1])
            w = int(omega[i])
            weight = Fraction(0)
            has_square = False
            for p, e in zip(table.primes[lo:hi], table.exps[lo:hi]):
                if P <= p <= Q:
                    if e == 1:
                        weight += Fraction(1, w)
                    else:
                        weight += Fraction(1, w + 1)
                        has_square = True
            coeff = int(a[i])
            main += coeff * weight
            if has_square:
                correction += coeff * (1 - weight)
        residual = lhs - main - coprime
        return RamareDecomposition(lhs, main, correction, coprime, residual, True)

    values = a.astype(np.float64)
    if s == 1:
        values = values / np.arange(n_start, n_start + length, dtype=np.float64)
    denom = np.repeat(omega, np.diff(table.offsets)).astype(np.float64)
    pair_weight = np.where(
        in_range, np.where(table.exps == 1, 1.0, 0.0), 0.0
    ) / np.maximum(denom, 1.0)
    pair_weight_sq = np.where(
        in_range & (table.exps >= 2), 1.0 / (denom + 1.0), 0.0
    )
    weight = segment_sum(pair_weight + pair_weight_sq, table.offsets)
    has_square = segment_sum(
        (in_range & (table.exps >= 2)).astype(np.int64), table.offsets
    ) > 0
    lhs = float(values.sum())
    coprime = float(values[omega == 0].sum())
    main = float(np.dot(values, weight))
    correction = float(np.dot(values[has_square], 1.0 - weight[has_square]))
    residual = lhs - main - coprime
    return RamareDecomposition(lhs, main, correction, coprime, residual, False)
