"""Exact evaluation of the height-count sums S(x,y), T(B), N*(B), N_U(B).

Every count here reduces to sums of r4*(q^2) over divisors q of n^2:
a divisor d of n^4 with square cofactor is exactly d = (n^2/m)^2 = q^2
for a divisor m of n^2, so

    S(x, y)  = sum_{n<=x} sum_{q | n^2, q^2 <= y} r4*(q^2)
    T(B)     = sum_{n<=B} sum_{q | n^2, q*B < n^2} r4*(q^2)
    N*(B)/32 = sum_{n<=B} sum_{q | n^2, q <= B, n^2 <= q*B} r4*(q^2)

All bound comparisons are integer cross-multiplications; all accumulators
are exact (Python integers never wrap).  The n-range is processed in fixed
chunks by a process pool; partial sums are exact integers, so the reduction
is order-independent and results are bit-for-bit identical for any worker
count.
"""

from __future__ import annotations

import atexit
import math
import multiprocessing
import os
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .arith import RationalBound, SpfSieve
from .errors import ResourceError

DEFAULT_CHUNK = 65536

BRUTE_STAR_CAP = 60
BRUTE_PRIMITIVE_CAP = 40

# Tuples on the hypersurface come in sign families: 2 signs for x, 2 for z,
# and 8*r4*(d) quadruples for y, giving the overall factor 32.
SIGN_FACTOR = 32


@dataclass(frozen=True)
class CountRecord:
    """One output row: exact count vs. predicted main term at one bound."""

    kind: str
    bound: int
    exact_count: int
    predicted_main: float | None
    ratio: float | None
    elapsed: float

    def __post_init__(self):
        if self.exact_count < 0:
            raise ValueError("exact_count must be >= 0")
        if (self.ratio is not None) != (
            self.predicted_main is not None and self.predicted_main > 0
        ):
            raise ValueError("ratio must be present iff predicted_main > 0")


@dataclass(frozen=True)
class PartitionWitness:
    """Independently computed S(B,B^2), T(B), N*(B) tied by N* = 32(S-T)."""

    B: int
    s_part: int
    t_part: int
    n_star: int

    def __post_init__(self):
        if self.n_star != SIGN_FACTOR * (self.s_part - self.t_part):
            raise ArithmeticError(
                f"partition identity violated at B={self.B}: "
                f"n_star={self.n_star}, 32*(s-t)={SIGN_FACTOR * (self.s_part - self.t_part)}"
            )


@dataclass(frozen=True)
class TelescopeReport:
    lower_ok: bool
    partition_ok: bool
    k0: int
    t_value: int
    lower_bound_sum: int
    upper_bound_sum: int


# ----------------------------------------------------------------------
# inner loop
# ----------------------------------------------------------------------

_ppw_cache: dict[tuple[int, int], tuple[list[int], list[int]]] = {}


def _prime_power_weights(p: int, a: int) -> tuple[list[int], list[int]]:
    """Powers p^b for b in 0..2a, paired with r4*(p^(2b))."""
    key = (p, a)
    hit = _ppw_cache.get(key)
    if hit is not None:
        return hit
    pows = [1]
    wts = [1]
    pk = 1
    if p == 2:
        for _ in range(2 * a):
            pk *= 2
            pows.append(pk)
            wts.append(3)
    else:
        for _ in range(2 * a):
            pk *= p
            pows.append(pk)
            # r4*(p^(2b)) = (p^(2b+1) - 1)/(p - 1) with pk = p^b
            wts.append((pk * pk * p - 1) // (p - 1))
    _ppw_cache[key] = (pows, wts)
    return pows, wts


def _divisor_sum_in_range(spf, n: int, lo: int, hi: int) -> int:
    """Sum r4*(q^2) over divisors q of n^2 with lo <= q <= hi."""
    if hi < lo:
        return 0
    m = n
    qs = [1]
    ws = [1]
    full = lo <= 1 and hi >= n * n
    while m > 1:
        p = int(spf[m])
        a = 0
        while m % p == 0:
            a += 1
            m //= p
        pows, wts = _prime_power_weights(p, a)
        nq: list[int] = []
        nw: list[int] = []
        eq = nq.extend
        ew = nw.extend
        for i in range(len(pows)):
            pk = pows[i]
            if not full and pk > hi:
                break
            wt = wts[i]
            eq([q * pk for q in qs])
            ew([w * wt for w in ws])
        qs = nq
        ws = nw
    if full:
        return sum(ws)
    return sum(ws[i] for i in range(len(qs)) if lo <= qs[i] <= hi)


def _chunk_s(spf, lo_n: int, hi_n: int, qmax: int) -> int:
    """sum over lo_n <= n < hi_n of sum_{q | n^2, q <= qmax} r4*(q^2)."""
    total = 0
    for n in range(lo_n, hi_n):
        total += _divisor_sum_in_range(spf, n, 1, qmax)
    return total


def _chunk_t(spf, lo_n: int, hi_n: int, B: int) -> int:
    """T-inner sums: q | n^2 with q*B < n^2, i.e. q <= (n^2-1)//B."""
    total = 0
    for n in range(lo_n, hi_n):
        hi = (n * n - 1) // B
        if hi >= 1:
            total += _divisor_sum_in_range(spf, n, 1, hi)
    return total


def _chunk_nstar(spf, lo_n: int, hi_n: int, bn: int, bd: int) -> int:
    """N*-inner sums at rational bound bn/bd: q*bd <= bn and n^2*bd <= bn*q."""
    total = 0
    hi = bn // bd
    for n in range(lo_n, hi_n):
        lo = -(-(n * n * bd) // bn)
        total += _divisor_sum_in_range(spf, n, lo, hi)
    return total


def _chunk_nu(spf, lo_k: int, hi_k: int, bn: int, bd: int) -> int:
    """Mobius-weighted n_star terms: sum over lo_k <= k < hi_k of mu(k)*N*(bn/(bd*k))/32."""
    total = 0
    for k in range(lo_k, hi_k):
        # mu(k) from the sieve; skip non-squarefree k
        m = k
        mu = 1
        while m > 1:
            p = int(spf[m])
            m //= p
            if m % p == 0:
                mu = 0
                break
            mu = -mu
        if mu == 0:
            continue
        den = bd * k
        n_max = bn // den
        sub = 0
        hi = n_max  # q*den <= bn is q <= bn//den = n_max again
        for n in range(1, n_max + 1):
            lo = -(-(n * n * den) // bn)
            sub += _divisor_sum_in_range(spf, n, lo, hi)
        total += mu * sub
    return total


# ----------------------------------------------------------------------
# worker pool
# ----------------------------------------------------------------------

_WORKER_SPF = None  # inherited by forked workers

_pool = None
_pool_key: tuple[int, int] | None = None
# strong reference keeps id(sieve) stable while the keyed pool lives
_pool_sieve_ref: SpfSieve | None = None

_CHUNK_FUNCS = {
    "s": _chunk_s,
    "t": _chunk_t,
    "nstar": _chunk_nstar,
    "nu": _chunk_nu,
}


def _run_task(task):
    mode, args = task
    return _CHUNK_FUNCS[mode](_WORKER_SPF, *args)


def default_workers() -> int:
    env = os.environ.get("QPC_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def shutdown_workers() -> None:
    """Tear down the cached worker pool (safe to call repeatedly)."""
    global _pool, _pool_key, _pool_sieve_ref
    if _pool is not None:
        _pool.terminate()
        _pool.join()
    _pool = None
    _pool_key = None
    _pool_sieve_ref = None


atexit.register(shutdown_workers)


def _get_pool(sieve: SpfSieve, workers: int):
    """Reuse one fork-based pool per (sieve, workers); the sieve array is
    inherited copy-on-write, so nothing large is pickled per task."""
    global _pool, _pool_key, _pool_sieve_ref, _WORKER_SPF
    key = (id(sieve), workers)
    if _pool is not None and _pool_key == key:
        return _pool
    shutdown_workers()
    _WORKER_SPF = sieve.spf
    ctx = multiprocessing.get_context("fork")
    _pool = ctx.Pool(processes=workers)
    _pool_key = key
    _pool_sieve_ref = sieve
    return _pool


def _map_tasks(sieve: SpfSieve, workers: int, tasks: list) -> int:
    """Exact integer reduction over chunk tasks; deterministic for any worker count."""
    if workers <= 1 or len(tasks) <= 1:
        spf = sieve.spf
        return sum(_CHUNK_FUNCS[mode](spf, *args) for mode, args in tasks)
    pool = _get_pool(sieve, workers)
    return sum(pool.map(_run_task, tasks, chunksize=1))


def _range_tasks(
    mode: str, n_lo: int, n_hi: int, extra: tuple, chunk: int, workers: int = 1
) -> list:
    if workers > 1:
        # keep at least ~6 tasks per worker so short ranges still parallelize
        span = n_hi - n_lo
        chunk = min(chunk, max(512, span // (6 * workers) + 1))
    return [
        (mode, (lo, min(lo + chunk, n_hi), *extra))
        for lo in range(n_lo, n_hi, chunk)
    ]


# ----------------------------------------------------------------------
# public counting operations
# ----------------------------------------------------------------------


def _as_num_den(bound) -> tuple[int, int]:
    if isinstance(bound, RationalBound):
        return bound.numerator, bound.denominator
    if isinstance(bound, Fraction):
        return bound.numerator, bound.denominator
    if isinstance(bound, int):
        return bound, 1
    raise TypeError(f"unsupported bound type {type(bound)!r}")


def _check_range(n_max: int, sieve: SpfSieve) -> None:
    if n_max > sieve.limit:
        raise ResourceError(
            f"count needs integers up to {n_max}, sieve limit is {sieve.limit}"
        )


def s_exact(x: int, y, sieve: SpfSieve, workers: int = 1, chunk: int = DEFAULT_CHUNK) -> int:
    """S(x, y): sum over n <= x, d | n^4 with d <= y and n^4/d square, of r4*(d).

    y may be an int, Fraction, or RationalBound; the divisor condition
    d = q^2 <= y is evaluated exactly.
    """
    if x < 1:
        return 0
    _check_range(x, sieve)
    ynum, yden = _as_num_den(y)
    qmax = math.isqrt(ynum // yden)
    if qmax < 1:
        return 0
    tasks = _range_tasks("s", 1, x + 1, (qmax,), chunk, workers)
    return _map_tasks(sieve, workers, tasks)


def t_exact(B: int, sieve: SpfSieve, workers: int = 1, chunk: int = DEFAULT_CHUNK) -> int:
    """T(B): sum over n <= B, d | n^4 with d < n^4/B^2 and n^4/d square, of r4*(d)."""
    if B < 1:
        return 0
    _check_range(B, sieve)
    tasks = _range_tasks("t", 1, B + 1, (B,), chunk, workers)
    return _map_tasks(sieve, workers, tasks)


def n_star(bound, sieve: SpfSieve, workers: int = 1, chunk: int = DEFAULT_CHUNK) -> int:
    """N*(bound): integer tuples (x, y1..y4, z) on x^4 = (y1^2+..+y4^2) z^2
    with 1 <= |x| <= bound, 1 <= sum y_i^2 <= bound^2, |z| <= bound.

    bound may be rational (used by the Mobius inversion at B/k); returns 0
    for bound < 1.
    """
    bn, bd = _as_num_den(bound)
    n_max = bn // bd
    if n_max < 1:
        return 0
    _check_range(n_max, sieve)
    tasks = _range_tasks("nstar", 1, n_max + 1, (bn, bd), chunk, workers)
    return SIGN_FACTOR * _map_tasks(sieve, workers, tasks)


def n_u(B, sieve: SpfSieve, workers: int = 1, k_chunk: int = 512) -> int:
    """N_U(B): primitive tuples (gcd of all six coordinates = 1) of height <= B.

    Computed by Mobius inversion: sum_{k <= B} mu(k) N*(B/k).  Parallelism
    is over blocks of k; each term runs the same exact inner loops as n_star.
    """
    bn, bd = _as_num_den(B)
    k_max = bn // bd
    if k_max < 1:
        return 0
    _check_range(k_max, sieve)
    # small k carry nearly all the work: dispatch them as single tasks,
    # then sweep the long tail in blocks
    head_end = min(k_max, 64)
    tasks = [("nu", (k, k + 1, bn, bd)) for k in range(1, head_end + 1)]
    lo = head_end + 1
    while lo <= k_max:
        hi = min(lo + k_chunk, k_max + 1)
        tasks.append(("nu", (lo, hi, bn, bd)))
        lo = hi
    return SIGN_FACTOR * _map_tasks(sieve, workers, tasks)


def partition_witness(B: int, sieve: SpfSieve, workers: int = 1) -> PartitionWitness:
    """Compute S(B,B^2), T(B), N*(B) independently; constructing the witness
    verifies N* = 32 (S - T) exactly."""
    s_val = s_exact(B, B * B, sieve, workers)
    t_val = t_exact(B, sieve, workers)
    ns = n_star(B, sieve, workers)
    return PartitionWitness(B, s_val, t_val, ns)


# ----------------------------------------------------------------------
# brute-force oracles (independent of the divisor identities)
# ----------------------------------------------------------------------


def _r4_table_by_convolution(dmax: int) -> np.ndarray:
    """r4(d) for d <= dmax by convolving the one-square counting sequence.

    Counts pairs, then quadruples, by exact integer convolution; no divisor
    formula is involved.
    """
    r1 = np.zeros(dmax + 1, dtype=np.int64)
    r1[0] = 1
    k = 1
    while k * k <= dmax:
        r1[k * k] = 2
        k += 1
    r2 = np.convolve(r1, r1)[: dmax + 1]
    return np.convolve(r2, r2)[: dmax + 1]


def brute_force_star(B: int) -> int:
    """Oracle for N*(B): enumerate (x, z) pairs and weight by a brute-force
    four-square representation table.  Guarded to B <= 60."""
    if B > BRUTE_STAR_CAP:
        raise ValueError(f"brute_force_star capped at B={BRUTE_STAR_CAP}")
    if B < 1:
        return 0
    B2 = B * B
    r4t = _r4_table_by_convolution(B2)
    total = 0
    for x in range(1, B + 1):
        x4 = x**4
        for z in range(1, B + 1):
            z2 = z * z
            if x4 % z2 == 0:
                d = x4 // z2
                if d <= B2:
                    total += 4 * int(r4t[d])
    return total


def brute_force_primitive(B: int) -> int:
    """Oracle for N_U(B): exhaustive tuple enumeration with a gcd filter.

    The y-quadruples are enumerated once (numpy grids chunked over y1) into
    a table counting (sum of squares, gcd of the quadruple); each (x, z)
    pair then keeps the classes with gcd(x, z, gcd_y) = 1.  Guarded to B <= 40.
    """
    if B > BRUTE_PRIMITIVE_CAP:
        raise ValueError(f"brute_force_primitive capped at B={BRUTE_PRIMITIVE_CAP}")
    if B < 1:
        return 0
    B2 = B * B
    axis = np.arange(-B, B + 1)
    sq = axis * axis
    sum3 = sq[:, None, None] + sq[None, :, None] + sq[None, None, :]
    gcd3 = np.gcd(
        np.gcd.outer(np.abs(axis), np.abs(axis))[:, :, None],
        np.abs(axis)[None, None, :],
    )
    counts = np.zeros((B2 + 1, B + 1), dtype=np.int64)
    for y1 in axis:
        d = int(y1) * int(y1) + sum3
        g = np.gcd(gcd3, abs(int(y1)))
        mask = (d >= 1) & (d <= B2)
        np.add.at(counts, (d[mask], g[mask]), 1)
    total = 0
    for x in range(1, B + 1):
        x4 = x**4
        for z in range(1, B + 1):
            z2 = z * z
            if x4 % z2:
                continue
            d = x4 // z2
            if d > B2:
                continue
            row = counts[d]
            xz = math.gcd(x, z)
            sub = 0
            for g in range(1, B + 1):
                c = int(row[g])
                if c and math.gcd(xz, g) == 1:
                    sub += c
            total += 4 * sub
    return total


# ----------------------------------------------------------------------
# telescoping partition of T(B)
# ----------------------------------------------------------------------


def _dyadic_bracket(x, bits: int = 160) -> tuple[Fraction, Fraction]:
    """Enclose an mpmath float in a dyadic Fraction interval of width 3*2^-bits."""
    import mpmath

    scaled = mpmath.mpf(x) * (1 << bits)
    lo = (int(mpmath.floor(scaled)) - 1, 1 << bits)
    hi = (int(mpmath.ceil(scaled)) + 1, 1 << bits)
    return Fraction(*lo), Fraction(*hi)


class _AmbiguousBracket(Exception):
    pass


def _floor_of_bracket(lo: Fraction, hi: Fraction) -> int:
    f_lo = lo.numerator // lo.denominator
    f_hi = hi.numerator // hi.denominator
    if f_lo != f_hi:
        raise _AmbiguousBracket
    return f_lo


def _telescope_thresholds(B: int, dps: int) -> tuple[int, list[int], list[int]]:
    """k0 plus exact floors x_k = floor(delta^k B), y_k = floor(delta^{4k} B^2).

    delta = 1 - 1/log B is irrational; every threshold is bracketed by
    outward-rounded dyadic rationals and each floor is accepted only when
    both bracket ends agree, so the shell partition is exact.
    """
    import mpmath

    with mpmath.workdps(dps):
        log_lo, log_hi = _dyadic_bracket(mpmath.log(B))
    if log_lo <= 1:
        raise ValueError("telescoping needs log B > 1")
    delta_lo = 1 - 1 / log_lo
    delta_hi = 1 - 1 / log_hi
    thresh_lo = 1 / log_hi**3
    thresh_hi = 1 / log_lo**3

    xs = [B]
    ys = [B * B]
    pow_lo = Fraction(1)
    pow_hi = Fraction(1)
    k = 0
    while True:
        k += 1
        if k > 100000:
            raise ArithmeticError("telescoping index k0 did not terminate")
        pow_lo *= delta_lo
        pow_hi *= delta_hi
        below = pow_hi < thresh_lo          # definitely delta^k < (log B)^-3
        at_or_above = pow_lo >= thresh_hi   # definitely not
        if not below and not at_or_above:
            raise _AmbiguousBracket
        xs.append(_floor_of_bracket(pow_lo * B, pow_hi * B))
        ys.append(_floor_of_bracket(pow_lo**4 * B * B, pow_hi**4 * B * B))
        if below:
            return k, xs, ys


def telescoping_check(B: int, sieve: SpfSieve, workers: int = 1) -> TelescopeReport:
    """Verify the geometric-shell partition and lower bound for T(B).

    With delta = 1 - 1/log B and k0 minimal with delta^k0 < (log B)^-3:

      partition:  T(B) equals the shell sums over delta^k B < n <= delta^(k-1) B
                  for k = 1..k0 plus the remainder over n <= delta^k0 B;
      lower bound: T(B) >= sum_k [S(delta^(k-1) B, delta^(4k) B^2)
                                  - S(delta^k B, delta^(4k) B^2)].

    Both sides are exact integers once the irrational shell edges are
    resolved through ambiguity-checked rational brackets.
    """
    if B < 10:
        raise ValueError("telescoping_check requires B >= 10")
    _check_range(B, sieve)
    last_err = None
    for dps in (60, 130, 260):
        try:
            k0, xs, ys = _telescope_thresholds(B, dps)
            break
        except _AmbiguousBracket as err:  # pragma: no cover - astronomically rare
            last_err = err
    else:  # pragma: no cover
        raise ArithmeticError("could not disambiguate delta-power brackets") from last_err

    t_val = t_exact(B, sieve, workers)

    # partition: shells k = 1..k0 plus the remainder below x_{k0}
    shell_tasks = []
    for k in range(1, k0 + 1):
        if xs[k] < xs[k - 1]:
            shell_tasks.append(("t", (xs[k] + 1, xs[k - 1] + 1, B)))
    shell_tasks.append(("t", (1, xs[k0] + 1, B)))
    t_shells = _map_tasks(sieve, workers, shell_tasks)
    partition_ok = t_shells == t_val

    # lower bound: each S-difference is a single pass over one shell, and
    # the companion upper-shell sums use the slower-shrinking cutoffs y_{k-1}
    lower_tasks = []
    upper_tasks = []
    for k in range(1, k0 + 1):
        if xs[k] >= xs[k - 1]:
            continue
        qmax = math.isqrt(ys[k])
        if qmax >= 1:
            lower_tasks.append(("s", (xs[k] + 1, xs[k - 1] + 1, qmax)))
        qmax_up = math.isqrt(ys[k - 1])
        if qmax_up >= 1:
            upper_tasks.append(("s", (xs[k] + 1, xs[k - 1] + 1, qmax_up)))
    lower = _map_tasks(sieve, workers, lower_tasks)
    upper = _map_tasks(sieve, workers, upper_tasks)
    lower_ok = t_val >= lower

    return TelescopeReport(lower_ok, partition_ok, k0, t_val, lower, upper)
