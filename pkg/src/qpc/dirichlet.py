"""Euler factors of the double Dirichlet series and zeta evaluation.

The generating function of the counts is

    F(s, w) = sum_n n^-s sum_{d | n^4, n^4/d square} d^-w r4*(d)
            = zeta(s) zeta(s+2w-2) zeta(s+4w-4) * G(s, w),

where G is an Euler product whose local factors are verified here in two
independent ways: straight from the definition (divisor sums of r4* on
prime powers) and from the closed forms, as exact series in X = p^-s,
Y = p^-w.  The two formal power-series identities behind the closed forms
are checked both as truncated series and as exact polynomial identities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .arith import FactoredInteger, build_spf_sieve, primes_up_to, r4_star
from .errors import DomainError
from .series import RationalFunction, TruncSeries

# Bernoulli numbers B_2k for the Euler-Maclaurin tail.
_BERNOULLI = [
    Fraction(1, 6),
    Fraction(-1, 30),
    Fraction(1, 42),
    Fraction(-1, 30),
    Fraction(5, 66),
    Fraction(-691, 2730),
    Fraction(7, 6),
    Fraction(-3617, 510),
    Fraction(43867, 798),
    Fraction(-174611, 330),
    Fraction(854513, 138),
    Fraction(-236364091, 2730),
    Fraction(8553103, 6),
]

_EM_N = 24
_EM_K = 11

ZETA_TOLERANCE = 1e-12

CONVERGENCE_MARGIN = 1e-3  # epsilon in min_j Re(s+2jw-2j) >= 1/2 + epsilon


@dataclass(frozen=True)
class ZetaValue:
    s: float
    value: float
    error_bound: float


def _em_tail_coeffs(s: float, N: int, K: int) -> tuple[float, float]:
    """Euler-Maclaurin correction sum and first-omitted-term bound."""
    tail = 0.0
    rising = s  # s(s+1)...(s+2k-2)
    npow = N ** (-s - 1.0)
    for k in range(1, K + 1):
        b = _BERNOULLI[k - 1]
        tail += (b.numerator / b.denominator) / math.factorial(2 * k) * rising * npow
        rising *= (s + 2 * k - 1) * (s + 2 * k)
        npow /= N * N
    b_next = _BERNOULLI[K]
    omitted = abs(b_next.numerator / b_next.denominator) / math.factorial(2 * K + 2) * abs(
        rising
    ) * npow
    return tail, omitted


def zeta(s: float, tolerance: float = ZETA_TOLERANCE) -> ZetaValue:
    """Riemann zeta on the real axis s > 1 by Euler-Maclaurin summation.

    The error bound combines the first omitted correction term with a
    float-rounding allowance; the cutoff grows until the truncation part
    meets the tolerance.  Near s = 1 the rounding floor scales with the
    value (which blows up), so an absolute tolerance may be unreachable;
    the achievable bound is reported rather than failing.
    """
    if s <= 1.0:
        raise DomainError(f"zeta requires s > 1, got {s}")
    N = _EM_N
    while True:
        head = math.fsum(n ** (-s) for n in range(1, N))
        pole = N ** (1.0 - s) / (s - 1.0)
        half = 0.5 * N ** (-s)
        tail, omitted = _em_tail_coeffs(s, N, _EM_K)
        if omitted <= tolerance or N >= 1024:
            break
        N *= 2
    value = head + pole + half + tail
    rounding = 8.0 * abs(value) * 2.2e-16
    return ZetaValue(s, value, omitted + rounding)


def zeta_star(sigma: float) -> float:
    """(sigma - 1) * zeta(sigma), analytic through sigma = 1.

    The pole term of the Euler-Maclaurin formula contributes N^(1-sigma)
    exactly, so no cancellation occurs near (or at) sigma = 1.
    """
    s = float(sigma)
    head = math.fsum(n ** (-s) for n in range(1, _EM_N))
    tail, _ = _em_tail_coeffs(s, _EM_N, _EM_K)
    return (s - 1.0) * (head + 0.5 * _EM_N ** (-s) + tail) + _EM_N ** (1.0 - s)


# ----------------------------------------------------------------------
# local factors as exact series in X = p^-s, Y = p^-w
# ----------------------------------------------------------------------

_XW = (1, 0)  # truncate on X-degree only; Y-degree is 4*deg(X) + O(1) by construction

_LOCAL_DEG_CAP = 200


def _biv(coef: int, ex: int, ey: int, deg: int) -> TruncSeries:
    return TruncSeries.monomial(coef, (ex, ey), max_degree=deg, weights=_XW)


def _check_local_args(p: int, deg: int) -> None:
    if not (0 <= deg <= _LOCAL_DEG_CAP):
        raise ValueError(f"truncation degree must be in [0, {_LOCAL_DEG_CAP}]")
    if p < 2 or any(p % q == 0 for q in range(2, math.isqrt(p) + 1)):
        raise ValueError(f"{p} is not prime")


def local_factor_definition(p: int, deg: int = 30) -> TruncSeries:
    """F_p(s, w) from the definition:

        sum_{nu <= deg} X^nu sum_{0 <= mu <= 2 nu} Y^(2 mu) r4*(p^(2 mu)).
    """
    _check_local_args(p, deg)
    coeffs = {}
    r4s_cache = [1]
    ppow = 1
    for mu in range(1, 2 * deg + 1):
        ppow *= p * p
        r4s_cache.append(
            r4_star(FactoredInteger(ppow, ((p, 2 * mu),)))
        )
    for nu in range(deg + 1):
        for mu in range(2 * nu + 1):
            key = (nu, 2 * mu)
            coeffs[key] = coeffs.get(key, 0) + r4s_cache[mu]
    return TruncSeries(2, coeffs, max_degree=deg, weights=_XW)


def local_factor_closed_form(p: int, deg: int = 30) -> TruncSeries:
    """F_p(s, w) from the factored form: the three zeta-type factors

        prod_{0<=j<=2} (1 - p^(2j) X Y^(2j))^-1

    times the local correction G_p (odd p) or G_2."""
    _check_local_args(p, deg)
    one = TruncSeries.constant(1, 2, max_degree=deg, weights=_XW)
    zeta_part = one
    for j in range(3):
        zeta_part = zeta_part * (one - _biv(p ** (2 * j), 1, 2 * j, deg)).inverse()
    if p == 2:
        g = (
            (one + _biv(3, 1, 2, deg) + _biv(2, 1, 4, deg))
            * (one - _biv(1, 1, 4, deg)).inverse()
            * (one - _biv(4, 1, 2, deg))
            * (one - _biv(16, 1, 4, deg))
        )
    else:
        g = (
            (
                one
                + _biv(p * p + p + 1, 1, 2, deg)
                + _biv(p**3 + p * p + p, 1, 4, deg)
                + _biv(p**3, 2, 6, deg)
            )
            * (one - _biv(p * p, 1, 2, deg))
            * (one - _biv(1, 1, 4, deg)).inverse()
        )
    return zeta_part * g


# ----------------------------------------------------------------------
# the two formal power-series identities
# ----------------------------------------------------------------------

_IDENTITY_DEGREE = 40


def _tri(coef: int, exps: tuple[int, int, int], deg: int | None) -> TruncSeries:
    return TruncSeries.monomial(coef, exps, max_degree=deg)


def _geom_closed_lhs_1() -> RationalFunction:
    """Closed form of sum_nu x^nu sum_{mu<=2nu} y^(2mu) (1-z^(2mu+1))/(1-z)
    after summing the geometric series in nu."""
    one = RationalFunction.from_poly(TruncSeries.constant(1, 3))

    def mono(c, e):
        return RationalFunction.from_poly(_tri(c, e, None))

    inv_1mx = one / (one - mono(1, (1, 0, 0)))
    inv_1mxy4 = one / (one - mono(1, (1, 4, 0)))
    inv_1mxy4z4 = one / (one - mono(1, (1, 4, 4)))
    y2 = mono(1, (0, 2, 0))
    y2z2 = mono(1, (0, 2, 2))
    z = mono(1, (0, 0, 1))
    term1 = (inv_1mx - y2 * inv_1mxy4) / (one - y2)
    term2 = z * (inv_1mx - y2z2 * inv_1mxy4z4) / (one - y2z2)
    return (term1 - term2) / (one - z)


def _rhs_1(deg: int | None):
    num = (
        _tri(1, (0, 0, 0), deg)
        + _tri(1, (1, 2, 0), deg)
        + _tri(1, (1, 2, 1), deg)
        + _tri(1, (1, 2, 2), deg)
        + _tri(1, (1, 4, 1), deg)
        + _tri(1, (1, 4, 2), deg)
        + _tri(1, (1, 4, 3), deg)
        + _tri(1, (2, 6, 3), deg)
    )
    one = _tri(1, (0, 0, 0), deg)
    den = (one - _tri(1, (1, 0, 0), deg)) * (one - _tri(1, (1, 4, 0), deg)) * (
        one - _tri(1, (1, 4, 4), deg)
    )
    return num, den


def formal_identity_1() -> bool:
    """Verify the trivariate generating identity both ways:

    (a) the defining sum, truncated to total degree 40, equals the closed
        rational form expanded to the same truncation;
    (b) the geometric-series closed form of the left side equals the right
        side exactly, by polynomial cross-multiplication.
    """
    deg = _IDENTITY_DEGREE
    coeffs = {}
    for nu in range(deg + 1):
        for mu in range(2 * nu + 1):
            if nu + 2 * mu > deg:
                break
            for j in range(2 * mu + 1):
                if nu + 2 * mu + j > deg:
                    break
                key = (nu, 2 * mu, j)
                coeffs[key] = coeffs.get(key, 0) + 1
    lhs_trunc = TruncSeries(3, coeffs, max_degree=deg)
    num, den = _rhs_1(deg)
    rhs_trunc = num * den.inverse()
    if lhs_trunc != rhs_trunc:
        return False

    num_exact, den_exact = _rhs_1(None)
    rhs_exact = RationalFunction(num_exact, den_exact)
    return _geom_closed_lhs_1() == rhs_exact


def _geom_closed_lhs_2() -> RationalFunction:
    """Closed form of 1 + sum_{nu>=1} x^nu (1 + a sum_{1<=mu<=2nu} y^(2mu))."""
    one = RationalFunction.from_poly(TruncSeries.constant(1, 3))

    def mono(c, e):
        return RationalFunction.from_poly(_tri(c, e, None))

    x = mono(1, (1, 0, 0))
    y2 = mono(1, (0, 2, 0))
    a = mono(1, (0, 0, 1))
    xy4 = mono(1, (1, 4, 0))
    inv_1mx = one / (one - x)
    inv_1my2 = one / (one - y2)
    inv_1mxy4 = one / (one - xy4)
    return inv_1mx + a * x * y2 * inv_1mx * inv_1my2 - a * mono(1, (1, 6, 0)) * inv_1my2 * inv_1mxy4


def _rhs_2(deg: int | None):
    # variables (x, y, a); numerator 1 + a x y^2 + (a - 1) x y^4
    num = (
        _tri(1, (0, 0, 0), deg)
        + _tri(1, (1, 2, 1), deg)
        + _tri(1, (1, 4, 1), deg)
        + _tri(-1, (1, 4, 0), deg)
    )
    one = _tri(1, (0, 0, 0), deg)
    den = (one - _tri(1, (1, 0, 0), deg)) * (one - _tri(1, (1, 4, 0), deg))
    return num, den


def formal_identity_2() -> bool:
    """Same two-route verification for the bivariate-with-parameter identity
    in the variables (x, y, a)."""
    deg = _IDENTITY_DEGREE
    coeffs = {(0, 0, 0): 1}
    for nu in range(1, deg + 1):
        coeffs[(nu, 0, 0)] = coeffs.get((nu, 0, 0), 0) + 1
        for mu in range(1, 2 * nu + 1):
            if nu + 2 * mu + 1 > deg:
                break
            key = (nu, 2 * mu, 1)
            coeffs[key] = coeffs.get(key, 0) + 1
    lhs_trunc = TruncSeries(3, coeffs, max_degree=deg)
    num, den = _rhs_2(deg)
    if lhs_trunc != num * den.inverse():
        return False

    num_exact, den_exact = _rhs_2(None)
    return _geom_closed_lhs_2() == RationalFunction(num_exact, den_exact)


# ----------------------------------------------------------------------
# the Euler product G(s, w) and the global factorization
# ----------------------------------------------------------------------


def _exponent_triple(s: float, w: float) -> tuple[float, float, float]:
    return (s, s + 2 * w - 2, s + 4 * w - 4)


def _check_convergence_domain(s: float, w: float) -> tuple[float, float, float]:
    es = _exponent_triple(s, w)
    if min(es) < 0.5 + CONVERGENCE_MARGIN:
        raise DomainError(
            f"(s, w)=({s}, {w}) outside the absolute-convergence domain: "
            f"min exponent {min(es):.6f} < {0.5 + CONVERGENCE_MARGIN}"
        )
    return es


def g_factor_odd(p, s: float, w: float):
    """G_p(s, w) for odd p (works on numpy arrays of p)."""
    t = (
        1.0
        + (p * p + p + 1) * p ** (-(s + 2 * w))
        + (p**3 + p * p + p) * p ** (-(s + 4 * w))
        + p**3.0 * p ** (-(2 * s + 6 * w))
    )
    return t * (1.0 - p * p * p ** (-(s + 2 * w))) / (1.0 - p ** (-(s + 4 * w)))


def g_factor_2(s: float, w: float) -> float:
    """G_2(s, w) from its own closed form (the prime 2 is special)."""
    val = (1.0 + 3.0 * 2 ** (-s - 2 * w) + 2 ** (-s - 4 * w + 1)) / (
        1.0 - 2 ** (-s - 4 * w)
    )
    for j in (1, 2):
        val *= 1.0 - 2 ** (-(s + 2 * j * w - 2 * j))
    return val


def _g_tail_log_bound(s: float, w: float, pmin: float) -> float:
    """Rigorous bound on sum_{p > P} |log G_p| for P >= pmin >= 3.

    G_p - 1 = (sum of signed p-power monomials) / (1 - p^-(e2+4)); the
    monomial exponents follow from expanding the closed form, and exact
    cancellations between them (decisive at (s,w)=(1,1)) are kept by
    merging equal exponents before bounding.
    """
    _, e1, e2 = _exponent_triple(s, w)
    monomials = [
        (1.0, e1 + 1),
        (1.0, e1 + 2),
        (1.0, e2 + 1),
        (1.0, e2 + 2),
        (1.0, e2 + 3),
        (-1.0, 2 * e1),
        (-1.0, 2 * e1 + 1),
        (-1.0, 2 * e1 + 2),
        (-1.0, e1 + e2 + 1),
        (-1.0, e1 + e2 + 2),
        (-1.0, 2 * e1 + e2 + 3),
        (1.0, e2 + 4),
    ]
    merged: dict[float, float] = {}
    for c, e in monomials:
        key = round(e, 9)
        merged[key] = merged.get(key, 0.0) + c
    merged = {e: c for e, c in merged.items() if abs(c) > 1e-12}
    m = min(merged)
    # |numerator| <= C p^-m for p >= pmin, folding the exponent gaps into C
    c_num = sum(abs(c) * pmin ** (-(e - m)) for e, c in merged.items())
    c_all = c_num / (1.0 - pmin ** (-(e2 + 4)))
    top = c_all * pmin ** (-m)
    if top >= 0.5:
        # far from the asymptotic regime; fall back to a crude doubling
        return math.inf
    c_log = c_all / (1.0 - top)
    # sum_{n > P} n^-m <= P^(1-m)/(m-1)
    return c_log * pmin ** (1.0 - m) / (m - 1.0)


def g_value(s: float, w: float, prime_limit: int) -> tuple[float, float]:
    """Partial Euler product of G over p <= prime_limit, with a certified
    absolute tail bound.

    Raises DomainError outside min_j(s + 2jw - 2j) >= 1/2 + margin.  The
    product is reduced in a fixed order, so results are reproducible.
    """
    _check_convergence_domain(s, w)
    value = 1.0
    log_tail = 0.0
    if prime_limit >= 2:
        value *= g_factor_2(s, w)
    else:
        log_tail += abs(math.log(g_factor_2(s, w)))
    ps = primes_up_to(prime_limit)
    odd = ps[ps > 2]
    if odd.size:
        value *= float(np.prod(g_factor_odd(odd.astype(np.float64), s, w)))
    # analytic bound beyond max(prime_limit, 10); explicit factors in between
    analytic_from = max(prime_limit, 10)
    for p in (3, 5, 7):
        if p > prime_limit:
            log_tail += abs(math.log(float(g_factor_odd(float(p), s, w))))
    log_tail += _g_tail_log_bound(s, w, float(analytic_from))
    tail_bound = abs(value) * math.expm1(log_tail) if math.isfinite(log_tail) else math.inf
    return value, tail_bound


def global_series_check(s: float, w: float, N: int, prime_limit: int) -> float:
    """|LHS - RHS| for the factorization of the double Dirichlet series:

      LHS = sum_{n <= N} n^-s sum_{m | n^2} (n^4/m^2)^-w r4*(n^4/m^2)
      RHS = zeta(s) zeta(s+2w-2) zeta(s+4w-4) G(s, w)  (product to prime_limit).
    """
    if s <= 5 or w <= 0:
        raise DomainError(f"series converges for s > 5, w > 0; got ({s}, {w})")
    sieve = build_spf_sieve(max(N, 2))
    terms = []
    for n in range(1, N + 1):
        # divisors q of n^2 paired with r4*(q^2), built multiplicatively
        qs = [1]
        ws = [1]
        for p, a in sieve.factor_list(n):
            pk = 1
            pows = [1]
            wts = [1]
            for b in range(1, 2 * a + 1):
                pk *= p
                pows.append(pk)
                wts.append(3 if p == 2 else (pk * pk * p - 1) // (p - 1))
            qs = [q * pb for pb in pows for q in qs]
            ws = [wq * wb for wb in wts for wq in ws]
        inner = [float(q * q) ** (-w) * wq for q, wq in zip(qs, ws)]
        terms.append(float(n) ** (-s) * math.fsum(inner))
    lhs = math.fsum(terms)
    e0, e1, e2 = _exponent_triple(s, w)
    rhs = (
        zeta(e0).value
        * zeta(e1).value
        * zeta(e2).value
        * g_value(s, w, prime_limit)[0]
    )
    return abs(lhs - rhs)
