import math
import random

import numpy as np
import pytest

from qpc import (
    CacheFormatError,
    FactoredInteger,
    RationalBound,
    ResourceError,
    build_spf_sieve,
    factorize,
    load_sieve_cache,
    mobius,
    primes_up_to,
    r4,
    r4_star,
    save_sieve_cache,
    square_divisor_pairs,
)
from conftest import divisors_from_factors, r4_star_divisor_oracle


def trial_division_spf(n):
    for p in range(2, math.isqrt(n) + 1):
        if n % p == 0:
            return p
    return n


class TestSieve:
    def test_small_table(self):
        s = build_spf_sieve(10)
        assert [int(s.spf[i]) for i in range(2, 11)] == [2, 3, 2, 5, 2, 7, 2, 3, 2]

    def test_smallest_case(self):
        s = build_spf_sieve(2)
        assert int(s.spf[2]) == 2

    def test_primes_marked_as_themselves(self):
        s = build_spf_sieve(2000)
        for n in range(2, 2001):
            assert int(s.spf[n]) == trial_division_spf(n)

    def test_memory_budget(self):
        with pytest.raises(ResourceError):
            build_spf_sieve(10**6, memory_budget=1000)

    def test_limit_too_small(self):
        with pytest.raises(ValueError):
            build_spf_sieve(1)

    @pytest.mark.slow
    def test_spot_check_large_prime(self):
        # 9999991 is prime (trial division oracle)
        assert trial_division_spf(9999991) == 9999991
        s = build_spf_sieve(10**7)
        assert int(s.spf[9999991]) == 9999991


class TestFactorize:
    def test_twelve(self, sieve_small):
        assert factorize(12, sieve_small).factors == ((2, 2), (3, 1))

    def test_unit(self, sieve_small):
        assert factorize(1, sieve_small).factors == ()

    def test_prime(self, sieve_small):
        assert factorize(97, sieve_small).factors == ((97, 1),)

    def test_out_of_range(self, sieve_small):
        with pytest.raises(ResourceError):
            factorize(10**4 + 1, sieve_small)

    def test_round_trip_to_million(self, sieve_big):
        step = 1
        for n in range(1, 10**6 + 1, step):
            fac = sieve_big.factor_list(n)
            prod = 1
            for p, e in fac:
                prod *= p**e
            if prod != n:
                pytest.fail(f"round trip failed at {n}: {fac}")

    def test_invariants_enforced(self):
        with pytest.raises(ValueError):
            FactoredInteger(12, ((3, 1), (2, 2)))  # primes out of order
        with pytest.raises(ValueError):
            FactoredInteger(12, ((2, 1), (3, 1)))  # wrong product


class TestR4Star:
    def test_unit(self):
        assert r4_star(FactoredInteger(1, ())) == 1

    def test_two(self):
        # value 3 on any power of two
        assert r4_star(FactoredInteger(2, ((2, 1),))) == 3
        for mu in range(2, 8):
            assert r4_star(FactoredInteger(2**mu, ((2, mu),))) == 3

    def test_small_values(self, sieve_small):
        assert r4_star(factorize(3, sieve_small)) == 4
        assert r4_star(factorize(12, sieve_small)) == 12

    def test_divisor_sum_oracle(self, sieve_small):
        for d in range(1, 2001):
            fac = factorize(d, sieve_small)
            assert r4_star(fac) == r4_star_divisor_oracle(fac.factors), d

    def test_multiplicative(self, sieve_small):
        rng = random.Random(7)
        pairs = [(a, b) for a in range(1, 120) for b in range(1, 120) if math.gcd(a, b) == 1]
        pairs += [
            (a, b)
            for a, b in zip(rng.sample(range(1, 10**4), 500), rng.sample(range(1, 10**4), 500))
            if math.gcd(a, b) == 1
        ]
        for a, b in pairs:
            fa, fb = factorize(a, sieve_small), factorize(b, sieve_small)
            # coprime, so the factorization of a*b is the sorted union
            fab = FactoredInteger(a * b, tuple(sorted(fa.factors + fb.factors)))
            assert r4_star(fab) == r4_star(fa) * r4_star(fb)


def brute_quadruple_count(d):
    """Representation count by scanning all integer quadruples."""
    r = math.isqrt(d)
    count = 0
    for y1 in range(-r, r + 1):
        for y2 in range(-r, r + 1):
            t2 = d - y1 * y1 - y2 * y2
            if t2 < 0:
                continue
            for y3 in range(-math.isqrt(t2), math.isqrt(t2) + 1):
                rem = t2 - y3 * y3
                y4 = math.isqrt(rem)
                if y4 * y4 == rem:
                    count += 1 if y4 == 0 else 2
    return count


class TestR4:
    def test_tiny_values(self, sieve_small):
        assert r4(factorize(1, sieve_small)) == 8
        assert r4(factorize(2, sieve_small)) == 24
        assert r4(factorize(4, sieve_small)) == 24

    def test_brute_force_small(self, sieve_small):
        for d in range(1, 80):
            assert r4(factorize(d, sieve_small)) == brute_quadruple_count(d), d

    def test_representation_oracle_to_5000(self, sieve_small):
        # quadruple counts via exact convolution of the square-indicator sequence
        dmax = 5000
        r1 = np.zeros(dmax + 1, dtype=np.int64)
        r1[0] = 1
        for k in range(1, math.isqrt(dmax) + 1):
            r1[k * k] = 2
        table = np.convolve(np.convolve(r1, r1)[: dmax + 1], np.convolve(r1, r1)[: dmax + 1])
        for d in range(1, dmax + 1):
            assert r4(factorize(d, sieve_small)) == int(table[d])


class TestMobius:
    def test_values(self, sieve_small):
        assert mobius(factorize(1, sieve_small)) == 1
        assert mobius(factorize(4, sieve_small)) == 0
        assert mobius(factorize(6, sieve_small)) == 1
        assert mobius(factorize(30, sieve_small)) == -1

    def test_sum_over_divisors(self, sieve_small):
        # sum_{d | n} mu(d) = [n == 1]
        for n in range(1, 500):
            fac = factorize(n, sieve_small)
            total = sum(
                mobius(factorize(d, sieve_small)) for d in divisors_from_factors(fac.factors)
            )
            assert total == (1 if n == 1 else 0)


class TestSquareDivisorPairs:
    def test_unit(self, sieve_small):
        assert [(m, d.value) for m, d in square_divisor_pairs(factorize(1, sieve_small))] == [(1, 1)]

    def test_two(self, sieve_small):
        pairs = sorted((m, d.value) for m, d in square_divisor_pairs(factorize(2, sieve_small)))
        assert pairs == [(1, 16), (2, 4), (4, 1)]

    def test_pair_count_six(self, sieve_small):
        assert len(list(square_divisor_pairs(factorize(6, sieve_small)))) == 9  # tau(36)

    def test_reparametrization(self, sieve_small):
        # {n^4/m^2 : m | n^2} equals {d : d | n^4, n^4/d square}, for all n <= 1e4
        ns = range(1, 10**4 + 1)
        for n in ns:
            fac = factorize(n, sieve_small)
            via_pairs = sorted(d.value for _, d in square_divisor_pairs(fac))
            n4 = n**4
            fac4 = [(p, 4 * a) for p, a in fac.factors]
            direct = sorted(
                d
                for d in divisors_from_factors(fac4)
                if math.isqrt(n4 // d) ** 2 == n4 // d
            )
            assert via_pairs == direct, n

    def test_factored_d_is_consistent(self, sieve_small):
        for n in (12, 90, 97):
            for m, d in square_divisor_pairs(factorize(n, sieve_small)):
                assert m * m * d.value == n**4


class TestRationalBound:
    def test_reduction(self):
        b = RationalBound(6, 4)
        assert (b.numerator, b.denominator) == (3, 2)

    def test_exact_comparison(self):
        b = RationalBound(10, 3)  # 3.333...
        assert b.contains(3)
        assert not b.contains(4)

    def test_floor_squared_divide(self):
        b = RationalBound(7, 2)
        assert b.floor() == 3
        assert b.squared().contains(12)  # 49/4 = 12.25
        assert not b.squared().contains(13)
        assert b.divided_by(2) == RationalBound(7, 4)

    def test_bad_inputs(self):
        with pytest.raises(ValueError):
            RationalBound(1, 0)
        with pytest.raises(ValueError):
            RationalBound(-1, 2)


class TestPrimesUpTo:
    def test_small(self):
        assert primes_up_to(20).tolist() == [2, 3, 5, 7, 11, 13, 17, 19]
        assert primes_up_to(1).tolist() == []

    def test_counts(self):
        assert len(primes_up_to(10**4)) == 1229


class TestSieveCache:
    def test_round_trip(self, tmp_path):
        s = build_spf_sieve(5000)
        path = tmp_path / "sieve.sq4c"
        save_sieve_cache(s, path)
        loaded = load_sieve_cache(path)
        assert loaded.limit == 5000
        assert np.array_equal(loaded.spf, s.spf)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.sq4c"
        path.write_bytes(b"NOPE" + b"\x00" * 32)
        with pytest.raises(CacheFormatError):
            load_sieve_cache(path)

    def test_truncated(self, tmp_path):
        s = build_spf_sieve(100)
        path = tmp_path / "trunc.sq4c"
        save_sieve_cache(s, path)
        data = path.read_bytes()
        path.write_bytes(data[:-8])
        with pytest.raises(CacheFormatError):
            load_sieve_cache(path)

    def test_limit_validation(self, tmp_path):
        s = build_spf_sieve(100)
        path = tmp_path / "small.sq4c"
        save_sieve_cache(s, path)
        with pytest.raises(CacheFormatError):
            load_sieve_cache(path, min_limit=1000)

    def test_header_layout(self, tmp_path):
        s = build_spf_sieve(100)
        path = tmp_path / "layout.sq4c"
        save_sieve_cache(s, path)
        raw = path.read_bytes()
        assert raw[:4] == b"SQ4C"
        assert int.from_bytes(raw[4:8], "little") == 1
        assert int.from_bytes(raw[8:16], "little") == 100
        assert len(raw) == 16 + 4 * 101


def test_r4_star_promotes_past_machine_words():
    # sigma(p^3) for p = 2^31 - 1 exceeds 2^64; the result stays exact
    p = 2147483647
    d = FactoredInteger(p**3, ((p, 3),))
    value = r4_star(d)
    assert value == (p**4 - 1) // (p - 1)
    assert value > 2**64


def test_spf_entries_divide_and_are_prime(sieve_small):
    spf = sieve_small.spf
    for i in range(2, 5001):
        p = int(spf[i])
        assert i % p == 0
        assert int(spf[p]) == p  # p itself is prime
