"""Exact multivariate polynomials and truncated power series.

Coefficients are Python ints or Fractions (never floats).  A series is a
dict from exponent tuples to coefficients, plus a truncation rule: a
weight per variable and a maximum weighted degree.  max_degree None means
no truncation, i.e. an exact polynomial.

The weighting covers both uses in this package: total-degree truncation
for the trivariate identity checks (weights all 1) and X-degree truncation
for Euler-factor series in X = p^-s, Y = p^-w (weights (1, 0): the Y-degree
of X^k terms is bounded by construction).
"""

from __future__ import annotations

from fractions import Fraction


class TruncSeries:
    __slots__ = ("nvars", "weights", "max_degree", "coeffs")

    def __init__(self, nvars, coeffs=None, max_degree=None, weights=None):
        self.nvars = nvars
        self.weights = tuple(weights) if weights is not None else (1,) * nvars
        if len(self.weights) != nvars:
            raise ValueError("one weight per variable")
        self.max_degree = max_degree
        self.coeffs = {}
        if coeffs:
            for exps, c in coeffs.items():
                if c and self._keeps(exps):
                    self.coeffs[exps] = c

    # -- construction helpers ------------------------------------------

    @classmethod
    def constant(cls, value, nvars, max_degree=None, weights=None):
        out = cls(nvars, None, max_degree, weights)
        if value:
            out.coeffs[(0,) * nvars] = value
        return out

    @classmethod
    def monomial(cls, coef, exps, max_degree=None, weights=None):
        out = cls(len(exps), None, max_degree, weights)
        if coef and out._keeps(tuple(exps)):
            out.coeffs[tuple(exps)] = coef
        return out

    def _keeps(self, exps) -> bool:
        if self.max_degree is None:
            return True
        return sum(w * e for w, e in zip(self.weights, exps)) <= self.max_degree

    def _like(self) -> "TruncSeries":
        return TruncSeries(self.nvars, None, self.max_degree, self.weights)

    def _compatible(self, other: "TruncSeries") -> None:
        if (
            self.nvars != other.nvars
            or self.weights != other.weights
            or self.max_degree != other.max_degree
        ):
            raise ValueError("series have different variable/truncation profiles")

    # -- ring operations -----------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = TruncSeries.constant(other, self.nvars, self.max_degree, self.weights)
        self._compatible(other)
        out = self._like()
        out.coeffs = dict(self.coeffs)
        for exps, c in other.coeffs.items():
            new = out.coeffs.get(exps, 0) + c
            if new:
                out.coeffs[exps] = new
            else:
                out.coeffs.pop(exps, None)
        return out

    __radd__ = __add__

    def __neg__(self):
        out = self._like()
        out.coeffs = {e: -c for e, c in self.coeffs.items()}
        return out

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = TruncSeries.constant(other, self.nvars, self.max_degree, self.weights)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            out = self._like()
            if other:
                out.coeffs = {e: c * other for e, c in self.coeffs.items()}
            return out
        self._compatible(other)
        out = self._like()
        acc = out.coeffs
        keeps = self._keeps
        a_items = list(self.coeffs.items())
        b_items = list(other.coeffs.items())
        if len(a_items) > len(b_items):
            a_items, b_items = b_items, a_items
        for e1, c1 in a_items:
            for e2, c2 in b_items:
                exps = tuple(x + y for x, y in zip(e1, e2))
                if not keeps(exps):
                    continue
                new = acc.get(exps, 0) + c1 * c2
                if new:
                    acc[exps] = new
                else:
                    del acc[exps]
        return out

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers not supported; use inverse()")
        out = TruncSeries.constant(1, self.nvars, self.max_degree, self.weights)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base if n > 1 else base
            n >>= 1
        return out

    def inverse(self) -> "TruncSeries":
        """Multiplicative inverse up to the truncation degree.

        Requires a nonzero constant term, truncation enabled, and every
        non-constant monomial of positive weighted degree (so the geometric
        expansion terminates at max_degree).
        """
        if self.max_degree is None:
            raise ValueError("inverse is only defined for truncated series")
        zero = (0,) * self.nvars
        c0 = self.coeffs.get(zero, 0)
        if not c0:
            raise ZeroDivisionError("series has zero constant term")
        for exps in self.coeffs:
            if exps != zero and sum(w * e for w, e in zip(self.weights, exps)) < 1:
                raise ValueError("non-constant term of weighted degree 0; inverse diverges")
        inv_c0 = Fraction(1, c0) if not (c0 == 1 or c0 == -1) else (1 if c0 == 1 else -1)
        # u = 1 - self/c0, inverse = (1/c0) * sum_k u^k
        u = -(self * inv_c0)
        u.coeffs.pop(zero, None)
        out = TruncSeries.constant(1, self.nvars, self.max_degree, self.weights)
        term = TruncSeries.constant(1, self.nvars, self.max_degree, self.weights)
        for _ in range(self.max_degree):
            term = term * u
            if not term.coeffs:
                break
            out = out + term
        return out * inv_c0

    # -- queries ---------------------------------------------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = TruncSeries.constant(other, self.nvars, self.max_degree, self.weights)
        if not isinstance(other, TruncSeries):
            return NotImplemented
        if self.nvars != other.nvars:
            return False
        return self._normalized() == other._normalized()

    def __hash__(self):
        return hash((self.nvars, tuple(sorted(self._normalized().items()))))

    def _normalized(self) -> dict:
        return {e: Fraction(c) for e, c in self.coeffs.items() if c}

    def coefficient(self, exps) -> Fraction:
        return Fraction(self.coeffs.get(tuple(exps), 0))

    def set_zero(self, var: int) -> "TruncSeries":
        """Substitute 0 for one variable (keep only monomials without it)."""
        out = self._like()
        out.coeffs = {e: c for e, c in self.coeffs.items() if e[var] == 0}
        return out

    def __repr__(self):
        n = len(self.coeffs)
        return f"TruncSeries(nvars={self.nvars}, terms={n}, max_degree={self.max_degree})"


class RationalFunction:
    """Quotient of exact polynomials; equality by cross-multiplication.

    Just enough arithmetic to assemble closed forms of geometric series and
    compare them exactly, with no normalization or gcd computation.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: TruncSeries, den: TruncSeries):
        if den.max_degree is not None or num.max_degree is not None:
            raise ValueError("rational functions are built from exact polynomials")
        if not den.coeffs:
            raise ZeroDivisionError("zero denominator")
        self.num = num
        self.den = den

    @classmethod
    def from_poly(cls, poly: TruncSeries) -> "RationalFunction":
        return cls(poly, TruncSeries.constant(1, poly.nvars))

    def __add__(self, other: "RationalFunction") -> "RationalFunction":
        return RationalFunction(
            self.num * other.den + other.num * self.den, self.den * other.den
        )

    def __sub__(self, other: "RationalFunction") -> "RationalFunction":
        return RationalFunction(
            self.num * other.den - other.num * self.den, self.den * other.den
        )

    def __mul__(self, other: "RationalFunction") -> "RationalFunction":
        return RationalFunction(self.num * other.num, self.den * other.den)

    def __truediv__(self, other: "RationalFunction") -> "RationalFunction":
        if not other.num.coeffs:
            raise ZeroDivisionError("division by zero rational function")
        return RationalFunction(self.num * other.den, self.den * other.num)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RationalFunction):
            return NotImplemented
        return self.num * other.den == other.num * self.den

    def __hash__(self):  # pragma: no cover - not used as dict key
        return 0
