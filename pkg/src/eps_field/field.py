"""
Exact arithmetic in the ordered field of rational functions in an infinitesimal ε.

Elements are ordered by their behaviour as ε → 0⁺: the sign of a value is the
sign of its lowest-order nonzero coefficient, which is the sign of a(ε) for
every sufficiently small ε > 0.
"""

from fractions import Fraction
from typing import Iterable, List, Tuple, Union

from config import get_settings
from errors import DegreeCapExceeded, EpsDivisionByZero, PoleAtZero

Rational = Union[int, Fraction]

DEGREE_CAP = get_settings().eps_degree_cap


def _trim(coeffs: Iterable[Rational]) -> Tuple[Fraction, ...]:
    values = [Fraction(c) for c in coeffs]
    while values and values[-1] == 0:
        values.pop()
    return tuple(values)


class EpsPoly:
    """Polynomial in ε with exact rational coefficients (index = power of ε)."""

    __slots__ = ("_c",)

    def __init__(self, coeffs: Iterable[Rational] = ()):
        c = _trim(coeffs)
        if len(c) - 1 > DEGREE_CAP:
            raise DegreeCapExceeded(f"ε-degree {len(c) - 1} exceeds cap {DEGREE_CAP}")
        self._c = c

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls) -> "EpsPoly":
        return cls(())

    @classmethod
    def one(cls) -> "EpsPoly":
        return cls((1,))

    @classmethod
    def constant(cls, value: Rational) -> "EpsPoly":
        return cls((value,))

    @classmethod
    def eps_power(cls, k: int, coeff: Rational = 1) -> "EpsPoly":
        """coeff·ε^k"""
        if k < 0:
            raise ValueError("negative power of ε")
        return cls([0] * k + [coeff])

    # -- inspection ---------------------------------------------------------

    @property
    def coeffs(self) -> Tuple[Fraction, ...]:
        return self._c

    @property
    def degree(self) -> int:
        return len(self._c) - 1

    @property
    def is_zero(self) -> bool:
        return not self._c

    @property
    def is_constant(self) -> bool:
        return len(self._c) <= 1

    @property
    def constant_term(self) -> Fraction:
        return self._c[0] if self._c else Fraction(0)

    @property
    def valuation(self) -> int:
        """Index of the lowest nonzero coefficient (-1 for the zero polynomial)."""
        for i, c in enumerate(self._c):
            if c != 0:
                return i
        return -1

    @property
    def lowest_coefficient(self) -> Fraction:
        v = self.valuation
        return self._c[v] if v >= 0 else Fraction(0)

    def sign(self) -> int:
        low = self.lowest_coefficient
        return (low > 0) - (low < 0)

    def evaluate(self, x: Rational):
        """Horner evaluation; exact for rational x."""
        result = Fraction(0) if isinstance(x, (int, Fraction)) else 0.0
        for c in reversed(self._c):
            result = result * x + c
        return result

    # -- arithmetic ---------------------------------------------------------

    @staticmethod
    def _coerce(other) -> "EpsPoly":
        if isinstance(other, EpsPoly):
            return other
        if isinstance(other, (int, Fraction)):
            return EpsPoly.constant(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self._c, other._c
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return EpsPoly(out)

    __radd__ = __add__

    def __neg__(self) -> "EpsPoly":
        return EpsPoly(-c for c in self._c)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.is_zero or other.is_zero:
            return EpsPoly.zero()
        out = [Fraction(0)] * (len(self._c) + len(other._c) - 1)
        for i, a in enumerate(self._c):
            if a == 0:
                continue
            for j, b in enumerate(other._c):
                out[i + j] += a * b
        return EpsPoly(out)

    __rmul__ = __mul__

    def scale(self, factor: Rational) -> "EpsPoly":
        if factor == 0:
            return EpsPoly.zero()
        return EpsPoly(c * factor for c in self._c)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise EpsDivisionByZero("division of ε-polynomial by zero")
            return self.scale(Fraction(1) / Fraction(other))
        if isinstance(other, (EpsPoly, EpsRat)):
            return EpsRat(self) / other
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return EpsRat(EpsPoly.constant(other)) / self
        return NotImplemented

    def divmod(self, other: "EpsPoly") -> Tuple["EpsPoly", "EpsPoly"]:
        """Polynomial long division by degree (for gcd computation)."""
        if other.is_zero:
            raise EpsDivisionByZero("polynomial division by zero")
        rem = list(self._c)
        quot = [Fraction(0)] * max(len(rem) - len(other._c) + 1, 0)
        lead = other._c[-1]
        d = other.degree
        while len(rem) - 1 >= d and rem:
            shift = len(rem) - 1 - d
            factor = rem[-1] / lead
            quot[shift] = factor
            for j, c in enumerate(other._c):
                rem[shift + j] -= factor * c
            rem.pop()
            while rem and rem[-1] == 0:
                rem.pop()
        return EpsPoly(quot), EpsPoly(rem)

    def monic(self) -> "EpsPoly":
        if self.is_zero:
            return self
        return self.scale(1 / self._c[-1])

    # -- ordering -----------------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, EpsRat):
            return NotImplemented
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self._c == other._c

    def __hash__(self):
        if len(self._c) <= 1:
            return hash(self.constant_term)
        return hash(self._c)

    def _cmp(self, other) -> int:
        if isinstance(other, EpsRat):
            return -other._cmp(self)
        other = self._coerce(other)
        if other is NotImplemented:
            raise TypeError(f"cannot compare EpsPoly with {type(other).__name__}")
        return (self - other).sign()

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __bool__(self):
        return not self.is_zero

    def __repr__(self):
        return f"EpsPoly({_format_poly(self._c)})"

    def __str__(self):
        return _format_poly(self._c)


def _as_poly(value) -> EpsPoly:
    if isinstance(value, EpsPoly):
        return value
    if isinstance(value, (int, Fraction)):
        return EpsPoly.constant(value)
    raise TypeError(f"cannot interpret {type(value).__name__} as an ε-polynomial")


def _poly_gcd(a: EpsPoly, b: EpsPoly) -> EpsPoly:
    while not b.is_zero:
        _, r = a.divmod(b)
        a, b = b, r
    return a.monic()


def _shift_down(p: EpsPoly, k: int) -> EpsPoly:
    return EpsPoly(p.coeffs[k:]) if k else p


class EpsRat:
    """Rational function num/den in ε, kept in canonical form.

    Canonical: gcd(num, den) = 1 and the lowest-order nonzero coefficient of
    den equals 1. Zero is 0/1.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        num = _as_poly(num)
        den = EpsPoly.one() if den is None else _as_poly(den)
        if den.is_zero:
            raise EpsDivisionByZero("zero denominator")
        if num.is_zero:
            self.num, self.den = EpsPoly.zero(), EpsPoly.one()
            return
        # Common powers of ε first, then the remaining polynomial gcd.
        common = min(num.valuation, den.valuation)
        num, den = _shift_down(num, common), _shift_down(den, common)
        if den.degree > 0 and num.degree > 0:
            g = _poly_gcd(num, den)
            if g.degree > 0:
                num, den = num.divmod(g)[0], den.divmod(g)[0]
        lead = den.lowest_coefficient
        self.num = num.scale(1 / lead)
        self.den = den.scale(1 / lead)

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_poly(cls, p: EpsPoly) -> "EpsRat":
        return cls(p)

    @classmethod
    def from_arrays(cls, num: Iterable[Rational], den: Iterable[Rational]) -> "EpsRat":
        return cls(EpsPoly(num), EpsPoly(den))

    def to_arrays(self) -> Tuple[List[Fraction], List[Fraction]]:
        """Ascending coefficient arrays (numerator, denominator), no trailing zeros."""
        return list(self.num.coeffs), list(self.den.coeffs)

    # -- arithmetic ---------------------------------------------------------

    @staticmethod
    def _coerce(other) -> "EpsRat":
        if isinstance(other, EpsRat):
            return other
        if isinstance(other, (EpsPoly, int, Fraction)):
            return EpsRat(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.den == other.den:
            return EpsRat(self.num + other.num, self.den)
        return EpsRat(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return EpsRat(-self.num, self.den)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return EpsRat(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if other.num.is_zero:
            raise EpsDivisionByZero("division by the zero rational function")
        return EpsRat(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other / self

    # -- ordering -----------------------------------------------------------

    def sign(self) -> int:
        # den's lowest coefficient is 1 in canonical form
        return self.num.sign()

    def _cmp(self, other) -> int:
        other = self._coerce(other)
        if other is NotImplemented:
            raise TypeError("cannot compare EpsRat with this type")
        return (self - other).sign()

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        if self.den.is_constant and self.num.is_constant:
            return hash(self.num.constant_term)
        return hash((self.num.coeffs, self.den.coeffs))

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __bool__(self):
        return not self.num.is_zero

    # -- limits and evaluation ---------------------------------------------

    def limit_at_zero(self) -> Fraction:
        """Value of the reduced function at ε = 0."""
        if self.num.is_zero:
            return Fraction(0)
        if self.den.valuation > 0:
            raise PoleAtZero(f"{self} has a pole at ε = 0")
        return self.num.constant_term / self.den.constant_term

    def eval_at(self, eps0: Rational):
        d = self.den.evaluate(eps0)
        if d == 0:
            raise EpsDivisionByZero(f"denominator of {self} vanishes at {eps0}")
        return self.num.evaluate(eps0) / d

    def __repr__(self):
        return f"EpsRat({self})"

    def __str__(self):
        if self.den == EpsPoly.one():
            return _format_poly(self.num.coeffs)
        return f"({_format_poly(self.num.coeffs)})/({_format_poly(self.den.coeffs)})"


# ----------------------------------------------------------------------
# Module-level operations
# ----------------------------------------------------------------------

def sign(a) -> int:
    """Sign of a for all sufficiently small ε > 0."""
    return EpsRat._coerce(a).sign()


def compare(a, b) -> int:
    """-1, 0 or +1 as a <, =, > b in the ε → 0⁺ order."""
    return sign(EpsRat._coerce(a) - EpsRat._coerce(b))


def limit_at_zero(a) -> Fraction:
    return EpsRat._coerce(a).limit_at_zero()


def eval_at(a, eps0: Rational):
    return EpsRat._coerce(a).eval_at(eps0)


def _format_poly(coeffs: Tuple[Fraction, ...]) -> str:
    terms = []
    for power, c in enumerate(coeffs):
        if c == 0:
            continue
        mag = abs(c)
        if power == 0:
            body = str(mag)
        else:
            base = "ε" if power == 1 else f"ε^{power}"
            body = base if mag == 1 else f"{mag}{base}"
        terms.append(("-" if c < 0 else "+", body))
    if not terms:
        return "0"
    first_sign, first_body = terms[0]
    text = ("-" if first_sign == "-" else "") + first_body
    for s, body in terms[1:]:
        text += f" {s} {body}"
    return text
