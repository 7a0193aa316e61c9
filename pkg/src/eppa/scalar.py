"""Exact scalars in Q or a real quadratic field Q(sqrt(d)).

A :class:`Scalar` stores ``a + b*sqrt(d)`` with ``a, b`` reduced
fractions and ``d`` a square-free integer greater than one.  Pure
rationals have ``b == 0`` and no discriminant, so they combine freely with
values from any quadratic field.  Two irrational values over different
discriminants raise :class:`~eppa.errors.ContextError`.

Text form: ``"p/q"`` for rationals and ``"p/q+r/s*sqrt(d)"`` otherwise.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from numbers import Rational

from .errors import ContextError, MalformedInputError

__all__ = ["Scalar", "normalize", "compare", "parse_scalar", "format_scalar", "as_scalar"]


def _squarefree_split(d: int) -> tuple[int, int]:
    """Return (k, s) with d = k*k*s and s square-free."""
    k, s = 1, 1
    p = 2
    while p * p <= d:
        while d % (p * p) == 0:
            d //= p * p
            k *= p
        if d % p == 0:
            d //= p
            s *= p
        p += 1
    return k, s * d


def _sign(x: Fraction) -> int:
    return (x > 0) - (x < 0)


class Scalar:
    __slots__ = ("a", "b", "d")

    def __init__(self, a=0, b=0, d=None):
        a = Fraction(a)
        b = Fraction(b)
        if b == 0:
            d = None
        else:
            if d is None:
                raise MalformedInputError("radical part given without a discriminant")
            d = int(d)
            if d <= 0:
                raise MalformedInputError(f"discriminant must be positive, got {d}")
            k, d = _squarefree_split(d)
            b *= k
            if d == 1:
                a, b, d = a + b, Fraction(0), None
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "d", d)

    def __setattr__(self, name, value):
        raise AttributeError("Scalar is immutable")

    @classmethod
    def sqrt_of(cls, d) -> "Scalar":
        """sqrt(d) for a positive integer d."""
        return cls(0, 1, d)

    # --- helpers -------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Scalar):
            return other
        if isinstance(other, (int, Rational)):
            return Scalar(other)
        return NotImplemented

    @staticmethod
    def _common_d(x: "Scalar", y: "Scalar"):
        if x.d is None:
            return y.d
        if y.d is None or y.d == x.d:
            return x.d
        raise ContextError(f"mixed discriminants sqrt({x.d}) and sqrt({y.d})")

    @property
    def is_rational(self) -> bool:
        return self.b == 0

    def conjugate(self) -> "Scalar":
        return Scalar(self.a, -self.b, self.d)

    def norm(self) -> Fraction:
        """Field norm a^2 - d*b^2."""
        if self.d is None:
            return self.a * self.a
        return self.a * self.a - self.d * self.b * self.b

    # --- arithmetic ----------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        d = self._common_d(self, other)
        return Scalar(self.a + other.a, self.b + other.b, d)

    __radd__ = __add__

    def __neg__(self):
        return Scalar(-self.a, -self.b, self.d)

    def __pos__(self):
        return self

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        d = self._common_d(self, other)
        if d is None:
            return Scalar(self.a * other.a)
        return Scalar(
            self.a * other.a + d * self.b * other.b,
            self.a * other.b + self.b * other.a,
            d,
        )

    __rmul__ = __mul__

    def inverse(self) -> "Scalar":
        if self.b == 0:
            if self.a == 0:
                raise ZeroDivisionError("Scalar division by zero")
            return Scalar(1 / self.a)
        n = self.norm()
        return Scalar(self.a / n, -self.b / n, self.d)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        self._common_d(self, other)
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        out = Scalar(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # --- order ---------------------------------------------------------
    def sign(self) -> int:
        a, b = self.a, self.b
        if b == 0:
            return _sign(a)
        sa, sb = _sign(a), _sign(b)
        if sa >= 0 and sb >= 0:
            return 1
        if sa <= 0 and sb <= 0:
            return -1
        # opposite signs: compare a^2 with d*b^2
        diff = a * a - self.d * b * b
        return sa if diff > 0 else sb if diff < 0 else 0

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self.a == other.a and self.b == other.b and (self.b == 0 or self.d == other.d)

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    def _cmp(self, other) -> int:
        other = self._coerce(other)
        if other is NotImplemented:
            raise TypeError(f"cannot compare Scalar with {type(other).__name__}")
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
        return self.a != 0 or self.b != 0

    def __abs__(self):
        return -self if self.sign() < 0 else self

    # --- square roots --------------------------------------------------
    def sqrt(self) -> "Scalar | None":
        """Exact square root inside the current field, or None.

        Rationals only get rational roots here; :func:`rational_sqrt` can
        introduce a fresh discriminant.
        """
        s = self.sign()
        if s < 0:
            return None
        if s == 0:
            return Scalar(0)
        if self.b == 0:
            r = _fraction_sqrt(self.a)
            if r is not None:
                return Scalar(r)
            return None
        # (x + y*sqrt d)^2 = x^2 + d y^2 + 2xy sqrt d
        n = _fraction_sqrt(self.norm())
        if n is None:
            return None
        for cand in ((self.a + n) / 2, (self.a - n) / 2):
            x = _fraction_sqrt(cand)
            if x is not None and x != 0:
                y = self.b / (2 * x)
                root = Scalar(x, y, self.d)
                return root if root.sign() > 0 else -root
            if x == 0:
                # pure radical root: y^2 d = a, 2xy = b forces b = 0
                continue
        return None

    def __float__(self):
        if self.b == 0:
            return float(self.a)
        return float(self.a) + float(self.b) * math.sqrt(self.d)

    def __repr__(self):
        return f"Scalar({format_scalar(self)!r})"

    def __str__(self):
        return format_scalar(self)

    def __reduce__(self):
        return (Scalar, (self.a, self.b, self.d))


def _fraction_sqrt(x: Fraction) -> Fraction | None:
    if x < 0:
        return None
    p, q = x.numerator, x.denominator
    rp, rq = math.isqrt(p), math.isqrt(q)
    if rp * rp == p and rq * rq == q:
        return Fraction(rp, rq)
    return None


def rational_sqrt(x) -> Scalar:
    """Square root of a non-negative rational, possibly in a new quadratic field."""
    x = Fraction(x)
    if x < 0:
        raise MalformedInputError("square root of a negative rational")
    # sqrt(p/q) = sqrt(p*q)/q
    k, s = _squarefree_split(x.numerator * x.denominator) if x else (0, 1)
    if x == 0:
        return Scalar(0)
    return Scalar(0, Fraction(k, x.denominator), s) if s != 1 else Scalar(Fraction(k, x.denominator))


def as_scalar(x) -> Scalar:
    if isinstance(x, Scalar):
        return x
    if isinstance(x, str):
        return parse_scalar(x)
    if isinstance(x, (int, Rational)):
        return Scalar(x)
    raise MalformedInputError(f"cannot interpret {x!r} as an exact scalar")


def normalize(p_num, p_den=1, q_num=0, q_den=1, d=None) -> Scalar:
    """Canonical scalar from an unreduced ``p_num/p_den + q_num/q_den*sqrt(d)``."""
    if p_den == 0 or q_den == 0:
        raise MalformedInputError("zero denominator")
    return Scalar(Fraction(p_num, p_den), Fraction(q_num, q_den), d if q_num else None)


def compare(x, y) -> str:
    """Exact three-way comparison returning ``"less"``, ``"equal"`` or ``"greater"``."""
    s = (as_scalar(x) - as_scalar(y)).sign()
    return ("less", "equal", "greater")[s + 1]


_FRAC = r"[+-]?\d+(?:/[+-]?\d+)?"
_RADICAL = re.compile(
    rf"^\s*(?:(?P<a>{_FRAC})\s*)?(?:(?P<op>[+-])?\s*(?:(?P<b>\d+(?:/[+-]?\d+)?)\s*\*\s*)?sqrt\(\s*(?P<d>\d+)\s*\))?\s*$"
)


def _parse_fraction(text: str) -> Fraction:
    if "/" in text:
        num, den = text.split("/")
        if int(den) == 0:
            raise MalformedInputError(f"zero denominator in {text!r}")
        return Fraction(int(num), int(den))
    return Fraction(int(text))


def parse_scalar(text: str) -> Scalar:
    """Parse ``"p/q"``, ``"p/q+r/s*sqrt(d)"``, ``"sqrt(d)"`` and similar."""
    if not isinstance(text, str):
        return as_scalar(text)
    m = _RADICAL.match(text)
    if not m or (m.group("a") is None and m.group("d") is None):
        raise MalformedInputError(f"not an exact scalar: {text!r}")
    a = _parse_fraction(m.group("a")) if m.group("a") is not None else Fraction(0)
    if m.group("d") is None:
        return Scalar(a)
    b = _parse_fraction(m.group("b")) if m.group("b") is not None else Fraction(1)
    if m.group("op") == "-":
        b = -b
    elif m.group("op") is None and m.group("a") is not None:
        raise MalformedInputError(f"missing sign before radical in {text!r}")
    d = int(m.group("d"))
    if d == 0:
        return Scalar(a)
    return Scalar(a, b, d)


def _fmt_frac(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def format_scalar(x) -> str:
    x = as_scalar(x)
    if x.b == 0:
        return _fmt_frac(x.a)
    sign = "-" if x.b < 0 else "+"
    return f"{_fmt_frac(x.a)}{sign}{_fmt_frac(abs(x.b))}*sqrt({x.d})"
