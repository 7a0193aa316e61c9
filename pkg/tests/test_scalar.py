from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eppa.errors import ContextError, MalformedInputError
from eppa.scalar import Scalar, compare, format_scalar, normalize, parse_scalar, rational_sqrt

fractions = st.fractions(min_value=-50, max_value=50, max_denominator=40)


@st.composite
def quad(draw, d=2):
    return Scalar(draw(fractions), draw(fractions), d)


def test_normalize_reduces_fractions():
    assert normalize(2, 4) == Scalar(Fraction(1, 2))
    assert format_scalar(normalize(2, 4, 0, 1, 2)) == "1/2"


def test_normalize_reduces_radical_part():
    assert format_scalar(normalize(1, 1, 2, 2, 2)) == "1/1+1/1*sqrt(2)"


def test_normalize_fixes_signs():
    x = normalize(3, 6, -2, -4, 2)
    assert format_scalar(x) == "1/2+1/2*sqrt(2)"
    assert x.a.denominator > 0 and x.b.denominator > 0


def test_normalize_rejects_zero_denominator():
    with pytest.raises(MalformedInputError):
        normalize(1, 0)


def test_equal_values_have_identical_forms():
    assert normalize(6, 4, 4, 8, 8) == normalize(3, 2, 1, 1, 2)  # sqrt(8) = 2*sqrt(2)
    assert format_scalar(normalize(6, 4, 4, 8, 8)) == format_scalar(normalize(3, 2, 1, 1, 2))


def test_compare_examples():
    assert compare(Fraction(1, 2), Fraction(3, 4)) == "less"
    assert compare(Scalar(1), Scalar(0, 1, 2)) == "less"
    x = Scalar(Fraction(5, 7), Fraction(-3, 11), 3)
    assert compare(x, x) == "equal"


def test_mixed_discriminants_raise():
    with pytest.raises(ContextError):
        compare(Scalar(0, 1, 2), Scalar(0, 1, 3))


def test_text_round_trip_and_parser_forms():
    for text in ["1/1", "-3/7", "1/2+1/3*sqrt(5)", "0/1-2/1*sqrt(2)"]:
        assert format_scalar(parse_scalar(text)) == text
    assert parse_scalar("sqrt(2)") == Scalar(0, 1, 2)
    assert parse_scalar("3") == Scalar(3)
    assert parse_scalar("-3/6") == Scalar(Fraction(-1, 2))
    with pytest.raises(MalformedInputError):
        parse_scalar("1/2 sqrt(2)")


def test_square_roots():
    assert Scalar(Fraction(9, 4)).sqrt() == Scalar(Fraction(3, 2))
    root = (Scalar(3, 2, 2)).sqrt()  # (1 + sqrt 2)^2
    assert root == Scalar(1, 1, 2)
    assert Scalar(2).sqrt() is None
    assert rational_sqrt(Fraction(1, 2)) == Scalar(0, Fraction(1, 2), 2)


@given(quad(), quad(), quad())
def test_field_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert a * (b + c) == a * b + a * c
    if b:
        assert (a / b) * b == a


@given(quad(), quad(), quad())
def test_total_order(a, b, c):
    results = [compare(a, b) == k for k in ("less", "equal", "greater")]
    assert sum(results) == 1
    if compare(a, b) != "greater" and compare(b, c) != "greater":
        assert compare(a, c) != "greater"


@settings(max_examples=1000, deadline=None)
@given(quad(d=2), quad(d=2))
def test_compare_agrees_with_high_precision(a, b):
    mpmath.mp.prec = 256  # far beyond 64 fractional bits
    diff = (mpmath.mpf(a.a.numerator) / a.a.denominator + mpmath.mpf(a.b.numerator) / a.b.denominator
            * mpmath.sqrt(2)) - (mpmath.mpf(b.a.numerator) / b.a.denominator
                                 + mpmath.mpf(b.b.numerator) / b.b.denominator * mpmath.sqrt(2))
    expected = "equal" if a == b else ("less" if diff < 0 else "greater")
    assert compare(a, b) == expected
