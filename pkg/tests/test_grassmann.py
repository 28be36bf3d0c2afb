from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from supergeom.errors import ConfigurationError
from supergeom.grassmann import GeneratorSet, GrassmannElement, Parity, merge_sign

from strategies import grassmann_elements, homogeneous

G2 = GeneratorSet(2, 0)
G = GeneratorSet(2, 6)


def gen(label, gens=G2):
    return GrassmannElement.generator(gens, label)


# -- examples -----------------------------------------------------------------
def test_anticommutation():
    e1, e2 = gen("e1"), gen("e2")
    assert (e1 * e2).terms == {0b11: 1}
    assert (e2 * e1).terms == {0b11: -1}


def test_nilpotence():
    assert (gen("e1") * gen("e1")).is_zero()


def test_expand_product_of_sums():
    # (1 + e1)(1 + e2) = 1 + e1 + e2 + e1 e2, four terms
    p = (1 + gen("e1")) * (1 + gen("e2"))
    assert p.terms == {0: 1, 0b01: 1, 0b10: 1, 0b11: 1}


def test_square_of_one_plus_generator():
    # (1 + e1)^2 = 1 + 2 e1 (the e1 e1 term vanishes)
    p = (1 + gen("e1")) * (1 + gen("e1"))
    assert p.coefficient_of(["e1"]) == 2
    assert p.terms == {0: 1, 0b01: 2}


def test_parity_examples():
    e1, e2 = gen("e1"), gen("e2")
    assert (1 + e1 * e2).parity() is Parity.EVEN
    assert e1.parity() is Parity.ODD
    assert (1 + e1).parity() is Parity.MIXED


def test_coefficient_of_examples():
    x = GrassmannElement.monomial(G2, ["e1", "e2"], 3)
    assert x.coefficient_of(["e1", "e2"]) == 3
    assert x.coefficient_of(0b11) == 3
    assert x.coefficient_of(["e2", "e1"]) == -3
    assert gen("e1").coefficient_of([]) == 0


def test_mismatched_algebras_rejected():
    with pytest.raises(ConfigurationError):
        gen("e1", G2) * gen("e1", GeneratorSet(2, 1))
    with pytest.raises(ConfigurationError):
        GrassmannElement.scalar(G2, 1) + GrassmannElement.scalar(G2, 1.0, "float")


def test_generator_limit():
    GeneratorSet(2, 60)
    with pytest.raises(ConfigurationError):
        GeneratorSet(2, 61)


def test_rational_ring_rejects_floats():
    with pytest.raises(ConfigurationError):
        GrassmannElement.scalar(G2, 0.5)


def test_merge_sign():
    # sign of moving the second ascending word into the first
    assert merge_sign(0b01, 0b10) == 1
    assert merge_sign(0b10, 0b01) == -1
    assert merge_sign(0b101, 0b010) == -1


def test_text_round_trip_example():
    x = GrassmannElement.from_text(G, "3 + 2*b1^b2 - e1^e2")
    assert x.coefficient_of([]) == 3
    assert x.coefficient_of(["b1", "b2"]) == 2
    assert x.coefficient_of(["e1", "e2"]) == -1
    assert GrassmannElement.from_text(G, x.to_text()) == x


def test_text_parses_unordered_monomials():
    assert GrassmannElement.from_text(G2, "e2^e1") == -gen("e1") * gen("e2")


def test_inverse():
    x = GrassmannElement.from_text(G, "2 + b1^b2 - 3*e1^b3")
    assert x * x.inverse() == GrassmannElement.scalar(G, 1)
    with pytest.raises(ZeroDivisionError):
        gen("e1").inverse()


# -- properties ---------------------------------------------------------------
@given(grassmann_elements(), grassmann_elements(), grassmann_elements())
def test_associativity(a, b, c):
    assert (a * b) * c == a * (b * c)


@given(homogeneous(), homogeneous())
def test_super_commutativity(ap, bp):
    (a, p), (b, q) = ap, bp
    assert a * b == (b * a) * (-1 if p and q else 1)


@given(grassmann_elements(), grassmann_elements(), grassmann_elements())
def test_distributivity(a, b, c):
    assert a * (b + c) == a * b + a * c


@given(grassmann_elements(ring="float"), grassmann_elements(ring="float"))
def test_float_matches_exact(a, b):
    exact = (a.to_ring("float") * b.to_ring("float"))
    ra = GrassmannElement(a.gens, {m: Fraction(c) for m, c in a.items()})
    rb = GrassmannElement(b.gens, {m: Fraction(c) for m, c in b.items()})
    want = (ra * rb).to_ring("float")
    assert (exact - want).max_abs() <= 1e-12


@given(st.lists(st.sampled_from(G.labels), min_size=G.count + 1, max_size=G.count + 3))
def test_degree_truncation(labels):
    out = GrassmannElement.scalar(G, 1)
    for lab in labels:
        out = out * GrassmannElement.generator(G, lab)
    assert out.is_zero()


@given(grassmann_elements())
def test_parity_query(a):
    if a.is_zero():
        return
    pars = {bin(m).count("1") % 2 for m, _ in a.items()}
    expect = Parity.MIXED if len(pars) == 2 else (Parity.ODD if pars == {1} else Parity.EVEN)
    assert a.parity() is expect


@given(grassmann_elements())
def test_text_round_trip(a):
    assert GrassmannElement.from_text(a.gens, a.to_text()) == a


@given(grassmann_elements())
def test_no_stored_zeros(a):
    assert all(c != 0 for _, c in (a * 0 + a).items())
