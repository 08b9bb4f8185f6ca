from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lgtt.poly import (
    DeformationFamily,
    GaussianRational,
    InfiniteGroupError,
    LaurentPolynomial,
    ParseError,
    classify_invertible,
    diagonal_symmetries,
    parse_complex,
    parse_polynomial,
    partial_derivative,
    quasi_weights,
    twisted_sector,
)

from conftest import poly


def test_parse_cubic():
    p = poly("z^3/3 - z")
    assert p.terms == {(3,): F(1, 3), (1,): -1}


def test_parse_laurent_triangle():
    p = parse_polynomial("z1 + z2 + 1/(z1*z2)", ["z1", "z2"])
    assert set(p.terms) == {(1, 0), (0, 1), (-1, -1)}
    assert not p.is_polynomial


def test_parse_zero():
    assert poly("0").terms == {}


def test_parse_errors():
    with pytest.raises(ParseError):
        poly("z^^2")
    with pytest.raises(ParseError):
        poly("w + 1")


def test_partial_derivatives():
    assert partial_derivative(poly("z^3/3 - z"), 0) == poly("z^2 - 1")
    assert partial_derivative(poly("z + 1/z"), 0, logarithmic=True) == poly("z - 1/z")
    q = parse_polynomial("z1 + z2 + 1/(z1*z2)", ["z1", "z2"])
    assert partial_derivative(q, 0) == parse_polynomial("1 - 1/(z1^2*z2)", ["z1", "z2"])
    with pytest.raises(IndexError):
        partial_derivative(q, 2)


@pytest.mark.parametrize("text,vars,q", [
    ("x^3 + y^4", "xy", (F(1, 3), F(1, 4))),
    ("x^3 + x*y^3", "xy", (F(1, 3), F(2, 9))),
    ("x^2 + x", "x", None),
])
def test_quasi_weights(text, vars, q):
    w = quasi_weights(parse_polynomial(text, list(vars)))
    assert (w.q if w else None) == q


def test_weights_annihilate_every_monomial():
    p = parse_polynomial("x^3*y + y^4 + x*z^5", list("xyz"))
    w = quasi_weights(p)
    for e in p.terms:
        assert sum(F(a) * b for a, b in zip(e, w.q)) == 1


def test_invertible_types():
    assert [b.kind for b in classify_invertible(poly("z^7"))] == ["Fermat"]
    loop = classify_invertible(parse_polynomial("x^2*y + y^3*z + z^4*x", list("xyz")))
    assert [b.kind for b in loop] == ["Loop"]
    chain = classify_invertible(parse_polynomial("x^3 + x*y^3", list("xy")))
    assert [b.kind for b in chain] == ["Chain"]
    bad = classify_invertible(parse_polynomial("x^3 + y^3 + z^3 + x*y*z", list("xyz")))
    assert not bad and "term count" in bad.reason


def test_invertible_blocks_sum_back():
    p = parse_polynomial("x^3 + x*y^3 + z^5 + u^2*w + w^3*u", list("xyzuw"))
    blocks = classify_invertible(p)
    total = blocks[0].polynomial
    for b in blocks[1:]:
        total = total + b.polynomial
    assert total == p


@pytest.mark.parametrize("text,vars,order,jw", [
    ("x^3 + y^3", "xy", 9, (F(1, 3), F(1, 3))),
    ("z^2", "z", 2, (F(1, 2),)),
    ("x^3 + x*y^3", "xy", 9, (F(1, 3), F(2, 9))),
])
def test_diagonal_symmetries(text, vars, order, jw):
    p = parse_polynomial(text, list(vars))
    G = diagonal_symmetries(p)
    assert G.order == order
    assert G.j_w == jw
    els = set(G.elements())
    assert jw in els
    A = p.exponents()
    for g in els:
        assert all(sum(F(int(a)) * x for a, x in zip(row, g)) % 1 == 0 for row in A)
        for h in list(els)[:5]:
            assert tuple((a + b) % 1 for a, b in zip(g, h)) in els


def test_infinite_symmetry_group():
    with pytest.raises(InfiniteGroupError):
        diagonal_symmetries(parse_polynomial("x^2*y^2", list("xy")))


def test_twisted_sectors():
    W = parse_polynomial("x^3 + y^3", list("xy"))
    s = twisted_sector(W, (F(1, 3), 0))
    assert s.fixed == (1,) and s.n_fixed == 1 and s.restriction == parse_polynomial("y^3", list("xy"))
    assert twisted_sector(W, (0, 0)).restriction == W
    assert twisted_sector(W, (F(1, 3), F(2, 3))).n_fixed == 0
    with pytest.raises(ValueError):
        twisted_sector(W, (F(1, 2), 0))


def test_parse_complex():
    assert complex(parse_complex("0.3-0.1i")) == 0.3 - 0.1j
    assert complex(parse_complex("-i")) == -1j
    assert complex(parse_complex("1/3+2/3i")) == pytest.approx(1 / 3 + 2j / 3)


def test_family_roundtrip_and_evaluation():
    fam = DeformationFamily(poly("z^3/3"), (poly("1"), poly("z")), (F(1, 2), GaussianRational(0, 1)), 2)
    again = DeformationFamily.from_dict(fam.to_dict())
    assert again.member() == fam.member()
    assert fam(1.0) == pytest.approx(2 * (1 / 3 + 0.5 + 1j))
    assert np.allclose(fam.univariate_coefficients(), [0.5, 1j, 0, 1 / 3])


exps = st.lists(st.integers(-3, 4), min_size=2, max_size=2)
coef = st.tuples(st.integers(-9, 9), st.integers(1, 5), st.integers(-9, 9))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(exps, coef), min_size=1, max_size=6))
def test_serializer_roundtrip(terms):
    p = LaurentPolynomial(("x", "y"), {})
    for e, (a, b, c) in terms:
        p = p + LaurentPolynomial(("x", "y"), {tuple(e): GaussianRational(F(a, b), F(c, b))})
    text = p.dumps()
    q = LaurentPolynomial.loads(text)
    assert q == p and q.dumps() == text
    assert parse_polynomial(str(p), ["x", "y"]) == p
