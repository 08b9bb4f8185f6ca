from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lgtt.newton import (
    face_polynomial,
    is_convenient,
    is_nondegenerate_laurent,
    newton_polytope,
    subdiagram_basis,
)
from lgtt.poly import DeformationFamily, LaurentPolynomial, parse_polynomial
from lgtt.tame import classify_deformation_monomial, growth_exponents, radial_probe, tameness_certificate

from conftest import poly

V2 = ["z1", "z2"]
TRIANGLE = parse_polynomial("z1 + z2 + 1/(z1*z2)", V2)


def test_polytope_segment_and_triangle():
    P = newton_polytope(poly("z + 1/z"))
    assert set(P.vertices) == {(1,), (-1,)} and P.interior_points == ((0,),)
    T = newton_polytope(TRIANGLE)
    assert set(T.vertices) == {(1, 0), (0, 1), (-1, -1)}
    assert T.interior_points == ((0, 0),)
    assert len(T.face_of_dim(0)) == 3 and len(T.face_of_dim(1)) == 3
    pt = newton_polytope(poly("z^2"))
    assert pt.vertices == ((2,),) and pt.interior_points == ()


def test_faces_satisfy_supporting_equation():
    T = newton_polytope(parse_polynomial("z1^2 + z2^3 + 1/(z1*z2) + z1*z2", V2))
    for face in T.faces:
        for v in face.vertices:
            assert sum(a * b for a, b in zip(face.normal, T.vertices[v])) == face.offset


def test_face_polynomials():
    T = newton_polytope(TRIANGLE)
    edge = next(f for f in T.face_of_dim(1) if {T.vertices[i] for i in f.vertices} == {(1, 0), (0, 1)})
    assert face_polynomial(TRIANGLE, edge) == parse_polynomial("z1 + z2", V2)
    full = T.face_of_dim(2)[0]
    assert face_polynomial(TRIANGLE, full) == TRIANGLE
    P = newton_polytope(poly("z + 1/z"))
    vtx = next(f for f in P.face_of_dim(0) if P.vertices[next(iter(f.vertices))] == (1,))
    assert face_polynomial(poly("z + 1/z"), vtx) == poly("z")


def test_convenience():
    assert is_convenient(poly("z + 1/z"))
    assert not is_convenient(poly("z + z^2"))
    assert is_convenient(TRIANGLE)


def test_nondegeneracy():
    assert is_nondegenerate_laurent(poly("z + 1/z")).kind == "ExactYes"
    assert is_nondegenerate_laurent(TRIANGLE).kind == "ExactYes"
    bad = is_nondegenerate_laurent(poly("z + 2 + 1/z"))
    assert bad.kind == "ExactNo"
    assert bad.witness[0] == pytest.approx(-1)


def test_nondegeneracy_three_variables_is_probabilistic():
    f = parse_polynomial("x + y + z + 1/(x*y*z)", list("xyz"))
    c = is_nondegenerate_laurent(f, seed=3)
    assert c.kind == "ProbabilisticYes" and c.trials > 0
    assert is_nondegenerate_laurent(f, seed=3) == c


def test_subdiagram_bases():
    assert subdiagram_basis(poly("z + 1/z")) == [poly("1")]
    assert subdiagram_basis(TRIANGLE) == [parse_polynomial("1", V2)]
    assert subdiagram_basis(poly("z^2 + 1/z")) == [poly("1"), poly("z")]


def test_hull_idempotence():
    f = parse_polynomial("z1^2*z2 + z2^3 + 1/z1 + 1/(z1*z2^2) + z1*z2", V2)
    P = newton_polytope(f)
    full = P.face_of_dim(P.dim)[0]
    Q = newton_polytope(face_polynomial(f, full))
    assert set(Q.vertices) <= set(P.vertices)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([((1, 1), (0, 1)), ((2, 1), (1, 1)), ((1, 0), (3, 1)), ((0, 1), (1, 0)), ((1, -1), (0, 1))]))
def test_convenience_invariant_under_unimodular_maps(U):
    U = np.array(U)
    for f in (TRIANGLE, parse_polynomial("z1 + z2^2 + z1*z2", V2)):
        g = LaurentPolynomial(f.vars, {tuple(int(x) for x in U @ np.array(e)): c for e, c in f.terms.items()})
        assert is_convenient(g) == is_convenient(f)


def test_subdiagram_deformation_keeps_triangle_tame():
    rng = np.random.default_rng(5)
    for _ in range(3):
        t = F(int(rng.integers(1, 9)), int(rng.integers(1, 9)))
        f = TRIANGLE + parse_polynomial("1", V2).scale(t)
        assert is_convenient(f) and is_nondegenerate_laurent(f).kind == "ExactYes"


# tameness -----------------------------------------------------------------

X3 = list("xyz")


def test_growth_exponents():
    assert growth_exponents((F(1, 3), F(1, 4)))["delta"] == (F(1, 2), F(3, 8))
    g = growth_exponents((F(1, 2),))
    assert g["delta"] == (1,) and g["all_le_1"] and not g["all_lt_1"]
    assert growth_exponents((F(1, 3),) * 3)["delta"] == (F(1, 2),) * 3


def test_deformation_classes():
    assert classify_deformation_monomial(parse_polynomial("x^3+y^3+z^3", X3), (1, 1, 1))[0] == "Marginal"
    assert classify_deformation_monomial(poly("z^3"), poly("z")) == ("Relevant", F(2, 3))
    assert classify_deformation_monomial(parse_polynomial("x^3+y^7", list("xy")), (1, 5)) == ("Irrelevant", F(-1, 21))


def test_certificates():
    p8 = DeformationFamily(parse_polynomial("x^3+y^3+z^3", X3), (parse_polynomial("x*y*z", X3),))
    c = tameness_certificate(p8)
    assert c.verdict == "StronglyTame" and c.rule == "hypersurface"
    assert all(d <= 1 for d in c.details["delta"])
    e12 = DeformationFamily(parse_polynomial("x^3+y^7", list("xy")), (parse_polynomial("x*y^5", list("xy")),))
    assert tameness_certificate(e12).verdict == "Unknown"
    assert tameness_certificate(e12, probe=True).verdict == "Evidence"
    lc = tameness_certificate(poly("z + 1/z"))
    assert lc.verdict == "StronglyTame" and lc.rule == "laurent"
    assert tameness_certificate(poly("z + 1")).verdict == "NotStronglyTame"


def test_certificate_stable_under_permutation_and_scaling():
    f = parse_polynomial("x^3 + x*y^3", list("xy"))
    g = parse_polynomial("y^3 + y*x^3", list("xy"))
    h = f.scale(F(-5, 2))
    assert tameness_certificate(f).verdict == tameness_certificate(g).verdict == tameness_certificate(h).verdict


def test_radial_probe():
    tab = radial_probe(poly("z^2"))
    assert np.allclose(tab.min_values, [4 * r * r - 2 for r in tab.radii])
    assert tab.growing
    flat = radial_probe(poly("z"), C=3.0)
    assert np.allclose(flat.min_values, 1) and not flat.growing
    cub = radial_probe(poly("z^3/3 - z"), radii=(3, 4, 8))
    th = np.linspace(0, 2 * np.pi, 20000)
    for r, m in zip(cub.radii, cub.min_values):
        z = r * np.exp(1j * th)
        assert m == pytest.approx((np.abs(z * z - 1) ** 2 - 2 * r).min(), rel=1e-3)
    assert cub.growing
    p = radial_probe(parse_polynomial("x^3+y^3", list("xy")), seed=1)
    assert p.growing and p == radial_probe(parse_polynomial("x^3+y^3", list("xy")), seed=1)
