import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lgtt.thimble import (
    StokesProximity,
    critical_points,
    detect_walls,
    intersection_number,
    maslov_degree,
    monodromy_along_loop,
    period_integral,
    period_matrix,
    real_structure,
    tau_loop,
    trace_thimble,
    valley_angles,
    wall_crossing_transform,
    wall_intersection_number,
    witten_map,
    witten_matrix,
)
from lgtt.thimble import _thimble_integral

from conftest import OFF_WALL_TAU, a2_family

CUBIC = np.array([0, -1, 0, 1 / 3])
QUAD = np.array([0, 0, 1.0])


def test_critical_points_examples():
    cd = critical_points(CUBIC)
    assert sorted(cd.points.real) == pytest.approx([-1, 1])
    assert sorted(cd.values.real) == pytest.approx([-2 / 3, 2 / 3])
    assert cd.morse and cd.mu == 2
    q = critical_points(QUAD)
    assert q.points[0] == 0 and q.values[0] == 0
    nm = critical_points(np.array([0, 0, 0, 1 / 3]))
    assert not nm.morse and list(nm.multiplicities) == [2]


def test_critical_points_ordered_by_phase():
    cd = critical_points(np.array([0.1, 1 - 2j, 0.5j, 0, 0.25]), tau=0.3 + 1j)
    assert np.all(np.diff(cd.phases()) >= 0)
    res = np.abs(np.polyval(np.polyder(np.array([0.25, 0, 0.5j, 1 - 2j, 0.1])), cd.points))
    assert res.max() < 1e-12


def test_walls_of_cubic():
    w = detect_walls(CUBIC, 1.0)
    assert len(w) == 1 and w[0].indices == (0, 1)
    assert detect_walls(np.array([0, -cmath.exp(1j * math.pi / 6), 0, 1 / 3]), 1.0) == []


@pytest.mark.parametrize("k", [0, 1, 2])
def test_miniversal_cubic_walls(k):
    # x^3 + t1 x + t2 at tau = 1, t2 = 0: Im of the two critical values agree on arg t1 = pi/3 + 2 pi k / 3
    theta = math.pi / 3 + 2 * math.pi * k / 3
    on = np.array([0, cmath.exp(1j * theta), 0, 1])
    assert detect_walls(on, 1.0)
    off = np.array([0, cmath.exp(1j * (theta + 0.2)), 0, 1])
    assert not detect_walls(off, 1.0)


def test_gaussian_thimble_is_imaginary_axis():
    th = trace_thimble(QUAD, 1.0)
    assert np.abs(th.z.real).max() < 1e-8
    assert period_integral(th) == pytest.approx(1j * math.sqrt(math.pi / 2), abs=1e-10)


def test_descent_and_phase_constancy():
    c = np.array([0.2, -1 + 0.3j, 0, 1 / 3])
    tau = cmath.exp(0.4j)
    for a in range(2):
        for sign in "-+":
            th = trace_thimble(c, tau, a=a, sign=sign)
            assert th.phase_error < 1e-8
            re = (tau * np.polyval(c[::-1], th.z)).real
            mid = int(np.argmin(np.abs(th.s)))
            left, right = re[: mid + 1], re[mid:]
            if sign == "-":
                assert np.all(np.diff(left) > 0) and np.all(np.diff(right) < 0)
            else:
                assert np.all(np.diff(left) < 0) and np.all(np.diff(right) > 0)


def test_stokes_proximity_on_wall():
    with pytest.raises(StokesProximity):
        for a in range(2):
            for sign in "-+":
                trace_thimble(CUBIC, 1.0, a=a, sign=sign)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.05, 1.0), st.floats(-2.5, 2.5), st.floats(0.3, 1.5))
def test_mode_identity(phi, psi, r):
    c = np.array([0, -r * cmath.exp(1j * psi), 0, 1 / 3])
    tau = cmath.exp(1j * phi)
    if detect_walls(c, tau, tol=1e-3):
        return
    for a in range(2):
        th = trace_thimble(c, tau, a=a)
        ratio = period_integral(th, [0, 1], "Twisted") / period_integral(th, [0, 1])
        assert ratio == pytest.approx(cmath.exp(-2j * (tau * th.value).imag), rel=1e-8)


def test_stokes_exact_weights_integrate_to_zero():
    c = np.array([0.1, -1 + 0.2j, 0, 1 / 3])
    th = trace_thimble(c, OFF_WALL_TAU, a=0)
    fp = np.polynomial.polynomial.polyder(c)
    h = np.array([0.3, -1j, 2.0])
    # d(h e^{2 tau f}) = (h' + 2 tau f' h) e^{2 tau f}
    g = np.polynomial.polynomial.polyadd(np.polynomial.polynomial.polyder(h),
                                         2 * OFF_WALL_TAU * np.polynomial.polynomial.polymul(fp, h))
    val, _ = _thimble_integral(th, [g, [1.0]])
    assert abs(val[0]) < 1e-8 * max(1, abs(val[1]))


def test_unit_weight_column_is_tau_times_primitive():
    pm = period_matrix(a2_family((0, -1 + 0.2j), OFF_WALL_TAU))
    assert np.allclose(pm.minus[:, 0], 2 * OFF_WALL_TAU * pm.primitive[0], rtol=1e-10)


def test_period_matrix_nondegenerate_and_quadratic():
    pm = period_matrix(a2_family((0.3, -1 + 0.2j), OFF_WALL_TAU))
    assert abs(np.linalg.det(pm.minus)) > 1e-3
    q = period_matrix(QUAD, 1.0)
    assert q.minus.shape == (1, 1) and abs(q.minus[0, 0]) > 0


def test_primitive_of_shifted_quadratic():
    from lgtt.poly import DeformationFamily, parse_polynomial
    fam = DeformationFamily(parse_polynomial("z^2", ["z"]), (parse_polynomial("1", ["z"]),), (0.0,), 0.8 + 0.3j)
    u0 = period_matrix(fam).primitive[0][0]
    t1 = 0.25 - 0.1j
    u1 = period_matrix(fam.at(t=(t1,))).primitive[0][0]
    assert u1 == pytest.approx(cmath.exp(2 * fam.tau * t1) * u0, rel=1e-10)


def test_intersection_numbers_dual_bases():
    c = np.array([0.1, -1 + 0.3j, 0, 1 / 3])
    tau = OFF_WALL_TAU
    ths = {(a, s): trace_thimble(c, tau, a=a, sign=s, s_max=6) for a in range(2) for s in "-+"}
    for a in range(2):
        for b in range(2):
            assert intersection_number(ths[a, "-"], ths[b, "+"]) == (1 if a == b else 0)


def test_intersection_on_wall_pair():
    assert abs(wall_intersection_number(CUBIC, 1.0, None, 0, 1)) == 1


def test_wall_crossing_moves():
    B = np.eye(3, dtype=int)
    assert (wall_crossing_transform(B, 0, 0, "Left") == B[[1, 0, 2]]).all()
    assert (wall_crossing_transform(B, 0, 0, "Right") == B[[1, 0, 2]]).all()
    for I in (-2, -1, 1, 3):
        L = wall_crossing_transform(B, 1, I, "Left")
        R = wall_crossing_transform(B, 1, I, "Right")
        assert round(np.linalg.det(L)) == -1 and round(np.linalg.det(R)) == -1
        assert (L[0] == B[0]).all() and (R[0] == B[0]).all()
    with pytest.raises(ValueError):
        wall_crossing_transform(B, 0, 1, "Up")


@pytest.mark.parametrize("I", [-2, -1, 1, 2])
def test_crossing_back_is_identity_on_pair(I):
    # after a Left move the swapped pair has intersection number -I; the Right move with it undoes the crossing
    B = np.arange(9).reshape(3, 3)
    back = wall_crossing_transform(wall_crossing_transform(B, 0, I, "Left"), 0, -I, "Right")
    assert (back == B).all()


def test_pairing_matrix_identity():
    for mode in ("Holomorphic", "Twisted"):
        pm = period_matrix(a2_family((0.2, -1 + 0.3j), OFF_WALL_TAU), mode=mode)
        I, R, dev = witten_matrix(pm)
        assert dev < 1e-8 and (R == np.eye(2)).all()


def test_monodromy_cubic_tau_loop():
    r = monodromy_along_loop(CUBIC, tau_loop(cmath.exp(0.1j), None, 96))
    want = np.exp(2j * np.pi * np.array([1, 2]) / 3)
    assert all(np.min(np.abs(want - e)) < 1e-2 for e in r.eigenvalues)
    assert all(np.min(np.abs(r.eigenvalues - w)) < 1e-2 for w in want)
    assert r.semisimple and r.order == 3 and r.nilpotency == 1
    assert abs(abs(np.linalg.det(r.matrix)) - 1) < 1e-12


def test_monodromy_quadratic():
    r = monodromy_along_loop(QUAD, tau_loop(1.0, None, 32))
    assert r.matrix[0, 0] == -1


def test_chamber_loop_is_identity():
    tau = cmath.exp(0.1j)
    loop = [(tau * (1 + 0.01 * cmath.exp(1j * x)), None) for x in np.linspace(0, 2 * np.pi, 17)]
    assert (monodromy_along_loop(CUBIC, loop).matrix == np.eye(2)).all()


def test_parameter_loop_is_trivial():
    # exponential periods are entire in t, so loops at fixed tau act trivially
    fam = a2_family((0, -1), cmath.exp(0.1j))
    th = np.linspace(0, 2 * np.pi, 97)
    loop = [(fam.tau, (0, -0.5 * cmath.exp(1j * x))) for x in th]
    loop[-1] = loop[0]
    r = monodromy_along_loop(fam, loop)
    assert (r.matrix == np.eye(2)).all() and len(r.walls) == 3


def test_quartic_monodromy_eigenvalues():
    c4 = np.array([0, 0.3, -1, 0.2j, 0.25])
    r = monodromy_along_loop(c4, tau_loop(cmath.exp(0.2j), None, 128))
    want = np.exp(2j * np.pi * np.arange(1, 4) / 4)
    assert all(np.min(np.abs(want - e)) < 1e-2 for e in r.eigenvalues)
    assert all(np.min(np.abs(r.eigenvalues - w)) < 1e-2 for w in want)


def test_witten_map_squares_to_monodromy():
    tau = cmath.exp(0.1j)
    S = witten_map(CUBIC, tau)
    T = monodromy_along_loop(CUBIC, tau_loop(tau, None, 96)).matrix
    assert np.abs(S @ witten_map(CUBIC, -tau) - T).max() < 1e-2
    assert abs(abs(round(np.linalg.det(S))) - 1) == 0


def test_valley_angles():
    a = valley_angles(3, 0.0)
    assert np.allclose(np.diff(a), 2 * np.pi / 3) and a[0] == pytest.approx(np.pi / 3)


def test_real_structure_involution_and_gaussian_metric():
    pm = period_matrix(a2_family((0.1, -1 + 0.3j), OFF_WALL_TAU), mode="Twisted")
    rs = real_structure(pm)
    assert rs.involution_error < 1e-10
    for tau in (1.0, 4.0, 3 + 4j):
        g = real_structure(period_matrix(QUAD, tau, mode="Twisted")).g
        assert g[0, 0].real == pytest.approx(1 / (2 * abs(tau)), rel=1e-8)
    with pytest.raises(ValueError):
        real_structure(period_matrix(QUAD, 1.0))


def test_maslov_degree_is_integer():
    tau = cmath.exp(0.1j)
    loop = [(tau * cmath.exp(1j * x), None) for x in np.linspace(0, 2 * np.pi, 33)]
    assert isinstance(maslov_degree(QUAD, loop), int)
