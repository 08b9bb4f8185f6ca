"""
Higgs fields, flat coordinates, tt* residuals and the Frobenius tensor.

The frame is the monomial basis of the Milnor algebra of ``f_t``. For one
variable this is ``1, z, ..., z^(mu-1)`` and reduction is numeric division by
``f_t'``; several variables go through the exact Groebner reduction of
:mod:`lgtt.singularity` (parameters must then be exactly representable).

The tt* metric used for the Cecotti-Vafa checks is built from finite
difference harmonic 1-forms of the twisted Laplacian of ``2 tau f_t`` (the
operator of :mod:`lgtt.spectral` with this potential is the Laplacian of
``dbar + d(tau f_t) ^``). With ``phi_b`` an orthonormal basis of the
discrete harmonic space, the metric on the frame ``g_j dz`` is

    G = C^H C / pi,      C[b, j] = <phi_b, g_j dz>,

which is Hermitian positive by construction and equals ``1/(2|tau|)`` for
``f = z^2``, the value obtained from the periods.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from .poly import DeformationFamily, LaurentPolynomial
from .spectral import SpectralGrid, assemble_twisted_laplacian, lowest_eigenpairs, ResolutionWarning
from .thimble import (
    StokesProximity,
    critical_points,
    period_matrix,
    real_structure,
    trace_thimble,
    _thimble_integral,
)

__all__ = [
    "FrobeniusData",
    "DependentDeformers",
    "WallCrossingError",
    "NotHermitian",
    "milnor_frame",
    "higgs_field",
    "u_matrix",
    "frame_pairing",
    "frobenius_data",
    "flat_coordinates",
    "connection_residuals",
    "ttstar_metric",
    "ttstar_residuals",
    "frobenius_tensor",
    "a3_flat_frame",
    "chern_curvature",
]


class DependentDeformers(ValueError):
    pass


class WallCrossingError(ValueError):
    """A finite-difference stencil straddles a wall, so the canonical basis jumps."""


class NotHermitian(ValueError):
    pass


# --------------------------------------------------------------------------
# Milnor frame

@dataclass
class _Frame:
    mu: int
    labels: list
    mult: Callable          # polynomial (LaurentPolynomial or coefficients) -> complex mu x mu matrix
    coords: Callable        # polynomial -> coordinate vector
    points: np.ndarray      # critical points (rows), for residues
    hess: np.ndarray        # Hessian determinants at the points
    basis_values: np.ndarray  # (mu, points): basis monomials evaluated at the points


def _univariate_frame(c: np.ndarray) -> _Frame:
    c = np.trim_zeros(np.asarray(c, dtype=complex), "b")
    d1 = P.polyder(c)
    mu = len(d1) - 1
    if mu < 1:
        raise ValueError("need degree >= 2")

    def reduce(p):
        p = np.trim_zeros(np.asarray(p, dtype=complex), "b")
        if len(p) <= mu:
            out = np.zeros(mu, dtype=complex)
            out[: len(p)] = p
            return out
        _, r = P.polydiv(p, d1)
        out = np.zeros(mu, dtype=complex)
        out[: len(r)] = r
        return out

    def as_coeffs(g):
        if isinstance(g, LaurentPolynomial):
            return g.univariate_coefficients()
        return np.asarray(g, dtype=complex)

    def mult(g):
        g = as_coeffs(g)
        return np.column_stack([reduce(P.polymul(g, np.eye(mu)[a])) for a in range(mu)])

    cd = critical_points(c)
    pts = cd.points.reshape(-1, 1)
    vals = np.array([pts[:, 0] ** a for a in range(mu)])
    return _Frame(mu, ["1"] + [f"z^{a}" if a > 1 else "z" for a in range(1, mu)], mult,
                  lambda g: reduce(as_coeffs(g)), pts, cd.hessians, vals)


def _exact_frame(f: LaurentPolynomial) -> _Frame:
    from .singularity import _hessian_det, _polished_critical_points, milnor_algebra, multiplication_matrix, to_complex

    A = milnor_algebra(f)
    if not A.finite:
        raise ValueError("infinite Milnor number")

    def mult(g):
        return to_complex(multiplication_matrix(A, g))

    def coords(g):
        return np.array([complex(x) for x in A.coordinates(g)])

    pts = _polished_critical_points(f, A)
    det = _hessian_det(f, pts)
    vals = np.array([[np.prod([p[i] ** e[i] for i in range(f.nvars)]) for p in pts] for e in A.monomial_basis])
    return _Frame(A.mu, A.basis_labels(), mult, coords, pts, det, vals)


def milnor_frame(family, t=None) -> _Frame:
    """Monomial frame of the Milnor algebra of ``f_t`` with multiplication and residues."""
    if isinstance(family, LaurentPolynomial):
        family = DeformationFamily(family)
    if family.base.nvars == 1 and family.base.is_polynomial:
        return _univariate_frame(family.univariate_coefficients(t))
    return _exact_frame(family.member(t))


def _deformer_derivatives(family: DeformationFamily):
    return list(family.deformers)


def higgs_field(family: DeformationFamily, tau: complex | None = None, t=None, frame: _Frame | None = None) -> list:
    """``B_i = tau * mult(d f_t / d t_i)`` in the Milnor frame of ``f_t``.

    Raises
    ------
    DependentDeformers
        If the deformer classes are linearly dependent in the Milnor algebra.
    """
    tau = complex(family.tau if tau is None else tau)
    fr = frame or milnor_frame(family, t)
    gs = _deformer_derivatives(family)
    C = np.array([fr.coords(g) for g in gs]).T if gs else np.zeros((fr.mu, 0))
    if gs and np.linalg.matrix_rank(C, tol=1e-10 * max(1.0, np.abs(C).max())) < len(gs):
        raise DependentDeformers("deformer classes are dependent in the Milnor algebra")
    return [tau * fr.mult(g) for g in gs]


def u_matrix(family: DeformationFamily, tau: complex | None = None, t=None, frame: _Frame | None = None,
             scaled: bool = False) -> np.ndarray:
    """Multiplication by ``f_t`` on the Milnor algebra (times ``tau`` when ``scaled``)."""
    if isinstance(family, LaurentPolynomial):
        family = DeformationFamily(family)
    fr = frame or milnor_frame(family, t)
    if family.base.nvars == 1 and family.base.is_polynomial:
        U = fr.mult(family.univariate_coefficients(t))
    else:
        U = fr.mult(family.member(t))
    return complex(family.tau if tau is None else tau) * U if scaled else U


def frame_pairing(frame: _Frame) -> np.ndarray:
    """Residue pairing ``sum_p e_a(p) e_b(p) / det Hess f(p)`` on the frame."""
    v = frame.basis_values
    return (v / frame.hess[None, :]) @ v.T


@dataclass
class FrobeniusData:
    labels: list
    eta: np.ndarray
    B: list
    U: np.ndarray
    tau: complex
    t: tuple

    def commutator_norm(self) -> float:
        out = 0.0
        for i in range(len(self.B)):
            for j in range(i + 1, len(self.B)):
                out = max(out, float(np.abs(self.B[i] @ self.B[j] - self.B[j] @ self.B[i]).max()))
        return out

    def symmetry_defect(self) -> float:
        """max |eta B_i - (eta B_i)^T| and |eta U - (eta U)^T|."""
        mats = [self.eta @ b for b in self.B] + [self.eta @ self.U]
        return max(float(np.abs(m - m.T).max()) for m in mats)


def frobenius_data(family: DeformationFamily, tau: complex | None = None, t=None) -> FrobeniusData:
    tau = complex(family.tau if tau is None else tau)
    fr = milnor_frame(family, t)
    return FrobeniusData(fr.labels, frame_pairing(fr), higgs_field(family, tau, t, fr),
                         u_matrix(family, tau, t, fr), tau, tuple(family.t if t is None else t))


# --------------------------------------------------------------------------
# periods: flat coordinates and connection residuals

def _check_same_chamber(family, tau, t_center, t_other):
    """Raise unless every pair keeps the sign of ``Im tau (v_a - v_b)`` between the two points."""
    a = critical_points(family, tau, t_center)
    b = critical_points(family, tau, t_other)
    match = np.argmin(np.abs(a.points[:, None] - b.points[None, :]), axis=1)
    if len(set(match.tolist())) != len(match):
        raise WallCrossingError(f"critical points of {t_other} cannot be matched to those of {t_center}")
    ia = np.imag(tau * a.values)
    ib = np.imag(tau * b.values[match])
    da = ia[:, None] - ia[None, :]
    db = ib[:, None] - ib[None, :]
    if np.any(np.sign(da) * np.sign(db) < 0):
        raise WallCrossingError(f"stencil point {t_other} lies across a wall from {t_center}")


@dataclass
class FlatCoordinateReport:
    points: list
    u: np.ndarray               # primitive vectors per point (mu entries each)
    jacobian: np.ndarray        # finite-difference du/dt (points, mu, m)
    periods: np.ndarray         # period matrices Pi^- (points, mu, m)
    errors: np.ndarray          # relative error per point
    step: float

    @property
    def max_error(self) -> float:
        return float(self.errors.max())


def flat_coordinates(family: DeformationFamily, tau: complex | None = None, t_grid: Sequence = (),
                     step: float = 1e-4, mode: str = "Holomorphic") -> FlatCoordinateReport:
    """Primitive vectors ``u(t)`` and the Jacobian check ``du/dt_j = Pi column j``.

    Raises
    ------
    WallCrossingError
        When a stencil point lies across a wall from its center.
    """
    tau = complex(family.tau if tau is None else tau)
    pts, U, J, PI, err = [], [], [], [], []
    m = family.nparams
    for t in t_grid:
        t = tuple(complex(x) for x in t)
        pm = period_matrix(family, tau, t, mode=mode)
        jac = np.zeros((len(pm.points), m), dtype=complex)
        for j in range(m):
            tp = list(t); tm = list(t)
            tp[j] += step
            tm[j] -= step
            for other in (tp, tm):
                _check_same_chamber(family, tau, t, tuple(other))
            up = period_matrix(family, tau, tuple(tp), mode=mode).primitive[0]
            um = period_matrix(family, tau, tuple(tm), mode=mode).primitive[0]
            jac[:, j] = (up - um) / (2 * step)
        pts.append(t)
        U.append(pm.primitive[0])
        J.append(jac)
        PI.append(pm.minus)
        err.append(float(np.abs(jac - pm.minus).max() / np.abs(pm.minus).max()))
    return FlatCoordinateReport(pts, np.array(U), np.array(J), np.array(PI), np.array(err), step)


def _stokes_split(c: np.ndarray, forms: Sequence[np.ndarray]):
    """Write ``f = sum_k u_k g_k + f' h``; return ``(u, h)``."""
    c = np.trim_zeros(np.asarray(c, dtype=complex), "b")
    d1 = P.polyder(c)
    q, r = P.polydiv(c, d1)
    mu = len(d1) - 1
    G = np.zeros((mu, len(forms)), dtype=complex)
    for k, g in enumerate(forms):
        _, rg = P.polydiv(np.asarray(g, dtype=complex), d1) if len(g) > mu else (None, np.asarray(g, dtype=complex))
        G[: len(rg), k] = rg
    rr = np.zeros(mu, dtype=complex)
    rr[: len(r)] = r
    u = np.linalg.solve(G, rr)
    # remainder differences g_k - NF(g_k) are multiples of f'; fold them into h
    h = q.astype(complex)
    for k, g in enumerate(forms):
        g = np.asarray(g, dtype=complex)
        if len(g) > mu:
            qg, _ = P.polydiv(g, d1)
            h = P.polysub(h, u[k] * qg)
    return u, h


@dataclass
class ConnectionReport:
    derivative: np.ndarray         # (i) relative residual per direction
    euler_literal: float           # (ii) |tau d_tau Pi_1 - U Pi_1| / |U Pi_1|
    euler_exact: float             # (ii) with the -1/2 and Stokes terms included
    flatness: float                # (iii) mixed-difference curvature of Pi^-1 dPi
    step: float
    tau: complex
    t: tuple


def connection_residuals(family: DeformationFamily, tau: complex | None = None, t=None,
                         step: float = 1e-4, flat_step: float = 1e-2) -> ConnectionReport:
    """Finite-difference residuals of the period connection (Holomorphic mode, gauge ``A = 0``).

    (i)  ``d_{t_j} Pi_1 - Pi_j`` relative to ``|Pi_j|``;
    (ii) ``tau d_tau Pi_1 - U Pi_1`` where ``U Pi_1 = sum_k u_k Pi_k`` for
         ``f = sum_k u_k g_k + f' h``. The exact identity adds
         ``-Pi_1/2 - tau^(-1/2) int h' e^E dz``; both residuals are reported;
    (iii) ``d_i W_j - d_j W_i + [W_i, W_j]`` for ``W_j = Pi^-1 d_j Pi`` by
         nested central differences with step ``flat_step``.
    """
    tau = complex(family.tau if tau is None else tau)
    t = tuple(complex(x) for x in (family.t if t is None else t))
    m = family.nparams
    pm = period_matrix(family, tau, t)
    forms = [g.univariate_coefficients() for g in family.deformers]

    def prim(tt, ta=tau):
        _check_same_chamber(family, ta, t, tt)
        return period_matrix(family, ta, tt).primitive[0]

    def shifted(j, d):
        tt = list(t)
        tt[j] += d
        return tuple(tt)

    res_i = np.zeros(m)
    for j in range(m):
        dj = (prim(shifted(j, step)) - prim(shifted(j, -step))) / (2 * step)
        res_i[j] = float(np.abs(dj - pm.minus[:, j]).max() / np.abs(pm.minus[:, j]).max())

    # (ii) tau d/dtau along the ray
    up = period_matrix(family, tau * (1 + step), t).primitive[0]
    um = period_matrix(family, tau * (1 - step), t).primitive[0]
    tdt = (up - um) / (2 * step)
    c = family.univariate_coefficients(t)
    u, h = _stokes_split(c, forms)
    UPi = pm.minus @ u
    lit = float(np.abs(tdt - UPi).max() / np.abs(UPi).max())
    cd = critical_points(family, tau, t)
    hp = P.polyder(h) if len(h) > 1 else np.zeros(1, dtype=complex)
    corr = np.zeros(len(cd.points), dtype=complex)
    for a in range(len(cd.points)):
        th = trace_thimble(family, tau, t, a=a, crit=cd)
        val, _ = _thimble_integral(th, [hp])
        corr[a] = cmath.exp(2 * tau * cd.values[a]) * val[0] / cmath.sqrt(tau)
    exact = tdt - (UPi - 0.5 * pm.primitive[0] - corr)
    ex = float(np.abs(exact).max() / np.abs(UPi).max())

    # (iii) flatness of W_j = Pi^-1 d_j Pi over the t-directions
    def W(tt, j):
        a = period_matrix(family, tau, shifted_at(tt, j, flat_step)).minus
        b = period_matrix(family, tau, shifted_at(tt, j, -flat_step)).minus
        P0 = period_matrix(family, tau, tt).minus
        return np.linalg.solve(P0, (a - b) / (2 * flat_step))

    def shifted_at(tt, j, d):
        tt = list(tt)
        tt[j] += d
        return tuple(tt)

    flat = 0.0
    for i in range(m):
        for j in range(i + 1, m):
            diW_j = (W(shifted_at(t, i, flat_step), j) - W(shifted_at(t, i, -flat_step), j)) / (2 * flat_step)
            djW_i = (W(shifted_at(t, j, flat_step), i) - W(shifted_at(t, j, -flat_step), i)) / (2 * flat_step)
            Wi, Wj = W(t, i), W(t, j)
            F = diW_j - djW_i + Wi @ Wj - Wj @ Wi
            scale = max(np.abs(Wi).max() * np.abs(Wj).max(), 1e-300)
            flat = max(flat, float(np.abs(F).max() / scale))
    return ConnectionReport(res_i, lit, ex, flat, step, tau, t)


# --------------------------------------------------------------------------
# tt* metric from harmonic forms

def ttstar_metric(family: DeformationFamily, tau: complex | None = None, t=None, R: float = 3.0,
                  h: float = 1 / 32, tol: float = 1e-10, seed: int = 0, frame: _Frame | None = None,
                  return_spectrum: bool = False):
    """Hermitian tt* metric on the Milnor frame from discrete harmonic 1-forms.

    Parameters
    ----------
    family : one-variable polynomial family
    R, h : box half-width and grid spacing of the finite-difference operator
    """
    tau = complex(family.tau if tau is None else tau)
    c = family.univariate_coefficients(t)
    fr = frame or milnor_frame(family, t)
    grid = SpectralGrid(R, h)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ResolutionWarning)
        op = assemble_twisted_laplacian(2 * tau * c, 1, grid)
    res = lowest_eigenpairs(op, k=fr.mu + 2, tol=tol, seed=seed)
    ev = res.eigenvalues
    if not ev[fr.mu] > 10 * max(abs(ev[fr.mu - 1]), 1e-12):
        raise ValueError(f"harmonic band not separated: {ev}")
    z = grid.mesh()
    C = np.array([[np.vdot(res.eigenfields[b].components[0], z ** a) * h * h for a in range(fr.mu)]
                  for b in range(fr.mu)])
    G = C.conj().T @ C / math.pi
    G = 0.5 * (G + G.conj().T)
    return (G, ev) if return_spectrum else G


def chern_curvature(metric: Callable, d: float) -> tuple:
    """``dbar(G^-1 dG)`` at ``x = 0`` for ``metric(x)`` (complex ``x``) by a 9-point stencil.

    Returns ``(K, G0)``.
    """
    Gs = {(a, b): metric(d * a + 1j * d * b) for a in (-1, 0, 1) for b in (-1, 0, 1)}
    G0 = Gs[0, 0]
    dx = (Gs[1, 0] - Gs[-1, 0]) / (2 * d)
    dy = (Gs[0, 1] - Gs[0, -1]) / (2 * d)
    dG = (dx - 1j * dy) / 2
    dbG = (dx + 1j * dy) / 2
    lap = ((Gs[1, 0] - 2 * G0 + Gs[-1, 0]) + (Gs[0, 1] - 2 * G0 + Gs[0, -1])) / d ** 2
    Gi = np.linalg.inv(G0)
    return -Gi @ dbG @ Gi @ dG + Gi @ lap / 4, G0


@dataclass
class TTStarReport:
    levels: list                  # (R, h, step) per refinement level
    cv: list                      # CV relative residual per level (max over direction pairs)
    cv_scale: list                # commutator scale per level
    fantastic: list               # tau-direction relative residual per level
    fantastic_scale: list
    tau: complex
    t: tuple

    @property
    def cv_decreasing(self) -> bool:
        return all(b < a for a, b in zip(self.cv, self.cv[1:]))

    @property
    def fantastic_decreasing(self) -> bool:
        return all(b < a for a, b in zip(self.fantastic, self.fantastic[1:]))


def _adjoint(B, G):
    return np.linalg.solve(G, B.conj().T @ G)


def ttstar_residuals(family: DeformationFamily, tau: complex | None = None, t=None,
                     levels: Sequence = ((3.0, 1 / 16, 0.2), (3.0, 1 / 32, 0.1)),
                     metric: str | Callable = "spectral", directions: Sequence[int] | None = None,
                     fantastic: bool = True) -> TTStarReport:
    """Residuals of ``[D_i, D_jbar] = -[B_i, B_jbar]`` and ``[tau D_tau, taubar D_taubar] = -[U, Ubar]``.

    In the holomorphic frame ``D_i = d_i + G^-1 d_i G`` and ``D_jbar = dbar_j``,
    so the identities read ``dbar_j(G^-1 d_i G) = [B_i, B_j^dagger]`` with
    ``B^dagger = G^-1 B^H G``; the tau-direction uses ``x = log tau`` and
    ``U = tau * mult(f_t)``. Residuals are relative to the commutator norm.

    Parameters
    ----------
    metric : "spectral", "periods" or callable ``(tau, t) -> G``
        ``"periods"`` uses :func:`lgtt.thimble.real_structure`; its metric must
        pass the Hermitian-positive precondition.
    levels : sequence of ``(R, h, step)``
        Refinement levels; ``step`` is the stencil spacing in ``t`` and in
        ``log tau``.
    """
    tau = complex(family.tau if tau is None else tau)
    t = tuple(complex(x) for x in (family.t if t is None else t))
    m = family.nparams
    if directions is None:
        directions = [j for j, g in enumerate(family.deformers) if g.degree() > 0]

    def make_metric(R, h):
        if callable(metric):
            return lambda ta, tt: metric(ta, tt)
        if metric == "spectral":
            return lambda ta, tt: ttstar_metric(family, ta, tt, R=R, h=h)
        if metric == "periods":
            def g(ta, tt):
                rs = real_structure(period_matrix(family, ta, tt, mode="Twisted"))
                if not (rs.hermitian and rs.positive):
                    raise NotHermitian(f"period metric not Hermitian positive (defect {rs.hermitian_defect:.3g})")
                return rs.g
            return g
        raise ValueError("unknown metric")

    def shifted(j, x):
        tt = list(t)
        tt[j] += x
        return tuple(tt)

    cv, cvs, fan, fans = [], [], [], []
    for R, h, d in levels:
        G = make_metric(R, h)
        worst, scale = 0.0, 0.0
        for a, i in enumerate(directions):
            for j in directions[a:]:
                if i == j:
                    K, G0 = chern_curvature(lambda x: G(tau, shifted(i, x)), d)
                else:
                    # mixed: dbar_j (G^-1 d_i G) from the 2-parameter stencil in (t_i, t_j)
                    K, G0 = _mixed_curvature(lambda xi, xj: G(tau, _shift2(t, i, xi, j, xj)), d)
                Bs = higgs_field(family, tau, t)
                Bi, Bj = Bs[i], Bs[j]
                rhs = Bi @ _adjoint(Bj, G0) - _adjoint(Bj, G0) @ Bi
                sc = float(np.linalg.norm(rhs))
                worst = max(worst, float(np.linalg.norm(K - rhs)) / max(sc, 1e-300))
                scale = max(scale, sc)
        cv.append(worst)
        cvs.append(scale)
        if fantastic:
            K, G0 = chern_curvature(lambda x: G(tau * cmath.exp(x), t), d)
            U = u_matrix(family, tau, t, scaled=True)
            rhs = U @ _adjoint(U, G0) - _adjoint(U, G0) @ U
            sc = float(np.linalg.norm(rhs))
            fan.append(float(np.linalg.norm(K - rhs)) / max(sc, 1e-300))
            fans.append(sc)
    return TTStarReport([tuple(x) for x in levels], cv, cvs, fan, fans, tau, t)


def _shift2(t, i, xi, j, xj):
    tt = list(t)
    tt[i] += xi
    tt[j] += xj
    return tuple(tt)


def _mixed_curvature(metric2: Callable, d: float):
    """``dbar_j (G^-1 d_i G)`` for ``metric2(x_i, x_j)`` by central differences."""
    def G(a, b):
        return metric2(a, b)

    G0 = G(0, 0)
    Gi = np.linalg.inv(G0)
    di = ((G(d, 0) - G(-d, 0)) - 1j * (G(1j * d, 0) - G(-1j * d, 0))) / (4 * d)
    dbj = ((G(0, d) - G(0, -d)) + 1j * (G(0, 1j * d) - G(0, -1j * d))) / (4 * d)

    def dI(b):
        return ((G(d, b) - G(-d, b)) - 1j * (G(1j * d, b) - G(-1j * d, b))) / (4 * d)

    dbj_di = ((dI(d) - dI(-d)) + 1j * (dI(1j * d) - dI(-1j * d))) / (4 * d)
    return -Gi @ dbj @ Gi @ di + Gi @ dbj_di, G0


# --------------------------------------------------------------------------
# Frobenius tensor

def a3_flat_frame(s) -> tuple:
    """Flat chart of ``z^4/4 + t_3 z^2 + t_2 z + t_1`` (deformers ``1, z, z^2``).

    ``t_1 = s_1 + s_3^2 / 2``, ``t_2 = s_2``, ``t_3 = s_3``; returns ``(t, dt/ds)``.
    In this chart the residue pairing of ``d_s f`` is constant.
    """
    s1, s2, s3 = (complex(x) for x in s)
    t = (s1 + s3 ** 2 / 2, s2, s3)
    J = np.array([[1, 0, s3], [0, 1, 0], [0, 0, 1]], dtype=complex)
    return t, J


@dataclass
class FrobeniusReport:
    points: list
    A: np.ndarray                 # (points, m, m, m)
    symmetry: float               # max deviation from total symmetry
    unit: float                   # max |A_1jk - tau eta_jk| when the first direction is the unit
    wdvv: float                   # max WDVV contraction residual
    integrability: float          # max |d_a A_bcd - d_b A_acd| (finite differences)
    eta_variation: float          # max change of the pairing of d_s f over the grid
    step: float


def _tensor_at(family, tau, t, J):
    fr = milnor_frame(family, t)
    eta = frame_pairing(fr)
    gs = family.deformers
    coords = np.array([fr.coords(g) for g in gs]).T           # frame coords of d_t f
    E = coords @ J                                           # frame coords of d_s f
    Ms = [sum(E[k, a] * fr.mult(np.eye(fr.mu)[k]) for k in range(fr.mu)) for a in range(E.shape[1])]
    m = E.shape[1]
    A = np.zeros((m, m, m), dtype=complex)
    for a in range(m):
        prod_a = Ms[a]
        for b in range(m):
            eb = E[:, b]
            for c_ in range(m):
                ec = E[:, c_]
                A[a, b, c_] = tau * (ec @ eta @ (prod_a @ eb))
    gram = E.T @ eta @ E
    return A, gram


def frobenius_tensor(family: DeformationFamily, points: Sequence, tau: complex = 1.0,
                     chart: Callable | None = None, step: float = 1e-3,
                     difference: str = "central") -> FrobeniusReport:
    """``A_abc = tau * eta(e_a e_b e_c)`` on ``e_a = d f / d s_a`` with symmetry, WDVV and integrability checks.

    Parameters
    ----------
    chart : callable ``s -> (t, dt/ds)``, optional
        Coordinates in which the tensor is differentiated; defaults to ``t``.
    step : float
        Finite-difference step for the integrability check.
    difference : {"central", "forward"}
        Stencil for ``d_a A_bcd``. The forward stencil is first order, so its
        residual halves with ``step`` when the tensor is integrable.
    """
    if difference not in ("central", "forward"):
        raise ValueError("difference must be 'central' or 'forward'")
    tau = complex(tau)
    m = family.nparams
    chart = chart or (lambda s: (tuple(complex(x) for x in s), np.eye(m, dtype=complex)))

    def A_at(s):
        t, J = chart(s)
        return _tensor_at(family, tau, t, J)

    As, grams = [], []
    sym = wd = integ = unit = 0.0
    for s in points:
        s = tuple(complex(x) for x in s)
        A, gram = A_at(s)
        As.append(A)
        grams.append(gram)
        for perm in ((1, 0, 2), (0, 2, 1), (2, 1, 0)):
            sym = max(sym, float(np.abs(A - A.transpose(perm)).max()))
        metric = tau * gram
        if np.linalg.matrix_rank(metric) == m:
            Mi = np.linalg.inv(metric)
            L = np.einsum("abe,ef,fcd->abcd", A, Mi, A)
            wd = max(wd, float(np.abs(L - L.transpose(2, 1, 0, 3)).max()))
        if family.deformers and family.deformers[0].degree() == 0:
            unit = max(unit, float(np.abs(A[0] - tau * gram).max()))
        dA = []
        for a in range(m):
            sp = list(s); sm = list(s)
            sp[a] += step
            if difference == "central":
                sm[a] -= step
                dA.append((A_at(tuple(sp))[0] - A_at(tuple(sm))[0]) / (2 * step))
            else:
                dA.append((A_at(tuple(sp))[0] - A) / step)
        dA = np.array(dA)                                     # (a, b, c, d)
        integ = max(integ, float(np.abs(dA - dA.transpose(1, 0, 2, 3)).max()))
    G = np.array(grams)
    var = float(np.abs(G - G[0]).max()) if len(G) else 0.0
    return FrobeniusReport([tuple(p) for p in points], np.array(As), sym, unit, wd, integ, var, step)
