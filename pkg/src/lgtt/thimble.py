"""
Lefschetz thimbles, exponential periods and Picard-Lefschetz data in one variable.

Thimbles are traced in the depth parameter ``s``: the descending thimble of
the critical point ``p_a`` is the curve

    tau * (f(z) - w_a) = -s^2,        s in R,

which is the gradient-flow line of ``Re(tau f)`` through ``p_a`` (along it
``Im(tau f)`` is constant and ``Re(tau f)`` decreases in ``|s|``). The
ascending thimble solves ``-tau * (f(z) - w_a) = -s^2``. Points are found by
Newton's method on this equation, so phase constancy holds to rounding.

Orientation: the descending thimble leaves ``p_a`` along
``v = sqrt(-2 / (tau f''(p_a)))`` (principal root, ``Re v > 0``); the
ascending thimble leaves along ``i v``. With these choices
``<C_a^-, C_a^+> = +1``.

Homology of thimbles is recorded in the valley lattice: the relative group
``H_1(C, Re(tau f) << 0)`` of a degree-``d`` polynomial is the lattice of
integer vectors on the ``d`` valleys with zero sum, and a thimble running
from valley ``j`` to valley ``k`` is ``e_k - e_j``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.optimize import linear_sum_assignment

__all__ = [
    "CriticalData",
    "Thimble",
    "WallEvent",
    "PeriodMatrix",
    "MonodromyResult",
    "StokesProximity",
    "QuadratureError",
    "UnresolvedCrossing",
    "TangentialCrossing",
    "critical_points",
    "detect_walls",
    "trace_thimble",
    "off_wall_tau",
    "period_integral",
    "period_matrix",
    "intersection_number",
    "wall_crossing_transform",
    "valley_vector",
    "thimble_basis_lattice",
    "transport",
    "monodromy_along_loop",
    "witten_map",
    "witten_matrix",
    "real_structure",
    "RealStructure",
    "maslov_degree",
    "wall_intersection_number",
    "tau_loop",
    "valley_angles",
]

GL8_X, GL8_W = np.polynomial.legendre.leggauss(8)


class StokesProximity(RuntimeError):
    """A traced thimble ran into another critical point (parameters on or near a wall)."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class QuadratureError(RuntimeError):
    pass


class UnresolvedCrossing(RuntimeError):
    """Consecutive thimble bases differ by more than one Picard-Lefschetz move."""


class TangentialCrossing(RuntimeError):
    pass


# --------------------------------------------------------------------------
# family plumbing

def _family_coeffs(family, t=None) -> np.ndarray:
    """Complex coefficients of ``f_t`` (no tau), low to high."""
    if hasattr(family, "univariate_coefficients"):
        if hasattr(family, "deformers"):
            return np.asarray(family.univariate_coefficients(t), dtype=complex)
        return np.asarray(family.univariate_coefficients(), dtype=complex)
    return np.asarray(family, dtype=complex)


def _trim(c):
    c = np.asarray(c, dtype=complex)
    k = len(c)
    while k > 1 and c[k - 1] == 0:
        k -= 1
    return c[:k]


def _family_tau(family, tau):
    if tau is not None:
        return complex(tau)
    return complex(getattr(family, "tau", 1.0))


def _family_t(family, t):
    if t is not None:
        return tuple(complex(x) for x in t)
    return tuple(complex(x) for x in getattr(family, "t", ()))


# --------------------------------------------------------------------------
# critical points

@dataclass(frozen=True)
class CriticalData:
    points: np.ndarray          # p_a, in canonical order (ascending Im(tau w_a))
    values: np.ndarray          # w_a = f(p_a)
    hessians: np.ndarray        # f''(p_a)
    multiplicities: tuple
    morse: bool
    tau: complex
    coefficients: np.ndarray

    @property
    def mu(self) -> int:
        return int(sum(self.multiplicities))

    def phases(self) -> np.ndarray:
        return (self.tau * self.values).imag


def critical_points(f, tau: complex = 1.0, t=None, sep_tol: float = 1e-7) -> CriticalData:
    """Roots of ``f'`` (companion eigenvalues + Newton polish) sorted by ``Im(tau w_a)``.

    Parameters
    ----------
    f : DeformationFamily, LaurentPolynomial or coefficient array (low to high)
    tau : complex
    t : sequence, optional
        Parameters for a family.
    sep_tol : float
        Roots closer than ``sep_tol * scale`` are merged into one non-Morse point.
    """
    c = _trim(_family_coeffs(f, t))
    if len(c) < 3:
        raise ValueError("need degree >= 2")
    d1 = P.polyder(c)
    d2 = P.polyder(d1)
    roots = P.polyroots(d1) if len(d1) > 1 else np.zeros(0, dtype=complex)
    roots = np.asarray(roots, dtype=complex)
    for _ in range(6):
        fp, fpp = P.polyval(roots, d1), P.polyval(roots, d2)
        ok = np.abs(fpp) > 1e-300
        roots = np.where(ok, roots - fp / np.where(ok, fpp, 1), roots)
    scale = max(1.0, float(np.abs(roots).max(initial=0.0)))
    # cluster near-coincident roots
    groups = []
    for r in roots:
        for g in groups:
            if abs(g[0] - r) < sep_tol * scale:
                g.append(r)
                break
        else:
            groups.append([r])
    pts = np.array([np.mean(g) for g in groups], dtype=complex)
    mult = tuple(len(g) for g in groups)
    tau = complex(tau)
    vals = P.polyval(pts, c)
    hess = P.polyval(pts, d2)
    hscale = max(1.0, float(np.abs(c).max()))
    morse = all(m == 1 for m in mult) and bool(np.all(np.abs(hess) > 1e-10 * hscale))
    order = np.lexsort(((tau * vals).real, (tau * vals).imag))
    return CriticalData(pts[order], vals[order], hess[order], tuple(mult[i] for i in order), morse, tau, c)


@dataclass(frozen=True)
class WallEvent:
    location: object
    indices: tuple
    intersection: int = 0
    side: str = ""             # "Left" | "Right" | ""
    gap: float = 0.0


def detect_walls(f, tau: complex = 1.0, t=None, tol: float = 1e-9) -> list:
    """Pairs of critical points whose values have equal ``Im(tau w)`` (within ``tol`` times the scale)."""
    cd = critical_points(f, tau, t)
    ph = cd.phases()
    scale = max(1.0, float(np.abs(tau * cd.values).max()))
    out = []
    for i in range(len(ph)):
        for j in range(i + 1, len(ph)):
            gap = abs(ph[i] - ph[j])
            if gap < tol * scale:
                out.append(WallEvent(t, (i, j), gap=float(gap)))
    return out


# --------------------------------------------------------------------------
# tracing

@dataclass
class Thimble:
    """Oriented thimble through ``p_a`` sampled at depth parameters ``s`` (increasing)."""

    index: int
    sign: str                     # "-" descending, "+" ascending
    s: np.ndarray
    z: np.ndarray
    dz: np.ndarray                # dz/ds at the samples
    point: complex
    value: complex
    direction: complex            # dz/ds at s = 0
    tau: complex
    t: tuple
    coefficients: np.ndarray
    phase_error: float = 0.0

    @property
    def k(self) -> complex:
        return self.tau if self.sign == "-" else -self.tau

    @property
    def phase(self) -> float:
        return float((self.tau * self.value).imag)

    def exponent(self, z) -> np.ndarray:
        return self.k * P.polyval(z, self.coefficients)

    def table(self) -> np.ndarray:
        """Columns ``s, Re z, Im z, Re(tau f), Im(tau f)``."""
        tf = self.tau * P.polyval(self.z, self.coefficients)
        return np.column_stack([self.s, self.z.real, self.z.imag, tf.real, tf.imag])


def _principal_direction(k, fpp):
    v = cmath.sqrt(-2.0 / (k * fpp))
    re = 0.0 if abs(v.real) < 1e-12 * abs(v) else v.real
    if re < 0 or (re == 0 and v.imag < 0):
        v = -v
    return v


def _solve_level(c, d1, k, w, s, z0, iters=40, tol=1e-14):
    """Newton for ``k (f(z) - w) + s^2 = 0`` (vectorized)."""
    z = np.array(z0, dtype=complex, copy=True)
    s2 = np.asarray(s, dtype=float) ** 2
    scale = 1.0 + np.abs(s2)
    for _ in range(iters):
        F = k * (P.polyval(z, c) - w) + s2
        dF = k * P.polyval(z, d1)
        step = F / dF
        z = z - step
        if np.all(np.abs(F) < tol * scale * 10) and np.all(np.abs(step) < 1e-13 * (1 + np.abs(z))):
            break
    F = k * (P.polyval(z, c) - w) + s2
    return z, np.abs(F) / scale


def trace_thimble(f, tau: complex = 1.0, t=None, a: int = 0, sign: str = "-",
                  s_max: float = 5.0, ds: float = 0.05, direction: complex | None = None,
                  stokes_tol: float = 1e-6, crit: CriticalData | None = None) -> Thimble:
    """Trace the thimble of the ``a``-th critical point (canonical order).

    Parameters
    ----------
    f : family, polynomial or coefficient array
    tau, t : coupling and family parameters
    a : int
        Index in the canonical order of :func:`critical_points`.
    sign : {"-", "+"}
        Descending (``Re(tau f)`` decreasing away from ``p_a``) or ascending.
    s_max : float
        Depth cap; the weight ``exp(-2 s^2)`` at the ends is ``exp(-2 s_max^2)``.
    ds : float
        Initial step in ``s``; steps are halved near other critical points.
    direction : complex, optional
        Orientation hint: the start direction closest to it is used instead
        of the canonical one.
    """
    if sign not in ("-", "+"):
        raise ValueError("sign must be '-' or '+'")
    tau = _family_tau(f, tau)
    tt = _family_t(f, t)
    cd = crit or critical_points(f, tau, t)
    if not cd.morse:
        raise ValueError("critical points are not all Morse")
    c = cd.coefficients
    d1 = P.polyder(c)
    p, w, fpp = cd.points[a], cd.values[a], cd.hessians[a]
    k = tau if sign == "-" else -tau
    v = _principal_direction(tau, fpp)
    if sign == "+":
        v = 1j * v
    if direction is not None:
        if abs(v - direction) > abs(-v - direction):
            v = -v
    others = np.delete(cd.points, a)
    sep = float(np.abs(others - p).min()) if len(others) else 1.0
    branches = []
    for br in (1.0, -1.0):
        ss, zs, ders = [0.0], [p], [br * v]
        s_cur, z_cur, d_cur = 0.0, p, br * v
        h = ds * min(1.0, sep / (abs(v) + 1e-300))
        h = max(h, 1e-6)
        while s_cur < s_max - 1e-9:
            hh = min(h, s_max - s_cur)
            s_new = s_cur + hh
            guess = z_cur + hh * d_cur if s_cur > 0 else p + s_new * br * v
            z_new, res = _solve_level(c, d1, k, w, s_new, guess)
            dist_prev = abs(z_new - z_cur)
            near = float(np.abs(others - z_new).min()) if len(others) else np.inf
            # reject steps that jump branches or skip too far around another point
            if (res > 1e-10 or not np.isfinite(z_new) or dist_prev > 0.25 * max(near, 1e-3 * sep) + 4 * hh * abs(d_cur)
                    or (s_cur > 0 and np.real(np.conj(z_new - z_cur) * d_cur) <= 0)):
                h = hh / 2
                if h < 1e-10:
                    j = int(np.argmin(np.abs(cd.points - z_new))) if len(others) else None
                    raise StokesProximity(f"thimble of point {a} stalls near critical point {j}", j)
                continue
            if near < stokes_tol * max(1.0, sep):
                j = int(np.argmin(np.abs(cd.points - z_new)))
                raise StokesProximity(f"thimble of point {a} passes through critical point {j}", j)
            fp = P.polyval(z_new, d1)
            d_new = -2 * s_new / (k * fp)
            s_cur, z_cur, d_cur = s_new, z_new, d_new
            ss.append(s_cur)
            zs.append(z_cur)
            ders.append(d_cur)
            h = min(ds, h * 1.5)
        branches.append((np.array(ss), np.array(zs), np.array(ders)))
    (s1, z1, d1_), (s2, z2, d2_) = branches
    s = np.concatenate([-s2[::-1], s1[1:]])
    z = np.concatenate([z2[::-1], z1[1:]])
    # along the negative branch s -> -s, so dz/ds changes sign
    dz = np.concatenate([-d2_[::-1], d1_[1:]])
    tf = tau * P.polyval(z, c)
    perr = float(np.abs(tf.imag - (tau * w).imag).max())
    return Thimble(a, sign, s, z, dz, p, w, v, tau, tt, c, perr)


# --------------------------------------------------------------------------
# quadrature

def _hermite(s0, s1, z0, z1, d0, d1, x):
    h = s1 - s0
    u = (x - s0) / h
    h00 = 2 * u ** 3 - 3 * u ** 2 + 1
    h10 = u ** 3 - 2 * u ** 2 + u
    h01 = -2 * u ** 3 + 3 * u ** 2
    h11 = u ** 3 - u ** 2
    return h00 * z0 + h10 * h * d0 + h01 * z1 + h11 * h * d1


def _taylor_at(c: np.ndarray, p: complex) -> np.ndarray:
    """Coefficients of ``f(p + u)`` in ``u``."""
    out = np.zeros(len(c), dtype=complex)
    cur = np.asarray(c, dtype=complex)
    fact = 1.0
    for j in range(len(c)):
        out[j] = P.polyval(p, cur) / fact
        cur = P.polyder(cur) if len(cur) > 1 else np.zeros(1, dtype=complex)
        fact *= j + 1
    return out


def _cell_values(th: Thimble, a: np.ndarray, b: np.ndarray, forms) -> np.ndarray:
    """GL8 estimates of ``int exp(-2 s^2) g(z) dz`` on each cell ``[a_i, b_i]`` (cells x forms),
    and a rounding floor per cell.

    The floor is the cell's absolute mass times machine epsilon, plus the
    propagated error of the level-set inversion, which grows where ``f'``
    is small (a thimble running close to another critical point).

    Nodes start from the cubic Hermite interpolant of the trace and are
    projected back onto the exact level set by Newton's method.
    """
    s, z, dz = th.s, th.z, th.dz
    x = 0.5 * (b - a)[:, None] * GL8_X[None, :] + 0.5 * (a + b)[:, None]
    w = 0.5 * (b - a)[:, None] * GL8_W[None, :]
    i = np.clip(np.searchsorted(s, x, side="right") - 1, 0, len(s) - 2)
    guess = _hermite(s[i], s[i + 1], z[i], z[i + 1], dz[i], dz[i + 1], x)
    # solve in the offset u = z - p so that small |s| keeps full relative precision
    tc = _taylor_at(th.coefficients, th.point)
    tc[:2] = 0
    du = P.polyder(tc)
    q = tc[2:] * np.arange(2, len(tc))            # f'(p + u) = u * q(u)
    s2 = x.ravel() ** 2
    u = (guess - th.point).ravel()
    for _ in range(50):
        F = th.k * P.polyval(u, tc) + s2
        step = F / (th.k * P.polyval(u, du))
        u = u - step
        if np.all(np.abs(step) <= 1e-15 * np.abs(u) + 1e-300):
            break
    res = np.abs(th.k * P.polyval(u, tc) + s2) / (1.0 + s2)
    if not np.all(res < 1e-9):
        raise QuadratureError(f"Newton failed at {int(np.sum(res >= 1e-9))} quadrature nodes")
    u = u.reshape(x.shape)
    Z = th.point + u
    fp = u * P.polyval(u, q)
    base = w * np.exp(-2 * x ** 2) * (-2 * x / (th.k * fp))
    terms = [base * P.polyval(Z, g) for g in forms]
    vals = np.stack([np.sum(v, axis=1) for v in terms], axis=1)
    # rounding of F is ~ eps * sum |tc_j u^j|; it moves u by that over |f'| and the integrand by |f''/f'| times that
    eps = np.finfo(float).eps
    au = np.abs(u)
    size = sum(abs(cj) * au ** j for j, cj in enumerate(tc)) + np.abs(x) ** 2 / abs(th.k)
    fpp = P.polyval(u, P.polyder(du))
    rel = eps * size * np.abs(fpp) / np.maximum(np.abs(fp) ** 2, 1e-300)
    mass = np.max([np.sum(np.abs(v) * (eps + rel), axis=1) for v in terms], axis=0)
    return vals, mass


def _thimble_integral(th: Thimble, forms, rtol=1e-12, max_cells: int = 200000):
    """``int exp(-2 s^2) g(z) dz`` over the thimble for each coefficient array ``g``.

    Adaptive bisection on the traced breakpoints: a cell is accepted when
    its GL8 value and the sum over its two halves agree to
    ``rtol * scale * (cell length / total length)``, or to the rounding
    level of the cell's absolute mass. Returns the values and the
    accumulated relative error estimate.
    """
    s = th.s
    keep = np.concatenate([[True], np.diff(s) > 1e-12])
    edges = s[keep]
    a, b = edges[:-1], edges[1:]
    coarse, _ = _cell_values(th, a, b, forms)
    scale = max(float(np.abs(coarse.sum(axis=0)).max()), 1e-300)
    L = float(edges[-1] - edges[0])
    total = np.zeros(len(forms), dtype=complex)
    err_sum = 0.0
    n_cells = len(a)
    while len(a):
        m = 0.5 * (a + b)
        fine, mass = _cell_values(th, np.concatenate([a, m]), np.concatenate([m, b]), forms)
        fine = fine[: len(a)] + fine[len(a):]
        mass = mass[: len(a)] + mass[len(a):]
        err = np.abs(fine - coarse).max(axis=1)
        ok = err <= np.maximum(rtol * scale * (b - a) / L, 256 * mass)
        total += fine[ok].sum(axis=0)
        err_sum += float(err[ok].sum())
        a, b, coarse = np.concatenate([a[~ok], m[~ok]]), np.concatenate([m[~ok], b[~ok]]), None
        if len(a):
            n_cells += len(a)
            if n_cells > max_cells or float((b - a).min()) < 1e-13:
                raise QuadratureError(f"quadrature did not converge ({len(a)} unresolved cells)")
            coarse, _ = _cell_values(th, a, b, forms)
    return total, err_sum / scale


def _mode_factor(th: Thimble, mode: str) -> complex:
    """``exp(E)`` at the critical point: holomorphic ``exp(2 k w)``, twisted ``exp(2 Re(k w))``."""
    kw = th.k * th.value
    if mode == "Holomorphic":
        return cmath.exp(2 * kw)
    if mode == "Twisted":
        return math.exp(2 * kw.real)
    raise ValueError("mode must be 'Twisted' or 'Holomorphic'")


def period_integral(th: Thimble, form=None, mode: str = "Holomorphic", rtol: float = 1e-12) -> complex:
    """Normalized period ``tau^(1/2) int_C exp(E) g dz``.

    ``E = 2 k f`` in the holomorphic mode and ``E = 2 Re(k f)`` in the twisted
    mode, with ``k = tau`` on descending and ``k = -tau`` on ascending
    thimbles. Along a thimble ``Im(k f)`` is constant, so the two modes differ
    by the phase ``exp(-2i Im(k w_a))``.

    Parameters
    ----------
    th : Thimble
    form : coefficient array of ``g`` (low to high), default ``g = 1``
    """
    g = np.array([1.0 + 0j]) if form is None else np.asarray(form, dtype=complex)
    val, _ = _thimble_integral(th, [g], rtol)
    return complex(cmath.sqrt(th.tau) * _mode_factor(th, mode) * val[0])


@dataclass
class PeriodMatrix:
    """Periods of the deformation forms over the canonical thimble bases.

    ``minus[a, j]`` and ``plus[a, j]`` are ``tau^(-1/2) int_{C_a} (d_j E) exp(E) dz``
    over the descending and ascending thimble of ``p_a``; ``primitive`` holds
    ``tau^(-1/2) int exp(E) dz`` (rows ``-``, ``+``).
    """

    minus: np.ndarray
    plus: np.ndarray
    primitive: np.ndarray
    eta: np.ndarray
    points: np.ndarray
    values: np.ndarray
    tau: complex
    t: tuple
    mode: str
    labels: list
    errors: np.ndarray = field(default=None)

    @property
    def pairing_constant(self) -> complex:
        # Gaussian calibration: holomorphic (2 k g) columns give 4 pi i, twisted (k g) give pi i
        return 4j * np.pi if self.mode == "Holomorphic" else 1j * np.pi

    def intersection_matrix(self) -> np.ndarray:
        """``Pi^- eta^-1 (Pi^+)^T`` divided by the Gaussian pairing constant."""
        return self.minus @ np.linalg.solve(self.eta, self.plus.T) / self.pairing_constant

    def to_rows(self) -> list:
        rows = []
        for side, M in (("-", self.minus), ("+", self.plus)):
            for a in range(M.shape[0]):
                rows.append([side, a + 1] + [complex(x) for x in M[a]])
        return rows


def _forms(f, t, crit_count):
    if hasattr(f, "deformers"):
        n = len(f.deformers)
        if n == 0:
            return [np.eye(crit_count, dtype=complex)[i] for i in range(crit_count)], \
                [f"z^{i}" for i in range(crit_count)]
        out = []
        for g in f.deformers:
            if g.nvars != 1 or not g.is_polynomial:
                raise ValueError("thimble periods need polynomial one-variable deformers")
            out.append(np.asarray(g.univariate_coefficients(), dtype=complex))
        return out, [str(g) for g in f.deformers]
    return [np.eye(crit_count, dtype=complex)[i] for i in range(crit_count)], [f"z^{i}" for i in range(crit_count)]


def _residue_eta(cd: CriticalData, forms) -> np.ndarray:
    g = np.array([P.polyval(cd.points, fm) for fm in forms])          # (forms, points)
    return (g / cd.hessians[None, :]) @ g.T


def off_wall_tau(f, tau: complex | None = None, t=None, perturb: float = 1e-7, attempts: int = 4) -> tuple:
    """Rotate ``tau`` by the smallest phase ``0, perturb, 10 perturb, ...`` that lets every thimble trace.

    Returns ``(tau', phase)``; ``phase = 0`` when the input is already off the walls.

    Raises
    ------
    StokesProximity
        If no tried rotation clears the wall.
    """
    tau = _family_tau(f, tau)
    tt = t if hasattr(f, "deformers") else None
    for attempt in range(attempts):
        eps = 0.0 if attempt == 0 else perturb * 10 ** (attempt - 1)
        ta = tau * cmath.exp(1j * eps)
        try:
            cd = critical_points(f, ta, tt)
            for a in range(len(cd.points)):
                for sign in "-+":
                    trace_thimble(f, ta, tt, a=a, sign=sign, crit=cd)
            return ta, eps
        except StokesProximity:
            continue
    raise StokesProximity("parameters sit on a wall; tau rotation failed")


def period_matrix(f, tau: complex | None = None, t=None, mode: str = "Holomorphic",
                  forms=None, rtol: float = 1e-12, s_max: float = 5.0) -> PeriodMatrix:
    """Period matrices over the canonical descending and ascending bases.

    The forms default to the deformers of a family (these must span the
    Milnor algebra); for a bare polynomial the monomials ``1, ..., z^(mu-1)``
    are used. ``eta`` is the residue pairing of the forms at ``f_t``.
    """
    tau = _family_tau(f, tau)
    tt = _family_t(f, t)
    cd = critical_points(f, tau, t if hasattr(f, "deformers") else None)
    if not cd.morse:
        raise ValueError("periods need Morse critical points")
    if forms is None:
        forms, labels = _forms(f, t, len(cd.points))
    else:
        forms = [np.asarray(g, dtype=complex) for g in forms]
        labels = [f"g{j + 1}" for j in range(len(forms))]
    mu = len(cd.points)
    if len(forms) != mu:
        raise ValueError(f"need {mu} forms, got {len(forms)}")
    eta = _residue_eta(cd, forms)
    if abs(np.linalg.det(eta)) < 1e-12 * max(1.0, np.abs(eta).max()) ** mu:
        raise ValueError("forms do not span the Milnor algebra (degenerate residue pairing)")
    pref = 1.0 / cmath.sqrt(tau)
    mats = {}
    prim = np.zeros((2, mu), dtype=complex)
    errs = np.zeros((2, mu))
    for r, sign in enumerate("-+"):
        M = np.zeros((mu, mu), dtype=complex)
        for a in range(mu):
            th = trace_thimble(f, tau, t, a=a, sign=sign, s_max=s_max, crit=cd)
            vals, err = _thimble_integral(th, forms + [np.array([1.0 + 0j])], rtol)
            fac = pref * _mode_factor(th, mode)
            # d_j E = 2 k g_j (holomorphic) or, along the thimble, k g_j in the twisted normalization
            dE = 2 * th.k if mode == "Holomorphic" else th.k
            M[a] = fac * dE * vals[:-1]
            prim[r, a] = fac * vals[-1]
            errs[r, a] = err
        mats[sign] = M
    return PeriodMatrix(mats["-"], mats["+"], prim, eta, cd.points, cd.values, tau, tt, mode, labels, errs)


# --------------------------------------------------------------------------
# intersections and Picard-Lefschetz moves

def _segments_cross(za, zb):
    """Proper crossings between polylines ``za`` and ``zb``: list of (i, j, sign, sin_angle)."""
    a0, a1 = za[:-1, None], za[1:, None]
    b0, b1 = zb[None, :-1], zb[None, 1:]
    da, db = a1 - a0, b1 - b0
    cross = lambda u, v: (np.conj(u) * v).imag
    den = cross(da, db)
    with np.errstate(divide="ignore", invalid="ignore"):
        u = cross(b0 - a0, db) / den
        v = cross(b0 - a0, da) / den
    hit = (den != 0) & (u >= 0) & (u < 1) & (v >= 0) & (v < 1)
    out = []
    for i, j in zip(*np.nonzero(hit)):
        sa, sb = da[i, 0], db[0, j]
        sin = den[i, j] / (abs(sa) * abs(sb))
        out.append((int(i), int(j), int(np.sign(den[i, j])), float(sin)))
    return out


def intersection_number(first: Thimble, second: Thimble, angle_tol: float = 1e-6) -> int:
    """Signed count of transversal crossings of two traced thimbles.

    A crossing counts ``+1`` when ``Im(conj(d1) d2) > 0`` for the tangents
    ``d1`` of ``first`` and ``d2`` of ``second``, so ``<C_a^-, C_a^+> = +1``.

    Raises
    ------
    TangentialCrossing
        If two pieces meet at an angle below ``angle_tol``.
    """
    total = 0
    for _, _, sg, sin in _segments_cross(first.z, second.z):
        if abs(sin) < angle_tol:
            raise TangentialCrossing("thimbles meet tangentially")
        total += sg
    return total


def wall_crossing_transform(basis: np.ndarray, i: int, I: int, side: str) -> np.ndarray:
    """Picard-Lefschetz move on rows ``i, i+1`` of an (integer) basis matrix.

    ``Left``: ``C_i <- C_{i+1} + I C_i``, ``C_{i+1} <- C_i``.
    ``Right``: ``C_i <- C_{i+1}``, ``C_{i+1} <- C_i + I C_{i+1}``.
    """
    B = np.array(basis, copy=True)
    ci, cj = B[i].copy(), B[i + 1].copy()
    if side == "Left":
        B[i], B[i + 1] = cj + I * ci, ci
    elif side == "Right":
        B[i], B[i + 1] = cj, ci + I * cj
    else:
        raise ValueError("side must be 'Left' or 'Right'")
    return B


def _pl_matrix(mu, i, I, side):
    return wall_crossing_transform(np.eye(mu, dtype=np.int64), i, I, side)


def _classify_move(W: np.ndarray):
    """Identify ``W`` as identity or a single move; return (i, I, side) or None for identity."""
    mu = W.shape[0]
    Id = np.eye(mu, dtype=np.int64)
    if np.array_equal(W, Id):
        return None
    for i in range(mu - 1):
        for side in ("Left", "Right"):
            r, c = (i, i) if side == "Left" else (i + 1, i + 1)
            I = int(W[r, c])
            if np.array_equal(W, _pl_matrix(mu, i, I, side)):
                return i, I, side
    raise UnresolvedCrossing("basis change is not a single Picard-Lefschetz move; refine the path")


# --------------------------------------------------------------------------
# valley lattice

def _leading(c):
    c = _trim(c)
    return len(c) - 1, c[-1]


def valley_angles(d: int, theta: float, sign: str = "-") -> np.ndarray:
    """Centers of the sectors where ``Re(e^{i theta} z^d) -> -inf`` (``+``: ``-> +inf``)."""
    base = math.pi if sign == "-" else 0.0
    return (base - theta) / d + 2 * math.pi * np.arange(d) / d


def _valley_of(z, d, theta, sign):
    ang = valley_angles(d, theta, sign)
    diff = np.angle(np.exp(1j * (np.angle(z) - ang)))
    j = int(np.argmin(np.abs(diff)))
    return j, float(abs(diff[j]))


def valley_vector(th: Thimble, theta: float | None = None, max_extend: int = 6) -> np.ndarray:
    """Class of a traced thimble in the valley lattice (``e_end - e_start``).

    The ends are extended in depth until each lies within ``pi / (4d)`` of a
    valley direction. ``theta`` is ``arg(tau c_d)``, possibly unwrapped.
    """
    d, cd_ = _leading(th.coefficients)
    if theta is None:
        theta = cmath.phase(th.tau * cd_)
    ext = th
    smax = float(th.s[-1])
    for _ in range(max_extend):
        js, es = _valley_of(ext.z[0], d, theta, th.sign)
        je, ee = _valley_of(ext.z[-1], d, theta, th.sign)
        if es < math.pi / (4 * d) and ee < math.pi / (4 * d):
            v = np.zeros(d, dtype=np.int64)
            v[je] += 1
            v[js] -= 1
            return v
        smax *= 2
        ext = trace_thimble(th.coefficients, th.tau, a=th.index, sign=th.sign, s_max=smax, ds=smax / 100,
                            direction=th.direction)
    raise StokesProximity("thimble ends do not settle into valleys")


def thimble_basis_lattice(f, tau=None, t=None, theta=None, hints=None, crit=None):
    """Valley-lattice matrix ``X`` (``mu x d``) of the canonical descending basis.

    Returns ``(X, crit, directions)``. ``hints`` are orientation hints per
    canonical index.
    """
    tau = _family_tau(f, tau)
    cd = crit or critical_points(f, tau, t)
    rows, dirs = [], []
    for a in range(len(cd.points)):
        th = trace_thimble(cd.coefficients, tau, a=a, sign="-", crit=cd,
                           direction=None if hints is None else hints[a])
        rows.append(valley_vector(th, theta))
        dirs.append(th.direction)
    return np.array(rows, dtype=np.int64), cd, np.array(dirs)


def _basis_change(Xnew, Xold):
    """Integer ``W`` with ``W @ Xold = Xnew`` (rows of both are lattice bases)."""
    A = Xold[:, :-1].astype(float)
    B = Xnew[:, :-1].astype(float)
    W = np.rint(np.linalg.solve(A.T, B.T).T).astype(np.int64)
    if not np.array_equal(W @ Xold, Xnew):
        raise UnresolvedCrossing("thimble classes are not related by an integer change of basis")
    return W


# --------------------------------------------------------------------------
# transport and monodromy

@dataclass
class MonodromyResult:
    matrix: np.ndarray                 # transported basis in the final canonical basis (rows)
    eigenvalues: np.ndarray
    semisimple: bool
    order: int | None                  # N with all eigenvalues N-th roots of unity
    nilpotency: int | None             # smallest m with (T^N - I)^m = 0
    walls: list
    perturbations: list
    orientation: np.ndarray            # D
    valley_shift: int
    path_length: int

    @property
    def quasi_unipotent(self) -> bool:
        return self.order is not None


def _coeffs_at(f, t):
    if hasattr(f, "deformers"):
        return _trim(_family_coeffs(f, t))
    return _trim(_family_coeffs(f))


def tau_loop(tau: complex, t=None, steps: int = 96, turns: float = 1.0) -> list:
    """Samples of ``tau e^{i theta}``, ``theta`` from 0 to ``2 pi turns``, at fixed ``t``."""
    th = np.linspace(0.0, 2 * math.pi * turns, steps + 1)
    out = [(complex(tau) * cmath.exp(1j * x), t) for x in th]
    if float(turns).is_integer():
        out[-1] = (complex(tau), t)
    return out


def transport(f, path: Sequence, perturb: float = 1e-7):
    """Carry the canonical descending basis along a path of ``(tau, t)`` samples.

    Returns ``(S, walls, perturbations, D, shift, X0, Xend)`` where
    ``S = W^-1 D`` expresses the transported basis in the canonical basis at
    the final sample, ``W`` is the product of the per-step moves and ``D``
    the orientation signs at the end.
    """
    path = [(complex(tau), None if t is None else tuple(complex(x) for x in t)) for tau, t in path]
    if len(path) < 2:
        raise ValueError("path needs at least two samples")
    perturbations, walls = [], []

    def sample(k, tau, t, hints, prev_cd, theta):
        for attempt in range(4):
            eps = 0.0 if attempt == 0 else perturb * 10 ** (attempt - 1)
            tt = tau * cmath.exp(1j * eps)
            try:
                c = _coeffs_at(f, t)
                cd = critical_points(c, tt)
                if not cd.morse:
                    raise StokesProximity("non-Morse sample")
                h = None
                if prev_cd is not None:
                    h = _match(prev_cd, cd, hints)
                X, cd, dirs = thimble_basis_lattice(c, tt, theta=theta, hints=h, crit=cd)
                if eps:
                    perturbations.append({"sample": k, "tau_phase": eps})
                return X, cd, dirs
            except StokesProximity:
                continue
        raise StokesProximity(f"sample {k} sits on a wall; perturbation failed")

    tau0, t0 = path[0]
    d, lead = _leading(_coeffs_at(f, t0))
    theta = cmath.phase(tau0 * lead)
    X0, cd, dirs = sample(0, tau0, t0, None, None, theta)
    X = X0
    W = np.eye(len(cd.points), dtype=np.int64)
    for k in range(1, len(path)):
        tau, t = path[k]
        d_k, lead_k = _leading(_coeffs_at(f, t))
        if d_k != d:
            raise ValueError("degree changes along the path")
        ph = cmath.phase(tau * lead_k)
        theta = theta + (ph - theta + math.pi) % (2 * math.pi) - math.pi
        Xk, cdk, dirk = sample(k, tau, t, dirs, cd, theta)
        Wk = _basis_change(Xk, X)
        move = _classify_move(Wk)
        if move is not None:
            i, I, side = move
            walls.append(WallEvent((tau, t), (i, i + 1), I, side))
        W = Wk @ W
        X, cd, dirs = Xk, cdk, dirk
    canon = np.array([_principal_direction(cd.tau, h) for h in cd.hessians])
    D = np.diag(np.where(np.abs(dirs - canon) < np.abs(dirs + canon), 1, -1)).astype(np.int64)
    Winv = np.rint(np.linalg.inv(W.astype(float))).astype(np.int64)
    if not np.array_equal(Winv @ W, np.eye(len(W), dtype=np.int64)):
        raise UnresolvedCrossing("accumulated basis change is not unimodular")
    shift = int(round((theta - cmath.phase(path[0][0] * _leading(_coeffs_at(f, path[0][1]))[1])) / (2 * math.pi)))
    return Winv @ D, walls, perturbations, D, shift, X0, D @ X


def _match(prev: CriticalData, cd: CriticalData, hints):
    """Orientation hints for ``cd`` from the matched points of ``prev``."""
    dist = np.abs(prev.points[:, None] - cd.points[None, :])
    r, c = linear_sum_assignment(dist)
    sep = np.abs(cd.points[:, None] - cd.points[None, :]) + np.eye(len(cd.points)) * 1e300
    if len(cd.points) > 1 and dist[r, c].max() > 0.3 * sep.min():
        raise UnresolvedCrossing("critical points move too far in one step; refine the path")
    out = [None] * len(cd.points)
    for i, j in zip(r, c):
        # the canonical direction rotates with tau and f''; follow it by continuity
        out[j] = hints[i]
    return out


def _quasi_unipotent(T, tol=1e-8, max_order=64):
    ev = np.linalg.eigvals(T.astype(complex))
    order = None
    for N in range(1, max_order + 1):
        if np.all(np.abs(ev ** N - 1) < 1e-6):
            order = N
            break
    nil = None
    if order is not None:
        A = np.linalg.matrix_power(T.astype(np.int64), order) - np.eye(len(T), dtype=np.int64)
        M = np.eye(len(T), dtype=np.int64)
        for m in range(1, len(T) + 2):
            M = M @ A
            if not M.any():
                nil = m
                break
    return ev, order, nil


def _semisimple(T) -> bool:
    ev, V = np.linalg.eig(T.astype(complex))
    return bool(np.linalg.cond(V) < 1e6)


def monodromy_along_loop(f, loop: Sequence, perturb: float = 1e-7) -> MonodromyResult:
    """Monodromy of the canonical descending basis around a closed loop of ``(tau, t)``.

    Row ``a`` of the matrix gives the transported ``C_a`` in the canonical
    basis; walls crossed on the way are recorded with their moves.
    """
    loop = list(loop)
    (tau0, t0), (tau1, t1) = loop[0], loop[-1]
    same_t = (t0 is None and t1 is None) or np.allclose(np.asarray(t0, complex), np.asarray(t1, complex))
    if abs(complex(tau0) - complex(tau1)) > 1e-9 * abs(complex(tau0)) or not same_t:
        raise ValueError("loop is not closed")
    S, walls, pert, D, shift, X0, Xend = transport(f, loop, perturb)
    # consistency: the final canonical basis, with valleys relabelled, is the initial one
    if not np.array_equal(np.roll(Xend, -shift, axis=1), X0) and not np.array_equal(np.roll(Xend, shift, axis=1), X0):
        raise UnresolvedCrossing("final basis does not close up on the initial one")
    ev, order, nil = _quasi_unipotent(S)
    return MonodromyResult(S, ev, _semisimple(S), order, nil, walls, pert, D, shift, len(loop))


def witten_map(f, tau: complex | None = None, t=None, steps: int = 48) -> np.ndarray:
    """Half-turn transport ``tau -> -tau`` of the canonical descending basis.

    The descending basis at ``-tau`` is the ascending basis at ``tau`` as a
    set of curves, so this matrix compares the two bases.
    """
    tau = _family_tau(f, tau)
    t = _family_t(f, t) if hasattr(f, "deformers") else None
    S, *_ = transport(f, tau_loop(tau, t, steps, turns=0.5))
    return S


def witten_matrix(pm: PeriodMatrix, tol: float = 1e-3) -> tuple:
    """Intersection matrix ``I_W`` from periods and its nearest integer matrix.

    Returns ``(I_W, rounded, max_deviation)``.
    """
    I = pm.intersection_matrix()
    R = np.rint(I.real).astype(np.int64)
    dev = float(np.abs(I - R).max())
    return I, R, dev


def wall_intersection_number(f, tau: complex | None, t, i: int, j: int, eps: float = 1e-3) -> int:
    """Crossing count ``#(C_i^+ cap C_j^-)`` for a pair colliding on a wall.

    On the wall the two curves overlap along the connecting flow line, so
    the phases are split: ``C_j^-`` is traced at ``tau e^{i eps}`` and
    ``C_i^+`` at ``tau e^{-i eps}``; the pair then meets transversally.
    Indices refer to the canonical order at ``tau e^{i eps}``.
    """
    tau = _family_tau(f, tau)
    c = _coeffs_at(f, t)
    cm = critical_points(c, tau * cmath.exp(1j * eps))
    cp = critical_points(c, tau * cmath.exp(-1j * eps))
    # follow index i to the other sample by position
    ip = int(np.argmin(np.abs(cp.points - cm.points[i])))
    tm = trace_thimble(c, cm.tau, a=j, sign="-", crit=cm, s_max=8.0)
    tp = trace_thimble(c, cp.tau, a=ip, sign="+", crit=cp, s_max=8.0)
    return intersection_number(tm, tp)


@dataclass
class RealStructure:
    """Real structure ``M`` and metric ``g`` built from twisted periods in the holomorphic frame."""

    M: np.ndarray
    g: np.ndarray
    involution_error: float          # max |M conj(M) - I|
    hermitian_defect: float          # ||g - g^H|| / ||g||
    hermitian_eigenvalues: np.ndarray
    positive: bool

    @property
    def hermitian(self) -> bool:
        return self.hermitian_defect < 1e-6


def real_structure(pm: PeriodMatrix, eta: np.ndarray | None = None) -> RealStructure:
    """``M = Pi^-1 conj(Pi)`` and ``g = -(eta / |tau|) M`` from the descending periods.

    ``Pi`` is indexed (thimble, form) so ``M`` acts on the form index and
    ``M conj(M) = I`` holds identically. ``eta`` defaults to the residue
    pairing of the forms; dividing by ``|tau|`` makes ``g`` the exact
    Gaussian metric ``1/(2|tau|)``. The forms are holomorphic (not harmonic)
    representatives, so ``g`` is Hermitian only up to the frame correction,
    which decays with ``|tau|``; the defect is reported.
    """
    if pm.mode != "Twisted":
        raise ValueError("the real structure uses Twisted-mode periods")
    Pi = pm.minus
    eta = pm.eta if eta is None else np.asarray(eta)
    M = np.linalg.solve(Pi, Pi.conj())
    g = -(eta / abs(pm.tau)) @ M
    inv = float(np.abs(M @ M.conj() - np.eye(len(M))).max())
    defect = float(np.linalg.norm(g - g.conj().T) / np.linalg.norm(g))
    ev = np.linalg.eigvalsh((g + g.conj().T) / 2)
    return RealStructure(M, g, inv, defect, ev, bool(ev.min() > 0))


def maslov_degree(f, path: Sequence) -> int:
    """Winding number of ``det M`` along a closed path of ``(tau, t)`` samples."""
    phases = []
    for tau, t in path:
        pm = period_matrix(f, tau, t, mode="Twisted")
        phases.append(cmath.phase(np.linalg.det(real_structure(pm).M)))
    ph = np.unwrap(np.array(phases))
    return int(round((ph[-1] - ph[0]) / (2 * math.pi)))
