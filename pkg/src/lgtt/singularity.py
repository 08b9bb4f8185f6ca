"""
Milnor algebras, residue pairings and moduli counts.

The Jacobi ideal is reduced with a graded reverse lexicographic Groebner
basis over the Gaussian rationals (sympy, domain ``QQ_I``). One-variable
algebras skip sympy and divide by ``f'`` directly, which also accepts
complex floating coefficients.

Laurent potentials use the logarithmic derivatives ``z_i df/dz_i`` and an
auxiliary variable ``w_i`` with ``z_i w_i = 1`` for every variable, so the
quotient ``C[z, 1/z] / J`` becomes an ordinary polynomial quotient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Sequence

import numpy as np
import sympy as sp

from .poly import GaussianRational, LaurentPolynomial, partial_derivative

__all__ = [
    "MilnorAlgebra",
    "ModuliCount",
    "MorseError",
    "milnor_algebra",
    "milnor_number_disk",
    "multiplication_matrix",
    "residue_pairing",
    "moduli_dimension",
    "marginal_count",
    "moduli_count",
    "to_complex",
    "exact_matrix",
]

INFINITE = math.inf


class MorseError(ValueError):
    """Raised when a residue computation meets a degenerate critical point."""


def to_complex(M) -> np.ndarray:
    """Complex float view of an exact (object) matrix."""
    M = np.asarray(M)
    return np.vectorize(complex, otypes=[complex])(M) if M.size else M.astype(complex)


def exact_matrix(rows) -> np.ndarray:
    out = np.empty((len(rows), len(rows[0]) if rows else 0), dtype=object)
    for i, r in enumerate(rows):
        for j, v in enumerate(r):
            out[i, j] = GaussianRational.coerce(v)
    return out


# --------------------------------------------------------------------------
# sympy bridge

def _gr_to_sympy(c: GaussianRational):
    return sp.Rational(c.re.numerator, c.re.denominator) + sp.I * sp.Rational(c.im.numerator, c.im.denominator)


def _sympy_to_gr(x) -> GaussianRational:
    x = sp.nsimplify(x) if not x.is_Rational and x.is_number and not x.has(sp.I) else x
    re, im = sp.re(x), sp.im(x)
    return GaussianRational(Fraction(int(re.p), int(re.q)), Fraction(int(im.p), int(im.q)))


@dataclass
class MilnorAlgebra:
    """Quotient of the (Laurent) polynomial ring by the Jacobi ideal of ``source``.

    Attributes
    ----------
    source : LaurentPolynomial
    groebner_basis : list of LaurentPolynomial
        Reduced basis of the Jacobi ideal (in the auxiliary ring for Laurent input).
    monomial_basis : list of tuple
        Standard monomials as Laurent exponent vectors, in grevlex-ascending order.
    mu : int or math.inf
    """

    source: LaurentPolynomial
    groebner_basis: list
    monomial_basis: list
    mu: float
    _reducer: object = field(repr=False, default=None)

    @property
    def finite(self) -> bool:
        return self.mu != INFINITE

    def normal_form(self, g: LaurentPolynomial) -> LaurentPolynomial:
        """Canonical representative of ``g`` modulo the Jacobi ideal."""
        if g.vars != self.source.vars:
            raise ValueError("variable mismatch")
        return self._reducer.reduce(g)

    def coordinates(self, g: LaurentPolynomial) -> list:
        """Coordinates of ``[g]`` in ``monomial_basis`` (exact)."""
        if not self.finite:
            raise ValueError("infinite Milnor number: no finite basis")
        nf = self.normal_form(g)
        index = {e: k for k, e in enumerate(self.monomial_basis)}
        out = [GaussianRational(0)] * self.mu
        for e, c in nf.terms.items():
            if e not in index:
                raise RuntimeError(f"normal form produced non-standard monomial {e}")
            out[index[e]] = c
        return out

    def basis_polynomials(self) -> list:
        return [LaurentPolynomial.monomial(self.source.vars, e) for e in self.monomial_basis]

    def basis_labels(self) -> list:
        return [LaurentPolynomial.monomial(self.source.vars, e).to_string() for e in self.monomial_basis]

    def is_zero_class(self, g: LaurentPolynomial) -> bool:
        return self.normal_form(g).is_zero

    def reduction_table(self) -> dict:
        """Normal forms of ``z_i * basis_a`` (the multiplication table by variables)."""
        table = {}
        vs = self.source.vars
        for i in range(len(vs)):
            zi = LaurentPolynomial.variable(vs, i)
            for e in self.monomial_basis:
                m = LaurentPolynomial.monomial(vs, e)
                table[(vs[i], e)] = self.normal_form(zi * m)
        return table

    def to_dict(self) -> dict:
        d = {
            "vars": list(self.source.vars),
            "source": self.source.to_string(),
            "mu": "infinite" if not self.finite else int(self.mu),
            "groebner_basis": [g.to_string() for g in self.groebner_basis],
        }
        if self.finite:
            d["basis"] = [list(e) for e in self.monomial_basis]
            d["reduction_table"] = [
                {"var": v, "basis": list(e), "normal_form": p.to_dict()["terms"]}
                for (v, e), p in self.reduction_table().items()
            ]
        return d


class _UnivariateReducer:
    """Division by ``f'`` in one variable (exact or complex coefficients)."""

    def __init__(self, vars, fprime: LaurentPolynomial):
        self.vars = vars
        deg = max(e[0] for e in fprime.terms)
        self.deg = deg
        lead = fprime.terms[(deg,)]
        self.monic = {k: c / lead for (k,), c in fprime.terms.items()}

    def reduce(self, g: LaurentPolynomial) -> LaurentPolynomial:
        if not g.is_polynomial:
            raise ValueError("Laurent input to a polynomial Milnor algebra")
        c = dict((e[0], v) for e, v in g.terms.items())
        d = self.deg
        while any(k >= d and v for k, v in c.items()):
            k = max(k for k, v in c.items() if k >= d and v)
            a = c.pop(k)
            for j, m in self.monic.items():
                if j != d:
                    kk = k - d + j
                    c[kk] = c.get(kk, GaussianRational(0)) - a * m
        return LaurentPolynomial(self.vars, {(k,): v for k, v in c.items() if k < d})


class _SympyReducer:
    def __init__(self, vars, laurent: bool, G, gens):
        self.vars = vars
        self.laurent = laurent
        self.G = G
        self.gens = gens
        self.n = len(vars)

    def to_sympy(self, g: LaurentPolynomial):
        n = self.n
        expr = 0
        for e, c in g.terms.items():
            m = _gr_to_sympy(c)
            for i, k in enumerate(e):
                if k > 0:
                    m *= self.gens[i] ** k
                elif k < 0:
                    if not self.laurent:
                        raise ValueError("Laurent input to a polynomial Milnor algebra")
                    m *= self.gens[n + i] ** (-k)
            expr += m
        return sp.Poly(expr, *self.gens, domain=sp.QQ_I)

    def from_sympy(self, p) -> LaurentPolynomial:
        n = self.n
        terms = {}
        for mon, c in sp.Poly(p, *self.gens, domain=sp.QQ_I).terms():
            e = tuple(mon[i] - (mon[n + i] if self.laurent else 0) for i in range(n))
            terms[e] = terms.get(e, GaussianRational(0)) + _domain_to_gr(c)
        return LaurentPolynomial(self.vars, terms)

    def reduce(self, g: LaurentPolynomial) -> LaurentPolynomial:
        if g.is_zero:
            return g
        _, r = self.G.reduce(self.to_sympy(g).as_expr())
        return self.from_sympy(r)


def _domain_to_gr(c) -> GaussianRational:
    # sympy QQ_I elements expose x, y as rationals
    if hasattr(c, "x") and hasattr(c, "y"):
        return GaussianRational(Fraction(int(c.x.numerator), int(c.x.denominator)),
                                Fraction(int(c.y.numerator), int(c.y.denominator)))
    return _sympy_to_gr(sp.sympify(c))


def _standard_monomials(leads: Sequence[tuple], nvars: int, cap: int = 100000):
    """Monomials not divisible by any leading monomial; ``None`` if infinite."""
    pure = [None] * nvars
    for L in leads:
        nz = [i for i, k in enumerate(L) if k]
        if len(nz) == 1:
            i = nz[0]
            pure[i] = L[i] if pure[i] is None else min(pure[i], L[i])
        elif not nz:
            return []          # unit ideal
    if any(p is None for p in pure):
        return None
    out = []
    for e in product(*(range(p) for p in pure)):
        if not any(all(a >= b for a, b in zip(e, L)) for L in leads):
            out.append(e)
            if len(out) > cap:
                raise ValueError("Milnor algebra basis exceeds the size cap")
    return out


def _grevlex_key(e):
    return (sum(e), tuple(-k for k in reversed(e)))


def milnor_algebra(f: LaurentPolynomial) -> MilnorAlgebra:
    """Milnor (Jacobi) algebra of ``f`` with standard-monomial basis.

    Examples
    --------
    >>> from lgtt.poly import parse_polynomial
    >>> A = milnor_algebra(parse_polynomial("x^3 + y^4", ["x", "y"]))
    >>> A.mu
    6
    """
    vs = f.vars
    n = len(vs)
    if f.is_polynomial and n == 1:
        fp = partial_derivative(f, 0)
        if fp.is_zero:
            return MilnorAlgebra(f, [], [], INFINITE, None)
        deg = max(e[0] for e in fp.terms)
        basis = [(k,) for k in range(deg)]
        lead = fp.terms[(deg,)]
        gb = [fp.scale(GaussianRational(1) / lead)]
        return MilnorAlgebra(f, gb, basis, deg, _UnivariateReducer(vs, fp))

    laurent = not f.is_polynomial
    zs = sp.symbols(f"_z0:{n}")
    gens = list(zs)
    if laurent:
        ws = sp.symbols(f"_w0:{n}")
        gens += list(ws)
        reducer = _SympyReducer(vs, True, None, gens)
        ideal = []
        for i in range(n):
            g = partial_derivative(f, i, logarithmic=True)
            ideal.append(reducer.to_sympy(g).as_expr())
        ideal += [zs[i] * ws[i] - 1 for i in range(n)]
    else:
        reducer = _SympyReducer(vs, False, None, gens)
        ideal = [reducer.to_sympy(partial_derivative(f, i)).as_expr() for i in range(n)]
    ideal = [p for p in ideal if p != 0]
    if not ideal:
        return MilnorAlgebra(f, [], [], INFINITE, None)
    G = sp.groebner(ideal, *gens, order="grevlex", domain=sp.QQ_I)
    reducer.G = G
    leads = [sp.Poly(g, *gens, domain=sp.QQ_I).monoms(order="grevlex")[0] for g in G.exprs]
    std = _standard_monomials(leads, len(gens))
    gb = [reducer.from_sympy(g) for g in G.exprs]
    if std is None:
        return MilnorAlgebra(f, gb, [], INFINITE, reducer)
    std.sort(key=_grevlex_key)
    if laurent:
        basis = [tuple(e[i] - e[n + i] for i in range(n)) for e in std]
        if len(set(basis)) != len(basis):
            raise RuntimeError("standard monomials collide as Laurent monomials")
    else:
        basis = [tuple(e) for e in std]
    return MilnorAlgebra(f, gb, basis, len(basis), reducer)


def multiplication_matrix(algebra: MilnorAlgebra, g: LaurentPolynomial) -> np.ndarray:
    """Exact matrix of multiplication by ``[g]``; column ``a`` is ``NF(g * basis_a)``."""
    if not algebra.finite:
        raise ValueError("infinite Milnor number")
    mu = algebra.mu
    M = np.empty((mu, mu), dtype=object)
    for a, b in enumerate(algebra.basis_polynomials()):
        col = algebra.coordinates(g * b)
        for r in range(mu):
            M[r, a] = col[r]
    return M


# --------------------------------------------------------------------------
# critical points and residues

def _hessian_det(f: LaurentPolynomial, pts: np.ndarray) -> np.ndarray:
    n = f.nvars
    H = np.empty((len(pts), n, n), dtype=complex)
    for i in range(n):
        fi = partial_derivative(f, i)
        for j in range(i, n):
            fij = partial_derivative(fi, j)
            v = fij(*[pts[:, k] for k in range(n)]) if not fij.is_zero else np.zeros(len(pts))
            H[:, i, j] = v
            H[:, j, i] = v
    return np.linalg.det(H)


def critical_points_algebraic(f: LaurentPolynomial, algebra: MilnorAlgebra | None = None, seed: int = 0):
    """Critical points of ``f`` as joint eigenvalues of the coordinate multiplications.

    Returns an array of shape ``(mu, n)``. The evaluation functional at a
    critical point is a left eigenvector of every multiplication matrix.
    """
    A = algebra or milnor_algebra(f)
    if not A.finite:
        raise ValueError("infinite Milnor number")
    n = f.nvars
    if A.mu == 0:
        return np.zeros((0, n), dtype=complex)
    Ms = [to_complex(multiplication_matrix(A, LaurentPolynomial.variable(f.vars, i))) for i in range(n)]
    rng = np.random.default_rng(seed)
    c = rng.normal(size=n) + 1j * rng.normal(size=n)
    L = sum(ci * Mi for ci, Mi in zip(c, Ms))
    w, V = np.linalg.eig(L.T)                # rows of V.T are left eigenvectors
    one = A.monomial_basis.index((0,) * n)
    pts = np.empty((A.mu, n), dtype=complex)
    for k in range(A.mu):
        v = V[:, k]
        if abs(v[one]) < 1e-12 * np.abs(v).max():
            raise MorseError("degenerate critical structure (non-semisimple multiplication)")
        v = v / v[one]
        for i in range(n):
            pts[k, i] = (v @ Ms[i])[one]
    return pts


def residue_pairing(f, algebra: MilnorAlgebra | None = None, morse_tol: float = 1e-9) -> np.ndarray:
    """Residue pairing ``eta(g,h) = sum_p g(p) h(p) / det Hess f(p)`` in the monomial basis.

    Parameters
    ----------
    f : LaurentPolynomial or DeformationFamily
        A family is evaluated at its stored parameters (without ``tau``).
    algebra : MilnorAlgebra, optional
    morse_tol : float
        Relative threshold on ``|det Hess|`` and on critical-point separation.

    Raises
    ------
    MorseError
        If a critical point is degenerate.
    """
    if hasattr(f, "member"):
        f = f.member()
    A = algebra or milnor_algebra(f)
    if not A.finite:
        raise MorseError("infinite Milnor number")
    pts = _polished_critical_points(f, A)
    det = _hessian_det(f, pts)
    scale = max(1.0, float(np.abs(det).max()))
    if np.any(np.abs(det) < morse_tol * scale):
        raise MorseError("degenerate critical point (Hessian determinant vanishes)")
    if len(pts) > 1:
        d = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
        d[np.diag_indices(len(pts))] = np.inf
        if d.min() < morse_tol ** 0.5 * max(1.0, np.abs(pts).max()):
            raise MorseError("coalescing critical points")
    vals = np.array([
        [np.prod([p[i] ** e[i] for i in range(f.nvars)]) for p in pts] for e in A.monomial_basis
    ])                                          # (mu basis, points)
    return (vals / det) @ vals.T


def _polished_critical_points(f: LaurentPolynomial, A: MilnorAlgebra) -> np.ndarray:
    n = f.nvars
    if n == 1 and f.is_polynomial:
        c = partial_derivative(f, 0).univariate_coefficients()
        roots = np.roots(c[::-1]) if len(c) > 1 else np.zeros(0)
        pts = roots.reshape(-1, 1).astype(complex)
    else:
        pts = critical_points_algebraic(f, A)
    grads = [partial_derivative(f, i) for i in range(n)]
    hess = [[partial_derivative(g, j) for j in range(n)] for g in grads]
    for k in range(len(pts)):
        z = pts[k].copy()
        for _ in range(8):
            F = np.array([complex(g(*z)) for g in grads])
            J = np.array([[complex(h(*z)) for h in row] for row in hess])
            try:
                dz = np.linalg.solve(J, -F)
            except np.linalg.LinAlgError:
                break
            z = z + dz
            if np.abs(dz).max() < 1e-15 * max(1.0, np.abs(z).max()):
                break
        pts[k] = z
    return pts


def milnor_number_disk(f: LaurentPolynomial, center: complex = 0.0, radius: float = 1.0,
                       samples: int = 4096, margin: float = 1e-8) -> int:
    """Number of critical points (with multiplicity) of a 1-variable ``f`` in a disk.

    Winding number of ``f'`` around the boundary circle.
    """
    if f.nvars != 1:
        raise ValueError("milnor_number_disk is for one variable")
    fp = partial_derivative(f, 0)
    if fp.is_zero:
        raise ValueError("f' vanishes identically")
    c = fp.univariate_coefficients() if fp.is_polynomial else None
    th = np.linspace(0.0, 2 * np.pi, samples, endpoint=False)
    z = center + radius * np.exp(1j * th)
    w = np.polynomial.polynomial.polyval(z, c) if c is not None else fp(z)
    roots = np.roots(c[::-1]) if c is not None and len(c) > 1 else np.zeros(0)
    dist = np.abs(np.abs(roots - center) - radius) if len(roots) else np.array([np.inf])
    if dist.min() < margin * max(1.0, radius) or np.abs(w).min() == 0.0:
        raise ValueError("a critical point lies on the boundary circle")
    ph = np.unwrap(np.angle(np.append(w, w[0])))
    return int(round((ph[-1] - ph[0]) / (2 * np.pi)))


# --------------------------------------------------------------------------
# moduli counts

@dataclass(frozen=True)
class ModuliCount:
    n: int
    d: int
    moduli_dim: int
    marginal_count: int
    exceptional: bool
    note: str = ""

    @property
    def match(self) -> bool:
        return self.moduli_dim == self.marginal_count


def marginal_count(n: int, d: int) -> int:
    """Degree-``d`` monomials in the Milnor algebra of the Fermat ``z_1^d + ... + z_n^d``."""
    _check_nd(n, d)
    return math.comb(n - 1 + d, n - 1) - n - n * (n - 1)


def moduli_dimension(n: int, d: int) -> int:
    """``dim H^1(X, Theta_X)`` for a smooth degree-``d`` hypersurface ``X`` in ``P^{n-1}``.

    Equal to ``binom(n-1+d, d) - n^2`` except for quartic surfaces, where the
    K3 moduli has one extra non-algebraic direction (20 instead of 19).
    """
    _check_nd(n, d)
    if (n, d) == (4, 4):
        return 20
    return math.comb(n - 1 + d, d) - n * n


def moduli_count(n: int, d: int) -> ModuliCount:
    m, k = moduli_dimension(n, d), marginal_count(n, d)
    exc = (n, d) == (4, 4)
    note = "quartic K3: one transcendental direction is not a marginal deformation" if exc else ""
    return ModuliCount(n, d, m, k, exc, note)


def _check_nd(n, d):
    if n < 2 or d < 2:
        raise ValueError("need n >= 2 and d >= 2")
