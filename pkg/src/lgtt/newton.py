"""
Newton polytopes, convenience and nondegeneracy of Laurent polynomials.

All hull computations are exact (integers and ``Fraction``). The face lattice
is built from the facets: every face of a polytope is an intersection of
facets, and the sum of the outward normals of the facets through a face
exposes exactly that face.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from math import gcd
from typing import Sequence

import numpy as np
import sympy as sp

from .poly import GaussianRational, LaurentPolynomial, partial_derivative

__all__ = [
    "Face",
    "NewtonPolytope",
    "NondegeneracyCertificate",
    "newton_polytope",
    "is_convenient",
    "face_polynomial",
    "is_nondegenerate_laurent",
    "subdiagram_basis",
    "exact_rank",
]


@dataclass(frozen=True)
class Face:
    """A face ``{x in P : <normal, x> = offset}``; the polytope itself has normal 0."""

    dim: int
    vertices: frozenset        # indices into NewtonPolytope.vertices
    normal: tuple              # primitive integer outward normal (ambient coordinates)
    offset: int
    points: frozenset          # exponent vectors of f lying on the face

    def contains(self, x) -> bool:
        return sum(a * b for a, b in zip(self.normal, x)) == self.offset


@dataclass(frozen=True)
class NewtonPolytope:
    vertices: tuple
    faces: tuple
    interior_points: tuple
    dim: int
    ambient_dim: int
    support: tuple = field(default=(), repr=False)

    @property
    def facets(self):
        return tuple(F for F in self.faces if F.dim == self.dim - 1)

    def face_of_dim(self, k: int):
        return tuple(F for F in self.faces if F.dim == k)

    def full_face(self) -> Face:
        return next(F for F in self.faces if F.dim == self.dim)

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "vertices": [list(v) for v in self.vertices],
            "faces": [
                {"dim": F.dim, "vertices": sorted(F.vertices), "normal": list(F.normal), "offset": F.offset}
                for F in self.faces
            ],
            "interior_points": [list(p) for p in self.interior_points],
        }


# --------------------------------------------------------------------------
# exact linear algebra helpers

def _rank(vectors) -> int:
    M = [[Fraction(x) for x in v] for v in vectors]
    return _rref(M)[1]


def _rref(M):
    M = [row[:] for row in M]
    if not M:
        return M, 0
    rows, cols = len(M), len(M[0])
    r = 0
    for c in range(cols):
        p = next((i for i in range(r, rows) if M[i][c] != 0), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        inv = 1 / M[r][c]
        M[r] = [x * inv for x in M[r]]
        for i in range(rows):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        r += 1
        if r == rows:
            break
    return M, r


def _nullvector(rows, n):
    """A nonzero integer vector orthogonal to ``rows`` (assumes nullity 1)."""
    M, r = _rref([[Fraction(x) for x in row] for row in rows])
    pivots = []
    for row in M[:r]:
        pivots.append(next(j for j, x in enumerate(row) if x != 0))
    free = [j for j in range(n) if j not in pivots]
    if len(free) != 1:
        return None
    fj = free[0]
    v = [Fraction(0)] * n
    v[fj] = Fraction(1)
    for row, pj in zip(M[:r], pivots):
        v[pj] = -row[fj]
    return _primitive(v)


def _primitive(v):
    den = 1
    for x in v:
        den = den * Fraction(x).denominator // gcd(den, Fraction(x).denominator)
    w = [int(Fraction(x) * den) for x in v]
    g = 0
    for x in w:
        g = gcd(g, abs(x))
    return tuple(x // g for x in w) if g else tuple(w)


def exact_rank(rows) -> int:
    """Rank of a matrix of Gaussian rationals, exactly."""
    M = [[GaussianRational.coerce(x) for x in r] for r in rows]
    if not M:
        return 0
    rows_, cols = len(M), len(M[0])
    r = 0
    for c in range(cols):
        p = next((i for i in range(r, rows_) if M[i][c]), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        piv = M[r][c]
        for i in range(r + 1, rows_):
            if M[i][c]:
                f = M[i][c] / piv
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        r += 1
        if r == rows_:
            break
    return r


# --------------------------------------------------------------------------
# hull

def _affine_frame(points):
    """Base point and a maximal independent set of difference vectors."""
    p0 = points[0]
    basis = []
    for p in points[1:]:
        d = tuple(a - b for a, b in zip(p, p0))
        if _rank(basis + [d]) > len(basis):
            basis.append(d)
    return p0, basis


def _facets_full(pts, k):
    """Facets of a full-dimensional point set in Z^k: list of (outward normal, offset, on-set)."""
    if k == 1:
        lo = min(p[0] for p in pts)
        hi = max(p[0] for p in pts)
        return [((-1,), -lo, frozenset(p for p in pts if p[0] == lo)),
                ((1,), hi, frozenset(p for p in pts if p[0] == hi))]
    seen = {}
    for S in combinations(pts, k):
        diffs = [tuple(a - b for a, b in zip(q, S[0])) for q in S[1:]]
        nv = _nullvector(diffs, k)
        if nv is None or not any(nv):
            continue
        c = sum(a * b for a, b in zip(nv, S[0]))
        vals = [sum(a * b for a, b in zip(nv, p)) for p in pts]
        if all(v <= c for v in vals):
            key = (nv, c)
        elif all(v >= c for v in vals):
            nv = tuple(-x for x in nv)
            key = (nv, -c)
        else:
            continue
        if key not in seen:
            seen[key] = frozenset(p for p in pts if sum(a * b for a, b in zip(key[0], p)) == key[1])
    return [(nv, c, on) for (nv, c), on in seen.items()]


def _affine_dim(pts) -> int:
    if len(pts) <= 1:
        return 0
    return len(_affine_frame(pts)[1])


def newton_polytope(f: LaurentPolynomial, max_face_dim: int = 3) -> NewtonPolytope:
    """Newton polytope of ``f`` with its full face lattice (ambient dimension <= 3).

    Examples
    --------
    >>> from lgtt.poly import parse_polynomial
    >>> P = newton_polytope(parse_polynomial("z1 + z2 + 1/(z1*z2)", ["z1", "z2"]))
    >>> sorted(P.vertices), P.interior_points
    ([(-1, -1), (0, 1), (1, 0)], ((0, 0),))
    """
    if f.is_zero:
        raise ValueError("the zero polynomial has no Newton polytope")
    n = f.nvars
    pts = sorted(set(f.terms))
    m = _affine_dim(pts)
    if n > max_face_dim:
        raise NotImplementedError("face enumeration is limited to at most 3 variables")

    if m == 0:
        face = Face(0, frozenset({0}), (0,) * n, 0, frozenset(pts))
        return NewtonPolytope((pts[0],), (face,), (), 0, n, tuple(pts))

    p0, basis = _affine_frame(pts)
    # coordinates of every point in the affine frame (exact)
    B = [[Fraction(b[i]) for b in basis] for i in range(n)]        # n x m
    coords = {}
    for p in pts:
        d = [Fraction(a - b) for a, b in zip(p, p0)]
        aug = [row + [di] for row, di in zip(B, d)]
        R, _ = _rref(aug)
        x = [Fraction(0)] * m
        for row in R:
            piv = next((j for j in range(m) if row[j] != 0), None)
            if piv is not None:
                x[piv] = row[m]
        coords[p] = tuple(x)
    local = [coords[p] for p in pts]
    back = {coords[p]: p for p in pts}
    facets = _facets_full(local, m)

    # ambient normal: w with B^T w = w_local, then add a multiple of nothing (least norm)
    BtB = [[sum(B[r][i] * B[r][j] for r in range(n)) for j in range(m)] for i in range(m)]

    def lift(wl):
        if not any(wl):
            return (0,) * n
        aug = [row + [Fraction(x)] for row, x in zip(BtB, wl)]
        R, _ = _rref(aug)
        y = [row[m] for row in R[:m]]
        w = [sum(B[r][j] * y[j] for j in range(m)) for r in range(n)]
        return _primitive(w)

    facet_sets = [(frozenset(back[q] for q in on), nv) for nv, _, on in facets]
    # closure under intersection
    faces = {}
    for S, nv in facet_sets:
        faces.setdefault(S, set()).add(nv)
    frontier = list(faces)
    while frontier:
        new = []
        for S in frontier:
            for T, nv in facet_sets:
                I = S & T
                if I and I not in faces:
                    faces[I] = set()
                    new.append(I)
        frontier = new
    for S in faces:
        faces[S] = {nv for T, nv in facet_sets if S <= T}

    vertex_pts = sorted(S_ for S_ in faces if len(S_) == 1 and _affine_dim(sorted(S_)) == 0)
    vertices = tuple(sorted(next(iter(S)) for S in vertex_pts))
    vindex = {v: i for i, v in enumerate(vertices)}

    out = []
    for S, normals in faces.items():
        d = _affine_dim(sorted(S))
        wl = [sum(Fraction(nv[j]) for nv in normals) for j in range(m)]
        w = lift(wl)
        c = sum(a * b for a, b in zip(w, next(iter(S))))
        on = frozenset(p for p in pts if sum(a * b for a, b in zip(w, p)) == c)
        out.append(Face(d, frozenset(vindex[v] for v in vertices if v in on), w, c, on))
    out.append(Face(m, frozenset(range(len(vertices))), (0,) * n, 0, frozenset(pts)))
    out.sort(key=lambda F: (F.dim, sorted(F.vertices)))

    interior = ()
    if m == n:
        ineqs = []
        for (nv, c, on) in facets:
            w = lift([Fraction(x) for x in nv])
            q = next(iter(on))
            ineqs.append((w, sum(a * b for a, b in zip(w, back[q]))))
        lo = [min(p[i] for p in pts) for i in range(n)]
        hi = [max(p[i] for p in pts) for i in range(n)]
        interior = tuple(
            x for x in product(*(range(a, b + 1) for a, b in zip(lo, hi)))
            if all(sum(a * b for a, b in zip(w, x)) < c for w, c in ineqs)
        )
    return NewtonPolytope(vertices, tuple(out), interior, m, n, tuple(pts))


def is_convenient(f: LaurentPolynomial) -> bool:
    """True when the origin lies in the interior of the Newton polytope."""
    P = newton_polytope(f)
    if P.dim < f.nvars:
        return False
    return all(F.offset > 0 for F in P.facets)


def face_polynomial(f: LaurentPolynomial, face: Face, polytope: NewtonPolytope | None = None) -> LaurentPolynomial:
    """Restriction of ``f`` to the exponents lying on ``face``."""
    P = polytope or newton_polytope(f)
    if face not in P.faces:
        raise ValueError("face does not belong to the Newton polytope of f")
    return f.restrict(lambda e: e in face.points)


# --------------------------------------------------------------------------
# nondegeneracy

@dataclass(frozen=True)
class NondegeneracyCertificate:
    kind: str                    # ExactYes | ExactNo | ProbabilisticYes | Unknown
    witness: tuple | None = None
    face: Face | None = None
    trials: int = 0
    note: str = ""

    def __bool__(self):
        return self.kind in ("ExactYes", "ProbabilisticYes")


def _torus_system_exact(h: LaurentPolynomial):
    """Decide whether ``h = z_i dh/dz_i = 0`` has a solution with all ``z_i != 0``.

    Returns ``None`` if not, otherwise a numeric witness point.
    """
    n = h.nvars
    zs = sp.symbols(f"_z0:{n}")
    s = sp.Symbol("_s")
    eqs = [h] + [partial_derivative(h, i, logarithmic=True) for i in range(n)]
    polys = []
    for g in eqs:
        if g.is_zero:
            continue
        shift = [min(0, min(e[i] for e in g.terms)) for i in range(n)]
        expr = 0
        for e, c in g.terms.items():
            m = sp.Rational(c.re.numerator, c.re.denominator) + sp.I * sp.Rational(c.im.numerator, c.im.denominator)
            for i in range(n):
                m *= zs[i] ** (e[i] - shift[i])
            expr += m
        polys.append(sp.expand(expr))
    polys.append(s * sp.Mul(*zs) - 1)
    G = sp.groebner(polys, *zs, s, order="lex", domain=sp.QQ_I)
    if G.exprs == [1]:
        return None
    sols = sp.solve(G.exprs, [*zs, s], dict=True)
    for sol in sols:
        try:
            pt = tuple(complex(sp.N(sol[z])) for z in zs)
        except (KeyError, TypeError):
            continue
        return pt
    return ("positive-dimensional",)


def _torus_system_numeric(h: LaurentPolynomial, rng, trials: int, tol: float = 1e-10, box: float = 12.0):
    """Seeded Gauss-Newton search in log coordinates ``z = exp(u)``.

    Residuals are measured relative to the size of the individual terms, so
    runs escaping to the boundary of the torus are not mistaken for zeros.
    """
    n = h.nvars
    E, C = h.numeric_terms()
    E = E.astype(float)
    for _ in range(trials):
        u = rng.normal(size=n) * 0.7 + 1j * rng.uniform(-np.pi, np.pi, size=n)
        for _ in range(60):
            mon = C * np.exp(E @ u)
            F = np.concatenate([[mon.sum()], E.T @ mon])
            scale = np.abs(mon).sum() * (1 + np.abs(E).max())
            if np.linalg.norm(F) < tol * scale:
                return tuple(complex(x) for x in np.exp(u))
            J = np.vstack([E.T @ mon, (E.T * mon) @ E])     # derivatives in u = log z
            du, *_ = np.linalg.lstsq(J, -F, rcond=None)
            u = u + du
            if not np.all(np.isfinite(u)) or np.abs(u.real).max() > box:
                break
    return None


def is_nondegenerate_laurent(f: LaurentPolynomial, trials: int = 256, seed: int = 0) -> NondegeneracyCertificate:
    """Check that no face system ``f^F = z_i d f^F / dz_i = 0`` has a torus solution.

    Every face is checked, vertices and the whole polytope included. Up to two
    variables the decision is exact (saturated Groebner basis); beyond that it
    is a seeded random search and a negative search is reported as
    ``ProbabilisticYes``.
    """
    P = newton_polytope(f)
    n = f.nvars
    rng = np.random.default_rng(seed)
    for F in P.faces:
        h = f.restrict(lambda e: e in F.points)
        if len(h.terms) == 1:
            continue                    # a monomial never vanishes on the torus
        if n <= 2:
            w = _torus_system_exact(h)
            if w is not None:
                return NondegeneracyCertificate("ExactNo", w, F)
        else:
            w = _torus_system_numeric(h, rng, trials)
            if w is not None:
                return NondegeneracyCertificate("Unknown", w, F, trials,
                                                "numerical torus solution found (not certified)")
    if n <= 2:
        return NondegeneracyCertificate("ExactYes")
    return NondegeneracyCertificate("ProbabilisticYes", trials=trials)


def subdiagram_basis(f: LaurentPolynomial, algebra=None) -> list:
    """Monomials at interior lattice points of the Newton polytope, independent in the Milnor algebra."""
    from .singularity import milnor_algebra

    A = algebra or milnor_algebra(f)
    if not A.finite:
        raise ValueError("infinite Milnor number")
    P = newton_polytope(f)
    pts = sorted(P.interior_points, key=lambda e: (sum(abs(x) for x in e), e))
    chosen, rows = [], []
    for e in pts:
        g = LaurentPolynomial.monomial(f.vars, e)
        row = A.coordinates(g)
        if exact_rank(rows + [row]) > len(rows):
            rows.append(row)
            chosen.append(g)
    return chosen
