"""
Exact sparse Laurent polynomials over the Gaussian rationals.

A polynomial is a map from integer exponent vectors to exact coefficients
``a + b i`` with ``a, b`` rational. Variable order is the declared order and
is kept everywhere (monomial orders, matrices, files). Variables are indexed
from 1 in user-facing text, from 0 in code.

The module also carries the combinatorics attached to a potential: weight
systems of quasi-homogeneous polynomials, the Kreuzer-Skarke decomposition of
invertible polynomials, diagonal symmetry groups and their fixed loci.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "GaussianRational",
    "LaurentPolynomial",
    "ParseError",
    "WeightSystem",
    "DeformationFamily",
    "InvertibleBlock",
    "NotInvertible",
    "SymmetryGroup",
    "TwistedSector",
    "parse_polynomial",
    "partial_derivative",
    "quasi_weights",
    "classify_invertible",
    "diagonal_symmetries",
    "twisted_sector",
    "smith_normal_form",
    "parse_complex",
    "InfiniteGroupError",
]


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError("non-finite coefficient")
        return Fraction(x)
    return Fraction(x)


@dataclass(frozen=True)
class GaussianRational:
    """Exact complex number ``re + im*i`` with rational parts."""

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "re", _frac(self.re))
        object.__setattr__(self, "im", _frac(self.im))

    @classmethod
    def coerce(cls, x) -> "GaussianRational":
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, complex):
            return cls(Fraction(x.real), Fraction(x.imag))
        return cls(_frac(x), Fraction(0))

    def __add__(self, other):
        o = GaussianRational.coerce(other)
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-GaussianRational.coerce(other))

    def __rsub__(self, other):
        return GaussianRational.coerce(other) - self

    def __mul__(self, other):
        o = GaussianRational.coerce(other)
        return GaussianRational(self.re * o.re - self.im * o.im,
                                self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def norm2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def __truediv__(self, other):
        o = GaussianRational.coerce(other)
        n = o.norm2()
        if n == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        num = self * o.conjugate()
        return GaussianRational(num.re / n, num.im / n)

    def __rtruediv__(self, other):
        return GaussianRational.coerce(other) / self

    def __pow__(self, k: int):
        if k < 0:
            return GaussianRational(1) / (self ** (-k))
        out = GaussianRational(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussianRational({self.re}, {self.im})"

    def __str__(self):
        if not self.im:
            return str(self.re)
        if not self.re:
            return f"{self.im}*i" if self.im != 1 else "i"
        return f"({self.re}+{self.im}*i)" if self.im > 0 else f"({self.re}-{-self.im}*i)"


ONE = GaussianRational(1)
ZERO = GaussianRational(0)


class ParseError(ValueError):
    """Syntax error in a polynomial expression; ``pos`` is the 0-based offset."""

    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


@dataclass(frozen=True)
class LaurentPolynomial:
    """Sparse Laurent polynomial with exact Gaussian-rational coefficients.

    Parameters
    ----------
    vars : tuple of str
        Ordered variable names.
    terms : mapping
        Exponent tuple -> coefficient. Zero coefficients are dropped.
    """

    vars: tuple
    terms: Mapping = field(default_factory=dict)

    def __post_init__(self):
        vs = tuple(self.vars)
        if len(set(vs)) != len(vs):
            raise ValueError("duplicate variable names")
        n = len(vs)
        clean = {}
        for e, c in dict(self.terms).items():
            e = tuple(int(k) for k in e)
            if len(e) != n:
                raise ValueError(f"exponent {e} has length {len(e)}, expected {n}")
            c = GaussianRational.coerce(c)
            if c:
                clean[e] = clean.get(e, ZERO) + c
        clean = {e: c for e, c in clean.items() if c}
        object.__setattr__(self, "vars", vs)
        object.__setattr__(self, "terms", dict(sorted(clean.items())))

    # construction helpers
    @classmethod
    def zero(cls, vars):
        return cls(tuple(vars), {})

    @classmethod
    def constant(cls, vars, c):
        return cls(tuple(vars), {(0,) * len(vars): c})

    @classmethod
    def monomial(cls, vars, exp, c=1):
        return cls(tuple(vars), {tuple(exp): c})

    @classmethod
    def variable(cls, vars, i: int):
        e = [0] * len(vars)
        e[i] = 1
        return cls(tuple(vars), {tuple(e): 1})

    @property
    def nvars(self) -> int:
        return len(self.vars)

    @property
    def is_polynomial(self) -> bool:
        return all(min(e, default=0) >= 0 for e in self.terms)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def exponents(self) -> np.ndarray:
        """Exponent matrix, one row per term (the matrix ``A``)."""
        if not self.terms:
            return np.zeros((0, self.nvars), dtype=int)
        return np.array(list(self.terms), dtype=int).reshape(len(self.terms), self.nvars)

    def coefficients(self) -> list:
        return list(self.terms.values())

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def _check(self, other):
        if other.vars != self.vars:
            raise ValueError(f"variable mismatch {self.vars} vs {other.vars}")

    def _lift(self, other):
        if isinstance(other, LaurentPolynomial):
            self._check(other)
            return other
        return LaurentPolynomial.constant(self.vars, other)

    def __add__(self, other):
        o = self._lift(other)
        t = dict(self.terms)
        for e, c in o.terms.items():
            t[e] = t.get(e, ZERO) + c
        return LaurentPolynomial(self.vars, t)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPolynomial(self.vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        o = self._lift(other)
        t = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in o.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                t[e] = t.get(e, ZERO) + c1 * c2
        return LaurentPolynomial(self.vars, t)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            if len(self.terms) != 1:
                raise ValueError("negative powers only for monomials")
            (e, c), = self.terms.items()
            return LaurentPolynomial(self.vars, {tuple(k * a for a in e): c ** k})
        out = LaurentPolynomial.constant(self.vars, 1)
        for _ in range(k):
            out = out * self
        return out

    def __truediv__(self, other):
        o = self._lift(other)
        if len(o.terms) != 1:
            raise ValueError("division only by monomials")
        return self * (o ** -1)

    def __eq__(self, other):
        if not isinstance(other, LaurentPolynomial):
            return NotImplemented
        return self.vars == other.vars and self.terms == other.terms

    def __hash__(self):
        return hash((self.vars, tuple(self.terms.items())))

    def scale(self, c):
        c = GaussianRational.coerce(c)
        return LaurentPolynomial(self.vars, {e: c * v for e, v in self.terms.items()})

    def restrict(self, keep) -> "LaurentPolynomial":
        """Keep only the terms whose exponent satisfies ``keep(exp)``."""
        return LaurentPolynomial(self.vars, {e: c for e, c in self.terms.items() if keep(e)})

    def subs_zero(self, idx: Iterable[int]) -> "LaurentPolynomial":
        """Set the variables in ``idx`` to 0 (terms with negative powers there are an error)."""
        idx = set(idx)
        out = {}
        for e, c in self.terms.items():
            if any(e[i] < 0 for i in idx):
                raise ValueError("cannot set a Laurent variable to zero")
            if all(e[i] == 0 for i in idx):
                out[e] = c
        return LaurentPolynomial(self.vars, out)

    def __call__(self, *z):
        """Evaluate at complex points (broadcasting numpy arrays)."""
        if len(z) != self.nvars:
            raise ValueError(f"expected {self.nvars} arguments")
        z = [np.asarray(v, dtype=complex) for v in z]
        out = np.zeros(np.broadcast(*z).shape if z else (), dtype=complex)
        for e, c in self.terms.items():
            term = complex(c)
            for v, k in zip(z, e):
                if k:
                    term = term * v ** k
            out = out + term
        return out

    def numeric_terms(self):
        """Float view: (exponent matrix, complex coefficient vector)."""
        return self.exponents(), np.array([complex(c) for c in self.terms.values()], dtype=complex)

    def univariate_coefficients(self) -> np.ndarray:
        """Dense complex coefficients, low to high, for a 1-variable polynomial."""
        if self.nvars != 1 or not self.is_polynomial:
            raise ValueError("not a one-variable polynomial")
        deg = max((e[0] for e in self.terms), default=0)
        c = np.zeros(deg + 1, dtype=complex)
        for (k,), v in self.terms.items():
            c[k] = complex(v)
        return c

    # text form
    def to_string(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e, c in sorted(self.terms.items(), key=lambda kv: (-sum(kv[0]), tuple(-k for k in kv[0]))):
            mono = "*".join(
                v if k == 1 else f"{v}^{k}" if k > 0 else f"{v}^({k})"
                for v, k in zip(self.vars, e) if k
            )
            coef = _coef_text(c)
            if not mono:
                parts.append(coef)
            elif coef == "1":
                parts.append(mono)
            elif coef == "-1":
                parts.append("-" + mono)
            else:
                parts.append(f"{coef}*{mono}")
        s = " + ".join(parts)
        return s.replace("+ -", "- ")

    def __str__(self):
        return self.to_string()

    def __repr__(self):
        return f"LaurentPolynomial({self.vars!r}, '{self.to_string()}')"

    def to_dict(self) -> dict:
        return {
            "vars": list(self.vars),
            "terms": [
                {"exp": list(e), "re": _q(c.re), "im": _q(c.im)} for e, c in self.terms.items()
            ],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "LaurentPolynomial":
        vs = tuple(d["vars"])
        terms = {}
        for t in d.get("terms", []):
            e = tuple(int(k) for k in t["exp"])
            if e in terms:
                raise ValueError(f"duplicate exponent {e}")
            terms[e] = GaussianRational(Fraction(str(t.get("re", "0"))), Fraction(str(t.get("im", "0"))))
        return cls(vs, terms)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def loads(cls, text: str) -> "LaurentPolynomial":
        return cls.from_dict(json.loads(text))


def _q(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def _coef_text(c: GaussianRational) -> str:
    if not c.im:
        return str(c.re)
    if not c.re:
        return "i" if c.im == 1 else "-i" if c.im == -1 else f"{c.im}*i"
    sign = "+" if c.im > 0 else "-"
    im = abs(c.im)
    return f"({c.re}{sign}{'' if im == 1 else str(im) + '*'}i)"


# --------------------------------------------------------------------------
# parser

_TOKEN = re.compile(r"\s*(?:(\d+(?:\.\d*)?|\.\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\*\*|[-+*/^()]))")


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(m.lastindex)
        kind = ("num", "name", "op")[m.lastindex - 1]
        val = m.group(m.lastindex)
        if val == "**":
            val = "^"
        out.append((kind, val, start))
        pos = m.end()
    out.append(("end", None, len(text)))
    return out


class _Parser:
    def __init__(self, text, vars):
        self.text = text
        self.vars = tuple(vars)
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, val):
        t = self.take()
        if t[1] != val:
            raise ParseError(f"expected {val!r}", t[2])
        return t

    def parse(self):
        if self.peek()[0] == "end":
            raise ParseError("empty expression", 0)
        p = self.expr()
        t = self.peek()
        if t[0] != "end":
            raise ParseError(f"unexpected token {t[1]!r}", t[2])
        return p

    def expr(self):
        p = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            q = self.term()
            p = p + q if op == "+" else p - q
        return p

    def term(self):
        p = self.unary()
        while self.peek()[1] in ("*", "/"):
            _, op, pos = self.take()
            q = self.unary()
            if op == "*":
                p = p * q
            else:
                if len(q.terms) != 1:
                    raise ParseError("division by a non-monomial", pos)
                p = p / q
        return p

    def unary(self):
        if self.peek()[1] == "-":
            self.take()
            return -self.unary()
        if self.peek()[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] == "^":
            _, _, pos = self.take()
            sign = 1
            if self.peek()[1] == "(":
                self.take()
                if self.peek()[1] == "-":
                    self.take()
                    sign = -1
                k = self.integer()
                self.expect(")")
            else:
                if self.peek()[1] == "-":
                    self.take()
                    sign = -1
                k = self.integer()
            k *= sign
            if k < 0 and len(base.terms) != 1:
                raise ParseError("negative power of a non-monomial", pos)
            base = base ** k
        return base

    def integer(self):
        kind, val, pos = self.take()
        if kind != "num" or not val.isdigit():
            raise ParseError("expected an integer exponent", pos)
        return int(val)

    def atom(self):
        kind, val, pos = self.take()
        if kind == "num":
            return LaurentPolynomial.constant(self.vars, Fraction(val))
        if kind == "name":
            if val in self.vars:
                return LaurentPolynomial.variable(self.vars, self.vars.index(val))
            if val in ("i", "I"):
                return LaurentPolynomial.constant(self.vars, GaussianRational(0, 1))
            raise ParseError(f"unknown variable {val!r}", pos)
        if val == "(":
            p = self.expr()
            self.expect(")")
            return p
        raise ParseError(f"unexpected token {val!r}" if val else "unexpected end", pos)


def parse_polynomial(text: str, vars: Sequence[str]) -> LaurentPolynomial:
    """Parse ``text`` such as ``"z^3/3 - z"`` or ``"z1 + z2 + 1/(z1*z2)"``.

    Coefficients are Gaussian rationals (``i`` or ``I`` is the imaginary unit
    unless declared as a variable). Division is allowed only by monomials.
    Decimal literals are read exactly (``0.1`` is ``1/10``).
    """
    return _Parser(text, vars).parse()


def partial_derivative(p: LaurentPolynomial, i: int, logarithmic: bool = False) -> LaurentPolynomial:
    """``d p / d z_i``, or ``z_i d p / d z_i`` when ``logarithmic`` is set."""
    if not 0 <= i < p.nvars:
        raise IndexError(f"variable index {i} out of range for {p.nvars} variables")
    out = {}
    for e, c in p.terms.items():
        if e[i] == 0:
            continue
        ne = list(e)
        if not logarithmic:
            ne[i] -= 1
        out[tuple(ne)] = c * e[i]
    return LaurentPolynomial(p.vars, out)


# --------------------------------------------------------------------------
# weights


@dataclass(frozen=True)
class WeightSystem:
    q: tuple
    degree: int

    @classmethod
    def from_weights(cls, q: Sequence) -> "WeightSystem":
        q = tuple(Fraction(x) for x in q)
        d = 1
        for x in q:
            d = d * x.denominator // math.gcd(d, x.denominator)
        return cls(q, d)

    @property
    def integer_weights(self) -> tuple:
        """``k_i`` with ``q_i = k_i / d``."""
        return tuple(int(x * self.degree) for x in self.q)

    def weight_of(self, exp: Sequence[int]) -> Fraction:
        return sum((Fraction(k) * w for k, w in zip(exp, self.q)), Fraction(0))

    def central_charge(self) -> Fraction:
        return sum((1 - 2 * x for x in self.q), Fraction(0))


def _rational_solve(A, b):
    """Solve ``A x = b`` exactly. Returns (x, unique) or (None, False) if inconsistent."""
    A = [[Fraction(v) for v in row] for row in A]
    b = [Fraction(v) for v in b]
    m = len(A)
    n = len(A[0]) if m else 0
    M = [row[:] + [bb] for row, bb in zip(A, b)]
    piv = []
    r = 0
    for c in range(n):
        p = next((k for k in range(r, m) if M[k][c] != 0), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        inv = 1 / M[r][c]
        M[r] = [v * inv for v in M[r]]
        for k in range(m):
            if k != r and M[k][c] != 0:
                f = M[k][c]
                M[k] = [a - f * bb for a, bb in zip(M[k], M[r])]
        piv.append(c)
        r += 1
        if r == m:
            break
    for k in range(r, m):
        if M[k][n] != 0:
            return None, False
    x = [Fraction(0)] * n
    for k, c in enumerate(piv):
        x[c] = M[k][n]
    return x, len(piv) == n


def quasi_weights(p: LaurentPolynomial) -> WeightSystem | None:
    """Weights ``q`` with ``<alpha, q> = 1`` for every exponent ``alpha`` of ``p``.

    Returns ``None`` when the system is inconsistent, underdetermined, or has a
    non-positive solution.
    """
    if p.is_zero or not p.is_polynomial:
        return None
    A = p.exponents().tolist()
    q, unique = _rational_solve(A, [1] * len(A))
    if q is None or not unique or any(x <= 0 for x in q):
        return None
    return WeightSystem.from_weights(q)


# --------------------------------------------------------------------------
# invertible polynomials


@dataclass(frozen=True)
class InvertibleBlock:
    kind: str                 # "Fermat" | "Chain" | "Loop"
    exponents: tuple          # a_1, ..., a_k in block order
    variables: tuple          # variable indices in block order
    polynomial: LaurentPolynomial

    def __str__(self):
        return f"{self.kind}{list(self.exponents)}"


@dataclass(frozen=True)
class NotInvertible:
    reason: str

    def __bool__(self):
        return False


def classify_invertible(p: LaurentPolynomial):
    """Kreuzer-Skarke decomposition into Fermat, chain and loop blocks.

    Returns a list of :class:`InvertibleBlock` or a falsy :class:`NotInvertible`.
    """
    if not p.is_polynomial:
        return NotInvertible("not a polynomial")
    n = p.nvars
    A = p.exponents()
    if A.shape[0] != n:
        return NotInvertible(f"term count: {A.shape[0]} terms for {n} variables")
    if np.linalg.matrix_rank(A.astype(float)) < n:
        return NotInvertible("rank deficit: exponent matrix is singular")
    rows = [tuple(r) for r in A.tolist()]
    # variable-sharing components
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for r in rows:
        sup = [j for j in range(n) if r[j]]
        for j in sup[1:]:
            parent[find(j)] = find(sup[0])
    comps = {}
    for j in range(n):
        comps.setdefault(find(j), []).append(j)
    blocks = []
    for vars_ in comps.values():
        vset = set(vars_)
        brows = [r for r in rows if any(r[j] for j in vset)]
        block = _classify_block(p, vars_, brows)
        if isinstance(block, NotInvertible):
            return block
        blocks.append(block)
    blocks.sort(key=lambda b: b.variables[0])
    return blocks


def _classify_block(p, vars_, brows):
    k = len(vars_)
    if len(brows) != k:
        return NotInvertible("term count within a block")
    sub = LaurentPolynomial(p.vars, {r: p.terms[r] for r in brows})
    supports = [[j for j in vars_ if r[j]] for r in brows]
    if any(len(s) > 2 for s in supports):
        return NotInvertible("monomial with more than two variables")
    # successor map: x_i^{a} x_j gives i -> j
    succ, expo, fermat = {}, {}, []
    for r, s in zip(brows, supports):
        if len(s) == 1:
            fermat.append(s[0])
            expo[s[0]] = r[s[0]]
            continue
        i, j = s
        if r[i] == 1 and r[j] != 1:
            i, j = j, i
        elif r[i] == 1 and r[j] == 1:
            # x_i x_j: ambiguous orientation, resolved below
            pass
        elif r[j] != 1:
            return NotInvertible("monomial is not of the form x^a y")
        if i in succ:
            i, j = j, i
            if i in succ or r[j] != 1:
                return NotInvertible("variable heads two monomials")
        succ[i] = j
        expo[i] = r[i]
    if k == 1:
        (j,) = vars_
        return InvertibleBlock("Fermat", (expo[j],), (j,), sub)
    if len(fermat) == 1:
        # chain ends at the Fermat variable
        end = fermat[0]
        pred = {v: u for u, v in succ.items()}
        order = [end]
        while order[-1] in pred and len(order) <= k:
            order.append(pred[order[-1]])
        order.reverse()
        if len(order) != k or set(order) != set(vars_):
            return NotInvertible("not a chain")
        return InvertibleBlock("Chain", tuple(expo[v] for v in order), tuple(order), sub)
    if not fermat:
        start = min(vars_)
        order = [start]
        while succ.get(order[-1]) not in (None, start) and len(order) <= k:
            order.append(succ[order[-1]])
        if len(order) != k or succ.get(order[-1]) != start:
            return NotInvertible("not a loop")
        return InvertibleBlock("Loop", tuple(expo[v] for v in order), tuple(order), sub)
    return NotInvertible("block has several Fermat monomials")


# --------------------------------------------------------------------------
# symmetry groups


def smith_normal_form(A):
    """Smith normal form ``U A V = D`` over the integers.

    Returns ``(D, U, V)`` as integer numpy arrays (object dtype avoided; values
    stay small for exponent matrices).
    """
    A = [list(map(int, row)) for row in np.asarray(A).tolist()]
    m, n = len(A), len(A[0])
    D = [row[:] for row in A]
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(M, a, b):
        M[a], M[b] = M[b], M[a]

    def swap_cols(M, a, b):
        for row in M:
            row[a], row[b] = row[b], row[a]

    def add_row(M, src, dst, f):
        M[dst] = [x + f * y for x, y in zip(M[dst], M[src])]

    def add_col(M, src, dst, f):
        for row in M:
            row[dst] += f * row[src]

    for t in range(min(m, n)):
        while True:
            nz = [(abs(D[i][j]), i, j) for i in range(t, m) for j in range(t, n) if D[i][j]]
            if not nz:
                return np.array(D), np.array(U), np.array(V)
            _, i, j = min(nz)
            swap_rows(D, t, i); swap_rows(U, t, i)
            swap_cols(D, t, j); swap_cols(V, t, j)
            done = True
            for i in range(t + 1, m):
                q = D[i][t] // D[t][t]
                if q:
                    add_row(D, t, i, -q); add_row(U, t, i, -q)
                if D[i][t]:
                    done = False
            for j in range(t + 1, n):
                q = D[t][j] // D[t][t]
                if q:
                    add_col(D, t, j, -q); add_col(V, t, j, -q)
                if D[t][j]:
                    done = False
            if not done:
                continue
            bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n)
                        if D[i][j] % D[t][t]), None)
            if bad is None:
                break
            add_row(D, bad[0], t, 1); add_row(U, bad[0], t, 1)
        if D[t][t] < 0:
            D[t] = [-x for x in D[t]]
            U[t] = [-x for x in U[t]]
    return np.array(D), np.array(U), np.array(V)


@dataclass(frozen=True)
class SymmetryGroup:
    """Finite group of phases ``theta`` in ``[0,1)^n`` with ``A theta = 0 mod 1``."""

    generators: tuple      # tuples of Fractions
    orders: tuple          # order of each generator (invariant factors > 1)
    j_w: tuple             # exponential grading element, q mod 1

    @property
    def order(self) -> int:
        return math.prod(self.orders)

    def elements(self) -> list:
        out = set()
        for ks in product(*(range(o) for o in self.orders)):
            out.add(tuple(sum((k * g[i] for k, g in zip(ks, self.generators)), Fraction(0)) % 1
                          for i in range(len(self.j_w))))
        return sorted(out)

    def contains(self, theta) -> bool:
        th = tuple(Fraction(x) % 1 for x in theta)
        return th in set(self.elements())


class InfiniteGroupError(ValueError):
    pass


def diagonal_symmetries(p: LaurentPolynomial) -> SymmetryGroup:
    """Diagonal phase symmetries of ``p`` via the Smith normal form of its exponent matrix."""
    A = p.exponents()
    n = p.nvars
    if A.shape[0] == 0 or np.linalg.matrix_rank(A.astype(float)) < n:
        raise InfiniteGroupError("symmetry group is infinite (rank A < n)")
    D, U, V = smith_normal_form(A)
    gens, orders = [], []
    for i in range(n):
        d = int(D[i][i])
        if d == 1:
            continue
        gens.append(tuple(Fraction(int(V[r][i]), d) % 1 for r in range(n)))
        orders.append(d)
    q = quasi_weights(p)
    if q is None:
        j_w = tuple(Fraction(0) for _ in range(n))
    else:
        j_w = tuple(x % 1 for x in q.q)
    # a cyclic group generated by J_W is presented by J_W itself
    if len(orders) == 1 and _element_order(j_w) == orders[0]:
        gens = [j_w]
    return SymmetryGroup(tuple(gens), tuple(orders), j_w)


def _element_order(theta) -> int:
    d = 1
    for x in theta:
        d = d * x.denominator // math.gcd(d, x.denominator)
    return d


@dataclass(frozen=True)
class TwistedSector:
    fixed: tuple            # fixed variable indices
    restriction: LaurentPolynomial
    n_fixed: int


def twisted_sector(p: LaurentPolynomial, gamma: Sequence, group: SymmetryGroup | None = None) -> TwistedSector:
    """Fixed locus of the diagonal symmetry ``gamma`` and the restricted potential."""
    gamma = tuple(Fraction(x) % 1 for x in gamma)
    if len(gamma) != p.nvars:
        raise ValueError("phase vector has the wrong length")
    for e in p.terms:
        if sum((k * g for k, g in zip(e, gamma)), Fraction(0)) % 1 != 0:
            raise ValueError(f"{gamma} is not a symmetry of {p}")
    if group is not None and not group.contains(gamma):
        raise ValueError(f"{gamma} is not in the given group")
    fixed = tuple(i for i, g in enumerate(gamma) if g == 0)
    moved = [i for i in range(p.nvars) if i not in fixed]
    return TwistedSector(fixed, p.subs_zero(moved), len(fixed))


# --------------------------------------------------------------------------
# families


@dataclass(frozen=True)
class DeformationFamily:
    """``f_{tau,t} = tau * (f + sum_i t_i g_i)``.

    ``t`` and ``tau`` may be exact (Fraction / GaussianRational) or complex.
    """

    base: LaurentPolynomial
    deformers: tuple = ()
    t: tuple = ()
    tau: complex = 1.0

    def __post_init__(self):
        dfs = tuple(self.deformers)
        for g in dfs:
            if g.vars != self.base.vars:
                raise ValueError("deformer variables differ from the base")
        t = tuple(self.t) if self.t else (0,) * len(dfs)
        if len(t) != len(dfs):
            raise ValueError("need one parameter per deformer")
        if self.tau == 0:
            raise ValueError("tau must be nonzero")
        object.__setattr__(self, "deformers", dfs)
        object.__setattr__(self, "t", t)

    @property
    def vars(self):
        return self.base.vars

    @property
    def nparams(self) -> int:
        return len(self.deformers)

    def at(self, t=None, tau=None) -> "DeformationFamily":
        return DeformationFamily(self.base, self.deformers,
                                 self.t if t is None else tuple(t),
                                 self.tau if tau is None else tau)

    @property
    def exact(self) -> bool:
        return all(isinstance(x, (int, Fraction, GaussianRational)) for x in self.t)

    def member(self, t=None) -> LaurentPolynomial:
        """Exact ``f_t`` (without tau); requires exact parameters."""
        t = self.t if t is None else tuple(t)
        out = self.base
        for ti, g in zip(t, self.deformers):
            if isinstance(ti, (complex, float)) and not isinstance(ti, bool):
                ti = GaussianRational(Fraction(complex(ti).real), Fraction(complex(ti).imag))
            out = out + g.scale(ti)
        return out

    def univariate_coefficients(self, t=None) -> np.ndarray:
        """Complex coefficients (low to high) of ``f_t`` for a one-variable family."""
        t = self.t if t is None else tuple(t)
        c = self.base.univariate_coefficients()
        for ti, g in zip(t, self.deformers):
            gc = g.univariate_coefficients()
            if len(gc) > len(c):
                c = np.concatenate([c, np.zeros(len(gc) - len(c), dtype=complex)])
            c[: len(gc)] += complex(ti) * gc
        return c

    def deformer_coefficients(self) -> list:
        return [g.univariate_coefficients() for g in self.deformers]

    def __call__(self, *z, t=None, tau=None):
        """Numeric value of ``tau * f_t`` at ``z``."""
        t = self.t if t is None else tuple(t)
        tau = self.tau if tau is None else tau
        out = self.base(*z)
        for ti, g in zip(t, self.deformers):
            out = out + complex(ti) * g(*z)
        return complex(tau) * out

    def to_dict(self) -> dict:
        d = self.base.to_dict()
        d["deformers"] = [g.to_dict()["terms"] for g in self.deformers]
        d["t"] = [_complex_text(x) for x in self.t]
        d["tau"] = _complex_text(self.tau)
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "DeformationFamily":
        base = LaurentPolynomial.from_dict(d)
        dfs = tuple(LaurentPolynomial.from_dict({"vars": d["vars"], "terms": terms})
                    for terms in d.get("deformers", []))
        t = tuple(parse_complex(x) for x in d.get("t", [])) or (0,) * len(dfs)
        tau = parse_complex(d.get("tau", "1"))
        return cls(base, dfs, t, tau)


def _complex_text(x) -> str:
    if isinstance(x, GaussianRational):
        return f"{x.re}+{x.im}i"
    x = complex(x)
    return f"{x.real!r}{'+' if x.imag >= 0 else '-'}{abs(x.imag)!r}i"


_CPLX_FRAC = re.compile(r"^([+-]?[0-9./]+)?(?:([+-])([0-9./]*)[ij])?$")


def parse_complex(s) -> complex:
    """Parse ``"a+bi"``, ``"0.3-0.1i"``, ``"2i"``, ``"-i"``, ``"1/3+2/3i"`` or plain numbers."""
    if isinstance(s, (int, float, complex, Fraction)):
        return complex(s)
    if isinstance(s, GaussianRational):
        return complex(s)
    text = str(s).strip().replace(" ", "")
    try:
        return complex(text.replace("i", "j"))
    except ValueError:
        pass
    m = _CPLX_FRAC.match(text if text[:1] in "+-" or not text.endswith("i") or "+" in text[1:] or "-" in text[1:]
                         else "+" + text)
    if not m or not (m.group(1) or m.group(2)):
        raise ValueError(f"cannot parse complex number {s!r}")
    re_part = float(Fraction(m.group(1))) if m.group(1) else 0.0
    im_part = 0.0
    if m.group(2):
        mag = float(Fraction(m.group(3))) if m.group(3) else 1.0
        im_part = mag if m.group(2) == "+" else -mag
    return complex(re_part, im_part)
