"""
Tameness certificates and the weight classification of deformations.

A certificate is only ``StronglyTame`` when a proved sufficient rule applies:

* ``hypersurface``: quasi-homogeneous with isolated singularity, all weights
  ``q_i <= 1/2`` and every deformer monomial of weight at most 1;
* ``laurent``: convenient and nondegenerate Laurent polynomial deformed by
  monomials from the interior of its Newton polytope.

Radial probes give evidence only; they never upgrade a verdict.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .newton import is_convenient, is_nondegenerate_laurent, newton_polytope
from .poly import DeformationFamily, LaurentPolynomial, WeightSystem, partial_derivative, quasi_weights

__all__ = [
    "TamenessCertificate",
    "ProbeTable",
    "tameness_certificate",
    "growth_exponents",
    "classify_deformation_monomial",
    "radial_probe",
]

RULES = {
    "hypersurface": "quasi-homogeneous, isolated singularity, weights q_i <= 1/2, deformers of weight <= 1",
    "laurent": "convenient and nondegenerate Laurent polynomial with interior (subdiagram) deformers",
    "critical-locus": "non-isolated critical locus: |grad f|^2 vanishes on an unbounded set",
    "linear": "degree one: |grad f|^2 is constant and the Hessian vanishes",
}


@dataclass(frozen=True)
class ProbeTable:
    C: float
    radii: tuple
    min_values: tuple
    argmin: tuple
    growing: bool

    def rows(self):
        return list(zip(self.radii, self.min_values, self.argmin))


@dataclass(frozen=True)
class TamenessCertificate:
    verdict: str                      # StronglyTame | NotStronglyTame | Evidence | Unknown
    rule: str = ""
    reason: str = ""
    witness: object = None
    probe: ProbeTable | None = None
    details: dict = field(default_factory=dict)

    def __str__(self):
        tag = f"{self.verdict}({self.rule})" if self.rule else self.verdict
        return f"{tag}: {self.reason}" if self.reason else tag


def growth_exponents(q) -> dict:
    """``delta_i = q_i / min_j (1 - q_j)`` with the lemma flags.

    Returns a dict with keys ``delta`` (tuple of Fractions), ``all_le_1`` and
    ``all_lt_1``.
    """
    if isinstance(q, WeightSystem):
        q = q.q
    q = tuple(Fraction(x) for x in q)
    if not q or any(not (0 < x < 1) for x in q):
        raise ValueError("weights must satisfy 0 < q_i < 1")
    m = min(1 - x for x in q)
    delta = tuple(x / m for x in q)
    return {"delta": delta, "all_le_1": all(d <= 1 for d in delta), "all_lt_1": all(d < 1 for d in delta)}


def classify_deformation_monomial(W: LaurentPolynomial, g) -> tuple:
    """Class of the coupling ``t`` of a monomial deformer ``g`` of ``W``.

    The coupling weight is ``1 - <exp(g), q>``; it is ``Relevant`` when
    positive, ``Marginal`` at zero and ``Irrelevant`` when negative.

    Returns
    -------
    (str, Fraction)
    """
    q = quasi_weights(W)
    if q is None:
        raise ValueError("W is not quasi-homogeneous")
    if isinstance(g, LaurentPolynomial):
        if len(g.terms) != 1:
            raise ValueError("deformer must be a single monomial")
        exp = next(iter(g.terms))
    else:
        exp = tuple(g)
    w = 1 - q.weight_of(exp)
    kind = "Relevant" if w > 0 else "Marginal" if w == 0 else "Irrelevant"
    return kind, w


def _numeric_family(family):
    if isinstance(family, LaurentPolynomial):
        family = DeformationFamily(family)
    polys = [family.base] + list(family.deformers)
    coef = [1.0] + [complex(t) for t in family.t]
    tau = complex(family.tau)
    n = family.base.nvars
    grads = [[partial_derivative(p, i) for i in range(n)] for p in polys]
    hess = [[[partial_derivative(partial_derivative(p, i), j) for j in range(n)] for i in range(n)] for p in polys]

    def grad(z):
        return tau * np.array([sum(c * g[i](*z) for c, g in zip(coef, grads)) for i in range(n)])

    def hessian(z):
        return tau * np.array([[sum(c * h[i][j](*z) for c, h in zip(coef, hess)) for j in range(n)]
                               for i in range(n)])

    return family, grad, hessian


def radial_probe(family, C: float = 1.0, radii: Sequence[float] = (2, 4, 8, 16),
                 samples_per_sphere: int = 512, seed: int = 0) -> ProbeTable:
    """Minimum of ``|grad f|^2 - C ||Hess f||_F`` over spheres ``|z| = r``.

    Points are drawn uniformly on the sphere of ``C^n = R^{2n}`` with a seeded
    generator; for one variable an evenly spaced circle is used.
    """
    family, grad, hessian = _numeric_family(family)
    n = family.base.nvars
    rng = np.random.default_rng(seed)
    mins, args = [], []
    for r in radii:
        if n == 1:
            th = 2 * np.pi * np.arange(samples_per_sphere) / samples_per_sphere
            Z = (r * np.exp(1j * th)).reshape(-1, 1)
        else:
            X = rng.normal(size=(samples_per_sphere, 2 * n))
            X /= np.linalg.norm(X, axis=1, keepdims=True)
            Z = r * (X[:, :n] + 1j * X[:, n:])
        cols = [Z[:, i] for i in range(n)]
        G = grad(cols)                                  # (n, samples)
        H = hessian(cols)                               # (n, n, samples)
        vals = (np.abs(G) ** 2).sum(axis=0) - C * np.sqrt((np.abs(H) ** 2).sum(axis=(0, 1)))
        vals = np.broadcast_to(vals, (len(Z),))
        k = int(np.argmin(vals))
        mins.append(float(vals[k]))
        args.append(tuple(complex(x) for x in Z[k]))
    growing = all(b > a for a, b in zip(mins, mins[1:]))
    return ProbeTable(float(C), tuple(float(r) for r in radii), tuple(mins), tuple(args), growing)


def tameness_certificate(family, probe: bool = False, C: float = 1.0, seed: int = 0) -> TamenessCertificate:
    """Strong-tameness certificate for a deformation family.

    Parameters
    ----------
    family : DeformationFamily or LaurentPolynomial
    probe : bool
        When no rule decides, attach a radial probe and report ``Evidence``.
    """
    from .singularity import milnor_algebra

    if isinstance(family, LaurentPolynomial):
        family = DeformationFamily(family)
    f = family.base
    deformers = family.deformers

    if f.is_polynomial and f.degree() == 1 and all(g.degree() <= 1 for g in deformers):
        return TamenessCertificate("NotStronglyTame", "linear", RULES["linear"])

    if f.is_polynomial:
        A = milnor_algebra(f)
        if not A.finite and not deformers:
            # an infinite affine critical variety is unbounded
            return TamenessCertificate("NotStronglyTame", "critical-locus", RULES["critical-locus"],
                                       witness="positive-dimensional critical set")
        q = quasi_weights(f)
        if q is not None:
            if not A.finite:
                return _undecided(family, probe, C, seed, "base has a non-isolated singularity", {})
            heavy = [g for g in deformers if any(q.weight_of(e) > 1 for e in g.terms)]
            details = {"weights": q.q, "mu": A.mu, "delta": growth_exponents(q.q)["delta"]
                       if all(x < 1 for x in q.q) else None}
            if all(x <= Fraction(1, 2) for x in q.q) and not heavy:
                return TamenessCertificate("StronglyTame", "hypersurface", RULES["hypersurface"], details=details)
            reason = ("deformer of weight > 1: " + ", ".join(str(g) for g in heavy)) if heavy \
                else "some weight exceeds 1/2"
            return _undecided(family, probe, C, seed, reason, details)
        return _undecided(family, probe, C, seed, "not quasi-homogeneous", {})

    # Laurent base
    if not is_convenient(f):
        return _undecided(family, probe, C, seed, "Newton polytope does not contain 0 in its interior", {})
    cert = is_nondegenerate_laurent(f, seed=seed)
    if cert.kind != "ExactYes":
        return _undecided(family, probe, C, seed, f"nondegeneracy: {cert.kind}", {"nondegeneracy": cert})
    P = newton_polytope(f)
    inner = set(P.interior_points)
    outside = [g for g in deformers if any(e not in inner for e in g.terms)]
    if outside:
        return _undecided(family, probe, C, seed, "deformer outside the interior of the Newton polytope",
                          {"nondegeneracy": cert})
    return TamenessCertificate("StronglyTame", "laurent", RULES["laurent"], details={"nondegeneracy": cert})


def _undecided(family, probe, C, seed, reason, details):
    if probe:
        table = radial_probe(family, C=C, seed=seed)
        return TamenessCertificate("Evidence", "", reason, probe=table, details=details)
    return TamenessCertificate("Unknown", "", reason, details=details)
