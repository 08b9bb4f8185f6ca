"""
Counting moduli and certifying tameness
=======================================

Marginal deformations of a Fermat polynomial against the moduli of the
hypersurface it cuts out, then the weight classes of a few deformations and
the certificates that decide whether the twisted Laplacian has discrete
spectrum.
"""

from fractions import Fraction

from lgtt.newton import is_convenient, is_nondegenerate_laurent, newton_polytope
from lgtt.poly import DeformationFamily, parse_polynomial
from lgtt.singularity import milnor_algebra, moduli_count
from lgtt.tame import classify_deformation_monomial, growth_exponents, tameness_certificate

print(" n  d  moduli  marginal")
for n, d in [(3, 3), (4, 4), (5, 5), (6, 6), (4, 5)]:
    m = moduli_count(n, d)
    print(f"{n:2d} {d:2d} {m.moduli_dim:7d} {m.marginal_count:9d}  {m.note}")

xyz = ["x", "y", "z"]
W = parse_polynomial("x^3+y^3+z^3", xyz)
print("\nP8: mu =", milnor_algebra(W).mu, " xyz is", classify_deformation_monomial(W, (1, 1, 1))[0])

xy = ["x", "y"]
E12 = parse_polynomial("x^3+y^7", xy)
cls, weight = classify_deformation_monomial(E12, (1, 5))
print(f"E12: xy^5 is {cls} (coupling weight {weight})")
fam = DeformationFamily(E12, (parse_polynomial("x*y^5", xy),))
print("  certificate:", tameness_certificate(fam).verdict)
print("  with a radial probe:", tameness_certificate(fam, probe=True, seed=1).verdict)

delta = growth_exponents((Fraction(1, 3), Fraction(1, 4)))["delta"]
print("growth exponents for weights (1/3, 1/4):", ", ".join(str(x) for x in delta))

# the Laurent triangle: the origin is interior and no face polynomial degenerates
tri = parse_polynomial("x + y + 1/(x*y)", xy)
P = newton_polytope(tri)
print("\ntriangle vertices:", [tuple(v) for v in P.vertices])
print("convenient:", is_convenient(tri), " nondegenerate:", is_nondegenerate_laurent(tri).kind)
print("certificate:", tameness_certificate(DeformationFamily(tri)))
