"""
Thimbles, periods and monodromy of the A2 family
================================================

The family z^3/3 + t1 + t2 z has two critical points. Each one sends out a
descending and an ascending thimble; integrating exp(tau f) over them gives
the period matrix, and transporting the thimbles around the tau circle
gives the monodromy.
"""

import cmath

import numpy as np

from lgtt.poly import DeformationFamily, parse_polynomial
from lgtt.thimble import (
    critical_points,
    detect_walls,
    monodromy_along_loop,
    period_matrix,
    real_structure,
    tau_loop,
    trace_thimble,
    witten_map,
    witten_matrix,
)

z = ["z"]
fam = DeformationFamily(parse_polynomial("z^3/3", z), (parse_polynomial("1", z), parse_polynomial("z", z)),
                        (0.1, -1 + 0.3j), cmath.exp(0.3j))

cd = critical_points(fam)
print("critical points:", np.round(cd.points, 4))
print("critical values:", np.round(cd.values, 4))

# along a thimble Im(tau f) stays put while Re(tau f) falls off
for a in range(2):
    th = trace_thimble(fam, a=a)
    print(f"thimble {a + 1}-: {len(th.s)} samples, phase drift {th.phase_error:.1e}")

# the period matrix in the monomial frame, rows are thimbles and columns are forms 1, z
pm = period_matrix(fam)
print("descending periods:\n", np.round(pm.minus, 6))

# pairing descending against ascending periods recovers an integer matrix
I, rounded, dev = witten_matrix(pm)
print("intersection matrix:\n", rounded, f"(distance to integers {dev:.1e})")

# tau = 1 with real t2 puts both critical values on the real axis: a wall
print("walls at tau = 1, t = (0, -1):", [w.indices for w in detect_walls(fam.at(t=(0, -1), tau=1.0))])

# one turn of tau; the thimbles come back permuted, with order three
loop = tau_loop(cmath.exp(0.1j), (0, -1), 96)
mono = monodromy_along_loop(fam, loop)
print("monodromy:\n", mono.matrix)
print("eigenvalues:", np.round(mono.eigenvalues, 6), " walls crossed:", len(mono.walls))

# half a turn twice is the full turn
S1 = witten_map(fam, cmath.exp(0.1j), (0, -1))
S2 = witten_map(fam, -cmath.exp(0.1j), (0, -1))
print("half turns compose to the monodromy:", np.array_equal(S1 @ S2, mono.matrix))

# the real structure of the twisted periods is an involution
rs = real_structure(period_matrix(fam, mode="Twisted"))
print(f"M conj(M) - I: {rs.involution_error:.1e}, Hermitian defect of eta M: {rs.hermitian_defect:.2f}")
