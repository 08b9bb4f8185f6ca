import numpy as np
import pytest
import scipy.sparse as sps

from lgtt.spectral import (
    Indeterminate,
    ResolutionError,
    ResolutionWarning,
    SpectralGrid,
    assemble_twisted_laplacian,
    auto_radius,
    decay_fit,
    harmonic_dimension,
    lowest_eigenpairs,
    oscillator_groundform_complex,
    oscillator_spectrum_real,
    overlap,
    quadratic_self_test,
)

pytestmark = pytest.mark.filterwarnings("ignore::lgtt.spectral.ResolutionWarning")

SMALL = SpectralGrid(4.0, 1 / 8)


def test_oscillator_ladders():
    assert oscillator_spectrum_real(1, 1, 0, 2) == [2, 6, 10]
    assert oscillator_spectrum_real(1, 1, 1, 1) == [6, 10]
    assert oscillator_spectrum_real(0.5, 2, 0, 0) == [2]


def test_groundform_closed_form():
    u, v = oscillator_groundform_complex(1.0, points=np.array([0.0]))
    assert (u[0], v[0]) == (-1, 1)
    z = np.array([0.0, 0.5 + 0.25j])
    _, v2 = oscillator_groundform_complex(2.0, points=z)
    assert v2[1] / v2[0] == pytest.approx(np.exp(-2 * abs(z[1]) ** 2))
    with pytest.raises(ValueError):
        oscillator_groundform_complex(3j)


def test_grid_validation():
    with pytest.raises(ValueError):
        SpectralGrid(1.0, 0.3)
    g = SpectralGrid(1.0, 0.25)
    assert g.side == 9 and abs(g.mesh()[4, 4]) == 0


@pytest.mark.parametrize("degree", [0, 1, 2])
def test_hermitian_exactly(degree):
    op = assemble_twisted_laplacian(np.array([0.3j, -1, 0.2 + 0.1j, 1 / 3]), degree, SMALL)
    H = op.matrix
    assert abs(H - H.conj().T).max() == 0


def test_coupling_block_pattern():
    tau = 0.7 + 0.4j
    op = assemble_twisted_laplacian(np.array([0, 0, tau]), 1, SMALL)
    n = op.matrix.shape[0] // 2
    assert np.allclose(op.matrix[:n, n:].diagonal(), 2 * tau)
    assert np.allclose(op.matrix[n:, :n].diagonal(), 2 * np.conj(tau))


def test_self_test():
    assert quadratic_self_test(1.0) < 10 / 256
    assert quadratic_self_test(0.6 + 0.8j) < 10 / 256


def _box(R, h, k=1):
    m = int(round(2 * R / h)) - 1
    lam = 4 / h ** 2 * np.sin(np.arange(1, 4) * np.pi / (2 * (m + 1))) ** 2
    return 0.5 * np.sort(np.add.outer(lam, lam).ravel())[:k]


def test_constant_potential_box_oracle():
    res = lowest_eigenpairs(assemble_twisted_laplacian(np.array([3.0]), 0, SMALL), k=3, tol=1e-10)
    assert np.allclose(res.eigenvalues, _box(4.0, 1 / 8, 3), rtol=1e-8)
    assert res.eigenvalues[0] == pytest.approx((np.pi / 8) ** 2, rel=0.01)


def test_linear_potential_shift():
    box = lowest_eigenpairs(assemble_twisted_laplacian(np.array([0.0]), 0, SMALL), k=2, tol=1e-10)
    lin = lowest_eigenpairs(assemble_twisted_laplacian(np.array([0.0, 1.0]), 0, SMALL), k=2, tol=1e-10)
    assert np.allclose(lin.eigenvalues - box.eigenvalues, 0.5)


def test_quadratic_ladder_small_grid():
    grid = SpectralGrid(3.0, 1 / 16)
    res = lowest_eigenpairs(assemble_twisted_laplacian(np.array([0, 0, 2.0]), 1, grid), k=5, tol=1e-9)
    assert np.allclose(res.eigenvalues, [0, 4, 4, 8, 8], atol=0.02 * 4)
    assert harmonic_dimension(res, 0.2) == 1
    gram = np.array([[a.inner(b) for b in res.eigenfields] for a in res.eigenfields])
    assert np.allclose(gram, np.eye(5), atol=1e-8)
    assert max(res.residuals) < 1e-9 * 8
    p0 = lowest_eigenpairs(assemble_twisted_laplacian(np.array([0, 0, 2.0]), 0, grid), k=2, tol=1e-9)
    assert p0.eigenvalues[0] == pytest.approx(4, rel=0.02)
    assert harmonic_dimension(p0, 0.2) == 0


def test_degree_zero_and_two_agree():
    c = np.array([0, 1j, 0, 0.5])
    e0 = lowest_eigenpairs(assemble_twisted_laplacian(c, 0, SMALL), k=4, tol=1e-10).eigenvalues
    e2 = lowest_eigenpairs(assemble_twisted_laplacian(-c, 2, SMALL), k=4, tol=1e-10).eigenvalues
    assert np.allclose(e0, e2, atol=1e-9)


def test_refinement_order():
    errs = []
    for h in (1 / 4, 1 / 8, 1 / 16):
        ev = lowest_eigenpairs(assemble_twisted_laplacian(np.array([0, 0, 1.0]), 0, SpectralGrid(4.0, h)),
                               k=1, tol=1e-11).eigenvalues[0]
        errs.append(abs(ev - 2.0))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert orders.min() >= 1.7


def test_eigenvalue_continuity_in_t():
    vals = []
    for d in (0.0, 1e-3, 1e-4):
        c = 3 * np.array([0, -(1 + d), 0, 1 / 3])
        ev = lowest_eigenpairs(assemble_twisted_laplacian(c, 1, SpectralGrid(2.5, 1 / 16)), k=3, tol=1e-10)
        vals.append(ev.eigenvalues)
    assert np.abs(vals[1] - vals[0]).max() > np.abs(vals[2] - vals[0]).max()
    assert np.abs(vals[2] - vals[0]).max() < 1e-2


def test_ground_overlap_quadratic():
    grid = SpectralGrid(3.0, 1 / 16)
    res = lowest_eigenpairs(assemble_twisted_laplacian(np.array([0, 0, 1.0]), 1, grid), k=2, tol=1e-10)
    assert overlap(res.eigenfields[0], oscillator_groundform_complex(1.0, grid)) > 0.999


def test_resolution_guard():
    c = np.array([0, 0, 0, 0, 5.0])
    with pytest.warns(ResolutionWarning):
        assemble_twisted_laplacian(c, 1, SMALL)
    with pytest.raises(ResolutionError):
        assemble_twisted_laplacian(c, 1, SMALL, strict=True)


def test_degenerate_potential_refused():
    res = lowest_eigenpairs(assemble_twisted_laplacian(np.array([1.0]), 1, SMALL), k=3)
    with pytest.raises(Indeterminate):
        harmonic_dimension(res, 0.1)


def test_gap_must_be_resolved():
    res = lowest_eigenpairs(assemble_twisted_laplacian(np.array([0, 0, 1.0]), 1, SMALL), k=3)
    with pytest.raises(Indeterminate):
        harmonic_dimension(res, 0.5)


def test_decay_profiles():
    grid = SpectralGrid(3.0, 1 / 16)
    res = lowest_eigenpairs(assemble_twisted_laplacian(np.array([0, 0, 2.0]), 1, grid), k=1, tol=1e-10)
    fit = decay_fit(res.eigenfields[:1], 0.5)
    assert fit.profile == "super-exponential" and fit.monotone
    box = lowest_eigenpairs(assemble_twisted_laplacian(np.array([0.0]), 0, SMALL), k=1)
    assert decay_fit(box.eigenfields, 0.5).profile == "boundary-limited"


def test_auto_radius():
    R = auto_radius(np.array([0, 0, 1.0]), 4.0)
    assert 0.5 * (2 * R) ** 2 >= 80 and 0.5 * (2 * (R - 0.125)) ** 2 < 80


def test_field_export():
    phi = oscillator_groundform_complex(1.0, SpectralGrid(1.0, 0.5))
    d = phi.to_dict()
    assert d["degree"] == 1 and len(d["components"]) == 2 and len(d["components"][0]) == 25
