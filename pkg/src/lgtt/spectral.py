"""
Finite-difference twisted Laplacian on the complex line.

For ``f`` holomorphic in one variable the operator acts on scalar fields
(form degree 0 and 2) and on 1-forms ``u dz + v dz-bar`` (degree 1)::

    p = 0, 2 :   H0 = -(1/2) Lap + (1/2) |f'|^2
    p = 1    :   [[H0,            f''  ],
                  [conj(f''),      H0   ]]

``Lap`` is the 5-point Laplacian on a square grid with Dirichlet walls. For
``f = tau z^2`` this gives the ladder ``2|tau| (k + l + 1) +- 2|tau|`` and the
exact zero mode ``exp(-|tau| |z|^2) (-(tau/|tau|) dz + dz-bar)``, which is
checked by :func:`quadratic_self_test`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sps
import scipy.sparse.linalg as spla
from numpy.polynomial import polynomial as P

__all__ = [
    "SpectralGrid",
    "FormField",
    "TwistedLaplacian",
    "SpectralResult",
    "ResolutionWarning",
    "ResolutionError",
    "Indeterminate",
    "ConvergenceError",
    "SelfTestError",
    "oscillator_spectrum_real",
    "oscillator_groundform_complex",
    "assemble_twisted_laplacian",
    "lowest_eigenpairs",
    "harmonic_dimension",
    "decay_fit",
    "quadratic_self_test",
    "auto_radius",
    "overlap",
]


class ResolutionWarning(UserWarning):
    pass


class ResolutionError(ValueError):
    pass


class Indeterminate(ValueError):
    """The zero band is not separated from the rest of the spectrum."""


class ConvergenceError(RuntimeError):
    pass


class SelfTestError(AssertionError):
    pass


@dataclass(frozen=True)
class SpectralGrid:
    """Square lattice ``[-R, R]^2`` with spacing ``h``; the outer ring is the Dirichlet wall."""

    R: float
    h: float

    def __post_init__(self):
        if self.R <= 0 or self.h <= 0:
            raise ValueError("R and h must be positive")
        m = 2 * self.R / self.h
        if abs(m - round(m)) > 1e-9 * max(1.0, m):
            raise ValueError("h must divide 2R evenly")

    @property
    def half(self) -> int:
        return int(round(self.R / self.h))

    @property
    def side(self) -> int:
        """Points per side, ``2 floor(R/h) + 1``."""
        return 2 * self.half + 1

    @property
    def axis(self) -> np.ndarray:
        return self.h * np.arange(-self.half, self.half + 1)

    def mesh(self) -> np.ndarray:
        """Complex coordinates ``x + i y`` on the full grid, indexed ``[iy, ix]``."""
        x = self.axis
        return x[None, :] + 1j * x[:, None]

    def interior(self) -> np.ndarray:
        return self.mesh()[1:-1, 1:-1]

    @property
    def n_interior(self) -> int:
        return (self.side - 2) ** 2


@dataclass
class FormField:
    """Sampled form on a grid: one component for degrees 0 and 2, ``(u, v)`` for degree 1."""

    degree: int
    components: tuple
    grid: SpectralGrid

    def __post_init__(self):
        want = 2 if self.degree == 1 else 1
        if len(self.components) != want:
            raise ValueError(f"degree {self.degree} needs {want} component(s)")
        self.components = tuple(np.asarray(c, dtype=complex) for c in self.components)
        for c in self.components:
            if c.shape != (self.grid.side, self.grid.side):
                raise ValueError("component shape does not match the grid")

    def modulus(self) -> np.ndarray:
        return np.sqrt(sum(np.abs(c) ** 2 for c in self.components))

    def norm(self) -> float:
        return float(np.sqrt((self.modulus() ** 2).sum()) * self.grid.h)

    def normalized(self) -> "FormField":
        s = self.norm()
        if s == 0:
            raise ValueError("zero field")
        return FormField(self.degree, tuple(c / s for c in self.components), self.grid)

    def inner(self, other: "FormField") -> complex:
        if other.grid != self.grid or other.degree != self.degree:
            raise ValueError("fields live on different spaces")
        return complex(sum(np.vdot(a, b) for a, b in zip(self.components, other.components)) * self.grid.h ** 2)

    def interior_vector(self) -> np.ndarray:
        return np.concatenate([c[1:-1, 1:-1].ravel() for c in self.components])

    @classmethod
    def from_interior(cls, degree, vec, grid) -> "FormField":
        m = grid.side - 2
        k = 2 if degree == 1 else 1
        comps = []
        for j in range(k):
            full = np.zeros((grid.side, grid.side), dtype=complex)
            full[1:-1, 1:-1] = vec[j * m * m:(j + 1) * m * m].reshape(m, m)
            comps.append(full)
        return cls(degree, tuple(comps), grid)

    def to_dict(self) -> dict:
        return {
            "degree": self.degree,
            "grid": {"R": self.grid.R, "h": self.grid.h, "side": self.grid.side, "order": "row-major [iy, ix]"},
            "components": [
                [[float(x.real), float(x.imag)] for x in c.ravel()] for c in self.components
            ],
        }


def overlap(a: FormField, b: FormField) -> float:
    """``|<a, b>| / (|a| |b|)``."""
    return abs(a.inner(b)) / (a.norm() * b.norm())


# --------------------------------------------------------------------------
# exact oscillator oracles

def oscillator_spectrum_real(t: float, tau: float, degree: int, k_max: int) -> list:
    """Eigenvalues of the real harmonic-oscillator model.

    Degree 0 gives ``2 t tau (1 + 2k)``; degree 1 is shifted by ``4 t tau``.
    """
    if t <= 0 or tau <= 0:
        raise ValueError("t and tau must be positive")
    if degree not in (0, 1):
        raise ValueError("degree must be 0 or 1")
    base = 1 if degree == 0 else 3
    return [2 * t * tau * (base + 2 * k) for k in range(k_max + 1)]


def oscillator_groundform_complex(tau: complex, grid: SpectralGrid | None = None, points=None):
    """Zero mode ``exp(-|tau| |z|^2) (-(tau/|tau|) dz + dz-bar)`` of ``f = tau z^2``.

    With a grid, returns a :class:`FormField` of unit discrete norm; with
    ``points``, returns the ``(u, v)`` sample arrays (not normalized).
    """
    tau = complex(tau)
    if tau.real <= 0:
        raise ValueError("Re(tau) must be positive for the decaying ground form")
    a = abs(tau)
    ph = tau / a
    if grid is not None:
        z = grid.mesh()
        g = np.exp(-a * np.abs(z) ** 2)
        g[0, :] = g[-1, :] = g[:, 0] = g[:, -1] = 0.0
        return FormField(1, (-ph * g, g), grid).normalized()
    z = np.asarray(points, dtype=complex)
    g = np.exp(-a * np.abs(z) ** 2)
    return -ph * g, g


# --------------------------------------------------------------------------
# assembly

@dataclass
class TwistedLaplacian:
    matrix: sps.csr_matrix
    degree: int
    grid: SpectralGrid
    coefficients: np.ndarray          # of tau * f_t, low to high
    resolution: float                 # h^2 * max potential on the inscribed disk
    strongly_tame: bool
    warnings: list = field(default_factory=list)

    @property
    def shape(self):
        return self.matrix.shape

    def apply(self, fld: FormField) -> FormField:
        return FormField.from_interior(self.degree, self.matrix @ fld.interior_vector(), self.grid)


def _coefficients(f) -> np.ndarray:
    if hasattr(f, "univariate_coefficients") and hasattr(f, "tau"):
        return complex(f.tau) * f.univariate_coefficients()
    if hasattr(f, "univariate_coefficients"):
        return f.univariate_coefficients()
    return np.asarray(f, dtype=complex)


def _laplacian_1d(m: int, h: float) -> sps.csr_matrix:
    return sps.diags([np.ones(m - 1), -2 * np.ones(m), np.ones(m - 1)], [-1, 0, 1]) / h ** 2


def assemble_twisted_laplacian(f, degree: int, grid: SpectralGrid, strict: bool = False) -> TwistedLaplacian:
    """Sparse Hermitian matrix of the twisted Laplacian on interior grid points.

    Parameters
    ----------
    f : DeformationFamily, LaurentPolynomial or array_like
        One-variable potential. A family contributes ``tau * f_t``; an array
        is read as complex coefficients from low to high degree.
    degree : {0, 1, 2}
    grid : SpectralGrid
    strict : bool
        Raise :class:`ResolutionError` instead of warning when
        ``h^2 * max |f'|^2 / 2 > 0.5`` on the disk ``|z| <= R``.
    """
    if degree not in (0, 1, 2):
        raise ValueError("degree must be 0, 1 or 2")
    c = _coefficients(f)
    d1 = P.polyder(c) if len(c) > 1 else np.zeros(1, dtype=complex)
    d2 = P.polyder(d1) if len(d1) > 1 else np.zeros(1, dtype=complex)
    z = grid.interior().ravel()
    m = grid.side - 2
    fp = P.polyval(z, d1)
    V = 0.5 * np.abs(fp) ** 2
    L = sps.kronsum(_laplacian_1d(m, grid.h), _laplacian_1d(m, grid.h), format="csr")
    H0 = (-0.5 * L + sps.diags(V)).astype(complex)

    inside = np.abs(z) <= grid.R
    res = float(grid.h ** 2 * V[inside].max()) if inside.any() else 0.0
    msgs = []
    if res > 0.5:
        msg = f"grid under-resolves the potential: h^2 max|f'|^2/2 = {res:.3g} > 0.5"
        if strict:
            raise ResolutionError(msg)
        warnings.warn(msg, ResolutionWarning, stacklevel=2)
        msgs.append(msg)

    if degree == 1:
        fpp = sps.diags(P.polyval(z, d2))
        H = sps.bmat([[H0, fpp], [fpp.conj(), H0]], format="csr")
    else:
        H = H0.tocsr()
    deg = len(np.trim_zeros(c, "b")) - 1
    return TwistedLaplacian(H, degree, grid, c, res, deg >= 2, msgs)


def auto_radius(f, lam_max: float, factor: float = 20.0, r_max: float = 50.0) -> float:
    """Smallest ``R`` (to 1/8) with ``min_{|z|=R} |f'|^2 / 2 >= factor * lam_max``."""
    c = _coefficients(f)
    d1 = P.polyder(c)
    th = np.linspace(0, 2 * np.pi, 256, endpoint=False)
    R = 0.5
    while R <= r_max:
        if (0.5 * np.abs(P.polyval(R * np.exp(1j * th), d1)) ** 2).min() >= factor * lam_max:
            return R
        R += 0.125
    raise ValueError("potential does not grow enough to size the box")


# --------------------------------------------------------------------------
# eigenpairs

@dataclass
class SpectralResult:
    eigenvalues: np.ndarray
    eigenfields: list
    residuals: np.ndarray
    grid: SpectralGrid
    degree: int
    strongly_tame: bool = True
    meta: dict = field(default_factory=dict)


def lowest_eigenpairs(op: TwistedLaplacian, k: int = 6, tol: float = 1e-8, seed: int = 0,
                      sigma: float | None = None, maxiter: int | None = None) -> SpectralResult:
    """Smallest ``k`` eigenvalues by shift-invert Lanczos (ARPACK) with a seeded start vector.

    Residuals ``||H psi - lambda psi|| / ||psi||`` are checked against
    ``tol * max(1, |lambda|)``; eigenfields have unit discrete norm.
    """
    H = op.matrix
    N = H.shape[0]
    if k >= N - 1:
        raise ValueError("k must be much smaller than the dimension")
    if sigma is None:
        sigma = -0.05
    rng = np.random.default_rng(seed)
    v0 = rng.normal(size=N) + 1j * rng.normal(size=N)
    lu = spla.splu((H - sigma * sps.identity(N, format="csr")).tocsc())
    OPinv = spla.LinearOperator((N, N), matvec=lu.solve, dtype=complex)
    try:
        w, V = spla.eigsh(H, k=k, sigma=sigma, which="LM", v0=v0, OPinv=OPinv, tol=tol * 1e-2,
                          maxiter=maxiter or 20 * N)
    except spla.ArpackNoConvergence as e:
        raise ConvergenceError(f"eigensolver did not converge: {e}") from e
    # two steps of block inverse iteration with Rayleigh-Ritz polish the pairs
    for _ in range(2):
        Q, _ = np.linalg.qr(lu.solve(V))
        S = Q.conj().T @ (H @ Q)
        w, C = np.linalg.eigh(0.5 * (S + S.conj().T))
        V = Q @ C
    order = np.argsort(w)
    w, V = w[order], V[:, order]
    res = np.linalg.norm(H @ V - V * w, axis=0) / np.linalg.norm(V, axis=0)
    bad = res > tol * np.maximum(1.0, np.abs(w))
    if bad.any():
        raise ConvergenceError(f"residual {res.max():.3g} above tolerance {tol}")
    fields = [FormField.from_interior(op.degree, V[:, j], op.grid).normalized() for j in range(k)]
    return SpectralResult(w.real, fields, res, op.grid, op.degree, op.strongly_tame,
                          {"sigma": sigma, "tol": tol, "seed": seed, "dimension": N})


def harmonic_dimension(result: SpectralResult, zero_band: float, gap_factor: float = 10.0) -> int:
    """Number of eigenvalues below ``zero_band``, provided the next one exceeds ``gap_factor * zero_band``."""
    if not result.strongly_tame:
        raise Indeterminate("potential is not strongly tame; harmonic dimension undefined")
    ev = np.sort(result.eigenvalues)
    count = int((ev < zero_band).sum())
    if count == len(ev):
        raise Indeterminate("all computed eigenvalues lie in the zero band; request more")
    if ev[count] <= gap_factor * zero_band:
        raise Indeterminate(f"gap not resolved: next eigenvalue {ev[count]:.4g} <= {gap_factor} x {zero_band}")
    return count


@dataclass(frozen=True)
class DecayFit:
    rate: float
    quality: float
    monotone: bool
    profile: str                 # super-exponential | exponential | boundary-limited
    radii: np.ndarray
    log_modulus: np.ndarray


def decay_fit(fields, core_radius: float, wall_ratio: float = 1e-3) -> DecayFit:
    """Fit ``log max_{|z| = r} |psi|`` against ``r`` outside ``core_radius``.

    Several fields (a degenerate eigenspace) are combined by the pointwise
    root-sum-square of their moduli. The profile is ``boundary-limited`` when
    the field is still above ``wall_ratio`` of its peak next to the Dirichlet
    wall, ``super-exponential`` when a quadratic term is significant, and
    ``exponential`` otherwise.
    """
    if isinstance(fields, FormField):
        fields = [fields]
    grid = fields[0].grid
    mod = np.sqrt(sum(f.modulus() ** 2 for f in fields))
    r = np.abs(grid.mesh())
    h = grid.h
    edges = np.arange(core_radius, grid.R - h, h)
    if len(edges) < 4:
        raise ValueError("too few shells outside the core radius")
    rad, lm = [], []
    for a in edges:
        shell = (r >= a) & (r < a + h)
        if shell.any():
            rad.append(a + h / 2)
            lm.append(np.log(mod[shell].max() + 1e-300))
    rad, lm = np.array(rad), np.array(lm)
    A = np.vstack([rad, np.ones_like(rad)]).T
    coef, *_ = np.linalg.lstsq(A, lm, rcond=None)
    fit = A @ coef
    ss = ((lm - lm.mean()) ** 2).sum()
    quality = 1.0 - ((lm - fit) ** 2).sum() / ss if ss > 0 else 0.0
    monotone = bool(np.all(np.diff(lm) < 0))
    near_wall = mod[r >= grid.R - 2 * h].max() / mod.max()
    if near_wall > wall_ratio:
        profile = "boundary-limited"
    else:
        c2 = np.polyfit(rad, lm, 2)[0]
        profile = "super-exponential" if c2 < 0 and abs(c2) * (rad[-1] - rad[0]) > 0.1 * abs(coef[0]) \
            else "exponential"
    return DecayFit(float(-coef[0]), float(quality), monotone, profile, rad, lm)


def quadratic_self_test(tau: complex = 1.0, grid: SpectralGrid | None = None) -> float:
    """Apply the degree-1 operator of ``tau z^2`` to its closed-form zero mode.

    Returns the relative residual and raises :class:`SelfTestError` when it
    exceeds ``10 h^2 max(1, |tau|)^2``.
    """
    grid = grid or SpectralGrid(4.0, 1 / 16)
    op = assemble_twisted_laplacian(np.array([0, 0, tau], dtype=complex), 1, grid)
    phi = oscillator_groundform_complex(tau, grid)
    r = op.matrix @ phi.interior_vector()
    rel = float(np.linalg.norm(r) / np.linalg.norm(phi.interior_vector()))
    bound = 10 * grid.h ** 2 * max(1.0, abs(tau)) ** 2
    if rel > bound:
        raise SelfTestError(f"coupling-block self-test failed: residual {rel:.3g} > {bound:.3g}")
    return rel
