"""Landau-Ginzburg toolkit: Milnor algebras, tameness, twisted Laplacian spectra,
Lefschetz thimbles, periods, monodromy and tt*/Frobenius checks."""

__version__ = "0.1.0"

from .poly import (  # noqa: E402
    DeformationFamily,
    GaussianRational,
    LaurentPolynomial,
    WeightSystem,
    classify_invertible,
    diagonal_symmetries,
    parse_complex,
    parse_polynomial,
    quasi_weights,
)
from .singularity import milnor_algebra, moduli_count, multiplication_matrix, residue_pairing  # noqa: E402
from .newton import is_convenient, is_nondegenerate_laurent, newton_polytope  # noqa: E402
from .tame import classify_deformation_monomial, growth_exponents, tameness_certificate  # noqa: E402
from .spectral import (  # noqa: E402
    SpectralGrid,
    assemble_twisted_laplacian,
    decay_fit,
    harmonic_dimension,
    lowest_eigenpairs,
)
from .thimble import (  # noqa: E402
    critical_points,
    detect_walls,
    monodromy_along_loop,
    period_matrix,
    real_structure,
    tau_loop,
    trace_thimble,
    witten_map,
)
from .frobenius import (  # noqa: E402
    connection_residuals,
    flat_coordinates,
    frobenius_data,
    frobenius_tensor,
    higgs_field,
    ttstar_metric,
    ttstar_residuals,
    u_matrix,
)
