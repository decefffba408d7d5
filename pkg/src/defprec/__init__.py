"""Deflation-style preconditioners with certified spectra.

Library layout:

- operators / matrices / spectra: linear algebra kernels and oracles
- subspace: orthonormal bases, angles, eigen-residuals
- precond: projection matrix, the three preconditioners, Schwarz
- krylov: GMRES, Ritz extraction, split coarse spaces
- bounds: spectral interval formulas and certification
- problems: diagonal and diffusion test problems
- experiments: table/figure drivers shared by the CLI and the tests
"""

from .bounds import (BoundIngredients, SpectrumReport, bound_adapted,
                     bound_correction, bound_deflation, bound_inexact,
                     certify, default_tols, ingredients)
from .exceptions import DefprecError
from .experiments import (BoundTrialSummary, BvpStudy, SolveRecord,
                          basis_bound_trials, basis_perturbation_tables,
                          bvp_study, coarse_bound_trials,
                          coarse_perturbation_table, diag_exact_counts,
                          diag_spectrum_reports, spectrum_from_files,
                          transformed_solve, write_csv)
from .krylov import (ArnoldiData, ConvergenceHistory, RitzSet, gmres,
                     keep_real_pairs, rayleigh_ritz, split_coarse_space)
from .matrices import (ilu0, lu_factor, read_matrix, solve_lu, two_norm,
                       write_matrix)
from .operators import (LinearOperator, compose, from_diagonal, from_matrix,
                        identity)
from .precond import (CoarseSolve, InexactSet, RasPreconditioner,
                      adapted_deflation_op, build_projection,
                      coarse_correction_op, deflation_op, explicit_coarse,
                      inexact_variants, ras_build, ras_system, two_level_op,
                      variant_op)
from .problems import (DiagonalTestCase, Partition, ViscosityField,
                       assemble_bvp, continuous_field, diag_case,
                       field_by_name, field_on_grid, perturb_basis,
                       skyscraper_field, tile_partition)
from .spectra import (EigenDecomposition, eig_general, eig_symmetric,
                      spectrum_is_real, svd_values)
from .subspace import (AngleReport, OrthonormalBasis, angle, complement,
                       orthonormalize, rayleigh_ritz_basis, res_max,
                       rotated_basis)

__version__ = "0.1.0"
