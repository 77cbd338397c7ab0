"""Exact p-adic series arithmetic for sharp/flat decompositions."""

from .padic import RingDescriptor, Element, PadicNumber, teichmuller, gauss_sum
from .series import (Series, GroupRingElement, Mat2, cyclotomic_poly, omega, eval_at,
                     reduce_to_level, revert)
from .weierstrass import prep1, prep2, newton_invariants
from .logmatrix import (log_matrix, log_matrix_at_root, h_matrices, kernel_membership,
                        growth_profile)
from .honda import (recurrence_tables, honda_log, formal_group, lambda_nu, point_log_table,
                    verify_traces)
from .decompose import (LPair, compose1, decompose1, compose2, decompose2, stabilize,
                        decompose_finite, restrict_diag, rank1_factor)
from . import errors

__version__ = "0.1.0"
