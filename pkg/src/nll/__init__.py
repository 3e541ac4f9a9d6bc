"""Numerical checks for Liouville theorems of nonlocal Lane-Emden inequalities.

The operator is L_K u(x) = p.v. int (u(x) - u(x + z)) K(z) dz for even,
uniformly elliptic kernels K; the package evaluates it by quadrature and
tests the cutoff, mass and iteration estimates that drive the theorem.
"""
from ._backend import BACKEND
from .errors import *  # noqa: F401,F403
from .fields import (ScalarField, bubble_field, bump_field, constant_field, cosine_field,
                     fractional_bubble, power_decay_field, radial_field, zero_field)
from .iteration import (CriticalSplit, IterationTrace, RegimeInput, RegimeReport, classify,
                        critical_split_scan, critical_tail_split, iterate_exponents)
from .kernels import (Kernel, KernelParams, fractional_kernel, make_anisotropic_kernel,
                      make_fractional_kernel, table_profile, validate_kernel)
from .mass_analysis import (DyadicCheck, MassProfile, mass, mass_profile, tail_functional,
                            verify_dyadic_inequality, verify_growth_bound)
from .operator import (CutoffFamily, apply_operator, lp_norm_power, make_bump, pairing,
                       verify_cutoff_bound, weak_supersolution_residual)
from .quadrature import DEFAULT_CONFIG, QuadResult, QuadratureConfig, pv_integrate
from .sharpness import SharpnessProfile, calibrate_c, pointwise_margin, sharpness_report

__version__ = "0.1.0"
