"""Spectra of parametrized self-adjoint matrix families: alignment, flow, projectors and bundle signs."""

from .errors import SpectralError
from .spectrum import (AlignmentResult, SpectrumWindow, align, arsinh, arsinh_distance,
                       ordered_spectrum, spectral_part)
from .family import (Branches, EigenSystem, KatoConstants, OperatorFamily, delta_for_epsilon,
                     detect_paired_branches, eigen_decompose, kato_constants, min_max_check,
                     rayleigh_distance_check, spectral_flow, track_branches, verify_growth_bound)
from .projection import IntervalProjector, constant_rank_loop, project_contour, project_direct
from .bundle import (LassoCertificate, SignCertificate, SubspaceLoop, lasso_certificate,
                     propagate_frame, sign_stability_check, transported_sign)
from .clifford import (CliffordElement, SpinElement, clifford_mul, embed, grade_split,
                       rotation_lift, rotation_matrix, theta)
from .model_spectra import (SphereSpectrumSpec, multiplicity_convert, sphere_levels,
                            sphere_spectrum, synthetic_family)
from .identification import MetricPair, a_map, b_map, frame_transform, volume_factor

__version__ = "0.1.0"
