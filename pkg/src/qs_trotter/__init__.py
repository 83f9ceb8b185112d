"""Quantum stochastic generator algebra and Lie-Trotter product formula checks."""

__version__ = "0.1.0"

from .numkit import DEFAULT_TOL, Tolerance  # noqa: E402
from .ito_algebra import (  # noqa: E402
    BlockGenerator,
    adjoint,
    beta0,
    classify,
    concat,
    dressed_generator,
    ito_defect,
    sample_qc,
    series,
    series_all,
    weyl_generator,
    zero_generator,
)
from .decompositions import (  # noqa: E402
    dilate_to_unitary,
    gaussian_split,
    left_series_decomposition,
    right_series_decomposition,
)
from .cocycle_sim import Partition, SliceResult, StepFunction, slice_cocycle, trotter_limit_slice  # noqa: E402
from .toy_fock import cell_pair_slice, trotter_approximant_slice, trotter_report  # noqa: E402
from .qform import QuadForm, bounded_to_form, qf_series  # noqa: E402

__all__ = [
    "DEFAULT_TOL",
    "Tolerance",
    "BlockGenerator",
    "adjoint",
    "beta0",
    "classify",
    "concat",
    "dressed_generator",
    "ito_defect",
    "sample_qc",
    "series",
    "series_all",
    "weyl_generator",
    "zero_generator",
    "dilate_to_unitary",
    "gaussian_split",
    "left_series_decomposition",
    "right_series_decomposition",
    "Partition",
    "SliceResult",
    "StepFunction",
    "slice_cocycle",
    "trotter_limit_slice",
    "cell_pair_slice",
    "trotter_approximant_slice",
    "trotter_report",
    "QuadForm",
    "bounded_to_form",
    "qf_series",
]
