"""Parallel sums, generalized shorts and quasi-units of positive semidefinite matrices."""
from .errors import (
    BadRank,
    CrossCheckFailure,
    DimensionMismatch,
    FormatError,
    HalfLemmaViolated,
    IdentityDrift,
    NoConvergence,
    NonHermitianInput,
    NotAProjection,
    NotDominated,
    NotInImage,
    NotInInterval,
    NotPositive,
    NotQuasiUnit,
    NotSolvable,
    QuasiUnitsError,
    UnknownSuite,
)
from .forms_iso import (
    Form,
    FormInfimum,
    FormQuasiUnitReport,
    QuotientSpace,
    embedding_j,
    form_inf_exists,
    form_kernel,
    form_leq,
    form_parallel_sum,
    form_quasi_unit,
    form_short,
    phi,
    phi_inverse,
    quotient_space,
)
from .galois import PolarityPair, adjunction_sides, alpha, beta, check_adjunction, closure, is_closed_element
from .matfile import read_matrix, write_matrix
from .parallel_ops import (
    parallel_diff,
    parallel_sum,
    parallel_sum_direct,
    scalar_parallel_check,
    variational_parallel_sum_value,
)
from .psd_core import (
    PsdMatrix,
    Subspace,
    as_psd,
    hermitian_eigen,
    loewner_leq,
    pseudo_inverse,
    range_projection,
    spectral_norm,
    sqrt_psd,
    subspace_intersection,
)
from .quasi_unit import (
    InfimumResult,
    QuasiUnitCertificate,
    ando_infimum,
    is_quasi_unit,
    lambda_iteration_check,
    lambda_sequence,
    projection_to_quasiunit,
    quasi_join,
    quasi_meet,
    quasiunit_to_projection,
)
from .random_gen import gen_random_non_quasiunit, gen_random_psd, gen_random_quasiunit
from .short_lebesgue import (
    AuxSpace,
    LebesgueDecomposition,
    build_aux_space,
    generalized_short,
    is_absolutely_continuous,
    is_singular,
    lebesgue_decompose,
    multivalued_part,
    range_included,
    short_aux,
    short_iterative,
    short_schur,
)
from .suites import RunConfig, SuiteReport, run_suites
from .tolerances import Tolerances, configure, get_tolerances, tolerances

__version__ = "0.1.0"
