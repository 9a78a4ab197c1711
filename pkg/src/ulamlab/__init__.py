"""Almost-multiplicative matrix maps on groups: defects, averaging, repair.

The package measures how far a matrix-valued map on a group is from being a
unitary representation, and implements the averaging constructions that pull
an almost-representation back to an exact one: positive definite smoothing,
polar repair, the quadratic stabilization loop, and similarity unitarization.
"""

from .linalg import (
    NormKind,
    NotPSDError,
    OPERATOR,
    SingularInputError,
    ky_fan,
    op_norm,
    parse_norm,
    polar,
    psd_sqrt,
    schatten,
    uinorm,
)
from .groups import (
    FiniteGroup,
    FreeBall,
    NotAGroupError,
    UnsupportedDomainError,
    cyclic,
    dihedral,
    direct_product,
    free_ball,
    from_table,
    parse_group_spec,
    reduce_word,
    symmetric,
)
from .maps import (
    DefectReport,
    GroupMap,
    PerturbationBoundReport,
    PreconditionError,
    constant_identity,
    defect_report,
    distance,
    iso_defect,
    map_from_dict,
    map_to_dict,
    mult_defect,
    pd_min_eig,
    perturbation_bound_report,
    sup_norm,
    unit_defect,
)
from .averaging import (
    ConditionBReport,
    MarginReport,
    average_pd,
    closeness_bound_check,
    condition_b_report,
    condition_c_check,
    form,
    mean,
    norm_estimate_check,
    translate_coefficient,
)
from .stabilize import (
    BoundCertificate,
    CERTIFIED_EPSILON,
    DivergedError,
    DixmierReport,
    KazhdanReport,
    NotRepairableError,
    RepairReport,
    StabilizationTrace,
    bound_certificate,
    dixmier_unitarize,
    kazhdan_step,
    polar_repair,
    product_constant,
    stabilize,
)
from .generators import (
    GenSpec,
    build_map,
    compress_rep,
    conjugate_rep,
    derive_seed,
    direct_sum,
    haar_unitary,
    parse_genspec,
    perturb_unitary,
    random_map,
    regular_rep,
    similarity_twist,
    trivial_rep,
)
from .verify import SUITES, SuiteResult, run_all_suites, run_suite

__version__ = "0.1.0"

__all__ = [
    "BoundCertificate",
    "CERTIFIED_EPSILON",
    "ConditionBReport",
    "DefectReport",
    "DivergedError",
    "DixmierReport",
    "FiniteGroup",
    "FreeBall",
    "GenSpec",
    "GroupMap",
    "KazhdanReport",
    "MarginReport",
    "NormKind",
    "NotAGroupError",
    "NotPSDError",
    "NotRepairableError",
    "OPERATOR",
    "PerturbationBoundReport",
    "PreconditionError",
    "RepairReport",
    "SUITES",
    "SingularInputError",
    "StabilizationTrace",
    "SuiteResult",
    "UnsupportedDomainError",
    "average_pd",
    "bound_certificate",
    "build_map",
    "closeness_bound_check",
    "compress_rep",
    "condition_b_report",
    "condition_c_check",
    "conjugate_rep",
    "constant_identity",
    "cyclic",
    "defect_report",
    "derive_seed",
    "dihedral",
    "direct_product",
    "direct_sum",
    "distance",
    "dixmier_unitarize",
    "form",
    "free_ball",
    "from_table",
    "haar_unitary",
    "iso_defect",
    "kazhdan_step",
    "ky_fan",
    "map_from_dict",
    "map_to_dict",
    "mean",
    "mult_defect",
    "norm_estimate_check",
    "op_norm",
    "parse_genspec",
    "parse_group_spec",
    "parse_norm",
    "pd_min_eig",
    "perturb_unitary",
    "perturbation_bound_report",
    "polar",
    "polar_repair",
    "product_constant",
    "psd_sqrt",
    "random_map",
    "reduce_word",
    "regular_rep",
    "run_all_suites",
    "run_suite",
    "schatten",
    "similarity_twist",
    "stabilize",
    "sup_norm",
    "symmetric",
    "translate_coefficient",
    "trivial_rep",
    "uinorm",
    "unit_defect",
    "__version__",
]
