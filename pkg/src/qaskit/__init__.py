"""Analysis and synthesis of quantum secret sharing access structures."""

from .core import (
    AccessStructure,
    PlayerSet,
    UnauthorizedSplit,
    is_authorized,
    is_maximal,
    minimize,
    unauthorized_split,
    validate_quantum,
)
from .decomp import (
    BundledThreshold,
    Decomposition,
    enumerate_realizable_subfamilies,
    optimal_decomposition,
    recognize_bundled_threshold,
)
from .errors import PivotError, QaskitError, SizeLimitError, StructureError
from .maximalize import (
    all_maximal_extensions,
    candidate_pairs,
    check_corollary,
    extend_to_maximal,
    grow_minmax,
    is_minmax,
    reduce_to_minmax,
)
from .qsim import (
    FieldElement,
    SchemeInstance,
    SparseState,
    decoupling_residual,
    dense_oracle_crosscheck,
    encode,
    player_subset_report,
    verify_structure,
)
from .schemes import (
    ConcatScheme,
    ResourceReport,
    build_scheme1,
    build_scheme2,
    concat_authorized_family,
    resource_compare,
    verify_scheme2,
)

__version__ = "0.1.0"
