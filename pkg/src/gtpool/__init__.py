"""Randomized pool designs for non-adaptive group testing.

Build a binary test matrix under one of four random models, size it so
that a chosen defective set is identified with probability at least
1 - delta, decode pooled answers by elimination, and measure all of it
empirically with seeded Monte Carlo runs.
"""

from .decoding import decode_eliminate, is_disjunct, is_separable
from .designs import (
    DesignSpec,
    MODELS,
    SizingResult,
    generate,
    lower_bound_m,
    optimal_param,
    upper_bound_m,
)
from .errors import (
    CapacityError,
    DimensionError,
    GroupTestError,
    InfeasibleError,
    MatrixParseError,
    ParameterError,
    SizeGuardError,
)
from .matrices import (
    AnswerVector,
    BitMatrix,
    DefectiveSet,
    QaryMatrix,
    expand_qary,
    or_columns,
    read_answers,
    read_matrix,
    write_answers,
    write_matrix,
)
from .sim import (
    SearchResult,
    TrialReport,
    find_min_m,
    run_sweep,
    run_trials,
    slope_fit,
    transversal_prob_check,
    variance_probe,
    wilson_interval,
)
from .theory import (
    ASYMPTOTIC_CONSTANT,
    ConstantsRow,
    c_constant,
    entropy,
    ln_p_qd,
    r_qdi,
    rssd_alpha_star,
    stirling_approx,
    surjections,
    table1,
    table1_csv,
    utdq_q_star,
)

__version__ = "0.1.0"

__all__ = [
    "ASYMPTOTIC_CONSTANT",
    "AnswerVector",
    "BitMatrix",
    "CapacityError",
    "ConstantsRow",
    "DefectiveSet",
    "DesignSpec",
    "DimensionError",
    "GroupTestError",
    "InfeasibleError",
    "MODELS",
    "MatrixParseError",
    "ParameterError",
    "QaryMatrix",
    "SearchResult",
    "SizeGuardError",
    "SizingResult",
    "TrialReport",
    "c_constant",
    "decode_eliminate",
    "entropy",
    "expand_qary",
    "find_min_m",
    "generate",
    "is_disjunct",
    "is_separable",
    "ln_p_qd",
    "lower_bound_m",
    "optimal_param",
    "or_columns",
    "r_qdi",
    "read_answers",
    "read_matrix",
    "rssd_alpha_star",
    "run_sweep",
    "run_trials",
    "slope_fit",
    "stirling_approx",
    "surjections",
    "table1",
    "table1_csv",
    "transversal_prob_check",
    "upper_bound_m",
    "utdq_q_star",
    "variance_probe",
    "wilson_interval",
    "write_answers",
    "write_matrix",
]
