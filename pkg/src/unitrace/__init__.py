"""Trace and K-theory invariants of unitary-group homomorphisms.

Finite-dimensional algebras are direct sums of matrix blocks; homomorphisms
between their unitary (or general linear) groups are written in a small
compositional expression language.  The package extracts the Stone generator
map, the induced map on affine functions over the trace simplex, the induced
K-zero matrix, pre-determinants of unitary paths and their classes modulo the
loop lattice, positivity/unitality verdicts with the dual simplex map, and the
general-linear analogue with its complex-linearity defect.
"""

from .algebra import (
    AffVector,
    AlgebraShape,
    Element,
    K0Class,
    SelfAdjoint,
    TraceWeights,
    Unitary,
    barycenter,
    block_unit,
    exp_generator,
    identity,
    log_unitary,
    pairing_matrix,
    pairing_rho,
    rank_one_projection,
    unit_class,
    universal_trace,
)
from .analysis import Report, run_analysis, run_corpus, run_properties
from .config import AnalysisConfig, load_config, parse_config_text
from .dsl import apply_gl, apply_hom, infer_target, parse_hom, print_hom, validate
from .errors import (
    BranchCutError,
    ConfigError,
    ConvergenceError,
    DslError,
    InconsistencyError,
    InvariantViolation,
    NoDualError,
    NotALoopError,
    NotCircleValuedError,
    ParseError,
    ResolutionError,
    ShapeError,
    SingularError,
    UnitraceError,
    WellDefinednessError,
)
from .induced import (
    K0Matrix,
    KTuMorphismReport,
    LambdaMatrix,
    PositivityVerdict,
    c_linearity_defect,
    circle_degree,
    f_tau_dual,
    g_real_matrix,
    g_theta,
    k0_map,
    ktu_report,
    lambda_matrix,
    pairing_residual,
    positivity_report,
    pushforward,
    stone_generator,
    trace_dual,
)
from .paths import (
    PiecewisePath,
    SampledPath,
    ThomsenClass,
    cu_membership,
    discretize,
    exponential_path,
    loop_k0_class,
    pointwise_product,
    pre_determinant,
    pre_determinant_numeric,
    projection_loop,
    thomsen_class,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "1.0.0"
