"""Moments of q-deformed quantum Levy processes.

Exact pair-partition Wick sums, a discretized deformed Fock space as
numerical ground truth, limit-theorem coefficient estimation, and
isomorphism-invariant moment-sequence comparison, with a CLI on top.
"""

from .errors import (
    AlignmentError,
    ConfigError,
    DepthCapError,
    KernelSpecError,
    QLevyError,
    SizeLimitError,
)
from .grids import Grid, Interval
from .kernels import (
    ConstantKernel,
    ExponentialKernel,
    GaussQuad,
    GridQuad,
    QKernel,
    TabulatedKernel,
    describe,
    double_integral,
    load_table_kernel,
    parse_kernel,
    sample_grid,
)
from .partitions import (
    OrderClass,
    PairPartition,
    alpha,
    class_of,
    count_in_class,
    crossings,
    enumerate_order_classes,
    enumerate_pair_partitions,
    pairing_of,
)
from .wick import (
    MomentPolynomial,
    MomentRequest,
    constant_q_moment,
    mixed_moment_constant,
    mixed_moment_kernel,
    moment_polynomial_constant,
    wick_general,
)
from .fock import (
    FockVector,
    ProcessSpec,
    apply_annihilation,
    apply_creation,
    apply_field,
    mixed_vacuum_moment,
    vacuum_moment,
)
from .levy import (
    CCoefficient,
    ComparisonReport,
    LowMomentFit,
    MomentOracle,
    OrderInvarianceReport,
    ScalingReport,
    StationarityReport,
    assemble_polynomial,
    builtin_invariance_cases,
    builtin_stationarity_words,
    c_scaling_check,
    compare_processes,
    constant_oracle,
    estimate_c,
    fock_oracle,
    kernel_oracle,
    low_moment_coefficients,
    order_invariance_check,
    random_order_cases,
    sigma_increment_moment,
    stationarity_check,
)
from ._accel import backend_name

__version__ = "0.1.0"
