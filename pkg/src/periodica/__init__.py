"""Topological phase estimation for reparameterized periodic signals."""

from .diagram import (
    DiagonalBand,
    PersistenceMeasure,
    bottleneck,
    count_ball,
    divide_measure,
    realize_diagram,
    separation_delta,
    to_measure,
    total_persistence,
)
from .estimators import (
    ClusterScan,
    EstimatorReport,
    n_exact,
    n_hat_auto,
    n_hat_ball,
    n_hat_cluster,
    scan_h,
    single_linkage_partition,
    zero_crossings_estimate,
)
from .noise import (
    BoundInputs,
    GPConfig,
    bound_gaussian_process,
    bound_white_noise,
    c_f_gamma,
    clipped_gp,
    sample_gp,
)
from .odometry import (
    OdometricResult,
    OdometryMetrics,
    ToleranceRadius,
    check_odometric_property,
    displacement_and_speed,
    odometric_sequences,
    odometry_metrics,
    prominent_minima,
    tolerance_radius,
)
from .persistence import (
    AnnotatedDiagram,
    PersistencePoint,
    brute_force_diagram,
    diagram_circle,
    diagram_interval,
)
from .signal import (
    BUILTIN_TEMPLATES,
    PeriodicTemplate,
    Reparam,
    SamplingConfig,
    Signal,
    SmoothWarp,
    detrend_median,
    eval_template_composed,
    get_template,
    interpolate_F,
    period_aligned_grid,
    random_reparam,
    sample_L,
)

__version__ = "0.1.0"
