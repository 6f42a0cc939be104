"""degenboot: bootstrap inference for plug-in statistics whose first-order
expansion term vanishes.

When the leading derivative of the map behind a plug-in statistic is zero,
the familiar difference bootstrap estimates the wrong law.  This package
implements the working alternatives (a corrected draw for smooth maps and a
modified draw composing an estimated second-order derivative with the
bootstrap direction), and builds on them a complete test for common
conditionally heteroskedastic features in multivariate series, a Monte Carlo
replication harness, and brute-force oracle cross-checks.
"""

__version__ = "0.1.0"

from .bootstrap import (
    BootstrapDraws,
    BootstrapScheme,
    babu_corrected_draw_squared_mean,
    critical_value,
    modified_draw_ch,
    modified_draws_ch,
    resample_indices,
    standard_second_order_draw,
)
from .derivative import (
    DerivEstimator,
    ball_least_squares,
    closed_form_deriv_squared_mean,
    cvm_deriv,
    gms_deriv_moment_ineq,
    jtest_structural_deriv,
    numerical_deriv,
    quadratic_direction,
    structural_deriv_ch,
)
from .estimators import CommonFeatureTest, MomentInequalityTest, SquaredMeanTest
from .inference import (
    TestOutcome,
    adaptive_statistic,
    ch_feature_test,
    moment_ineq_test,
    squared_mean_test,
)
from .moments import (
    QuadMomentModel,
    bootstrap_model,
    eval_phi,
    eval_theta,
    fit_quadratic_moments,
    load_panel,
    panel_from_series,
    save_panel,
)
from .montecarlo import McConfig, McRow, McTable, emit_table, read_table, run_design
from .simulate import (
    DESIGN_NAMES,
    DesignSpec,
    GarchParams,
    PanelData,
    named_design,
    simulate_ch_panel,
    simulate_garch_path,
    simulate_scalar_iid,
)
from .sphereopt import (
    IdentifiedSetEstimate,
    SphereMinResult,
    estimate_identified_set,
    grid_oracle_sphere,
    minimize_on_sphere,
    sphere_point_set,
)
from .validation import NumericalError, ValidationError

__all__ = [
    "__version__",
    "BootstrapDraws",
    "BootstrapScheme",
    "CommonFeatureTest",
    "DESIGN_NAMES",
    "DerivEstimator",
    "DesignSpec",
    "GarchParams",
    "IdentifiedSetEstimate",
    "McConfig",
    "McRow",
    "McTable",
    "MomentInequalityTest",
    "NumericalError",
    "PanelData",
    "QuadMomentModel",
    "SphereMinResult",
    "SquaredMeanTest",
    "TestOutcome",
    "ValidationError",
    "adaptive_statistic",
    "babu_corrected_draw_squared_mean",
    "ball_least_squares",
    "bootstrap_model",
    "ch_feature_test",
    "closed_form_deriv_squared_mean",
    "critical_value",
    "cvm_deriv",
    "emit_table",
    "estimate_identified_set",
    "eval_phi",
    "eval_theta",
    "fit_quadratic_moments",
    "gms_deriv_moment_ineq",
    "grid_oracle_sphere",
    "jtest_structural_deriv",
    "load_panel",
    "minimize_on_sphere",
    "modified_draw_ch",
    "modified_draws_ch",
    "moment_ineq_test",
    "named_design",
    "numerical_deriv",
    "panel_from_series",
    "quadratic_direction",
    "read_table",
    "resample_indices",
    "run_design",
    "save_panel",
    "simulate_ch_panel",
    "simulate_garch_path",
    "simulate_scalar_iid",
    "sphere_point_set",
    "squared_mean_test",
    "standard_second_order_draw",
    "structural_deriv_ch",
]
