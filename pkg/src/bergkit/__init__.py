"""Bergman kernels, Bergman metrics and holomorphic sectional curvature
for model domains, with a verification suite for their curvature identities."""

from .domains import (
    Ball,
    DomainSpec,
    HartogsGauss,
    ModelPotential,
    ShadowStrip,
    Sliver,
    contains,
    sample_interior,
    shadow_strip,
    spec_from_json,
    spec_to_json,
)
from .geometry import (
    CurvatureReport,
    GeometrySettings,
    MetricSample,
    constant_curvature_verdict,
    curvature_tensor,
    hsc,
    metric_at,
    wirtinger_hessian,
)
from .kernels import (
    BallKernel,
    HartogsGaussKernel,
    HartogsGaussSeriesKernel,
    KernelModel,
    ModelPotentialKernel,
    MonomialSeriesKernel,
    SliverAffineKernel,
    assemble_series,
    auto_truncation,
    canonical_model,
    eval_log_kernel,
    truncation_error_bound,
)
from .modeltests import (
    CheckOutcome,
    binomial_sign_test,
    dalpha_pipeline,
    flat_slice_check,
    gaussian_uniqueness_check,
    laplacian_contradiction_check,
    paper_suite,
)
from .moments import (
    MomentResult,
    MomentTable,
    MultiIndex,
    QuadratureSettings,
    Verdict,
    build_moment_table,
    classify_convergence,
    gaussian_moment,
    gaussian_moment_quadrature,
    mi,
    moment_closed_form,
    moment_quadrature,
    monte_carlo_moment,
    orthogonality_residual,
)

__version__ = "0.1.0"
