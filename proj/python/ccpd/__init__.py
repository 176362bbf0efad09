"""Online change-point detection with contrastive discriminators."""

from ._core import (  # noqa: F401
    AlreadyAlarmed,
    DegenerateReference,
    DetectionResult,
    Detector,
    DetectorConfig,
    DimensionMismatch,
    DiscriminatorSpec,
    EmptyRange,
    Error,
    FittedDiscriminator,
    Gaussian,
    NonFiniteObjective,
    QuadratureFailure,
    Uniform,
    UnsupportedFamily,
    __version__,
    calibrate,
    contrastive_gradient,
    contrastive_value,
    features,
    fit,
    generate_example,
    js_divergence,
    js_lower_bound_check,
    max_statistic,
    run,
    simulate,
    softplus_half,
    upper_order_statistic,
    verify_lemma1,
)
