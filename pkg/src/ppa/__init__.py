"""Principal polynomial analysis.

An invertible, volume-preserving nonlinear generalization of PCA: each stage
projects onto a leading direction and subtracts a polynomial estimate of the
conditional mean of the orthogonal coordinates, so curved structure is removed
one dimension at a time. The exact inverse, the analytic Jacobian, the induced
metric, curvature descriptors, and redundancy-reduction estimates all come
with the model.
"""

from .exceptions import (
    ConditioningWarning,
    DegreeCapWarning,
    InsufficientSamplesError,
    InvalidDataError,
    PpaError,
    RankDeficiencyError,
    UndefinedFrameError,
)
from .model import (
    FitConfig,
    GRADIENT_DESCENT,
    MODEL_SCHEMA,
    PCA_BASED,
    PpaModel,
    PpaStep,
    center,
    fit,
    fit_polynomial,
    fit_step,
    forward,
    inverse,
    inverse_transform,
    load_model,
    pca_split,
    reconstruct,
    reconstruct_truncated,
    save_model,
    select_degree,
    transform,
    truncation_mse,
    vandermonde,
)
from .optim import (
    DescentOptions,
    DescentResult,
    complement_basis,
    cost,
    cost_gradient,
    derivative_operator,
    optimize_leading,
)
from .geometry import (
    FrenetFrame,
    alpha_span,
    curvature_profile,
    frenet_frame,
    full_jacobian,
    helix_reference_curvatures,
    metric_tensor,
    principal_curve,
    principal_grid,
    squared_distance,
    step_jacobian,
    whitened_variances,
)
from .infotheory import EntropyEstimate, marginal_entropy, multi_info_reduction
from .data import (
    Dataset,
    gen_helix3d,
    gen_helix4d,
    gen_parabola2d,
    generate,
    load_dataset,
    random_rotation,
    save_csv,
    split,
)
from .benchmark import (
    BenchmarkReport,
    knn_benchmark,
    knn_classify,
    rel_mse_benchmark,
    write_benchmark_csv,
    write_knn_csv,
)

__version__ = "0.1.0"
