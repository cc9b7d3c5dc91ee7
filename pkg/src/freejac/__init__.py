"""freejac: numerical free-probability laboratory for Haar-orthogonal MLPs.

Simulates orthogonally initialized multilayer perceptrons, computes
empirical spectra of their layerwise, input, and parameter Jacobians and of
the per-sample Fisher information matrix, predicts the wide-width limits of
those spectra through S-transform calculus, and statistically verifies the
invariance and asymptotic-freeness structure that makes the predictions
valid.
"""

__version__ = "0.1.0"

from .rng import SeededRng
from .linalg import (
    NumericalError,
    SymmetricEigenResult,
    normalized_trace,
    sample_gaussian_matrix,
    sample_haar_orthogonal,
    schatten_norm,
    svd,
    symmetric_eigen,
)
from .activations import (
    ACTIVATION_KINDS,
    Activation,
    GaussHermiteRule,
    derivative_square_moments,
    gaussian_expectation,
    make_activation,
)
from .mlp import (
    MlpConfig,
    NetworkState,
    TheoryProfile,
    backward_chains,
    fim_dual_matrix,
    fim_recursion,
    forward_pass,
    input_jacobian_chain,
    parameter_jacobian_oracle,
    sample_network,
    sample_preactivations,
    theory_profile,
)
from .spectral import (
    EmpiricalSpectrum,
    Histogram,
    empirical_moments,
    histogram,
    ks_distance_to_gaussian,
    spectrum_of,
)
from .freecalc import (
    MomentSeries,
    PowerSeries,
    STransform,
    affine_pushforward,
    dilate,
    free_multiplicative_convolution,
    layer_derivative_moments,
    moments_from_s,
    predict_fim_moments,
    predict_jacobian_moments,
    s_transform,
    series_compose,
    series_reversion,
)
from .freeness import (
    FreenessReport,
    InvarianceArtifacts,
    WordLetter,
    alternating_freeness_test,
    build_invariance_rotation,
    cutoff_orthogonal_approx,
    cutoff_trace_check,
    freeness_moment_prediction_test,
    invariance_statistical_test,
    letter_diagonal_power,
    letter_rotated_jacobian_gram,
    letter_weight_symmetrized,
)
