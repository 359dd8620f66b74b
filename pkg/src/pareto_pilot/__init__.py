"""Interactive decision support for the privacy-accuracy trade-off.

The package jointly learns an S-shaped model of the achievable
privacy-accuracy frontier from expensive accuracy evaluations and a
decision-maker's latent preference weights from their choices on
hypothetical trade-off curves, steering both with knowledge-gradient
acquisition until a single preferred operating point emerges.
"""

from .acquisition import (
    AcquisitionConfig,
    KgResult,
    Selection,
    UtilityLandscape,
    expected_utility,
    kg_curve,
    kg_pair,
    kg_privacy,
    max_expected_utility,
    random_curve,
    random_pair,
    select_next_curve,
    select_next_pair,
    select_next_privacy,
)
from .config import ConfigError, LoopConfig, SessionConfig, load_config, parse_config
from .front import (
    CurveBand,
    CurveKind,
    FitResult,
    FrontObservation,
    FrontParams,
    FrontPosterior,
    GompertzPrior,
    NoiseScale,
    SigmoidPrior,
    effective_sample_size,
    eval_front,
    init_posterior,
    log_likelihood,
    map_fit,
    posterior_mean_curve,
    sample_prior,
    update_front_posterior,
)
from .oracles import (
    ClosedFormLogisticOracle,
    ExternalOracle,
    OracleError,
    TabulatedOracle,
    mc_logistic_accuracy,
    oracle_eval,
)
from .particles import WeightedParticles
from .preference import (
    ChoiceRecord,
    CurveQuery,
    PairQuery,
    PreferenceWeights,
    PrefPosterior,
    TradeOffPoint,
    UserModelConfig,
    chebyshev_utility,
    choice_log_probs,
    exp_linear_utility,
    init_pref_posterior,
    linear_utility,
    make_curve_query,
    pref_error,
    sample_weight_prior,
    simulate_choice,
    update_pref_posterior,
)
from .scaling import NormalizationSpec
from .session import (
    BatchReport,
    MetricPoint,
    RunRecord,
    SessionState,
    SessionSuspended,
    StepKind,
    TruthSpec,
    UserAbort,
    compute_regret,
    init_session,
    make_simulated_user,
    run_batch,
    run_loop,
    run_preference_study,
    run_step,
    run_step_adaptive,
)

__version__ = "0.1.0"
