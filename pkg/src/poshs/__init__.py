"""Occupant identification and comfort control in a simulated smart home.

The package has three layers: a discrete thermal environment with
PMV-driven simulated occupants, Bayesian identification of who is in
the room (belief filtering plus divergence-based new-user detection),
and a belief-weighted tabular control agent, wrapped in an experiment
harness.
"""

from .agent import (
    AgentState,
    EpisodeLog,
    PolicyConfig,
    StepRecord,
    Transition,
    q_net,
    run_episode,
    select_action,
    update_q,
)
from .belief import (
    LIKELIHOOD_FLOOR,
    init_uniform,
    likelihood,
    posterior_closed_form,
    update,
)
from .env import (
    DEFAULT_GRID,
    HumanAction,
    N_HUMAN_ACTIONS,
    N_SHS_ACTIONS,
    ShsAction,
    SmartHomeEnv,
    ThermalGrid,
    ThermalObservation,
    UnknownOccupantError,
    env_from_config,
    is_valid_sample,
    load_config,
)
from .harness import (
    DEFAULT_MET_SETS,
    ExperimentConfig,
    build_occupants,
    confusion_from_rows,
    eval_phase,
    load_state,
    make_env,
    read_episode_logs,
    read_episode_rows,
    run_experiment_a,
    run_experiment_b,
    save_state,
    score,
    steps_to_confidence,
    train_phase,
    write_episode_logs,
    write_episode_rows,
    write_report,
)
from .identity import (
    DEFAULT_TAU,
    JSD_CHANNEL_MAX,
    JsdConfig,
    MatchResult,
    OccupantPool,
    PoolEntry,
    discretize,
    end_of_episode,
    jsd,
    load_pool,
    match,
    save_pool,
)
from .occupant import (
    ComfortParams,
    DEFAULT_COMFORT,
    HumanModel,
    OccupantRuntime,
    comfort_reward,
    load_model,
    pmv,
    pretrain,
    save_model,
)
from .preference import (
    SIGMA_FLOOR,
    EpisodeEstimator,
    EstimationError,
    GaussianParams,
    PreferenceProfile,
    gaussian_pdf,
    merge_profiles,
)

__version__ = "0.1.0"
