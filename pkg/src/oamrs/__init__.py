"""Downlink OAM-MIMO rate-splitting link simulator and precoder optimizer."""

from .geometry import (
    ChannelMatrix,
    DegenerateGeometryWarning,
    LinkGeometry,
    PropagationSpec,
    UcaSpec,
    channel_coefficient,
    channel_matrix,
    element_azimuth,
    gram_eigenvalues,
    ideal_mode_matrix,
    zeta_angle,
)
from .signal import (
    PairConfig,
    RsPrecoder,
    ScenarioConfig,
    mode_isolation_defect,
    scale_to_power,
    steering_vector,
    total_power,
)
from .metrics import (
    ModeCase,
    RateReport,
    SinrGrid,
    capacity_from_grid,
    common_pair_capacity,
    evaluate_pair,
    sinr_common,
    sinr_private,
    split_common,
)
from .fp import (
    AuxiliarySet,
    FpConfig,
    FpState,
    NumericalFailure,
    PairProblem,
    inner_step,
    optimize,
    optimize_pair,
    pair_problem,
    surrogate_gradient,
    surrogate_objective,
    update_auxiliaries,
)
from .baselines import BaselineKind, evaluate_noma, evaluate_sdma, evaluate_tdma
from .harness import (
    SweepSpec,
    build_scenario,
    default_scenario,
    emit_csv,
    load_scenario,
    preset_case,
    run_sweep,
)
from .estimator import RatePrecoder

__version__ = "0.1.0"
