"""Data-driven LQR synthesis from noisy trajectory data.

The package covers the full pipeline: seeded simulation and data collection
(`lti`), least-squares / ridge identification (`sysid`), model-based LQR via
Riccati or LMI (`lqr`, `synthesis`), the direct covariance-parameterized
synthesis family with its ridge-regularized variant (`synthesis`), a dense
interior-point SDP engine (`sdp`, `lmi`), a lifted-state extension for
nonlinear plants (`koopman`), and a reproducible Monte Carlo harness
(`experiments`) behind the `covlqr` CLI.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    ConfigError,
    CovLqrError,
    DimensionMismatch,
    EmptyInput,
    NoConvergence,
    NonFiniteObservable,
    NotPositiveDefinite,
    NotSymmetric,
    RankDeficient,
    Singular,
    SolverFailed,
    TrajectoryDiverged,
    UnknownVariable,
    Unstable,
)
from .lti import CovarianceData, DataRecord, LtiSystem, NoiseSpec, covariances, simulate_and_collect  # noqa: F401
from .lqr import GainResult, LqrWeights, cost, dare_solve, dlyap, optimality_gap  # noqa: F401
from .synthesis import (  # noqa: F401
    METHODS,
    ParamCertificate,
    SynthesisSpec,
    synth_direct_cov,
    synth_direct_mixed,
    synth_direct_ridge,
    synth_indirect,
    synth_model_based,
    synthesize,
)
