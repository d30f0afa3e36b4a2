"""Out-of-network exposure-bias audit toolkit.

Measures who a feed ranking algorithm puts in front of users who never
asked for them: rank-decay visibility weighting, per-author weighted
occurrence, Gini/Lorenz exposure inequality, and amplification ratios
against a balanced-baseline group, plus a synthetic feed simulator with
known ground-truth bias for validating the whole chain.
"""

__version__ = "0.1.0"

from .amplify import (
    AmplificationMagnitude,
    AmplificationRow,
    amplification_ratio,
    build_amplification_report,
    group_amplification_magnitude,
)
from .decay import DecayModel, attention_residual, calibrate
from .errors import (
    AnalysisError,
    ConfigError,
    DataError,
    FeedAuditError,
    ParseError,
)
from .inequality import (
    GiniComparison,
    GiniReport,
    LorenzBand,
    LorenzCurve,
    average_lorenz,
    gini,
    group_gini_distribution,
    lorenz,
    lorenz_auc,
)
from .metrics import (
    ATTR_DISPLAYED,
    ATTR_ORIGINAL,
    SCOPE_ALL,
    SCOPE_OON,
    ExposureTable,
    build_exposure_table,
    exposure_share,
    group_mean_exposure,
    top_k,
    weighted_occurrence,
)
from .model import (
    GROUP_ORDER,
    LEAN_LEFT,
    LEAN_RIGHT,
    LEAN_UNKNOWN,
    GroupLabel,
    MonitorAccount,
    SessionRecord,
    TimelineEntry,
    validate_session,
)
from .mwu import (
    MODE_AUTO,
    MODE_EXACT,
    MODE_NORMAL,
    MannWhitneyResult,
    mann_whitney_u,
)
from .simkit import (
    FleetConfig,
    LeanMixture,
    RankerParams,
    SimAuthor,
    SimWorld,
    build_world,
    lean_labels,
    make_monitors,
    rank_timeline,
    run_fleet,
)
from .store import (
    AuthorInfo,
    DatasetStats,
    GroupStats,
    IngestResult,
    dataset_stats,
    emit_report,
    read_authors,
    read_sessions,
    write_authors,
    write_sessions,
)

__all__ = [
    "__version__",
    "AmplificationMagnitude",
    "AmplificationRow",
    "amplification_ratio",
    "build_amplification_report",
    "group_amplification_magnitude",
    "DecayModel",
    "attention_residual",
    "calibrate",
    "AnalysisError",
    "ConfigError",
    "DataError",
    "FeedAuditError",
    "ParseError",
    "GiniComparison",
    "GiniReport",
    "LorenzBand",
    "LorenzCurve",
    "average_lorenz",
    "gini",
    "group_gini_distribution",
    "lorenz",
    "lorenz_auc",
    "ATTR_DISPLAYED",
    "ATTR_ORIGINAL",
    "SCOPE_ALL",
    "SCOPE_OON",
    "ExposureTable",
    "build_exposure_table",
    "exposure_share",
    "group_mean_exposure",
    "top_k",
    "weighted_occurrence",
    "GROUP_ORDER",
    "LEAN_LEFT",
    "LEAN_RIGHT",
    "LEAN_UNKNOWN",
    "GroupLabel",
    "MonitorAccount",
    "SessionRecord",
    "TimelineEntry",
    "validate_session",
    "MODE_AUTO",
    "MODE_EXACT",
    "MODE_NORMAL",
    "MannWhitneyResult",
    "mann_whitney_u",
    "FleetConfig",
    "LeanMixture",
    "RankerParams",
    "SimAuthor",
    "SimWorld",
    "build_world",
    "lean_labels",
    "make_monitors",
    "rank_timeline",
    "run_fleet",
    "AuthorInfo",
    "DatasetStats",
    "GroupStats",
    "IngestResult",
    "dataset_stats",
    "emit_report",
    "read_authors",
    "read_sessions",
    "write_authors",
    "write_sessions",
]
