"""Discrete Bayesian-network risk modeling toolkit.

Learns network structure (BDs/BDeu hill climbing under arc constraints) and
Dirichlet posteriors from categorical cohort data, answers exact conditional
queries with parameter uncertainty, and produces interval-annotated risk
maps and randomized-evidence influence rankings behind a CLI and an HTTP
service.
"""

from .model import (
    ArcConstraints,
    BayesianNetwork,
    Cpt,
    Dag,
    NetworkSchema,
    Variable,
    joint_probability,
    reference_crc_network,
    validate_dag,
)
from .data import (
    Dataset,
    RawRecord,
    clean_continuous,
    complete_cases,
    discretize,
    load_dataset,
    save_dataset,
)
from .inference import (
    ImpossibleEvidenceError,
    JointTable,
    OracleInfeasibleError,
    QueryResult,
    brute_force_query,
    forward_sample,
    is_d_separated,
    query,
)
from .structure import (
    HillClimbResult,
    ScoreConfig,
    SearchConfig,
    family_score,
    hill_climb,
    network_score,
    structural_hamming_distance,
)
from .params import (
    ParameterPosterior,
    PriorSpec,
    build_prior,
    credible_interval,
    fit,
    initial_posterior,
    posterior_mean_network,
    sample_parameters,
    sequential_fit,
)
from .analytics import (
    InfluenceReport,
    RiskMap,
    RiskMapSpec,
    influential_findings,
    parse_risk_map,
    render_risk_map,
    risk_map,
)
from .evaluation import (
    CalibrationCurve,
    ConfusionMatrix,
    ScoredPredictions,
    auc,
    calibration_curve,
    confusion_at,
    score_dataset,
    select_threshold_gmean,
)
from .fixtures import POPULATION_MARGINALS, PUBLISHED_ALPHA, paper_fixtures
from .persist import load_model, save_model

__version__ = "0.1.0"

__all__ = [
    "ArcConstraints", "BayesianNetwork", "Cpt", "Dag", "NetworkSchema", "Variable",
    "joint_probability", "reference_crc_network", "validate_dag",
    "Dataset", "RawRecord", "clean_continuous", "complete_cases", "discretize",
    "load_dataset", "save_dataset",
    "ImpossibleEvidenceError", "JointTable", "OracleInfeasibleError", "QueryResult",
    "brute_force_query", "forward_sample", "is_d_separated", "query",
    "HillClimbResult", "ScoreConfig", "SearchConfig", "family_score", "hill_climb",
    "network_score", "structural_hamming_distance",
    "ParameterPosterior", "PriorSpec", "build_prior", "credible_interval", "fit",
    "initial_posterior", "posterior_mean_network", "sample_parameters", "sequential_fit",
    "InfluenceReport", "RiskMap", "RiskMapSpec", "influential_findings",
    "parse_risk_map", "render_risk_map", "risk_map",
    "CalibrationCurve", "ConfusionMatrix", "ScoredPredictions", "auc",
    "calibration_curve", "confusion_at", "score_dataset", "select_threshold_gmean",
    "POPULATION_MARGINALS", "PUBLISHED_ALPHA", "paper_fixtures",
    "load_model", "save_model",
    "__version__",
]
