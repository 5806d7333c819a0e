"""factlab: configurable fact-checking pipelines and factuality evaluation.

The package bundles three harnesses around one pipeline engine:

* response checking: decompose a document into claims, retrieve evidence,
  verify each claim, and aggregate a credibility score;
* LLM evaluation: score a model's uploaded responses across seven
  question-benchmark subsets;
* checker evaluation: score a fact-checker's verdicts against gold labels
  and rank submissions on a leaderboard.

Importing the package registers the built-in solvers on
:data:`factlab.pipeline.DEFAULT_REGISTRY`.
"""

from . import solvers  # noqa: F401  (registers built-in solvers)
from .checker_eval import (
    CheckerEvaluator,
    CheckerMetrics,
    GoldRecord,
    LeaderboardEntry,
    Submitter,
    compute_metrics,
    ingest_verdicts,
    load_factbench,
    rank_leaderboard,
)
from .errors import FactLabError
from .llm_eval import (
    DatasetManifest,
    LLMEvaluator,
    LLMReport,
    QuestionRecord,
    aggregate_report,
    domain_distribution,
    ingest_responses,
    load_manifest,
)
from .pipeline import (
    DEFAULT_REGISTRY,
    ChainMismatch,
    PipelineConfig,
    SolverDescriptor,
    SolverRegistry,
    SolverResult,
    SolverSpec,
    Stage,
    load_pipeline_config,
    load_pipeline_config_file,
    register_solver,
    run_pipeline,
    validate_chain,
)
from .response import ResponseEvaluator, ResponseReport, evaluate_response
from .state import (
    Claim,
    EvidenceItem,
    FactState,
    Label,
    LedgerEntry,
    Stance,
    UnknownReason,
    Verdict,
)

__version__ = "0.1.0"

__all__ = [
    "ChainMismatch",
    "CheckerEvaluator",
    "CheckerMetrics",
    "Claim",
    "DatasetManifest",
    "DEFAULT_REGISTRY",
    "EvidenceItem",
    "FactLabError",
    "FactState",
    "GoldRecord",
    "Label",
    "LeaderboardEntry",
    "LedgerEntry",
    "LLMEvaluator",
    "LLMReport",
    "PipelineConfig",
    "QuestionRecord",
    "ResponseEvaluator",
    "ResponseReport",
    "SolverDescriptor",
    "SolverRegistry",
    "SolverResult",
    "SolverSpec",
    "Stage",
    "Stance",
    "Submitter",
    "UnknownReason",
    "Verdict",
    "aggregate_report",
    "compute_metrics",
    "domain_distribution",
    "evaluate_response",
    "ingest_responses",
    "ingest_verdicts",
    "load_factbench",
    "load_manifest",
    "load_pipeline_config",
    "load_pipeline_config_file",
    "rank_leaderboard",
    "register_solver",
    "run_pipeline",
    "validate_chain",
]
