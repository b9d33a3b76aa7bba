"""Human-in-the-loop active learning for disaster-related short texts.

Subpackages cover the full workflow: corpus ingestion and filtering,
keyword baselines, feature spaces, the trainable classifier, the six query
strategies, the AL session engine, the evaluation harness, and an HTTP
service plus CLI wrapping it all.
"""

from .corpus import Document, Label, LabelMapping, Pool
from .engine import RoundMetrics, SessionConfig, SessionState
from .evaluation import ConfusionMatrix, EvaluationReport
from .features import FeatureMatrix, Vocabulary
from .filtering import EditDistanceBudget, KeywordList
from .model import Hyperparams, LinearModel, Prediction
from .strategies import QueryBatch, QueryContext

__version__ = "0.1.0"

__all__ = [
    "Document",
    "Label",
    "LabelMapping",
    "Pool",
    "KeywordList",
    "EditDistanceBudget",
    "Vocabulary",
    "FeatureMatrix",
    "LinearModel",
    "Hyperparams",
    "Prediction",
    "QueryContext",
    "QueryBatch",
    "SessionConfig",
    "SessionState",
    "RoundMetrics",
    "ConfusionMatrix",
    "EvaluationReport",
    "__version__",
]
