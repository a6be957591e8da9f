from qfsc.backends.base import (
    Answerer,
    BackendError,
    Backends,
    BackendTimeout,
    ContextTooLongError,
    EntityTagger,
    Generator,
    HTTPStatusError,
    MalformedResponseError,
    QuestionMaker,
    SimilarityScorer,
    TransportError,
)
from qfsc.backends.mock import mock_eval_backends, mock_pipeline_backends

__all__ = [
    "Answerer",
    "BackendError",
    "BackendTimeout",
    "Backends",
    "ContextTooLongError",
    "EntityTagger",
    "Generator",
    "HTTPStatusError",
    "MalformedResponseError",
    "QuestionMaker",
    "SimilarityScorer",
    "TransportError",
    "mock_eval_backends",
    "mock_pipeline_backends",
]
