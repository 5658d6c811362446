"""Claim presence detection, stance classification and veracity labelling."""

from ._core import (
    AnnotationService,
    ConflictError,
    Corpus,
    DataError,
    Error,
    NotFoundError,
    ValidationError,
    aggregate,
    bm25_idf,
    bm25_scores,
    combine,
    cosine,
    cross_validate,
    ngrams,
    prf1,
    roc_points,
    smoothed_idf,
    tokenize,
    train_stance,
)

__all__ = [
    "AnnotationService",
    "ConflictError",
    "Corpus",
    "DataError",
    "Error",
    "NotFoundError",
    "ValidationError",
    "aggregate",
    "bm25_idf",
    "bm25_scores",
    "combine",
    "cosine",
    "cross_validate",
    "ngrams",
    "prf1",
    "roc_points",
    "smoothed_idf",
    "tokenize",
    "train_stance",
]
