"""Identify influential references from full text, and rank papers and
authors by citation counts weighted by in-text mention multiplicity."""

from .corpus import AnnotatedPaper, CorpusError, load_corpus, parse_record
from .features import FEATURE_NAMES, FeatureTable, extract_features
from .model import LogisticModel, TrainConfig, cross_validate, train
from .network import CitationNetwork, DegenerateCorrelation, FilterSpec, cip, h_index, hip_index

__version__ = "0.1.0"

__all__ = [
    "AnnotatedPaper", "CorpusError", "load_corpus", "parse_record",
    "FEATURE_NAMES", "FeatureTable", "extract_features",
    "LogisticModel", "TrainConfig", "cross_validate", "train",
    "CitationNetwork", "DegenerateCorrelation", "FilterSpec", "cip", "h_index", "hip_index",
]
