"""Multi-label theme identification for transcribed conversations.

Two decision strategies share one feature space of unigrams and distance
bigrams: a global cosine similarity with relative and absolute thresholds,
and positional thematic densities read off a dialogue skeleton.
"""

from .corpus import Corpus, CorpusError, Dialogue, load_corpus, sample_dev_subsets, save_corpus
from .cosine import CosineParams, classify_cosine, cosine_scores, tune_cosine
from .density import (DensityParams, Skeleton, classify_density, classify_dialogue_density, compute_skeleton,
                      export_skeleton, thematic_density, tune_density)
from .features import FeatureId, FeatureSpace, SelectionError, extract_features, gini, idf, select_features
from .metrics import EvalReport, evaluate, reject_close_scores
from .syncorp import GenSpec, generate

__version__ = "0.1.0"
