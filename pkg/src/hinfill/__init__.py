"""hinfill: meta-path generation for heterogeneous information networks via
text infilling, plus metapath-guided embeddings and evaluation heads."""

from .graph import Hin, LoadError, MetaPath, Schema, derive_schema, load_hin, path_matches, tokenize
from .verbalize import MaskedTemplate, build_infill_template, verbalize_context, verbalize_edge
from .lm import (
    BackendError,
    BuiltinLm,
    Fill,
    ScorerBackend,
    TransportError,
    build_lm_corpus,
    embed,
    fill_candidates,
    score,
    train_builtin_lm,
)
from .remote import RemoteScorer
from .classifier import ClassifierParams, classifier_features, classify, predict_type, train_classifier
from .sampler import DeadEndError, SamplerConfig, TaskData, TypedPath, run_sampling, sample_pair, sample_path
from .induction import RankedMetaPaths, induce, metapath_counts, path_to_metapath
from .embedding import EmbeddingTable, cycled_metapath, metapath_walks, metapath_walks_detailed, train_skipgram
from .tasks import (
    EvalReport,
    LinkPredictionData,
    NodeClassificationData,
    build_link_prediction_data,
    build_node_classification_data,
    edge_score,
    eval_link_prediction,
    eval_node_classification,
    hypothesis_study,
    train_nc_head,
    zero_shot_pairs,
)

__version__ = "0.1.0"
