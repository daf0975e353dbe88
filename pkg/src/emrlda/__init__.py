"""LDA topic discovery over bag-of-codes patient records.

Pipeline: :func:`read_events` -> :func:`build_vocabulary` -> :func:`build_matrix`
-> :func:`run` (collapsed Gibbs) -> :func:`inter_topic_distances` /
:func:`tightness`.  The sweep kernel is compiled with Cython when available;
``emrlda.kernels.BACKEND`` says which one was loaded.
"""
from .corpus import (
    EventLog,
    EventRecord,
    PatientConditionsCorpus,
    Vocabulary,
    build_matrix,
    build_vocabulary,
    corpus_stats,
    ingest_events,
    read_events,
    write_events,
)
from .errors import ConfigError, DataError, InvariantError
from .evaluation import (
    DistanceMatrix,
    TightnessReport,
    distinctiveness_summary,
    inter_topic_distances,
    jsd,
    tightness,
)
from .kernels import BACKEND
from .sampler import (
    Hyperparameters,
    SamplerState,
    TopicModel,
    conditional_distribution,
    estimate_phi,
    estimate_theta,
    gibbs_sweep,
    init_state,
    log_likelihood,
    run,
)
from .synth import GroundTruth, TopicMatching, generate_corpus, make_ground_truth_topics, match_topics

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "build_matrix",
    "build_vocabulary",
    "conditional_distribution",
    "ConfigError",
    "corpus_stats",
    "DataError",
    "DistanceMatrix",
    "distinctiveness_summary",
    "estimate_phi",
    "estimate_theta",
    "EventLog",
    "EventRecord",
    "generate_corpus",
    "gibbs_sweep",
    "GroundTruth",
    "Hyperparameters",
    "ingest_events",
    "init_state",
    "inter_topic_distances",
    "InvariantError",
    "jsd",
    "log_likelihood",
    "make_ground_truth_topics",
    "match_topics",
    "PatientConditionsCorpus",
    "read_events",
    "run",
    "SamplerState",
    "tightness",
    "TightnessReport",
    "TopicMatching",
    "TopicModel",
    "Vocabulary",
    "write_events",
]
