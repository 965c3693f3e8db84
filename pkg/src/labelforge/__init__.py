"""labelforge: weak supervision from rule-based labeling functions.

Write labeling functions over text reports, aggregate their noisy votes
with an unsupervised generative model, and train a downstream classifier on
the resulting probabilistic labels.
"""

from .corpus import (
    Corpus,
    CorpusError,
    DevLabel,
    Document,
    Section,
    load_corpus,
    load_dev_labels,
    segment_sections,
    tokenize,
)
from .end_model import (
    DeLongResult,
    FeatureMatrix,
    LinearEndModel,
    TrainConfig,
    delong_components,
    delong_test,
    noise_aware_loss,
    roc_auc,
    roc_points,
    train_noise_aware,
    train_supervised,
)
from .lf_dsl import (
    EvalWarnings,
    LFDefinition,
    LFParseError,
    LFSet,
    apply_all,
    apply_lf,
    load_lf_file,
    parse_lf_file,
)
from .matrix import (
    IndependenceResult,
    LabelMatrix,
    LFStats,
    compute_stats,
    load_matrix,
    majority_vote,
    pairwise_independence_test,
    save_matrix,
)
from .model import (
    DependencyStructure,
    EdgeTable,
    FitConfig,
    GenerativeParams,
    emit_labels,
    fit,
    learn_structure,
    log_marginal_likelihood,
    predict_proba,
)
from .prob_labels import ProbLabels
from .synth import (
    PlantedEdge,
    SynthSpec,
    gen_features,
    gen_text_corpus,
    optimal_auc,
    sample_dataset,
)

__version__ = "0.1.0"

__all__ = [
    "Corpus",
    "CorpusError",
    "DevLabel",
    "Document",
    "Section",
    "load_corpus",
    "load_dev_labels",
    "segment_sections",
    "tokenize",
    "DeLongResult",
    "FeatureMatrix",
    "LinearEndModel",
    "TrainConfig",
    "delong_components",
    "delong_test",
    "noise_aware_loss",
    "roc_auc",
    "roc_points",
    "train_noise_aware",
    "train_supervised",
    "EvalWarnings",
    "LFDefinition",
    "LFParseError",
    "LFSet",
    "apply_all",
    "apply_lf",
    "load_lf_file",
    "parse_lf_file",
    "IndependenceResult",
    "LabelMatrix",
    "LFStats",
    "compute_stats",
    "load_matrix",
    "majority_vote",
    "pairwise_independence_test",
    "save_matrix",
    "DependencyStructure",
    "EdgeTable",
    "FitConfig",
    "GenerativeParams",
    "emit_labels",
    "fit",
    "learn_structure",
    "log_marginal_likelihood",
    "predict_proba",
    "ProbLabels",
    "PlantedEdge",
    "SynthSpec",
    "gen_features",
    "gen_text_corpus",
    "optimal_auc",
    "sample_dataset",
]
