"""perturblab: deterministic corpus perturbations and learning-curve analytics.

Two halves:

* a dataset pipeline that turns a tokenized corpus into nine variant corpora
  (the original, six systematic perturbations of word order or marker
  placement, and token-count-matched baselines for the marker variants), and
* curve analytics that compare validation-perplexity learning curves between
  each perturbation and its baseline (mean error, exact binomial test,
  across- vs within-language variance decomposition).

Everything is seeded and bit-exact: the same inputs and seed always produce
byte-identical outputs.
"""
from perturblab.corpus import (
    Corpus,
    PosAnnotation,
    Sentence,
    SplitSpec,
    Vocabulary,
    build_vocabulary,
    filter_unknown,
    parse_corpus,
    read_corpus,
    split,
    subset_tokens,
)
from perturblab.curves import (
    CurvePair,
    LearningCurve,
    PairResult,
    TypologyReport,
    auc,
    binomial_two_sided,
    direction_count,
    mean_error,
    metric_matrix,
    min_perplexity,
    pair_all,
    variance_report,
)
from perturblab.engine import (
    BASELINE_FOR,
    MarkerManifest,
    Variant,
    VariantSpec,
    apply_variant,
    build_manifest,
)
from perturblab.errors import ConfigError, ParseError, PerturbLabError, ValidationError

__version__ = "0.1.0"

__all__ = [
    "BASELINE_FOR",
    "ConfigError",
    "Corpus",
    "CurvePair",
    "LearningCurve",
    "MarkerManifest",
    "PairResult",
    "ParseError",
    "PerturbLabError",
    "PosAnnotation",
    "Sentence",
    "SplitSpec",
    "TypologyReport",
    "ValidationError",
    "Variant",
    "VariantSpec",
    "Vocabulary",
    "apply_variant",
    "auc",
    "binomial_two_sided",
    "build_manifest",
    "build_vocabulary",
    "direction_count",
    "filter_unknown",
    "mean_error",
    "metric_matrix",
    "min_perplexity",
    "pair_all",
    "parse_corpus",
    "read_corpus",
    "split",
    "subset_tokens",
    "variance_report",
    "__version__",
]
