"""Multi-source transfer for structured prediction.

Thin Python surface over the C++ core: corpus I/O, synthetic data,
supervised source training, chart-supervised target training, pool-weight
learning, and evaluation.
"""

from ._core import (
    ChartMethod,
    ConlluError,
    Corpus,
    EnsembleSpec,
    EvalReport,
    InferenceError,
    MetricsError,
    ModelError,
    ScoringModel,
    Sentence,
    Task,
    Token,
    TrainConfig,
    alphas_from_json,
    alphas_to_json,
    evaluate,
    last_epoch_losses,
    learn_alphas,
    model_from_json,
    model_to_json,
    mv_predict,
    parse_conllu,
    pool_kl,
    predict,
    synth_corpus,
    train_supervised,
    train_target,
    write_conllu,
)

__all__ = [
    "ChartMethod",
    "ConlluError",
    "Corpus",
    "EnsembleSpec",
    "EvalReport",
    "InferenceError",
    "MetricsError",
    "ModelError",
    "ScoringModel",
    "Sentence",
    "Task",
    "Token",
    "TrainConfig",
    "alphas_from_json",
    "alphas_to_json",
    "evaluate",
    "last_epoch_losses",
    "learn_alphas",
    "model_from_json",
    "model_to_json",
    "mv_predict",
    "parse_conllu",
    "pool_kl",
    "predict",
    "synth_corpus",
    "train_supervised",
    "train_target",
    "write_conllu",
]

__version__ = "0.1.0"
