"""Joint user/item embeddings for implicit-feedback recommendation.

The package covers the full workflow: ingest delimited interaction logs
into validated snapshots, fit user and item embeddings with a shared
skip-gram-style objective driven by negative sampling and frequency
subsampling, rank unseen items with five scoring strategies, and
evaluate, tune, sweep, and benchmark through a library API or the
``coembed`` command-line tool.
"""

__version__ = "0.1.0"

from .data import (
    ColumnSpec,
    InteractionDataset,
    InteractionRecord,
    PreprocessRules,
    RawInteractions,
    SplitDataset,
    dataset_stats,
    ingest_interactions,
    load_snapshot,
    preprocess,
    save_snapshot,
    split_dataset,
)
from .errors import (
    CoembedError,
    ConfigError,
    DataError,
    DatasetExhaustedError,
    NumericError,
)
from .evaluate import (
    EvalCache,
    EvalReport,
    GridSearchResult,
    GridSpec,
    ScalingReport,
    SweepResult,
    benchmark_scaling,
    evaluate,
    grid_search,
    ndcg,
    precision_recall_f1,
    sensitivity_sweep,
)
from .model import (
    AdamState,
    EmbeddingModel,
    TrainConfig,
    batch_loss,
    export_embeddings,
    export_embeddings_text,
    import_embeddings,
    init_model,
    pair_loss_and_gradients,
    score_pair,
    train,
    train_pair,
)
from .recommend import (
    Ranking,
    StrategyConfig,
    combine_embeddings,
    cosine,
    ensemble_rank,
    recommend_for_user,
    similarity_table,
    strategy_scores,
    top_n,
)
from .sampling import (
    NegativeSampler,
    SubsamplerConfig,
    apply_subsampling,
    build_negative_sampler,
    draw_negatives,
    keep_probabilities,
    keep_probability,
)

__all__ = [
    "__version__",
    "AdamState",
    "CoembedError",
    "ColumnSpec",
    "ConfigError",
    "DataError",
    "DatasetExhaustedError",
    "EmbeddingModel",
    "EvalCache",
    "EvalReport",
    "GridSearchResult",
    "GridSpec",
    "InteractionDataset",
    "InteractionRecord",
    "NegativeSampler",
    "NumericError",
    "PreprocessRules",
    "Ranking",
    "RawInteractions",
    "ScalingReport",
    "SplitDataset",
    "StrategyConfig",
    "SubsamplerConfig",
    "SweepResult",
    "TrainConfig",
    "apply_subsampling",
    "batch_loss",
    "benchmark_scaling",
    "build_negative_sampler",
    "combine_embeddings",
    "cosine",
    "dataset_stats",
    "draw_negatives",
    "ensemble_rank",
    "evaluate",
    "export_embeddings",
    "export_embeddings_text",
    "grid_search",
    "import_embeddings",
    "ingest_interactions",
    "init_model",
    "keep_probabilities",
    "keep_probability",
    "load_snapshot",
    "ndcg",
    "pair_loss_and_gradients",
    "precision_recall_f1",
    "preprocess",
    "recommend_for_user",
    "save_snapshot",
    "score_pair",
    "sensitivity_sweep",
    "similarity_table",
    "split_dataset",
    "strategy_scores",
    "top_n",
    "train",
    "train_pair",
]
