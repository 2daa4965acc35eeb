"""Low-confidence instruction selection.

Thin wrapper over the compiled ``_core`` extension; see ``run_pipeline`` for
the one-call entry point and the individual stage functions for finer control.
"""

from ._core import (  # noqa: F401
    ClusterModel,
    ConfigError,
    CoreSet,
    DataError,
    Dataset,
    LcgError,
    MlpModel,
    NbModel,
    NumericError,
    build_histogram,
    compute_centroids,
    config_keys,
    gelu,
    hashing_embed,
    histogram_bin,
    kmeans,
    l2_normalize,
    load_dataset,
    load_embeddings,
    load_mlp,
    run_pipeline,
    score_mlp,
    score_nb,
    select_coreset,
    select_gold,
    softmax,
    train_mlp,
    train_nb,
    write_embeddings,
    write_subset,
)

__version__ = "0.1.0"
