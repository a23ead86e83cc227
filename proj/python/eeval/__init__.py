"""Evaluation toolkit for early-exit classifiers on precomputed logits."""

from ._eeval import (  # noqa: F401
    Dataset,
    EevalError,
    __version__,
    auroc,
    confidence_table,
    correctness,
    derive_thresholds,
    ece,
    eef1,
    eefp_labels,
    eefp_scores,
    exit_shares,
    fit_temperatures,
    generate,
    load_dataset,
    make_q_grid,
    nll,
    rank_preserving_transform,
    save_dataset,
    simulate,
    softmax,
)
