"""Oriented and curved text line detection.

Thin wrapper over the native module: frequency-domain stroke filtering,
map clustering, skeleton analysis, feature extraction, model training and
the full detection pipeline.
"""

from ._otdet import (
    Skeleton,
    detect,
    detect_without_verification,
    evaluate,
    fourier_log,
    kmeans_2,
    load_image,
    md_map,
    md_window_length,
    morph_open,
    phog_sequence,
    save_image,
    score_sequence,
    skeletonize,
    train_models,
)

__all__ = [
    "Skeleton",
    "detect",
    "detect_without_verification",
    "evaluate",
    "fourier_log",
    "kmeans_2",
    "load_image",
    "md_map",
    "md_window_length",
    "morph_open",
    "phog_sequence",
    "save_image",
    "score_sequence",
    "skeletonize",
    "train_models",
]
