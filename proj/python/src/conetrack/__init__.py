"""Cone-track driving simulator, expert and evaluation utilities."""

from ._core import (
    ConfigError,
    CorruptFile,
    Environment,
    Error,
    ExpertFailure,
    IoError,
    MalformedTrack,
    ShapeMismatch,
    Track,
    __version__,
    evaluate_expert,
    evaluate_model,
    feature_tracks,
    fsg_like_track,
    invert_track,
    load_track,
    oval_track,
    reward_fn1,
    reward_fn2,
    reward_fn3,
    save_track,
    smoothness,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
