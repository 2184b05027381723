"""Edge continual-learning quality pipeline (Python bindings)."""

from ._edgecl import (
    EdgeclError,
    Model,
    Registry,
    alarm_condition,
    canonicalize,
    default_manifest,
    metrics_from_counts,
    score_alarms,
    sha256_hex,
    simulate_labeled,
)

__all__ = [
    "EdgeclError",
    "Model",
    "Registry",
    "alarm_condition",
    "canonicalize",
    "default_manifest",
    "metrics_from_counts",
    "score_alarms",
    "sha256_hex",
    "simulate_labeled",
]
