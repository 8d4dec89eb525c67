"""Input validation helpers for array-facing entry points."""

from __future__ import annotations

import numpy as np


def check_time_series_array(X, min_samples: int = 16, name: str = "X") -> np.ndarray:
    """Coerce to a finite 2-D float array shaped (n_samples, n_channels)."""
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D (n_samples, n_channels), got shape {arr.shape}")
    if arr.shape[0] < min_samples:
        raise ValueError(f"{name} needs at least {min_samples} samples, got {arr.shape[0]}")
    if arr.shape[1] < 1:
        raise ValueError(f"{name} needs at least one channel")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_channel_names(names, n_channels: int) -> tuple[str, ...]:
    if names is None:
        return tuple(f"x{i}" for i in range(n_channels))
    out = tuple(str(c) for c in names)
    if len(out) != n_channels:
        raise ValueError(f"{len(out)} channel names for {n_channels} channels")
    if len(set(out)) != len(out):
        raise ValueError("channel names must be unique")
    return out
