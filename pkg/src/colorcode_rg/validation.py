"""Input validation helpers shared by the library and the estimator facade."""

from __future__ import annotations

import numpy as np


def check_probability(p, name="p", lo=0.0, hi=1.0):
    """Validate a scalar probability and return it as a float."""
    p = float(p)
    if not np.isfinite(p) or p < lo or p > hi:
        raise ValueError(f"{name} must lie in [{lo}, {hi}], got {p}")
    return p


def check_frame(frame, n_qubits, name="frame"):
    """Coerce a bit vector over the qubits to a uint8 array of 0/1."""
    arr = np.asarray(frame)
    if arr.shape != (n_qubits,):
        raise ValueError(f"{name} must have shape ({n_qubits},), got {arr.shape}")
    arr = arr.astype(np.uint8)
    if arr.max(initial=0) > 1:
        raise ValueError(f"{name} must be binary")
    return arr


def check_syndrome(syndrome, n_stabilizers, name="syndrome"):
    """Coerce a per-stabilizer parity vector to a uint8 array of 0/1."""
    arr = np.asarray(syndrome)
    if arr.shape != (n_stabilizers,):
        raise ValueError(
            f"{name} must have shape ({n_stabilizers},), got {arr.shape}"
        )
    arr = arr.astype(np.uint8)
    if arr.max(initial=0) > 1:
        raise ValueError(f"{name} must be binary")
    return arr


def check_syndrome_matrix(S, n_stabilizers):
    """Validate a batch of syndromes with shape (n_samples, n_stabilizers)."""
    arr = np.asarray(S)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != n_stabilizers:
        raise ValueError(
            f"expected syndrome batch of shape (n_samples, {n_stabilizers}), "
            f"got {arr.shape}"
        )
    arr = arr.astype(np.uint8)
    if arr.size and arr.max() > 1:
        raise ValueError("syndromes must be binary")
    return arr
