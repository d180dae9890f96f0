"""Bit-flip error sampling, syndrome extraction and Pauli-frame utilities.

Only X errors are tracked: the code is CSS and self-dual, so phase-flip
decoding is the identical problem on the conjugate stabilizers.

Randomness uses the counter-based Philox generator keyed by a 64-bit seed;
per-trial streams derive from ``(seed, point_index, trial_index)`` via numpy
SeedSequence spawn keys so trials are reproducible under any parallel
schedule.
"""

from __future__ import annotations

import numpy as np

from .lattice import Lattice
from .validation import check_frame, check_probability


def trial_rng(seed: int, point_index: int = 0, trial_index: int = 0) -> np.random.Generator:
    """Independent, reproducible stream for one Monte Carlo trial."""
    ss = np.random.SeedSequence(entropy=int(seed) & 0xFFFFFFFFFFFFFFFF,
                                spawn_key=(int(point_index), int(trial_index)))
    return np.random.Generator(np.random.Philox(key=ss.generate_state(2, np.uint64)))


def sample_error(lattice: Lattice, p: float, rng_seed) -> np.ndarray:
    """i.i.d. X errors: each qubit flips independently with probability p.

    ``rng_seed`` may be an integer seed or a prepared ``np.random.Generator``.
    """
    p = check_probability(p)
    if isinstance(rng_seed, np.random.Generator):
        rng = rng_seed
    else:
        rng = trial_rng(int(rng_seed))
    return (rng.random(lattice.n_qubits) < p).astype(np.uint8)


def syndrome_of(lattice: Lattice, frame) -> np.ndarray:
    """Parity of the frame on every stabilizer support (0 even, 1 odd)."""
    return lattice.syndrome_of(frame)


def xor_frames(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=np.uint8)
    b = np.asarray(b, dtype=np.uint8)
    return a ^ b


def frame_weight(frame) -> int:
    return int(np.asarray(frame).sum())


def check_consistency(lattice: Lattice, syndrome) -> None:
    """Raise if the color-class redundancy of the torus is violated.

    Every qubit sits in exactly one stabilizer of each color, so the parity
    sums of the three color classes must agree pairwise for any physical
    error.
    """
    if not lattice.syndrome_consistent(syndrome):
        sums = lattice.color_class_sums(syndrome)
        raise ValueError(f"inconsistent syndrome: color-class parity sums {sums}")


def single_qubit_frame(lattice: Lattice, qubit: int) -> np.ndarray:
    frame = np.zeros(lattice.n_qubits, dtype=np.uint8)
    frame[qubit] = 1
    return frame


def stabilizer_frame(lattice: Lattice, stab: int) -> np.ndarray:
    """The support of one stabilizer as an error frame."""
    frame = np.zeros(lattice.n_qubits, dtype=np.uint8)
    qs = lattice.stab_qubits[stab]
    frame[qs[qs >= 0]] = 1
    return frame


def frame_from_support(lattice: Lattice, support) -> np.ndarray:
    frame = np.zeros(lattice.n_qubits, dtype=np.uint8)
    frame[np.asarray(support, dtype=np.int64)] = 1
    return check_frame(frame, lattice.n_qubits)
