"""The 18-qubit square cell: lookup table, local decode and rescaling.

Bit packing conventions used throughout (fixed by the canonical cell layout
in :mod:`.lattice`):

* half-stabilizer bits: slot ``2k`` is the red half of side k, slot ``2k+1``
  the octagon half, sides ordered [p=0, p=3, q=0, q=3]; a full 8-bit
  splitting assignment is ``sigma = sum(slot_j << j)``.  Equivalently
  ``sigma = sum(state_k << 2k)`` with per-side state
  ``state = 2 * oct_bit + red_bit``, which matches the row-major flattening
  of the 2x2 pair tables ``[oct][red]``.
* bulk bits: ``sum(bulk_j << j)`` over the four bulk stabilizers.
* table index: ``sigma + (bulk_bits << 8)``, 4096 local syndromes total.
* class members: index ``j = (2*l0 + l1) * 16 + bulk_combo`` where l0/l1
  apply the two in-cell effective logical operators.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .bp import EPS, normalize_pair_tables, pair_config_probability
from .lattice import (
    M_BULK,
    M_CORNER,
    M_HALF,
    CellMap,
    Lattice,
)

TABLE_VERSION = 1

_POW18 = (1 << np.arange(17, -1, -1)).astype(np.int64)  # bit 0 most significant


def frame_rank_key(frames: np.ndarray) -> np.ndarray:
    """Deterministic tie-break key: weight first, then lexicographic bits."""
    frames = np.asarray(frames, dtype=np.int64)
    weight = frames.sum(axis=-1)
    lex = frames @ _POW18[-frames.shape[-1]:]
    return weight * (1 << frames.shape[-1]) + lex


@dataclass
class CellTable:
    """Precomputed decoding data for the canonical square cell."""

    rep: np.ndarray            # (4096, 18) minimum-weight class representative
    logical_0: np.ndarray      # (18,) flips corners (0,0), (3,0), (0,3)
    logical_1: np.ndarray      # (18,) flips corners (3,3), (3,0), (0,3)
    bulk_supports: np.ndarray  # (4, 18)
    span64: np.ndarray         # (64, 18) logical/bulk products, sector-major
    delta: np.ndarray          # (256, 18) neighbor-half product per splitting diff
    half_supports: np.ndarray  # (8, 18)
    corner_matrix: np.ndarray  # (4, 18)
    geometry_hash: str = ""
    version: int = TABLE_VERSION

    def syndrome_index(self, sigma_bits, bulk_bits):
        return np.asarray(sigma_bits, dtype=np.int64) + (
            np.asarray(bulk_bits, dtype=np.int64) << 8
        )

    def class_members(self, sigma_bits: int, bulk_bits: int) -> np.ndarray:
        """All 64 frames compatible with the 12-bit local syndrome."""
        rep = self.rep[self.syndrome_index(sigma_bits, bulk_bits)]
        return rep[None, :] ^ self.span64


def geometry_hash() -> str:
    h = hashlib.sha256()
    h.update(bytes([TABLE_VERSION]))
    for M in (M_HALF, M_BULK, M_CORNER):
        h.update(M.tobytes())
    return h.hexdigest()[:16]


def build_cell_table() -> CellTable:
    """Exhaustive construction over all 2^18 in-cell frames.

    Every one of the 4096 local syndromes must own exactly 64 frames; any
    other count means the cell geometry is broken.
    """
    n_frames = 1 << 18
    frames = ((np.arange(n_frames, dtype=np.int64)[:, None] >> np.arange(18)) & 1).astype(
        np.uint8
    )
    M12 = np.vstack([M_HALF, M_BULK]).astype(np.int64)
    syn = (frames.astype(np.int64) @ M12.T) & 1
    idx = syn @ (1 << np.arange(12, dtype=np.int64))

    key = frame_rank_key(frames)
    order = np.lexsort((key, idx))
    idx_sorted = idx[order]
    first = np.ones(n_frames, dtype=bool)
    first[1:] = idx_sorted[1:] != idx_sorted[:-1]
    starts = np.flatnonzero(first)
    if starts.size != 4096:
        raise RuntimeError(f"expected 4096 local syndrome classes, got {starts.size}")
    counts = np.diff(np.append(starts, n_frames))
    if not (counts == 64).all():
        raise RuntimeError("local syndrome classes must contain exactly 64 frames")
    rep = np.zeros((4096, 18), dtype=np.uint8)
    rep[idx_sorted[starts]] = frames[order[starts]]

    # effective logical operators from the trivial-syndrome class
    cls0 = frames[idx == 0]
    patterns = (cls0.astype(np.int64) @ M_CORNER.T.astype(np.int64)) & 1
    logical_0 = _min_key_member(cls0, patterns, (1, 1, 1, 0))
    logical_1 = _min_key_member(cls0, patterns, (0, 1, 1, 1))

    span64 = np.zeros((64, 18), dtype=np.uint8)
    for j in range(64):
        sector, bulk_combo = divmod(j, 16)
        l0, l1 = sector >> 1, sector & 1
        f = np.zeros(18, dtype=np.uint8)
        if l0:
            f ^= logical_0
        if l1:
            f ^= logical_1
        for bbit in range(4):
            if (bulk_combo >> bbit) & 1:
                f ^= M_BULK[bbit]
        span64[j] = f

    delta = np.zeros((256, 18), dtype=np.uint8)
    for diff in range(256):
        f = np.zeros(18, dtype=np.uint8)
        for slot in range(8):
            if (diff >> slot) & 1:
                f ^= M_HALF[slot ^ 1]  # the other half of the same side
        delta[diff] = f

    return CellTable(
        rep=rep,
        logical_0=logical_0,
        logical_1=logical_1,
        bulk_supports=M_BULK.copy(),
        span64=span64,
        delta=delta,
        half_supports=M_HALF.copy(),
        corner_matrix=M_CORNER.copy(),
        geometry_hash=geometry_hash(),
    )


def _min_key_member(frames, patterns, corner_pattern):
    sel = (patterns == np.array(corner_pattern)).all(axis=1)
    if not sel.any():
        raise RuntimeError(f"no trivial-syndrome frame with corner pattern {corner_pattern}")
    cand = frames[sel]
    return cand[np.argmin(frame_rank_key(cand))].copy()


def save_cell_table(table: CellTable, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp.npz")
    np.savez_compressed(
        tmp,
        rep=table.rep,
        logical_0=table.logical_0,
        logical_1=table.logical_1,
        bulk_supports=table.bulk_supports,
        span64=table.span64,
        delta=table.delta,
        half_supports=table.half_supports,
        corner_matrix=table.corner_matrix,
        geometry_hash=np.array(table.geometry_hash),
        version=np.array(table.version),
    )
    os.replace(tmp, path)


def load_cell_table(path) -> CellTable:
    with np.load(path, allow_pickle=False) as data:
        if int(data["version"]) != TABLE_VERSION:
            raise ValueError("cell table cache version mismatch")
        if str(data["geometry_hash"]) != geometry_hash():
            raise ValueError("cell table cache was built for different geometry")
        return CellTable(
            rep=data["rep"],
            logical_0=data["logical_0"],
            logical_1=data["logical_1"],
            bulk_supports=data["bulk_supports"],
            span64=data["span64"],
            delta=data["delta"],
            half_supports=data["half_supports"],
            corner_matrix=data["corner_matrix"],
            geometry_hash=str(data["geometry_hash"]),
            version=int(data["version"]),
        )


@lru_cache(maxsize=1)
def get_cell_table() -> CellTable:
    """Process-wide cell table; uses the on-disk cache when configured."""
    cache_dir = os.environ.get("COLORCODE_RG_CACHE")
    if cache_dir:
        path = Path(cache_dir) / f"cell_table_{geometry_hash()}.npz"
        if path.exists():
            try:
                return load_cell_table(path)
            except ValueError:
                pass
        table = build_cell_table()
        save_cell_table(table, path)
        return table
    return build_cell_table()


# ---------------------------------------------------------------------------
# local decoding

def decode_cells(table: CellTable, sigma_bits, bulk_bits, tables9):
    """Most probable class member for every cell, batched.

    ``tables9``: (n_cells, 9, 2, 2) pair tables in cell-local pair order.
    Returns (corrections (n_cells, 18), corner_flips (n_cells, 4)).
    Corner parities are not part of the class syndrome; the flips induced by
    the chosen correction are returned for syndrome rescaling.
    """
    sigma_bits = np.asarray(sigma_bits, dtype=np.int64)
    bulk_bits = np.asarray(bulk_bits, dtype=np.int64)
    reps = table.rep[table.syndrome_index(sigma_bits, bulk_bits)]
    members = reps[:, None, :] ^ table.span64[None, :, :]  # (n_cells, 64, 18)
    probs = pair_config_probability(
        np.asarray(tables9)[:, None, :, :, :], members
    )  # (n_cells, 64)
    best = _argmax_with_tiebreak(probs, members)
    corrections = members[np.arange(members.shape[0]), best]
    corner_flips = (corrections.astype(np.int64) @ M_CORNER.T.astype(np.int64)) & 1
    return corrections.astype(np.uint8), corner_flips.astype(np.uint8)


def _argmax_with_tiebreak(probs: np.ndarray, members: np.ndarray) -> np.ndarray:
    """Index of the max-probability member, ties to lowest (weight, lex).

    Near-ties within float association noise count as ties so that the
    choice matches exhaustive oracles that multiply in a different order.
    """
    maxp = probs.max(axis=1, keepdims=True)
    key = frame_rank_key(members)
    big = np.int64(1) << 40
    key = np.where(probs >= maxp * (1.0 - 1e-12), key, big)
    return key.argmin(axis=1)


def cell_decode(table: CellTable, split_choice, bulk_syndrome, tables9):
    """Single-cell convenience wrapper around :func:`decode_cells`."""
    sigma = _bits_to_int(split_choice, 8)
    bulk = _bits_to_int(bulk_syndrome, 4)
    corr, flips = decode_cells(
        table, np.array([sigma]), np.array([bulk]), np.asarray(tables9)[None]
    )
    return corr[0], flips[0]


def _bits_to_int(bits, width) -> int:
    if np.isscalar(bits):
        return int(bits)
    bits = np.asarray(bits, dtype=np.int64)
    if bits.shape != (width,):
        raise ValueError(f"expected {width} bits")
    return int(bits @ (1 << np.arange(width)))


def delta_for_splitting(table: CellTable, sigma_0, sigma_k) -> np.ndarray:
    """Product of neighbor half stabilizers turning the correction for
    ``sigma_0`` into a valid correction for ``sigma_k``."""
    s0 = _bits_to_int(sigma_0, 8)
    sk = _bits_to_int(sigma_k, 8)
    return table.delta[s0 ^ sk].copy()


# ---------------------------------------------------------------------------
# rescaling

def rescale_cells(
    table: CellTable,
    corrections: np.ndarray,
    sigma_bits: np.ndarray,
    side_states: np.ndarray,
    tables9: np.ndarray,
    cutoff: float = 1e-6,
):
    """Joint error tables of the two effective qubits of every cell.

    ``side_states``: (n_cells, 4, 4) probability of each per-side splitting
    state under the converged pair tables, oriented to this cell's halves.
    Splitting configurations are weighted by the product of the four side
    tables; configurations below ``cutoff`` are dropped and the weights
    renormalized.  For each kept configuration the correction is shifted by
    the neighbor-half product and the four logical-sector probabilities are
    accumulated with the bulk-stabilizer sums in numerator and denominator.
    """
    n_cells = corrections.shape[0]
    # flat index == sigma: side 3's state in the two highest bit pairs
    w = (
        side_states[:, 3, :, None, None, None]
        * side_states[:, 2, None, :, None, None]
        * side_states[:, 1, None, None, :, None]
        * side_states[:, 0, None, None, None, :]
    ).reshape(n_cells, 256)

    keep = w >= cutoff
    cell_ids, sigma_k = np.nonzero(keep)
    w_kept = w[cell_ids, sigma_k]
    # renormalize weights per cell over the kept set
    norm = np.zeros(n_cells)
    np.add.at(norm, cell_ids, w_kept)
    w_kept = w_kept / norm[cell_ids]

    diff = np.asarray(sigma_bits, dtype=np.int64)[cell_ids] ^ sigma_k
    frames = (
        corrections[cell_ids][:, None, :]
        ^ table.delta[diff][:, None, :]
        ^ table.span64[None, :, :]
    )  # (n_kept, 64, 18)
    probs = pair_config_probability(
        np.asarray(tables9)[cell_ids][:, None, :, :, :], frames
    ).reshape(-1, 4, 16)
    nums = probs.sum(axis=2)  # (n_kept, 4) sector sums
    denom = nums.sum(axis=1)
    if not (denom > 0.0).all():
        raise FloatingPointError("zero rescaling normalizer; clamping failed")
    contrib = w_kept[:, None] * nums / denom[:, None]
    out = np.zeros((n_cells, 4))
    np.add.at(out, cell_ids, contrib)
    return normalize_pair_tables(out.reshape(n_cells, 2, 2), EPS)


def rescale_cell(table, correction, sigma_bits, side_states, tables9, cutoff=1e-6):
    """Single-cell wrapper around :func:`rescale_cells`."""
    return rescale_cells(
        table,
        np.asarray(correction)[None],
        np.asarray([_bits_to_int(sigma_bits, 8)]),
        np.asarray(side_states)[None],
        np.asarray(tables9)[None],
        cutoff,
    )[0]


def rescale_syndrome(lattice: Lattice, cellmap: CellMap, syndrome, corner_flips):
    """Coarse syndrome: measured corner parities xor correction-induced flips."""
    syndrome = np.asarray(syndrome, dtype=np.uint8)
    coarse_syn = syndrome[cellmap.coarse_to_fine_stab].copy()
    np.bitwise_xor.at(
        coarse_syn,
        cellmap.corner_to_coarse.ravel(),
        np.asarray(corner_flips, dtype=np.uint8).ravel(),
    )
    return coarse_syn


def apply_cell_corrections(lattice: Lattice, corrections: np.ndarray) -> np.ndarray:
    """Scatter per-cell 18-bit corrections onto the full qubit register."""
    frame = np.zeros(lattice.n_qubits, dtype=np.uint8)
    frame[lattice.cell_qubits.ravel()] = np.asarray(corrections, dtype=np.uint8).ravel()
    return frame


def lift_correction(cellmap: CellMap, fine: Lattice, coarse_frame) -> np.ndarray:
    """Map effective-qubit flips to the stored in-cell logical supports."""
    coarse_frame = np.asarray(coarse_frame, dtype=np.uint8)
    lifted = np.zeros(fine.n_qubits, dtype=np.uint8)
    eff = cellmap.effective_qubits
    for pos, supports in ((0, cellmap.logical_support_0), (1, cellmap.logical_support_1)):
        cells = np.flatnonzero(coarse_frame[eff[:, pos]])
        if cells.size:
            np.bitwise_xor.at(lifted, supports[cells].ravel(), np.uint8(1))
    return lifted


def backpropagate(lattices, cellmaps, corrections) -> np.ndarray:
    """Fold per-level corrections back up to the original lattice.

    ``lattices[i]`` is the level-i lattice, ``cellmaps[i]`` (i >= 1) its cell
    map, ``corrections[i]`` the correction found at level i (i = 0 is the
    brute-force base correction).  Returns the full frame on the top lattice.
    """
    frame = np.asarray(corrections[0], dtype=np.uint8)
    for i in range(1, len(lattices)):
        frame = np.asarray(corrections[i], dtype=np.uint8) ^ lift_correction(
            cellmaps[i], lattices[i], frame
        )
    return frame
