"""Assignment of half-stabilizer parities on cell boundaries.

Adjacent cells share two stabilizers (one octagon, one red square), so
splitting choices are tracked as joint 2x2 tables per boundary pair, indexed
``[s0][s1]`` over the *left* cell's parities with s0 the octagon bit and s1
the red bit.  The right cell's parities follow from the measured values:
``s_i^r = s_i^l xor v_i``.

Rounds are synchronous: every pair update reads the previous round's tables
of all other pairs, so permuting the update order cannot change the result.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bp import pair_config_probability
from .cell import CellTable
from .lattice import M_HALF, Lattice

#: local qubit indices of each half-stabilizer slot (slot 2k red, 2k+1 oct)
HALF_LOCAL_QUBITS = tuple(tuple(np.flatnonzero(M_HALF[j]).tolist()) for j in range(8))


@dataclass
class SplitState:
    """Joint splitting tables for every boundary pair of one lattice level."""

    tables: np.ndarray        # (n_pairs, 2, 2) over left-cell (oct, red) bits
    v: np.ndarray             # (n_pairs, 2) measured parities (oct, red)
    chosen: np.ndarray        # (n_pairs,) flat argmax state 2*s0 + s1
    change_counts: list = field(default_factory=list)
    converged_round: int = 0
    rounds_run: int = 0


def config_probability(tables9, frame) -> float:
    """Probability of one in-cell error configuration under the cell's nine
    pair-joint tables (18 bits, pair-major qubit order)."""
    return float(pair_config_probability(np.asarray(tables9), np.asarray(frame)))


def class_probability(table: CellTable, sigma_bits, bulk_bits, tables9,
                      mode: str = "single") -> float:
    """Probability of the error class with the given 12-bit local syndrome.

    ``full`` sums the configuration probability over all 64 class members;
    ``single`` keeps only the look-up table representative.
    """
    sigma_bits = int(sigma_bits)
    bulk_bits = int(bulk_bits)
    if not (0 <= sigma_bits < 256 and 0 <= bulk_bits < 16):
        raise ValueError("unreachable local syndrome")
    if mode == "single":
        rep = table.rep[table.syndrome_index(sigma_bits, bulk_bits)]
        return config_probability(tables9, rep)
    if mode == "full":
        members = table.class_members(sigma_bits, bulk_bits)
        return float(pair_config_probability(
            np.asarray(tables9)[None, :, :, :], members).sum())
    raise ValueError(f"unknown mode {mode!r}")


def _all_sigma_probabilities(table, bulk_bits, tables9_cells, mode):
    """(n_cells, 256) class probabilities for every splitting assignment.

    Beliefs are frozen during the splitting iteration, so this is computed
    once per level and reused by every update round.
    """
    bulk_bits = np.asarray(bulk_bits, dtype=np.int64)
    n_cells = bulk_bits.shape[0]
    base = bulk_bits << 8
    reps = table.rep[base[:, None] + np.arange(256)[None, :]]  # (n_cells,256,18)
    if mode == "single":
        return pair_config_probability(tables9_cells[:, None, :, :, :], reps)
    out = np.zeros((n_cells, 256))
    # chunk the 64-member sums to bound the workspace
    for lo in range(0, 256, 32):
        part = reps[:, lo:lo + 32, None, :] ^ table.span64[None, None, :, :]
        probs = pair_config_probability(
            tables9_cells[:, None, None, :, :, :], part)
        out[:, lo:lo + 32] = probs.sum(axis=2)
    return out


def split_conditional(table, tables9, bulk_bits, side, other_states,
                      mode="single") -> np.ndarray:
    """2x2 table of one pair's cell-side parities with the other three side
    assignments fixed.  ``other_states``: the three fixed per-side states in
    side order (skipping ``side``)."""
    states = [0, 0, 0, 0]
    others = [k for k in range(4) if k != side]
    for k, s in zip(others, other_states):
        states[k] = int(s)
    probs = np.empty(4)
    for x in range(4):
        states[side] = x
        sigma = sum(states[k] << (2 * k) for k in range(4))
        probs[x] = class_probability(table, sigma, int(bulk_bits), tables9, mode)
    total = probs.sum()
    if total <= 0.0:
        raise FloatingPointError("all four class probabilities vanished")
    return (probs / total).reshape(2, 2)


def split_cell_estimate(table, tables9, bulk_bits, side, other_side_states,
                        mode="single") -> np.ndarray:
    """Conditional of one pair marginalized over the other three pairs'
    current state distributions (each a length-4 probability vector)."""
    others = [k for k in range(4) if k != side]
    est = np.zeros(4)
    for s0 in range(4):
        for s1 in range(4):
            for s2 in range(4):
                w = (other_side_states[0][s0] * other_side_states[1][s1]
                     * other_side_states[2][s2])
                if w == 0.0:
                    continue
                cond = split_conditional(
                    table, tables9, bulk_bits, side, (s0, s1, s2), mode)
                est += w * cond.reshape(4)
    return (est / est.sum()).reshape(2, 2)


def split_pair_update(left_estimate, right_estimate, v0, v1) -> np.ndarray:
    """Combine both cells' estimates under s_i^l xor s_i^r = v_i."""
    L = np.asarray(left_estimate, dtype=float)
    R = np.asarray(right_estimate, dtype=float)
    shifted = _xor_shift(R, int(v0), int(v1))
    out = L * shifted
    total = out.sum()
    if total <= 0.0:
        raise FloatingPointError("zero normalizer in splitting update")
    return out / total


def _xor_shift(T, v0, v1):
    """T'[x0, x1] = T[x0 ^ v0, x1 ^ v1]."""
    out = T
    if v0:
        out = out[::-1, :]
    if v1:
        out = out[:, ::-1]
    return out


def _cellside_states(lattice, tables, v):
    """(n_cells, 4, 4) per-side state distributions oriented to each cell."""
    pid = lattice.cell_side_pairs                       # (n_cells, 4)
    t = tables[pid]                                     # (n_cells, 4, 2, 2)
    flip = ~lattice.cell_side_is_left                   # right cells see xor v
    vv = v[pid]                                         # (n_cells, 4, 2)
    f0 = flip & (vv[:, :, 0] == 1)
    f1 = flip & (vv[:, :, 1] == 1)
    t = np.where(f0[:, :, None, None], t[:, :, ::-1, :], t)
    t = np.where(f1[:, :, None, None], t[:, :, :, ::-1], t)
    return t.reshape(t.shape[0], 4, 4)


def initial_split_tables(lattice: Lattice, syndrome, posteriors) -> np.ndarray:
    """Step-zero joint tables from the qubit probabilities of each half.

    The two stabilizers of a pair are treated independently; each marginal
    weighs the left half's parity probability against the right half's,
    tied through the measured stabilizer value.
    """
    syndrome = np.asarray(syndrome, dtype=np.uint8)
    post = np.asarray(posteriors, dtype=float)
    n_pairs = lattice.n_pairs
    marg = np.empty((n_pairs, 2, 2))  # (pair, which stab, parity bit)
    for stab_idx, slot_off in ((0, 1), (1, 0)):  # 0: octagon slot, 1: red slot
        for cell_role, cells, sides in (
            ("left", lattice.pair_left_cell, lattice.pair_left_side),
            ("right", lattice.pair_right_cell, lattice.pair_right_side),
        ):
            slots = 2 * sides + slot_off
            qubit_cols = np.empty((n_pairs, 4 if slot_off == 1 else 2), dtype=np.int64)
            for j in range(qubit_cols.shape[1]):
                local = np.array([HALF_LOCAL_QUBITS[s][j] for s in slots])
                qubit_cols[:, j] = lattice.cell_qubits[cells, local]
            even = 0.5 + 0.5 * np.prod(1.0 - 2.0 * post[qubit_cols], axis=1)
            if cell_role == "left":
                left_even = even
            else:
                right_even = even
        v = syndrome[lattice.pair_stabs[:, stab_idx]].astype(np.int64)
        # P(parity x on the left half) ~ pL(x) * pR(x ^ v)
        pl = np.stack([left_even, 1.0 - left_even], axis=1)       # (n_pairs, 2)
        pr = np.stack([right_even, 1.0 - right_even], axis=1)
        pr_shift = np.take_along_axis(pr, (np.arange(2)[None, :] ^ v[:, None]), axis=1)
        marg[:, stab_idx] = pl * pr_shift
    tables = marg[:, 0, :, None] * marg[:, 1, None, :]
    totals = tables.sum(axis=(1, 2), keepdims=True)
    if not (totals > 0.0).all():
        raise FloatingPointError("zero normalizer in splitting initialization")
    return tables / totals


def run_splitting(
    lattice: Lattice,
    syndrome,
    pair_joint: np.ndarray,
    posteriors: np.ndarray,
    table: CellTable,
    mode: str = "single",
    max_rounds: int = 15,
    change_threshold: int | None = None,
    fixed_rounds: bool = False,
) -> SplitState:
    """Iterate synchronous global splitting updates until convergence.

    Stops after ``max_rounds`` or once a round changes fewer than
    ``change_threshold`` argmax choices.  The default threshold of one stops
    only on a change-free round: looser thresholds can freeze the iteration
    mid symmetry-breaking and measurably hurt small-lattice accuracy.  The
    final choice is the per-pair argmax with lexicographic tie-break;
    per-round change counts are kept for the convergence diagnostics.
    """
    syndrome = np.asarray(syndrome, dtype=np.uint8)
    if change_threshold is None:
        change_threshold = 1
    v = syndrome[lattice.pair_stabs].astype(np.uint8)   # (n_pairs, 2)
    tables = initial_split_tables(lattice, syndrome, posteriors)
    chosen = tables.reshape(-1, 4).argmax(axis=1)

    tables9_cells = pair_joint[lattice.cell_squares]    # (n_cells, 9, 2, 2)
    bulk_bits = (
        syndrome[lattice.cell_bulk_stabs].astype(np.int64)
        @ (1 << np.arange(4, dtype=np.int64))
    )
    p_all = _all_sigma_probabilities(table, bulk_bits, tables9_cells, mode)
    q = p_all.reshape(-1, 4, 4, 4, 4)  # axes: cell, side3, side2, side1, side0

    state = SplitState(tables=tables, v=v, chosen=chosen)
    for _ in range(max_rounds):
        side_states = _cellside_states(lattice, state.tables, v)
        # conditional normalizers and weighted marginalization, per side
        est = np.empty((lattice.n_cells, 4, 4))
        Z0 = q.sum(axis=4, keepdims=True)
        est[:, 0] = np.einsum("cwxyz,cw,cx,cy->cz", q / Z0,
                              side_states[:, 3], side_states[:, 2], side_states[:, 1])
        Z1 = q.sum(axis=3, keepdims=True)
        est[:, 1] = np.einsum("cwxyz,cw,cx,cz->cy", q / Z1,
                              side_states[:, 3], side_states[:, 2], side_states[:, 0])
        Z2 = q.sum(axis=2, keepdims=True)
        est[:, 2] = np.einsum("cwxyz,cw,cy,cz->cx", q / Z2,
                              side_states[:, 3], side_states[:, 1], side_states[:, 0])
        Z3 = q.sum(axis=1, keepdims=True)
        est[:, 3] = np.einsum("cwxyz,cx,cy,cz->cw", q / Z3,
                              side_states[:, 2], side_states[:, 1], side_states[:, 0])

        estL = est[lattice.pair_left_cell, lattice.pair_left_side].reshape(-1, 2, 2)
        estR = est[lattice.pair_right_cell, lattice.pair_right_side].reshape(-1, 2, 2)
        # express the right-cell estimate over left-cell parities
        f0 = v[:, 0] == 1
        f1 = v[:, 1] == 1
        estR = np.where(f0[:, None, None], estR[:, ::-1, :], estR)
        estR = np.where(f1[:, None, None], estR[:, :, ::-1], estR)
        new_tables = estL * estR
        totals = new_tables.sum(axis=(1, 2), keepdims=True)
        if not (totals > 0.0).all():
            raise FloatingPointError("zero normalizer in splitting update")
        new_tables = new_tables / totals

        new_chosen = new_tables.reshape(-1, 4).argmax(axis=1)
        changes = int((new_chosen != state.chosen).sum())
        state.tables = new_tables
        state.chosen = new_chosen
        state.change_counts.append(changes)
        state.rounds_run += 1
        if not fixed_rounds and changes < change_threshold:
            break

    # diagnostic convergence round always uses the 3m definition
    state.converged_round = convergence_round(state.change_counts, 3 * lattice.m)
    return state


def convergence_round(change_counts, threshold) -> int:
    """Last round with more than ``threshold`` changes (rounds count from 1;
    0 means the very first round was already below threshold)."""
    last = 0
    for r, c in enumerate(change_counts, start=1):
        if c > threshold:
            last = r
    return last


def cell_sigma_bits(lattice: Lattice, state: SplitState) -> np.ndarray:
    """Fixed 8-bit splitting assignment seen by each cell."""
    pid = lattice.cell_side_pairs
    s0 = (state.chosen[pid] >> 1) & 1   # octagon bit
    s1 = state.chosen[pid] & 1          # red bit
    flip = ~lattice.cell_side_is_left
    vv = state.v[pid]
    s0 = s0 ^ (flip & (vv[:, :, 0] == 1))
    s1 = s1 ^ (flip & (vv[:, :, 1] == 1))
    sigma = np.zeros(lattice.n_cells, dtype=np.int64)
    for k in range(4):
        sigma |= s1[:, k].astype(np.int64) << (2 * k)
        sigma |= s0[:, k].astype(np.int64) << (2 * k + 1)
    return sigma


def final_side_states(lattice: Lattice, state: SplitState) -> np.ndarray:
    """Per-cell per-side state distributions from the converged tables."""
    return _cellside_states(lattice, state.tables, state.v)
