"""Rescaling decoder: orchestrates the per-level pipeline plus the base case.

Per level (while larger than the 8-qubit base code): belief propagation and
corner updates refine the qubit error probabilities, boundary stabilizers
are split, each cell is decoded from its local syndrome, and the lattice is
contracted to the next level with rescaled joint probabilities and corner
syndromes.  The base lattice is decoded exhaustively, and all corrections
are backpropagated through the stored in-cell logical supports.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import bp as bp_mod
from . import cell as cell_mod
from . import split as split_mod
from .cell import frame_rank_key, get_cell_table
from .lattice import Lattice, build_cellmap, build_lattice
from .validation import check_syndrome


@dataclass(frozen=True)
class DecoderConfig:
    # two synchronous rounds close exactly at the factor graph's girth (4):
    # checks sharing qubit pairs put every edge on a length-4 cycle, so a
    # third round would re-circulate each qubit's own evidence
    bp_rounds: int = 2
    split_rounds: int = 15
    mode: str = "single"              # class-probability mode: single | full
    sigma_cutoff: float = 1e-6
    split_change_threshold: int | None = None  # default: stop on zero changes
    fixed_split_rounds: bool = False  # disable early stopping (diagnostics)
    strict: bool = False              # raise on internal syndrome mismatch
    marginalize_pairs: bool = False   # drop pair correlations between levels

    def __post_init__(self):
        if self.mode not in ("single", "full"):
            raise ValueError("mode must be 'single' or 'full'")
        if self.bp_rounds < 0 or self.split_rounds < 1:
            raise ValueError("invalid round counts")


@dataclass
class LevelDiagnostics:
    level: int
    bp_rounds: int
    split_rounds: int
    split_changes: list
    converged_round: int


@dataclass
class DecodeResult:
    correction: np.ndarray
    flags: np.ndarray | None          # 4 logical parity flags, needs the error
    success: bool | None
    syndrome_mismatch: bool = False
    diagnostics: list = field(default_factory=list)

    def evaluate(self, lattice: Lattice, error) -> "DecodeResult":
        """Fill the logical flags given the actual sampled error."""
        if self.syndrome_mismatch:
            self.flags = np.ones(4, dtype=np.uint8)
        else:
            residual = np.asarray(error, dtype=np.uint8) ^ self.correction
            self.flags = lattice.logical_failure(residual)
        self.success = bool(not self.flags.any())
        return self


@lru_cache(maxsize=None)
def lattice_chain(m: int):
    """Immutable (lattices, cellmaps) shared by all decodes at level m."""
    lattices = [build_lattice(level) for level in range(m + 1)]
    cellmaps = [None] + [build_cellmap(level) for level in range(1, m + 1)]
    return lattices, cellmaps


def decode(lattice: Lattice, syndrome, p_prior: float, config: DecoderConfig | None = None,
           error=None) -> DecodeResult:
    """Decode one syndrome; returns the correction and diagnostics.

    With ``error`` provided the logical failure flags are evaluated.  An
    internal syndrome mismatch after backpropagation marks the trial as a
    logical failure instead of aborting, unless ``config.strict``.
    """
    config = config or DecoderConfig()
    syndrome = check_syndrome(syndrome, lattice.n_stabilizers)
    if not lattice.syndrome_consistent(syndrome):
        raise ValueError("inconsistent syndrome: color-class parity sums differ")

    lattices, cellmaps = lattice_chain(lattice.m)
    table = get_cell_table()
    diagnostics = []
    corrections = [None] * (lattice.m + 1)

    syn = syndrome
    prior = np.full(lattice.n_qubits, float(p_prior))
    pair_joint = None  # top level: built from the BP posteriors
    for level in range(lattice.m, 0, -1):
        lat = lattices[level]
        state = bp_mod.run_bp(lat, syn, prior, rounds=config.bp_rounds)
        post = bp_mod.apply_corner_updates(lat, syn, state.posterior)
        if pair_joint is None:
            pair_joint = bp_mod.independent_pair_tables(lat, post)
        state.pair_joint = pair_joint

        split_state = split_mod.run_splitting(
            lat, syn, pair_joint, post, table,
            mode=config.mode,
            max_rounds=config.split_rounds,
            change_threshold=config.split_change_threshold,
            fixed_rounds=config.fixed_split_rounds,
        )
        sigma = split_mod.cell_sigma_bits(lat, split_state)
        bulk_bits = (
            syn[lat.cell_bulk_stabs].astype(np.int64)
            @ (1 << np.arange(4, dtype=np.int64))
        )
        tables9 = pair_joint[lat.cell_squares]
        local_corr, corner_flips = cell_mod.decode_cells(table, sigma, bulk_bits, tables9)
        corrections[level] = cell_mod.apply_cell_corrections(lat, local_corr)

        side_states = split_mod.final_side_states(lat, split_state)
        rescaled = cell_mod.rescale_cells(
            table, local_corr, sigma, side_states, tables9, cutoff=config.sigma_cutoff
        )
        diagnostics.append(LevelDiagnostics(
            level=level,
            bp_rounds=config.bp_rounds,
            split_rounds=split_state.rounds_run,
            split_changes=split_state.change_counts,
            converged_round=split_state.converged_round,
        ))

        coarse = lattices[level - 1]
        cm = cellmaps[level]
        syn = cell_mod.rescale_syndrome(lat, cm, syn, corner_flips)
        pair_joint = _coarse_pair_tables(lat, coarse, cm, rescaled)
        prior = bp_mod.pair_marginals(coarse, pair_joint)
        if config.marginalize_pairs:
            pair_joint = bp_mod.independent_pair_tables(coarse, prior)

    base = lattices[0]
    if pair_joint is None:  # decoding the base code directly
        pair_joint = bp_mod.independent_pair_tables(base, np.full(base.n_qubits, float(p_prior)))
    corrections[0] = base_decode(base, syn, pair_joint)

    final = cell_mod.backpropagate(lattices, cellmaps, corrections)
    mismatch = bool((lattice.syndrome_of(final) != syndrome).any())
    if mismatch and config.strict:
        raise RuntimeError("backpropagated correction does not reproduce the syndrome")
    result = DecodeResult(correction=final, flags=None, success=None,
                          syndrome_mismatch=mismatch, diagnostics=diagnostics)
    if error is not None:
        result.evaluate(lattice, error)
    return result


def _coarse_pair_tables(fine: Lattice, coarse: Lattice, cellmap, rescaled) -> np.ndarray:
    """Scatter per-cell rescaled 2x2 tables onto the coarse unit squares."""
    tables = np.empty((coarse.n_stabilizers, 2, 2))
    sq = coarse.qubit_square[cellmap.effective_qubits[:, 0]]
    tables[sq] = rescaled
    return tables


@lru_cache(maxsize=1)
def _base_frames():
    frames = ((np.arange(256, dtype=np.int64)[:, None] >> np.arange(8)) & 1).astype(np.uint8)
    lat = build_lattice(0)
    syn = (frames @ lat.H.T.astype(np.int64)) & 1
    keys = syn @ (1 << np.arange(lat.n_stabilizers, dtype=np.int64))
    return frames, keys


def base_decode(lattice: Lattice, syndrome, pair_joint) -> np.ndarray:
    """Exhaustive most-probable-frame decoder for the 8-qubit base code,
    scored by the unit-square joint tables."""
    if lattice.m != 0:
        raise ValueError("base_decode requires the 8-qubit base lattice")
    syndrome = check_syndrome(syndrome, lattice.n_stabilizers)
    frames, keys = _base_frames()
    target = int(syndrome.astype(np.int64) @ (1 << np.arange(lattice.n_stabilizers, dtype=np.int64)))
    cand = frames[keys == target]
    if cand.size == 0:
        raise ValueError("syndrome is not realizable on the base lattice")
    # candidate bits in pair-major order: (lower, upper) per unit square
    cols = np.empty(2 * lattice.n_stabilizers, dtype=np.int64)
    cols[0::2] = lattice.square_lower
    cols[1::2] = lattice.square_upper
    probs = bp_mod.pair_config_probability(pair_joint[None], cand[:, cols])
    return cand[_argmax_key(probs, cand)]


def _argmax_key(probs, frames):
    # near-ties within float association noise resolve by (weight, lex) rank
    mask = probs >= probs.max() * (1.0 - 1e-12)
    key = frame_rank_key(frames)
    key = np.where(mask, key, np.int64(1) << 40)
    return int(key.argmin())


def oracle_mld(lattice: Lattice, syndrome, probs) -> np.ndarray:
    """Test oracle: exhaustive maximization of the independent-error
    likelihood over all syndrome-consistent frames.  Exponential in n."""
    if lattice.n_qubits > 24:
        raise ValueError("oracle_mld is limited to 24 qubits")
    syndrome = check_syndrome(syndrome, lattice.n_stabilizers)
    probs = np.clip(np.asarray(probs, dtype=float), bp_mod.EPS, 1 - bp_mod.EPS)
    n = lattice.n_qubits
    frames = ((np.arange(1 << n, dtype=np.int64)[:, None] >> np.arange(n)) & 1).astype(np.uint8)
    syn = (frames @ lattice.H.T.astype(np.int64)) & 1
    match = (syn == syndrome[None, :].astype(np.int64)).all(axis=1)
    cand = frames[match]
    if cand.size == 0:
        raise ValueError("syndrome is not realizable on this lattice")
    factors = np.where(cand == 1, probs[None, :], (1.0 - probs)[None, :])
    return cand[_argmax_key(factors.prod(axis=1), cand)]
