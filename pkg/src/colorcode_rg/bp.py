"""Sum-product message passing over the qubit/stabilizer factor graph.

Messages live in the log-likelihood domain: a qubit-to-stabilizer message is
log((1-p)/p)-shaped, positive values favoring "no error".  One round is a
synchronous stabilizer-to-qubit sweep followed by a qubit-to-stabilizer
sweep; all updates read the previous snapshot (double buffered), and the
message from a check to a qubit never uses that qubit's own message
(extrinsic rule).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .lattice import CORNER_LOCAL_QUBITS, M_CORNER, Lattice

#: probability clamp applied everywhere probabilities are produced
EPS = 1e-9
#: matching log-likelihood clamp, log((1-EPS)/EPS)
LLR_CLAMP = float(np.log((1.0 - EPS) / EPS))


def clamp_probability(p, eps: float = EPS):
    return np.clip(p, eps, 1.0 - eps)


def parity_even_prob(probs) -> float:
    """Probability that independent events with the given probabilities occur
    an even number of times: 1/2 + 1/2 * prod(1 - 2 p_i)."""
    probs = np.asarray(probs, dtype=float)
    if probs.size and (probs.min() < 0.0 or probs.max() > 1.0):
        raise ValueError("probabilities must lie in [0, 1]")
    return 0.5 + 0.5 * float(np.prod(1.0 - 2.0 * probs))


def parity_odd_prob(probs) -> float:
    # defined via the complement so even + odd == 1.0 holds exactly in floats
    return 1.0 - parity_even_prob(probs)


@dataclass
class BeliefState:
    """Per-qubit beliefs plus the message state of the factor graph.

    ``pair_joint`` holds one 2x2 table per unit square of the lattice,
    indexed ``[bit_lower][bit_upper]``; it is populated by the pipeline (top
    level: product of posteriors; lower levels: rescaler output).
    """

    prior: np.ndarray              # (n,)
    log_prior: np.ndarray          # (n,) log((1-p)/p)
    msg_q2s: np.ndarray            # (n, 3) aligned with qubit_stabilizers
    msg_s2q: np.ndarray            # (n, 3)
    rounds_run: int = 0
    posterior: np.ndarray | None = None
    pair_joint: np.ndarray | None = None  # (S^2, 2, 2)


def make_belief_state(lattice: Lattice, prior) -> BeliefState:
    prior = np.broadcast_to(np.asarray(prior, dtype=float), (lattice.n_qubits,))
    prior = clamp_probability(prior.copy())
    log_prior = np.log((1.0 - prior) / prior)
    msg_q2s = np.repeat(log_prior[:, None], 3, axis=1)
    msg_s2q = np.zeros((lattice.n_qubits, 3), dtype=float)
    return BeliefState(prior=prior, log_prior=log_prior,
                       msg_q2s=msg_q2s, msg_s2q=msg_s2q)


def bp_round(lattice: Lattice, syndrome, state: BeliefState) -> BeliefState:
    """One synchronous stabilizer->qubit then qubit->stabilizer update."""
    syndrome = np.asarray(syndrome, dtype=np.uint8)
    sq = lattice.stab_qubits
    sl = lattice.stab_slots
    valid = sq >= 0

    # gather tanh(M_q2s / 2) per stabilizer row, neutral 1.0 padding
    t = np.ones(sq.shape, dtype=float)
    t[valid] = np.tanh(state.msg_q2s[sq[valid], sl[valid]] / 2.0)

    # extrinsic products along each row via prefix/suffix products
    w = sq.shape[1]
    prefix = np.ones((sq.shape[0], w + 1), dtype=float)
    suffix = np.ones((sq.shape[0], w + 1), dtype=float)
    np.cumprod(t, axis=1, out=prefix[:, 1:])
    np.cumprod(t[:, ::-1], axis=1, out=suffix[:, 1:])
    ext = prefix[:, :w] * suffix[:, ::-1][:, 1:]

    sign = (1.0 - 2.0 * syndrome.astype(float))[:, None]
    lim = np.tanh(LLR_CLAMP / 2.0)
    ext = np.clip(ext, -lim, lim)
    msg = sign * 2.0 * np.arctanh(ext)

    new_s2q = np.empty_like(state.msg_s2q)
    new_s2q[sq[valid], sl[valid]] = msg[valid]
    if not np.isfinite(new_s2q).all():
        raise FloatingPointError("non-finite stabilizer->qubit message")

    total = new_s2q.sum(axis=1, keepdims=True)
    new_q2s = state.log_prior[:, None] + (total - new_s2q)
    new_q2s = np.clip(new_q2s, -LLR_CLAMP, LLR_CLAMP)
    if not np.isfinite(new_q2s).all():
        raise FloatingPointError("non-finite qubit->stabilizer message")

    return replace(state, msg_q2s=new_q2s, msg_s2q=new_s2q,
                   rounds_run=state.rounds_run + 1)


def bp_finalize(state: BeliefState) -> np.ndarray:
    """Posterior error probabilities from the prior and incoming messages."""
    llr = state.log_prior + state.msg_s2q.sum(axis=1)
    post = clamp_probability(1.0 / (1.0 + np.exp(np.clip(llr, -LLR_CLAMP, LLR_CLAMP))))
    state.posterior = post
    return post


def run_bp(lattice: Lattice, syndrome, prior, rounds: int = 3) -> BeliefState:
    state = make_belief_state(lattice, prior)
    for _ in range(rounds):
        state = bp_round(lattice, syndrome, state)
    bp_finalize(state)
    return state


def corner_update(p_j: float, corner_parity: int, outside_probs) -> float:
    """Bayes update of one in-cell qubit from its cell-corner stabilizer.

    ``outside_probs`` are the current posteriors of the corner stabilizer's
    qubits outside the cell.  Even measured parity makes an error on the
    qubit as likely as an odd count outside, and vice versa.
    """
    even = parity_even_prob(outside_probs)
    odd = 1.0 - even
    if corner_parity == 0:
        num = p_j * odd
        den = num + (1.0 - p_j) * even
    else:
        num = p_j * even
        den = num + (1.0 - p_j) * odd
    if den <= 0.0:
        return float(clamp_probability(p_j))
    return float(clamp_probability(num / den))


def apply_corner_updates(lattice: Lattice, syndrome, posteriors) -> np.ndarray:
    """Corner updates for every cell, synchronously from the pre-update state.

    Each corner stabilizer of each cell updates the cell's own qubits using
    the parity product of the stabilizer's outside-the-cell qubits.  All
    "outside" inputs are the pre-update posteriors, so the result does not
    depend on any update order.
    """
    if lattice.g == 0:
        return np.asarray(posteriors, dtype=float)
    syndrome = np.asarray(syndrome, dtype=np.uint8)
    pre = np.asarray(posteriors, dtype=float)
    post = pre.copy()

    for slot in range(4):
        stabs = lattice.cell_corner_stabs[:, slot]          # (n_cells,)
        members = lattice.stab_qubits[stabs]                # (n_cells, 8)
        valid = members >= 0
        inside = lattice.cell_qubits[:, list(CORNER_LOCAL_QUBITS[slot])]
        is_inside = np.zeros(members.shape, dtype=bool)
        for k in range(inside.shape[1]):
            is_inside |= members == inside[:, k][:, None]

        factors = np.where(valid & ~is_inside, 1.0 - 2.0 * pre[members], 1.0)
        even = 0.5 + 0.5 * factors.prod(axis=1)
        odd = 1.0 - even
        parity = syndrome[stabs].astype(float)
        # parity 0 pairs the qubit error with odd outside parity
        like_err = np.where(parity == 0, odd, even)
        like_ok = np.where(parity == 0, even, odd)
        for k in range(inside.shape[1]):
            q = inside[:, k]
            num = pre[q] * like_err
            den = num + (1.0 - pre[q]) * like_ok
            post[q] = clamp_probability(np.where(den > 0.0, num / np.where(den > 0.0, den, 1.0), pre[q]))
    return post


def independent_pair_tables(lattice: Lattice, probs) -> np.ndarray:
    """Product-form 2x2 tables for every unit square from per-qubit values."""
    probs = np.asarray(probs, dtype=float)
    pl = probs[lattice.square_lower]
    pu = probs[lattice.square_upper]
    tables = np.empty((lattice.n_stabilizers, 2, 2), dtype=float)
    tables[:, 0, 0] = (1 - pl) * (1 - pu)
    tables[:, 0, 1] = (1 - pl) * pu
    tables[:, 1, 0] = pl * (1 - pu)
    tables[:, 1, 1] = pl * pu
    return normalize_pair_tables(tables)


def normalize_pair_tables(tables: np.ndarray, eps: float = EPS) -> np.ndarray:
    """Clamp table entries to [eps, 1-eps] and renormalize each to sum 1."""
    t = np.clip(tables, eps, 1.0 - eps)
    t /= t.sum(axis=(-1, -2), keepdims=True)
    return t


def pair_marginals(lattice: Lattice, tables: np.ndarray) -> np.ndarray:
    """Per-qubit error probabilities implied by the unit-square tables."""
    probs = np.empty(lattice.n_qubits, dtype=float)
    probs[lattice.square_lower] = tables[:, 1, :].sum(axis=1)
    probs[lattice.square_upper] = tables[:, :, 1].sum(axis=1)
    return clamp_probability(probs)


def pair_config_probability(tables9: np.ndarray, bits) -> np.ndarray:
    """Probability of in-cell configurations under nine pair tables.

    ``tables9``: (..., 9, 2, 2) tables in the cell's pair-major qubit order;
    ``bits``: (..., 18) binary configurations.  Returns the product of the
    nine joint-table entries selected by consecutive bit pairs.
    """
    bits = np.asarray(bits)
    lower = bits[..., 0::2]
    upper = bits[..., 1::2]
    flat = tables9.reshape(tables9.shape[:-2] + (4,))
    idx = (2 * lower + upper).astype(np.int64)
    vals = np.take_along_axis(flat, idx[..., None], axis=-1)[..., 0]
    return vals.prod(axis=-1)
