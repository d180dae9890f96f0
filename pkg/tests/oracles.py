"""Independent reference implementations used to pin expected test values.

Everything here is deliberately brute force and kept free of the library's
optimized code paths (enumeration, direct formulas), so oracle and
implementation cannot share a bug.
"""

import itertools

import numpy as np

from colorcode_rg.lattice import M_BULK, M_CORNER, M_HALF


def parity_probs_enumerate(probs):
    """(P(even), P(odd)) by explicit enumeration over all outcome subsets."""
    probs = list(probs)
    even = 0.0
    odd = 0.0
    for bits in itertools.product((0, 1), repeat=len(probs)):
        w = 1.0
        for b, p in zip(bits, probs):
            w *= p if b else (1.0 - p)
        if sum(bits) % 2 == 0:
            even += w
        else:
            odd += w
    return even, odd


def gf2_rank(M):
    M = np.array(M, dtype=np.uint8) % 2
    rank = 0
    for col in range(M.shape[1]):
        pivot = None
        for row in range(rank, M.shape[0]):
            if M[row, col]:
                pivot = row
                break
        if pivot is None:
            continue
        M[[rank, pivot]] = M[[pivot, rank]]
        for row in range(M.shape[0]):
            if row != rank and M[row, col]:
                M[row] ^= M[rank]
        rank += 1
    return rank


def all_frames(n):
    return ((np.arange(1 << n, dtype=np.int64)[:, None] >> np.arange(n)) & 1).astype(np.uint8)


def exact_error_marginals(lattice, syndrome, p):
    """P(e_i = 1 | syndrome) by enumeration over all 2^n errors (n <= 16)."""
    n = lattice.n_qubits
    frames = all_frames(n)
    syn = (frames @ lattice.H.T.astype(np.int64)) & 1
    match = (syn == np.asarray(syndrome, dtype=np.int64)[None, :]).all(axis=1)
    cand = frames[match].astype(float)
    weights = (p ** cand.sum(axis=1)) * ((1 - p) ** (n - cand.sum(axis=1)))
    return (weights[:, None] * cand).sum(axis=0) / weights.sum()


def bp_posteriors_ratio_form(lattice, syndrome, priors, rounds):
    """Sum-product in the probability-ratio domain.

    Messages are ratios r = p(syndrome | no error) / p(syndrome | error);
    stabilizer messages are p(even)/p(odd) of the other qubits' marginals
    implied by their incoming ratios.  Mirrors the log-domain schedule
    exactly but through an independent algebra.
    """
    syndrome = np.asarray(syndrome)
    priors = np.asarray(priors, dtype=float)
    n = lattice.n_qubits
    q2s = {}
    for q in range(n):
        for s in lattice.qubit_stabilizers[q]:
            q2s[(q, s)] = (1.0 - priors[q]) / priors[q]
    s2q = {}
    for _ in range(rounds):
        new_s2q = {}
        for s in range(lattice.n_stabilizers):
            members = [q for q in lattice.stab_qubits[s] if q >= 0]
            for q in members:
                prod = 1.0
                for k in members:
                    if k == q:
                        continue
                    r = q2s[(k, s)]
                    pk = 1.0 / (1.0 + r)   # implied error probability
                    prod *= 1.0 - 2.0 * pk
                even = 0.5 + 0.5 * prod
                odd = 1.0 - even
                even = min(max(even, 1e-12), 1 - 1e-12)
                odd = min(max(odd, 1e-12), 1 - 1e-12)
                new_s2q[(s, q)] = even / odd if syndrome[s] == 0 else odd / even
        s2q = new_s2q
        new_q2s = {}
        for q in range(n):
            stabs = lattice.qubit_stabilizers[q]
            for s in stabs:
                r = (1.0 - priors[q]) / priors[q]
                for s2 in stabs:
                    if s2 != s:
                        r *= s2q[(s2, q)]
                new_q2s[(q, s)] = min(max(r, 1e-12), 1e12)
        q2s = new_q2s
    post = np.empty(n)
    for q in range(n):
        r = (1.0 - priors[q]) / priors[q]
        for s in lattice.qubit_stabilizers[q]:
            if (s, q) in s2q:
                r *= s2q[(s, q)]
        post[q] = 1.0 / (1.0 + r)
    return post


def cell_local_syndrome(frame):
    """(sigma_bits, bulk_bits, corner_pattern) of an 18-bit in-cell frame."""
    frame = np.asarray(frame, dtype=np.int64)
    halves = (M_HALF.astype(np.int64) @ frame) & 1
    bulk = (M_BULK.astype(np.int64) @ frame) & 1
    corners = (M_CORNER.astype(np.int64) @ frame) & 1
    sigma = int(halves @ (1 << np.arange(8)))
    bulk_bits = int(bulk @ (1 << np.arange(4)))
    return sigma, bulk_bits, tuple(int(c) for c in corners)


_CELL_FRAMES = None
_CELL_SIGMA = None
_CELL_BULK = None
_CELL_CORNERS = None


def cell_enumeration():
    """All 2^18 in-cell frames with their local syndromes (cached)."""
    global _CELL_FRAMES, _CELL_SIGMA, _CELL_BULK, _CELL_CORNERS
    if _CELL_FRAMES is None:
        frames = all_frames(18)
        _CELL_FRAMES = frames
        _CELL_SIGMA = ((frames @ M_HALF.T.astype(np.int64)) & 1) @ (1 << np.arange(8, dtype=np.int64))
        _CELL_BULK = ((frames @ M_BULK.T.astype(np.int64)) & 1) @ (1 << np.arange(4, dtype=np.int64))
        _CELL_CORNERS = (frames @ M_CORNER.T.astype(np.int64)) & 1
    return _CELL_FRAMES, _CELL_SIGMA, _CELL_BULK, _CELL_CORNERS


def cell_frame_probabilities(frames, tables9):
    """Pairwise-correlated probability of in-cell frames (reference form)."""
    frames = np.asarray(frames, dtype=np.int64)
    out = np.ones(frames.shape[0])
    for i in range(9):
        lo = frames[:, 2 * i]
        up = frames[:, 2 * i + 1]
        out *= tables9[i][lo, up]
    return out


def cell_class_probability_oracle(sigma_bits, bulk_bits, tables9):
    """Sum of frame probabilities over the full class, by 2^18 enumeration."""
    frames, sig, bulk, _ = cell_enumeration()
    sel = (sig == sigma_bits) & (bulk == bulk_bits)
    return cell_frame_probabilities(frames[sel], tables9).sum()


def cell_best_member_oracle(sigma_bits, bulk_bits, tables9):
    """Most probable class member by enumeration, ties to (weight, lex)."""
    frames, sig, bulk, _ = cell_enumeration()
    sel = (sig == sigma_bits) & (bulk == bulk_bits)
    cand = frames[sel]
    probs = cell_frame_probabilities(cand, tables9)
    best = probs.max()
    mask = probs >= best * (1 - 1e-12)
    weight = cand.sum(axis=1)
    lex = cand @ (1 << np.arange(17, -1, -1))
    key = weight * (1 << 18) + lex
    key = np.where(mask, key, 1 << 40)
    return cand[key.argmin()]
