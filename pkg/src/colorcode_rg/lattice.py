"""Construction of the 4.8.8 toric color-code family [[8*9^m, 4, 2*3^m]].

Coordinate convention (the one place it is documented):

The square-octagon tiling is laid out in rotated coordinates (u, v) on the
grid Z_S x Z_S with S = 2*3^m.  Every site of the grid carries one stabilizer:

  * (u + v) even  -> weight-4 "square" stabilizer, colored red;
  * (u + v) odd   -> weight-8 octagon, colored green when u is odd and blue
                     when u is even.

A qubit is a triangle identified by ``(r, su, sv)`` where ``r = (u0, v0)`` is
a red site and ``su, sv`` are signs in {+1, -1}.  Its three stabilizers are
the red square at ``r`` and the octagons at ``(u0+su, v0)`` and
``(u0, v0+sv)`` (indices mod S).  Each red site owns four qubits, so
n = 4 * (S^2 / 2) = 8 * 9^m.

Unit squares of the grid pair up qubits: qubit ``(r, su, sv)`` spans the unit
square ``(w, z) = (u0 + (su-1)/2, v0 + (sv-1)/2)`` and sits in its "lower"
position when sv = +1, "upper" when sv = -1.  Every unit square holds exactly
one lower and one upper qubit; these pairs carry the joint probability tables
used throughout the decoder.

For m >= 1* the lattice is partitioned into 18-qubit square cells: cell
``(a, b)`` with a, b in Z_g, g = 2*3^(m-1), covers the 3x3 block of sites
[3a, 3a+3] x [3b, 3b+3].  In cell-local coordinates (p, q) in {0..3}^2 the
block corners (0,0), (3,0), (0,3), (3,3) are the four corner stabilizers, the
interior sites are the four bulk stabilizers, and the two non-corner sites on
each edge are the split (half) stabilizers shared with the neighbor cell.
Cells whose corner (3a, 3b) falls on an octagon are mirror images of the red
cornered ones; their local frame flips u (p -> 3 - p, su -> -su) so that all
cells share one canonical local layout: local red sites are the (p, q) with
p + q even.

One rescaling step contracts each cell to the two effective qubits of the
coarse unit square (a, b): effective qubit 0 is the coarse "lower" triangle
(local corners (0,0), (3,0), (0,3)) and effective qubit 1 the coarse "upper"
one (local corners (3,3), (3,0), (0,3)).  Cell corners map to coarse
stabilizers by dividing their (u, v) position by three.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .validation import check_frame, check_syndrome

RED, GREEN, BLUE = 0, 1, 2
COLOR_NAMES = ("red", "green", "blue")

#: qubit direction encoding: index -> (su, sv)
DIRECTIONS = ((+1, +1), (+1, -1), (-1, -1), (-1, +1))

#: resource guard for build_lattice (8 * 9^6 is ~4.3M qubits)
MAX_LEVEL = 5

#: canonical local sites of the 18-qubit cell, in the fixed orders used for
#: syndrome bit packing:  half slot 2k is the red half of side k, slot 2k+1
#: the octagon half, sides ordered [p=0, p=3, q=0, q=3].
HALF_SITES = ((0, 2), (0, 1), (3, 1), (3, 2), (2, 0), (1, 0), (1, 3), (2, 3))
BULK_SITES = ((1, 1), (2, 2), (2, 1), (1, 2))
CORNER_SITES = ((0, 0), (3, 0), (0, 3), (3, 3))


@dataclass(frozen=True)
class CodeParams:
    """Parameters of the level-m member of the code family."""

    m: int
    n: int
    k: int
    d: int

    @classmethod
    def from_level(cls, m: int) -> "CodeParams":
        return cls(m=m, n=8 * 9**m, k=4, d=2 * 3**m)


def _canonical_local_qubits():
    """The 18 local qubits of the canonical cell in pair-major order.

    Order: the nine local unit squares (lp, lq), lp, lq in {0, 1, 2}, sorted
    lexicographically; within a square the lower qubit (sv=+1) precedes the
    upper one.  Returns a list of (p, q, su, sv).
    """
    out = []
    for lp in range(3):
        for lq in range(3):
            if (lp + lq) % 2 == 0:
                lower = (lp, lq, +1, +1)
                upper = (lp + 1, lq + 1, -1, -1)
            else:
                lower = (lp + 1, lq, -1, +1)
                upper = (lp, lq + 1, +1, -1)
            out.append(lower)
            out.append(upper)
    return out


LOCAL_QUBITS = tuple(_canonical_local_qubits())


def _local_check_matrix(sites):
    """In-cell incidence of the given local stabilizer sites (rows) against
    the 18 canonical local qubits (columns)."""
    M = np.zeros((len(sites), 18), dtype=np.uint8)
    for row, (p, q) in enumerate(sites):
        for col, (lp, lq, su, sv) in enumerate(LOCAL_QUBITS):
            if (lp, lq) == (p, q) or (lp + su, lq) == (p, q) or (lp, lq + sv) == (p, q):
                M[row, col] ^= 1
    return M


M_HALF = _local_check_matrix(HALF_SITES)
M_BULK = _local_check_matrix(BULK_SITES)
M_CORNER = _local_check_matrix(CORNER_SITES)

#: local qubit indices inside each corner stabilizer, per corner slot
CORNER_LOCAL_QUBITS = tuple(
    tuple(np.flatnonzero(M_CORNER[i]).tolist()) for i in range(4)
)


@dataclass
class Lattice:
    """Immutable incidence structure of one lattice level.

    Stabilizer ids are ``u * S + v`` over all grid sites; qubit ids follow
    the (red site, direction) enumeration below.  Everything is precomputed
    as numpy arrays so decoding never touches Python-level geometry.
    """

    params: CodeParams
    S: int
    n_qubits: int
    n_stabilizers: int
    # per qubit
    qubit_stabilizers: np.ndarray  # (n, 3) red, oct_u, oct_v stabilizer ids
    qubit_square: np.ndarray       # (n,) unit-square id w * S + z
    qubit_pos: np.ndarray          # (n,) 0 lower (sv=+1), 1 upper
    # per stabilizer
    stab_color: np.ndarray         # (n_stabs,) RED / GREEN / BLUE
    stab_weight: np.ndarray        # (n_stabs,)
    stab_qubits: np.ndarray        # (n_stabs, 8) qubit ids, -1 padded
    stab_slots: np.ndarray         # (n_stabs, 8) incidence slot of the qubit
    # per unit square
    square_lower: np.ndarray       # (S^2,) qubit id
    square_upper: np.ndarray       # (S^2,)
    # parity-check matrix, dense uint8 (n_stabs, n)
    H: np.ndarray
    logical_supports: tuple = ()   # 4 index arrays
    # cell structure, None for m = 0
    g: int = 0
    cell_qubits: np.ndarray | None = None      # (g^2, 18) canonical order
    cell_squares: np.ndarray | None = None     # (g^2, 9)
    cell_half_stabs: np.ndarray | None = None  # (g^2, 8) slot order
    cell_bulk_stabs: np.ndarray | None = None  # (g^2, 4)
    cell_corner_stabs: np.ndarray | None = None  # (g^2, 4)
    cell_side_pairs: np.ndarray | None = None  # (g^2, 4) pair id per side
    cell_side_is_left: np.ndarray | None = None  # (g^2, 4) bool
    n_pairs: int = 0
    pair_stabs: np.ndarray | None = None       # (n_pairs, 2) oct, red ids
    pair_left_cell: np.ndarray | None = None
    pair_right_cell: np.ndarray | None = None
    pair_left_side: np.ndarray | None = None
    pair_right_side: np.ndarray | None = None

    @property
    def m(self) -> int:
        return self.params.m

    @property
    def n_cells(self) -> int:
        return self.g * self.g

    def syndrome_of(self, frame) -> np.ndarray:
        frame = check_frame(frame, self.n_qubits)
        return ((self.H @ frame.astype(np.uint32)) & 1).astype(np.uint8)

    def color_class_sums(self, syndrome) -> tuple:
        syndrome = check_syndrome(syndrome, self.n_stabilizers)
        return tuple(
            int(syndrome[self.stab_color == c].sum() % 2) for c in (RED, GREEN, BLUE)
        )

    def syndrome_consistent(self, syndrome) -> bool:
        """Torus redundancy: the three color-class parity sums agree."""
        r, g, b = self.color_class_sums(syndrome)
        return r == g == b

    def logical_failure(self, residual) -> np.ndarray:
        """Parity of the residual along each of the four logical supports.

        The residual must have trivial syndrome; anything else indicates a
        decoder bug upstream.
        """
        residual = check_frame(residual, self.n_qubits, name="residual")
        syn = self.syndrome_of(residual)
        if syn.any():
            raise ValueError("residual frame has non-trivial syndrome")
        return np.array(
            [int(residual[sup].sum() % 2) for sup in self.logical_supports],
            dtype=np.uint8,
        )

    def debug_dict(self) -> dict:
        """JSON-friendly dump of the lattice for visual inspection."""
        S = self.S
        return {
            "params": {"m": self.m, "n": self.params.n, "k": self.params.k,
                       "d": self.params.d},
            "grid_side": S,
            "stabilizers": [
                {
                    "id": int(s),
                    "uv": [int(s) // S, int(s) % S],
                    "color": COLOR_NAMES[int(self.stab_color[s])],
                    "weight": int(self.stab_weight[s]),
                    "qubits": [int(q) for q in self.stab_qubits[s] if q >= 0],
                }
                for s in range(self.n_stabilizers)
            ],
            "cells": None
            if self.g == 0
            else [
                {
                    "cell": [c // self.g, c % self.g],
                    "qubits": self.cell_qubits[c].tolist(),
                    "bulk_stabilizers": self.cell_bulk_stabs[c].tolist(),
                    "half_stabilizers": self.cell_half_stabs[c].tolist(),
                    "corner_stabilizers": self.cell_corner_stabs[c].tolist(),
                }
                for c in range(self.n_cells)
            ],
            "logical_supports": [sup.tolist() for sup in self.logical_supports],
        }


@dataclass
class CellMap:
    """Correspondence between level-m cells and the level-(m-1) lattice."""

    m: int
    # effective qubit ids (coarse level) produced by each cell
    effective_qubits: np.ndarray    # (g^2, 2)
    # coarse stabilizer id for each cell corner slot
    corner_to_coarse: np.ndarray    # (g^2, 4)
    # coarse stabilizer id -> fine corner stabilizer id (bijection)
    coarse_to_fine_stab: np.ndarray  # (S'^2,)
    # global in-cell supports of the two effective logical operators
    logical_support_0: np.ndarray   # (g^2, w0) fine qubit ids
    logical_support_1: np.ndarray   # (g^2, w1)


def _site_id(u, v, S):
    return (u % S) * S + (v % S)


def build_lattice(m: int, max_level: int = MAX_LEVEL) -> Lattice:
    """Build the level-m lattice. Deterministic: same m gives identical ids."""
    if m < 0:
        raise ValueError("level m must be non-negative")
    if m > max_level:
        raise ValueError(f"level m={m} exceeds the resource guard ({max_level})")
    return _build_lattice_cached(int(m))


@lru_cache(maxsize=None)
def _build_lattice_cached(m: int) -> Lattice:
    params = CodeParams.from_level(m)
    S = 2 * 3**m
    n_stabs = S * S

    us, vs = np.divmod(np.arange(n_stabs), S)
    parity = (us + vs) % 2
    stab_color = np.where(parity == 0, RED, np.where(us % 2 == 1, GREEN, BLUE))
    stab_color = stab_color.astype(np.int8)

    red_sites = np.flatnonzero(parity == 0)
    n = 4 * red_sites.size
    assert n == params.n

    # qubit id = 4 * red_index + direction
    ru, rv = np.divmod(red_sites, S)
    q_u0 = np.repeat(ru, 4)
    q_v0 = np.repeat(rv, 4)
    dirs = np.tile(np.arange(4), red_sites.size)
    su = np.array([d[0] for d in DIRECTIONS])[dirs]
    sv = np.array([d[1] for d in DIRECTIONS])[dirs]

    stab_red = _site_id(q_u0, q_v0, S)
    stab_ou = _site_id(q_u0 + su, q_v0, S)
    stab_ov = _site_id(q_u0, q_v0 + sv, S)
    qubit_stabilizers = np.stack([stab_red, stab_ou, stab_ov], axis=1)

    qubit_square = _site_id(q_u0 + (su - 1) // 2, q_v0 + (sv - 1) // 2, S)
    qubit_pos = (sv < 0).astype(np.int8)

    H = np.zeros((n_stabs, n), dtype=np.uint8)
    H[stab_red, np.arange(n)] ^= 1
    H[stab_ou, np.arange(n)] ^= 1
    H[stab_ov, np.arange(n)] ^= 1

    stab_weight = H.sum(axis=1).astype(np.int16)
    stab_qubits = np.full((n_stabs, 8), -1, dtype=np.int64)
    stab_slots = np.full((n_stabs, 8), -1, dtype=np.int64)
    fill = np.zeros(n_stabs, dtype=np.int64)
    for slot in range(3):
        sids = qubit_stabilizers[:, slot]
        # deterministic fill order: qubit id ascending, slot ascending
        for q in range(n):
            s = sids[q]
            stab_qubits[s, fill[s]] = q
            stab_slots[s, fill[s]] = slot
            fill[s] += 1
    assert (fill == stab_weight).all()

    square_lower = np.full(n_stabs, -1, dtype=np.int64)
    square_upper = np.full(n_stabs, -1, dtype=np.int64)
    square_lower[qubit_square[qubit_pos == 0]] = np.flatnonzero(qubit_pos == 0)
    square_upper[qubit_square[qubit_pos == 1]] = np.flatnonzero(qubit_pos == 1)
    assert (square_lower >= 0).all() and (square_upper >= 0).all()

    logical_supports = tuple(
        np.flatnonzero(sup)
        for sup in (
            (q_v0 == 0) & (sv == +1),
            (q_u0 == 0) & (su == +1),
            (q_v0 == 1) & (sv == +1),
            (q_u0 == 1) & (su == +1),
        )
    )

    lat = Lattice(
        params=params,
        S=S,
        n_qubits=n,
        n_stabilizers=n_stabs,
        qubit_stabilizers=qubit_stabilizers,
        qubit_square=qubit_square,
        qubit_pos=qubit_pos,
        stab_color=stab_color,
        stab_weight=stab_weight,
        stab_qubits=stab_qubits,
        stab_slots=stab_slots,
        square_lower=square_lower,
        square_upper=square_upper,
        H=H,
        logical_supports=logical_supports,
    )
    if m >= 1:
        _attach_cells(lat, q_u0, q_v0, su, sv)
    return lat


def _attach_cells(lat: Lattice, q_u0, q_v0, su, sv):
    S = lat.S
    g = S // 3
    n_cells = g * g

    # qubit -> cell via the block containing its (u, v) footprint
    a = (np.mod(q_u0 + (su - 1) // 2, S)) // 3
    b = (np.mod(q_v0 + (sv - 1) // 2, S)) // 3
    qubit_cell = a * g + b

    cell_qubits = np.full((n_cells, 18), -1, dtype=np.int64)
    local_index = {lq: i for i, lq in enumerate(LOCAL_QUBITS)}
    for q in range(lat.n_qubits):
        c = qubit_cell[q]
        ca, cb = divmod(c, g)
        if (ca + cb) % 2 == 0:
            p = (q_u0[q] - 3 * ca) % S
            lsu = su[q]
        else:
            p = (3 * ca + 3 - q_u0[q]) % S
            lsu = -su[q]
        qq = (q_v0[q] - 3 * cb) % S
        cell_qubits[c, local_index[(p, qq, lsu, sv[q])]] = q
    assert (cell_qubits >= 0).all()

    def site_of(c, p, q):
        ca, cb = divmod(c, g)
        if (ca + cb) % 2 == 0:
            u = 3 * ca + p
        else:
            u = 3 * ca + 3 - p
        return _site_id(u, 3 * cb + q, S)

    cells = np.arange(n_cells)
    cell_half_stabs = np.stack(
        [np.array([site_of(c, p, q) for c in cells]) for (p, q) in HALF_SITES],
        axis=1,
    )
    cell_bulk_stabs = np.stack(
        [np.array([site_of(c, p, q) for c in cells]) for (p, q) in BULK_SITES],
        axis=1,
    )
    cell_corner_stabs = np.stack(
        [np.array([site_of(c, p, q) for c in cells]) for (p, q) in CORNER_SITES],
        axis=1,
    )

    # cell -> 9 unit squares, local (lp, lq) lexicographic, matching the
    # pair-major order of LOCAL_QUBITS
    cell_squares = np.stack(
        [
            lat.qubit_square[cell_qubits[:, 2 * i]]
            for i in range(9)
        ],
        axis=1,
    )

    # boundary split pairs: one per (u = 3a) line segment and (v = 3b) line
    # segment of the cell grid; pair id = axis * g^2 + a * g + b addresses the
    # boundary on side u=3a (axis 0) or v=3b (axis 1) of cell (a, b).
    n_pairs = 2 * n_cells
    pair_stabs = np.zeros((n_pairs, 2), dtype=np.int64)
    pair_left_cell = np.zeros(n_pairs, dtype=np.int64)
    pair_right_cell = np.zeros(n_pairs, dtype=np.int64)
    pair_left_side = np.zeros(n_pairs, dtype=np.int64)
    pair_right_side = np.zeros(n_pairs, dtype=np.int64)
    cell_side_pairs = np.zeros((n_cells, 4), dtype=np.int64)
    cell_side_is_left = np.zeros((n_cells, 4), dtype=bool)

    # sides in HALF_SITES order: 0: p=0, 1: p=3, 2: q=0, 3: q=3
    for c in range(n_cells):
        ca, cb = divmod(c, g)
        horizontal = (ca + cb) % 2 == 0
        for side in range(4):
            if side < 2:  # p sides, u boundary
                p_local = 0 if side == 0 else 3
                if horizontal:
                    ub = (3 * ca + p_local) % S
                else:
                    ub = (3 * ca + 3 - p_local) % S
                boundary_a = (ub // 3) % g
                pid = 0 * n_cells + boundary_a * g + cb
                left = ((boundary_a - 1) % g) * g + cb
            else:  # q sides, v boundary
                q_local = 0 if side == 2 else 3
                vb = (3 * cb + q_local) % S
                boundary_b = (vb // 3) % g
                pid = n_cells + ca * g + boundary_b
                left = ca * g + (boundary_b - 1) % g
            cell_side_pairs[c, side] = pid
            is_left = c == left
            cell_side_is_left[c, side] = is_left
            if is_left:
                pair_left_cell[pid] = c
                pair_left_side[pid] = side
            else:
                pair_right_cell[pid] = c
                pair_right_side[pid] = side
            # (oct, red) stabilizer ids from this cell's slot view; both
            # cells see the same global sites
            red_site = cell_half_stabs[c, 2 * side]
            oct_site = cell_half_stabs[c, 2 * side + 1]
            pair_stabs[pid] = (oct_site, red_site)

    lat.g = g
    lat.cell_qubits = cell_qubits
    lat.cell_squares = cell_squares
    lat.cell_half_stabs = cell_half_stabs
    lat.cell_bulk_stabs = cell_bulk_stabs
    lat.cell_corner_stabs = cell_corner_stabs
    lat.cell_side_pairs = cell_side_pairs
    lat.cell_side_is_left = cell_side_is_left
    lat.n_pairs = n_pairs
    lat.pair_stabs = pair_stabs
    lat.pair_left_cell = pair_left_cell
    lat.pair_right_cell = pair_right_cell
    lat.pair_left_side = pair_left_side
    lat.pair_right_side = pair_right_side


@lru_cache(maxsize=None)
def build_cellmap(m: int) -> CellMap:
    """Cell-to-coarse correspondence for rescaling level m to level m-1."""
    if m < 1:
        raise ValueError("the base lattice (m=0) cannot be rescaled further")
    from .cell import get_cell_table  # local import, cell depends on lattice

    lat = build_lattice(m)
    coarse = build_lattice(m - 1)
    table = get_cell_table()
    g, S = lat.g, lat.S
    Sc = coarse.S
    n_cells = lat.n_cells

    # corner slot (p, q) at fine site (u, v) maps to coarse site (u/3, v/3)
    fu, fv = np.divmod(lat.cell_corner_stabs, S)
    corner_to_coarse = ((fu // 3) % Sc) * Sc + ((fv // 3) % Sc)

    coarse_to_fine = np.full(coarse.n_stabilizers, -1, dtype=np.int64)
    cu, cv = np.divmod(np.arange(coarse.n_stabilizers), Sc)
    coarse_to_fine[cu * Sc + cv] = (3 * cu % S) * S + (3 * cv % S)

    # effective qubits: cell (a, b) produces the coarse unit square (a, b)
    cells = np.arange(n_cells)
    ca, cb = np.divmod(cells, g)
    sq = (ca % Sc) * Sc + (cb % Sc)
    eff = np.stack([coarse.square_lower[sq], coarse.square_upper[sq]], axis=1)

    l0 = lat.cell_qubits[:, np.flatnonzero(table.logical_0)]
    l1 = lat.cell_qubits[:, np.flatnonzero(table.logical_1)]

    return CellMap(
        m=m,
        effective_qubits=eff,
        corner_to_coarse=corner_to_coarse,
        coarse_to_fine_stab=coarse_to_fine,
        logical_support_0=l0,
        logical_support_1=l1,
    )


def rescaled_lattice(lattice: Lattice, cellmap: CellMap) -> Lattice:
    """The level-(m-1) lattice that the cells of `lattice` contract to."""
    if lattice.m < 1:
        raise ValueError("the base lattice (m=0) cannot be rescaled further")
    if cellmap.m != lattice.m:
        raise ValueError("cell map does not belong to this lattice level")
    return build_lattice(lattice.m - 1)
