"""Built-in invariant checks behind the `selftest` CLI subcommand."""

from __future__ import annotations

import numpy as np

from . import bp as bp_mod
from .cell import get_cell_table
from .decoder import DecoderConfig, decode
from .lattice import GREEN, RED, build_lattice
from .noise import trial_rng


def run(trials: int = 200, seed: int = 7) -> bool:
    checks = []

    def check(name, fn):
        try:
            fn()
            checks.append((name, True, ""))
        except Exception as exc:  # report, keep going
            checks.append((name, False, str(exc)))

    check("lattice invariants (m=0..2)", _lattice_invariants)
    check("cell table classes", _cell_table)
    check("bp parity identities", _bp_identities)
    check("random decode round-trips", lambda: _roundtrips(trials, seed))

    ok = True
    for name, passed, msg in checks:
        status = "PASS" if passed else "FAIL"
        line = f"[{status}] {name}"
        if msg:
            line += f": {msg}"
        print(line)
        ok = ok and passed
    return ok


def _lattice_invariants():
    for m in (0, 1, 2):
        lat = build_lattice(m)
        assert lat.n_qubits == 8 * 9**m
        deg = lat.H.sum(axis=0)
        assert (deg == 3).all()
        w = lat.H.sum(axis=1)
        assert set(np.unique(w)) == {4, 8}
        overlap = (lat.H.astype(np.int64) @ lat.H.T.astype(np.int64)) % 2
        np.fill_diagonal(overlap, 0)
        assert not overlap.any(), "odd stabilizer overlap"
        if m >= 1:
            assert lat.cell_qubits.shape == (lat.n_cells, 18)
            assert sorted(lat.cell_qubits.ravel().tolist()) == list(range(lat.n_qubits))


def _cell_table():
    table = get_cell_table()
    assert table.rep.shape == (4096, 18)
    assert table.logical_0.sum() >= 1 and table.logical_1.sum() >= 1
    # every representative reproduces its syndrome
    from .lattice import M_BULK, M_HALF

    M12 = np.vstack([M_HALF, M_BULK]).astype(np.int64)
    syn = (table.rep.astype(np.int64) @ M12.T) & 1
    idx = syn @ (1 << np.arange(12, dtype=np.int64))
    assert (idx == np.arange(4096)).all()


def _bp_identities():
    rng = np.random.default_rng(3)
    for _ in range(200):
        probs = rng.random(rng.integers(0, 9))
        even = bp_mod.parity_even_prob(probs)
        odd = bp_mod.parity_odd_prob(probs)
        assert even + odd == 1.0


def _roundtrips(trials, seed):
    lat = build_lattice(1)
    config = DecoderConfig()
    for t in range(trials):
        rng = trial_rng(seed, 0, t)
        error = (rng.random(lat.n_qubits) < 0.05).astype(np.uint8)
        syndrome = lat.syndrome_of(error)
        if not syndrome.any():
            continue
        result = decode(lat, syndrome, 0.05, config, error=error)
        assert not result.syndrome_mismatch, "syndrome mismatch"
        assert (lat.syndrome_of(result.correction) == syndrome).all()
