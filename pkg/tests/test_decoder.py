import itertools

import numpy as np
import pytest

from colorcode_rg.bp import independent_pair_tables
from colorcode_rg.decoder import (
    DecoderConfig,
    base_decode,
    decode,
    lattice_chain,
    oracle_mld,
)
from colorcode_rg.lattice import build_lattice
from colorcode_rg.noise import sample_error, single_qubit_frame, trial_rng


def test_all_even_syndrome_gives_empty_correction():
    lat = build_lattice(1)
    syn = np.zeros(lat.n_stabilizers, dtype=np.uint8)
    result = decode(lat, syn, 0.05, DecoderConfig())
    assert not result.correction.any()
    assert not result.syndrome_mismatch


def test_every_weight_one_error_succeeds():
    lat = build_lattice(1)
    cfg = DecoderConfig()
    for q in range(lat.n_qubits):
        error = single_qubit_frame(lat, q)
        result = decode(lat, lat.syndrome_of(error), 0.05, cfg, error=error)
        assert result.success, f"weight-1 error on qubit {q} failed"


def test_decode_rejects_inconsistent_syndrome():
    lat = build_lattice(1)
    syn = np.zeros(lat.n_stabilizers, dtype=np.uint8)
    syn[0] = 1
    with pytest.raises(ValueError, match="inconsistent"):
        decode(lat, syn, 0.05)


def test_decode_deterministic():
    lat = build_lattice(1)
    cfg = DecoderConfig()
    for t in range(10):
        error = sample_error(lat, 0.07, trial_rng(4, 0, t))
        syn = lat.syndrome_of(error)
        a = decode(lat, syn, 0.07, cfg)
        b = decode(lat, syn, 0.07, cfg)
        assert (a.correction == b.correction).all()


def test_decode_base_lattice_directly():
    # the distance-2 base code only detects weight-1 errors; the decode must
    # still return a syndrome-matching minimum-weight frame
    lat = build_lattice(0)
    cfg = DecoderConfig()
    for q in range(lat.n_qubits):
        error = single_qubit_frame(lat, q)
        result = decode(lat, lat.syndrome_of(error), 0.05, cfg, error=error)
        assert result.correction.sum() == 1
        assert (lat.syndrome_of(result.correction) == lat.syndrome_of(error)).all()


def test_base_decode_examples():
    lat = build_lattice(0)
    tables = independent_pair_tables(lat, np.full(8, 0.1))
    assert not base_decode(lat, np.zeros(4, dtype=np.uint8), tables).any()
    frame = single_qubit_frame(lat, 3)
    syn = lat.syndrome_of(frame)
    out = base_decode(lat, syn, tables)
    # all four qubits of the flipped square share this syndrome; the
    # tie-break picks the lexicographically smallest weight-1 bit string
    # (bit 0 read first), which sets the highest of the tied indices
    assert out.sum() == 1
    assert (lat.syndrome_of(out) == syn).all()
    assert out[3] == 1


def test_base_decode_matches_oracle_on_random_beliefs():
    lat = build_lattice(0)
    rng = np.random.default_rng(8)
    frames = ((np.arange(256)[:, None] >> np.arange(8)) & 1).astype(np.uint8)
    syndromes = {tuple(lat.syndrome_of(f)) for f in frames}
    assert len(syndromes) == 4  # rank-2 check matrix on the torus
    for syn in syndromes:
        syn = np.array(syn, dtype=np.uint8)
        for _ in range(50):
            probs = rng.uniform(0.01, 0.49, 8)
            got = base_decode(lat, syn, independent_pair_tables(lat, probs))
            want = oracle_mld(lat, syn, probs)
            assert (got == want).all()


def test_oracle_mld_guards():
    lat = build_lattice(0)
    assert not oracle_mld(lat, np.zeros(4, dtype=np.uint8), np.full(8, 0.2)).any()
    with pytest.raises(ValueError, match="24"):
        oracle_mld(build_lattice(1), np.zeros(36, dtype=np.uint8), np.full(72, 0.1))
    bad = np.zeros(4, dtype=np.uint8)
    bad[0] = 1
    with pytest.raises(ValueError, match="realizable"):
        oracle_mld(lat, bad, np.full(8, 0.1))


def test_unrealizable_base_syndromes_rejected_everywhere():
    lat = build_lattice(0)
    tables = independent_pair_tables(lat, np.full(8, 0.1))
    realizable = set()
    for bits in itertools.product((0, 1), repeat=8):
        frame = np.array(bits, dtype=np.uint8)
        realizable.add(tuple(lat.syndrome_of(frame)))
    for syn_bits in itertools.product((0, 1), repeat=4):
        syn = np.array(syn_bits, dtype=np.uint8)
        if tuple(syn) in realizable:
            base_decode(lat, syn, tables)
        else:
            with pytest.raises(ValueError):
                base_decode(lat, syn, tables)
            with pytest.raises(ValueError):
                oracle_mld(lat, syn, np.full(8, 0.1))


def test_failure_rate_monotone_in_p():
    """Success rate does not increase with p (3 sigma)."""
    lat = build_lattice(1)
    cfg = DecoderConfig()
    rates = []
    trials = 600
    for p in (0.02, 0.10):
        fails = 0
        for t in range(trials):
            error = sample_error(lat, p, trial_rng(31, 0, t))
            syn = lat.syndrome_of(error)
            if not syn.any():
                fails += int(lat.logical_failure(error).any())
                continue
            result = decode(lat, syn, p, cfg, error=error)
            fails += int(not result.success)
        rates.append(fails / trials)
    lo, hi = rates
    sigma = np.sqrt(lo * (1 - lo) / trials + hi * (1 - hi) / trials)
    assert hi - lo > -3 * sigma


def test_decode_result_evaluate_marks_mismatch_as_failure():
    from colorcode_rg.decoder import DecodeResult

    lat = build_lattice(1)
    res = DecodeResult(correction=np.zeros(72, dtype=np.uint8), flags=None,
                       success=None, syndrome_mismatch=True)
    res.evaluate(lat, np.zeros(72, dtype=np.uint8))
    assert res.success is False
    assert (res.flags == 1).all()


def test_lattice_chain_cached_and_shared():
    a = lattice_chain(2)
    b = lattice_chain(2)
    assert a is b
    lattices, cellmaps = a
    assert [lat.m for lat in lattices] == [0, 1, 2]
    assert cellmaps[0] is None and cellmaps[1].m == 1 and cellmaps[2].m == 2
