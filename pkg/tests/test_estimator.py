import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from colorcode_rg.estimator import RescalingDecoder
from colorcode_rg.lattice import build_lattice
from colorcode_rg.noise import sample_error, trial_rng


def test_get_params_and_clone():
    dec = RescalingDecoder(m=1, p_prior=0.03, bp_rounds=2)
    params = dec.get_params()
    assert params["m"] == 1 and params["p_prior"] == 0.03 and params["bp_rounds"] == 2
    twin = clone(dec)
    assert twin.get_params() == params
    dec.set_params(split_rounds=10)
    assert dec.split_rounds == 10


def test_requires_fit():
    dec = RescalingDecoder(m=1)
    with pytest.raises(NotFittedError):
        dec.predict(np.zeros((1, 36), dtype=np.uint8))


def test_predict_corrections_match_syndromes():
    lat = build_lattice(1)
    dec = RescalingDecoder(m=1, p_prior=0.05).fit()
    assert dec.n_qubits_ == 72 and dec.n_stabilizers_ == 36
    errors = np.stack([sample_error(lat, 0.05, trial_rng(1, 0, t)) for t in range(8)])
    syndromes = np.stack([lat.syndrome_of(e) for e in errors])
    out = dec.predict(syndromes)
    assert out.shape == (8, 72) and out.dtype == np.uint8
    for syn, corr in zip(syndromes, out):
        assert (lat.syndrome_of(corr) == syn).all()
    # single syndrome works too
    single = dec.predict(syndromes[0])
    assert (single[0] == out[0]).all()


def test_predict_validates_shapes():
    dec = RescalingDecoder(m=1).fit()
    with pytest.raises(ValueError, match="shape"):
        dec.predict(np.zeros((2, 35), dtype=np.uint8))
    with pytest.raises(ValueError, match="binary"):
        dec.predict(np.full((1, 36), 3))
    with pytest.raises(ValueError):
        RescalingDecoder(m=1, p_prior=1.5).fit()


def test_score_counts_successes():
    lat = build_lattice(1)
    dec = RescalingDecoder(m=1, p_prior=0.02).fit()
    errors = np.stack([sample_error(lat, 0.02, trial_rng(2, 0, t)) for t in range(10)])
    syndromes = np.stack([lat.syndrome_of(e) for e in errors])
    score = dec.score(syndromes, errors)
    assert 0.0 <= score <= 1.0
    assert score > 0.5  # far below the pseudothreshold
