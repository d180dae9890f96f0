"""Scikit-learn style facade over the rescaling decoder.

``RescalingDecoder`` is predict-shaped: syndromes in, corrections out.  It
carries its configuration as constructor parameters (so ``get_params`` /
``set_params`` / ``clone`` compose with sklearn tooling) and builds the
immutable lattice chain and cell table in ``fit``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .cell import get_cell_table
from .decoder import DecoderConfig, decode, lattice_chain
from .lattice import build_lattice
from .validation import check_probability, check_syndrome_matrix


class RescalingDecoder(BaseEstimator):
    """Decoder for the level-m 4.8.8 toric color code under bit-flip noise.

    Parameters
    ----------
    m : int
        Rescaling level; the code has 8 * 9^m qubits.
    p_prior : float
        Prior physical error probability fed to belief propagation.
    bp_rounds, split_rounds, mode, sigma_cutoff
        Decoder knobs, see :class:`colorcode_rg.decoder.DecoderConfig`.
    """

    def __init__(self, m=1, p_prior=0.05, bp_rounds=2, split_rounds=15,
                 mode="single", sigma_cutoff=1e-6):
        self.m = m
        self.p_prior = p_prior
        self.bp_rounds = bp_rounds
        self.split_rounds = split_rounds
        self.mode = mode
        self.sigma_cutoff = sigma_cutoff

    def fit(self, X=None, y=None):
        """Build the lattice chain and cell lookup table. X/y are ignored."""
        check_probability(self.p_prior, "p_prior")
        self.lattice_ = build_lattice(self.m)
        lattice_chain(self.m)
        get_cell_table()
        self.config_ = DecoderConfig(
            bp_rounds=self.bp_rounds, split_rounds=self.split_rounds,
            mode=self.mode, sigma_cutoff=self.sigma_cutoff)
        self.n_qubits_ = self.lattice_.n_qubits
        self.n_stabilizers_ = self.lattice_.n_stabilizers
        return self

    def _check_fitted(self):
        if not hasattr(self, "lattice_"):
            raise NotFittedError("call fit() before using the decoder")

    def predict(self, S) -> np.ndarray:
        """Corrections for a batch of syndromes, shape (n_samples, n_qubits)."""
        self._check_fitted()
        S = check_syndrome_matrix(S, self.n_stabilizers_)
        out = np.zeros((S.shape[0], self.n_qubits_), dtype=np.uint8)
        for i, syndrome in enumerate(S):
            out[i] = self.decode_result(syndrome).correction
        return out

    def decode_result(self, syndrome):
        """Full decode of one syndrome with diagnostics."""
        self._check_fitted()
        return decode(self.lattice_, syndrome, self.p_prior, self.config_)

    def score(self, S, E) -> float:
        """Fraction of (syndrome, error) pairs corrected without logical
        failure; a convenience for cross-validation style checks."""
        self._check_fitted()
        S = check_syndrome_matrix(S, self.n_stabilizers_)
        E = np.asarray(E, dtype=np.uint8)
        if E.shape != (S.shape[0], self.n_qubits_):
            raise ValueError("errors must have shape (n_samples, n_qubits)")
        ok = 0
        for syndrome, error in zip(S, E):
            result = decode(self.lattice_, syndrome, self.p_prior, self.config_,
                            error=error)
            ok += int(result.success)
        return ok / max(1, S.shape[0])
