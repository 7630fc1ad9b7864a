"""Decoder estimators with a scikit-learn surface (fit / predict / get_params).

Every decoder maps received channel samples of shape (n_words, n_code_bits)
to source-bit estimates of shape (n_words, n_source_bits).  Classical
decoders need no training data, so their ``fit`` just precomputes lookup
structures; the neural decoders train a network against the codebook passed
at construction (or against codeword/source arrays given to ``fit``).

``predict`` takes the received samples plus the channel noise level where the
decoder needs it (the neural decoders scale their soft inputs by it); the
classical decoders accept and ignore it, so the evaluation harness can treat
all decoders uniformly.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .bits import pack_bits, unpack_bits
from .channel import llr
from .codebook import Codebook
from .nn.model import ArchitectureSpec, NeuralModel, build
from .validation import as_sample_matrix

__all__ = [
    "TableLookupDecoder",
    "MaximumLikelihoodDecoder",
    "ExhaustiveMapDecoder",
    "MLPDecoder",
    "CNNDecoder",
    "load_decoder",
]


class _CodebookDecoder(BaseEstimator):
    """Shared input plumbing for decoders built over a codebook."""

    default_label = "decoder"

    def _check_fitted(self):
        if not getattr(self, "_fitted", False):
            raise RuntimeError(f"{type(self).__name__} must be fit before predicting")

    def _received(self, received):
        return as_sample_matrix(received, self.codebook.total_code_bits)

    def _source_bits(self, src_idx):
        """(B, frames) source values -> (B, k*frames) bits."""
        b = src_idx.shape[0]
        return unpack_bits(src_idx, self.codebook.k).reshape(b, -1)

    def predict(self, received, noise_std=None):
        raise NotImplementedError

    def score(self, received, source_bits, noise_std=None):
        """Fraction of correctly decoded source bits."""
        estimate = self.predict(received, noise_std=noise_std)
        truth = np.asarray(source_bits, dtype=np.uint8).reshape(estimate.shape)
        return float(np.mean(estimate == truth))


class TableLookupDecoder(_CodebookDecoder):
    """Hard-decision table lookup with nearest-codeword fallback.

    Each frame's hard bits are looked up directly; a word absent from the
    table decodes to the entry at minimum Hamming distance, ties broken
    toward the smallest source word.
    """

    default_label = "lookup"

    def __init__(self, codebook: Codebook):
        self.codebook = codebook

    def fit(self, X=None, y=None):
        cb = self.codebook
        words = unpack_bits(np.arange(1 << cb.n), cb.n)  # every possible hard word
        luts = np.empty((cb.frames, 1 << cb.n), dtype=np.int64)
        dists = np.empty((cb.frames, 1 << cb.n), dtype=np.int64)
        for f in range(cb.frames):
            table = cb.frame_tables[f]
            hamming = (words[:, None, :] != table[None, :, :]).sum(axis=2)
            luts[f] = hamming.argmin(axis=1)  # first minimum = lowest source value
            dists[f] = hamming.min(axis=1)
        self.decode_lut_ = luts
        self.distance_lut_ = dists
        self._fitted = True
        return self

    def predict(self, received, noise_std=None):
        bits, _ = self.decode_with_distances(received, noise_std)
        return bits

    def decode_with_distances(self, received, noise_std=None):
        """Decoded bits plus the per-frame Hamming distance actually achieved."""
        self._check_fitted()
        r, single = self._received(received)
        cb = self.codebook
        hard = (r >= 0.5).astype(np.uint8).reshape(-1, cb.frames, cb.n)
        packed = pack_bits(hard)  # (B, frames)
        frame_ix = np.arange(cb.frames)[None, :]
        src_idx = self.decode_lut_[frame_ix, packed]
        distances = self.distance_lut_[frame_ix, packed]
        bits = self._source_bits(src_idx)
        if single:
            return bits[0], distances[0]
        return bits, distances


class MaximumLikelihoodDecoder(_CodebookDecoder):
    """Frame-wise minimum squared-Euclidean-distance decoding of soft samples.

    With equiprobable source words this is maximum a posteriori decoding.
    Ties (a measure-zero event under continuous noise) break toward the
    smallest source word.
    """

    default_label = "ml"

    def __init__(self, codebook: Codebook):
        self.codebook = codebook

    def fit(self, X=None, y=None):
        cb = self.codebook
        self.levels_ = cb.frame_tables.astype(np.float64)  # (frames, 16, n)
        self.energy_ = (self.levels_**2).sum(axis=2)  # (frames, 16)
        self._fitted = True
        return self

    def predict(self, received, noise_std=None):
        bits, _ = self.decode_with_distances(received, noise_std)
        return bits

    def decode_with_distances(self, received, noise_std=None):
        """Decoded bits plus the per-frame squared distance actually achieved."""
        self._check_fitted()
        r, single = self._received(received)
        cb = self.codebook
        rf = r.reshape(-1, cb.frames, cb.n)
        src_idx = np.empty((rf.shape[0], cb.frames), dtype=np.int64)
        distances = np.empty((rf.shape[0], cb.frames))
        for f in range(cb.frames):
            # ||r - c||^2 = ||r||^2 - 2 r.c + ||c||^2; the ||r||^2 term is
            # constant per word, so the argmin only needs the other two.
            scores = self.energy_[f] - 2.0 * rf[:, f, :] @ self.levels_[f].T
            src_idx[:, f] = scores.argmin(axis=1)
            chosen = self.levels_[f][src_idx[:, f]]
            distances[:, f] = ((rf[:, f, :] - chosen) ** 2).sum(axis=1)
        bits = self._source_bits(src_idx)
        if single:
            return bits[0], distances[0]
        return bits, distances


class ExhaustiveMapDecoder(_CodebookDecoder):
    """Brute-force argmin over every concatenated codeword.

    Exists as an oracle: squared Euclidean distance is additive over frames,
    so this must agree with frame-wise maximum-likelihood decoding on every
    input.  Enumeration is capped at five frames (2**20 codewords).
    """

    default_label = "map"

    MAX_FRAMES = 5

    def __init__(self, codebook: Codebook):
        self.codebook = codebook

    def fit(self, X=None, y=None):
        cb = self.codebook
        if cb.frames > self.MAX_FRAMES:
            raise ValueError(
                f"{cb.frames} frames give {cb.n_mappings} codewords, too many to enumerate"
            )
        code, source = cb.rows_for_indices(np.arange(cb.n_mappings))
        self.levels_ = code.astype(np.float64)
        self.energy_ = (self.levels_**2).sum(axis=1)
        self.sources_ = source
        self._fitted = True
        return self

    def predict(self, received, noise_std=None):
        self._check_fitted()
        r, single = self._received(received)
        out = np.empty((r.shape[0], self.codebook.total_source_bits), dtype=np.uint8)
        # chunk the batch so the (B, 2**(4 frames)) score matrix stays small
        chunk = max(1, 2**22 // self.levels_.shape[0])
        for lo in range(0, r.shape[0], chunk):
            block = r[lo : lo + chunk]
            scores = self.energy_ - 2.0 * block @ self.levels_.T
            out[lo : lo + chunk] = self.sources_[scores.argmin(axis=1)]
        return out[0] if single else out


class _NeuralDecoder(_CodebookDecoder):
    """Common fit/predict machinery for the trained decoders.

    ``fit()`` with no arguments derives the training pairs from the codebook;
    ``fit(X, y)`` trains on explicit (codeword bits, source bits) arrays.
    Training pushes each batch through modulation, fresh noise at the training
    SNR, and the soft detector before the network sees it.
    """

    kind = None

    def __init__(self, codebook=None, hidden=(32, 16, 8), train_snr_db=1.0,
                 epochs=20000, batch_size=None, lr=1e-3, seed=0,
                 convergence_window=50, convergence_eps=1e-5, snr_convention="ebn0"):
        self.codebook = codebook
        self.hidden = hidden
        self.train_snr_db = train_snr_db
        self.epochs = epochs
        self.batch_size = batch_size
        self.lr = lr
        self.seed = seed
        self.convergence_window = convergence_window
        self.convergence_eps = convergence_eps
        self.snr_convention = snr_convention

    def fit(self, X=None, y=None):
        from .channel import ChannelModel
        from .training import TrainingConfig, train

        if X is None and self.codebook is None:
            raise ValueError("fit needs a codebook or explicit (codewords, sources) arrays")
        if X is not None:
            X = np.asarray(X, dtype=np.uint8)
            y = np.asarray(y, dtype=np.uint8)
            input_len, output_len = X.shape[1], y.shape[1]
            data = (X, y)
            rate = output_len / input_len
        else:
            input_len = self.codebook.total_code_bits
            output_len = self.codebook.total_source_bits
            data = self.codebook
            rate = self.codebook.rate
        spec = ArchitectureSpec(self.kind, tuple(self.hidden), input_len, output_len)
        model = build(spec, init_seed=self.seed)
        channel = ChannelModel(self.train_snr_db, self.snr_convention, rate)
        cfg = TrainingConfig(
            train_snr_db=self.train_snr_db,
            epochs=self.epochs,
            batch_size=self.batch_size,
            lr=self.lr,
            seed=self.seed,
            convergence_window=self.convergence_window,
            convergence_eps=self.convergence_eps,
        )
        result = train(model, data, cfg, channel)
        self.model_ = model
        self.loss_history_ = result.loss_history
        self.epochs_run_ = result.epochs_run
        self.stop_reason_ = result.stop_reason
        self._fitted = True
        return self

    def predict(self, received, noise_std=None):
        self._check_fitted()
        if noise_std is None:
            raise ValueError("noise_std is required to scale the soft decoder inputs")
        r, single = as_sample_matrix(received, self.model_.spec.input_len)
        soft = llr(r, noise_std)
        out = self.model_.forward(soft)
        bits = (out >= 0.5).astype(np.uint8)
        return bits[0] if single else bits

    def save(self, path):
        self._check_fitted()
        self.model_.save(path, meta={
            "train_snr_db": self.train_snr_db,
            "seed": self.seed,
            "epochs": getattr(self, "epochs_run_", None),
        })


class MLPDecoder(_NeuralDecoder):
    """Three-hidden-layer fully connected decoder with a sigmoid output head."""

    kind = "mlp"
    default_label = "mlp"


class CNNDecoder(_NeuralDecoder):
    """Three width-3 convolutional layers (first unpadded), flatten, dense head."""

    kind = "cnn"
    default_label = "cnn"


def load_decoder(path, codebook=None):
    """Rebuild a fitted neural decoder from a checkpoint file."""
    model, meta = NeuralModel.load(path)
    cls = MLPDecoder if model.spec.kind == "mlp" else CNNDecoder
    decoder = cls(
        codebook=codebook,
        hidden=model.spec.hidden,
        train_snr_db=meta.get("train_snr_db") if meta.get("train_snr_db") is not None else 1.0,
        seed=meta.get("seed") if meta.get("seed") is not None else 0,
    )
    decoder.model_ = model
    decoder.epochs_run_ = meta.get("epochs")
    decoder._fitted = True
    return decoder
