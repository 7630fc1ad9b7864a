"""Noise-in-the-loop training and NVE-based model selection.

Training data is the set of all noiseless codewords; fresh noise is drawn at
the training SNR every time a codeword is presented, so the effective data
set never repeats.  Codebooks up to four frames are materialized; the
five-frame codebook (2**20 mappings) is sampled uniformly by minibatch
instead, which has the same expected gradient without holding full epochs in
memory.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelModel, llr
from .codebook import Codebook
from .nn.optim import Adam

__all__ = [
    "TrainingConfig",
    "TrainResult",
    "TrainingDiverged",
    "NveReport",
    "training_set",
    "train",
    "compute_nve",
    "nve_select",
]

# Largest codebook whose full training set is materialized (16**4 rows).
MATERIALIZE_LIMIT = 65536


class TrainingDiverged(RuntimeError):
    """Raised when the training loss stops being finite."""


@dataclass(frozen=True)
class TrainingConfig:
    train_snr_db: float = 1.0
    epochs: int = 20000
    batch_size: int | None = None  # None: full set, capped at 4096
    lr: float = 1e-3
    seed: int = 0
    convergence_window: int = 50  # 0 disables early stopping
    convergence_eps: float = 1e-5


@dataclass
class TrainResult:
    loss_history: list = field(default_factory=list)
    epochs_run: int = 0
    stop_reason: str = ""  # "converged" or "epoch_cap"


def training_set(cb: Codebook) -> tuple[np.ndarray, np.ndarray]:
    """One (codeword bits, source bits) pair per codebook mapping."""
    return cb.rows_for_indices(np.arange(cb.n_mappings))


def _converged(history, window, eps):
    if window <= 0 or len(history) < 2 * window:
        return False
    prev = float(np.mean(history[-2 * window : -window]))
    cur = float(np.mean(history[-window:]))
    return prev - cur < eps * max(prev, 1e-12)


def train(model, data, cfg: TrainingConfig, channel: ChannelModel) -> TrainResult:
    """Train ``model`` in place; returns the per-epoch loss history.

    ``data`` is either a Codebook or an explicit ``(codewords, sources)``
    pair.  Each step modulates a batch of codewords, adds fresh noise at the
    training SNR, computes soft bit ratios, and takes one Adam step on the
    batch-averaged MSE against the source bits.  Training stops at the epoch
    cap or when the mean loss over the last ``convergence_window`` epochs
    stops improving by ``convergence_eps`` relative; in sampled mode (large
    codebooks) each step counts as one epoch.
    """
    rng = np.random.default_rng(cfg.seed)
    sigma = channel.sigma
    sampled = False
    codebook = None
    if isinstance(data, Codebook):
        codebook = data
        if codebook.n_mappings <= MATERIALIZE_LIMIT:
            x_all, y_all = training_set(codebook)
        else:
            sampled = True
            x_all = y_all = None
    else:
        x_all, y_all = data
        x_all = np.asarray(x_all, dtype=np.uint8)
        y_all = np.asarray(y_all, dtype=np.uint8)

    if sampled:
        batch = cfg.batch_size or 512
    else:
        n_rows = x_all.shape[0]
        batch = cfg.batch_size or min(n_rows, 4096)
        if batch > n_rows:
            raise ValueError(f"batch_size {batch} exceeds the {n_rows}-row training set")

    adam = Adam(model.params(), lr=cfg.lr)
    result = TrainResult()

    def step(xb, yb):
        noisy = xb.astype(np.float64) + rng.normal(0.0, sigma, size=xb.shape)
        soft = llr(noisy, sigma)
        loss, grads = model.backward(soft, yb.astype(np.float64))
        if not np.isfinite(loss):
            raise TrainingDiverged(
                f"loss became non-finite at epoch {len(result.loss_history) + 1}"
            )
        adam.step(grads)
        return loss

    for _epoch in range(cfg.epochs):
        if sampled:
            idx = rng.integers(0, codebook.n_mappings, size=batch)
            xb, yb = codebook.rows_for_indices(idx)
            epoch_loss = step(xb, yb)
        elif batch == n_rows:
            epoch_loss = step(x_all, y_all)
        else:
            order = rng.permutation(n_rows)
            losses = []
            for lo in range(0, n_rows, batch):
                take = order[lo : lo + batch]
                losses.append(step(x_all[take], y_all[take]))
            epoch_loss = float(np.mean(losses))
        result.loss_history.append(epoch_loss)
        if _converged(result.loss_history, cfg.convergence_window, cfg.convergence_eps):
            result.stop_reason = "converged"
            break
    else:
        result.stop_reason = "epoch_cap"
    result.epochs_run = len(result.loss_history)
    return result


# -- normalized validation error ------------------------------------------


@dataclass(frozen=True)
class NveReport:
    train_snr_db: float
    validation_snrs: tuple
    ber_dnn: tuple
    ber_map: tuple
    nve: float


def compute_nve(ber_dnn, ber_map) -> float:
    """Mean over validation SNRs of BER(decoder) / BER(reference)."""
    ber_dnn = np.asarray(ber_dnn, dtype=np.float64)
    ber_map = np.asarray(ber_map, dtype=np.float64)
    if ber_dnn.shape != ber_map.shape or ber_dnn.size == 0:
        raise ValueError("BER vectors must be non-empty and the same length")
    if np.any(ber_map <= 0.0):
        raise ValueError(
            "reference BER is zero at some validation SNR; "
            "choose SNRs/sample counts that guarantee observed reference errors"
        )
    return float(np.mean(ber_dnn / ber_map))


def nve_select(candidates, validation_snrs, codebook, reference_decoder, *,
               min_errors: int = 100, max_frames: int = 10**6, seed: int = 0,
               snr_convention: str = "ebn0", threads: int = 1):
    """Pick the candidate with the lowest normalized validation error.

    ``candidates`` is a sequence of ``(train_snr_db, decoder)`` pairs; the
    reference decoder (normally maximum-likelihood) supplies the denominator.
    Candidate and reference decode the same noisy frames at every validation
    SNR, so the reference's own NVE is exactly 1.
    """
    from .eval import SweepConfig, sweep

    validation_snrs = tuple(float(s) for s in validation_snrs)
    if not validation_snrs:
        raise ValueError("validation grid is empty")
    reports = []
    for train_snr_db, decoder in candidates:
        cfg = SweepConfig(
            snr_start=min(validation_snrs), snr_stop=max(validation_snrs), snr_step=1.0,
            min_errors=min_errors, max_frames=max_frames, seed=seed,
            convention=snr_convention, threads=threads,
        )
        points = sweep(
            [("candidate", decoder), ("reference", reference_decoder)],
            codebook, cfg, snrs=validation_snrs,
        )
        ber_dnn = tuple(p.ber for p in points if p.decoder_id == "candidate")
        ber_map = tuple(p.ber for p in points if p.decoder_id == "reference")
        reports.append(NveReport(
            train_snr_db=float(train_snr_db),
            validation_snrs=validation_snrs,
            ber_dnn=ber_dnn,
            ber_map=ber_map,
            nve=compute_nve(ber_dnn, ber_map),
        ))
    best = int(np.argmin([r.nve for r in reports]))
    return best, reports
