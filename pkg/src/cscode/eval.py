"""Monte-Carlo BER measurement over SNR sweeps.

All decoders at a given SNR point decode the same noisy frames (common random
numbers), which sharpens estimated gaps between curves.  Frames are processed
in fixed-size chunks; each chunk draws its generator from a spawn of the
point's seed sequence, so results are byte-identical across runs and
independent of the worker-thread count.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .channel import snr_to_sigma
from .codebook import Codebook

__all__ = [
    "BerPoint",
    "SweepConfig",
    "measure_ber",
    "sweep",
    "extract_curve",
    "db_gap_at_ber",
    "points_to_csv",
    "points_to_json",
]


@dataclass(frozen=True)
class BerPoint:
    decoder_id: str
    snr_db: float
    frames_sent: int
    bits_sent: int
    bit_errors: int
    ber: float
    stderr: float  # ber / sqrt(bit_errors), the relative Monte-Carlo error scale


@dataclass(frozen=True)
class SweepConfig:
    snr_start: float = 0.0
    snr_stop: float = 8.0
    snr_step: float = 1.0
    min_errors: int = 100
    max_frames: int = 10_000_000
    seed: int = 0
    chunk_frames: int = 8192
    convention: str = "ebn0"
    threads: int = 1

    def __post_init__(self):
        if self.snr_step <= 0:
            raise ValueError("snr_step must be > 0")
        if self.min_errors < 1:
            raise ValueError("min_errors must be >= 1")
        if self.snr_stop < self.snr_start:
            raise ValueError("snr_stop must be >= snr_start")

    def grid(self) -> list[float]:
        count = int(np.floor((self.snr_stop - self.snr_start) / self.snr_step + 0.5)) + 1
        return [self.snr_start + i * self.snr_step for i in range(count)]


def _decode_chunk(decoders, codebook, sigma, n_frames, seed):
    """Generate one shared noisy batch and decode it with every decoder."""
    rng = np.random.default_rng(seed)
    source = rng.integers(0, 2, size=(n_frames, codebook.total_source_bits), dtype=np.uint8)
    samples = codebook.encode(source).astype(np.float64)
    samples += rng.normal(0.0, sigma, size=samples.shape)
    errors = []
    for _label, decoder in decoders:
        estimate = decoder.predict(samples, noise_std=sigma)
        errors.append(int(np.count_nonzero(estimate != source)))
    return errors


def _measure_point(decoders, codebook, snr_db, sigma, cfg: SweepConfig, seed_seq):
    """BerPoints for one SNR, stopping once every decoder has min_errors."""
    bits_per_frame = codebook.total_source_bits
    totals = [0] * len(decoders)
    frames_sent = 0

    def chunk_plan():
        remaining = cfg.max_frames
        while remaining > 0:
            n = min(cfg.chunk_frames, remaining)
            remaining -= n
            yield n, seed_seq.spawn(1)[0]

    def run(args):
        n, seq = args
        return n, _decode_chunk(decoders, codebook, sigma, n, seq)

    def fold(results):
        nonlocal frames_sent
        for n, errs in results:
            frames_sent += n
            for i, e in enumerate(errs):
                totals[i] += e
            if min(totals) >= cfg.min_errors:
                return True
        return False

    plan = chunk_plan()
    if cfg.threads > 1:
        # Chunks are independent and consumed in submission order, so the
        # totals match a sequential run for any thread count.
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            done = False
            while not done:
                wave = []
                for _ in range(cfg.threads):
                    try:
                        wave.append(next(plan))
                    except StopIteration:
                        break
                if not wave:
                    break
                for n, errs in pool.map(run, wave):
                    frames_sent += n
                    for i, e in enumerate(errs):
                        totals[i] += e
                    if min(totals) >= cfg.min_errors:
                        done = True
                        break
    else:
        for item in plan:
            if fold([run(item)]):
                break

    points = []
    bits_sent = frames_sent * bits_per_frame
    for (label, _), errors in zip(decoders, totals):
        ber = errors / bits_sent if bits_sent else 0.0
        stderr = ber / np.sqrt(errors) if errors else 0.0
        points.append(BerPoint(
            decoder_id=label, snr_db=float(snr_db), frames_sent=frames_sent,
            bits_sent=bits_sent, bit_errors=errors, ber=ber, stderr=float(stderr),
        ))
    return points


def _normalize_decoders(decoders):
    out = []
    for item in decoders:
        if isinstance(item, tuple):
            out.append((str(item[0]), item[1]))
        else:
            out.append((getattr(item, "default_label", type(item).__name__), item))
    labels = [label for label, _ in out]
    if len(set(labels)) != len(labels):
        raise ValueError(f"decoder labels must be unique, got {labels}")
    return out


def sweep(decoders, codebook: Codebook, cfg: SweepConfig, snrs=None) -> list[BerPoint]:
    """BER of every decoder at every SNR with shared noise per point.

    All decoders keep decoding a point's shared frames until the slowest of
    them has collected ``min_errors`` errors (or the frame cap is hit), so
    each pair of curves is comparable frame by frame.
    """
    decoders = _normalize_decoders(decoders)
    grid = list(snrs) if snrs is not None else cfg.grid()
    root = np.random.SeedSequence(cfg.seed)
    children = root.spawn(len(grid))
    points = []
    for snr_db, seq in zip(grid, children):
        sigma = snr_to_sigma(snr_db, cfg.convention)
        points.extend(_measure_point(decoders, codebook, snr_db, sigma, cfg, seq))
    return points


def measure_ber(decoder, codebook: Codebook, snr_db: float, *, min_errors: int = 100,
                max_frames: int = 10_000_000, seed: int = 0, chunk_frames: int = 8192,
                convention: str = "ebn0", threads: int = 1,
                decoder_id: str | None = None) -> BerPoint:
    """Monte-Carlo BER of one decoder at one SNR."""
    label = decoder_id or getattr(decoder, "default_label", type(decoder).__name__)
    cfg = SweepConfig(
        snr_start=snr_db, snr_stop=snr_db, min_errors=min_errors, max_frames=max_frames,
        seed=seed, chunk_frames=chunk_frames, convention=convention, threads=threads,
    )
    return sweep([(label, decoder)], codebook, cfg, snrs=[snr_db])[0]


def extract_curve(points, decoder_id: str) -> list[BerPoint]:
    curve = sorted(
        (p for p in points if p.decoder_id == decoder_id), key=lambda p: p.snr_db
    )
    if not curve:
        raise ValueError(f"no points for decoder {decoder_id!r}")
    return curve


def _snr_at_ber(curve, target: float) -> float:
    """SNR where the curve crosses the target BER, log-linear interpolation."""
    pts = [(p.snr_db, p.ber) for p in curve if p.ber > 0.0]
    if len(pts) < 2:
        raise ValueError("curve has fewer than two nonzero-BER points")
    logt = np.log10(target)
    for (s0, b0), (s1, b1) in zip(pts, pts[1:]):
        l0, l1 = np.log10(b0), np.log10(b1)
        if (l0 - logt) * (l1 - logt) <= 0.0 and l0 != l1:
            return s0 + (s1 - s0) * (l0 - logt) / (l0 - l1)
    raise ValueError(
        f"target BER {target} is outside the curve's range "
        f"[{min(b for _, b in pts):.3g}, {max(b for _, b in pts):.3g}]"
    )


def db_gap_at_ber(curve_a, curve_b, target_ber: float) -> float:
    """Horizontal gap in dB between two curves at the target BER.

    Positive when curve_a needs more SNR than curve_b to reach the target.
    """
    return _snr_at_ber(curve_a, target_ber) - _snr_at_ber(curve_b, target_ber)


def points_to_csv(points) -> str:
    lines = ["decoder,snr_db,frames,bits,bit_errors,ber,stderr"]
    for p in points:
        lines.append(
            f"{p.decoder_id},{p.snr_db!r},{p.frames_sent},{p.bits_sent},"
            f"{p.bit_errors},{p.ber!r},{p.stderr!r}"
        )
    return "\n".join(lines) + "\n"


def points_to_json(points) -> str:
    return json.dumps([asdict(p) for p in points], indent=2, sort_keys=True) + "\n"
