"""The 4B6B balanced line code and concatenated/shuffled codebooks built from it.

The base table maps each 4-bit source word to a 6-bit codeword with exactly
three ones, which keeps the running digital sum bounded and limits runs of
identical bits to four across codeword boundaries.  Larger codebooks are
formed by concatenating per-frame copies of the table, optionally with the
codeword column of each frame shuffled by a seeded permutation.
"""

from __future__ import annotations

import json

import numpy as np

from .bits import as_bits, format_bits, pack_bits, unpack_bits

__all__ = [
    "Codebook",
    "base_4b6b",
    "concat_4b6b",
    "shuffled_concat",
    "nearest_codeword",
    "FRAME_SOURCE_BITS",
    "FRAME_CODE_BITS",
]

FRAME_SOURCE_BITS = 4
FRAME_CODE_BITS = 6

# Source word -> codeword, in ascending source-word order.
_BASE_TABLE = (
    "001110",  # 0000
    "001101",  # 0001
    "010011",  # 0010
    "010110",  # 0011
    "010101",  # 0100
    "100011",  # 0101
    "100110",  # 0110
    "100101",  # 0111
    "011001",  # 1000
    "011010",  # 1001
    "011100",  # 1010
    "110001",  # 1011
    "110010",  # 1100
    "101001",  # 1101
    "101010",  # 1110
    "101100",  # 1111
)


def _base_matrix() -> np.ndarray:
    return np.array([[int(b) for b in w] for w in _BASE_TABLE], dtype=np.uint8)


class Codebook:
    """A bijective source-word -> codeword map over one or more 4B6B frames.

    ``frame_tables`` is a (frames, 16, 6) uint8 array; row s of frame f is the
    codeword assigned to the 4-bit source value s in that frame.  Codebooks
    are immutable after construction and safe to share between threads.
    """

    def __init__(self, frame_tables, permutation_seeds=()):
        tables = np.asarray(frame_tables, dtype=np.uint8)
        if tables.ndim == 2:
            tables = tables[None, :, :]
        if tables.ndim != 3:
            raise ValueError("frame_tables must have shape (frames, 2**k, n)")
        rows = tables.shape[1]
        if rows < 2 or rows & (rows - 1):
            raise ValueError("each frame table must have a power-of-two number of rows")
        if not np.all((tables == 0) | (tables == 1)):
            raise ValueError("frame tables must contain only bits")
        for f in range(tables.shape[0]):
            if len({format_bits(r) for r in tables[f]}) != rows:
                raise ValueError(f"frame {f} table is not a bijection: duplicate codewords")
        tables.setflags(write=False)
        self.frame_tables = tables
        self.permutation_seeds = tuple(int(s) for s in permutation_seeds)
        self.k = rows.bit_length() - 1
        self.n = tables.shape[2]
        self.frames = tables.shape[0]
        # per-frame inverse: packed codeword -> source value, -1 for invalid words
        inverse = np.full((self.frames, 1 << self.n), -1, dtype=np.int64)
        for f in range(self.frames):
            inverse[f, pack_bits(tables[f])] = np.arange(rows)
        inverse.setflags(write=False)
        self._inverse = inverse

    def __repr__(self):
        return (
            f"Codebook(k={self.k}, n={self.n}, frames={self.frames}, "
            f"seeds={self.permutation_seeds})"
        )

    def __eq__(self, other):
        return (
            isinstance(other, Codebook)
            and self.frame_tables.shape == other.frame_tables.shape
            and np.array_equal(self.frame_tables, other.frame_tables)
        )

    @property
    def total_source_bits(self) -> int:
        return self.k * self.frames

    @property
    def total_code_bits(self) -> int:
        return self.n * self.frames

    @property
    def n_mappings(self) -> int:
        return (1 << self.k) ** self.frames

    @property
    def rate(self) -> float:
        return self.k / self.n

    # -- encoding ---------------------------------------------------------

    def encode(self, source) -> np.ndarray:
        """Frame-wise table application; accepts one word or a batch.

        A 1-D input of k*frames bits returns a 1-D codeword of n*frames bits;
        a 2-D batch maps row-wise.
        """
        if isinstance(source, str):
            src = as_bits(source)
        else:
            src = np.asarray(source)
        single = src.ndim == 1
        rows = src[None, :] if single else src
        if rows.ndim != 2 or rows.shape[1] != self.total_source_bits:
            raise ValueError(
                f"source words must have {self.total_source_bits} bits, got shape {rows.shape}"
            )
        if rows.size and not np.all((rows == 0) | (rows == 1)):
            raise ValueError("source words must contain only bits")
        idx = pack_bits(rows.reshape(-1, self.frames, self.k))  # (B, frames)
        out = np.empty((rows.shape[0], self.frames, self.n), dtype=np.uint8)
        for f in range(self.frames):
            out[:, f, :] = self.frame_tables[f][idx[:, f]]
        out = out.reshape(rows.shape[0], self.total_code_bits)
        return out[0] if single else out

    def decode_exact(self, codeword):
        """Inverse lookup of a single full codeword; None if any frame misses."""
        word = as_bits(codeword, self.total_code_bits, "codeword")
        idx = pack_bits(word.reshape(self.frames, self.n))
        src = self._inverse[np.arange(self.frames), idx]
        if np.any(src < 0):
            return None
        return unpack_bits(src, self.k).reshape(-1)

    def source_values_for_codeword_values(self, packed: np.ndarray) -> np.ndarray:
        """Vectorized per-frame inverse on packed codewords; -1 where invalid."""
        return self._inverse[np.arange(self.frames)[None, :], packed]

    def rows_for_indices(self, indices) -> tuple[np.ndarray, np.ndarray]:
        """(codeword bits, source bits) for the given global mapping indices.

        Index i enumerates source words in ascending value, so the full
        codebook is ``rows_for_indices(np.arange(cb.n_mappings))`` without any
        table larger than one frame ever being materialized internally.
        """
        idx = np.asarray(indices, dtype=np.int64)
        shifts = self.k * np.arange(self.frames - 1, -1, -1)
        per_frame = (idx[:, None] >> shifts) & ((1 << self.k) - 1)  # (B, frames)
        code = np.empty((idx.size, self.frames, self.n), dtype=np.uint8)
        for f in range(self.frames):
            code[:, f, :] = self.frame_tables[f][per_frame[:, f]]
        source = unpack_bits(per_frame, self.k).reshape(idx.size, self.total_source_bits)
        return code.reshape(idx.size, self.total_code_bits), source

    # -- serialization ----------------------------------------------------

    def to_json(self) -> str:
        """Full codebook as JSON: {k, n, frames, seeds, mappings}."""
        code, source = self.rows_for_indices(np.arange(self.n_mappings))
        mappings = [
            [format_bits(source[i]), format_bits(code[i])] for i in range(self.n_mappings)
        ]
        doc = {
            "k": self.k,
            "n": self.n,
            "frames": self.frames,
            "seeds": list(self.permutation_seeds),
            "mappings": mappings,
        }
        return json.dumps(doc, sort_keys=True)

    def save(self, path):
        with open(path, "w", encoding="ascii") as fh:
            fh.write(self.to_json())
            fh.write("\n")

    @classmethod
    def from_json(cls, text: str) -> "Codebook":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValueError(f"codebook JSON could not be parsed: {exc}") from exc
        try:
            k, n, frames = int(doc["k"]), int(doc["n"]), int(doc["frames"])
            seeds = tuple(int(s) for s in doc["seeds"])
            mappings = doc["mappings"]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"codebook JSON is missing field: {exc}") from exc
        expected = (1 << k) ** frames
        if len(mappings) != expected:
            raise ValueError(f"expected {expected} mappings, found {len(mappings)}")
        # Rebuild per-frame tables from the mappings whose other frames are zero,
        # then verify every mapping is the frame-wise concatenation.
        tables = np.zeros((frames, 1 << k, n), dtype=np.uint8)
        by_source = {}
        for src, code in mappings:
            by_source[src] = code
        if len(by_source) != expected:
            raise ValueError("mappings do not cover every source word exactly once")
        for f in range(frames):
            for v in range(1 << k):
                src_bits = ["0"] * (k * frames)
                chunk = format_bits(unpack_bits(v, k))
                src_bits[f * k : (f + 1) * k] = chunk
                src = "".join(src_bits)
                if src not in by_source:
                    raise ValueError(f"mapping for source word {src} is missing")
                tables[f, v] = as_bits(by_source[src][f * n : (f + 1) * n], n)
        cb = cls(tables, seeds)
        code_all, source_all = cb.rows_for_indices(np.arange(expected))
        for i in range(expected):
            src, code = format_bits(source_all[i]), format_bits(code_all[i])
            if by_source.get(src) != code:
                raise ValueError(
                    "mappings are not frame-decomposable: "
                    f"{src} -> {by_source.get(src)} but frames give {code}"
                )
        return cb

    @classmethod
    def load(cls, path) -> "Codebook":
        with open(path, "r", encoding="ascii") as fh:
            return cls.from_json(fh.read())


def base_4b6b() -> Codebook:
    """The 16-entry 4B6B table (rate 2/3, every codeword weight 3)."""
    return Codebook(_base_matrix()[None, :, :])


def concat_4b6b(frames: int) -> Codebook:
    """``frames`` unshuffled copies of the base table, decoded frame by frame."""
    if frames < 1:
        raise ValueError("frames must be >= 1")
    tables = np.repeat(_base_matrix()[None, :, :], frames, axis=0)
    return Codebook(tables)


def shuffled_concat(frames: int, seed: int) -> Codebook:
    """Concatenation of ``frames`` copies of the base table, each with its
    codeword column permuted by a seeded Fisher-Yates shuffle.

    The same seed always produces the same codebook.  Per-frame sub-seeds are
    drawn from one master generator and recorded on the codebook.
    """
    if frames < 1:
        raise ValueError("frames must be >= 1")
    master = np.random.default_rng(seed)
    frame_seeds = master.integers(0, 2**63 - 1, size=frames)
    base = _base_matrix()
    tables = np.empty((frames, base.shape[0], base.shape[1]), dtype=np.uint8)
    for f in range(frames):
        perm = np.random.default_rng(int(frame_seeds[f])).permutation(base.shape[0])
        tables[f] = base[perm]
    return Codebook(tables, permutation_seeds=frame_seeds)


def nearest_codeword(cb: Codebook, word, frame: int = 0):
    """Closest valid codeword to ``word`` by Hamming distance, single frame.

    Returns ``(codeword_bits, source_bits)``.  Ties are broken toward the
    numerically smallest source word.  Exact table hits come back at
    distance zero.
    """
    w = as_bits(word, cb.n, "word")
    table = cb.frame_tables[frame]
    distances = np.count_nonzero(table != w[None, :], axis=1)
    src = int(np.argmin(distances))  # first minimum = lowest source value
    return table[src].copy(), unpack_bits(src, cb.k).reshape(-1)
