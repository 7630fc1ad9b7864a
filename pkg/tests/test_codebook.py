"""4B6B table, concatenated/shuffled codebooks, nearest-codeword lookup, JSON IO."""

import itertools

import numpy as np
import pytest

from cscode.bits import as_bits, format_bits, hamming_distance
from cscode.codebook import Codebook, base_4b6b, concat_4b6b, nearest_codeword, shuffled_concat

# the full published table, source word -> codeword
BASE_TABLE = {
    "0000": "001110", "0001": "001101", "0010": "010011", "0011": "010110",
    "0100": "010101", "0101": "100011", "0110": "100110", "0111": "100101",
    "1000": "011001", "1001": "011010", "1010": "011100", "1011": "110001",
    "1100": "110010", "1101": "101001", "1110": "101010", "1111": "101100",
}


def max_run(bits):
    best = cur = 1
    for a, b in zip(bits, bits[1:]):
        cur = cur + 1 if a == b else 1
        best = max(best, cur)
    return best


@pytest.fixture(scope="module")
def cb():
    return base_4b6b()


class TestBaseTable:

    def test_every_published_row(self, cb):
        for src, code in BASE_TABLE.items():
            assert format_bits(cb.encode(src)) == code

    def test_dimensions(self, cb):
        assert (cb.k, cb.n, cb.frames) == (4, 6, 1)
        assert cb.n_mappings == 16
        assert cb.rate == pytest.approx(2 / 3)

    def test_roundtrip_all_sixteen(self, cb):
        for src in BASE_TABLE:
            decoded = cb.decode_exact(cb.encode(src))
            assert format_bits(decoded) == src

    def test_every_codeword_is_balanced(self, cb):
        for code in BASE_TABLE.values():
            assert code.count("1") == 3

    def test_runlength_at_most_four_across_all_pairs(self):
        words = list(BASE_TABLE.values())
        worst = max(max_run(a + b) for a, b in itertools.product(words, words))
        assert worst <= 4


class TestEncode:
    def test_single_frame_examples(self):
        cb = base_4b6b()
        assert format_bits(cb.encode("0101")) == "100011"
        assert format_bits(cb.encode("1001")) == "011010"

    def test_two_frames_are_independent(self):
        cb = concat_4b6b(2)
        assert format_bits(cb.encode("00000000")) == "001110001110"

    def test_batch_encode(self):
        cb = base_4b6b()
        batch = np.array([as_bits("0000"), as_bits("1111")])
        out = cb.encode(batch)
        assert out.shape == (2, 6)
        assert format_bits(out[0]) == "001110"
        assert format_bits(out[1]) == "101100"

    def test_wrong_length_rejected(self):
        with pytest.raises(ValueError):
            base_4b6b().encode("00000")


class TestShuffledConcat:
    def test_five_frames_mapping_count(self):
        cb = shuffled_concat(5, seed=42)
        assert cb.n_mappings == 2**20
        assert (cb.total_source_bits, cb.total_code_bits) == (20, 30)

    def test_identity_concatenation_equals_base(self):
        assert concat_4b6b(1) == base_4b6b()

    def test_same_seed_reproduces_codebook(self):
        a = shuffled_concat(2, seed=9)
        b = shuffled_concat(2, seed=9)
        assert a == b
        assert a.to_json() == b.to_json()

    def test_different_seeds_differ(self):
        assert shuffled_concat(2, seed=1) != shuffled_concat(2, seed=2)

    def test_shuffle_preserves_codeword_set_per_frame(self):
        cb = shuffled_concat(3, seed=5)
        base_set = set(BASE_TABLE.values())
        for f in range(3):
            frame_set = {format_bits(row) for row in cb.frame_tables[f]}
            assert frame_set == base_set

    def test_records_per_frame_seeds(self):
        cb = shuffled_concat(3, seed=5)
        assert len(cb.permutation_seeds) == 3
        assert concat_4b6b(3).permutation_seeds == ()


class TestNearestCodeword:
    def test_exact_hit_distance_zero(self):
        cb = base_4b6b()
        code, src = nearest_codeword(cb, "001110")
        assert format_bits(code) == "001110"
        assert format_bits(src) == "0000"

    def test_tie_breaks_to_lowest_source_word(self):
        # 001111 is at distance 1 from both 001110 (src 0000) and 001101 (src 0001)
        cb = base_4b6b()
        dists = {
            src: hamming_distance(as_bits("001111"), as_bits(code))
            for src, code in BASE_TABLE.items()
        }
        assert dists["0000"] == 1 and dists["0001"] == 1
        code, src = nearest_codeword(cb, "001111")
        assert format_bits(src) == "0000"
        assert format_bits(code) == "001110"

    def test_all_ones_is_distance_three_from_everything(self):
        cb = base_4b6b()
        code, src = nearest_codeword(cb, "111111")
        assert hamming_distance(as_bits("111111"), code) == 3
        assert int(code.sum()) == 3  # a balanced codeword
        assert format_bits(src) == "0000"  # every entry ties; lowest source wins

    def test_distance_zero_iff_in_table(self):
        cb = base_4b6b()
        valid = set(BASE_TABLE.values())
        for value in range(64):
            word = format_bits(as_bits(f"{value:06b}"))
            code, _src = nearest_codeword(cb, word)
            dist = hamming_distance(as_bits(word), code)
            assert (dist == 0) == (word in valid)


class TestJsonRoundtrip:
    @pytest.mark.parametrize("maker", [
        lambda: base_4b6b(),
        lambda: concat_4b6b(2),
        lambda: shuffled_concat(2, seed=123),
    ])
    def test_roundtrip(self, maker, tmp_path):
        cb = maker()
        path = tmp_path / "cb.json"
        cb.save(path)
        loaded = Codebook.load(path)
        assert loaded == cb
        assert loaded.permutation_seeds == cb.permutation_seeds
        assert loaded.to_json() == cb.to_json()

    def test_rejects_garbage(self):
        with pytest.raises(ValueError, match="parsed"):
            Codebook.from_json("{not json")

    def test_rejects_missing_fields(self):
        with pytest.raises(ValueError, match="missing"):
            Codebook.from_json('{"k": 4, "n": 6}')

    def test_rejects_wrong_mapping_count(self):
        doc = base_4b6b().to_json().replace('"frames": 1', '"frames": 2')
        with pytest.raises(ValueError, match="mappings"):
            Codebook.from_json(doc)

    def test_rejects_duplicate_codewords(self):
        tables = base_4b6b().frame_tables.copy()
        tables = np.array(tables, copy=True)
        tables[0, 1] = tables[0, 0]
        with pytest.raises(ValueError, match="bijection"):
            Codebook(tables)
