"""Classical decoder behavior and the exhaustive-search oracle equivalence."""

import itertools

import numpy as np
import pytest

from cscode.bits import as_bits, format_bits
from cscode.channel import modulate_ook
from cscode.codebook import base_4b6b, concat_4b6b
from cscode.decoders import (
    ExhaustiveMapDecoder,
    MaximumLikelihoodDecoder,
    TableLookupDecoder,
)


@pytest.fixture(scope="module")
def cb():
    return base_4b6b()


@pytest.fixture(scope="module")
def lookup(cb):
    return TableLookupDecoder(cb).fit()


@pytest.fixture(scope="module")
def ml(cb):
    return MaximumLikelihoodDecoder(cb).fit()


def min_modulated_distance(cb):
    words = [modulate_ook(row) for row in cb.frame_tables[0]]
    return min(
        np.linalg.norm(a - b) for a, b in itertools.combinations(words, 2)
    )


class TestTableLookup:
    def test_noiseless_codeword(self, lookup):
        bits, dist = lookup.decode_with_distances(modulate_ook(as_bits("001110")))
        assert format_bits(bits) == "0000"
        assert dist.tolist() == [0]

    def test_fallback_at_distance_one(self, lookup):
        # 001111 is not in the table; ties at distance 1 resolve to source 0000
        bits, dist = lookup.decode_with_distances(modulate_ook(as_bits("001111")))
        assert format_bits(bits) == "0000"
        assert dist.tolist() == [1]

    def test_two_noiseless_frames(self):
        cb2 = concat_4b6b(2)
        decoder = TableLookupDecoder(cb2).fit()
        received = modulate_ook(as_bits("010011110010"))
        assert format_bits(decoder.predict(received)) == "00101100"

    def test_batch_shape(self, cb, lookup):
        rng = np.random.default_rng(0)
        source = rng.integers(0, 2, size=(50, 4), dtype=np.uint8)
        received = modulate_ook(cb.encode(source))
        out = lookup.predict(received)
        assert out.shape == (50, 4)
        assert np.array_equal(out, source)

    def test_length_mismatch(self, lookup):
        with pytest.raises(ValueError, match="samples per word"):
            lookup.predict(np.zeros(5))

    def test_requires_fit(self, cb):
        with pytest.raises(RuntimeError, match="fit"):
            TableLookupDecoder(cb).predict(np.zeros(6))


class TestMaximumLikelihood:
    def test_exact_codeword_distance_zero(self, ml):
        bits, dist = ml.decode_with_distances(modulate_ook(as_bits("001110")))
        assert format_bits(bits) == "0000"
        assert dist[0] == pytest.approx(0.0)

    def test_small_perturbation_is_corrected(self, cb, ml):
        # any perturbation of norm under half the minimum inter-codeword
        # distance cannot move the argmin
        radius = min_modulated_distance(cb) / 2.0
        assert radius == pytest.approx(np.sqrt(2) / 2, abs=1e-12)
        rng = np.random.default_rng(1)
        clean = modulate_ook(as_bits("001110"))
        for _ in range(100):
            e = rng.normal(size=6)
            e *= 0.99 * radius / np.linalg.norm(e)
            assert format_bits(ml.predict(clean + e)) == "0000"

    def test_tie_breaks_to_lowest_source(self, cb, ml):
        # the exact midpoint of two modulated codewords is equidistant
        a = modulate_ook(cb.encode("0000"))
        b = modulate_ook(cb.encode("0001"))
        assert format_bits(ml.predict((a + b) / 2.0)) == "0000"

    def test_invariant_to_common_offset(self, cb, ml):
        # all codewords share energy 3, so adding a constant to every sample
        # shifts all scores equally
        rng = np.random.default_rng(2)
        received = modulate_ook(cb.encode(rng.integers(0, 2, (200, 4), dtype=np.uint8)))
        received = received + rng.normal(0, 0.5, received.shape)
        base = ml.predict(received)
        for offset in (-0.7, 0.3, 1.5):
            assert np.array_equal(ml.predict(received + offset), base)


class TestExhaustiveOracle:
    @pytest.mark.parametrize("frames", [1, 2, 3])
    def test_equals_framewise_ml_on_noisy_words(self, frames):
        cbf = concat_4b6b(frames)
        ml_dec = MaximumLikelihoodDecoder(cbf).fit()
        map_dec = ExhaustiveMapDecoder(cbf).fit()
        rng = np.random.default_rng(100 + frames)
        source = rng.integers(0, 2, size=(1000, cbf.total_source_bits), dtype=np.uint8)
        received = modulate_ook(cbf.encode(source))
        received = received + rng.normal(0.0, 0.6, received.shape)
        assert np.array_equal(ml_dec.predict(received), map_dec.predict(received))

    def test_noiseless_input_decodes_exactly(self):
        cbf = concat_4b6b(2)
        map_dec = ExhaustiveMapDecoder(cbf).fit()
        rng = np.random.default_rng(3)
        source = rng.integers(0, 2, size=(64, 8), dtype=np.uint8)
        assert np.array_equal(map_dec.predict(modulate_ook(cbf.encode(source))), source)

    def test_refuses_unenumerable_codebooks(self):
        with pytest.raises(ValueError, match="enumerate"):
            ExhaustiveMapDecoder(concat_4b6b(6)).fit()


class TestAgreementAtHighSnr:
    def test_all_decoders_agree_noiselessly(self, cb):
        decoders = [
            TableLookupDecoder(cb).fit(),
            MaximumLikelihoodDecoder(cb).fit(),
            ExhaustiveMapDecoder(cb).fit(),
        ]
        rng = np.random.default_rng(4)
        source = rng.integers(0, 2, size=(256, 4), dtype=np.uint8)
        received = modulate_ook(cb.encode(source))
        received = received + rng.normal(0.0, 1e-6, received.shape)
        for dec in decoders:
            assert np.array_equal(dec.predict(received, noise_std=1e-6), source)


class TestSklearnSurface:
    def test_get_params_roundtrip(self, cb):
        from sklearn.base import clone

        dec = MaximumLikelihoodDecoder(cb)
        params = dec.get_params()
        assert params["codebook"] is cb
        cloned = clone(dec)  # clone deep-copies non-estimator params
        assert cloned.codebook == cb
        assert not hasattr(cloned, "levels_")

    def test_score_is_bit_accuracy(self, cb, ml):
        rng = np.random.default_rng(5)
        source = rng.integers(0, 2, size=(100, 4), dtype=np.uint8)
        received = modulate_ook(cb.encode(source))
        assert ml.score(received, source) == 1.0
