import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kpaac import paac
from kpaac.errors import BadContainer, CorruptPayload, ModelTooLarge
from kpaac.mmc import SymbolChain

from oracles import adaptive_probability, ceil_neg_log2


@st.composite
def small_chains(draw, max_m=5, max_n=40):
    m = draw(st.integers(1, max_m))
    xs = draw(st.lists(st.integers(0, m - 1), min_size=1, max_size=max_n))
    return SymbolChain.of(xs, m), draw(st.integers(0, 3))


class TestAdaptiveModel:
    def test_abaa_rows(self):
        model = paac.AdaptiveModel(2, 1)
        rows = []
        for s in [0, 1, 0, 0]:
            rows.append(paac.predict(model))
            model.update(s)
        half, third, twothirds = Fraction(1, 2), Fraction(1, 3), Fraction(2, 3)
        assert rows == [[half, half], [half, half], [half, half], [third, twothirds]]

    def test_warmup_does_not_count(self):
        model = paac.AdaptiveModel(3, 2)
        model.update(0)
        model.update(0)
        assert model.counts == {}
        assert not model.warming_up and model.context == (0, 0)

    def test_order0(self):
        model = paac.AdaptiveModel(2, 0)
        for s in [1, 1, 0]:
            model.update(s)
        assert model.predict() == [Fraction(2, 5), Fraction(3, 5)]

    def test_rejects_bad_symbol(self):
        with pytest.raises(ValueError):
            paac.AdaptiveModel(2, 0).update(2)


class TestReferenceCoder:
    @pytest.mark.parametrize(
        "chain, bits", [([0, 1, 0, 0], "01001"), ([0, 1, 0, 1], "0110")]
    )
    def test_abaa_and_abab(self, chain, bits):
        blob = paac.encode_reference(chain, 1, 2)
        assert blob.bits == bits and blob.nbits == len(bits)
        assert paac.decode_reference(blob).symbols.tolist() == chain

    @settings(max_examples=150)
    @given(small_chains())
    def test_length_is_ceil_information(self, case):
        chain, k = case
        blob = paac.encode_reference(chain, k)
        assert blob.nbits == ceil_neg_log2(adaptive_probability(chain.symbols, chain.m, k))

    @settings(max_examples=150)
    @given(small_chains())
    def test_round_trip(self, case):
        chain, k = case
        out = paac.decode_reference(paac.encode_reference(chain, k))
        assert out.symbols.tolist() == chain.symbols.tolist()

    @pytest.mark.parametrize("n", [1, 2, 7, 31, 64])
    def test_constant_chain(self, n):
        blob = paac.encode_reference([0] * n, 0, 2)
        assert blob.nbits == math.ceil(math.log2(n + 1))

    def test_alphabet_of_one_costs_nothing(self):
        blob = paac.encode_reference([0, 0, 0], 1, 1)
        assert blob.nbits == 0
        assert paac.decode_reference(blob).symbols.tolist() == [0, 0, 0]

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            paac.encode_reference([], 0, 2)

    def test_foreign_payload_rejected(self):
        # 0101 is inside the abab interval but is not what the encoder emits
        blob = paac.CodedBlob.from_bits([0, 1, 0, 1], 1, 2, 4)
        with pytest.raises(CorruptPayload):
            paac.decode_reference(blob)


class TestFastCoder:
    @settings(max_examples=150)
    @given(small_chains())
    def test_round_trip_and_length(self, case):
        chain, k = case
        blob = paac.encode_fast(chain, k)
        assert paac.decode_fast(blob, verify=True).symbols.tolist() == chain.symbols.tolist()
        assert abs(blob.nbits - paac.encode_reference(chain, k).nbits) <= 2

    def test_backends_identical(self, rng):
        x = SymbolChain(rng.integers(0, 7, 3000), 7)
        a = paac.encode_fast(x, 2, backend="numba")
        b = paac.encode_fast(x, 2, backend="numpy")
        assert a == b
        np.testing.assert_array_equal(paac.decode_fast(a, backend="numpy").symbols, x.symbols)

    def test_long_skewed_chain(self, rng):
        x = SymbolChain((rng.random(200_000) < 0.001).astype(np.int64), 2)
        blob = paac.encode_fast(x, 1)
        assert abs(blob.nbits - paac.adaptive_information(x, 1)) <= 2
        np.testing.assert_array_equal(paac.decode_fast(blob).symbols, x.symbols)

    def test_large_alphabet(self, rng):
        x = SymbolChain(rng.integers(0, 256, 20_000), 256)
        blob = paac.encode_fast(x, 1)
        np.testing.assert_array_equal(paac.decode_fast(blob).symbols, x.symbols)
        assert abs(blob.nbits - paac.adaptive_information(x, 1)) <= 2

    def test_codelength(self):
        assert paac.codelength([0, 1, 0, 0], 1, 2) == paac.encode_fast([0, 1, 0, 0], 1, 2).nbits

    def test_model_too_large(self):
        with pytest.raises(ModelTooLarge):
            paac.encode_fast(SymbolChain.of([0, 1, 2], 256), 3)

    def test_flipped_bits_detected(self, rng):
        x = SymbolChain(rng.integers(0, 4, 500), 4)
        blob = paac.encode_fast(x, 1)
        bits = blob.bit_array.copy()
        bits[len(bits) // 2] ^= 1
        bad = paac.CodedBlob.from_bits(bits, 1, 4, x.n)
        try:
            out = paac.decode_fast(bad, verify=True)
        except CorruptPayload:
            return
        assert not np.array_equal(out.symbols, x.symbols)


class TestAdaptiveInformation:
    @settings(max_examples=100)
    @given(small_chains(max_n=30))
    def test_matches_exact_product(self, case):
        chain, k = case
        exact = -math.log2(adaptive_probability(chain.symbols, chain.m, k)) if chain.m > 1 else 0.0
        assert paac.adaptive_information(chain, k) == pytest.approx(exact, abs=1e-9)


class TestBlob:
    def test_round_trip_bytes(self):
        blob = paac.encode_reference([0, 1, 0, 0], 1, 2)
        data = blob.to_bytes()
        assert len(data) == paac.HEADER_SIZE + 1
        assert paac.CodedBlob.from_bytes(data) == blob

    def test_bad_magic(self):
        data = bytearray(paac.encode_reference([0, 1], 0, 2).to_bytes())
        data[0] = ord("X")
        with pytest.raises(BadContainer):
            paac.CodedBlob.from_bytes(bytes(data))

    def test_bad_version(self):
        data = bytearray(paac.encode_reference([0, 1], 0, 2).to_bytes())
        data[4] = 9
        with pytest.raises(BadContainer):
            paac.CodedBlob.from_bytes(bytes(data))

    def test_truncated(self):
        data = paac.encode_fast(list(range(10)) * 10, 0, 10).to_bytes()
        with pytest.raises(CorruptPayload):
            paac.CodedBlob.from_bytes(data[:-1])
        with pytest.raises(BadContainer):
            paac.CodedBlob.from_bytes(data[:10])

    def test_padding_must_be_zero(self):
        data = bytearray(paac.encode_reference([0, 1, 0, 0], 1, 2).to_bytes())
        data[-1] |= 1
        with pytest.raises(CorruptPayload):
            paac.CodedBlob.from_bytes(bytes(data))

    def test_trailing_bytes(self):
        data = paac.encode_reference([0, 1, 0, 0], 1, 2).to_bytes()
        with pytest.raises(CorruptPayload):
            paac.CodedBlob.from_bytes(data + b"\0")


def test_iid_uniform_rate(rng):
    x = SymbolChain(rng.integers(0, 4, 100_000), 4)
    assert abs(paac.codelength(x, 0) / x.n - 2.0) <= 0.02


def test_image_scale_chain(rng, backend):
    x = SymbolChain(rng.integers(0, 256, 262_144), 256)
    blob = paac.encode_fast(x, 1, backend=backend)
    np.testing.assert_array_equal(paac.decode_fast(blob, backend=backend).symbols, x.symbols)
