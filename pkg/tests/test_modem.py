import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_force_ml, enumerate_qmm_blocks
from qmmofdm.analysis import lcml_block_comparisons
from qmmofdm.constellation import build_psk_modes
from qmmofdm.errors import ConfigurationError, EmptyFrame, LengthMismatch, SearchSpaceTooLarge
from qmmofdm.index_code import generate_codebook
from qmmofdm.modem import (
    BlockSymbols,
    QmmScheme,
    SchemeParams,
    assemble_frame,
    disassemble_frame,
    encode_block,
    ints_to_bits,
    lcml_detect,
    ml_detect,
)


def all_bits(f):
    return ints_to_bits(np.arange(1 << f), f)


def rayleigh(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


class TestParams:
    def test_derived_sizes(self):
        p = SchemeParams(4, 4, 2)
        assert (p.f1, p.f2, p.f) == (6, 4, 10)

    @pytest.mark.parametrize("args", [(4, 1, 2), (0, 4, 2), (4, 4, 3), (4, 4, 2, "ask")])
    def test_invalid(self, args):
        with pytest.raises(ConfigurationError):
            SchemeParams(*args)


class TestEncode:
    def test_index_only_table_row(self):
        s = QmmScheme.build(3, 3, 1)
        out = s.encode([0, 0, 1])
        assert out.modes.tolist() == [0, 1, 2]
        np.testing.assert_allclose(out.symbols, s.modes.modes[[0, 1, 2], 0])

    def test_q1_is_plain_qpsk_ofdm(self):
        s = QmmScheme.build(1, 4, 4)
        assert s.f == 8
        out = s.encode([0, 0, 0, 1, 1, 1, 1, 0])
        assert out.modes.tolist() == [0, 0, 0, 0]
        # Gray labels around the circle: 00 -> 1, 01 -> j, 11 -> -1, 10 -> -j
        np.testing.assert_allclose(out.symbols, [1, 1j, -1, -1j], atol=1e-15)

    def test_bits_per_block_442(self):
        assert QmmScheme.build(4, 4, 2).f == 10

    def test_functional_form_matches(self):
        p = SchemeParams(4, 3, 2)
        ms, cb = build_psk_modes(4, 2), generate_codebook(4, 3)
        bits = all_bits(p.f)
        a = encode_block(bits, p, ms, cb)
        b = QmmScheme.build(4, 3, 2).encode(bits)
        np.testing.assert_array_equal(a.symbols, b.symbols)

    def test_matches_oracle_enumeration(self):
        s = QmmScheme.build(4, 3, 2, "qam")
        cand, cand_bits = enumerate_qmm_blocks(
            s.modes.by_label, s.codebook.codewords, s.codebook.used_count, 2
        )
        out = s.encode(cand_bits)
        np.testing.assert_array_equal(out.symbols, cand)

    def test_symbols_in_union(self):
        s = QmmScheme.build(8, 3, 2)
        out = s.encode(all_bits(s.f))
        dist = np.abs(out.symbols[..., None] - s.modes.union).min(axis=-1)
        assert dist.max() < 1e-12

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            QmmScheme.build(4, 4, 2).encode([0, 1])


class TestDetectors:
    def test_table_row_eight(self):
        s = QmmScheme.build(3, 3, 1)
        h = np.array([0.3 + 1j, -1.2, 0.5j])
        y = s.modes.modes[[2, 1, 0], 0] * h
        out = s.detect(y, h, 1.0, "ml")
        assert out.bits.tolist() == [1, 1, 1]
        assert s.detect(y, h, 1.0, "lcml").bits.tolist() == [1, 1, 1]

    @pytest.mark.parametrize("cfg", [(2, 2, 2, "psk"), (3, 3, 1, "psk"), (4, 3, 2, "qam"), (1, 3, 4, "psk"), (3, 4, 2, "psk")])
    @pytest.mark.parametrize("detector", ["ml", "lcml"])
    def test_noiseless_round_trip(self, cfg, detector):
        s = QmmScheme.build(*cfg)
        bits = all_bits(s.f)
        rng = np.random.default_rng(7)
        h = rayleigh(rng, (len(bits), s.N))
        y = 2.0 * s.encode(bits).symbols * h
        out = s.detect(y, h, 4.0, detector)
        np.testing.assert_array_equal(out.bits, bits)

    @pytest.mark.parametrize("cfg", [(2, 2, 2), (3, 3, 1), (4, 3, 2)])
    def test_ml_matches_brute_force(self, cfg):
        Q, N, M = cfg
        s = QmmScheme.build(Q, N, M)
        cand, cand_bits = enumerate_qmm_blocks(s.modes.by_label, s.codebook.codewords, s.codebook.used_count, M)
        rng = np.random.default_rng(11)
        T = 2000
        h = rayleigh(rng, (T, N))
        sent = cand[rng.integers(len(cand), size=T)]
        es = 10 ** (rng.uniform(-5, 20, size=T) / 10)
        y = np.sqrt(es)[:, None] * sent * h + rayleigh(rng, (T, N))
        for t in range(T):
            _, best, bits = brute_force_ml(y[t], h[t], es[t], cand, cand_bits)
            out = ml_detect(y[t], h[t], es[t], s.params, s.modes, s.codebook)
            metric = np.sum(np.abs(y[t] - np.sqrt(es[t]) * h[t] * out.symbols) ** 2)
            assert metric == pytest.approx(best, rel=1e-12, abs=1e-12)
            np.testing.assert_array_equal(out.bits, bits)

    def test_batch_equals_single(self):
        s = QmmScheme.build(4, 4, 2)
        rng = np.random.default_rng(3)
        h = rayleigh(rng, (50, 4))
        y = rayleigh(rng, (50, 4))
        for det in ("ml", "lcml"):
            batch = s.detect(y, h, 1.0, det)
            for t in (0, 17, 49):
                np.testing.assert_array_equal(s.detect(y[t], h[t], 1.0, det).bits, batch.bits[t])

    def test_gather_path_matches_matrix_path(self):
        rng = np.random.default_rng(8)
        h, y = rayleigh(rng, (300, 4)), rayleigh(rng, (300, 4))
        fast = QmmScheme.build(8, 4, 2).block_scheme()
        slow = QmmScheme.build(8, 4, 2).block_scheme()
        slow.__dict__["selector"] = None
        np.testing.assert_array_equal(fast.detect(y, h).bits, slow.detect(y, h).bits)

    def test_ml_metric_never_worse_than_lcml(self):
        s = QmmScheme.build(8, 4, 2)
        rng = np.random.default_rng(5)
        h = rayleigh(rng, (3000, 4))
        bits = rng.integers(0, 2, (3000, s.f), dtype=np.uint8)
        y = s.encode(bits).symbols * h + 0.3 * rayleigh(rng, (3000, 4))
        ml = s.detect(y, h, 1.0, "ml")
        lc = s.detect(y, h, 1.0, "lcml")
        m_ml = np.sum(np.abs(y - h * ml.symbols) ** 2, axis=1)
        m_lc = np.sum(np.abs(y - h * lc.symbols) ** 2, axis=1)
        assert np.all(m_ml <= m_lc + 1e-12)

    def test_lcml_output_satisfies_parity(self):
        s = QmmScheme.build(3, 5, 2)
        rng = np.random.default_rng(9)
        h = rayleigh(rng, (5000, 5))
        y = rayleigh(rng, (5000, 5))
        out = s.detect(y, h, 1.0, "lcml")
        assert np.all(out.modes.sum(axis=1) % 3 == 0)
        ranks = (out.modes[:, :-1] * 3 ** np.arange(3, -1, -1)).sum(axis=1)
        assert ranks.max() < s.codebook.used_count

    def test_lcml_remaps_unused_codeword(self):
        s = QmmScheme.build(3, 3, 1)
        h = np.array([1.0, 0.9, 0.1])
        # strongest two subcarriers decide mode 2, so parity forces (2,2,2)
        y = s.modes.modes[[2, 2, 2], 0] * h
        out = s.detect(y, h, 1.0, "lcml")
        assert out.modes.tolist() == [0, 1, 2]
        assert out.bits.tolist() == [0, 0, 1]

    def test_lcml_tie_keeps_natural_order(self):
        s = QmmScheme.build(4, 3, 1)
        h = np.ones(3)
        y = s.modes.modes[[1, 2, 1], 0] + np.array([0, 0, 0.6])
        out = s.detect(y, h, 1.0, "lcml")
        # equal gains: the last subcarrier is the one inferred from parity
        assert out.modes.tolist() == [1, 2, 1]

    @pytest.mark.parametrize("cfg", [(8, 4, 2), (4, 4, 2), (8, 4, 1), (2, 3, 4), (5, 2, 1)])
    def test_comparison_count(self, cfg):
        s = QmmScheme.build(*cfg)
        rng = np.random.default_rng(0)
        out = lcml_detect(rayleigh(rng, (8, s.N)), rayleigh(rng, (8, s.N)), 1.0, s.params, s.modes, s.codebook)
        assert out.comparisons == lcml_block_comparisons(s.params)

    def test_guard_rail(self):
        s = QmmScheme.build(16, 6, 2)  # f = 20 + 6
        with pytest.raises(SearchSpaceTooLarge):
            s.detect(np.ones(6), np.ones(6), 1.0, "ml")

    def test_unknown_detector(self):
        with pytest.raises(ConfigurationError):
            QmmScheme.build(2, 2, 2).detect(np.ones(2), np.ones(2), 1.0, "zf")


class TestFrame:
    def test_single_block_identity(self):
        b = BlockSymbols(np.array([1, 2j, 3, 4]), np.zeros(4, int))
        np.testing.assert_array_equal(assemble_frame([b]), b.symbols)

    def test_two_blocks_positions(self):
        a = np.arange(4) + 0j
        b = np.arange(4, 8) + 0j
        frame = assemble_frame([a, b])
        assert len(frame) == 8
        np.testing.assert_array_equal(frame[4:], b)

    @settings(max_examples=50)
    @given(st.integers(1, 6), st.integers(2, 6), st.integers(0, 2**32 - 1))
    def test_round_trip(self, B, N, seed):
        x = rayleigh(np.random.default_rng(seed), (B, N))
        np.testing.assert_array_equal(disassemble_frame(assemble_frame(list(x)), N), x)

    def test_empty(self):
        with pytest.raises(EmptyFrame):
            assemble_frame([])
        with pytest.raises(EmptyFrame):
            disassemble_frame([], 4)

    def test_bad_length(self):
        with pytest.raises(LengthMismatch):
            disassemble_frame(np.zeros(7), 4)
