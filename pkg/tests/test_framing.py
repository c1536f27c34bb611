import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from config.profiles import FrameSection
from services.framing import (
    build_layout,
    downconvert,
    modulate,
    packet_duration,
    packet_length,
    payload_throughput,
    pn_sequence,
    upconvert,
)
from services.rx_coherent import receive_packet_coherent
from services.rx_noncoherent import receive_packet_noncoherent
from services.waveform import build_bank
from tests.conftest import random_bits, snapped_params
from utils.errors import ConfigError


# -----------------------------------------------------------------------------
# PN header and layout
# -----------------------------------------------------------------------------
class TestLayout:

    def test_pn_sequence_is_antipodal_and_seeded(self):
        pn = pn_sequence(128, seed=1)
        assert pn.shape == (128,)
        assert set(np.unique(pn)) == {-1.0, 1.0}
        assert_array_equal(pn, pn_sequence(128, seed=1))
        assert not np.array_equal(pn, pn_sequence(128, seed=5))

    def test_pn_autocorrelation_peak_dominates(self):
        pn = pn_sequence(128)
        corr = np.abs(np.correlate(pn, pn, mode="full"))
        peak = corr.size // 2
        assert corr[peak] == 128
        assert np.max(np.delete(corr, peak)) < 0.5 * 128

    def test_zero_seed_rejected(self):
        with pytest.raises(ConfigError):
            pn_sequence(128, seed=256)

    def test_default_layout(self, layout8, bank8):
        assert layout8.N_pn == 128
        assert layout8.L_g == 512
        assert layout8.N == 32
        assert layout8.data_start == 640
        assert packet_length(layout8, bank8.L) == 640 + 32 * 33

    def test_guard_must_be_whole_samples(self, bank8):
        with pytest.raises(ConfigError, match="guard"):
            build_layout(FrameSection(guard_duration_ms=0.0123), bank8.params)

    def test_throughput_accounts_for_overhead(self, layout8, bank8):
        duration = packet_duration(layout8, bank8.params)
        assert duration == pytest.approx((640 + 32 * 33) / 100e3)
        assert payload_throughput(layout8, bank8.params) == pytest.approx(96 / duration)
        assert payload_throughput(layout8, bank8.params) < bank8.params.bit_rate


# -----------------------------------------------------------------------------
# Modulation
# -----------------------------------------------------------------------------
class TestModulate:

    def test_packet_structure(self, rng, bank8, layout8):
        bits = random_bits(rng, layout8, bank8)
        packet = modulate(bits, bank8, layout8)

        assert bits.size == 96
        assert packet.symbol_indices.size == 32
        assert packet.baseband.size == 640 + 32 * 33
        assert_array_equal(packet.baseband[:128], layout8.pn_seq)
        assert np.all(packet.baseband[128:640] == 0)

        first = packet.baseband[640:673]
        assert_allclose(first, np.sqrt(layout8.E) * bank8.waveforms[packet.symbol_indices[0]])

    def test_symbol_energy(self, rng, bank8, layout8):
        layout = layout8.model_copy(update={"E": 2.5})
        packet = modulate(random_bits(rng, layout, bank8), bank8, layout)
        block = packet.baseband[layout.data_start:]
        assert np.sum(np.abs(block) ** 2) == pytest.approx(32 * 2.5, rel=1e-9)

    def test_all_zero_single_symbol(self, bank8, layout8):
        layout = layout8.model_copy(update={"N": 1})
        packet = modulate(np.zeros(3, dtype=np.uint8), bank8, layout)
        assert packet.symbol_indices.tolist() == [0]
        assert_allclose(packet.baseband[-33:], bank8.waveforms[0])

    def test_bit_length_mismatch(self, bank8, layout8):
        with pytest.raises(ConfigError, match="payload has 95 bits"):
            modulate(np.zeros(95, dtype=np.uint8), bank8, layout8)

    @pytest.mark.parametrize("M", [2, 4, 8, 16])
    def test_identity_loopback_is_bit_exact(self, rng, layout8, M):
        bank = build_bank(snapped_params(M))
        for _ in range(25):
            bits = random_bits(rng, layout8, bank)
            packet = modulate(bits, bank, layout8)
            coherent = receive_packet_coherent(packet.baseband, bank, layout8, P=1)
            noncoherent = receive_packet_noncoherent(packet.baseband, bank, layout8)
            assert_array_equal(coherent.bits, bits)
            assert_array_equal(noncoherent.bits, bits)

    def test_guard_content_does_not_change_decisions(self, rng, bank8, layout8):
        bits = random_bits(rng, layout8, bank8)
        clean = modulate(bits, bank8, layout8).baseband
        dirty = clean.copy()
        # leave P - 1 = 3 samples after the header for the training tail
        dirty[131:640] += 0.3 * (rng.standard_normal(509) + 1j * rng.standard_normal(509))

        a = receive_packet_coherent(clean, bank8, layout8, P=4)
        b = receive_packet_coherent(dirty, bank8, layout8, P=4)
        assert_array_equal(a.symbol_indices, b.symbol_indices)
        assert_array_equal(b.bits, bits)


# -----------------------------------------------------------------------------
# Carrier conversion
# -----------------------------------------------------------------------------
class TestCarrier:

    def test_zero_in_zero_out(self, bank8):
        out = upconvert(np.zeros(330, dtype=np.complex128), bank8.params)
        assert out.size == 1320
        assert np.all(out == 0)

    def test_round_trip(self, rng, bank8, layout8):
        packet = modulate(random_bits(rng, layout8, bank8), bank8, layout8)
        passband = upconvert(packet.baseband, bank8.params)
        assert np.isrealobj(passband)

        recovered = downconvert(passband, bank8.params)[:packet.baseband.size]
        error = np.sum(np.abs(recovered - packet.baseband) ** 2) / np.sum(np.abs(packet.baseband) ** 2)
        assert 10 * np.log10(error + 1e-300) < -60

        result = receive_packet_coherent(recovered, bank8, layout8, P=1)
        assert_array_equal(result.bits, packet.payload_bits)

    def test_tone_lands_at_carrier_plus_offset(self, bank8):
        params = bank8.params
        n = 1000
        f = 5000.0
        tone = np.exp(2j * np.pi * f * np.arange(n) / params.fs)
        passband = upconvert(tone, params)

        spectrum = np.abs(np.fft.rfft(passband))
        freqs = np.fft.rfftfreq(passband.size, 1 / params.fs_passband)
        assert freqs[np.argmax(spectrum)] == pytest.approx(params.fc + f, abs=params.fs_passband / passband.size)

    def test_carrier_constraint(self, bank8):
        with pytest.raises(ConfigError, match="carrier"):
            upconvert(np.ones(33, dtype=np.complex128), bank8.params, fc=30e3)
        with pytest.raises(ConfigError, match="carrier"):
            upconvert(np.ones(33, dtype=np.complex128), bank8.params, fc=160e3)
