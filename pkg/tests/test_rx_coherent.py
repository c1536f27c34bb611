import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from models.channel import ChannelModel, NoiseSpec
from models.detection import ReceiverOptions
from services.channel import (
    apply_channel,
    build_H,
    complex_awgn,
    convolution_matrix,
    make_rng,
    sample_random_channel,
)
from services.framing import build_layout, modulate
from services.rx_coherent import (
    detect_coherent,
    equalize,
    estimate_channel,
    locate_first_path,
    receive_packet_coherent,
    synchronize,
    training_matrix,
)
from services.waveform import build_bank
from tests.conftest import random_bits, snapped_params
from utils.errors import ChannelEstimationError, DetectionError, NoPacketFound


def well_conditioned_channels(count, P=4, L=33, start_seed=0):
    """exp-rayleigh draws whose symbol convolution matrix is well conditioned"""
    channels = []
    seed = start_seed
    while len(channels) < count:
        ch = sample_random_channel(P, "exp-rayleigh", seed=seed)
        seed += 1
        if np.linalg.cond(build_H(ch, L)) < 3.0:
            channels.append(ch)
        assert seed < 50 * count, "too few well-conditioned channels"
    return channels


# -----------------------------------------------------------------------------
# Synchronisation
# -----------------------------------------------------------------------------
class TestSynchronize:

    def test_packet_at_origin(self, rng, bank8, layout8):
        packet = modulate(random_bits(rng, layout8, bank8), bank8, layout8)
        assert synchronize(packet.baseband, layout8.pn_seq) == 0

    def test_shifted_packet(self, rng, bank8, layout8):
        packet = modulate(random_bits(rng, layout8, bank8), bank8, layout8)
        rx = np.concatenate([np.zeros(37, dtype=np.complex128), packet.baseband])
        assert synchronize(rx, layout8.pn_seq) == 37

    def test_multipath_offset_is_first_arriving_path(self, rng, bank8, layout8):
        for seed in range(200):
            ch = sample_random_channel(4, "exp-rayleigh", seed=seed)
            packet = modulate(random_bits(rng, layout8, bank8), bank8, layout8)
            rx = apply_channel(np.concatenate([np.zeros(20, dtype=np.complex128), packet.baseband]), ch)
            result = receive_packet_coherent(rx, bank8, layout8, P=4)
            assert result.sync_offset == 20
            assert_allclose(result.channel_estimate.h_hat, ch.as_array(), atol=1e-9)

    def test_search_window(self, rng, bank8, layout8):
        packet = modulate(random_bits(rng, layout8, bank8), bank8, layout8)
        rx = np.concatenate([np.zeros(50, dtype=np.complex128), packet.baseband])
        assert synchronize(rx, layout8.pn_seq, search_window=(40, 60)) == 50

    def test_noise_only_finds_nothing(self, layout8):
        rx = complex_awgn(2000, 1.0, make_rng(5))
        with pytest.raises(NoPacketFound, match="below floor"):
            synchronize(rx, layout8.pn_seq)

    def test_empty_window(self, layout8):
        with pytest.raises(NoPacketFound, match="empty"):
            synchronize(np.ones(500, dtype=np.complex128), layout8.pn_seq, search_window=(900, 950))

    def test_too_short(self, layout8):
        with pytest.raises(NoPacketFound):
            synchronize(np.ones(10, dtype=np.complex128), layout8.pn_seq)


# -----------------------------------------------------------------------------
# LS channel estimation
# -----------------------------------------------------------------------------
class TestEstimateChannel:

    def test_single_tap_identity(self, layout8):
        y_tr = layout8.pn_seq.astype(np.complex128)
        estimate = estimate_channel(y_tr, layout8.pn_seq, 1)
        assert_allclose(estimate.h_hat, [1.0], atol=1e-12)
        assert estimate.residual_norm == pytest.approx(0.0, abs=1e-20)

    def test_noiseless_recovery(self, layout8):
        B = training_matrix(layout8.pn_seq, 4)
        assert B.shape == (131, 4)
        for seed in range(100):
            h = sample_random_channel(4, "exp-rayleigh", seed=seed).as_array()
            estimate = estimate_channel(B @ h, layout8.pn_seq, 4)
            assert np.linalg.norm(estimate.h_hat - h) <= 1e-9
            assert estimate.P == 4

    def test_training_window_matches_convolution(self, layout8):
        ch = sample_random_channel(4, "exp-rayleigh", seed=1)
        y = apply_channel(layout8.pn_seq, ch)
        assert_allclose(training_matrix(layout8.pn_seq, 4) @ ch.as_array(), y, atol=1e-12)

    def test_mse_matches_ls_covariance(self, layout8):
        N0 = 0.2
        pn = layout8.pn_seq
        B = training_matrix(pn, 4)
        h = sample_random_channel(4, "exp-rayleigh", seed=42).as_array()
        expected = N0 * np.trace(np.linalg.inv(B.conj().T @ B)).real

        rng = make_rng(99)
        trials = 2000
        errors = np.empty(trials)
        for i in range(trials):
            y = B @ h + complex_awgn(B.shape[0], N0, rng)
            errors[i] = np.sum(np.abs(estimate_channel(y, pn, 4).h_hat - h) ** 2)
        assert np.mean(errors) == pytest.approx(expected, rel=0.10)

    def test_unbiased(self, layout8):
        N0 = 0.5
        pn = layout8.pn_seq
        B = training_matrix(pn, 4)
        h = sample_random_channel(4, "exp-rayleigh", seed=8).as_array()
        rng = make_rng(2024)
        trials = 10_000
        estimates = np.array([
            estimate_channel(B @ h + complex_awgn(B.shape[0], N0, rng), pn, 4).h_hat
            for _ in range(trials)
        ])
        std_err = np.sqrt(N0 * np.diag(np.linalg.inv(B.conj().T @ B)).real / trials)
        bias = np.abs(estimates.mean(axis=0) - h)
        assert np.all(bias <= 3 * std_err)

    def test_wrong_window_length(self, layout8):
        with pytest.raises(ChannelEstimationError, match="expected 131"):
            estimate_channel(np.zeros(130), layout8.pn_seq, 4)

    def test_more_taps_than_chips(self):
        pn = np.array([1.0, -1.0, 1.0])
        with pytest.raises(ChannelEstimationError):
            estimate_channel(np.zeros(6), pn, 4)

    def test_rank_deficient_training(self):
        with pytest.raises(ChannelEstimationError, match="ill-conditioned"):
            estimate_channel(np.zeros(9), np.zeros(8), 2)


class TestLocateFirstPath:

    def test_identity_channel_with_spare_taps(self, layout8):
        pn = layout8.pn_seq.astype(np.complex128)
        rx = np.concatenate([np.zeros(30, dtype=np.complex128), pn, np.zeros(10, dtype=np.complex128)])
        offset, estimate = locate_first_path(rx, layout8.pn_seq, 30, 4)
        assert offset == 30
        assert_allclose(estimate.h_hat, [1, 0, 0, 0], atol=1e-12)

    def test_weak_first_path_is_kept(self, layout8):
        ch = sample_random_channel(4, "exp-rayleigh", seed=48)
        h = np.abs(ch.as_array())
        assert np.argmax(h) == 1
        assert h[0] < 0.35 * h[1]

        rx = apply_channel(np.concatenate([np.zeros(16), layout8.pn_seq]), ch)
        offset, estimate = locate_first_path(rx, layout8.pn_seq, 17, 4)
        assert offset == 16
        assert_allclose(estimate.h_hat, ch.as_array(), atol=1e-9)

    def test_candidates_stop_at_zero(self, layout8):
        rx = apply_channel(layout8.pn_seq, ChannelModel(taps=(0.3 + 0j, 0.9 + 0j)))
        offset, estimate = locate_first_path(rx, layout8.pn_seq, 1, 4)
        assert offset == 0
        assert_allclose(estimate.h_hat, [0.3, 0.9, 0, 0], atol=1e-12)


# -----------------------------------------------------------------------------
# Detection
# -----------------------------------------------------------------------------
class TestDetectCoherent:

    def test_identity_channel(self, bank8):
        H = build_H(ChannelModel.identity(), 33)
        index, scores = detect_coherent(bank8.waveforms[3], H, bank8)
        assert index == 3
        assert scores[3] == pytest.approx(1.0)
        assert np.all(np.abs(np.delete(scores, 3)) <= 1e-10)

    def test_perfect_csi_multipath(self, bank8):
        for ch in well_conditioned_channels(20):
            H = build_H(ch, 33)
            for m in range(8):
                index, scores = detect_coherent(H @ bank8.waveforms[m], H, bank8)
                assert index == m
                ranked = np.sort(scores)[::-1]
                assert ranked[0] - ranked[1] > 0

    def test_matches_explicit_pseudo_inverse(self, rng):
        bank = build_bank(snapped_params(4, T=0.08e-3, f0=1000.0, delta_f=1 / 0.08e-3, mu=1e7))
        ch = sample_random_channel(3, "exp-rayleigh", seed=4)
        H = build_H(ch, bank.L)
        y = rng.standard_normal(H.shape[0]) + 1j * rng.standard_normal(H.shape[0])

        z = equalize(H, y)
        explicit = np.linalg.inv(H.conj().T @ H) @ H.conj().T @ y
        assert_allclose(z, explicit, atol=1e-9)

        _, scores = detect_coherent(y, H, bank, metric="magnitude")
        assert_allclose(scores, np.abs(bank.waveforms.conj() @ explicit), atol=1e-9)

    def test_shape_mismatch(self, bank8):
        H = build_H(ChannelModel.identity(), 33)
        with pytest.raises(DetectionError):
            detect_coherent(np.zeros(30), H, bank8)

    def test_rank_deficient_channel(self, bank8):
        H = np.zeros((36, 33), dtype=np.complex128)
        with pytest.raises(DetectionError, match="ill-conditioned"):
            detect_coherent(np.zeros(36), H, bank8)


# -----------------------------------------------------------------------------
# Packet reception
# -----------------------------------------------------------------------------
class TestReceivePacket:

    @pytest.mark.parametrize("M", [2, 4, 8])
    def test_noiseless_multipath_loopback(self, rng, default_profile, M):
        bank = build_bank(snapped_params(M))
        layout = build_layout(default_profile.frame, bank.params)
        for ch in well_conditioned_channels(200):
            bits = random_bits(rng, layout, bank)
            rx = apply_channel(np.concatenate([np.zeros(16), modulate(bits, bank, layout).baseband]), ch)
            result = receive_packet_coherent(rx, bank, layout, P=4)
            assert result.sync_offset == 16
            assert_array_equal(result.bits, bits)

    def test_default_fixed_channel(self, rng, bank8, layout8, default_profile):
        ch = ChannelModel(taps=default_profile.channel.taps)
        bits = random_bits(rng, layout8, bank8)
        rx = apply_channel(modulate(bits, bank8, layout8).baseband, ch)
        result = receive_packet_coherent(rx, bank8, layout8, P=4)
        assert_allclose(result.channel_estimate.h_hat, ch.as_array(), atol=1e-9)
        assert_array_equal(result.bits, bits)

    def test_weak_first_path_loopback(self, rng, bank8, layout8):
        ch = sample_random_channel(4, "exp-rayleigh", seed=48)
        bits = random_bits(rng, layout8, bank8)
        rx = apply_channel(np.concatenate([np.zeros(16), modulate(bits, bank8, layout8).baseband]), ch)
        result = receive_packet_coherent(rx, bank8, layout8, P=4)
        assert result.sync_offset == 16
        assert_allclose(result.channel_estimate.h_hat, ch.as_array(), atol=1e-9)
        assert_array_equal(result.bits, bits)

    def test_guard_separated_symbols_match_isolated_detection(self, rng, bank8, layout8, default_profile):
        ch = ChannelModel(taps=default_profile.channel.taps)
        L = bank8.L
        packet = modulate(random_bits(rng, layout8, bank8), bank8, layout8)
        tx = packet.baseband.copy()
        # every odd slot is silent, so each even symbol is followed by L >= P - 1 zeros
        for n in range(1, layout8.N, 2):
            start = layout8.data_start + n * L
            tx[start:start + L] = 0

        result = receive_packet_coherent(apply_channel(tx, ch), bank8, layout8, P=4)
        H = build_H(ch, L)
        H_hat = convolution_matrix(result.channel_estimate.h_hat, L)
        for n in range(0, layout8.N, 2):
            sent = packet.symbol_indices[n]
            index, scores = detect_coherent(H @ bank8.waveforms[sent], H_hat, bank8)
            assert result.symbol_indices[n] == index == sent
            assert_allclose(result.metrics[n], scores, atol=1e-9)

    def test_bits_are_gray_labels_of_decisions(self, rng, bank8, layout8):
        packet = modulate(random_bits(rng, layout8, bank8), bank8, layout8)
        result = receive_packet_coherent(packet.baseband, bank8, layout8, P=1)
        assert_array_equal(result.bits, bank8.labels[result.symbol_indices].ravel())
        assert result.metrics.shape == (32, 8)
        assert result.N == 32

    def test_empty_payload(self, bank8, layout8):
        layout = layout8.model_copy(update={"N": 0})
        packet = modulate(np.zeros(0, dtype=np.uint8), bank8, layout)
        result = receive_packet_coherent(packet.baseband, bank8, layout, P=1)
        assert result.N == 0
        assert result.bits.size == 0
        assert result.metrics.shape == (0, 8)

    def test_pure_noise_payload_gives_coin_flips(self, bank2, default_profile):
        layout = build_layout(default_profile.frame, bank2.params)
        # the header precedes the guard, so lags below 64 never touch the noisy payload
        options = ReceiverOptions(paths=1, search_window=(0, 64))
        rng = make_rng(17)
        errors = total = 0
        for i in range(200):
            bits = rng.integers(0, 2, size=32, dtype=np.uint8)
            packet = modulate(bits, bank2, layout)
            rx = packet.baseband.copy()
            # clean header, payload buried in noise
            rx[layout.data_start:] += complex_awgn(rx.size - layout.data_start, 1e4, rng)
            result = receive_packet_coherent(rx, bank2, layout, options=options)
            errors += np.count_nonzero(result.bits != bits)
            total += bits.size
        assert errors / total == pytest.approx(0.5, abs=0.03)

    def test_options_select_metric(self, rng, bank8, layout8):
        packet = modulate(random_bits(rng, layout8, bank8), bank8, layout8)
        rx = apply_channel(packet.baseband, ChannelModel(taps=(np.exp(1.2j),)), NoiseSpec(N0=0.0))
        options = ReceiverOptions(paths=1, coherent_metric="magnitude")
        result = receive_packet_coherent(rx, bank8, layout8, options=options)
        assert_array_equal(result.bits, packet.payload_bits)
        assert np.all(result.metrics >= 0)
