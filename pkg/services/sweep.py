"""
Monte Carlo BER-vs-SNR sweeps.

Every packet is a trial identified by (point index, trial index); its payload,
channel and noise are all seeded from derive_seed(base_seed, point, trial, ...)
so any trial can be rerun on its own. Trials run in fixed-size batches on the
thread pool, and results are folded in trial order until the stopping rule
fires, which makes the report independent of worker count and batch size.
"""
from __future__ import annotations

import hashlib
import logging
import math
from functools import partial
from typing import Callable, Dict, List, Optional

import numpy as np
import pydantic
import scipy
from pydantic import BaseModel, ConfigDict

from config.profiles import ModemProfile, load_profile
from config.settings import settings
from models.channel import NoiseSpec
from models.detection import DetectionResult, ReceiverOptions
from models.frame import FrameLayout
from models.sweep import BerPoint, BerReport, ChannelSpec, RunMetadata, SweepConfig
from models.waveform import ChirpBank
from services.channel import apply_channel, channel_from_spec, derive_seed, make_rng, snr_to_noise
from services.framing import build_layout, modulate
from services.rx_coherent import receive_packet_coherent
from services.rx_noncoherent import receive_packet_noncoherent
from services.theory import (
    exact_ber_coherent,
    exact_ber_noncoherent,
    theory_ber_coherent,
    theory_ber_noncoherent,
    wilson_interval,
)
from services.waveform import build_bank
from utils.errors import ConfigError, ReceiverError
from utils.parallel_executor import run_parallel

logger = logging.getLogger(__name__)

# Sub-streams of one trial's seed
_PAYLOAD, _CHANNEL, _NOISE = 0, 1, 2

# A point is flagged when more than this share of its packets fail
FAILURE_FLAG_RATIO = 0.5


class PointContext(BaseModel):
    """Everything a trial at one SNR point needs"""

    bank: ChirpBank
    layout: FrameLayout
    channel: ChannelSpec
    receiver: ReceiverOptions
    N0: float
    base_seed: int
    point_index: int
    lead_in_samples: int = 0

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)


class TrialOutcome(BaseModel):
    trial_index: int
    bits_attempted: int
    bits: int
    errors: int
    failed: bool = False


# -----------------------------------------------------------------------------
# Single Trial
# -----------------------------------------------------------------------------
def receive(rx: np.ndarray, bank: ChirpBank, layout: FrameLayout, options: ReceiverOptions) -> DetectionResult:
    if options.kind == "coherent":
        return receive_packet_coherent(rx, bank, layout, options=options)
    return receive_packet_noncoherent(rx, bank, layout, options=options)


def simulate_packet(ctx: PointContext, trial_index: int) -> TrialOutcome:
    """modulate a random payload -> channel + AWGN -> receive -> count bit errors"""
    def seed(stream: int) -> int:
        return derive_seed(ctx.base_seed, ctx.point_index, trial_index, stream)

    n_bits = ctx.layout.N * ctx.bank.bits_per_symbol
    bits = make_rng(seed(_PAYLOAD)).integers(0, 2, size=n_bits, dtype=np.uint8)
    packet = modulate(bits, ctx.bank, ctx.layout)

    tx = np.concatenate([np.zeros(ctx.lead_in_samples, dtype=np.complex128), packet.baseband])
    ch = channel_from_spec(ctx.channel, seed=seed(_CHANNEL))
    rx = apply_channel(tx, ch, NoiseSpec(N0=ctx.N0, rng_seed=seed(_NOISE)))

    try:
        result = receive(rx, ctx.bank, ctx.layout, ctx.receiver)
    except ReceiverError as e:
        logger.debug(f"Trial {ctx.point_index}/{trial_index} failed: {e.detail}")
        return TrialOutcome(trial_index=trial_index, bits_attempted=n_bits, bits=0, errors=0, failed=True)

    errors = int(np.count_nonzero(result.bits != bits))
    return TrialOutcome(trial_index=trial_index, bits_attempted=n_bits, bits=n_bits, errors=errors)


# -----------------------------------------------------------------------------
# Reference Curves
# -----------------------------------------------------------------------------
def _references(kind: str) -> tuple[Callable[[float, int], float], Callable[[float, int], float]]:
    if kind == "coherent":
        return theory_ber_coherent, exact_ber_coherent
    return theory_ber_noncoherent, exact_ber_noncoherent


def reference_ber(kind: str, es_n0: float, M: int) -> tuple[float, float]:
    """(closed-form benchmark, exact M-ary value) at linear E/N0; 0 when noiseless"""
    if math.isinf(es_n0):
        return 0.0, 0.0
    closed, exact = _references(kind)
    return closed(es_n0, M), exact(es_n0, M)


# -----------------------------------------------------------------------------
# Sweep
# -----------------------------------------------------------------------------
def _run_point(ctx: PointContext, cfg: SweepConfig, snr_db: float, es_n0: float) -> BerPoint:
    bits = errors = attempted = packets = failures = 0
    trial = 0
    done = False

    while not done:
        tasks = [partial(simulate_packet, ctx, t) for t in range(trial, trial + cfg.batch_packets)]
        outcomes: List[TrialOutcome] = run_parallel(tasks, cfg.workers)
        trial += cfg.batch_packets

        for outcome in outcomes:
            packets += 1
            attempted += outcome.bits_attempted
            bits += outcome.bits
            errors += outcome.errors
            failures += outcome.failed
            if errors >= cfg.min_bit_errors or attempted >= cfg.max_bits:
                done = True
                break

        logger.debug(f"Point {snr_db:g} dB: {packets} packets, {errors}/{bits} errors")

    ci_lo, ci_hi = wilson_interval(errors, bits, cfg.confidence)
    theory, theory_exact = reference_ber(ctx.receiver.kind, es_n0, ctx.bank.M)
    flagged = failures > FAILURE_FLAG_RATIO * packets
    if flagged:
        logger.warning(f"Point {snr_db:g} dB flagged: {failures} of {packets} packets failed")

    return BerPoint(
        snr_db=snr_db,
        bits=bits,
        errors=errors,
        ber=errors / bits if bits else 0.0,
        ci_lo=ci_lo,
        ci_hi=ci_hi,
        theory=theory,
        theory_exact=theory_exact,
        packets=packets,
        failures=failures,
        flagged=flagged,
    )


def config_hash(cfg: SweepConfig, profile: ModemProfile) -> str:
    """sha256 over the sweep config and the resolved profile"""
    digest = hashlib.sha256()
    digest.update(cfg.model_dump_json().encode())
    digest.update(profile.model_dump_json().encode())
    return digest.hexdigest()


def package_versions() -> Dict[str, str]:
    return {
        settings.APP_NAME: settings.APP_VERSION,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pydantic": pydantic.VERSION,
    }


def run_sweep(cfg: SweepConfig, profile: Optional[ModemProfile] = None) -> BerReport:
    """Simulate every SNR point of `cfg` with the given (or named) profile"""
    profile = profile or load_profile(cfg.profile_name)
    bank = build_bank(profile.chirp_params())
    layout = build_layout(profile.frame, bank.params)
    if layout.N == 0:
        raise ConfigError("cannot measure BER with an empty payload")
    receiver = profile.receiver.model_copy(update={"kind": cfg.receiver})

    logger.info(
        f"Sweep: {bank.M}-ary {cfg.receiver}, channel {cfg.channel.profile}, "
        f"{len(cfg.snr_db)} points, seed {cfg.base_seed}, {cfg.workers} worker(s)"
    )

    points = []
    for i, snr_db in enumerate(cfg.snr_db):
        N0 = snr_to_noise(layout.E, snr_db, cfg.snr_axis, bank.M)
        es_n0 = layout.E / N0 if N0 > 0 else math.inf
        ctx = PointContext(
            bank=bank,
            layout=layout,
            channel=cfg.channel,
            receiver=receiver,
            N0=N0,
            base_seed=cfg.base_seed,
            point_index=i,
            lead_in_samples=cfg.lead_in_samples,
        )
        point = _run_point(ctx, cfg, snr_db, es_n0)
        logger.info(
            f"{snr_db:g} dB: BER {point.ber:.3e} [{point.ci_lo:.3e}, {point.ci_hi:.3e}] "
            f"over {point.bits} bits, theory {point.theory:.3e}"
        )
        points.append(point)

    metadata = RunMetadata(
        config_hash=config_hash(cfg, profile),
        base_seed=cfg.base_seed,
        versions=package_versions(),
    )
    return BerReport(config=cfg, points=points, metadata=metadata)


def config_from_profile(profile: ModemProfile, **overrides) -> SweepConfig:
    """SweepConfig seeded from a profile's [sweep], [channel] and [receiver] sections"""
    sweep = profile.sweep
    values = {
        "profile_name": profile.name,
        "receiver": profile.receiver.kind,
        "channel": profile.channel,
        "snr_db": sweep.snr_db,
        "snr_axis": sweep.snr_axis,
        "min_bit_errors": sweep.min_bit_errors,
        "max_bits": sweep.max_bits,
        "base_seed": sweep.base_seed,
        "confidence": sweep.confidence,
        "lead_in_samples": sweep.lead_in_samples,
        "batch_packets": settings.BATCH_PACKETS,
        "workers": settings.resolved_workers(),
    }
    values.update({k: v for k, v in overrides.items() if v is not None})
    return SweepConfig(**values)
