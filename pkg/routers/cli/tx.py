from pathlib import Path

import click
import numpy as np

from config.settings import settings
from routers.cli.options import load_modem, order_option, profile_option
from services.artifacts import emit_waveform
from services.channel import make_rng
from services.framing import modulate
from utils.errors import ConfigError

# =============================================================================
# Bits -> passband WAV
# =============================================================================


def parse_bits(text: str) -> np.ndarray:
    """'0110 1001' -> uint8 array; whitespace and underscores are ignored"""
    cleaned = "".join(ch for ch in text if ch not in " _\t\n")
    if not cleaned or set(cleaned) - {"0", "1"}:
        raise ConfigError(f"payload must be a string of 0s and 1s, got '{text}'")
    return np.array([int(ch) for ch in cleaned], dtype=np.uint8)


@click.command("tx")
@profile_option
@order_option
@click.option("--bits", default=None, help="Payload as a 0/1 string (must fill the frame exactly)")
@click.option("--seed", type=int, default=None, help="Random payload seed when --bits is omitted")
@click.option(
    "--out", "-o",
    type=click.Path(dir_okay=False, path_type=Path),
    default=None,
    help="WAV path [default: OUTPUT_DIR/packet.wav]"
)
@click.option("--format", "sample_format", type=click.Choice(["int16", "float32"]), default="int16", show_default=True)
def tx(profile, order, bits, seed, out, sample_format):
    """Modulate one packet and write it as a WAV file with a JSON sidecar"""
    modem, bank, layout = load_modem(profile, order)
    n_bits = layout.N * bank.bits_per_symbol

    if bits is not None:
        payload = parse_bits(bits)
    else:
        payload = make_rng(seed or 0).integers(0, 2, size=n_bits, dtype=np.uint8)

    packet = modulate(payload, bank, layout)
    out = out or settings.OUTPUT_DIR / "packet.wav"
    metadata = emit_waveform(packet, out, bank.params, modem.name, sample_format)

    click.echo(f"{out} ({metadata.baseband_length} baseband samples, {n_bits} bits)")
