import json
from pathlib import Path

import click
import numpy as np

from routers.cli.options import load_modem, order_option, profile_option
from services.artifacts import read_waveform
from services.sweep import receive

# =============================================================================
# WAV -> bits
# =============================================================================


@click.command("rx")
@click.argument("wav", type=click.Path(dir_okay=False, path_type=Path))
@profile_option
@order_option
@click.option("--receiver", type=click.Choice(["coherent", "noncoherent"]), default=None)
@click.option("--paths", "-P", type=click.IntRange(min=1), default=None, help="Channel taps to estimate (coherent)")
def rx(wav, profile, order, receiver, paths):
    """Demodulate a WAV written by `tx` and print the decisions as JSON"""
    modem, bank, layout = load_modem(profile, order)

    options = modem.receiver
    updates = {"kind": receiver, "paths": paths}
    options = options.model_copy(update={k: v for k, v in updates.items() if v is not None})

    baseband, metadata = read_waveform(wav, bank.params)
    result = receive(baseband, bank, layout, options)

    bits = "".join(str(int(b)) for b in result.bits)
    report = {
        "receiver": options.kind,
        "sync_offset": result.sync_offset,
        "symbols": result.symbol_indices.tolist(),
        "bits": bits,
    }
    if result.channel_estimate is not None:
        report["h_hat"] = [[float(h.real), float(h.imag)] for h in result.channel_estimate.h_hat]
        report["residual_norm"] = result.channel_estimate.residual_norm
    if metadata.payload_bits is not None and len(metadata.payload_bits) == len(bits):
        sent = np.frombuffer(metadata.payload_bits.encode(), dtype=np.uint8)
        got = np.frombuffer(bits.encode(), dtype=np.uint8)
        report["bit_errors"] = int(np.count_nonzero(sent != got))

    click.echo(json.dumps(report, indent=2))
