import json

import click
import numpy as np

from routers.cli.options import load_modem, order_option, profile_option
from services.framing import packet_duration, payload_throughput
from services.waveform import bank_diagnostics, gram_matrix

# =============================================================================
# Chirp bank diagnostics
# =============================================================================


@click.command("bank")
@profile_option
@order_option
@click.option("--gram", is_flag=True, help="Include |Gram matrix| rows")
def bank(profile, order, gram):
    """Print bank diagnostics as JSON"""
    modem, chirps, layout = load_modem(profile, order)

    report = bank_diagnostics(chirps)
    report["profile"] = modem.name
    report["packet_duration_ms"] = packet_duration(layout, chirps.params) * 1e3
    report["payload_throughput_bps"] = payload_throughput(layout, chirps.params)
    if gram:
        report["gram_abs"] = np.round(np.abs(gram_matrix(chirps)), 12).tolist()

    click.echo(json.dumps(report, indent=2))
