import csv
import math
import sys

import click

from services.theory import (
    exact_ber_coherent,
    exact_ber_noncoherent,
    theory_ber_coherent,
    theory_ber_noncoherent,
)
from utils.errors import ConfigError

# =============================================================================
# Reference BER table
# =============================================================================

COLUMNS = ("snr_db", "M", "coherent", "noncoherent", "coherent_exact", "noncoherent_exact")


@click.command("theory")
@click.option("--order", "-M", "orders", type=int, multiple=True, help="Modulation orders [default: 2 4 8]")
@click.option("--snr", "snrs", type=float, multiple=True, help="SNR points [dB]")
@click.option("--start", type=float, default=0.0, show_default=True)
@click.option("--stop", type=float, default=12.0, show_default=True)
@click.option("--step", type=float, default=2.0, show_default=True)
@click.option("--axis", type=click.Choice(["es_n0", "eb_n0"]), default="es_n0", show_default=True)
def theory(orders, snrs, start, stop, step, axis):
    """Closed-form and exact M-ary bit error probabilities as CSV"""
    if not snrs:
        if step <= 0 or stop < start:
            raise ConfigError("need step > 0 and stop >= start")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        snrs = [start + i * step for i in range(count)]

    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(COLUMNS)
    for M in orders or (2, 4, 8):
        for snr_db in snrs:
            es_n0 = 10 ** (snr_db / 10)
            if axis == "eb_n0":
                es_n0 *= math.log2(M)
            writer.writerow([
                f"{snr_db:g}",
                M,
                f"{theory_ber_coherent(es_n0, M):.6e}",
                f"{theory_ber_noncoherent(es_n0, M):.6e}",
                f"{exact_ber_coherent(es_n0, M):.6e}",
                f"{exact_ber_noncoherent(es_n0, M):.6e}",
            ])
