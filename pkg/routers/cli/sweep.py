from pathlib import Path

import click
from pydantic import ValidationError

from config.profiles import load_profile
from config.settings import settings
from routers.cli.options import order_option, profile_option
from services.artifacts import emit_results
from services.sweep import config_from_profile, run_sweep
from utils.errors import ConfigError

# =============================================================================
# Monte Carlo BER sweep
# =============================================================================


@click.command("sweep")
@profile_option
@order_option
@click.option("--receiver", type=click.Choice(["coherent", "noncoherent"]), default=None)
@click.option("--channel", type=click.Choice(["identity", "fixed", "exp-rayleigh"]), default=None)
@click.option("--paths", "-P", type=click.IntRange(min=1), default=None, help="exp-rayleigh channel taps")
@click.option("--snr", "snrs", type=float, multiple=True, help="SNR grid [dB], strictly increasing")
@click.option("--axis", type=click.Choice(["es_n0", "eb_n0"]), default=None)
@click.option("--min-errors", type=int, default=None, help="Bit errors to collect per point")
@click.option("--max-bits", type=int, default=None, help="Bit budget per point")
@click.option("--seed", type=int, default=None, help="Base seed (required in CI mode)")
@click.option("--workers", "-j", type=int, default=None, help="Worker threads [default: WORKERS setting]")
@click.option("--batch", type=int, default=None, help="Packets per batch")
@click.option(
    "--out", "-o",
    type=click.Path(dir_okay=False, path_type=Path),
    default=None,
    help="CSV path [default: OUTPUT_DIR/<profile>_<receiver>.csv]"
)
def sweep(profile, order, receiver, channel, paths, snrs, axis, min_errors, max_bits, seed, workers, batch, out):
    """Run a BER-vs-SNR sweep and write CSV + manifest"""
    if settings.CI_MODE and seed is None:
        raise ConfigError("--seed is required when CI_MODE is set")

    modem = load_profile(profile)
    if order is not None:
        modem = modem.with_modulation_order(order)

    channel_updates = {"profile": channel, "paths": paths}
    channel_spec = modem.channel.model_copy(
        update={k: v for k, v in channel_updates.items() if v is not None}
    )

    try:
        cfg = config_from_profile(
            modem,
            receiver=receiver,
            channel=channel_spec.model_dump(),
            snr_db=list(snrs) or None,
            snr_axis=axis,
            min_bit_errors=min_errors,
            max_bits=max_bits,
            base_seed=seed,
            workers=workers,
            batch_packets=batch,
        )
    except ValidationError as e:
        raise ConfigError(f"invalid sweep configuration: {e}")

    report = run_sweep(cfg, modem)
    out = out or settings.OUTPUT_DIR / f"{modem.name}_{cfg.receiver}.csv"
    manifest = emit_results(report, out, modem)

    for point in report.points:
        flag = "  FLAGGED" if point.flagged else ""
        click.echo(
            f"{point.snr_db:7.2f} dB  BER {point.ber:.3e}  "
            f"[{point.ci_lo:.3e}, {point.ci_hi:.3e}]  theory {point.theory:.3e}{flag}"
        )
    click.echo(f"{out}\n{manifest}")
