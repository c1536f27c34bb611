from __future__ import annotations

import logging

import click

from config.settings import settings
from routers.cli import bank, rx, sweep, theory, tx
from utils.errors import ModemError
from utils.logging_config import setup_logging

logger = logging.getLogger(__name__)


class ModemGroup(click.Group):
    """Maps every ModemError raised by a command to its exit code"""

    def invoke(self, ctx: click.Context):
        try:
            return super().invoke(ctx)
        except ModemError as e:
            logger.error(f"{type(e).__name__}: {e.detail}")
            click.echo(f"Error: {e.detail}", err=True)
            ctx.exit(e.exit_code)


@click.group(cls=ModemGroup)
@click.option("--log-level", default=None, help="Override LOG_LEVEL for this run")
@click.version_option(settings.APP_VERSION, prog_name=settings.APP_NAME)
def cli(log_level):
    """M-ary orthogonal chirp keying modem: bank, tx, rx, sweep, theory"""
    setup_logging(log_level)


# -----------------------------------------------------------------------------
# Commands
# -----------------------------------------------------------------------------

# Waveform
cli.add_command(bank.bank)

# Link
cli.add_command(tx.tx)
cli.add_command(rx.rx)

# Performance
cli.add_command(sweep.sweep)
cli.add_command(theory.theory)


if __name__ == "__main__":
    cli()
