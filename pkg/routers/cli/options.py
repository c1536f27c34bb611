from __future__ import annotations

from typing import Optional, Tuple

import click

from config.profiles import ModemProfile, load_profile
from models.frame import FrameLayout
from models.waveform import ChirpBank
from services.framing import build_layout
from services.waveform import build_bank

# =============================================================================
# Options and helpers shared by every command
# =============================================================================

profile_option = click.option(
    "--profile", "-p",
    default=None,
    help="Profile name under the profile directory, or a path to a TOML file"
)

order_option = click.option(
    "--order", "-M",
    type=int,
    default=None,
    help="Override the profile's modulation order"
)


def load_modem(
    profile_name: Optional[str],
    order: Optional[int] = None,
) -> Tuple[ModemProfile, ChirpBank, FrameLayout]:
    """Profile -> validated bank and frame layout"""
    profile = load_profile(profile_name)
    if order is not None:
        profile = profile.with_modulation_order(order)
    bank = build_bank(profile.chirp_params())
    layout = build_layout(profile.frame, bank.params)
    return profile, bank, layout
