"""Secrecy-rate simulation toolkit for multi-user holographic MIMO downlinks."""

from holosec.geometry import ArrayGeometry, antenna_positions
from holosec.channel import SpectralModel, ChannelRealization, spectral_model
from holosec.beamforming import BeamformingSolution, design_beamformers
from holosec.secrecy import LinkGains, SecrecyReport, secrecy_report
from holosec.power import PaProblem, PaSolution, solve_sca, fixed_pa, grid_search_oracle

__version__ = "0.1.0"

__all__ = [
    "ArrayGeometry",
    "antenna_positions",
    "SpectralModel",
    "ChannelRealization",
    "spectral_model",
    "BeamformingSolution",
    "design_beamformers",
    "LinkGains",
    "SecrecyReport",
    "secrecy_report",
    "PaProblem",
    "PaSolution",
    "solve_sca",
    "fixed_pa",
    "grid_search_oracle",
]
