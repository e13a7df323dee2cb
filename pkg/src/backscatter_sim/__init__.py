"""Simulator for bistatic backscatter links with a frequency-shifting tag.

Modules, from the bottom up: :mod:`rfmath` (link-budget primitives),
:mod:`phy` (mixing, selectivity, FSK error rates, radio profiles),
:mod:`scenario` (validated JSON scenarios and geometry), :mod:`engine`
(time-stepped simulation), :mod:`experiments` (sweeps and range searches) and
:mod:`cli`.
"""

from .engine import LinkState, SimReport, analytic_links, simulate, sinr, spectral_environment
from .phy import PROFILES, RadioProfile, SpectralComponent, fsk_ber, out_of_band_fraction
from .rfmath import bistatic_received_power, path_loss
from .scenario import Scenario, ScenarioError, load_preset, load_scenario

__version__ = "0.1.0"

__all__ = [
    "LinkState",
    "SimReport",
    "analytic_links",
    "simulate",
    "sinr",
    "spectral_environment",
    "PROFILES",
    "RadioProfile",
    "SpectralComponent",
    "fsk_ber",
    "out_of_band_fraction",
    "bistatic_received_power",
    "path_loss",
    "Scenario",
    "ScenarioError",
    "load_preset",
    "load_scenario",
]
