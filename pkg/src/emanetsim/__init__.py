"""Deterministic discrete-event simulator for emergency mobile ad-hoc networks.

Implements the adaptive hybrid CML routing protocol next to OLSR, AODV and
DSR baselines, an analytic IPsec (AH/ESP) cost overlay with a boolean
authentication gate, adversary behaviors, and a measurement harness that
sweeps network sizes 5..50 and emits comparison CSVs.
"""

__version__ = "0.1.0"

from .kernel import EventKernel, RandomStream
from .config import ScenarioConfig, SweepSpec, load_config
from .runner import run_scenario, run_sweep

__all__ = [
    "EventKernel",
    "RandomStream",
    "ScenarioConfig",
    "SweepSpec",
    "load_config",
    "run_scenario",
    "run_sweep",
]
