"""Simulator for phase-encoded entangled-pair transmission with shielding,
entanglement-assisted phase retrieval and eavesdropper models."""

from ._kernels import BACKEND
from .adversary import AttackStrategy
from .harness import run_scenario, visibility_from_fringes
from .protocol import PhaseAlphabet, SessionConfig, run_session
from .scenario import ScenarioConfig, preset

__version__ = "0.1.0"
