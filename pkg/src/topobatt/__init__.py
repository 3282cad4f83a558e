"""Quantum battery and charger coupled to a dissipative SSH photonic lattice.

Resolvent-based bound-state analysis, exact finite-lattice dynamics, and the
thermodynamic performance indicators (stored energy, ergotropy, charging
power), with a CLI for reproducible CSV/JSON runs.
"""

__version__ = "0.1.0"

from .model import BathParams, EmitterConfig, ModelConfig, validate

__all__ = ["BathParams", "EmitterConfig", "ModelConfig", "validate", "__version__"]
