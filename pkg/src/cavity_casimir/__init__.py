"""Casimir-Lifshitz interaction of a body inside a spherical cavity.

Scattering (TGTG) energy, free energy and mean wall pressure at imaginary
frequency, with T-matrices from closed-form matching (spheres) or from
invariant-imbedding Riccati equations (star-shaped bodies).
"""

from .basis import ModeBasis
from .geometry import BodySpec, assemble_U
from .materials import MaterialModel, SignClass, sign_class
from .tgtg import (
    CavityConfig,
    QuadratureSettings,
    free_energy,
    interaction_energy,
    mean_pressure,
    sign_verdict,
)

__all__ = [
    "ModeBasis", "BodySpec", "assemble_U", "MaterialModel", "SignClass", "sign_class",
    "CavityConfig", "QuadratureSettings", "interaction_energy", "free_energy", "mean_pressure",
    "sign_verdict",
]
__version__ = "0.1.0"
