"""Analog gravitational-wave spacetimes in a Bose-Einstein condensate.

Effective acoustic metric, coordinate chain onto the simulated wave line
element, phonon mode evolution with Bogoliubov extraction, Feshbach
field planning and the binary-source strain model.
"""

__version__ = "0.1.0"

from .constants import PhysicalConstants, default_constants
from .errors import (
    DomainError,
    IntegrationError,
    PlanningError,
    PreconditionError,
    ScenarioError,
)

__all__ = [
    "PhysicalConstants",
    "default_constants",
    "DomainError",
    "IntegrationError",
    "PlanningError",
    "PreconditionError",
    "ScenarioError",
    "__version__",
]
