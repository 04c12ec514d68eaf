"""Physical constants and unit conventions.

SI is used everywhere internally. Magnetic fields are the one exception:
they are kept in gauss at the Feshbach-control boundary, since laboratory
resonance data is tabulated that way.
"""

from __future__ import annotations

from dataclasses import dataclass

from scipy import constants as _codata

GAUSS_PER_TESLA = 1.0e4
TESLA_PER_GAUSS = 1.0e-4

# Bohr radius, for converting tabulated scattering lengths.
BOHR_RADIUS = _codata.physical_constants["Bohr radius"][0]
ATOMIC_MASS_UNIT = _codata.physical_constants["atomic mass constant"][0]


@dataclass(frozen=True)
class PhysicalConstants:
    """Speed of light (m/s), Newton constant (m^3 kg^-1 s^-2), reduced Planck constant (J s)."""

    c: float = _codata.c
    G: float = _codata.G
    hbar: float = _codata.hbar

    def __post_init__(self):
        for name in ("c", "G", "hbar"):
            value = getattr(self, name)
            if not value > 0:
                raise ValueError(f"{name} must be strictly positive, got {value!r}")

    def replace(self, **overrides) -> "PhysicalConstants":
        values = {"c": self.c, "G": self.G, "hbar": self.hbar}
        unknown = set(overrides) - set(values)
        if unknown:
            raise KeyError(f"unknown constants: {sorted(unknown)}")
        values.update(overrides)
        return PhysicalConstants(**values)


def default_constants() -> PhysicalConstants:
    """CODATA 2018 values (c is exact by definition)."""
    return PhysicalConstants()


def gauss_to_tesla(b_gauss):
    return b_gauss * TESLA_PER_GAUSS


def tesla_to_gauss(b_tesla):
    return b_tesla * GAUSS_PER_TESLA
