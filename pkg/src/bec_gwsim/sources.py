"""Strain and frequency of the + polarization radiated by a circular two-body system."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import PhysicalConstants, default_constants
from .dynamics import ModeBasis, build_basis

# R must exceed this many wavelengths for the far-field formulas to apply.
FAR_FIELD_FACTOR = 10.0
KHZ_NOTE = (
    "Omega evaluates to {omega:.3e} rad/s ({hz:.3e} Hz); the kHz range quoted for "
    "Sun/Earth masses at r = 10 m is not reproduced by the formula"
)


@dataclass(frozen=True)
class BinarySource:
    """Masses (kg), orbital separation r (m) and distance to the detector R (m)."""

    mass_1: float
    mass_2: float
    separation: float
    distance: float

    def __post_init__(self):
        for name in ("mass_1", "mass_2", "separation", "distance"):
            if not getattr(self, name) > 0:
                raise ValueError(f"BinarySource.{name} must be strictly positive")
        if self.distance < self.separation:
            raise ValueError("distance R must be at least the separation r")


@dataclass(frozen=True)
class BinaryWave:
    a_plus: float
    omega: float
    wavelength: float
    far_field_ok: bool

    @property
    def frequency_hz(self) -> float:
        return self.omega / (2.0 * np.pi)

    def in_khz_range(self) -> bool:
        return 1e3 <= self.frequency_hz < 1e6


def binary_wave_params(src: BinarySource, k: PhysicalConstants | None = None) -> BinaryWave:
    k = k or default_constants()
    m, M, r, R = src.mass_1, src.mass_2, src.separation, src.distance
    a_plus = 4.0 * k.G**2 * m * M / (k.c**4 * R * r)
    omega = 2.0 * float(np.sqrt(k.G * (m + M) / r**3))
    wavelength = 2.0 * np.pi * k.c / omega
    return BinaryWave(a_plus, omega, wavelength, bool(R > FAR_FIELD_FACTOR * wavelength))


@dataclass(frozen=True)
class ResonanceMatch:
    mode: int
    detuning: float
    box_length_for_match: float
    candidates: tuple


def resonance_match(basis: ModeBasis, src, k: PhysicalConstants | None = None) -> ResonanceMatch:
    """Mode n minimizing |Omega - 2 w_n|; ties go to the lower index.

    ``src`` is a BinarySource or a drive frequency in rad/s.  ``candidates``
    lists (n, detuning) for the two modes bracketing Omega, with detuning
    Omega - 2 w_n.
    """
    omega = binary_wave_params(src, k).omega if isinstance(src, BinarySource) else float(src)
    w1 = basis.omega1
    x = omega / (2.0 * w1)
    lo = max(1, int(np.floor(x)))
    cands = sorted({lo, lo + 1})
    detunings = [(n, omega - 2.0 * n * w1) for n in cands]
    # Relative tie tolerance so that a midpoint Omega picks the lower mode.
    best = min(detunings, key=lambda nd: (round(abs(nd[1]) / (2.0 * w1), 12), nd[0]))
    n = best[0]
    length = 2.0 * n * np.pi * basis.cs0 / omega
    return ResonanceMatch(int(n), float(best[1]), float(length), tuple((int(a), float(b)) for a, b in detunings))


def matched_basis(basis: ModeBasis, omega: float) -> ModeBasis:
    """Same sound speed and mode count, box resized so that Omega = 2 w_n exactly."""
    match = resonance_match(basis, omega)
    return build_basis(basis.n_modes, match.box_length_for_match, basis.cs0)
