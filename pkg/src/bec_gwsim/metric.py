"""Effective acoustic metric for phonons on a (possibly wave-perturbed) spacetime.

Metrics are plain 4x4 float arrays in the coordinate basis (t, x, y, z) with
signature (-, +, +, +); g_tt carries units of velocity squared.

Flow velocities are stored as contravariant components u^a in the same
coordinates, normalized to g_ab u^a u^b = -c^2.  The covariant unit vector
entering the acoustic metric is V_a = g_ab u^b / c, so a condensate at rest
has V_a = (-c, 0, 0, 0) and V_t V_t = c^2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PreconditionError

SYMMETRY_RTOL = 1e-12
NORMALIZATION_RTOL = 1e-9
MAX_STRAIN = 0.1


@dataclass(frozen=True)
class CondensateParams:
    """Mean-field background of the condensate.

    ``rho0`` is the opaque density scalar of the conformal factor.  The
    optional ``number_density`` and ``scattering_length`` are metadata used
    to cross-check ``cs0`` against the weak-interaction formula.
    """

    rho0: float
    atom_mass: float
    box_length: float
    cs0: float
    scattering_length: float | None = None
    number_density: float | None = None

    def __post_init__(self):
        for name in ("rho0", "atom_mass", "box_length", "cs0"):
            if not getattr(self, name) > 0:
                raise ValueError(f"CondensateParams.{name} must be strictly positive")
        for name in ("scattering_length", "number_density"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ValueError(f"CondensateParams.{name} must be strictly positive")


@dataclass(frozen=True)
class WaveParams:
    """Simulated wave: h_+(t) = a_plus sin(omega t), h_x(t) = a_cross sin(omega t)."""

    a_plus: float
    omega: float
    a_cross: float = 0.0
    duration: float = 0.0

    def __post_init__(self):
        if abs(self.a_plus) > MAX_STRAIN or abs(self.a_cross) > MAX_STRAIN:
            raise ValueError(f"strain amplitudes must satisfy |A| <= {MAX_STRAIN} (first-order regime)")
        if not self.omega > 0:
            raise ValueError("omega must be positive")
        if self.duration < 0:
            raise ValueError("duration must be non-negative")

    @property
    def period(self) -> float:
        return 2.0 * np.pi / self.omega

    def h_plus(self, t):
        return self.a_plus * np.sin(self.omega * t)

    def h_cross(self, t):
        return self.a_cross * np.sin(self.omega * t)


@dataclass(frozen=True)
class FourVelocity:
    """Contravariant flow velocity u^a in (t, x, y, z) coordinates."""

    components: tuple

    @classmethod
    def at_rest(cls) -> "FourVelocity":
        return cls((1.0, 0.0, 0.0, 0.0))

    @classmethod
    def from_1p1(cls, u_t: float, u_x: float) -> "FourVelocity":
        return cls((float(u_t), float(u_x), 0.0, 0.0))

    @property
    def vector(self) -> np.ndarray:
        return np.asarray(self.components, dtype=float)

    def norm(self, metric: np.ndarray) -> float:
        u = self.vector
        return float(u @ metric @ u)

    def covariant(self, metric: np.ndarray, c: float) -> np.ndarray:
        return metric @ self.vector / c


def minkowski(c: float) -> np.ndarray:
    if not c > 0:
        raise DomainError(f"speed of light must be positive, got {c!r}")
    return np.diag([-c * c, 1.0, 1.0, 1.0])


def gw_perturbation(wave: WaveParams, t: float) -> np.ndarray:
    """TT-gauge perturbation of a wave travelling along z."""
    hp = wave.h_plus(t)
    hx = wave.h_cross(t)
    h = np.zeros((4, 4))
    h[1, 1] = hp
    h[2, 2] = -hp
    h[1, 2] = h[2, 1] = hx
    return h


def is_symmetric(metric: np.ndarray, rtol: float = SYMMETRY_RTOL) -> bool:
    scale = max(np.max(np.abs(metric)), np.finfo(float).tiny)
    return bool(np.max(np.abs(metric - metric.T)) <= rtol * scale)


def is_lorentzian(metric: np.ndarray) -> bool:
    """True when the (t, x) block has negative determinant.

    g_tt alone is not used: it turns positive where the flow is supersonic
    while the signature stays (-, +).
    """
    block = restrict_1p1(metric)
    return bool(np.linalg.det(block) < 0)


def acoustic_metric(
    real_metric: np.ndarray,
    params: CondensateParams,
    cs: float,
    v: FourVelocity,
    c: float,
    keep_conformal: bool = False,
    rho: float | None = None,
) -> np.ndarray:
    """Effective phonon metric (rho c / cs) [g_ab + (1 - cs^2/c^2) V_a V_b].

    With ``keep_conformal`` false the prefactor rho c / cs is dropped.
    ``rho`` overrides ``params.rho0`` for position-dependent densities.
    """
    g = np.asarray(real_metric, dtype=float)
    # cs == c is allowed: the flow term vanishes and only the conformal factor remains.
    if not 0 < cs <= c:
        raise DomainError(f"need 0 < cs <= c, got cs={cs!r}, c={c!r}")
    norm = v.norm(g)
    if abs(norm + c * c) > NORMALIZATION_RTOL * c * c:
        raise PreconditionError(f"flow velocity not normalized: g(u,u) = {norm!r}, expected {-c * c!r}")
    # V_a V_b = -U_a U_b / g(u,u) with U_a = g_ab u^b.  Dividing by the actual
    # norm (instead of c^2) makes g + VV cancel exactly for a fluid at rest,
    # which keeps -cs^2 accurate when cs << c.
    u_low = g @ v.vector
    c2 = c * c
    out = g - np.outer(u_low, u_low / norm) + (cs * cs) * np.outer(u_low / c2, u_low / norm)
    out = 0.5 * (out + out.T)
    if keep_conformal:
        out = out * ((params.rho0 if rho is None else rho) * c / cs)
    return out


def restrict_1p1(metric: np.ndarray) -> np.ndarray:
    return np.asarray(metric, dtype=float)[:2, :2]


def line_element_1p1(metric: np.ndarray, dt: float, dx: float) -> float:
    block = restrict_1p1(metric)
    return float(block[0, 0] * dt * dt + 2.0 * block[0, 1] * dt * dx + block[1, 1] * dx * dx)


def null_slopes_1p1(metric: np.ndarray) -> tuple[float, float]:
    """Both roots dx/dt of the null condition in the (t, x) block."""
    block = restrict_1p1(metric)
    a, b, c = block[1, 1], 2.0 * block[0, 1], block[0, 0]
    disc = b * b - 4.0 * a * c
    if disc < 0:
        raise DomainError("block has no real null directions")
    root = np.sqrt(disc)
    return float((-b - root) / (2 * a)), float((-b + root) / (2 * a))
