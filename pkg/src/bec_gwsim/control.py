"""Laboratory control: scattering length, sound speed and Feshbach field schedules.

Fields are in gauss, everything else SI.  The fractional field modulation
delta_b is dimensionless: B(t) = B_op (1 + delta_b sin(Omega t)).

Sign convention.  The linearized scattering length reads
a(t) = a(0) (1 + P delta_b(t)) with the rational prefactor P below, while the
sound-speed target cs0 (1 - h_+/2) requires a(t) = a(0) (1 - h_+(t)).  The
planner therefore uses delta_b = -A_+/P, and the strain recovered from a
field amplitude is h_+ = -P delta_b.  ``simulated_amplitude`` keeps the
literal +P delta_b so its sign flags which branch a caller is on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import default_constants
from .errors import DomainError, PlanningError, PreconditionError
from .metric import WaveParams

SIGN_CONVENTION = "a(t)=a(0)(1-h(t)); delta_b=-A_plus/prefactor"
# Fraction of the distance to the nearest pole/zero the field may use.
POLE_MARGIN = 0.5


@dataclass(frozen=True)
class FeshbachParams:
    """Resonance a(B) = a_bg (1 - width / (B - B_res)) and the operating field B(0)."""

    a_bg: float
    B_res: float
    width: float
    B_op: float

    def __post_init__(self):
        if self.width == 0:
            raise ValueError("Feshbach width must be non-zero")
        if self.B_op == self.B_res:
            raise ValueError("operating field sits on the resonance pole")
        if self.B_op == self.B_res + self.width:
            raise ValueError("operating field sits on the zero crossing of a(B)")

    @property
    def detuning(self) -> float:
        return self.B_op - self.B_res

    @property
    def prefactor(self) -> float:
        """d ln a / d ln B at the operating field."""
        d = self.detuning
        return self.B_op * self.width / ((d - self.width) * d)


@dataclass(frozen=True)
class FieldSchedule:
    delta_b: float
    omega: float
    B_op: float
    convention: str = SIGN_CONVENTION

    def delta(self, t):
        return self.delta_b * np.sin(self.omega * np.asarray(t, dtype=float))

    def field(self, t):
        """B(t) in gauss."""
        return self.B_op * (1.0 + self.delta(t))


def _positive(**kwargs):
    for name, value in kwargs.items():
        if not value > 0:
            raise DomainError(f"{name} must be strictly positive, got {value!r}")


def coupling_strength(a, m_a, hbar=None):
    """Contact coupling g = 4 pi hbar^2 a / m (J m^3)."""
    hbar = default_constants().hbar if hbar is None else hbar
    _positive(a=a, m_a=m_a, hbar=hbar)
    return 4.0 * np.pi * hbar**2 * a / m_a


def sound_speed(n, a, m_a, hbar=None):
    """Bogoliubov sound speed (hbar/m) sqrt(4 pi n a) of a weakly interacting gas."""
    hbar = default_constants().hbar if hbar is None else hbar
    _positive(n=n, a=a, m_a=m_a, hbar=hbar)
    return hbar / m_a * np.sqrt(4.0 * np.pi * n * a)


def sound_speed_from_coupling(n, g, m_a):
    """sqrt(rho g / m) with mass density rho = n m."""
    rho = n * m_a
    return np.sqrt(rho * g / m_a**2)


def scattering_length(B, p: FeshbachParams):
    B = np.asarray(B, dtype=float)
    if np.any(B == p.B_res):
        raise DomainError(f"B = {p.B_res} G is the resonance pole")
    a = p.a_bg * (1.0 - p.width / (B - p.B_res))
    return float(a) if a.ndim == 0 else a


def scattering_length_first_order(t, schedule: FieldSchedule, p: FeshbachParams):
    """a(t) linearized in the fractional field modulation."""
    d = p.detuning
    if d == 0 or d == p.width:
        raise DomainError("prefactor denominator vanishes")
    a0 = scattering_length(p.B_op, p)
    return a0 * (1.0 + p.prefactor * schedule.delta(t))


def simulated_amplitude(delta_b, p: FeshbachParams):
    """A_+ = B(0) width delta_b / ((B(0) - B_res - width)(B(0) - B_res))."""
    d = p.detuning
    if d == 0 or d == p.width:
        raise DomainError("prefactor denominator vanishes")
    return p.prefactor * delta_b


def strain_from_modulation(delta_b, p: FeshbachParams):
    """Strain amplitude realised by ``delta_b`` under the planner's sign convention."""
    return -simulated_amplitude(delta_b, p)


def max_fractional_modulation(p: FeshbachParams, margin: float = POLE_MARGIN) -> float:
    """Largest |delta_b| that keeps B(t) clear of the pole and the zero crossing.

    B(t) sweeps [B_op (1 - |delta_b|), B_op (1 + |delta_b|)]; ``margin`` is the
    fraction of the distance to the nearest singular field that may be used.
    """
    nearest = min(abs(p.B_op - p.B_res), abs(p.B_op - (p.B_res + p.width)))
    return margin * nearest / abs(p.B_op)


def plan_field_schedule(target: WaveParams, p: FeshbachParams) -> FieldSchedule:
    """Field modulation whose linearized response is a(t) = a(0)(1 - h_+(t))."""
    delta_b = -target.a_plus / p.prefactor
    limit = max_fractional_modulation(p)
    if abs(delta_b) > limit:
        raise PlanningError(
            f"|delta_b| = {abs(delta_b):.3e} would bring B(t) within the resonance margin; limit is {limit:.3e}",
            limit=limit,
        )
    return FieldSchedule(delta_b=float(delta_b), omega=target.omega, B_op=p.B_op)


@dataclass
class ScheduleValidation:
    times: np.ndarray
    field_gauss: np.ndarray
    scattering_length: np.ndarray
    sound_speed: np.ndarray
    h_target: np.ndarray
    h_achieved: np.ndarray
    max_relative_deviation: float


def validate_schedule(
    schedule: FieldSchedule,
    target: WaveParams,
    p: FeshbachParams,
    cs0: float = 1.0,
    n_samples: int = 257,
    periods: float = 1.0,
) -> ScheduleValidation:
    """Push B(t) through the exact a(B) and cs ~ sqrt(a) and compare with cs0 (1 - h_+/2).

    ``cs0`` is the sound speed at the operating field; the relative deviation
    does not depend on it.  ``h_achieved`` is the strain implied by the
    realised sound speed, 2 (1 - cs/cs0).
    """
    if not np.isclose(schedule.omega, target.omega, rtol=1e-12):
        raise PreconditionError("schedule and target frequencies differ")
    t = np.linspace(0.0, periods * target.period, n_samples)
    B = schedule.field(t)
    a = scattering_length(B, p)
    a0 = scattering_length(p.B_op, p)
    if a0 <= 0 or np.any(a <= 0):
        raise PlanningError("scattering length is not positive along the schedule")
    cs = cs0 * np.sqrt(a / a0)
    h_target = target.h_plus(t)
    cs_target = cs0 * (1.0 - 0.5 * h_target)
    deviation = float(np.max(np.abs(cs - cs_target) / cs_target))
    return ScheduleValidation(t, B, a, cs, h_target, 2.0 * (1.0 - cs / cs0), deviation)
