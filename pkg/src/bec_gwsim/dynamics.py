"""Phonon modes of a box-trapped quasi-1D condensate under a uniform strain drive.

With Dirichlet walls a spatially uniform h(t) keeps the sine modes
sin(k_n x) decoupled, so every mode amplitude obeys its own linear ODE of the
form d/dt[P(h) qdot] + w_n^2 R(h) q = 0.  Two reductions of the field
equation on the strain-modulated phonon metric are available:

``quasi1d``
    Field uniform across the transverse directions of the full TT metric
    diag(-cs0^2, 1+h, 1-h, 1):  P = sqrt(1-h^2),  R = sqrt(1-h^2)/(1+h).
    To first order this is the Mathieu equation qddot + w^2 (1-h) q = 0 and
    shows parametric resonance at Omega = 2 w_n.

``conformal1d``
    Strictly 1+1 dimensional line element -cs0^2 dt^2 + (1+h) dx^2:
    P = sqrt(1+h),  R = 1/sqrt(1+h).  In the time variable
    T = int dt / sqrt(1+h) this is a free oscillator, so it creates no
    particles for any drive.

In both cases W = P Im(q* qdot) is conserved.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .errors import IntegrationError, PreconditionError
from .metric import MAX_STRAIN, WaveParams

REDUCTIONS = ("quasi1d", "conformal1d")
PERTURBATIVE_BETA = 0.3
# |h(t_end)| below this counts as a flat out-region.
FLAT_TOLERANCE = 1e-10


@dataclass(frozen=True)
class ModeBasis:
    n_modes: int
    box_length: float
    cs0: float

    def __post_init__(self):
        if int(self.n_modes) != self.n_modes or self.n_modes < 1:
            raise ValueError("n_modes must be a positive integer")
        if not self.box_length > 0 or not self.cs0 > 0:
            raise ValueError("box_length and cs0 must be positive")

    @property
    def indices(self) -> np.ndarray:
        return np.arange(1, self.n_modes + 1)

    @property
    def wavenumbers(self) -> np.ndarray:
        return self.indices * np.pi / self.box_length

    @property
    def frequencies(self) -> np.ndarray:
        return self.cs0 * self.wavenumbers

    @property
    def omega1(self) -> float:
        return float(np.pi * self.cs0 / self.box_length)


def build_basis(n_modes: int, box_length: float, cs0: float) -> ModeBasis:
    return ModeBasis(n_modes, box_length, cs0)


@dataclass(frozen=True)
class DriveSchedule:
    """Uniform strain h(t) and its derivative.

    ``period`` is set for periodic drives; extraction runs must then last an
    integer number of periods so that h vanishes at both ends.
    """

    h: Callable[[float], float]
    hdot: Callable[[float], float]
    period: float | None = None
    sup: float = 0.0
    label: str = "custom"

    def __post_init__(self):
        if self.sup > MAX_STRAIN:
            raise ValueError(f"sup|h| = {self.sup} exceeds {MAX_STRAIN}")

    @classmethod
    def sinusoidal(cls, amplitude: float, omega: float) -> "DriveSchedule":
        if not omega > 0:
            raise ValueError("omega must be positive")
        return cls(
            h=lambda t: amplitude * np.sin(omega * t),
            hdot=lambda t: amplitude * omega * np.cos(omega * t),
            period=2.0 * np.pi / omega,
            sup=abs(amplitude),
            label=f"sin(A={amplitude!r}, Omega={omega!r})",
        )

    @classmethod
    def from_wave(cls, wave: WaveParams) -> "DriveSchedule":
        return cls.sinusoidal(wave.a_plus, wave.omega)

    @classmethod
    def flat(cls) -> "DriveSchedule":
        return cls(h=lambda t: 0.0 * t, hdot=lambda t: 0.0 * t, period=None, sup=0.0, label="flat")

    @classmethod
    def smooth_step(cls, h0: float, ramp: float, hold: float) -> "DriveSchedule":
        """Static stretch h0 switched on and off with sin^2 ramps of length ``ramp``.

        h is zero again from 2*ramp + hold onwards.
        """
        if not ramp > 0 or hold < 0:
            raise ValueError("need ramp > 0 and hold >= 0")
        t1, t2, t3 = ramp, ramp + hold, 2 * ramp + hold

        def h(t):
            if t <= 0 or t >= t3:
                return 0.0
            if t < t1:
                return h0 * np.sin(0.5 * np.pi * t / ramp) ** 2
            if t <= t2:
                return h0
            return h0 * np.sin(0.5 * np.pi * (t3 - t) / ramp) ** 2

        def hdot(t):
            if t <= 0 or t >= t3 or t1 <= t <= t2:
                return 0.0
            if t < t1:
                return h0 * 0.5 * np.pi / ramp * np.sin(np.pi * t / ramp)
            return -h0 * 0.5 * np.pi / ramp * np.sin(np.pi * (t3 - t) / ramp)

        return cls(h=h, hdot=hdot, period=None, sup=abs(h0), label=f"step(h0={h0!r}, ramp={ramp!r}, hold={hold!r})")

    def reversed(self, t_end: float) -> "DriveSchedule":
        """The drive played backwards: h'(t) = h(t_end - t)."""
        h, hdot = self.h, self.hdot
        return DriveSchedule(
            h=lambda t: h(t_end - t),
            hdot=lambda t: -hdot(t_end - t),
            period=self.period,
            sup=self.sup,
            label=f"reversed({self.label})",
        )

    def then(self, other: "DriveSchedule", t_switch: float) -> "DriveSchedule":
        """This drive up to ``t_switch``, then ``other`` shifted to start there."""
        h1, d1, h2, d2 = self.h, self.hdot, other.h, other.hdot
        return DriveSchedule(
            h=lambda t: h1(t) if t < t_switch else h2(t - t_switch),
            hdot=lambda t: d1(t) if t < t_switch else d2(t - t_switch),
            period=self.period if self.period == other.period else None,
            sup=max(self.sup, other.sup),
            label=f"{self.label} then {other.label}",
        )


def _coefficients(h, hdot, reduction):
    """Return (damping, stiffness factor) with qddot = damping*qdot - w^2*stiffness*q."""
    if reduction == "quasi1d":
        return h * hdot / (1.0 - h * h), 1.0 / (1.0 + h)
    if reduction == "conformal1d":
        return -hdot / (2.0 * (1.0 + h)), 1.0 / (1.0 + h)
    raise ValueError(f"reduction must be one of {REDUCTIONS}, got {reduction!r}")


def momentum_factor(h, reduction: str):
    """P(h) in the conserved Wronskian P Im(q* qdot)."""
    if reduction == "quasi1d":
        return np.sqrt(1.0 - np.asarray(h) ** 2)
    if reduction == "conformal1d":
        return np.sqrt(1.0 + np.asarray(h))
    raise ValueError(f"reduction must be one of {REDUCTIONS}, got {reduction!r}")


def reduced_mode_rhs(h, hdot, k_n, cs0, state, reduction: str = "quasi1d"):
    """Time derivative (qdot, qddot) of one mode amplitude (or an array of them)."""
    if h <= -1.0 or (reduction == "quasi1d" and h >= 1.0):
        raise PreconditionError(f"strain h = {h!r} outside the admissible range")
    q, qdot = state
    damping, stiffness = _coefficients(h, hdot, reduction)
    omega_sq = (cs0 * np.asarray(k_n)) ** 2
    return qdot, damping * qdot - omega_sq * stiffness * q


@dataclass
class ModeEnsemble:
    """Complex mode solutions q_m(t_j), qdot_m(t_j); rows are in-modes."""

    times: np.ndarray
    q: np.ndarray
    qdot: np.ndarray
    basis: ModeBasis
    drive: DriveSchedule
    reduction: str
    tol: float
    wronskian_drift: np.ndarray
    nfev: int = 0

    def wronskian(self) -> np.ndarray:
        h = np.array([self.drive.h(t) for t in self.times])
        return momentum_factor(h, self.reduction) * np.imag(np.conj(self.q) * self.qdot)

    def at(self, index: int) -> "ModeEnsemble":
        """Ensemble truncated to end at sample ``index``."""
        stop = index % self.times.size + 1
        return ModeEnsemble(
            self.times[:stop],
            self.q[:, :stop],
            self.qdot[:, :stop],
            self.basis,
            self.drive,
            self.reduction,
            self.tol,
            self.wronskian_drift,
            self.nfev,
        )


def positive_frequency_data(omega) -> tuple[np.ndarray, np.ndarray]:
    omega = np.asarray(omega, dtype=float)
    q0 = 1.0 / np.sqrt(2.0 * omega) + 0j
    return q0, -1j * omega * q0


def _check_integer_periods(drive: DriveSchedule, t_end: float):
    if drive.period is None:
        return
    n = t_end / drive.period
    if abs(n - round(n)) > 1e-9 * max(1.0, n):
        raise PreconditionError(f"t_end = {t_end!r} is not an integer number of drive periods ({n:.6g})")


def _integrate_mode(omega_n, k_n, cs0, drive, t_end, t_eval, tol, reduction, q0, p0, max_step):
    def rhs(t, y):
        q = y[0] + 1j * y[1]
        qd = y[2] + 1j * y[3]
        dq, dqd = reduced_mode_rhs(drive.h(t), drive.hdot(t), k_n, cs0, (q, qd), reduction)
        return np.array([dq.real, dq.imag, dqd.real, dqd.imag])

    scale = 1.0 / np.sqrt(2.0 * omega_n)
    atol = tol * scale * np.array([1.0, 1.0, omega_n, omega_n])
    y0 = np.array([q0.real, q0.imag, p0.real, p0.imag])
    sol = solve_ivp(rhs, (0.0, t_end), y0, method="DOP853", t_eval=t_eval, rtol=tol, atol=atol, max_step=max_step)
    if not sol.success:
        raise IntegrationError(f"integrator failed for w={omega_n:g}: {sol.message}")
    return sol.y[0] + 1j * sol.y[1], sol.y[2] + 1j * sol.y[3], sol.nfev


def evolve(
    basis: ModeBasis,
    drive: DriveSchedule,
    t_end: float,
    tol: float = 1e-10,
    reduction: str = "quasi1d",
    t_eval: Sequence[float] | None = None,
    max_drift: float | None = None,
    initial: tuple | None = None,
) -> ModeEnsemble:
    """Integrate every in-mode with an adaptive 8th-order Dormand-Prince scheme.

    Each mode is integrated on its own so that step control follows its
    frequency.  Initial data default to the positive-frequency solutions
    q = 1/sqrt(2w), qdot = -i w q; ``initial`` overrides them with arrays
    (q0, qdot0).  Raises IntegrationError when the integrator fails or the
    Wronskian drifts by more than ``max_drift`` (default max(1e3*tol, 1e-9)).
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if reduction not in REDUCTIONS:
        raise ValueError(f"reduction must be one of {REDUCTIONS}, got {reduction!r}")
    _check_integer_periods(drive, t_end)
    if max_drift is None:
        max_drift = max(1e3 * tol, 1e-9)

    omega = basis.frequencies
    k = basis.wavenumbers
    n = basis.n_modes
    q0, p0 = positive_frequency_data(omega) if initial is None else (np.asarray(initial[0]), np.asarray(initial[1]))

    if t_eval is None:
        n_samples = 32 * max(1, int(round(t_end / drive.period))) if drive.period else 2048
        t_eval = np.linspace(0.0, t_end, n_samples + 1)
    t_eval = np.asarray(t_eval, dtype=float)
    if t_eval.size == 0 or t_eval[-1] != t_end:
        t_eval = np.append(t_eval[t_eval < t_end], t_end)

    if t_end == 0.0:
        times = np.zeros(1)
        q, qdot, nfev = q0[:, None].astype(complex), p0[:, None].astype(complex), 0
    else:
        max_step = drive.period / 8.0 if drive.period else np.inf
        times = t_eval
        q = np.empty((n, times.size), dtype=complex)
        qdot = np.empty_like(q)
        nfev = 0
        for j in range(n):
            q[j], qdot[j], fev = _integrate_mode(
                omega[j], k[j], basis.cs0, drive, t_end, t_eval, tol, reduction, q0[j], p0[j], max_step
            )
            nfev += fev

    ens = ModeEnsemble(times, q, qdot, basis, drive, reduction, tol, np.zeros(n), nfev)
    w = ens.wronskian()
    drift = np.max(np.abs(w - w[:, :1]), axis=1) / np.abs(w[:, 0])
    ens.wronskian_drift = drift
    if np.max(drift) > max_drift:
        raise IntegrationError(
            f"Wronskian drift {np.max(drift):.3e} exceeds {max_drift:.1e} at tol={tol:g}",
            achieved=float(np.max(drift)),
        )
    return ens


@dataclass
class BogoliubovMatrices:
    """alpha[m, n], beta[m, n] linking in-mode m to out-mode n at time ``t``."""

    alpha: np.ndarray
    beta: np.ndarray
    t: float = 0.0
    error_estimate: float = 0.0
    extras: dict = field(default_factory=dict)

    def identity_defect(self) -> float:
        """max |alpha alpha^dagger - beta beta^dagger - 1| entrywise."""
        a, b = self.alpha, self.beta
        m = a @ a.conj().T - b @ b.conj().T - np.eye(a.shape[0])
        return float(np.max(np.abs(m)))

    def mode_identity(self) -> np.ndarray:
        """|alpha_nn|^2 - |beta_nn|^2 per mode."""
        return np.abs(np.diag(self.alpha)) ** 2 - np.abs(np.diag(self.beta)) ** 2

    def offdiagonal_max(self) -> float:
        off = ~np.eye(self.beta.shape[0], dtype=bool)
        return float(max(np.max(np.abs(self.alpha[off]), initial=0.0), np.max(np.abs(self.beta[off]), initial=0.0)))


def decompose(q, qdot, omega, t):
    """Split q = (alpha e^{-iwt} + conj(beta) e^{iwt}) / sqrt(2w) on a flat time slice."""
    s = np.sqrt(0.5 * omega)
    alpha = s * (q + 1j * qdot / omega) * np.exp(1j * omega * t)
    beta = np.conj(s * (q - 1j * qdot / omega) * np.exp(-1j * omega * t))
    return alpha, beta


def bogoliubov_extract(ensemble: ModeEnsemble, basis: ModeBasis | None = None) -> BogoliubovMatrices:
    """Bogoliubov coefficients at the last sample of ``ensemble``.

    Only diagonal entries can be non-zero for a uniform drive; the
    off-diagonal blocks are zero by construction.
    """
    basis = basis or ensemble.basis
    t = float(ensemble.times[-1])
    h_end = float(ensemble.drive.h(t))
    if abs(h_end) > FLAT_TOLERANCE:
        raise PreconditionError(f"h(t_end) = {h_end:.3e} != 0; the out-region is not flat")
    omega = basis.frequencies
    a, b = decompose(ensemble.q[:, -1], ensemble.qdot[:, -1], omega, t)
    bog = BogoliubovMatrices(alpha=np.diag(a), beta=np.diag(b), t=t)
    assert bog.offdiagonal_max() == 0.0
    # The per-mode identity holds exactly for exact solutions, so its defect
    # and the Wronskian drift measure the accumulated integration error.
    bog.error_estimate = float(max(np.max(np.abs(bog.mode_identity() - 1.0)), np.max(ensemble.wronskian_drift)))
    return bog


def particle_number(bog: BogoliubovMatrices) -> np.ndarray:
    """Expected quanta per out-mode n: sum over in-modes m of |beta_mn|^2."""
    return np.sum(np.abs(bog.beta) ** 2, axis=0)


@dataclass
class ScanCell:
    omega: float
    mode: int
    slope: float
    slope_raw: float
    number_slope: float
    amplitude: float
    beta_abs_final: float
    n_points: int
    status: str = "ok"


def fit_power_law(t, y):
    """Least-squares slope and prefactor of log y against log t."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = (y > 0) & np.isfinite(y)
    if np.count_nonzero(keep) < 2:
        raise ValueError("need at least two positive samples")
    slope, intercept = np.polyfit(np.log(t[keep]), np.log(y[keep]), 1)
    return float(slope), float(np.exp(intercept))


def beta_history(ensemble: ModeEnsemble, indices) -> np.ndarray:
    """|beta_nn| at the given sample indices; shape (len(indices), n_modes)."""
    omega = ensemble.basis.frequencies
    out = []
    for i in indices:
        _, b = decompose(ensemble.q[:, i], ensemble.qdot[:, i], omega, ensemble.times[i])
        out.append(np.abs(b))
    return np.array(out)


def resonance_scan(
    basis: ModeBasis,
    a_plus: float,
    omega_grid: Sequence[float],
    periods: Sequence[int],
    tol: float = 1e-10,
    reduction: str = "quasi1d",
    window: float = PERTURBATIVE_BETA,
    executor=None,
) -> list[ScanCell]:
    """Growth law of |beta_nn| against run duration for each drive frequency.

    For each Omega a single run is sampled at every integer drive period up
    to max(periods); a run of d periods has the same coefficients as the
    truncated long run.  ``slope`` fits the running maximum of |beta_nn|
    (the growth envelope), ``slope_raw`` fits |beta_nn| itself, and
    ``number_slope`` is the exponent of N_n = |beta_nn|^2 from the envelope.
    Only samples inside the perturbative window |beta| <= ``window`` enter.
    """
    periods = np.asarray(sorted(set(int(p) for p in periods)))
    if periods.size < 2 or periods[0] < 1:
        raise ValueError("periods must contain at least two positive integers")
    if any(not om > 0 for om in omega_grid):
        raise ValueError("omega_grid must be positive")

    def run(omega):
        drive = DriveSchedule.sinusoidal(a_plus, omega)
        period = drive.period
        n_max = int(periods[-1])
        t_eval = period * np.arange(0, n_max + 1)
        ens = evolve(basis, drive, n_max * period, tol=tol, reduction=reduction, t_eval=t_eval)
        hist = beta_history(ens, range(1, n_max + 1))
        envelope = np.maximum.accumulate(hist, axis=0)
        sel = periods - 1
        cells = []
        for j, n in enumerate(basis.indices):
            t = periods * period
            env = envelope[sel, j]
            raw = hist[sel, j]
            inside = env <= window
            cell = ScanCell(omega, int(n), np.nan, np.nan, np.nan, np.nan, float(raw[-1]), int(np.count_nonzero(inside)))
            try:
                cell.slope, cell.amplitude = fit_power_law(t[inside], env[inside])
                cell.slope_raw, _ = fit_power_law(t[inside], raw[inside])
                cell.number_slope = 2.0 * cell.slope
            except ValueError as exc:
                cell.status = f"degenerate: {exc}"
            cells.append(cell)
        return cells

    grid = [float(om) for om in omega_grid]
    blocks = list(executor.map(run, grid)) if executor is not None else [run(om) for om in grid]
    return [cell for block in blocks for cell in block]
