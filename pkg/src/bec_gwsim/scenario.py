"""Scenario files: TOML (or JSON with the same layout) describing one batch run.

Blocks, all SI except magnetic fields in gauss::

    [constants]   c, G, hbar                      (optional overrides)
    [condensate]  atom_mass, box_length, n_modes, rho0,
                  and either (number_density + scattering_length) or cs0
    [wave]        a_plus, a_cross, omega or omega_over_omega1
    [source]      mass_1, mass_2, separation, distance
    [feshbach]    a_bg, B_res, width, B_op, delta_b
    [chart]       tau0 (or ell), cs0, rho0, n_tau, n_xi, periods, xi_extent, chi_mode
    [run]         periods, tolerance, reduction, scan_omega_over_omega1 or scan_omega,
                  scan_period_range, output

The strain comes from exactly one of ``wave.a_plus`` and ``[source]``; the
sound speed from exactly one of ``condensate.cs0`` and the pair
(``number_density``, ``scattering_length``).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .constants import PhysicalConstants, default_constants
from .control import FeshbachParams, sound_speed
from .coordinates import ChartParams
from .dynamics import REDUCTIONS, ModeBasis, build_basis
from .errors import ScenarioError
from .metric import CondensateParams, WaveParams
from .sources import BinarySource, binary_wave_params

KNOWN_BLOCKS = {"constants", "condensate", "wave", "source", "feshbach", "chart", "run"}
KNOWN_KEYS = {
    "constants": {"c", "G", "hbar"},
    "condensate": {"atom_mass", "box_length", "n_modes", "rho0", "number_density", "scattering_length", "cs0"},
    "wave": {"a_plus", "a_cross", "omega", "omega_over_omega1", "duration"},
    "source": {"mass_1", "mass_2", "separation", "distance"},
    "feshbach": {"a_bg", "B_res", "width", "B_op", "delta_b"},
    "chart": {"tau0", "ell", "cs0", "rho0", "n_tau", "n_xi", "periods", "xi_extent", "chi_mode"},
    "run": {
        "periods",
        "tolerance",
        "reduction",
        "scan_omega",
        "scan_omega_over_omega1",
        "scan_period_range",
        "output",
    },
}


def _number(block, name, path, required=True, positive=True, default=None):
    if name not in block:
        if required:
            raise ScenarioError("missing required field", f"{path}.{name}")
        return default
    value = block[name]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"expected a number, got {value!r}", f"{path}.{name}")
    if positive and not value > 0:
        raise ScenarioError(f"must be strictly positive, got {value!r}", f"{path}.{name}")
    return float(value)


def _integer(block, name, path, required=True, default=None, minimum=1):
    if name not in block:
        if required:
            raise ScenarioError("missing required field", f"{path}.{name}")
        return default
    value = block[name]
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ScenarioError(f"expected an integer >= {minimum}, got {value!r}", f"{path}.{name}")
    return value


@dataclass
class Scenario:
    raw: dict
    source_bytes: bytes
    path: Path | None = None
    constants: PhysicalConstants = field(default_factory=default_constants)

    @property
    def input_hash(self) -> str:
        return hashlib.sha256(self.source_bytes).hexdigest()

    def block(self, name: str, required: bool = True) -> dict:
        if name not in self.raw:
            if required:
                raise ScenarioError("missing required block", name)
            return {}
        return self.raw[name]

    # condensate -----------------------------------------------------------

    def condensate(self) -> CondensateParams:
        b = self.block("condensate")
        has_cs0 = "cs0" in b
        has_micro = "number_density" in b or "scattering_length" in b
        if has_cs0 == has_micro:
            raise ScenarioError(
                "supply exactly one of cs0 or (number_density, scattering_length)", "condensate"
            )
        m_a = _number(b, "atom_mass", "condensate")
        length = _number(b, "box_length", "condensate")
        rho0 = _number(b, "rho0", "condensate", required=False, default=1.0)
        if has_cs0:
            cs0 = _number(b, "cs0", "condensate")
            return CondensateParams(rho0=rho0, atom_mass=m_a, box_length=length, cs0=cs0)
        n = _number(b, "number_density", "condensate")
        a = _number(b, "scattering_length", "condensate")
        cs0 = float(sound_speed(n, a, m_a, self.constants.hbar))
        return CondensateParams(
            rho0=rho0, atom_mass=m_a, box_length=length, cs0=cs0, scattering_length=a, number_density=n
        )

    def basis(self) -> ModeBasis:
        cond = self.condensate()
        n_modes = _integer(self.block("condensate"), "n_modes", "condensate")
        return build_basis(n_modes, cond.box_length, cond.cs0)

    # strain ---------------------------------------------------------------

    def binary_source(self) -> BinarySource:
        b = self.block("source")
        try:
            return BinarySource(
                _number(b, "mass_1", "source"),
                _number(b, "mass_2", "source"),
                _number(b, "separation", "source"),
                _number(b, "distance", "source"),
            )
        except ValueError as exc:
            if isinstance(exc, ScenarioError):
                raise
            raise ScenarioError(str(exc), "source") from exc

    def wave(self, omega1: float | None = None) -> WaveParams:
        """Target wave from [wave] or derived from [source]."""
        w = self.block("wave", required=False)
        has_source = "source" in self.raw
        has_amp = "a_plus" in w
        if has_source == has_amp:
            raise ScenarioError("supply the strain through exactly one of wave.a_plus or [source]", "wave.a_plus")
        a_cross = _number(w, "a_cross", "wave", required=False, positive=False, default=0.0)
        duration = _number(w, "duration", "wave", required=False, positive=False, default=0.0)
        if has_source:
            bw = binary_wave_params(self.binary_source(), self.constants)
            a_plus, omega = bw.a_plus, bw.omega
        else:
            a_plus = _number(w, "a_plus", "wave", positive=False)
            if ("omega" in w) == ("omega_over_omega1" in w):
                raise ScenarioError("supply exactly one of omega or omega_over_omega1", "wave.omega")
            if "omega" in w:
                omega = _number(w, "omega", "wave")
            else:
                if omega1 is None:
                    omega1 = self.basis().omega1
                omega = _number(w, "omega_over_omega1", "wave") * omega1
        try:
            return WaveParams(a_plus=a_plus, omega=omega, a_cross=a_cross, duration=duration)
        except ValueError as exc:
            raise ScenarioError(str(exc), "wave") from exc

    # control --------------------------------------------------------------

    def feshbach(self) -> FeshbachParams:
        b = self.block("feshbach")
        try:
            return FeshbachParams(
                a_bg=_number(b, "a_bg", "feshbach", positive=False),
                B_res=_number(b, "B_res", "feshbach", positive=False),
                width=_number(b, "width", "feshbach", positive=False),
                B_op=_number(b, "B_op", "feshbach", positive=False),
            )
        except ScenarioError:
            raise
        except ValueError as exc:
            raise ScenarioError(str(exc), "feshbach") from exc

    def delta_b(self) -> float | None:
        return _number(self.block("feshbach"), "delta_b", "feshbach", required=False, positive=False)

    # chart ----------------------------------------------------------------

    def chart(self) -> ChartParams:
        b = self.block("chart")
        w = self.block("wave")
        if "a_plus" not in w or "omega" not in w:
            raise ScenarioError("verify needs wave.a_plus and wave.omega", "wave")
        wave = self.wave()
        cs0 = _number(b, "cs0", "chart")
        rho0 = _number(b, "rho0", "chart", required=False, default=1.0)
        if ("tau0" in b) == ("ell" in b):
            raise ScenarioError("supply exactly one of tau0 or ell", "chart.tau0")
        try:
            if "tau0" in b:
                return ChartParams.from_tau0(_number(b, "tau0", "chart"), cs0, wave, self.constants.c, rho0)
            return ChartParams(ell=_number(b, "ell", "chart"), cs0=cs0, wave=wave, c=self.constants.c, rho0=rho0)
        except ValueError as exc:
            raise ScenarioError(str(exc), "chart") from exc

    def chart_grid(self) -> dict:
        b = self.block("chart")
        mode = b.get("chi_mode", "first_order")
        if mode not in ("first_order", "exact"):
            raise ScenarioError(f"unknown chi_mode {mode!r}", "chart.chi_mode")
        return {
            "n_tau": _integer(b, "n_tau", "chart", required=False, default=32, minimum=2),
            "n_xi": _integer(b, "n_xi", "chart", required=False, default=32, minimum=2),
            "periods": _number(b, "periods", "chart", required=False, default=2.0),
            "xi_extent": _number(b, "xi_extent", "chart", required=False, default=1.0),
            "chi_mode": mode,
        }

    # run ------------------------------------------------------------------

    def run_block(self) -> dict:
        return self.block("run", required=False)

    def periods(self) -> int:
        r = self.run_block()
        if "periods" in r and (isinstance(r["periods"], float) and not r["periods"].is_integer()):
            raise ScenarioError("t_end must be an integer number of drive periods", "run.periods")
        if isinstance(r.get("periods"), float):
            r = dict(r, periods=int(r["periods"]))
        return _integer(r, "periods", "run", required=False, default=10)

    def tolerance(self) -> float:
        return _number(self.run_block(), "tolerance", "run", required=False, default=1e-10)

    def reduction(self) -> str:
        red = self.run_block().get("reduction", "quasi1d")
        if red not in REDUCTIONS:
            raise ScenarioError(f"unknown reduction {red!r}; expected one of {REDUCTIONS}", "run.reduction")
        return red

    def scan_omegas(self, omega1: float) -> list[float]:
        r = self.run_block()
        if ("scan_omega" in r) == ("scan_omega_over_omega1" in r):
            raise ScenarioError("supply exactly one of scan_omega or scan_omega_over_omega1", "run.scan_omega")
        key = "scan_omega" if "scan_omega" in r else "scan_omega_over_omega1"
        values = r[key]
        if not isinstance(values, list) or not values:
            raise ScenarioError("expected a non-empty list of numbers", f"run.{key}")
        out = []
        for i, v in enumerate(values):
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
                raise ScenarioError(f"expected a positive number, got {v!r}", f"run.{key}[{i}]")
            out.append(float(v) * (omega1 if key == "scan_omega_over_omega1" else 1.0))
        return out

    def scan_periods(self) -> list[int]:
        r = self.run_block()
        rng = r.get("scan_period_range", [10, 60])
        if (
            not isinstance(rng, list)
            or len(rng) != 2
            or not all(isinstance(v, int) and not isinstance(v, bool) for v in rng)
            or not 1 <= rng[0] < rng[1]
        ):
            raise ScenarioError("expected [first, last] integer periods with 1 <= first < last", "run.scan_period_range")
        return list(range(rng[0], rng[1] + 1))

    def output_dir(self) -> Path | None:
        out = self.run_block().get("output")
        if out is None:
            return None
        path = Path(out)
        if not path.is_absolute() and self.path is not None:
            path = self.path.parent / path
        return path


def _validate_layout(raw: dict):
    if not isinstance(raw, dict):
        raise ScenarioError("top level must be a table")
    for name, block in raw.items():
        if name not in KNOWN_BLOCKS:
            raise ScenarioError("unknown block", name)
        if not isinstance(block, dict):
            raise ScenarioError("expected a table", name)
        for key in block:
            if key not in KNOWN_KEYS[name]:
                raise ScenarioError("unknown field", f"{name}.{key}")


def parse_scenario(data: bytes, fmt: str = "toml", path: Path | None = None) -> Scenario:
    try:
        if fmt == "json":
            raw = json.loads(data.decode("utf-8"))
        else:
            raw = tomllib.loads(data.decode("utf-8"))
    except (ValueError, UnicodeDecodeError) as exc:
        raise ScenarioError(f"cannot parse scenario: {exc}") from exc
    _validate_layout(raw)
    consts = raw.get("constants", {})
    overrides = {k: _number(consts, k, "constants") for k in consts}
    return Scenario(raw=raw, source_bytes=data, path=path, constants=default_constants().replace(**overrides))


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario: {exc}", str(path)) from exc
    fmt = "json" if path.suffix.lower() == ".json" else "toml"
    return parse_scenario(data, fmt, path)
