"""Parameter sweeps, jump detection, critical-point bisection and export."""

from __future__ import annotations

import dataclasses
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import igp, uhlmann
from .errors import CriticalPointError, InvalidSpecError
from .phase import phase_distance, to_unit_circle_range, wrap_phase
from .spin import SpinJ

QUANTITIES = ("uhlmann", "igp")
AXES = ("temperature", "endpoint")
METHODS = ("auto", "closed", "trotter", "spectral", "numeric")
CRITICAL_FLOOR = 1e-9

CSV_HEADER = "# geomphase-scan v1"
GRID_CSV_HEADER = "# geomphase-grid v1"


@dataclass(frozen=True)
class SweepSpec:
    """One-dimensional sweep of a geometric phase.

    ``axis`` selects what varies between ``lo`` and ``hi``: the temperature
    (in the same units as ``omega0``) or the evolution endpoint (``theta_f`` or
    ``Theta_f``, IGP only). The other one is held at ``temperature`` /
    ``endpoint``. ``theta`` is the latitude of the CSS Uhlmann loop and ``phi``
    the frozen azimuth of an IGP path.

    ``method`` picks the evaluation route: ``closed`` (closed-form phase),
    ``trotter`` (Trotter product of the closed-form connection), ``spectral``
    (Trotter product of the spectral connection, or the overlap sum for the
    one-axis IGP) or ``numeric`` (trace of the constructed IGP evolution).
    ``auto`` means ``trotter`` for Uhlmann phases and ``closed`` for IGPs
    where a closed form exists.
    """

    quantity: str
    family: str
    lo: float
    hi: float
    n: int = 200
    axis: str = "temperature"
    scale: str = "linear"
    two_j: int | None = None
    omega0: float = 1.0
    theta: float = np.pi / 2
    phi: float | None = None
    endpoint: float | None = None
    temperature: float | None = None
    n_steps: int = 4096
    refine: bool = False
    method: str = "auto"
    jump_threshold: float = np.pi / 2

    def __post_init__(self):
        if self.quantity not in QUANTITIES:
            raise InvalidSpecError(f"quantity must be one of {QUANTITIES}")
        if self.family not in ("css", "oneaxis", "twoaxis"):
            raise InvalidSpecError(f"unknown family {self.family!r}")
        if self.axis not in AXES:
            raise InvalidSpecError(f"axis must be one of {AXES}")
        if self.scale not in ("linear", "log"):
            raise InvalidSpecError("scale must be linear or log")
        if self.method not in METHODS:
            raise InvalidSpecError(f"method must be one of {METHODS}")
        if not self.lo < self.hi:
            raise InvalidSpecError("lo must be smaller than hi")
        if self.n < 2:
            raise InvalidSpecError("a sweep needs at least 2 points")
        if self.scale == "log" and self.lo <= 0:
            raise InvalidSpecError("log spacing needs lo > 0")
        if not self.omega0 > 0:
            raise InvalidSpecError("omega0 must be positive")
        if self.two_j is None:
            object.__setattr__(self, "two_j", 3 if self.family == "css" else 2)
        SpinJ(self.two_j)
        if self.quantity == "uhlmann":
            if self.axis != "temperature":
                raise InvalidSpecError("Uhlmann loops are closed; only the temperature axis applies")
            if self.family != "css" and self.two_j != 2:
                raise InvalidSpecError("squeezed-state Uhlmann loops are defined for j=1 only")
            if self.method == "numeric":
                raise InvalidSpecError("the numeric method applies to IGPs only")
            if self.lo < uhlmann.MIN_TEMPERATURE * self.omega0:
                raise InvalidSpecError("temperature below the full-rank floor of 1e-3 omega0")
            if self.resolved_method() == "closed" and not (self.family == "css" and math.isclose(self.theta, np.pi / 2, abs_tol=1e-12)):
                raise InvalidSpecError("the closed-form Uhlmann phase covers the CSS equator only")
        else:
            if self.axis == "temperature" and self.endpoint is None:
                raise InvalidSpecError("an IGP temperature sweep needs a fixed endpoint")
            if self.axis == "endpoint" and self.temperature is None:
                raise InvalidSpecError("an IGP endpoint sweep needs a fixed temperature")
            if self.family != "css" and self.two_j != 2:
                raise InvalidSpecError("squeezed-state IGPs are defined for j=1 only")
            m = self.resolved_method()
            if m == "closed" and self.family == "css" and self.two_j != 3:
                raise InvalidSpecError("the closed-form CSS IGP exists for j=3/2 only")
            if m == "spectral" and self.family != "oneaxis":
                raise InvalidSpecError("the spectral IGP formula covers the one-axis family only")
            if m == "trotter":
                raise InvalidSpecError("IGPs need no Trotter product; use closed or numeric")
        if self.axis == "temperature" and self.lo <= 0:
            raise InvalidSpecError("temperatures must be positive")

    def resolved_method(self) -> str:
        if self.method != "auto":
            return self.method
        if self.quantity == "uhlmann":
            return "trotter"
        if self.family == "css" and self.two_j != 3:
            return "numeric"
        return "closed"

    def axis_values(self) -> np.ndarray:
        if self.scale == "log":
            return np.geomspace(self.lo, self.hi, self.n)
        return np.linspace(self.lo, self.hi, self.n)

    def at(self, value: float) -> tuple[float, float | None]:
        """``(temperature, endpoint)`` for a point on the axis."""
        if self.axis == "temperature":
            return value, self.endpoint
        return self.temperature, value


class PointResult(NamedTuple):
    phase: float
    trace_mag: float
    flag: str


@dataclass(frozen=True)
class JumpEvent:
    axis_value_lo: float
    axis_value_hi: float
    phase_lo: float
    phase_hi: float
    magnitude: float


@dataclass(frozen=True, eq=False)
class PhaseScan:
    spec: SweepSpec
    axis: np.ndarray
    phase: np.ndarray
    trace_mag: np.ndarray
    flags: tuple[str, ...]
    jumps: tuple[JumpEvent, ...] = field(default=())

    @property
    def rows(self):
        return list(zip(self.axis.tolist(), self.phase.tolist(), self.trace_mag.tolist(), self.flags))


@dataclass(frozen=True, eq=False)
class PhaseGrid:
    """Phases on a temperature x endpoint lattice; row ``i`` is temperature ``i``."""

    spec: SweepSpec
    temperatures: np.ndarray
    endpoints: np.ndarray
    phase: np.ndarray
    trace_mag: np.ndarray
    flags: np.ndarray


# -- evaluation --------------------------------------------------------------


def _uhlmann_point(spec: SweepSpec, temperature: float) -> tuple[complex | float, float, bool]:
    beta = 1.0 / temperature
    method = spec.resolved_method()
    j = SpinJ(spec.two_j)
    if method == "closed":
        tr = uhlmann.css_equator_trace(j, beta, spec.omega0)
        return np.angle(tr), abs(tr), True
    connection = "spectral" if method == "spectral" else "closed"
    if spec.family == "css":
        res = uhlmann.uhlmann_css(j, spec.theta, beta, spec.omega0, spec.n_steps, spec.refine, connection)
    elif spec.family == "oneaxis":
        res = uhlmann.uhlmann_one_axis(beta, spec.omega0, spec.n_steps, spec.refine, connection)
    else:
        res = uhlmann.uhlmann_two_axis(beta, spec.omega0, spec.n_steps, spec.refine, connection)
    return res.phase, res.trace_magnitude, res.converged or not spec.refine


def _igp_point(spec: SweepSpec, temperature: float, endpoint: float) -> tuple[float, float, bool]:
    beta = 1.0 / temperature
    method = spec.resolved_method()
    if method == "numeric":
        ev = igp.EvolutionSpec(spec.family, endpoint, spec.phi, spec.n_steps, SpinJ(spec.two_j))
        z = igp.igp_numeric_trace(ev, beta, spec.omega0)
    elif method == "spectral":
        z = igp.igp_one_axis_spectral_sum(endpoint, beta, spec.omega0)
    elif spec.family == "css":
        z = igp.igp_css_argument(endpoint, beta, spec.omega0)
    elif spec.family == "oneaxis":
        z = igp.igp_one_axis_argument(endpoint, beta, spec.omega0)
    else:
        z = igp.igp_two_axis_argument(endpoint, beta, spec.omega0)
    return np.angle(z), abs(z), True


def evaluate_point(spec: SweepSpec, value: float) -> PointResult:
    """Phase at one axis value; undefined phases come back as NaN flagged ``critical``."""
    temperature, endpoint = spec.at(value)
    try:
        if spec.quantity == "uhlmann":
            phase, mag, converged = _uhlmann_point(spec, temperature)
        else:
            phase, mag, converged = _igp_point(spec, temperature, endpoint)
    except CriticalPointError as exc:
        return PointResult(math.nan, exc.magnitude, "critical")
    if mag < CRITICAL_FLOOR:
        return PointResult(math.nan, mag, "critical")
    return PointResult(wrap_phase(phase), float(mag), "ok" if converged else "unconverged")


def detect_jumps(axis: np.ndarray, phase: np.ndarray, threshold: float = np.pi / 2) -> list[JumpEvent]:
    """Jumps between consecutive defined phases whose circular distance exceeds ``threshold``.

    Undefined (NaN) samples are skipped, so a jump across a critical sample
    is bracketed by its defined neighbours.
    """
    defined = np.flatnonzero(np.isfinite(phase))
    jumps = []
    for a, b in zip(defined[:-1], defined[1:]):
        mag = phase_distance(phase[a], phase[b])
        if mag > threshold:
            jumps.append(JumpEvent(float(axis[a]), float(axis[b]), float(phase[a]), float(phase[b]), mag))
    return jumps


def _map(fn, values, workers: int):
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, values))
    return [fn(v) for v in values]


def sweep(spec: SweepSpec, workers: int = 1) -> PhaseScan:
    """Evaluate every grid point independently (optionally on ``workers`` threads).

    Results are gathered by index, so the output does not depend on ``workers``.
    """
    axis = spec.axis_values()
    points = _map(lambda v: evaluate_point(spec, v), axis, workers)
    phase = np.array([p.phase for p in points])
    mags = np.array([p.trace_mag for p in points])
    flags = tuple(p.flag for p in points)
    jumps = tuple(detect_jumps(axis, phase, spec.jump_threshold))
    return PhaseScan(spec=spec, axis=axis, phase=phase, trace_mag=mags, flags=flags, jumps=jumps)


def default_bisection_tol(spec: SweepSpec) -> float:
    if spec.quantity == "uhlmann" and spec.resolved_method() != "closed":
        return 1e-3
    return 1e-6


def find_critical(spec: SweepSpec, bracket: tuple[float, float], tol: float | None = None) -> float:
    """Locate a phase jump inside ``bracket`` on ``spec``'s axis by bisection.

    The jump is tracked by comparing each midpoint phase with the phase at the
    lower end. A midpoint whose phase is undefined lies on the critical point
    itself and is returned directly.

    Raises:
        InvalidSpecError: if the phases at the bracket ends are within pi/2.
    """
    lo, hi = map(float, bracket)
    if not lo < hi:
        raise InvalidSpecError("bracket must satisfy lo < hi")
    tol = default_bisection_tol(spec) if tol is None else tol
    p_lo = evaluate_point(spec, lo).phase
    p_hi = evaluate_point(spec, hi).phase
    if not (np.isfinite(p_lo) and np.isfinite(p_hi)):
        raise InvalidSpecError("bracket ends must have a defined phase")
    if phase_distance(p_lo, p_hi) <= np.pi / 2:
        raise InvalidSpecError("no jump in bracket")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        p_mid = evaluate_point(spec, mid).phase
        if not np.isfinite(p_mid):
            return mid
        if phase_distance(p_mid, p_lo) > np.pi / 2:
            hi = mid
        else:
            lo, p_lo = mid, p_mid
    return 0.5 * (lo + hi)


def grid(spec: SweepSpec, temperatures, workers: int = 1) -> PhaseGrid:
    """IGP on a temperature x endpoint lattice.

    ``spec`` must sweep the endpoint axis; each row is that sweep repeated at
    one of ``temperatures``, so a grid row equals the matching 1-D sweep.
    """
    if spec.axis != "endpoint":
        raise InvalidSpecError("grid rows sweep the endpoint axis")
    temperatures = np.asarray(temperatures, float)
    rows = _map(lambda t: sweep(dataclasses.replace(spec, temperature=float(t))), temperatures, workers)
    return PhaseGrid(
        spec=spec,
        temperatures=temperatures,
        endpoints=spec.axis_values(),
        phase=np.array([r.phase for r in rows]),
        trace_mag=np.array([r.trace_mag for r in rows]),
        flags=np.array([r.flags for r in rows]),
    )


# -- export ------------------------------------------------------------------


def _num(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    return format(x, ".12g")


def _json_num(x: float):
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(format(x, ".12g"))


def _export_phase(p: float) -> float:
    return math.nan if math.isnan(p) else to_unit_circle_range(p)


def _spec_dict(spec: SweepSpec) -> dict:
    out = {}
    for k, v in dataclasses.asdict(spec).items():
        out[k] = _json_num(v) if isinstance(v, float) else v
    return out


def to_csv(result: PhaseScan | PhaseGrid) -> str:
    lines = []
    if isinstance(result, PhaseScan):
        lines.append(CSV_HEADER)
        lines.append("axis,phase,trace_mag,flag")
        for a, p, m, f in result.rows:
            lines.append(",".join([_num(a), _num(_export_phase(p)), _num(m), f]))
    else:
        lines.append(GRID_CSV_HEADER)
        lines.append("temperature,endpoint,phase,trace_mag,flag")
        for i, t in enumerate(result.temperatures):
            for k, e in enumerate(result.endpoints):
                p = _export_phase(result.phase[i, k])
                lines.append(",".join([_num(t), _num(e), _num(p), _num(result.trace_mag[i, k]), str(result.flags[i, k])]))
    return "\n".join(lines) + "\n"


def to_json(result: PhaseScan | PhaseGrid) -> str:
    if isinstance(result, PhaseScan):
        doc = {
            "format": "geomphase-scan v1",
            "spec": _spec_dict(result.spec),
            "axis": [_json_num(a) for a in result.axis],
            "phase": [_json_num(_export_phase(p)) for p in result.phase],
            "trace_mag": [_json_num(m) for m in result.trace_mag],
            "flags": list(result.flags),
            "jumps": [
                {"lo": _json_num(j.axis_value_lo), "hi": _json_num(j.axis_value_hi), "magnitude": _json_num(j.magnitude)}
                for j in result.jumps
            ],
        }
    else:
        doc = {
            "format": "geomphase-grid v1",
            "spec": _spec_dict(result.spec),
            "axes": {
                "temperature": [_json_num(t) for t in result.temperatures],
                "endpoint": [_json_num(e) for e in result.endpoints],
            },
            "phase": [_json_num(_export_phase(p)) for p in result.phase.ravel()],
            "trace_mag": [_json_num(m) for m in result.trace_mag.ravel()],
            "flags": [str(f) for f in result.flags.ravel()],
        }
    return json.dumps(doc, indent=2) + "\n"


def export(result: PhaseScan | PhaseGrid, fmt: str = "csv", destination=None) -> None:
    """Write ``result`` as CSV or JSON to a path, an open text stream, or stdout.

    ``destination`` of ``None`` or ``"-"`` means stdout.
    """
    if fmt == "csv":
        text = to_csv(result)
    elif fmt == "json":
        text = to_json(result)
    else:
        raise InvalidSpecError(f"unknown format {fmt!r}")
    if destination is None or destination == "-":
        sys.stdout.write(text)
    elif isinstance(destination, io.TextIOBase) or hasattr(destination, "write"):
        destination.write(text)
    else:
        with open(destination, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(text)
