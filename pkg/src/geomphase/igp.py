"""Interferometric geometric phase (IGP) of thermal spin states.

The IGP of a unitary evolution ``U(t)`` is ``arg Tr[rho(0) U(t)]`` provided
``U`` obeys the parallel-transport condition, in which case no dynamic phase
accumulates. Three evolutions are supported:

``css``
    ``D(theta, phi)`` along a longitude (fixed ``phi``) from the north pole.
``oneaxis``
    the phase-compensated one-axis squeeze ``S~(Theta)``.
``twoaxis``
    ``K(theta, phi)`` along the meridian ``phi = pi/2``, ``theta <= 3pi/4``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CriticalPointError, InvalidSpecError, TransportViolationError
from .phase import wrap_phase
from .spin import SpinJ, build_spin_operators, dagger, unitarity_defect
from .states import (
    POLE_CUTOFF,
    ThermalState,
    cumulative_one_axis_phases,
    family_unitaries,
    one_axis_geometric_phases,
    one_axis_phase_integrand,
    one_axis_squeeze,
    thermal_state,
    tilde_S,
)

TRACE_FLOOR = 1e-12
ARGUMENT_FLOOR = 1e-14
TRANSPORT_TOL = 1e-6
TWO_AXIS_MAX_THETA = 3 * np.pi / 4

_DEFAULT_SPIN = {"css": SpinJ(3), "oneaxis": SpinJ(2), "twoaxis": SpinJ(2)}
_DEFAULT_PHI = {"css": 0.0, "twoaxis": np.pi / 2}


@dataclass(frozen=True)
class EvolutionSpec:
    """An open evolution from the identity to ``endpoint``.

    ``endpoint`` is ``theta_f`` for ``css``/``twoaxis`` and ``Theta_f`` for
    ``oneaxis``. ``phi`` is the frozen azimuth (ignored for ``oneaxis``).
    """

    family: str
    endpoint: float
    phi: float | None = None
    n_steps: int = 4096
    j: SpinJ | None = field(default=None)

    def __post_init__(self):
        if self.family not in _DEFAULT_SPIN:
            raise InvalidSpecError(f"unknown family {self.family!r}")
        if self.j is None:
            object.__setattr__(self, "j", _DEFAULT_SPIN[self.family])
        if self.phi is None:
            object.__setattr__(self, "phi", _DEFAULT_PHI.get(self.family, 0.0))
        if self.n_steps < 2:
            raise InvalidSpecError("n_steps must be at least 2")
        e = self.endpoint
        if self.family == "css" and not 0.0 <= e < np.pi - POLE_CUTOFF:
            raise InvalidSpecError(f"css endpoint must lie in [0, pi), got {e}")
        if self.family == "oneaxis" and not 0.0 <= e <= 4 * np.pi:
            raise InvalidSpecError(f"oneaxis endpoint must lie in [0, 4pi], got {e}")
        if self.family == "twoaxis":
            if not 0.0 <= e <= TWO_AXIS_MAX_THETA:
                raise InvalidSpecError(f"twoaxis endpoint must lie in [0, 3pi/4], got {e}")
            if self.j.two_j != 2:
                raise InvalidSpecError("twoaxis evolution is defined for j=1 only")

    def unitaries(self, grid: np.ndarray) -> np.ndarray:
        """Evolution operators at each parameter value of an increasing ``grid`` from 0."""
        grid = np.asarray(grid, float)
        if self.family == "oneaxis":
            s = family_unitaries("oneaxis", self.j, grid[:, None])
            phases = cumulative_one_axis_phases(self.j, grid)
            return s * np.exp(1j * phases)[:, None, :]
        points = np.column_stack([grid, np.full_like(grid, self.phi)])
        return family_unitaries(self.family, self.j, points)

    def generators(self, grid: np.ndarray) -> np.ndarray:
        """Exact ``dU/dt U^dagger`` at each point of ``grid``.

        With ``phi`` frozen, ``D`` and ``K`` are ``exp(f(t) G)`` for a fixed
        ``G``, so the generator is ``f'(t) G``. For ``S~`` it is
        ``-(i/2) J_x^2 + S diag(i phi_m'(t)) S^dagger``.
        """
        grid = np.asarray(grid, float)
        ops = build_spin_operators(self.j)
        if self.family == "oneaxis":
            s = family_unitaries("oneaxis", self.j, grid[:, None])
            rates = one_axis_phase_integrand(self.j, grid)
            compensation = (s * (1j * rates)[:, None, :]) @ dagger(s)
            return -0.5j * (ops.jx @ ops.jx) + compensation
        e = np.exp(-1j * self.phi)
        if self.family == "css":
            g = (e * ops.jplus - np.conj(e) * ops.jminus) / 2
            rate = np.ones_like(grid)
        else:
            g = e * (ops.jplus @ ops.jplus) - np.conj(e) * (ops.jminus @ ops.jminus)
            rate = 0.5 / np.cos(grid / 2) ** 2
        return rate[:, None, None] * g

    def final_unitary(self) -> np.ndarray:
        if self.family == "oneaxis":
            return tilde_S(self.j, self.endpoint, max(self.n_steps, 64))
        return family_unitaries(self.family, self.j, np.array([[self.endpoint, self.phi]]))[0]


@dataclass(frozen=True)
class TransportReport:
    """Parallel-transport diagnostics along an evolution.

    ``weak_residual`` is ``max |Tr[rho(t) dU/dt U^dagger]|``;
    ``strong_residual`` is ``max |<n(t)| dU/dt U^dagger |n(t)>|`` over
    eigenvectors of ``rho(t)``; ``step`` is the finite-difference spacing.
    """

    weak_residual: float
    strong_residual: float
    dynamic_phase: float
    step: float


def _as_rho(rho0) -> np.ndarray:
    return rho0.rho if isinstance(rho0, ThermalState) else np.asarray(rho0, complex)


def total_phase(rho0, u: np.ndarray) -> float:
    """``arg Tr[rho(0) U]`` in ``(-pi, pi]``."""
    if unitarity_defect(u) > 1e-8:
        raise InvalidSpecError("evolution operator is not unitary")
    tr = complex(np.trace(_as_rho(rho0) @ u))
    if abs(tr) < TRACE_FLOOR:
        raise CriticalPointError("phase undefined at this point", abs(tr))
    return wrap_phase(np.angle(tr))


def transport_report(spec: EvolutionSpec, beta: float, omega0: float = 1.0) -> TransportReport:
    """Residuals of both transport conditions and the accumulated dynamic phase.

    Residuals are sampled at the midpoints of ``spec.n_steps`` panels using the
    exact generator; the dynamic phase is their midpoint-rule integral.
    """
    state = thermal_state(spec.j, beta, omega0)
    if spec.endpoint == 0:
        return TransportReport(0.0, 0.0, 0.0, 0.0)
    n = spec.n_steps
    step = spec.endpoint / n
    mids = (np.arange(n) + 0.5) * step
    u_mid = spec.unitaries(np.linspace(0.0, spec.endpoint, 2 * n + 1))[1::2]
    generator = spec.generators(mids)
    rho_mid = state.conjugated(u_mid)
    weak = np.einsum("kij,kji->k", rho_mid, generator)
    _, vecs = np.linalg.eigh(rho_mid)
    strong = np.einsum("...ii->...i", dagger(vecs) @ generator @ vecs)
    dynamic = (-1j * weak.sum() * step).real
    return TransportReport(
        weak_residual=float(np.max(np.abs(weak))),
        strong_residual=float(np.max(np.abs(strong))),
        dynamic_phase=float(dynamic),
        step=float(step),
    )


def igp_numeric_trace(spec: EvolutionSpec, beta: float, omega0: float = 1.0, tol: float = TRANSPORT_TOL) -> complex:
    """``Tr[rho(0) U(final)]`` once the evolution has passed the transport check.

    Raises:
        TransportViolationError: if either residual reaches ``tol``; the trace
            would then carry a dynamic contribution.
    """
    report = transport_report(spec, beta, omega0)
    residual = max(report.weak_residual, report.strong_residual)
    if residual >= tol:
        raise TransportViolationError(f"parallel transport violated (residual {residual:.3e})", residual)
    state = thermal_state(spec.j, beta, omega0)
    u = spec.final_unitary()
    if unitarity_defect(u) > 1e-8:
        raise InvalidSpecError("evolution operator is not unitary")
    return complex(np.trace(state.rho @ u))


def igp_numeric(spec: EvolutionSpec, beta: float, omega0: float = 1.0, tol: float = TRANSPORT_TOL) -> float:
    """IGP from the constructed evolution operator (D, S~ or K)."""
    tr = igp_numeric_trace(spec, beta, omega0, tol)
    if abs(tr) < TRACE_FLOOR:
        raise CriticalPointError("phase undefined at this point", abs(tr))
    return wrap_phase(np.angle(tr))


# -- closed forms ------------------------------------------------------------


def _sech(x: float) -> float:
    return float(2.0 * np.exp(-x) / (1.0 + np.exp(-2.0 * x)))


def _arg_of(z: complex, what: str) -> float:
    if abs(z) < ARGUMENT_FLOOR:
        raise CriticalPointError(f"{what}: phase undefined at this point", abs(z))
    return wrap_phase(np.angle(z))


def igp_css_argument(theta_f: float, beta: float, omega0: float = 1.0) -> float:
    """``(e^{2x} + 1 - 2 e^x tan^2(theta_f/2)) / (e^{2x} + 1)``, ``x = beta omega0``.

    This is the ``j = 3/2`` trace ``Tr[rho(0) D]`` up to a positive factor.
    """
    if not 0.0 <= theta_f < np.pi - POLE_CUTOFF:
        raise InvalidSpecError(f"theta_f must lie in [0, pi), got {theta_f}")
    return 1.0 - np.tan(theta_f / 2) ** 2 * _sech(beta * omega0)


def igp_css_closed(theta_f: float, beta: float, omega0: float = 1.0) -> float:
    """IGP of the ``j = 3/2`` CSS along a longitude; always 0 or pi."""
    return _arg_of(igp_css_argument(theta_f, beta, omega0), "css IGP")


def igp_one_axis_argument(theta_cap_f: float, beta: float, omega0: float = 1.0) -> float:
    """``(2 cos(Theta_f/4) cosh x + 1) / (2 cosh x + 1)``."""
    if not 0.0 <= theta_cap_f <= 4 * np.pi:
        raise InvalidSpecError(f"Theta_f must lie in [0, 4pi], got {theta_cap_f}")
    s = _sech(beta * omega0)
    return (2.0 * np.cos(theta_cap_f / 4) + s) / (2.0 + s)


def igp_one_axis_closed(theta_cap_f: float, beta: float, omega0: float = 1.0) -> float:
    return _arg_of(igp_one_axis_argument(theta_cap_f, beta, omega0), "one-axis IGP")


def igp_one_axis_spectral_sum(theta_cap_f: float, beta: float, omega0: float = 1.0, n_steps: int = 256) -> complex:
    """``sum_m lambda_m nu_m exp(i phi_m)`` for ``j = 1``.

    ``nu_m = <m|S(Theta_f)|m>`` and ``phi_m`` is the pure-state geometric phase
    of ``S(Theta)|m>``.
    """
    j = SpinJ(2)
    state = thermal_state(j, beta, omega0)
    overlaps = np.diag(one_axis_squeeze(j, theta_cap_f))
    phases = one_axis_geometric_phases(j, theta_cap_f, n_steps)
    return complex(np.sum(state.lambdas * overlaps * np.exp(1j * phases)))


def igp_one_axis_spectral(theta_cap_f: float, beta: float, omega0: float = 1.0, n_steps: int = 256) -> float:
    return _arg_of(igp_one_axis_spectral_sum(theta_cap_f, beta, omega0, n_steps), "one-axis IGP")


def critical_theta_one_axis(temperature: float, omega0: float = 1.0) -> float:
    """``Theta_c = 4 arccos(-sech(omega0 / T) / 2)``, the one-axis IGP jump."""
    if not temperature > 0:
        raise InvalidSpecError("temperature must be positive")
    return float(4.0 * np.arccos(-_sech(omega0 / temperature) / 2))


def igp_two_axis_argument(theta_f: float, beta: float, omega0: float = 1.0) -> complex:
    """``2 cos u / (sech x + 2) + (1 - 2i sin u) / (2 cosh x + 1)``, ``u = 2 tan(theta_f/2)``."""
    if not 0.0 <= theta_f <= TWO_AXIS_MAX_THETA:
        raise InvalidSpecError(f"theta_f must lie in [0, 3pi/4], got {theta_f}")
    u = 2.0 * np.tan(theta_f / 2)
    s = _sech(beta * omega0)
    return complex((2.0 * np.cos(u) + (1.0 - 2j * np.sin(u)) * s) / (2.0 + s))


def igp_two_axis_closed(theta_f: float, beta: float, omega0: float = 1.0) -> float:
    return _arg_of(igp_two_axis_argument(theta_f, beta, omega0), "two-axis IGP")
