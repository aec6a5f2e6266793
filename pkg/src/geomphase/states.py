"""Thermal spin states and the unitary families that move them around.

Three families are provided:

* ``css``: the displacement ``D(xi) = exp(xi J+ - conj(xi) J-)`` with
  ``xi = exp(-i phi) theta / 2``, which generates coherent spin states;
* ``oneaxis``: the one-axis twisting ``S(Theta) = exp(-i Theta J_x^2 / 2)`` and
  its phase-compensated variant ``S~``;
* ``twoaxis``: the two-axis squeeze ``K(z) = exp(z J+^2 - conj(z) J-^2)`` with
  ``z = exp(-i phi) tan(theta / 2)``.

The energy unit is the Larmor frequency ``omega0``; ``beta`` is an inverse
temperature in the same units, so every thermal weight depends on
``x = beta * omega0`` only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidSpecError, PoleError, RankFloorError
from .spin import SpinJ, build_spin_operators, dagger, matrix_exponential

POLE_CUTOFF = 1e-9
# Largest beta*omega0*j for which every thermal weight stays representable.
MAX_BETA_OMEGA_J = 700.0

FAMILIES = ("css", "oneaxis", "twoaxis")


def _check_beta(beta: float, omega0: float) -> float:
    if not beta > 0:
        raise InvalidSpecError(f"beta must be positive, got {beta}")
    if not omega0 > 0:
        raise InvalidSpecError(f"omega0 must be positive, got {omega0}")
    return beta * omega0


def partition_function(j: SpinJ, beta: float, omega0: float = 1.0) -> float:
    """``Z = sinh((j + 1/2) x) / sinh(x / 2)`` with ``x = beta * omega0``.

    Returns ``inf`` once ``Z`` exceeds the float range (``j x`` above ~709).
    """
    x = _check_beta(beta, omega0)
    # Rewritten as exp(j x) (1 - exp(-(2j+1)x)) / (1 - exp(-x)) to survive
    # both x -> 0 and large x.
    with np.errstate(over="ignore"):
        return float(np.exp(j.j * x) * np.expm1(-(j.two_j + 1) * x) / np.expm1(-x))


@dataclass(frozen=True, eq=False)
class ThermalState:
    """``rho = exp(-beta omega0 J_z) / Z`` together with its spectrum.

    ``lambdas[k]`` is the weight of ``m = -j + k``, so the largest weight
    comes first.
    """

    j: SpinJ
    beta: float
    omega0: float
    rho: np.ndarray
    lambdas: np.ndarray

    @property
    def temperature(self) -> float:
        return 1.0 / self.beta

    @property
    def sqrt_rho(self) -> np.ndarray:
        return np.diag(np.sqrt(self.lambdas)).astype(complex)

    def conjugated(self, u: np.ndarray) -> np.ndarray:
        """``U rho U^dagger`` (``u`` may be a stack)."""
        return u @ self.rho @ dagger(u)


def thermal_state(j: SpinJ, beta: float, omega0: float = 1.0) -> ThermalState:
    x = _check_beta(beta, omega0)
    if x * j.j > MAX_BETA_OMEGA_J:
        raise RankFloorError("temperature too low for full-rank state")
    # shifted exponents (m + j) x >= 0 keep every term <= 1
    w = np.exp(-(j.m_values + j.j) * x)
    lambdas = w / w.sum()
    lambdas.setflags(write=False)
    rho = np.diag(lambdas).astype(complex)
    rho.setflags(write=False)
    return ThermalState(j=j, beta=float(beta), omega0=float(omega0), rho=rho, lambdas=lambdas)


@dataclass(frozen=True)
class SpherePoint:
    """Point on the parameter sphere; ``phi`` is reduced to ``[0, 2pi)``."""

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.theta <= np.pi):
            raise InvalidSpecError(f"theta must lie in [0, pi], got {self.theta}")
        if not np.isfinite(self.phi):
            raise InvalidSpecError("phi must be finite")
        object.__setattr__(self, "phi", float(np.mod(self.phi, 2 * np.pi)))

    @property
    def zeta(self) -> complex:
        """Stereographic coordinate ``exp(-i phi) tan(theta / 2)``."""
        _check_pole(self.theta)
        return complex(np.exp(-1j * self.phi) * np.tan(self.theta / 2))


def _check_pole(theta) -> None:
    if np.any(np.asarray(theta) >= np.pi - POLE_CUTOFF):
        raise PoleError("theta too close to pi: stereographic parameter diverges")


# -- batched generators ------------------------------------------------------
# Each helper takes arrays of parameters and returns a stack of anti-Hermitian
# generators, so that whole paths can be exponentiated in one call.


def displacement_generators(j: SpinJ, theta, phi) -> np.ndarray:
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    _check_pole(theta)
    ops = build_spin_operators(j)
    xi = (np.exp(-1j * phi) * theta / 2)[..., None, None]
    return xi * ops.jplus - np.conj(xi) * ops.jminus


def one_axis_generators(j: SpinJ, theta_cap) -> np.ndarray:
    ops = build_spin_operators(j)
    theta_cap = np.asarray(theta_cap, float)[..., None, None]
    return -0.5j * theta_cap * (ops.jx @ ops.jx)


def two_axis_generators(j: SpinJ, theta, phi) -> np.ndarray:
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    _check_pole(theta)
    ops = build_spin_operators(j)
    z = (np.exp(-1j * phi) * np.tan(theta / 2))[..., None, None]
    jp2 = ops.jplus @ ops.jplus
    jm2 = ops.jminus @ ops.jminus
    return z * jp2 - np.conj(z) * jm2


def family_unitaries(family: str, j: SpinJ, points: np.ndarray) -> np.ndarray:
    """Unitaries of ``family`` at each row of ``points``.

    ``points`` has shape ``(n, 2)`` holding ``(theta, phi)`` for ``css`` and
    ``twoaxis``, or ``(n, 1)`` holding ``Theta`` for ``oneaxis``.
    """
    points = np.atleast_2d(np.asarray(points, float))
    if family == "css":
        gen = displacement_generators(j, points[:, 0], points[:, 1])
    elif family == "oneaxis":
        gen = one_axis_generators(j, points[:, 0])
    elif family == "twoaxis":
        gen = two_axis_generators(j, points[:, 0], points[:, 1])
    else:
        raise InvalidSpecError(f"unknown family {family!r}")
    return matrix_exponential(gen)


# -- single-point constructors ----------------------------------------------


def displacement_operator(j: SpinJ, point: SpherePoint) -> np.ndarray:
    """``D(xi) = exp(xi J+ - conj(xi) J-)`` with ``xi = exp(-i phi) theta / 2``."""
    return matrix_exponential(displacement_generators(j, point.theta, point.phi))


def one_axis_squeeze(j: SpinJ, theta_cap: float) -> np.ndarray:
    """``S(Theta) = exp(-i Theta J_x^2 / 2)``."""
    return matrix_exponential(one_axis_generators(j, theta_cap))


def two_axis_squeeze(j: SpinJ, point: SpherePoint) -> np.ndarray:
    """``K(z) = exp(z J+^2 - conj(z) J-^2)`` with ``z = exp(-i phi) tan(theta/2)``."""
    return matrix_exponential(two_axis_generators(j, point.theta, point.phi))


def one_axis_phase_integrand(j: SpinJ, theta_caps) -> np.ndarray:
    """``i <j m| S^dagger dS/dTheta |j m>`` for every ``m`` at each ``Theta``.

    Shape ``(len(theta_caps), dim)``. The derivative is taken from the
    generator, ``dS/dTheta = -(i/2) J_x^2 S``.
    """
    ops = build_spin_operators(j)
    s = matrix_exponential(one_axis_generators(j, np.atleast_1d(theta_caps)))
    ds = (-0.5j * (ops.jx @ ops.jx)) @ s
    diag = np.einsum("...ii->...i", dagger(s) @ ds)
    vals = 1j * diag
    if np.max(np.abs(vals.imag), initial=0.0) > 1e-10:
        raise ArithmeticError("geometric phase integrand is not real")
    return vals.real


def cumulative_one_axis_phases(j: SpinJ, grid: np.ndarray) -> np.ndarray:
    """Accumulated phases ``phi_m(Theta)`` on an increasing grid starting at 0.

    Midpoint rule between consecutive grid points; row ``k`` holds the phases
    reached at ``grid[k]``.
    """
    grid = np.asarray(grid, float)
    if grid.size < 2:
        return np.zeros((grid.size, j.dim))
    mids = (grid[:-1] + grid[1:]) / 2
    steps = np.diff(grid)[:, None]
    increments = one_axis_phase_integrand(j, mids) * steps
    return np.vstack([np.zeros(j.dim), np.cumsum(increments, axis=0)])


def one_axis_geometric_phases(j: SpinJ, theta_cap_final: float, n_steps: int = 256) -> np.ndarray:
    """Pure-state geometric phase ``phi_m`` picked up by each ``S(Theta)|j m>``.

    ``phi_m = i int_0^Theta_f <j m| S^dagger dS/dTheta |j m> dTheta``,
    integrated with the midpoint rule on ``n_steps`` panels.
    """
    if n_steps < 64:
        raise InvalidSpecError("n_steps must be at least 64")
    grid = np.linspace(0.0, theta_cap_final, n_steps + 1)
    return cumulative_one_axis_phases(j, grid)[-1]


def tilde_S(j: SpinJ, theta_cap_final: float, n_steps: int = 256) -> np.ndarray:
    """``S~ = sum_m exp(i phi_m) |m(t)><m(0)| = S(Theta_f) diag(exp(i phi_m))``."""
    phases = one_axis_geometric_phases(j, theta_cap_final, n_steps)
    return one_axis_squeeze(j, theta_cap_final) * np.exp(1j * phases)[None, :]
