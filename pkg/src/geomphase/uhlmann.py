"""Uhlmann connections, path-ordered holonomies and the Uhlmann phase.

A connection function has the signature ``fn(midpoints, delta) -> stack``:
``midpoints`` is an ``(n, p)`` array of parameter points and ``delta`` the
length-``p`` displacement of one step. It returns the ``(n, d, d)`` stack of
``A_U`` already contracted with ``delta``. Each ``A_U`` is anti-Hermitian.

Path ordering puts later steps on the left:
``g(t + dt) = exp(-A_U(t + dt/2)) g(t)`` and the phase is
``arg Tr[rho(0) g(end)]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import CriticalPointError, InvalidSpecError, NumericalError, RankFloorError, UnsupportedError
from .phase import phase_distance, wrap_phase
from .spin import SpinJ, anti_hermiticity_defect, build_spin_operators, dagger, matrix_exponential
from .states import FAMILIES, SpherePoint, ThermalState, family_unitaries, thermal_state

ConnectionFn = Callable[[np.ndarray, np.ndarray], np.ndarray]

RANK_FLOOR = 1e-14
TRACE_FLOOR = 1e-12
CONVERGENCE_TOL = 1e-6
MIN_TEMPERATURE = 1e-3  # in units of omega0
MAX_STEPS = 2**20


# -- thermal weights ---------------------------------------------------------


def chi_coefficient(lam_n, lam_m):
    """``(sqrt(lam_n) - sqrt(lam_m))^2 / (lam_n + lam_m)`` for two eigenvalues."""
    lam_n = np.asarray(lam_n, float)
    lam_m = np.asarray(lam_m, float)
    return (np.sqrt(lam_n) - np.sqrt(lam_m)) ** 2 / (lam_n + lam_m)


def chi_nearest(beta: float, omega0: float = 1.0) -> float:
    """Weight coupling neighbouring levels: ``1 - sech(beta omega0 / 2)``."""
    x = beta * omega0
    # sech(x/2) = 2 e^{-x/2} / (1 + e^{-x})
    return float(1.0 - 2.0 * np.exp(-x / 2) / (1.0 + np.exp(-x)))


def chi_skip2(beta: float, omega0: float = 1.0) -> float:
    """Weight coupling levels two apart: ``(e^{x/2} - e^{-x/2})^2 / (e^x + e^{-x})``."""
    x = beta * omega0
    e = np.exp(-x)
    return float((1.0 - e) ** 2 / (1.0 + e * e))


# -- paths -------------------------------------------------------------------


@dataclass(frozen=True)
class ParameterPath:
    """Straight segment in parameter space from ``start`` to ``end``.

    Points are ``(theta, phi)`` for the ``css`` and ``twoaxis`` families and
    ``(Theta,)`` for ``oneaxis``.
    """

    family: str
    start: tuple[float, ...]
    end: tuple[float, ...]
    closed: bool = True

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidSpecError(f"unknown family {self.family!r}")
        width = 1 if self.family == "oneaxis" else 2
        if len(self.start) != width or len(self.end) != width:
            raise InvalidSpecError(f"{self.family} points have {width} coordinate(s)")
        object.__setattr__(self, "start", tuple(float(v) for v in self.start))
        object.__setattr__(self, "end", tuple(float(v) for v in self.end))

    @property
    def delta(self) -> np.ndarray:
        return np.subtract(self.end, self.start)

    def samples(self, n_steps: int) -> np.ndarray:
        """The ``n_steps + 1`` equally spaced points, shape ``(n_steps + 1, p)``."""
        t = np.linspace(0.0, 1.0, n_steps + 1)[:, None]
        return np.asarray(self.start) + t * self.delta

    def unitaries(self, j: SpinJ, points: np.ndarray) -> np.ndarray:
        return family_unitaries(self.family, j, points)

    def closure_defect(self, j: SpinJ) -> float:
        """Distance between the end unitaries, ignoring a global phase."""
        u0, u1 = self.unitaries(j, np.array([self.start, self.end]))
        overlap = np.trace(dagger(u0) @ u1)
        alpha = np.angle(overlap) if abs(overlap) > 0 else 0.0
        return float(np.max(np.abs(u1 - np.exp(1j * alpha) * u0)))


def css_loop(theta: float) -> ParameterPath:
    """Circle of constant polar angle, ``phi: 0 -> 2pi``."""
    return ParameterPath("css", (theta, 0.0), (theta, 2 * np.pi))


def one_axis_loop(theta_cap_final: float = 4 * np.pi) -> ParameterPath:
    """``Theta: 0 -> Theta_f``; closed for ``j = 1`` at ``Theta_f = 4pi``."""
    return ParameterPath("oneaxis", (0.0,), (theta_cap_final,))


def two_axis_equator_loop() -> ParameterPath:
    return ParameterPath("twoaxis", (np.pi / 2, 0.0), (np.pi / 2, 2 * np.pi))


def rho_sampler(family: str, state: ThermalState) -> Callable[[np.ndarray], np.ndarray]:
    """``points -> U(points) rho U(points)^dagger`` for a unitary family."""

    def sample(points: np.ndarray) -> np.ndarray:
        return state.conjugated(family_unitaries(family, state.j, points))

    return sample


# -- connections -------------------------------------------------------------


def _sqrt_psd(rho: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((rho + dagger(rho)) / 2)
    return (v * np.sqrt(np.clip(w, 0.0, None))[..., None, :]) @ dagger(v)


def _spectral_in_eigenbasis(d_sqrt: np.ndarray, lambdas: np.ndarray) -> np.ndarray:
    """``-[d sqrt(rho), sqrt(rho)]_mn / (lambda_m + lambda_n)`` with everything in the eigenbasis.

    The commutator is ``d_mn (sqrt(lambda_n) - sqrt(lambda_m))``, so forming it
    elementwise avoids dividing roundoff by tiny eigenvalue sums.
    """
    if np.min(lambdas) < RANK_FLOOR:
        raise RankFloorError(f"density matrix eigenvalue {np.min(lambdas):.3e} below rank floor")
    root = np.sqrt(lambdas)
    factor = (root[..., None, :] - root[..., :, None]) / (lambdas[..., :, None] + lambdas[..., None, :])
    return -d_sqrt * factor


def _spectral(rho_lo: np.ndarray, rho_mid: np.ndarray, rho_hi: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((rho_mid + dagger(rho_mid)) / 2)
    if np.min(w) < RANK_FLOOR:
        raise RankFloorError(f"density matrix eigenvalue {np.min(w):.3e} below rank floor")
    ds = dagger(v) @ (_sqrt_psd(rho_hi) - _sqrt_psd(rho_lo)) @ v
    return v @ _spectral_in_eigenbasis(ds, w) @ dagger(v)


def connection_spectral(sampler: Callable[[np.ndarray], np.ndarray], samples: np.ndarray, k: int) -> np.ndarray:
    """Uhlmann connection on the segment between ``samples[k]`` and ``samples[k+1]``.

    ``A_U = -sum_mn |m><m|[d sqrt(rho), sqrt(rho)]|n><n| / (lambda_m + lambda_n)``,
    with the eigenbasis taken at the segment midpoint and ``d sqrt(rho)`` the
    difference of ``sqrt(rho)`` across the segment.
    """
    samples = np.atleast_2d(np.asarray(samples, float))
    if not 0 <= k < len(samples) - 1:
        raise IndexError(f"step {k} outside path with {len(samples)} samples")
    lo, hi = samples[k], samples[k + 1]
    rhos = sampler(np.array([lo, (lo + hi) / 2, hi]))
    return _spectral(rhos[0], rhos[1], rhos[2])


def spectral_connection(family: str, state: ThermalState) -> ConnectionFn:
    """Connection function evaluating the spectral formula along ``family``.

    Along a unitary orbit ``sqrt(rho(t)) = U sqrt(rho) U^dagger`` and the
    midpoint eigenbasis is ``U`` itself, so no eigensolver is needed and the
    formula stays accurate down to the rank floor.
    """
    root = state.sqrt_rho

    def fn(mids: np.ndarray, delta: np.ndarray) -> np.ndarray:
        half = np.asarray(delta) / 2
        u_lo, u_mid, u_hi = (family_unitaries(family, state.j, p) for p in (mids - half, mids, mids + half))
        d_sqrt = u_hi @ root @ dagger(u_hi) - u_lo @ root @ dagger(u_lo)
        local = _spectral_in_eigenbasis(dagger(u_mid) @ d_sqrt @ u_mid, state.lambdas)
        return u_mid @ local @ dagger(u_mid)

    return fn


def css_connection(j: SpinJ, beta: float, omega0: float = 1.0) -> ConnectionFn:
    """Closed-form CSS connection.

    ``A_U = i chi [(J_x cos phi + J_y sin phi) cos theta + J_z sin theta] sin theta dphi
    + i chi (J_x sin phi - J_y cos phi) dtheta`` with ``chi = chi_nearest``.
    """
    ops = build_spin_operators(j)
    chi = chi_nearest(beta, omega0)

    def fn(mids: np.ndarray, delta: np.ndarray) -> np.ndarray:
        th = mids[:, 0][:, None, None]
        ph = mids[:, 1][:, None, None]
        d_th, d_ph = delta
        in_plane = ops.jx * np.cos(ph) + ops.jy * np.sin(ph)
        along_phi = (in_plane * np.cos(th) + ops.jz * np.sin(th)) * np.sin(th)
        along_theta = ops.jx * np.sin(ph) - ops.jy * np.cos(ph)
        return 1j * chi * (along_phi * d_ph + along_theta * d_th)

    return fn


def _require_spin_one(j: SpinJ) -> None:
    if j.two_j != 2:
        raise UnsupportedError(f"closed-form squeezing connection exists only for j=1, got j={j}")


def one_axis_connection(j: SpinJ, beta: float, omega0: float = 1.0) -> ConnectionFn:
    """``A_U = (i chi / 4) [J_x^2 - S J_y^2 S^dagger] dTheta`` for ``j = 1``."""
    _require_spin_one(j)
    ops = build_spin_operators(j)
    chi = chi_skip2(beta, omega0)
    jx2 = ops.jx @ ops.jx
    jy2 = ops.jy @ ops.jy

    def fn(mids: np.ndarray, delta: np.ndarray) -> np.ndarray:
        s = family_unitaries("oneaxis", j, mids)
        return 0.25j * chi * (jx2 - s @ jy2 @ dagger(s)) * delta[0]

    return fn


def two_axis_equator_connection(beta: float, omega0: float = 1.0) -> ConnectionFn:
    """Closed-form ``j = 1`` two-axis connection on the equator ``theta = pi/2``.

    ``A_U = i chi [[-sin^2(4)/2, 0, e^{i phi} sin(8)/4], [0, 0, 0],
    [e^{-i phi} sin(8)/4, 0, sin^2(4)/2]] dphi`` with ``chi = chi_skip2``.
    The constants come from ``2 tan(theta/2) = 2`` on the equator. Only the
    ``dphi`` component is defined.
    """
    chi = chi_skip2(beta, omega0)
    diag = np.sin(4.0) ** 2 / 2
    off = np.sin(8.0) / 4

    def fn(mids: np.ndarray, delta: np.ndarray) -> np.ndarray:
        if abs(delta[0]) > 0 or np.any(np.abs(mids[:, 0] - np.pi / 2) > 1e-12):
            raise InvalidSpecError("two-axis closed-form connection only holds on the equator")
        phase = np.exp(1j * mids[:, 1])
        a = np.zeros((len(mids), 3, 3), dtype=complex)
        a[:, 0, 0] = -diag
        a[:, 2, 2] = diag
        a[:, 0, 2] = off * phase
        a[:, 2, 0] = off * np.conj(phase)
        return 1j * chi * a * delta[1]

    return fn


def connection_css(j: SpinJ, point: SpherePoint, d_theta: float, d_phi: float, beta: float, omega0: float = 1.0) -> np.ndarray:
    fn = css_connection(j, beta, omega0)
    return fn(np.array([[point.theta, point.phi]]), np.array([d_theta, d_phi]))[0]


def connection_one_axis(j: SpinJ, theta_cap: float, d_theta_cap: float, beta: float, omega0: float = 1.0) -> np.ndarray:
    fn = one_axis_connection(j, beta, omega0)
    return fn(np.array([[theta_cap]]), np.array([d_theta_cap]))[0]


def connection_two_axis_equator(phi: float, d_phi: float, beta: float, omega0: float = 1.0) -> np.ndarray:
    fn = two_axis_equator_connection(beta, omega0)
    return fn(np.array([[np.pi / 2, phi]]), np.array([0.0, d_phi]))[0]


# -- holonomy ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class HolonomyResult:
    holonomy: np.ndarray
    phase: float
    trace_magnitude: float
    n_steps: int
    converged: bool


def ordered_product(factors: np.ndarray) -> np.ndarray:
    """``F[n-1] ... F[1] F[0]`` computed by pairwise reduction."""
    factors = np.asarray(factors)
    if len(factors) == 0:
        raise ValueError("empty product")
    while len(factors) > 1:
        tail = None
        if len(factors) % 2:
            tail = factors[-1:]
            factors = factors[:-1]
        paired = factors[1::2] @ factors[0::2]
        factors = paired if tail is None else np.concatenate([paired, tail])
    return factors[0]


def path_ordered_exponential(path: ParameterPath, connection_fn: ConnectionFn, n_steps: int) -> np.ndarray:
    """Midpoint Trotter product of ``exp(-A_U)`` along ``path``."""
    points = path.samples(n_steps)
    mids = (points[:-1] + points[1:]) / 2
    steps = connection_fn(mids, path.delta / n_steps)
    defect = anti_hermiticity_defect(steps)
    if defect > 1e-8:
        raise NumericalError(f"connection is not anti-Hermitian (defect {defect:.2e})")
    return ordered_product(matrix_exponential(-steps))


def _phase_of(rho0: np.ndarray, g: np.ndarray) -> tuple[float, float]:
    tr = complex(np.trace(rho0 @ g))
    mag = abs(tr)
    if mag < TRACE_FLOOR:
        raise CriticalPointError("phase undefined at this point", mag)
    return wrap_phase(np.angle(tr)), mag


def holonomy(
    path: ParameterPath,
    connection_fn: ConnectionFn,
    state: ThermalState,
    n_steps: int = 4096,
    refine: bool = False,
    max_steps: int = MAX_STEPS,
) -> HolonomyResult:
    """Uhlmann holonomy and phase ``arg Tr[rho(0) P exp(-oint A_U)]``.

    ``rho(0)`` is ``state`` carried to the start of ``path``. With ``refine``
    the step count doubles until the phase moves by less than 1e-6 (mod 2pi)
    or ``max_steps`` is exceeded; without it ``converged`` stays False because
    no comparison was made.
    """
    if n_steps < 16:
        raise InvalidSpecError("n_steps must be at least 16")
    if not path.closed:
        raise InvalidSpecError("holonomy needs a closed path")
    if state.beta * state.omega0 > 1.0 / MIN_TEMPERATURE:
        raise RankFloorError(f"temperature below {MIN_TEMPERATURE} omega0 is refused; use berry_phase_css")
    if path.closure_defect(state.j) > 1e-10:
        raise InvalidSpecError("path does not return to its starting density matrix")

    rho0 = state.conjugated(path.unitaries(state.j, np.array([path.start]))[0])
    g = path_ordered_exponential(path, connection_fn, n_steps)
    phase, mag = _phase_of(rho0, g)
    converged = False
    n = n_steps
    while refine and n * 2 <= max_steps:
        n *= 2
        g_next = path_ordered_exponential(path, connection_fn, n)
        phase_next, mag = _phase_of(rho0, g_next)
        moved = phase_distance(phase, phase_next)
        g, phase = g_next, phase_next
        if moved < CONVERGENCE_TOL:
            converged = True
            break
    return HolonomyResult(holonomy=g, phase=phase, trace_magnitude=mag, n_steps=n, converged=converged)


# -- per-family entry points ------------------------------------------------


def uhlmann_css(
    j: SpinJ,
    theta: float,
    beta: float,
    omega0: float = 1.0,
    n_steps: int = 4096,
    refine: bool = False,
    connection: str = "closed",
) -> HolonomyResult:
    """Uhlmann phase of the thermal CSS carried once around latitude ``theta``."""
    state = thermal_state(j, beta, omega0)
    if connection == "closed":
        fn = css_connection(j, beta, omega0)
    elif connection == "spectral":
        fn = spectral_connection("css", state)
    else:
        raise InvalidSpecError(f"unknown connection {connection!r}")
    return holonomy(css_loop(theta), fn, state, n_steps, refine)


def uhlmann_one_axis(
    beta: float,
    omega0: float = 1.0,
    n_steps: int = 4096,
    refine: bool = False,
    connection: str = "closed",
    j: SpinJ = SpinJ(2),
) -> HolonomyResult:
    """Uhlmann phase of the one-axis squeezed thermal state over ``Theta: 0 -> 4pi``."""
    state = thermal_state(j, beta, omega0)
    if connection == "closed":
        fn = one_axis_connection(j, beta, omega0)
    elif connection == "spectral":
        fn = spectral_connection("oneaxis", state)
    else:
        raise InvalidSpecError(f"unknown connection {connection!r}")
    return holonomy(one_axis_loop(), fn, state, n_steps, refine)


def uhlmann_two_axis(
    beta: float,
    omega0: float = 1.0,
    n_steps: int = 4096,
    refine: bool = False,
    connection: str = "closed",
) -> HolonomyResult:
    """Uhlmann phase of the ``j = 1`` two-axis squeezed state around the equator."""
    j = SpinJ(2)
    state = thermal_state(j, beta, omega0)
    if connection == "closed":
        fn = two_axis_equator_connection(beta, omega0)
    elif connection == "spectral":
        fn = spectral_connection("twoaxis", state)
    else:
        raise InvalidSpecError(f"unknown connection {connection!r}")
    return holonomy(two_axis_equator_loop(), fn, state, n_steps, refine)


# -- closed forms ------------------------------------------------------------


def css_equator_trace(j: SpinJ, beta: float, omega0: float = 1.0) -> complex:
    """``Tr[e^{beta omega0 J_x} e^{2 pi i chi J_z}] / Z`` for the equator loop.

    ``J_z`` is the (constant) connection direction on the equator, so the
    ordered exponential collapses to a single exponential. The trace is real
    because the diagonal of ``e^{x J_x}`` is symmetric under ``m -> -m``.
    """
    state = thermal_state(j, beta, omega0)
    d = family_unitaries("css", j, np.array([[np.pi / 2, 0.0]]))[0]
    rho0 = state.conjugated(d)  # = e^{x J_x} / Z
    chi = chi_nearest(beta, omega0)
    hol = np.diag(np.exp(2j * np.pi * chi * j.m_values))
    return complex(np.trace(rho0 @ hol))


def uhlmann_phase_css_equator_closed(j: SpinJ, beta: float, omega0: float = 1.0) -> float:
    tr = css_equator_trace(j, beta, omega0)
    if abs(tr) < TRACE_FLOOR:
        raise CriticalPointError("phase undefined at this point", abs(tr))
    return wrap_phase(np.angle(tr))


def berry_phase_css(j: SpinJ, theta: float) -> float:
    """Zero-temperature limit ``4 pi j sin^2(theta/2)`` wrapped to ``(-pi, pi]``."""
    if not 0.0 <= theta < np.pi:
        raise InvalidSpecError("theta must lie in [0, pi)")
    return wrap_phase(4 * np.pi * j.j * np.sin(theta / 2) ** 2)
