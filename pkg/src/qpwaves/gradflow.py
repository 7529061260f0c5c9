"""Normalized gradient flow for min E(u) subject to M(u) = m, P(u) = p on the
twisted-periodic grid u^{l+L} = e^{i theta} u^l.

Each step is a semi-implicit Euler step of u_t = u_xx + b|u|^2 u followed by an
implicit step of u_t = (mu + i omega d/dx) u whose two coefficients are chosen
so that, to first order, mass and momentum land on their targets together.
"""

from dataclasses import dataclass, field
import math
from typing import Callable, Union

import numpy as np

from .linalg import twisted_solve
from .ode import WaveSample, align_values
from .profile import ProblemParams

# sign of the transport stencil used in the renormalization solve
STENCIL_CONTINUOUS = "continuous"   # (u^{l+1} - u^{l-1}) / (2 dx), i.e. +d/dx
STENCIL_PRINTED = "printed"         # (u^{l-1} - u^{l+1}) / (2 dx), i.e. -d/dx
STENCILS = (STENCIL_CONTINUOUS, STENCIL_PRINTED)

DEGENERACY_RTOL = 1e-12
PROJECTION_SWEEPS = 50


class NonConvergenceError(RuntimeError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class Grid:
    T: float
    L: int
    theta: float = 0.0

    def __post_init__(self):
        if self.L < 16:
            raise ValueError("need L >= 16")
        if not self.T > 0.0:
            raise ValueError("period T must be positive")

    @property
    def dx(self):
        return self.T / self.L

    @property
    def x(self):
        return np.arange(self.L) * self.dx

    @property
    def twist(self):
        return np.exp(1j * self.theta)


@dataclass(frozen=True)
class Constraints:
    m: float
    p: float

    def __post_init__(self):
        if not self.m > 0.0:
            raise ValueError("target mass must be positive")


def default_initial_data(grid):
    """u0(x) = 1 + i + cos(2 pi x / T)."""
    return (1.0 + 1.0j) + np.cos(2.0 * np.pi * grid.x / grid.T)


@dataclass
class FlowConfig:
    dt: float = 1e-3
    eps: float = 1e-6
    max_steps: int = 200_000
    b: float = 1.0
    stencil: str = STENCIL_CONTINUOUS
    initial: Union[str, Callable, np.ndarray] = "default"
    align_every_step: bool = True

    def __post_init__(self):
        if not (self.dt > 0.0 and self.eps > 0.0):
            raise ValueError("dt and eps must be positive")
        if self.stencil not in STENCILS:
            raise ValueError(f"stencil must be one of {STENCILS}")

    def initial_values(self, grid):
        init = self.initial
        if isinstance(init, str):
            if init != "default":
                raise ValueError(f"unknown initial data {init!r}")
            return default_initial_data(grid)
        if callable(init):
            return np.asarray(init(grid.x), dtype=complex)
        u = np.asarray(init, dtype=complex)
        if u.shape != (grid.L,):
            raise ValueError(f"initial data must have shape ({grid.L},)")
        return u.copy()


# --- discrete operators --------------------------------------------------------------


def _neighbours(u, grid):
    left = np.empty_like(u)
    right = np.empty_like(u)
    left[1:] = u[:-1]
    left[0] = u[-1] / grid.twist
    right[:-1] = u[1:]
    right[-1] = grid.twist * u[0]
    return left, right


def centered_diff(u, grid):
    left, right = _neighbours(u, grid)
    return (right - left) / (2.0 * grid.dx)


def forward_diff(u, grid):
    _, right = _neighbours(u, grid)
    return (right - u) / grid.dx


def laplacian(u, grid):
    left, right = _neighbours(u, grid)
    return (left - 2.0 * u + right) / grid.dx ** 2


def discrete_functionals(u, grid, b):
    """Rectangle-rule (mass m0, momentum p0, kinetic k0, energy).

    Momentum and k0 use the centered difference, which is the operator the
    renormalization step transports with; the energy's kinetic part uses the
    forward difference so that its gradient is exactly the three-point
    Laplacian used by the flow.
    """
    u = np.asarray(u, dtype=complex)
    dx = grid.dx
    rho = u.real ** 2 + u.imag ** 2
    du = centered_diff(u, grid)
    m0 = 0.5 * dx * rho.sum()
    p0 = 0.5 * dx * np.sum(u * du.conj()).imag
    k0 = 0.5 * dx * np.sum(du.real ** 2 + du.imag ** 2)
    fu = forward_diff(u, grid)
    energy = 0.5 * dx * np.sum(fu.real ** 2 + fu.imag ** 2) - 0.25 * b * dx * np.sum(rho * rho)
    return float(m0), float(p0), float(k0), float(energy)


def energy_gradient(u, grid, b):
    """g with dE(u)[v] = Re sum conj(g) v dx; the flow is u_t = -g."""
    u = np.asarray(u, dtype=complex)
    return -(laplacian(u, grid) + b * (u.real ** 2 + u.imag ** 2) * u)


def semi_implicit_step(u, grid, dt, b):
    """Solve (I - dt D2 - dt b diag|u|^2) v = u."""
    u = np.asarray(u, dtype=complex)
    c = dt / grid.dx ** 2
    diag = 1.0 + 2.0 * c - dt * b * (u.real ** 2 + u.imag ** 2)
    return twisted_solve(diag, -c, -c, grid.theta, u)


def transport_coefficients(grid, stencil=STENCIL_CONTINUOUS):
    """(lower, upper) coefficients of the first-difference transport operator."""
    h = 1.0 / (2.0 * grid.dx)
    return (-h, h) if stencil == STENCIL_CONTINUOUS else (h, -h)


def transport_solve(u_tilde, grid, mu, omega, stencil=STENCIL_CONTINUOUS):
    """Solve ((1 - mu) I - i omega D1) u = u_tilde."""
    lo, up = transport_coefficients(grid, stencil)
    diag = np.full(grid.L, 1.0 - mu, dtype=complex)
    return twisted_solve(diag, -1j * omega * lo, -1j * omega * up, grid.theta, u_tilde)


def renormalization_coefficients(m0, p0, k0, constraints):
    """(mu_n, omega_n, degenerate) from the 2x2 first-order system.

    Degenerate means m0 k0 - p0^2 is at rounding level, i.e. the state is a
    plane wave (equality in Cauchy-Schwarz).
    """
    m, p = constraints.m, constraints.p
    det = m0 * k0 - p0 * p0
    if det <= DEGENERACY_RTOL * m0 * max(k0, 1.0):
        return 0.0, 0.0, True
    mu = (k0 * (m - m0) - p0 * (p - p0)) / (2.0 * det)
    omega = (m0 * (p - p0) - p0 * (m - m0)) / (2.0 * det)
    return mu, omega, False


def plane_wave_like(u, grid, m):
    """Constant-modulus wave with the mass m and the wavenumber of ``u``."""
    _, right = _neighbours(u, grid)
    k = np.angle(np.sum(u.conj() * right)) / grid.dx
    phase = u[0] / abs(u[0]) if u[0] != 0 else 1.0
    return math.sqrt(2.0 * m / grid.T) * phase * np.exp(1j * k * grid.x)


def renormalize(u_tilde, grid, constraints, stencil=STENCIL_CONTINUOUS, b=0.0):
    """One implicit renormalization step; returns (u, mu_n, omega_n, degenerate)."""
    u_tilde = np.asarray(u_tilde, dtype=complex)
    m0, p0, k0, _ = discrete_functionals(u_tilde, grid, b)
    mu, omega, degenerate = renormalization_coefficients(m0, p0, k0, constraints)
    if degenerate:
        return plane_wave_like(u_tilde, grid, constraints.m), 0.0, 0.0, True
    return transport_solve(u_tilde, grid, mu, omega, stencil), mu, omega, False


# --- the minimization loop -----------------------------------------------------------


_TRACE_FIELDS = ("energy", "energy_flow", "mass", "momentum", "m0", "p0", "k0",
                 "mu", "omega", "dmod", "degenerate")


@dataclass
class FlowDiagnostics:
    """Per-step trace.  energy is E(u_n); energy_flow is E after the gradient
    substep; m0, p0, k0 are the renormalization inputs; mass/momentum are the
    values after renormalization; dmod is max_l | |u_{n+1}^l| - |u_n^l| |."""

    energy: np.ndarray
    energy_flow: np.ndarray
    mass: np.ndarray
    momentum: np.ndarray
    m0: np.ndarray
    p0: np.ndarray
    k0: np.ndarray
    mu: np.ndarray
    omega: np.ndarray
    dmod: np.ndarray
    degenerate: np.ndarray
    converged: bool = False
    final_mass: float = float("nan")
    final_momentum: float = float("nan")
    final_energy: float = float("nan")
    projection_sweeps: int = 0

    @property
    def steps(self):
        return len(self.energy)

    @classmethod
    def from_rows(cls, rows, **kw):
        cols = list(zip(*rows)) if rows else [()] * len(_TRACE_FIELDS)
        arrays = {name: np.asarray(col, dtype=bool if name == "degenerate" else float)
                  for name, col in zip(_TRACE_FIELDS, cols)}
        return cls(**arrays, **kw)


@dataclass
class FlowState:
    u: np.ndarray
    step: int = 0
    rows: list = field(default_factory=list)


def constraint_residuals(u, grid, constraints, b=0.0):
    m0, p0, _, _ = discrete_functionals(u, grid, b)
    return abs(m0 - constraints.m), abs(p0 - constraints.p)


def _within(u, grid, constraints, rtol):
    dm, dp = constraint_residuals(u, grid, constraints)
    return dm <= rtol * constraints.m and dp <= rtol * max(1.0, abs(constraints.p))


def project(u, grid, constraints, stencil=STENCIL_CONTINUOUS, rtol=1e-6,
            sweeps=PROJECTION_SWEEPS):
    """Repeat the renormalization alone (flow frozen) until the constraint
    residuals are below ``rtol`` and stop improving."""
    n = 0
    best = constraint_residuals(u, grid, constraints)
    for n in range(1, sweeps + 1):
        v, _, _, _ = renormalize(u, grid, constraints, stencil)
        res = constraint_residuals(v, grid, constraints)
        if sum(res) >= sum(best) and _within(u, grid, constraints, rtol):
            return u, n - 1
        u, best = v, res
        if res[0] <= 1e-14 * constraints.m and res[1] <= 1e-14 * max(1.0, abs(constraints.p)):
            break
    return u, n


def flow_step(state, grid, constraints, config):
    """Advance ``state`` by one gradient + renormalization step; returns dmod."""
    u = state.u
    b = config.b
    energy = discrete_functionals(u, grid, b)[3]
    u_tilde = semi_implicit_step(u, grid, config.dt, b)
    m0, p0, k0, energy_flow = discrete_functionals(u_tilde, grid, b)
    u_new, mu, omega, degenerate = renormalize(u_tilde, grid, constraints, config.stencil, b)
    if config.align_every_step:
        u_new = align_values(u_new, grid.theta)
    mass, momentum, _, _ = discrete_functionals(u_new, grid, b)
    dmod = float(np.max(np.abs(np.abs(u_new) - np.abs(u))))
    state.rows.append((energy, energy_flow, mass, momentum, m0, p0, k0, mu, omega, dmod, degenerate))
    state.u = u_new
    state.step += 1
    return dmod


def minimize(grid, constraints, config, params=None, callback=None):
    """Run the normalized gradient flow until max | |u_{n+1}| - |u_n| | < eps.

    Returns (WaveSample, FlowDiagnostics).  The final state is projected onto
    the constraints (renormalization with the flow frozen) and aligned.
    """
    state = FlowState(config.initial_values(grid))
    converged = False
    while state.step < config.max_steps:
        dmod = flow_step(state, grid, constraints, config)
        if callback is not None:
            callback(state)
        if dmod < config.eps:
            converged = True
            break
    u, sweeps = project(state.u, grid, constraints, config.stencil)
    u = align_values(u, grid.theta)
    m_f, p_f, _, e_f = discrete_functionals(u, grid, config.b)
    diag = FlowDiagnostics.from_rows(state.rows, converged=converged, final_mass=m_f,
                                     final_momentum=p_f, final_energy=e_f,
                                     projection_sweeps=sweeps)
    if not converged:
        raise NonConvergenceError(
            f"no convergence in {config.max_steps} steps (last dmod {state.rows[-1][9]:.3e})",
            diag)
    if params is None:
        params = ProblemParams(b=config.b, a=0.0)
    x = np.arange(grid.L + 1) * grid.dx
    full = np.append(u, grid.twist * u[0])
    return WaveSample(x, full, grid.theta, params, grid.T), diag
