"""Direct integration of the complex profile equation over one period."""

from dataclasses import dataclass
import math

import numpy as np

from .profile import Domain, Family, INSIDE, ProblemParams, profile_data

DRIFT_RTOL = 1e-8
MAX_SUBSTEPS = 64


class InvariantDriftError(ArithmeticError):
    pass


@dataclass
class WaveSample:
    """u sampled at x^l = l T / L, l = 0..L, with u(T) ~ e^{i theta} u(0)."""

    x: np.ndarray
    u: np.ndarray
    theta: float
    params: ProblemParams
    T: float
    # diagnostics from the integrator; zero for samples not produced by it
    drift_J: float = 0.0
    drift_E: float = 0.0
    closure: float = 0.0
    substeps: int = 0

    @property
    def L(self):
        return len(self.u) - 1

    @property
    def modulus(self):
        return np.abs(self.u)


def invariants(params, u, du):
    """Pointwise J = Im(u conj(u')) and E = |u'|^2/2 + a|u|^2/2 + b|u|^4/4."""
    u = np.asarray(u)
    du = np.asarray(du)
    rho = (u * u.conj()).real
    J = (u * du.conj()).imag
    E = 0.5 * (du * du.conj()).real + 0.5 * params.a * rho + 0.25 * params.b * rho * rho
    return J, E


def _rk4(a, b, u, v, h, nsteps, stride):
    """Classical RK4 for u' = v, v' = -(a + b|u|^2) u, recording every ``stride`` steps."""
    n_out = nsteps // stride + 1
    us = np.empty(n_out, dtype=complex)
    vs = np.empty(n_out, dtype=complex)
    us[0], vs[0] = u, v
    h2, h6 = 0.5 * h, h / 6.0

    def acc(w):
        return -(a + b * (w.real * w.real + w.imag * w.imag)) * w

    j = 0
    for i in range(1, nsteps + 1):
        k1u, k1v = v, acc(u)
        k2u, k2v = v + h2 * k1v, acc(u + h2 * k1u)
        k3u, k3v = v + h2 * k2v, acc(u + h2 * k2u)
        k4u, k4v = v + h * k3v, acc(u + h * k3u)
        u = u + h6 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
        v = v + h6 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        if i % stride == 0:
            j += 1
            us[j], vs[j] = u, v
    return us, vs


def initial_data(pd):
    """(u(0), u'(0)) at the modulus minimum of the profile."""
    p = pd.params
    if pd.domain.tag in INSIDE or pd.domain.tag == Domain.ON_EMINUS:
        r1 = pd.r1
        return complex(r1, 0.0), complex(0.0, -p.J / r1)
    fam = pd.domain.family
    if fam == Family.DN:
        return complex(pd.r1, 0.0), 0j
    if fam in (Family.SN, Family.CN):
        # real profile through a zero: u' = sqrt(2E) there
        return 0j, complex(math.sqrt(2.0 * p.E), 0.0)
    raise ValueError(f"no finite-period nonconstant profile for {pd.domain}")


def integrate_profile(params, L, pd=None, drift_rtol=DRIFT_RTOL):
    """Integrate u'' + a u + b|u|^2 u = 0 over [0, T] with L grid intervals.

    The RK4 step is T / (N L); N doubles from 1 until the pointwise drift of J
    and E is within ``drift_rtol`` (relative to max(1, |.|)).
    """
    if L < 16:
        raise ValueError("need at least 16 grid intervals")
    if pd is None:
        pd = profile_data(params)
    params = pd.params
    u0, v0 = initial_data(pd)
    T = pd.T
    dx = T / L
    J0, E0 = invariants(params, u0, v0)
    J0, E0 = float(J0), float(E0)
    n = 1
    while True:
        us, vs = _rk4(params.a, params.b, u0, v0, dx / n, n * L, n)
        Js, Es = invariants(params, us, vs)
        dJ = float(np.max(np.abs(Js - J0)))
        dE = float(np.max(np.abs(Es - E0)))
        if dJ <= drift_rtol * max(1.0, abs(J0)) and dE <= drift_rtol * max(1.0, abs(E0)):
            break
        if n >= MAX_SUBSTEPS:
            raise InvariantDriftError(
                f"invariant drift (J {dJ:.2e}, E {dE:.2e}) above {drift_rtol:g} with {n} substeps")
        n *= 2
    twist = np.exp(1j * pd.theta_raw)
    closure = abs(us[-1] - twist * us[0]) + abs(vs[-1] - twist * vs[0])
    x = np.arange(L + 1) * dx
    return WaveSample(x, us, pd.theta_raw, params, T, dJ, dE, float(closure), n)


def align_values(u, theta, zero_rtol=1e-12):
    """Twisted cyclic shift putting argmin |u| at index 0, then a global phase
    so that u[0] is real and >= 0.

    ``u`` holds the L values u^0..u^{L-1}; index L is implied by e^{i theta} u^0.
    When u[0] vanishes (relative to max |u|) its phase is meaningless, so the
    first difference u[1] - u[0] is made real and positive instead.
    """
    u = np.asarray(u, dtype=complex)
    mod = np.abs(u)
    s = int(np.argmin(mod))
    if s:
        u = np.concatenate([u[s:], np.exp(1j * theta) * u[:s]])
    ref = u[0]
    zero = abs(ref) <= zero_rtol * mod.max()
    if zero:
        ref = u[1] - u[0]
    if ref != 0:
        u = u * (abs(ref) / ref)
    if not zero:
        u[0] = abs(u[0])
    return u


def align(sample):
    u = align_values(sample.u[:-1], sample.theta)
    full = np.append(u, np.exp(1j * sample.theta) * u[0])
    return WaveSample(sample.x.copy(), full, sample.theta, sample.params, sample.T,
                      sample.drift_J, sample.drift_E, sample.closure, sample.substeps)
