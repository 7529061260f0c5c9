"""Analytics of the profile equation u'' + a u + b |u|^2 u = 0.

The invariants (J, E) of a bounded profile determine its radial turning points,
its fundamental period T, the phase increment theta over one period, and the
mass/momentum it carries.  Everything here is closed form or one-dimensional
quadrature on [0, pi/2] after the substitution y = y1 cos^2 + y2 sin^2, which
removes the square-root endpoint singularities of the radial integrals.
"""

from dataclasses import dataclass, field
from enum import Enum
import math
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .elliptic import complete_E, complete_K
from .quadrature import gauss_legendre

TWO_PI = 2.0 * math.pi
SQRT2 = math.sqrt(2.0)

# relative width of the band treated as "on" a boundary curve
_EDGE_RTOL = 1e-14
# y2 - y1 below this (relative) switches to the plane-wave closed forms
_DOUBLE_ROOT_RTOL = 1e-10


class NoBoundedSolution(ValueError):
    """No bounded solution of the profile equation exists for these parameters."""


class ClassificationError(ValueError):
    """The requested quantity is not defined for this domain class."""


class Domain(str, Enum):
    INSIDE_D1 = "InsideD1"
    INSIDE_D2 = "InsideD2"
    INSIDE_D3 = "InsideD3"
    ON_EMINUS = "OnEminus"
    ON_EPLUS = "OnEplus"
    REAL_LINE_J0 = "RealLineJ0"
    NO_BOUNDED_SOLUTION = "NoBoundedSolution"


class Family(str, Enum):
    SN = "Sn"
    CN = "Cn"
    DN = "Dn"
    CONSTANT_ZERO = "ConstantZero"
    CONSTANT_NONTRIVIAL = "ConstantNontrivial"
    HOMOCLINIC = "Homoclinic"
    HETEROCLINIC = "Heteroclinic"


INSIDE = (Domain.INSIDE_D1, Domain.INSIDE_D2, Domain.INSIDE_D3)
ELLIPTIC_FAMILIES = (Family.SN, Family.CN, Family.DN)


@dataclass(frozen=True)
class ProblemParams:
    b: float
    a: float
    J: float = 0.0
    E: float = 0.0

    def __post_init__(self):
        for name in ("b", "a", "J", "E"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v!r}")
        if self.b == 0.0:
            raise ValueError("nonlinearity coefficient b must be nonzero")
        if self.J < 0.0:
            raise ValueError("J must be >= 0 (conjugate the profile for J < 0)")

    def with_E(self, E):
        return ProblemParams(self.b, self.a, self.J, E)

    def with_J(self, J):
        return ProblemParams(self.b, self.a, J, self.E)


@dataclass(frozen=True)
class DomainClass:
    tag: Domain
    family: Optional[Family] = None

    def __str__(self):
        return self.tag.value if self.family is None else f"{self.tag.value}/{self.family.value}"


@dataclass(frozen=True)
class CubicRoots:
    """Roots of Pi(y) = -b y^3 - 2a y^2 + 4E y - 2J^2, ordered so that
    [y1, y2] is the radial well (y = r^2) and y3 is the remaining root."""

    y1: float
    y2: float
    y3: float


@dataclass(frozen=True)
class FamilyScale:
    """u(x) = amplitude * f(x / beta, k) for the real elliptic families."""

    family: Family
    k: float
    amplitude: float
    beta: float


@dataclass(frozen=True)
class ProfileData:
    params: ProblemParams
    domain: DomainClass
    T: float
    theta_raw: float
    mass: float
    momentum: float
    r1: float
    r2: float
    roots: Optional[CubicRoots] = None
    scale: Optional[FamilyScale] = field(default=None, compare=False)

    @property
    def theta(self):
        """Floquet multiplier reduced to [0, 2 pi)."""
        t = math.fmod(self.theta_raw, TWO_PI)
        if t < 0.0:
            t += TWO_PI
        # fmod can land exactly on 2 pi after the shift
        return 0.0 if t >= TWO_PI else t


def potential(params, r):
    """V_J(r) = J^2 / (2 r^2) + a r^2 / 2 + b r^4 / 4."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0.0):
        raise ValueError("potential is defined for r > 0 only")
    r2 = r * r
    v = params.J ** 2 / (2.0 * r2) + 0.5 * params.a * r2 + 0.25 * params.b * r2 * r2
    return float(v) if v.ndim == 0 else v


def _cubic_real_roots(c2, c1, c0):
    """Sorted real roots of y^3 + c2 y^2 + c1 y + c0, by the trigonometric /
    Cardano forms, each polished by two guarded Newton steps."""
    shift = c2 / 3.0
    p = c1 - c2 * c2 / 3.0
    q = 2.0 * c2 ** 3 / 27.0 - c2 * c1 / 3.0 + c0
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    if p < 0.0 and disc <= 0.0:
        m = 2.0 * math.sqrt(-p / 3.0)
        den = p * m
        # den underflows only for a numerically triple root
        arg = 3.0 * q / den if den != 0.0 else 0.0
        arg = min(1.0, max(-1.0, arg))
        phi = math.acos(arg) / 3.0
        ts = [m * math.cos(phi - TWO_PI * j / 3.0) for j in range(3)]
    else:
        s = math.sqrt(max(disc, 0.0))
        ts = [math.copysign(abs(-q / 2.0 + s) ** (1 / 3), -q / 2.0 + s)
              + math.copysign(abs(-q / 2.0 - s) ** (1 / 3), -q / 2.0 - s)]
    roots = []
    for t in ts:
        y = t - shift
        for _ in range(2):
            f = ((y + c2) * y + c1) * y + c0
            df = (3.0 * y + 2.0 * c2) * y + c1
            if df == 0.0:
                break
            y_new = y - f / df
            f_new = ((y_new + c2) * y_new + c1) * y_new + c0
            if abs(f_new) < abs(f):
                y = y_new
        roots.append(y)
    return sorted(roots)


def _critical_J2(params):
    return 4.0 * params.a ** 3 / (27.0 * params.b ** 2)


def q_branches(params):
    """Parametrization J = Q (Q^2 - a) / b.

    Returns (Q, q) for b < 0 with 1/3 a <= Q^2 <= a and 0 <= q^2 <= a/3, and
    (Q, None) for b > 0 with Q >= 0 (Q^2 >= a when a >= 0).
    """
    b, a, J = params.b, params.a, params.J
    if b < 0.0:
        if a <= 0.0 or J * J > _critical_J2(params) * (1.0 + 1e-14):
            raise NoBoundedSolution(
                f"b<0 needs a>0 and J^2 <= 4a^3/(27b^2); got a={a}, J={J}")
        if J * J >= _critical_J2(params):
            Qc = math.sqrt(a / 3.0)
            return Qc, Qc
        roots = _cubic_real_roots(0.0, -a, -b * J)
        Q, q = roots[2], max(roots[1], 0.0)
        return Q, q
    roots = _cubic_real_roots(0.0, -a, -b * J)
    return roots[-1], None


def e_minus(params):
    Q, _ = q_branches(params)
    return (Q * Q - params.a) * (3.0 * Q * Q + params.a) / (4.0 * params.b)


def e_plus(params):
    if params.b > 0.0:
        raise ValueError("E+ is only defined in the defocusing case b < 0")
    _, q = q_branches(params)
    return (q * q - params.a) * (3.0 * q * q + params.a) / (4.0 * params.b)


def _near(x, ref):
    return abs(x - ref) <= _EDGE_RTOL * max(1.0, abs(ref))


def classify(params):
    """Total classification of (b, a, J, E); see Domain and Family."""
    b, a, J, E = params.b, params.a, params.J, params.E
    if J == 0.0:
        return _classify_real(b, a, E)
    no = DomainClass(Domain.NO_BOUNDED_SOLUTION)
    if b < 0.0:
        try:
            Q, q = q_branches(params)
        except NoBoundedSolution:
            return no
        em, ep = e_minus(params), e_plus(params)
        if Q == q:
            return DomainClass(Domain.ON_EMINUS) if _near(E, em) else no
        if _near(E, em):
            return DomainClass(Domain.ON_EMINUS)
        if _near(E, ep):
            return DomainClass(Domain.ON_EPLUS)
        return DomainClass(Domain.INSIDE_D1) if em < E < ep else no
    em = e_minus(params)
    if _near(E, em):
        return DomainClass(Domain.ON_EMINUS)
    if E < em:
        return no
    return DomainClass(Domain.INSIDE_D2 if a >= 0.0 else Domain.INSIDE_D3)


def _classify_real(b, a, E):
    def real(family):
        return DomainClass(Domain.REAL_LINE_J0, family)

    no = DomainClass(Domain.NO_BOUNDED_SOLUTION)
    top = -a * a / (4.0 * b)
    if b < 0.0:
        if a <= 0.0:
            return real(Family.CONSTANT_ZERO) if _near(E, 0.0) else no
        if _near(E, 0.0):
            return real(Family.CONSTANT_ZERO)
        if _near(E, top):
            return real(Family.HETEROCLINIC)
        return real(Family.SN) if 0.0 < E < top else no
    if a >= 0.0:
        if _near(E, 0.0):
            return real(Family.CONSTANT_ZERO)
        return real(Family.CN) if E > 0.0 else no
    if _near(E, top):
        return real(Family.CONSTANT_NONTRIVIAL)
    if _near(E, 0.0):
        return real(Family.HOMOCLINIC)
    if top < E < 0.0:
        return real(Family.DN)
    return real(Family.CN) if E > 0.0 else no


def cubic_roots(params, domain=None):
    domain = domain or classify(params)
    if domain.tag not in INSIDE:
        raise ClassificationError(f"cubic roots need an interior point, got {domain}")
    b, a, J, E = params.b, params.a, params.J, params.E
    s = _cubic_real_roots(2.0 * a / b, -4.0 * E / b, 2.0 * J * J / b)
    if b < 0.0:
        return CubicRoots(s[0], s[1], s[2])
    return CubicRoots(s[1], s[2], s[0])


def cubic_pi(params, y):
    return -params.b * y ** 3 - 2.0 * params.a * y ** 2 + 4.0 * params.E * y - 2.0 * params.J ** 2


def _is_double(roots):
    return roots.y2 - roots.y1 < _DOUBLE_ROOT_RTOL * max(1.0, roots.y2)


def _phi_integrals(params, roots):
    """(T, theta_raw, mass) from the substituted integrals on [0, pi/2]."""
    b, J = params.b, params.J
    y1, y2, y3 = roots.y1, roots.y2, roots.y3

    def integrand(phi):
        s2 = np.sin(phi) ** 2  # not 1 - cos^2, which cancels near phi = 0
        S = y1 * (1.0 - s2) + y2 * s2
        w = 1.0 / np.sqrt(b * (S - y3))
        return np.stack([w, w / S, w * S])

    # 1/S peaks at phi = 0 with width ~ sqrt(y1/y2); grade the panels toward it
    width = math.sqrt(abs(y1) / y2) if y2 > 0.0 else 1.0
    edges = [0.0, 0.5 * math.pi]
    if width < 0.1:
        edges = [0.0, *np.geomspace(width, 0.5 * math.pi, 2 + int(math.log2(1.0 / width)))]
    I_T, I_theta, I_mass = sum(gauss_legendre(integrand, lo, hi)
                               for lo, hi in zip(edges[:-1], edges[1:]))
    T = 2.0 * SQRT2 * I_T
    theta = -2.0 * SQRT2 * J * I_theta
    mass = SQRT2 * I_mass
    return T, theta, mass


def plane_wave_limits(b, a, Q):
    """Closed-form (T, theta_raw, mass, momentum) of r_Q e^{-iQx} on the E = E- curve."""
    den = 3.0 * Q * Q - a
    if den <= 0.0:
        raise ClassificationError("plane-wave period diverges at 3Q^2 = a")
    T = math.pi * SQRT2 / math.sqrt(den)
    rQ2 = (Q * Q - a) / b
    mass = 0.5 * rQ2 * T
    return T, -Q * T, mass, Q * mass


def _plane_wave_profile(params, domain, Q):
    T, theta, mass, momentum = plane_wave_limits(params.b, params.a, Q)
    rQ = math.sqrt(max((Q * Q - params.a) / params.b, 0.0))
    return ProfileData(params, domain, T, theta, mass, momentum, rQ, rQ)


def _why_unbounded(params):
    b, a, J = params.b, params.a, params.J
    if b < 0.0 and J != 0.0:
        if a <= 0.0:
            return "the defocusing case needs a > 0 when J != 0"
        jc = math.sqrt(_critical_J2(params))
        if J > jc:
            return f"J exceeds the critical value sqrt(4a^3/(27b^2)) = {jc:.6g}"
        return f"E must lie between E-(J) = {e_minus(params):.6g} and E+(J) = {e_plus(params):.6g}"
    if J != 0.0:
        return f"E must be at least E-(J) = {e_minus(params):.6g}"
    return "E is outside the range of bounded real profiles"


def profile_data(params):
    """Period, Floquet phase, mass and momentum for any (b, a, J, E) that admits
    a bounded nonconstant profile of finite period."""
    domain = classify(params)
    if domain.tag == Domain.NO_BOUNDED_SOLUTION:
        raise NoBoundedSolution(f"no bounded solution for {params}: {_why_unbounded(params)}")
    if domain.tag == Domain.REAL_LINE_J0:
        if domain.family not in ELLIPTIC_FAMILIES:
            raise ClassificationError(f"{domain} has no finite-period nonconstant profile")
        return _real_family_profile(params, domain)
    if domain.tag == Domain.ON_EMINUS:
        Q, _ = q_branches(params)
        return _plane_wave_profile(params, domain, Q)
    if domain.tag == Domain.ON_EPLUS:
        raise ClassificationError("period is infinite on E = E+")
    roots = cubic_roots(params, domain)
    if _is_double(roots):
        Q, _ = q_branches(params)
        T, theta, mass, momentum = plane_wave_limits(params.b, params.a, Q)
    else:
        T, theta, mass = _phi_integrals(params, roots)
        momentum = 0.5 * T * params.J
    r1, r2 = math.sqrt(max(roots.y1, 0.0)), math.sqrt(roots.y2)
    return ProfileData(params, domain, T, theta, mass, momentum, r1, r2, roots)


def period(params):
    return profile_data(params).T


def floquet_theta(params):
    """(raw, reduced to [0, 2 pi)) phase increment over one period."""
    pd = profile_data(params)
    return pd.theta_raw, pd.theta


def mass_momentum(params):
    pd = profile_data(params)
    return pd.mass, pd.momentum


def boundary_curve(b, a, n, q_range=None):
    """Samples (Q, M_bd, P_bd) of the image of the E = E- boundary.

    The default Q range is the case-appropriate interval, capped at 1.5 when
    it is unbounded (as in the published figure).
    """
    if b < 0.0:
        if a <= 0.0:
            raise ValueError("defocusing boundary curve requires a > 0")
        lo, hi = math.sqrt(a / 3.0), math.sqrt(a)
    elif a >= 0.0:
        lo, hi = math.sqrt(a), math.inf
    else:
        lo, hi = 0.0, math.inf
    if q_range is None:
        q_range = (lo, min(hi, 1.5))
    q_lo, q_hi = q_range
    if q_lo < lo or q_hi > hi or q_lo >= q_hi:
        raise ValueError(f"Q range {q_range} outside the admissible interval ({lo}, {hi})")
    Q = np.linspace(q_lo, q_hi, n)
    with np.errstate(divide="ignore", invalid="ignore"):
        M = (Q * Q - a) / (2.0 * b) * math.pi * SQRT2 / np.sqrt(3.0 * Q * Q - a)
    keep = np.isfinite(M)
    Q, M = Q[keep], M[keep]
    return Q, M, Q * M


# --- J = 0: real elliptic families -------------------------------------------------


def _solve_modulus(g, target, lo, hi):
    # g is monotone on (lo, hi); bracket slightly inside the open interval
    eps = 1e-15
    return brentq(lambda m: g(m) - target, lo + eps, hi - eps, xtol=1e-17, rtol=1e-15, maxiter=400)


def family_scale(params, family=None):
    """Recover (k, amplitude, beta) with u = amplitude * f(x / beta, k) from (a, b, E)."""
    b, a, E = params.b, params.a, params.E
    if family is None:
        dc = classify(params)
        if dc.tag != Domain.REAL_LINE_J0 or dc.family not in ELLIPTIC_FAMILIES:
            raise ClassificationError(f"{dc} is not an elliptic family")
        family = dc.family
    s = b * E / (a * a) if a != 0.0 else math.inf
    if family == Family.DN:
        # b E / a^2 = (m - 1) / (2 - m)^2, increasing on (0, 1)
        m = _solve_modulus(lambda m: (m - 1.0) / (2.0 - m) ** 2, s, 0.0, 1.0)
        beta2 = -(2.0 - m) / a
        amp2 = 2.0 / (b * beta2)
    elif family == Family.SN:
        # -b E / a^2 = m / (1 + m)^2, increasing on (0, 1)
        m = _solve_modulus(lambda m: m / (1.0 + m) ** 2, -s, 0.0, 1.0)
        beta2 = (1.0 + m) / a
        amp2 = -2.0 * m / (b * beta2)
    elif family == Family.CN:
        if a == 0.0:
            m = 0.5
            beta2 = math.sqrt(1.0 / (4.0 * b * E))
        else:
            # b E / a^2 = m (1 - m) / (1 - 2m)^2 on the branch matching sign(a)
            g = lambda m: m * (1.0 - m) / (1.0 - 2.0 * m) ** 2
            m = _solve_modulus(g, s, 0.0, 0.5) if a > 0.0 else _solve_modulus(g, s, 0.5, 1.0)
            beta2 = (1.0 - 2.0 * m) / a
        amp2 = 2.0 * m / (b * beta2)
    else:
        raise ClassificationError(f"{family} is not an elliptic family")
    return FamilyScale(family, math.sqrt(m), math.sqrt(amp2), math.sqrt(beta2))


def _real_family_profile(params, domain):
    sc = family_scale(params, domain.family)
    k, A, beta = sc.k, sc.amplitude, sc.beta
    K, Ek = complete_K(k), complete_E(k)
    T = 2.0 * K * beta
    if sc.family == Family.DN:
        theta, unit_mass, r1 = 0.0, Ek, A * math.sqrt((1.0 - k) * (1.0 + k))
    elif sc.family == Family.CN:
        theta, unit_mass, r1 = math.pi, (Ek - (1.0 - k * k) * K) / (k * k), 0.0
    else:
        theta, unit_mass, r1 = math.pi, (K - Ek) / (k * k), 0.0
    mass = A * A * beta * unit_mass
    return ProfileData(params, domain, T, theta, mass, 0.0, r1, A, None, sc)


_FAMILY_COEFFS = {
    Family.DN: lambda k: (2.0, -(2.0 - k * k), 0.5 * (k * k - 1.0)),
    Family.CN: lambda k: (2.0 * k * k, 1.0 - 2.0 * k * k, 0.5 * (1.0 - k * k)),
    Family.SN: lambda k: (-2.0 * k * k, 1.0 + k * k, 0.5),
}


def elliptic_family_params(family, k):
    """Parameters for which dn, cn or sn(., k) itself is the profile."""
    family = Family(family) if not isinstance(family, Family) else family
    if family not in _FAMILY_COEFFS:
        raise ValueError(f"unknown elliptic family {family}")
    if not (0.0 < k < 1.0):
        raise ValueError(f"elliptic modulus must lie in (0, 1), got k={k!r}")
    b, a, E = _FAMILY_COEFFS[family](k)
    params = ProblemParams(b=b, a=a, J=0.0, E=E)
    return params, profile_data(params)
