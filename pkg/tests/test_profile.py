import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import companion_roots, e_of, q_focusing, q_pair_defocusing, raw_integrals
from qpwaves.elliptic import complete_E, complete_K
from qpwaves.profile import (ClassificationError, Domain, Family, NoBoundedSolution,
                             ProblemParams, boundary_curve, classify, cubic_pi, cubic_roots,
                             e_minus, e_plus, elliptic_family_params, family_scale,
                             floquet_theta, mass_momentum, period, plane_wave_limits,
                             potential, profile_data, q_branches)

DEF = ProblemParams(b=-1.0, a=1.0, J=0.2)
# frozen from the bisection oracle
Q_02, q_02 = 0.8788850662499729, 0.2091488484413166
EM_02, EP_02 = 0.1887230200181911, 0.2704365170651153
E_MID = 0.5 * (EM_02 + EP_02)
T_LIMIT_02 = 3.8709694357533957


def test_params_validation():
    with pytest.raises(ValueError):
        ProblemParams(b=0.0, a=1.0)
    with pytest.raises(ValueError):
        ProblemParams(b=1.0, a=1.0, J=-0.1)
    with pytest.raises(ValueError):
        ProblemParams(b=1.0, a=math.nan)


def test_potential():
    assert potential(ProblemParams(b=-1, a=1), 1.0) == pytest.approx(0.25)
    assert potential(DEF, 1.0) == pytest.approx(0.27)
    rQ = math.sqrt((Q_02 ** 2 - 1.0) / -1.0)
    assert potential(DEF, rQ) == pytest.approx(e_minus(DEF), abs=1e-12)
    with pytest.raises(ValueError):
        potential(DEF, 0.0)


def test_q_branches_oracle():
    Q, q = q_branches(DEF)
    Qo, qo = q_pair_defocusing(1.0, 0.2)
    assert Q == pytest.approx(Qo, abs=1e-13) and Q == pytest.approx(Q_02, abs=1e-13)
    assert q == pytest.approx(qo, abs=1e-13) and q == pytest.approx(q_02, abs=1e-13)
    for x in (Q, q):
        assert abs(x * (x * x - 1.0) / -1.0 - 0.2) <= 1e-12
    assert 1 / 3 < Q * Q < 1 and 0 < q * q < 1 / 3


def test_q_branches_limits():
    Q, q = q_branches(DEF.with_J(1e-9))
    assert Q == pytest.approx(1.0, abs=1e-8) and q == pytest.approx(0.0, abs=1e-8)
    jc = 2 / (3 * math.sqrt(3))
    Q, q = q_branches(DEF.with_J(jc))
    assert Q == q == pytest.approx(1 / math.sqrt(3))
    with pytest.raises(NoBoundedSolution):
        q_branches(DEF.with_J(1.0))


@pytest.mark.parametrize("a,J", [(1.0, 1.0), (1.0, 0.01), (-1.0, 4.0), (-1.0, 0.3), (2.0, 5.0)])
def test_q_branches_focusing(a, J):
    Q, q = q_branches(ProblemParams(b=1.0, a=a, J=J))
    assert q is None
    assert Q == pytest.approx(q_focusing(a, J), abs=1e-12)
    if a >= 0:
        assert Q * Q >= a


def test_e_bounds():
    assert e_minus(DEF) == pytest.approx(EM_02, abs=1e-14)
    assert e_plus(DEF) == pytest.approx(EP_02, abs=1e-14)
    Qo, qo = q_pair_defocusing(1.0, 0.2)
    assert e_minus(DEF) == pytest.approx(e_of(-1, 1, Qo), abs=1e-13)
    assert e_plus(DEF) == pytest.approx(e_of(-1, 1, qo), abs=1e-13)
    small = DEF.with_J(1e-9)
    assert e_minus(small) == pytest.approx(0.0, abs=1e-8)
    assert e_plus(small) == pytest.approx(0.25, abs=1e-8)
    crit = DEF.with_J(math.sqrt(4 / 27))
    assert e_minus(crit) == pytest.approx(1 / 3) and e_plus(crit) == pytest.approx(1 / 3)
    with pytest.raises(ValueError):
        e_plus(ProblemParams(b=1.0, a=1.0, J=1.0))


@pytest.mark.parametrize("params,tag,family", [
    (ProblemParams(b=-1, a=1, J=0.2, E=E_MID), Domain.INSIDE_D1, None),
    (ProblemParams(b=-1, a=1, J=0.2, E=0.15), Domain.NO_BOUNDED_SOLUTION, None),
    (ProblemParams(b=-1, a=1, J=0.2, E=EM_02), Domain.ON_EMINUS, None),
    (ProblemParams(b=-1, a=1, J=0.2, E=EP_02), Domain.ON_EPLUS, None),
    (ProblemParams(b=-1, a=1, J=1, E=1), Domain.NO_BOUNDED_SOLUTION, None),
    (ProblemParams(b=1, a=1, J=1, E=5), Domain.INSIDE_D2, None),
    (ProblemParams(b=1, a=-1, J=4, E=7), Domain.INSIDE_D3, None),
    (ProblemParams(b=1, a=-1, J=0, E=-0.095), Domain.REAL_LINE_J0, Family.DN),
    (ProblemParams(b=1, a=-1, J=0, E=0.3), Domain.REAL_LINE_J0, Family.CN),
    (ProblemParams(b=1, a=-1, J=0, E=-0.25), Domain.REAL_LINE_J0, Family.CONSTANT_NONTRIVIAL),
    (ProblemParams(b=1, a=-1, J=0, E=0.0), Domain.REAL_LINE_J0, Family.HOMOCLINIC),
    (ProblemParams(b=1, a=-1, J=0, E=-0.3), Domain.NO_BOUNDED_SOLUTION, None),
    (ProblemParams(b=1, a=1, J=0, E=0.3), Domain.REAL_LINE_J0, Family.CN),
    (ProblemParams(b=-1, a=1, J=0, E=0.1), Domain.REAL_LINE_J0, Family.SN),
    (ProblemParams(b=-1, a=1, J=0, E=0.25), Domain.REAL_LINE_J0, Family.HETEROCLINIC),
    (ProblemParams(b=-1, a=1, J=0, E=0.0), Domain.REAL_LINE_J0, Family.CONSTANT_ZERO),
])
def test_classify(params, tag, family):
    dc = classify(params)
    assert dc.tag == tag and dc.family == family


@settings(max_examples=300, deadline=None)
@given(st.sampled_from([-2.0, -1.0, 1.0, 3.0]), st.floats(-3, 3), st.floats(0, 5), st.floats(-20, 20))
def test_classify_total(b, a, J, E):
    dc = classify(ProblemParams(b=b, a=a, J=J, E=E))
    assert dc.tag in set(Domain)


@pytest.mark.parametrize("b,a,J,E", [(-1, 1, 0.2, E_MID), (1, 1, 1, 5), (1, -1, 4, 7),
                                     (-1, 1, 0.05, 0.1)])
def test_cubic_roots(b, a, J, E):
    p = ProblemParams(b=b, a=a, J=J, E=E)
    r = cubic_roots(p)
    ref = companion_roots(b, a, J, E)
    assert np.allclose([r.y1, r.y2, r.y3], ref, atol=1e-10)
    if b < 0:
        assert 0 < r.y1 < r.y2 < r.y3
    else:
        assert r.y3 < 0 < r.y1 < r.y2
    assert r.y1 + r.y2 + r.y3 == pytest.approx(-2 * a / b, abs=1e-10)
    scale = max(1.0, abs(b), abs(2 * a), abs(4 * E), 2 * J * J)
    for y in (r.y1, r.y2, r.y3):
        assert abs(cubic_pi(p, y)) <= 1e-10 * scale
    for y in (r.y1, r.y2):
        rr = math.sqrt(y)
        assert cubic_pi(p, y) == pytest.approx(4 * y * (E - potential(p, rr)), abs=1e-10)


def test_cubic_roots_double_root_limit():
    p = DEF.with_E(EM_02 + 1e-12)
    r = cubic_roots(p)
    rQ2 = (Q_02 ** 2 - 1.0) / -1.0
    assert r.y1 == pytest.approx(rQ2, abs=1e-5) and r.y2 == pytest.approx(rQ2, abs=1e-5)


def test_cubic_roots_rejects_non_interior():
    with pytest.raises(ClassificationError):
        cubic_roots(DEF.with_E(0.15))


def test_midpoint_profile_frozen():
    pd = profile_data(DEF.with_E(E_MID))
    assert pd.T == pytest.approx(4.34227031012, rel=1e-10)
    assert pd.theta_raw == pytest.approx(-3.47939782827, rel=1e-10)
    assert pd.mass == pytest.approx(0.70005748308, rel=1e-10)
    assert pd.momentum / pd.T == 0.1
    assert 0 <= pd.theta < 2 * math.pi
    assert pd.theta == pytest.approx(pd.theta_raw + 2 * math.pi)


@pytest.mark.parametrize("b,a,J,E", [(-1, 1, 0.2, E_MID), (1, 1, 1, 5), (1, -1, 4, 7),
                                     (-1, 1, 0.3, 0.285), (1, 1, 0.1, 0.6)])
def test_integrals_vs_raw_form(b, a, J, E):
    pd = profile_data(ProblemParams(b=b, a=a, J=J, E=E))
    T, theta, mass = raw_integrals(b, a, J, E)
    assert pd.T == pytest.approx(T, rel=1e-9)
    assert pd.theta_raw == pytest.approx(theta, rel=1e-9)
    assert pd.mass == pytest.approx(mass, rel=1e-9)
    assert pd.momentum == pytest.approx(0.5 * pd.T * J, rel=1e-12)


def test_e_minus_limits():
    gaps = []
    for eps in (1e-4, 1e-6, 1e-8):
        gaps.append(abs(period(DEF.with_E(EM_02 + eps)) - T_LIMIT_02))
    assert gaps[0] > gaps[1] > gaps[2] or gaps[2] == 0.0
    assert gaps[1] <= 1e-3
    T, th, m, p = plane_wave_limits(-1.0, 1.0, Q_02)
    assert T == pytest.approx(math.pi * math.sqrt(2) / math.sqrt(3 * Q_02 ** 2 - 1))
    assert th == pytest.approx(-Q_02 * T)
    assert m == pytest.approx((1 - Q_02 ** 2) / 2 * T)
    assert p == pytest.approx(Q_02 * m)
    raw, _ = floquet_theta(DEF.with_E(EM_02 + 1e-9))
    assert raw == pytest.approx(th, rel=1e-6)
    mm, pp = mass_momentum(DEF.with_E(EM_02 + 1e-9))
    assert mm == pytest.approx(m, rel=1e-6) and pp == pytest.approx(p, rel=1e-6)
    # prefactor placement of the momentum limit: both typeset forms agree
    assert Q_02 * (Q_02 ** 2 - 1) / (2 * -1) * math.pi * math.sqrt(2) / math.sqrt(3 * Q_02 ** 2 - 1) \
        == pytest.approx(0.5 * Q_02 * (Q_02 ** 2 - 1) / -1 * math.pi * math.sqrt(2) / math.sqrt(3 * Q_02 ** 2 - 1))


def test_on_eminus_is_plane_wave():
    pd = profile_data(DEF.with_E(EM_02))
    assert pd.domain.tag == Domain.ON_EMINUS
    assert pd.T == pytest.approx(T_LIMIT_02, rel=1e-13)
    assert pd.r1 == pd.r2


def test_e_plus_divergence():
    Ts, ratios = [], []
    for k in (4, 6, 8, 10, 12):
        pd = profile_data(DEF.with_E(EP_02 - 10.0 ** -k))
        Ts.append(pd.T)
        ratios.append(pd.mass / pd.T)
        assert pd.momentum / pd.T == pytest.approx(0.1, rel=1e-14)
    assert np.all(np.diff(Ts) > 0)
    # mass/T approaches its limit like c/T; extrapolate from the last two samples
    (T1, T2), (r1, r2) = Ts[-2:], ratios[-2:]
    limit = (r2 * T2 - r1 * T1) / (T2 - T1)
    assert limit == pytest.approx((q_02 ** 2 - 1) / -2, abs=1e-3)
    with pytest.raises(ClassificationError):
        profile_data(DEF.with_E(EP_02))


def test_no_bounded_solution_message():
    with pytest.raises(NoBoundedSolution, match="critical"):
        profile_data(ProblemParams(b=-1, a=1, J=1, E=1))


def test_boundary_curve():
    Q, M, P = boundary_curve(-1.0, 1.0, 50)
    assert M[-1] == pytest.approx(0.0, abs=1e-15) and P[-1] == pytest.approx(0.0, abs=1e-15)
    Q, M, P = boundary_curve(-1.0, 1.0, 50, (1 / math.sqrt(3) + 1e-8, 0.9))
    assert M[0] > 1e3 and P[0] > 1e3
    Q, M, P = boundary_curve(1.0, -1.0, 3, (0.5, 1.5))
    assert M[1] == pytest.approx(math.pi * math.sqrt(2) / 2) and P[1] == pytest.approx(M[1])
    # agrees with the E -> E- limit of mass_momentum at the matched Q
    J = 1.0 * (1.0 ** 2 + 1.0) / 1.0
    m, p = mass_momentum(ProblemParams(b=1, a=-1, J=J, E=e_of(1, -1, 1.0) + 1e-9))
    assert m == pytest.approx(M[1], abs=1e-6) and p == pytest.approx(P[1], abs=1e-6)
    with pytest.raises(ValueError):
        boundary_curve(-1.0, 1.0, 10, (0.1, 0.9))


K9, E9 = complete_K(0.9), complete_E(0.9)


@pytest.mark.parametrize("family,b,a,E,theta,mass", [
    ("Dn", 2.0, -1.19, -0.095, 0.0, E9),
    ("Cn", 1.62, -0.62, 0.095, math.pi, (E9 - 0.19 * K9) / 0.81),
    ("Sn", -1.62, 1.81, 0.5, math.pi, (K9 - E9) / 0.81),
])
def test_elliptic_families(family, b, a, E, theta, mass):
    params, pd = elliptic_family_params(family, 0.9)
    assert (params.b, params.a, params.E) == pytest.approx((b, a, E), abs=1e-15)
    assert pd.T == pytest.approx(2 * K9, rel=1e-13)
    assert pd.theta == theta
    assert pd.mass == pytest.approx(mass, rel=1e-12)
    assert pd.momentum == 0.0
    sc = family_scale(params)
    assert sc.k == pytest.approx(0.9, abs=1e-12)
    assert sc.amplitude == pytest.approx(1.0, abs=1e-12) and sc.beta == pytest.approx(1.0, abs=1e-12)


def test_family_scale_rescaled():
    # a rescaled dn: u = A dn(x / beta, k) solves the ODE with b A^2 beta^2 = 2
    k, beta = 0.7, 1.3
    A = math.sqrt(2 / (2 * beta ** 2))
    params = ProblemParams(b=2.0, a=-(2 - k * k) / beta ** 2, J=0.0,
                           E=0.5 * A * A * (k * k - 1) / beta ** 2)
    sc = family_scale(params)
    assert sc.k == pytest.approx(k, abs=1e-10)
    assert sc.beta == pytest.approx(beta, abs=1e-10)
    assert sc.amplitude == pytest.approx(A, abs=1e-10)


@pytest.mark.parametrize("k", [0.0, 1.0, 1.2])
def test_elliptic_family_domain(k):
    with pytest.raises(ValueError):
        elliptic_family_params("Dn", k)
