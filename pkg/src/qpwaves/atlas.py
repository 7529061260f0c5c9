"""Parameter sweeps over the (J, E) domains: monotonicity of the period, sign of
the Jacobian of (J, E) -> (mass, momentum), injectivity, and figure data."""

from dataclasses import asdict, dataclass, fields
import csv
import io
import json
import math

import numpy as np

from .profile import (INSIDE, NoBoundedSolution, ProblemParams, boundary_curve,
                      classify, e_minus, e_plus, profile_data, q_branches)

T_MAX = 1e3          # records with longer periods are left out of derivative estimates
FD_STEP = 1e-4       # relative finite-difference step
SHRINK_LIMIT = 8     # halvings allowed before a record is tagged as boundary-adjacent
FIGURE_J_SAMPLES = 200
J0_E_MAX = 12.0      # upper end of the J = 0 half-line in the map-image figure


@dataclass(frozen=True)
class AtlasRecord:
    J: float
    E: float
    T: float
    theta: float
    mass: float
    momentum: float
    dT_dE: float
    dT_dJ: float
    dM_dE: float
    dM_dJ: float
    dP_dE: float
    dP_dJ: float
    Delta: float
    near_boundary: bool = False

    @property
    def usable(self):
        return not self.near_boundary and self.T <= T_MAX


FIELDS = tuple(f.name for f in fields(AtlasRecord))


def critical_J(b, a):
    """Upper end of the J interval for D1; infinity otherwise."""
    if b < 0.0 and a > 0.0:
        return math.sqrt(4.0 * a ** 3 / (27.0 * b * b))
    return math.inf


def e_window(b, a, J, e_span=5.0):
    """(E-, upper) for the admissible E interval at this J; the upper end is E+
    in the defocusing case and E- + e_span otherwise."""
    p = ProblemParams(b=b, a=a, J=J)
    lo = e_minus(p)
    hi = e_plus(p) if b < 0.0 else lo + e_span
    return lo, hi


def interior_grid(b, a, n=20, j_max=2.0, e_span=5.0, e_rule="log"):
    """n x n interior points of the admissible domain.

    With ``e_rule="log"`` the relative distance to the upper edge is spaced
    geometrically, refining toward E+ where the period diverges.
    """
    jc = critical_J(b, a)
    top = jc if math.isfinite(jc) else j_max
    Js = top * (np.arange(1, n + 1) / (n + 1))
    if e_rule == "log":
        fr = 1.0 - np.geomspace(n / (n + 1.0), 1e-3, n)
    elif e_rule == "uniform":
        fr = np.arange(1, n + 1) / (n + 1.0)
    else:
        raise ValueError(f"unknown E rule {e_rule!r}")
    pts = []
    for J in Js:
        lo, hi = e_window(b, a, float(J), e_span)
        pts.extend((float(J), float(lo + t * (hi - lo))) for t in fr)
    return pts


def _values(b, a, J, E):
    pd = profile_data(ProblemParams(b=b, a=a, J=J, E=E))
    return np.array([pd.T, pd.mass, pd.momentum]), pd


def _inside(b, a, J, E):
    if J <= 0.0:
        return False
    try:
        return classify(ProblemParams(b=b, a=a, J=J, E=E)).tag in INSIDE
    except ValueError:
        return False


def _central(b, a, J, E, dJ, dE):
    """Central difference along (dJ, dE), halving the step while either end
    leaves the domain.  Returns (derivative, shrunk)."""
    for i in range(SHRINK_LIMIT + 1):
        if _inside(b, a, J + dJ, E + dE) and _inside(b, a, J - dJ, E - dE):
            hi, _ = _values(b, a, J + dJ, E + dE)
            lo, _ = _values(b, a, J - dJ, E - dE)
            step = dJ if dJ else dE
            return (hi - lo) / (2.0 * step), i > 0
        dJ, dE = 0.5 * dJ, 0.5 * dE
    return np.full(3, np.nan), True


def record(b, a, J, E, h=FD_STEP, e_span=5.0):
    """One AtlasRecord with finite-difference partials at relative step h."""
    v, pd = _values(b, a, J, E)
    lo, hi = e_window(b, a, J, e_span)
    dE = h * (hi - lo)
    dJ = h * J
    dv_dE, shrunk_E = _central(b, a, J, E, 0.0, dE)
    dv_dJ, shrunk_J = _central(b, a, J, E, dJ, 0.0)
    # tagged when the unshrunk stencil would come within 2h of an edge
    near = shrunk_E or shrunk_J or min(E - lo, hi - E) < 2.0 * dE
    dT_dE, dM_dE, dP_dE = dv_dE
    dT_dJ, dM_dJ, dP_dJ = dv_dJ
    delta = dP_dE * dM_dJ - dM_dE * dP_dJ
    return AtlasRecord(J, E, pd.T, pd.theta, pd.mass, pd.momentum,
                       float(dT_dE), float(dT_dJ), float(dM_dE), float(dM_dJ),
                       float(dP_dE), float(dP_dJ), float(delta), bool(near))


def sweep(b, a, points=None, n=20, h=FD_STEP, e_span=5.0, e_rule="log"):
    """Records for ``points`` (default: the n x n interior grid), in input order."""
    if points is None:
        points = interior_grid(b, a, n, e_span=e_span, e_rule=e_rule)
    return [record(b, a, J, E, h, e_span) for J, E in points]


def sign_violations(records):
    """Usable records breaking dT/dE > 0, dT/dJ < 0 or Delta < 0."""
    return [r for r in records if r.usable and not (r.dT_dE > 0 and r.dT_dJ < 0 and r.Delta < 0)]


# --- injectivity of (J, E) -> (mass, momentum) on D1 --------------------------------


def d_tilde_bound(M):
    """Upper momentum bound of the image region for b = -1, a = 1."""
    M = np.asarray(M, dtype=float)
    pi2 = math.pi ** 2
    return M / math.pi * np.sqrt(3.0 * M * M + pi2 - np.sqrt(9.0 * M ** 4 + 4.0 * M * M * pi2))


@dataclass
class InjectivityReport:
    pairs: int
    min_separation_image: float
    collisions: list
    outside: list

    @property
    def ok(self):
        return not self.collisions and not self.outside


def random_d1_points(n, rng, b=-1.0, a=1.0, margin=1e-2):
    jc = critical_J(b, a)
    out = []
    while len(out) < n:
        J = float(rng.uniform(margin, 1.0 - margin) * jc)
        lo, hi = e_window(b, a, J)
        E = float(lo + rng.uniform(margin, 1.0 - margin) * (hi - lo))
        out.append((J, E))
    return out


def injectivity_probe(n_pairs=500, seed=0, b=-1.0, a=1.0, min_sep=1e-3, image_tol=1e-9):
    """Check that distinct points of D1 have distinct images inside the region
    0 < P < d_tilde_bound(M)."""
    if not (b == -1.0 and a == 1.0):
        raise ValueError("the probe is normalized to b = -1, a = 1")
    rng = np.random.default_rng(seed)
    pts = random_d1_points(2 * n_pairs, rng, b, a)
    img = np.array([[pd.mass, pd.momentum] for pd in
                    (profile_data(ProblemParams(b=b, a=a, J=J, E=E)) for J, E in pts)])
    collisions, outside = [], []
    min_img = math.inf
    for i in range(n_pairs):
        p, q = 2 * i, 2 * i + 1
        if math.dist(pts[p], pts[q]) < min_sep:
            continue
        d = float(np.max(np.abs(img[p] - img[q])))
        min_img = min(min_img, d)
        if d < image_tol:
            collisions.append((pts[p], pts[q], d))
    bound = d_tilde_bound(img[:, 0])
    for (J, E), (M, P), ub in zip(pts, img, bound):
        if not (M > 0 and 0 < P < ub):
            outside.append((J, E, M, P))
    return InjectivityReport(n_pairs, min_img, collisions, outside)


def boundary_gap(params):
    """Distance from the image of (J, E) to the boundary-curve point with the same Q."""
    Q, _ = q_branches(params)
    b, a = params.b, params.a
    M = (Q * Q - a) / (2.0 * b) * math.pi * math.sqrt(2.0) / math.sqrt(3.0 * Q * Q - a)
    pd = profile_data(params)
    return math.hypot(pd.mass - M, pd.momentum - Q * M)


# --- figure data ----------------------------------------------------------------------


PANELS = ((-1.0, 1.0), (1.0, 1.0), (1.0, -1.0))
FIGURES = ("domains", "boundary-curves", "map-image")


def domains_table(b, a, n=FIGURE_J_SAMPLES, j_max=2.0):
    """E-(J) and, in the defocusing case, E+(J) over n J values."""
    jc = critical_J(b, a)
    Js = np.linspace(0.0, jc if math.isfinite(jc) else j_max, n)
    em, ep = [], []
    for J in Js:
        p = ProblemParams(b=b, a=a, J=float(J))
        em.append(e_minus(p))
        ep.append(e_plus(p) if b < 0.0 else math.nan)
    return {"J": Js, "E_minus": np.array(em), "E_plus": np.array(ep)}


def boundary_curves_table(b, a, n=FIGURE_J_SAMPLES, q_range=None):
    Q, M, P = boundary_curve(b, a, n, q_range)
    return {"Q": Q, "M_bd": M, "P_bd": P}


def _j0_line(b, a, n):
    """(E, mass, momentum) along J = 0 for E in (-a^2/4b, J0_E_MAX], E = 0 skipped."""
    lo = -a * a / (4.0 * b)
    Es = np.linspace(lo, J0_E_MAX, n + 1)[1:]
    rows = []
    for E in Es:
        if E == 0.0:
            continue
        try:
            pd = profile_data(ProblemParams(b=b, a=a, J=0.0, E=float(E)))
        except (NoBoundedSolution, ValueError):
            continue
        if math.isfinite(pd.mass):
            rows.append((float(E), pd.mass, pd.momentum))
    return rows


def map_image_table(b, a, n=20, j_max=2.0, e_span=5.0):
    """Images of the boundary curve, an interior grid and (focusing a < 0) the J = 0 line."""
    rows = [("boundary", math.nan, math.nan, m, p)
            for m, p in zip(*boundary_curve(b, a, FIGURE_J_SAMPLES)[1:])]
    for j, e in interior_grid(b, a, n, j_max=j_max, e_span=e_span):
        pd = profile_data(ProblemParams(b=b, a=a, J=j, E=e))
        rows.append(("interior", j, e, pd.mass, pd.momentum))
    if b > 0.0 and a < 0.0:
        rows.extend(("j0", 0.0, e, m, p) for e, m, p in _j0_line(b, a, FIGURE_J_SAMPLES))
    kind, J, E, M, P = zip(*rows)
    return {"kind": np.array(kind), "J": np.array(J), "E": np.array(E),
            "mass": np.array(M), "momentum": np.array(P)}


def figures(which, b, a, n=None):
    if which == "domains":
        return domains_table(b, a, n or FIGURE_J_SAMPLES)
    if which == "boundary-curves":
        return boundary_curves_table(b, a, n or FIGURE_J_SAMPLES)
    if which == "map-image":
        return map_image_table(b, a, n or 20)
    raise ValueError(f"unknown figure {which!r}; choose from {FIGURES}")


# --- output ---------------------------------------------------------------------------


def fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, str):
        return v
    return format(float(v), ".17g")


def table_csv(table):
    """CSV text for a dict of equal-length columns."""
    names = list(table)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names)
    for row in zip(*(table[k] for k in names)):
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def records_csv(records):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FIELDS)
    for r in records:
        w.writerow([fmt(getattr(r, k)) for k in FIELDS])
    return buf.getvalue()


def records_json(records):
    def clean(v):
        if isinstance(v, float) and not math.isfinite(v):
            return None
        return v
    rows = [{k: clean(v) for k, v in asdict(r).items()} for r in records]
    return json.dumps(rows, indent=1)
