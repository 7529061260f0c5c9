"""Complete elliptic integrals and Jacobi elliptic functions.

Everything here is computed from the arithmetic-geometric mean, so there is no
dependency on a special-function library.  The modulus convention is ``k``
(not the parameter ``m = k**2``).
"""

import math

import numpy as np

_AGM_TOL = 1e-15
_LANDEN_TOL = 1e-14
_MAX_ITER = 64


def _check_open(k):
    if not (0.0 < k < 1.0):
        raise ValueError(f"elliptic modulus must lie in (0, 1), got k={k!r}")


def _agm_sequence(k):
    """Descending AGM (Landen) sequence started from (1, k', k)."""
    a, b, c = 1.0, math.sqrt((1.0 - k) * (1.0 + k)), k
    seq = [(a, b, c)]
    for _ in range(_MAX_ITER):
        if abs(c) < _LANDEN_TOL * a:
            break
        a, b, c = 0.5 * (a + b), math.sqrt(a * b), 0.5 * (a - b)
        seq.append((a, b, c))
    else:
        raise ArithmeticError(f"AGM did not converge for k={k!r}")
    return seq


def complete_K(k):
    """K(k) = F(pi/2, k) for 0 < k < 1."""
    _check_open(k)
    a, _, _ = _agm_sequence(k)[-1]
    return math.pi / (2.0 * a)


def complete_E(k):
    """E(k) for 0 <= k <= 1; the endpoints return the exact limits pi/2 and 1."""
    if k == 0.0:
        return 0.5 * math.pi
    if k == 1.0:
        return 1.0
    _check_open(k)
    seq = _agm_sequence(k)
    a_n = seq[-1][0]
    # E = K * (1 - sum 2^(n-1) c_n^2), c_0 = k
    s = sum(2.0 ** (n - 1) * c * c for n, (_, _, c) in enumerate(seq))
    return math.pi / (2.0 * a_n) * (1.0 - s)


def jacobi_scd(x, k):
    """Return (sn, cn, dn) at real ``x`` (scalar or array) for 0 < k < 1.

    Uses the descending Landen recurrence for the amplitude; dn is recovered
    from k^2 sn^2 + dn^2 = 1, which is well conditioned because dn >= k'.
    """
    _check_open(k)
    seq = _agm_sequence(k)
    x = np.asarray(x, dtype=float)
    n = len(seq) - 1
    a_n = seq[-1][0]
    phi = (2.0 ** n) * a_n * x
    for j in range(n, 0, -1):
        a_j, _, c_j = seq[j]
        phi = 0.5 * (phi + np.arcsin(c_j / a_j * np.sin(phi)))
    sn = np.sin(phi)
    cn = np.cos(phi)
    dn = np.sqrt((1.0 - k * sn) * (1.0 + k * sn))
    if sn.ndim == 0:
        return float(sn), float(cn), float(dn)
    return sn, cn, dn


def amplitude(x, k):
    """Jacobi amplitude am(x, k), continuous in x."""
    _check_open(k)
    seq = _agm_sequence(k)
    x = np.asarray(x, dtype=float)
    n = len(seq) - 1
    phi = (2.0 ** n) * seq[-1][0] * x
    for j in range(n, 0, -1):
        a_j, _, c_j = seq[j]
        phi = 0.5 * (phi + np.arcsin(c_j / a_j * np.sin(phi)))
    return phi if phi.ndim else float(phi)


def incomplete_F(phi, k):
    """Incomplete integral of the first kind by the Landen/AGM descent."""
    return _incomplete(phi, k)[0]


def incomplete_E(phi, k):
    """Incomplete integral of the second kind by the Landen/AGM descent."""
    return _incomplete(phi, k)[1]


def _incomplete(phi, k):
    # DLMF 19.8.iii: ascending amplitudes phi_{n+1} = phi_n + atan((b_n/a_n) tan phi_n)
    # with the branch chosen so phi_{n+1} tracks 2*phi_n.
    _check_open(k)
    a, b, c = 1.0, math.sqrt((1.0 - k) * (1.0 + k)), k
    ph = float(phi)
    s_c = 0.5 * c * c
    s_sin = 0.0
    for n in range(1, _MAX_ITER):
        t = math.atan(b / a * math.tan(ph))
        # branch of atan that tracks ph, so the amplitude stays continuous
        t += math.pi * round((ph - t) / math.pi)
        ph = ph + t
        a, b, c = 0.5 * (a + b), math.sqrt(a * b), 0.5 * (a - b)
        s_c += 2.0 ** (n - 1) * c * c
        s_sin += c * math.sin(ph)
        if abs(c) < _LANDEN_TOL * a:
            break
    F = ph / (2.0 ** n * a)
    E = F * (1.0 - s_c) + s_sin
    return F, E
