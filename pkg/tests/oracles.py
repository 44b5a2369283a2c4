"""Independent arbitrary-precision oracles for concentric spheres.

Amplitudes follow textbook Riccati-Bessel matching at imaginary frequency
with psi = x i_l(x), xi = x k_l(x), k_0(x) = exp(-x)/x.  The TE outgoing wave
differs in sign from the solver's convention; round-trip products t1 t2 are
unaffected.
"""

import mpmath as mp


def _i(l, z):
    return mp.sqrt(mp.pi / (2 * z)) * mp.besseli(l + mp.mpf(1) / 2, z)


def _k(l, z):
    return mp.sqrt(2 / (mp.pi * z)) * mp.besselk(l + mp.mpf(1) / 2, z)


def _psi(l, x):
    return x * _i(l, x), x * _i(l - 1, x) - l * _i(l, x)


def _xi(l, x):
    return x * _k(l, x), -x * _k(l - 1, x) - l * _k(l, x)


def t_ext(l, k, R, e1, em):
    """(te, tm) for a regular probe on a sphere; field psi + t xi outside."""
    x = k * mp.sqrt(em) * R
    m = mp.sqrt(mp.mpf(e1) / em)
    p, dp = _psi(l, x)
    q, dq = _xi(l, x)
    py, dpy = _psi(l, m * x)
    out = []
    for a, b in ((py / m, dpy), (py, dpy / m)):
        # A a = p + t q,  A b = dp + t dq
        out.append((a * dp - b * p) / (b * q - a * dq))
    return tuple(out)


def t_int(l, k, r0, e2, em):
    """(te, tm) for an outgoing probe in a cavity; field xi + t psi inside."""
    x = k * mp.sqrt(em) * r0
    m = mp.sqrt(mp.mpf(e2) / em)
    p, dp = _psi(l, x)
    q, dq = _xi(l, x)
    qy, dqy = _xi(l, m * x)
    out = []
    for a, b in ((qy / m, dqy), (qy, dqy / m)):
        out.append((a * dq - b * q) / (b * p - a * dp))
    return tuple(out)


def round_trip_log(k, R1, r0, e1, e2, em, lmax):
    s = mp.mpf(0)
    for l in range(1, lmax + 1):
        for a, b in zip(t_ext(l, k, R1, e1, em), t_int(l, k, r0, e2, em)):
            s += (2 * l + 1) * mp.log(1 - a * b)
    return s


def sphere_energy(R1, r0, e1, e2, em=1, lmax=24, dps=20):
    """E = (1/2 pi) int_0^inf dk sum_l (2l+1) sum_P log(1 - t1 t2)."""
    with mp.workdps(dps):
        f = lambda k: round_trip_log(k, R1, r0, e1, e2, em, lmax)
        return float(mp.quad(f, [0, 1, 4, 16, mp.inf]) / (2 * mp.pi))


def lifshitz_pressure(d, e1, e2, em=1, dps=20):
    """Planar Lifshitz pressure with q = sqrt(em) xi t, t >= 1, by 2-D tanh-sinh."""
    with mp.workdps(dps):
        e1, e2, em = mp.mpf(e1), mp.mpf(e2), mp.mpf(em)

        def f(xi, t):
            q = xi * mp.sqrt(em) * t
            s = mp.mpf(0)
            qa = mp.sqrt(q**2 + (e1 - em) * xi**2)
            qb = mp.sqrt(q**2 + (e2 - em) * xi**2)
            rte = ((q - qa) / (q + qa)) * ((q - qb) / (q + qb))
            rtm = ((e1 * q - em * qa) / (e1 * q + em * qa)) * ((e2 * q - em * qb) / (e2 * q + em * qb))
            e = mp.exp(-2 * q * d)
            for x in (rte * e, rtm * e):
                s += x / (1 - x)
            # dq = xi sqrt(em) dt
            return q**2 * s * xi * mp.sqrt(em)

        val = mp.quad(f, [0, 1 / d, mp.inf], [1, 2, mp.inf])
        return float(-val / (2 * mp.pi**2))
