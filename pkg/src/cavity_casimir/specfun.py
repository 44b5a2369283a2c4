r"""Modified spherical Bessel functions, radial mode matrices and real vector
spherical harmonics at imaginary frequency.

Normalisation:

.. math::
    i_\ell(z) = \sqrt{\pi/2z}\, I_{\ell+1/2}(z), \qquad
    k_\ell(z) = \sqrt{2/\pi z}\, K_{\ell+1/2}(z),

so that :math:`i_0 = \sinh z / z`, :math:`k_0 = e^{-z}/z` and the Wronskian is
:math:`i_\ell k_\ell' - i_\ell' k_\ell = -1/z^2`.

Values are carried as ``mantissa * exp(log_scale)`` because :math:`i_\ell`
grows like :math:`e^z` and :math:`k_\ell` like :math:`z^{-\ell-1}`.

Phase convention
----------------
The radial mode matrices drop the global :math:`i^\ell` and the extra factor
:math:`i` of the TM column.  Both are column phases of the regular and the
outgoing matrices alike, so every T-matrix changes by a diagonal unitary
similarity and traces of products (energies, pressures) are unchanged.  With
this choice all matrices are real.  Rows of a radial matrix are the
coefficients of the (X, Z, radial) vector harmonics, columns are (TE, TM):

    regular   [[i,  0      ], [0, psi_i], [0, sqrt(L) i / z]]
    outgoing  [[-k, 0      ], [0, chi_k], [0, sqrt(L) k / z]]

with ``psi_i = (1/z) d(z i)/dz``, ``chi_k = (1/z) d(z k)/dz``, ``L = l(l+1)``.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import sph_harm_y

from .basis import ModeBasis

ELL_MAX = 80
_BIG = 1e250
_LOG_BIG = math.log(_BIG)


class DomainError(ValueError):
    """Argument outside the supported domain of a special function."""


class ScaledValue(NamedTuple):
    """``mantissa * exp(log_scale)`` with the mantissa in [e^-1/2, e^1/2]."""

    mantissa: float
    log_scale: float

    @classmethod
    def normalized(cls, mantissa, log_scale):
        if mantissa == 0.0 or not math.isfinite(mantissa):
            return cls(float(mantissa), float(log_scale))
        shift = round(math.log(abs(mantissa)))
        return cls(mantissa * math.exp(-shift), log_scale + shift)

    @property
    def value(self):
        return self.mantissa * math.exp(self.log_scale)

    @property
    def log_abs(self):
        return math.log(abs(self.mantissa)) + self.log_scale


def _check(ell, z, ell_max=ELL_MAX):
    if not z > 0 or not math.isfinite(z):
        raise DomainError(f"z must be positive and finite, got {z!r}")
    if int(ell) != ell or ell < 0 or ell > ell_max:
        raise DomainError(f"ell must be an integer in [0, {ell_max}], got {ell!r}")


def _log_odd_double_factorial(ell):
    # log((2l+1)!!)
    return math.lgamma(2 * ell + 2) - ell * math.log(2.0) - math.lgamma(ell + 1)


def _i_ratio_cf(n, z):
    """i_{n+1}/i_n from its continued fraction (modified Lentz)."""
    tiny = 1e-300
    f = tiny
    c, d = f, 0.0
    j = n + 1
    while True:
        bj = (2 * j + 1) / z
        d = bj + d
        d = 1.0 / (d if d != 0.0 else tiny)
        c = bj + 1.0 / c
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < 1e-16:
            return f
        j += 1
        if j > n + 100000:
            raise RuntimeError("continued fraction failed to converge")


def _log_i0(z):
    # log i_0 = log(sinh z / z) without overflow
    return z + math.log(-math.expm1(-2.0 * z) / (2.0 * z))


def _i_upward_list(lmax, z):
    """e^{-z}-scaled forward recurrence; well conditioned once z >> l^2."""
    e2 = math.exp(-2.0 * z)
    a = -math.expm1(-2.0 * z) / (2.0 * z)
    b = ((z - 1.0) + (z + 1.0) * e2) / (2.0 * z * z)
    mant = [a, b][: lmax + 1]
    for n in range(1, lmax):
        a, b = b, a - (2 * n + 1) / z * b
        mant.append(b)
    return mant, [z] * (lmax + 1)


def _i_scaled_list(lmax, z):
    """i_0..i_lmax as (mantissa, log_scale) lists.

    The ratio at the top order comes from its continued fraction; lower ratios
    follow from r_{n-1} = 1 / ((2n+1)/z + r_n), the stable direction for i.
    Values are then built upward from the closed-form i_0.
    """
    if z > 0.25 * lmax * lmax + 30.0:
        return _i_upward_list(lmax, z)
    ratios = [0.0] * max(lmax, 1)
    r = _i_ratio_cf(lmax, z)
    for n in range(lmax, 0, -1):
        r = 1.0 / ((2 * n + 1) / z + r)
        ratios[n - 1] = r
    mant, logs = [1.0], [_log_i0(z)]
    val, off = 1.0, logs[0]
    for n in range(lmax):
        val *= ratios[n]
        if val < 1.0 / _BIG:
            val *= _BIG
            off -= _LOG_BIG
        mant.append(val)
        logs.append(off)
    return mant, logs


def _i_any(ell, z):
    mant, logs = _i_scaled_list(ell, z)
    return ScaledValue.normalized(mant[ell], logs[ell])


def bessel_i(ell, z):
    """Modified spherical Bessel function of the first kind.

    Downward ratio recursion seeded by a continued fraction, normalised to
    the closed form of i_0.

    Parameters
    ----------
    ell : int
        order, 0 <= ell <= 80
    z : float
        positive argument

    Returns
    -------
    ScaledValue
    """
    _check(ell, z)
    return _i_any(ell, z)


def _k_upward_list(lmax, z):
    k0 = 1.0 / z
    k1 = (1.0 + z) / (z * z)
    mant = [k0, k1][: lmax + 1]
    logs = [-z, -z][: lmax + 1]
    a, b, off = k0, k1, -z
    for n in range(1, lmax):
        a, b = b, a + (2 * n + 1) / z * b
        if b > _BIG:
            a /= _BIG
            b /= _BIG
            off += _LOG_BIG
        mant.append(b)
        logs.append(off)
    return mant, logs


def bessel_k(ell, z):
    """Modified spherical Bessel function of the second kind, ``k_0 = e^-z / z``.

    Forward recurrence is the stable direction for this family.
    """
    _check(ell, z)
    mant, logs = _k_upward_list(ell, z)
    return ScaledValue.normalized(mant[ell], logs[ell])


def bessel_i_deriv(ell, z):
    """d i_l / dz = i_{l+1} + (l/z) i_l (both terms positive)."""
    _check(ell, z)
    a = _i_any(ell, z)
    b = _i_any(ell + 1, z)
    ratio = b.mantissa / a.mantissa * math.exp(b.log_scale - a.log_scale)
    return ScaledValue.normalized(a.mantissa * (ratio + ell / z), a.log_scale)


def bessel_k_deriv(ell, z):
    """d k_l / dz, via k_1 for l = 0 and -k_{l-1} - (l+1)/z k_l otherwise."""
    _check(ell, z)
    mant, logs = _k_upward_list(max(ell, 1), z)
    if ell == 0:
        return ScaledValue.normalized(-mant[1], logs[1])
    ratio = mant[ell - 1] / mant[ell] * math.exp(logs[ell - 1] - logs[ell])
    return ScaledValue.normalized(-mant[ell] * (ratio + (ell + 1) / z), logs[ell])


def bessel_i_array(lmax, z):
    """Mantissas and log-scales of i_0..i_lmax (no upper limit on ``lmax``)."""
    if not z > 0:
        raise DomainError(f"z must be positive, got {z!r}")
    m, e = _i_scaled_list(lmax, z)
    return np.array(m), np.array(e)


def bessel_k_array(lmax, z):
    """Mantissas and log-scales of k_0..k_lmax by forward recurrence."""
    if not z > 0:
        raise DomainError(f"z must be positive, got {z!r}")
    m, e = _k_upward_list(lmax, z)
    return np.array(m[: lmax + 1]), np.array(e[: lmax + 1])


class RadialData:
    """Logarithms and logarithmic derivatives of i_l, k_l for l = 1..lmax.

    Everything the Mie formulas and the scaled Riccati equations need is a
    ratio, so exponentials never appear explicitly.

    Attributes
    ----------
    log_i, log_k : ndarray
        natural logs of i_l(z) and k_l(z)
    dlog_i, dlog_k : ndarray
        i_l'/i_l and k_l'/k_l
    psi_i, chi_k : ndarray
        (1/z)(z i_l)'/i_l and (1/z)(z k_l)'/k_l
    """

    def __init__(self, lmax, z):
        mi, ei = bessel_i_array(lmax + 1, z)
        mk, ek = bessel_k_array(lmax, z)
        ell = np.arange(1, lmax + 1, dtype=float)
        self.lmax = lmax
        self.z = z
        self.ell = ell
        self.log_i = np.log(mi[1:lmax + 1]) + ei[1:lmax + 1]
        self.log_k = np.log(mk[1:]) + ek[1:]
        ri = mi[2:] / mi[1:-1] * np.exp(ei[2:] - ei[1:-1])
        rk = mk[:-1] / mk[1:] * np.exp(ek[:-1] - ek[1:])
        self.dlog_i = ri + ell / z
        self.dlog_k = -rk - (ell + 1) / z
        self.psi_i = ri + (ell + 1) / z
        self.chi_k = -rk - ell / z

    @property
    def sqrt_ik(self):
        """sqrt(i_l k_l); the exponentials cancel, leaving a power law in z."""
        return np.exp(0.5 * (self.log_i + self.log_k))


@dataclass(frozen=True)
class RadialModeMatrix:
    """3x2 radial matrix ``entries * exp(log_scale)``.

    Rows: coefficients of the (X, Z, radial) vector harmonics.
    Columns: (TE, TM).
    """

    entries: np.ndarray
    log_scale: float
    kind: str
    ell: int
    z: float

    @property
    def value(self):
        return self.entries * math.exp(self.log_scale)


def _radial(ell, z, kind):
    if int(ell) != ell or ell < 1:
        raise DomainError("radial mode matrices need ell >= 1 (no transverse l = 0 modes)")
    _check(ell, z)
    rd = RadialData(ell, z)
    sl = math.sqrt(ell * (ell + 1))
    out = np.zeros((3, 2))
    if kind == "regular":
        log_f = rd.log_i[-1]
        out[0, 0] = 1.0
        out[1, 1] = rd.psi_i[-1]
        out[2, 1] = sl / z
    else:
        log_f = rd.log_k[-1]
        out[0, 0] = -1.0
        out[1, 1] = rd.chi_k[-1]
        out[2, 1] = sl / z
    return RadialModeMatrix(out, float(log_f), kind, int(ell), float(z))


def radial_J(ell, z):
    """Regular radial mode matrix (phase-stripped)."""
    return _radial(ell, z, "regular")


def radial_H(ell, z):
    """Outgoing radial mode matrix (phase-stripped); the TE entry is -k_l."""
    return _radial(ell, z, "outgoing")


# --------------------------------------------------------------------------
# Real vector spherical harmonics

def real_ylm(ell, m, theta, phi):
    """Real orthonormal Y_lm and its (d/dtheta, d/dphi) derivatives.

    m > 0 are cosine-type, m < 0 sine-type harmonics, both carrying the
    usual sqrt(2).  Returns ``(y, dy_dtheta, dy_dphi)``.
    """
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    am = abs(m)
    y, grad = sph_harm_y(ell, am, theta, phi, diff_n=1)
    dth, dph = grad[..., 0], grad[..., 1]
    if m == 0:
        return y.real, dth.real, dph.real
    fac = math.sqrt(2.0) * (-1) ** am
    if m > 0:
        return fac * y.real, fac * dth.real, fac * dph.real
    return fac * y.imag, fac * dth.imag, fac * dph.imag


@dataclass(frozen=True)
class AngularBlock:
    """3x3 block: rows (r, theta, phi) components; columns (X, Z, radial)."""

    ell: int
    m: int
    theta: float
    phi: float
    entries: np.ndarray


def _vsh_columns(ell, m, theta, phi):
    # pole: use the limit from a tiny offset; quadrature nodes never sit there
    s = np.sin(theta)
    theta = np.where(s < 1e-12, np.where(theta < 1.0, 1e-12, math.pi - 1e-12), theta)
    s = np.sin(theta)
    y, dth, dph = real_ylm(ell, m, theta, phi)
    rl = 1.0 / math.sqrt(ell * (ell + 1))
    shape = np.shape(theta) + (3, 3)
    out = np.zeros(shape)
    out[..., 0, 2] = y
    out[..., 1, 0] = -dph / s * rl
    out[..., 1, 1] = dth * rl
    out[..., 2, 0] = dth * rl
    out[..., 2, 1] = dph / s * rl
    return out


def vsh(ell, m, theta, phi):
    """Real vector spherical harmonic block at one direction.

    Columns are X = r x Z, Z = r grad Y / sqrt(l(l+1)) and r_hat Y.
    """
    if int(ell) != ell or ell < 1:
        raise DomainError("vector harmonics need ell >= 1")
    if abs(m) > ell:
        raise DomainError(f"|m| = {abs(m)} exceeds ell = {ell}")
    ent = _vsh_columns(ell, m, np.asarray(theta, float), np.asarray(phi, float))
    return AngularBlock(int(ell), int(m), float(theta), float(phi), ent)


def vsh_table(basis: ModeBasis, theta, phi):
    """Harmonics of a whole basis at many nodes.

    Returns an array of shape (n_nodes, 3, 3 * basis.n_lm); the column index
    runs over (l, m, component) with the component (X, Z, radial) innermost.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    out = np.empty(theta.shape + (3, 3 * basis.n_lm))
    for j, (l, m) in enumerate(basis.lm):
        out[..., :, 3 * j:3 * j + 3] = _vsh_columns(int(l), int(m), theta, phi)
    return out


@dataclass(frozen=True)
class AngularRule:
    """Product rule: Gauss-Legendre in cos(theta) times uniform in phi."""

    n_theta: int
    n_phi: int
    theta: np.ndarray
    phi: np.ndarray
    weights: np.ndarray

    @property
    def size(self):
        return len(self.weights)

    def exact_for(self, lmax):
        return self.n_theta >= lmax + 1 and self.n_phi >= 2 * lmax + 1


def angular_rule(lmax, n_theta=None, n_phi=None):
    """Product rule exact for bilinear harmonic products up to ``lmax``.

    Defaults to ``lmax + 1`` Gauss-Legendre nodes and ``2 lmax + 1`` phi nodes.
    """
    n_theta = lmax + 1 if n_theta is None else int(n_theta)
    n_phi = 2 * lmax + 1 if n_phi is None else int(n_phi)
    x, w = np.polynomial.legendre.leggauss(n_theta)
    th = np.arccos(x)
    ph = 2 * math.pi * np.arange(n_phi) / n_phi
    TH, PH = np.meshgrid(th, ph, indexing="ij")
    W = np.outer(w, np.full(n_phi, 2 * math.pi / n_phi))
    return AngularRule(n_theta, n_phi, TH.ravel(), PH.ravel(), W.ravel())
