r"""Closed-form amplitudes for spherically symmetric bodies at imaginary frequency.

Conventions follow the radial matrices of :mod:`specfun`.  With
``P = psi_i / i``, ``Q = chi_k / k`` (log-derivative-like ratios) every
amplitude is a ratio of admittances, obtained from continuity of the
tangential electric and magnetic fields:

* exterior, regular probe ``J + H t``:  ``t = (i/k) * that``
* interior, outgoing probe ``H + J t``: ``t = (k/i) * that``

where ``that`` is O(1).  The ``*_scaled`` functions return ``that`` together
with the natural log of the prefactor, which is what the rest of the solver
consumes; the plain functions multiply it out for one ``ell``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .specfun import RadialData


@dataclass(frozen=True)
class PolarizationPair:
    """TE and TM amplitudes of one multipole (scalars or arrays over l)."""

    te: float
    tm: float

    def __iter__(self):
        yield self.te
        yield self.tm


@dataclass(frozen=True)
class ScaledAmplitudes:
    """Amplitudes for l = 1..lmax as ``hat * exp(log_scale)``."""

    te: np.ndarray
    tm: np.ndarray
    log_scale: np.ndarray

    def pair(self, ell):
        s = math.exp(self.log_scale[ell - 1])
        return PolarizationPair(float(self.te[ell - 1] * s), float(self.tm[ell - 1] * s))


def _kappa(k, eps_medium):
    return k * math.sqrt(eps_medium)


def t_ext_scaled(lmax, k, R1, eps1, mu1, epsM):
    """Exterior amplitudes of a homogeneous sphere, l = 1..lmax."""
    kap = _kappa(k, epsM)
    x = kap * R1
    n = math.sqrt(eps1 * mu1 / epsM)
    out = RadialData(lmax, x)
    inn = RadialData(lmax, n * x)
    P, Q, sig = out.psi_i, out.chi_k, inn.psi_i
    nu = n / mu1
    te = (P - nu * sig) / (Q - nu * sig)
    rho = sig * mu1 / n
    tm = (P - rho) / (rho - Q)
    return ScaledAmplitudes(te, tm, out.log_i - out.log_k)


def t_int_cavity_scaled(lmax, k, r0, eps2, epsM):
    """Interior amplitudes of a spherical cavity in an unbounded wall."""
    kap = _kappa(k, epsM)
    x = kap * r0
    n = math.sqrt(eps2 / epsM)
    med = RadialData(lmax, x)
    wall = RadialData(lmax, n * x)
    P, Q, tau = med.psi_i, med.chi_k, wall.chi_k
    te = (n * tau - Q) / (n * tau - P)
    tm = (n * Q - tau) / (tau - n * P)
    return ScaledAmplitudes(te, tm, med.log_k - med.log_i)


class _Shell:
    """Bessel data at both faces of a shell r0 < r < R2 (wall index n)."""

    def __init__(self, lmax, k, r0, R2, eps2, epsM):
        kap = _kappa(k, epsM)
        self.n = n = math.sqrt(eps2 / epsM)
        self.m0 = RadialData(lmax, kap * r0)
        self.mR = RadialData(lmax, kap * R2)
        self.w0 = RadialData(lmax, n * kap * r0)
        self.wR = RadialData(lmax, n * kap * R2)
        # i2(r0) k2(R2) / (k2(r0) i2(R2)) ~ exp(-2 kappa_2 (R2 - r0))
        self.E = np.exp(self.w0.log_i + self.wR.log_k - self.w0.log_k - self.wR.log_i)

    def interior(self):
        n, m0, mR, w0, wR, E = self.n, self.m0, self.mR, self.w0, self.wR, self.E
        g_te = (n * wR.chi_k - mR.chi_k) / (n * wR.psi_i - mR.chi_k)
        G = g_te * E
        y = n * (w0.chi_k - G * w0.psi_i) / (1 - G)
        te = (m0.chi_k - y) / (m0.psi_i - y)
        g_tm = (wR.chi_k - n * mR.chi_k) / (n * mR.chi_k - wR.psi_i)
        G = g_tm * E
        y = n * (1 + G) / (w0.chi_k + G * w0.psi_i)
        tm = (y * m0.chi_k - 1) / (1 - y * m0.psi_i)
        return te, tm, (g_te, g_tm)


def t_int_shell_scaled(lmax, k, r0, R2, eps2, epsM):
    """Interior amplitudes of a finite spherical shell r0 < r < R2."""
    if R2 < r0:
        raise ValueError("shell needs R2 >= r0")
    sh = _Shell(lmax, k, r0, R2, eps2, epsM)
    te, tm, _ = sh.interior()
    return ScaledAmplitudes(te, tm, sh.m0.log_k - sh.m0.log_i)


def t_ei_shell(lmax, k, r0, R2, eps2, epsM):
    """Transmission amplitude, outgoing probe inside to outgoing wave outside.

    Returns ``(te, tm)`` arrays over l for the field ``H (1 + t)`` beyond R2.
    """
    sh = _Shell(lmax, k, r0, R2, eps2, epsM)
    te_i, tm_i, (g_te, g_tm) = sh.interior()
    m0, mR, w0, wR = sh.m0, sh.mR, sh.w0, sh.wR
    F = np.exp(m0.log_k + wR.log_k - mR.log_k - w0.log_k)
    G_te, G_tm = g_te * sh.E, g_tm * sh.E
    d_te = F * (1 - te_i) * (1 - g_te) / (1 - G_te)
    d_tm = F * (m0.chi_k + tm_i * m0.psi_i) * (wR.chi_k + g_tm * wR.psi_i) / (
        (w0.chi_k + G_tm * w0.psi_i) * mR.chi_k)
    return d_te - 1, d_tm - 1


def t_ie_shell(lmax, k, r0, R2, eps2, epsM):
    """Transmission amplitude, regular probe outside to regular wave inside.

    Returns ``(te, tm)`` arrays over l for the field ``J (1 + t)`` inside r0.
    """
    sh = _Shell(lmax, k, r0, R2, eps2, epsM)
    n, m0, mR, w0, wR, E = sh.n, sh.m0, sh.mR, sh.w0, sh.wR, sh.E
    G = np.exp(mR.log_i + w0.log_i - wR.log_i - m0.log_i)
    W = mR.psi_i - mR.chi_k
    d_te = (m0.psi_i - n * w0.psi_i) / (m0.psi_i - n * w0.chi_k)
    te = G * (1 - d_te) * W / (n * (wR.psi_i - d_te * E * wR.chi_k) - mR.chi_k * (1 - d_te * E))
    d_tm = (w0.psi_i - n * m0.psi_i) / (n * m0.psi_i - w0.chi_k)
    tm = G * W * (w0.psi_i + d_tm * w0.chi_k) / (
        (wR.psi_i + d_tm * E * wR.chi_k - n * mR.chi_k * (1 + d_tm * E)) * m0.psi_i)
    return te - 1, tm - 1


def t_ext_sphere(ell, k, R1, eps1, mu1, epsM):
    """Exterior amplitude of a homogeneous (magneto)dielectric sphere.

    Parameters
    ----------
    ell : int
        multipole order >= 1
    k : float
        imaginary frequency
    R1 : float
        sphere radius
    eps1, mu1, epsM : float
        sphere permittivity and permeability, medium permittivity at ``k``

    Returns
    -------
    PolarizationPair
    """
    if ell < 1 or R1 <= 0:
        raise ValueError("need ell >= 1 and R1 > 0")
    return t_ext_scaled(ell, k, R1, eps1, mu1, epsM).pair(ell)


def t_int_cavity(ell, k, r0, eps2, epsM):
    """Interior amplitude of a spherical cavity of radius r0 in a wall eps2."""
    if ell < 1 or r0 <= 0:
        raise ValueError("need ell >= 1 and r0 > 0")
    return t_int_cavity_scaled(ell, k, r0, eps2, epsM).pair(ell)


def t_int_shell(ell, k, r0, R2, eps2, epsM):
    """Interior amplitude of a finite shell; R2 -> inf recovers the cavity."""
    if ell < 1 or not r0 <= R2:
        raise ValueError("need ell >= 1 and r0 <= R2")
    return t_int_shell_scaled(ell, k, r0, R2, eps2, epsM).pair(ell)


def static_tm_ext(ell, eps1, epsM):
    """Quasi-static limit of the scaled exterior TM amplitude."""
    return (ell + 1) * (eps1 - epsM) / (ell * eps1 + (ell + 1) * epsM)


def static_tm_int(ell, eps2, epsM):
    """Quasi-static limit of the scaled interior TM amplitude."""
    return ell * (eps2 - epsM) / (ell * epsM + (ell + 1) * eps2)
