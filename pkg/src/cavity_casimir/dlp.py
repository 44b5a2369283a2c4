"""Planar Lifshitz pressure between two half-spaces, and the large-cavity limit.

The half-space formula is an independent oracle: Fresnel coefficients at
imaginary frequency and double-exponential (tanh-sinh) quadrature in both
the frequency and the normal wavenumber, a different discretisation family
from the Gauss-Legendre k rule of :mod:`tgtg`.

    P(d) = -(1 / 2 pi^2) int_0^inf dxi int_{sqrt(eps_M) xi}^inf dq q^2
           sum_p  r1p r2p e^{-2qd} / (1 - r1p r2p e^{-2qd})

Negative P is attractive.  Units as in :mod:`tgtg`.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import tanhsinh

from .geometry import BodySpec
from .materials import MaterialModel, eps_at, vacuum
from .tgtg import CavityConfig, QuadratureSettings, mean_pressure

_ZERO_XI = 1e-8  # in units of 1/d: stand-in for the xi -> 0 limit


def fresnel(xi, q, eps_body, eps_medium):
    """TE and TM reflection coefficients at imaginary frequency ``xi``.

    ``q`` is the normal wavenumber in the medium; signs are such that both
    coefficients share the sign of ``eps_body - eps_medium`` up to the TE
    convention ``r_TE = (q - q_b)/(q + q_b)``.
    """
    qb = np.sqrt(q * q + (eps_body - eps_medium) * xi * xi)
    r_te = (q - qb) / (q + qb)
    r_tm = (eps_body * q - eps_medium * qb) / (eps_body * q + eps_medium * qb)
    return r_te, r_tm


def _eps(model, xi):
    return eps_at(model, np.maximum(xi, 1e-300))


def _q_integrand(t, xi, d, mat1, mat2, medium):
    em = _eps(medium, xi)
    q = np.sqrt(em) * xi + t
    e = np.exp(-2 * q * d)
    with np.errstate(over="ignore", invalid="ignore"):
        r1 = fresnel(xi, q, _eps(mat1, xi), em)
        r2 = fresnel(xi, q, _eps(mat2, xi), em)
        out = 0.0
        for a, b in zip(r1, r2):
            x = a * b * e
            out = out + x / (1 - x)
        out = q * q * out
    # |r| <= 1, so the integrand is exactly negligible once e underflows
    return np.where(e > 0, out, 0.0)


def _q_integral(xi, d, mat1, mat2, medium, rtol):
    xi = np.asarray(xi, dtype=float)
    res = tanhsinh(lambda t, x: _q_integrand(t, x, d, mat1, mat2, medium), np.zeros_like(xi), np.inf,
                   args=(xi,), rtol=rtol, atol=1e-300)
    if not np.all(res.success):
        raise ArithmeticError("normal-wavenumber quadrature did not converge")
    return res.integral


def lifshitz_pressure(d, mat1: MaterialModel, mat2: MaterialModel, medium: MaterialModel = None,
                      temperature=0.0, rtol=1e-10):
    """Pressure between half-spaces ``mat1`` and ``mat2`` across a gap ``d`` of ``medium``.

    Parameters
    ----------
    d : float
        gap width
    temperature : float
        k_B T in inverse length units; the Matsubara sum uses a half-weighted
        zero mode evaluated at ``xi = 1e-8 / d``

    Returns
    -------
    float
        pressure (negative is attractive)
    """
    if not d > 0:
        raise ValueError("gap must be positive")
    medium = vacuum() if medium is None else medium
    pref = -1.0 / (2 * math.pi**2)
    if temperature == 0:
        res = tanhsinh(lambda xi: _q_integral(xi, d, mat1, mat2, medium, rtol), 0.0, np.inf,
                       rtol=rtol, atol=1e-300)
        if not res.success:
            raise ArithmeticError("frequency quadrature did not converge")
        return float(pref * res.integral)
    # k_B T sum' replaces (1/2pi) int dxi
    T = float(temperature)
    total = 0.5 * float(_q_integral(np.array([_ZERO_XI / d]), d, mat1, mat2, medium, rtol)[0])
    n = 1
    while True:
        xi = 2 * math.pi * T * np.arange(n, n + 64)
        block = float(np.sum(_q_integral(xi, d, mat1, mat2, medium, rtol)))
        total += block
        n += 64
        if abs(block) <= 1e-3 * rtol * abs(total) or total == 0:
            break
        if n > 200000:
            raise ArithmeticError("Matsubara sum did not converge")
    return float(pref * 2 * math.pi * T * total)


@dataclass
class PlanarRow:
    r0: float
    wall_pressure: float
    plane_pressure: float
    deviation: float


def planar_limit_study(d, radii, mat1: MaterialModel, mat2: MaterialModel, medium: MaterialModel = None,
                       temperature=0.0, quadrature: QuadratureSettings | None = None, lmax=None):
    """Wall pressure of concentric spheres with gap ``d`` against the planar oracle.

    The inner sphere has radius ``r0 - d`` and the wall is unbounded.

    Returns
    -------
    list of PlanarRow
        ``deviation = |p_wall / p_plane - 1|`` (0 when both vanish)
    """
    medium = vacuum() if medium is None else medium
    quadrature = QuadratureSettings() if quadrature is None else quadrature
    plane = lifshitz_pressure(d, mat1, mat2, medium, temperature)
    rows = []
    for r0 in radii:
        if not r0 > d:
            raise ValueError("every radius must exceed the gap")
        cfg = CavityConfig(BodySpec("inner", mat1, r0 - d),
                           BodySpec("outer", mat2, math.inf, cavity_radius=r0),
                           medium, temperature, lmax, quadrature)
        p = mean_pressure(cfg).value
        if plane == 0:
            dev = 0.0 if p == 0 else float("inf")
        else:
            dev = abs(p / plane - 1)
        rows.append(PlanarRow(float(r0), p, plane, dev))
    return rows
