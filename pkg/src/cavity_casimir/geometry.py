"""Star-shaped bodies and the angular coupling matrix U(r).

A body occupies, along each direction, either ``0 <= r <= R(Omega)`` (inner
role) or ``r0 <= r <= R(Omega)`` (outer role, a wall whose cavity face is the
sphere ``r = r0``).  ``R`` is a base radius plus a real spherical-harmonic
series.

U(r) lives on the (l, m, component) space with the components (X, Z, radial)
innermost:

    U(r) = r^2 V  int_occupied dOmega  Y^T D Y,    D = diag(1, 1, eps_M/eps)

in component order (X, Z, radial).  Only the radial component of the field is
rescaled by D, so the integral splits into a tangential and a radial angular
matrix, ``U = r^2 V (A_tan + (eps_M/eps) A_rad)``.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev as C
from numpy.polynomial import legendre as L
from scipy.optimize import minimize

from .basis import COMP_R, ModeBasis
from .materials import MaterialModel, eps_at, potential_strength
from .specfun import AngularRule, angular_rule, real_ylm, vsh_table


class QuadratureOrderError(ValueError):
    """Angular rule too coarse for the requested basis."""


@dataclass(frozen=True)
class BodySpec:
    """Star-shaped homogeneous body.

    Parameters
    ----------
    role : {'inner', 'outer'}
    material : MaterialModel
    radius : float
        base radius of the boundary ``R(Omega)``; ``inf`` for an unbounded
        spherical wall
    coefficients : dict
        ``{(l, m): c}`` added to the base radius as ``c * Y_lm(Omega)``
    cavity_radius : float or None
        spherical cavity radius ``r0`` (outer role only)
    """

    role: str
    material: MaterialModel
    radius: float
    coefficients: dict = field(default_factory=dict)
    cavity_radius: float | None = None

    def __post_init__(self):
        if self.role not in ("inner", "outer"):
            raise ValueError(f"role must be 'inner' or 'outer', got {self.role!r}")
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        if self.role == "outer":
            if self.cavity_radius is None or not self.cavity_radius > 0:
                raise ValueError("an outer body needs a positive cavity radius r0")
        elif self.cavity_radius is not None:
            raise ValueError("cavity radius applies to the outer role only")
        if math.isinf(self.radius) and self.coefficients:
            raise ValueError("an unbounded wall must be spherical")
        for (l, m) in self.coefficients:
            if l < 0 or abs(m) > l:
                raise ValueError(f"invalid harmonic index {(l, m)}")
        lo, hi = self.extent()
        if not lo > 0:
            raise ValueError("boundary radius must stay positive")
        if self.role == "outer" and not lo > self.cavity_radius:
            raise ValueError("outer boundary must lie strictly outside r0")

    # -- shape ------------------------------------------------------------
    @property
    def is_spherical(self):
        return not any(c != 0 for c in self.coefficients.values())

    @property
    def is_axisymmetric(self):
        return all(m == 0 or c == 0 for (l, m), c in self.coefficients.items())

    def boundary(self, theta, phi):
        theta = np.asarray(theta, dtype=float)
        out = np.full(np.broadcast(theta, np.asarray(phi)).shape, float(self.radius))
        for (l, m), c in self.coefficients.items():
            if c:
                out = out + c * real_ylm(l, m, theta, phi)[0]
        return out

    def legendre_series(self):
        """Coefficients of R as a Legendre series in cos(theta) (axisymmetric only)."""
        if not self.is_axisymmetric:
            raise ValueError("body is not axisymmetric")
        lmax = max([l for (l, _) in self.coefficients] + [0])
        c = np.zeros(lmax + 1)
        c[0] = self.radius
        for (l, m), v in self.coefficients.items():
            c[l] += v * math.sqrt((2 * l + 1) / (4 * math.pi))
        return c

    def extent(self):
        """(min, max) of R(Omega)."""
        if self.is_spherical:
            return float(self.radius), float(self.radius)
        if self.is_axisymmetric:
            c = self.legendre_series()
            xs = np.concatenate([[-1.0, 1.0], _real_roots(L.legder(c))])
            vals = L.legval(xs, c)
            return float(vals.min()), float(vals.max())
        rule = angular_rule(0, 120, 240)
        vals = self.boundary(rule.theta, rule.phi)
        lo, hi = float(vals.min()), float(vals.max())
        for sgn, idx in ((1.0, np.argmin(vals)), (-1.0, np.argmax(vals))):
            res = minimize(lambda p: sgn * float(self.boundary(p[0], p[1])),
                           [rule.theta[idx], rule.phi[idx]], method="Nelder-Mead",
                           options={"xatol": 1e-12, "fatol": 1e-14})
            if sgn > 0:
                lo = min(lo, float(res.fun))
            else:
                hi = max(hi, -float(res.fun))
        return lo, hi

    def support(self):
        """Radial interval where U can be non-zero."""
        lo, hi = self.extent()
        if self.role == "inner":
            return 0.0, hi
        return float(self.cavity_radius), hi

    def with_cavity_radius(self, r0):
        return BodySpec(self.role, self.material, self.radius, dict(self.coefficients), r0)

    def scaled(self, factor):
        """Same shape with every length multiplied by ``factor``."""
        coeffs = {k: v * factor for k, v in self.coefficients.items()}
        r0 = None if self.cavity_radius is None else self.cavity_radius * factor
        return BodySpec(self.role, self.material, self.radius * factor, coeffs, r0)


def _real_roots(c, lo=-1.0, hi=1.0):
    if len(c) < 2 or not np.any(c[1:]):
        return np.empty(0)
    r = L.legroots(c)
    r = r[np.abs(np.imag(r)) < 1e-9].real if np.iscomplexobj(r) else r
    return np.sort(r[(r > lo) & (r < hi)])


def occupancy(body: BodySpec, r, rule: AngularRule | None = None):
    """0/1 indicator of the body at radius r on the nodes of an angular rule."""
    rule = angular_rule(8) if rule is None else rule
    R = body.boundary(rule.theta, rule.phi)
    inside = r <= R
    if body.role == "outer":
        inside &= r >= body.cavity_radius
    return inside.astype(int)


@dataclass(frozen=True)
class CouplingMatrix:
    r: float
    entries: np.ndarray
    basis: ModeBasis


class AngularCoupling:
    """Angular matrices ``(A_tan, A_rad)`` of a body as functions of radius.

    Three strategies, picked by ``rule``:

    ``'sphere'``   spherical body, closed form from orthonormality
    ``'resolved'`` axisymmetric body; the phi-integrated kernel is an exact
                   polynomial in cos(theta), so the occupied theta intervals
                   are integrated exactly
    ``'nodes'``    any body; pointwise node classification on a product rule,
                   piecewise constant in r
    """

    def __init__(self, body: BodySpec, basis: ModeBasis, rule="auto", angular: AngularRule | None = None):
        self.body = body
        self.basis = basis
        if rule == "auto":
            rule = "sphere" if body.is_spherical else ("resolved" if body.is_axisymmetric else "nodes")
        if rule == "resolved" and not body.is_axisymmetric:
            raise ValueError("the resolved rule needs an axisymmetric body")
        if rule == "sphere" and not body.is_spherical:
            raise ValueError("the sphere rule needs a spherical body")
        self.rule = rule
        self.lo, self.hi = body.support()
        n = 3 * basis.n_lm
        comp = np.tile([0, 1, 2], basis.n_lm)
        self._rad_diag = (comp == COMP_R).astype(float)
        if rule == "sphere":
            self._full = (np.diag(1.0 - self._rad_diag), np.diag(self._rad_diag))
        elif rule == "resolved":
            self._build_polynomial(n)
        else:
            if angular is None:
                angular = angular_rule(basis.lmax, 2 * (basis.lmax + 1), 2 * (2 * basis.lmax + 1))
            if not angular.exact_for(basis.lmax):
                raise QuadratureOrderError(
                    f"angular rule ({angular.n_theta}, {angular.n_phi}) too coarse for lmax={basis.lmax}")
            self._build_nodes(angular)

    # -- construction -----------------------------------------------------
    def _kernel_at(self, x, n_phi):
        theta = np.arccos(x)
        phi = 2 * math.pi * np.arange(n_phi) / n_phi
        TH, PH = np.meshgrid(theta, phi, indexing="ij")
        Y = vsh_table(self.basis, TH.ravel(), PH.ravel()).reshape(len(x), n_phi, 3, -1)
        w = 2 * math.pi / n_phi
        # rows of Y are (r, theta, phi) field components
        rad = w * np.einsum("xpi,xpj->xij", Y[:, :, 0, :], Y[:, :, 0, :])
        tan = w * np.einsum("xpai,xpaj->xij", Y[:, :, 1:, :], Y[:, :, 1:, :])
        return tan, rad

    def _build_polynomial(self, n):
        deg = 2 * self.basis.lmax + 4
        x = np.cos(math.pi * (np.arange(deg + 1) + 0.5) / (deg + 1))
        tan, rad = self._kernel_at(x, 2 * self.basis.lmax + 3)
        flat = np.concatenate([tan.reshape(len(x), -1), rad.reshape(len(x), -1)], axis=1)
        # keep only entries that are not identically zero (m-block structure)
        self._nz = np.flatnonzero(np.abs(flat).max(axis=0) > 1e-14)
        coef = C.chebint(C.chebfit(x, flat[:, self._nz], deg))
        self._cheb = np.ascontiguousarray(coef)
        self._n_cheb = coef.shape[0]
        self._shape = (n, n)
        self._leg = self.body.legendre_series()

    def _cheb_vec(self, x):
        T = np.empty(self._n_cheb)
        T[0] = 1.0
        if self._n_cheb > 1:
            T[1] = x
        for j in range(2, self._n_cheb):
            T[j] = 2 * x * T[j - 1] - T[j - 2]
        return T

    def _build_nodes(self, angular):
        Y = vsh_table(self.basis, angular.theta, angular.phi)
        R = self.body.boundary(angular.theta, angular.phi)
        order = np.argsort(R)[::-1]  # descending: nodes stay occupied up to their R
        w = angular.weights[order]
        Yo = Y[order]
        rad = np.einsum("n,ni,nj->nij", w, Yo[:, 0, :], Yo[:, 0, :])
        tan = np.einsum("n,nai,naj->nij", w, Yo[:, 1:, :], Yo[:, 1:, :])
        zero = np.zeros((1,) + rad.shape[1:])
        self._cum_rad = np.concatenate([zero, np.cumsum(rad, axis=0)])
        self._cum_tan = np.concatenate([zero, np.cumsum(tan, axis=0)])
        self._node_R_desc = R[order]

    # -- evaluation -------------------------------------------------------
    def occupied_intervals(self, r):
        """Occupied cos(theta) intervals at radius r (resolved rule)."""
        c = self._leg.copy()
        c[0] -= r
        cuts = np.concatenate([[-1.0], _real_roots(c), [1.0]])
        mids = 0.5 * (cuts[:-1] + cuts[1:])
        occ = L.legval(mids, c) >= 0
        return [(a, b) for a, b, o in zip(cuts[:-1], cuts[1:], occ) if o]

    def angular(self, r):
        """(A_tan, A_rad) at radius r; zeros outside the support."""
        if r < self.lo or r > self.hi or (self.body.role == "inner" and r <= 0):
            n = 3 * self.basis.n_lm
            return np.zeros((n, n)), np.zeros((n, n))
        if self.rule == "sphere":
            return self._full
        if self.rule == "resolved":
            w = np.zeros(self._n_cheb)
            for a, b in self.occupied_intervals(r):
                w += self._cheb_vec(b) - self._cheb_vec(a)
            flat = np.zeros(2 * self._shape[0] * self._shape[1])
            flat[self._nz] = w @ self._cheb
            tan, rad = flat.reshape(2, *self._shape)
            return tan, rad
        count = int(np.count_nonzero(self._node_R_desc >= r))
        return self._cum_tan[count], self._cum_rad[count]

    def breakpoints(self):
        """Radii where U(r) is not smooth, inside the support, ascending."""
        pts = {self.lo, self.hi}
        if self.rule == "resolved":
            c = self._leg
            xs = np.concatenate([[-1.0, 1.0], _real_roots(L.legder(c))])
            pts.update(float(v) for v in L.legval(xs, c))
        elif self.rule == "nodes":
            pts.update(float(v) for v in self._node_R_desc)
        pts = sorted(p for p in pts if self.lo <= p <= self.hi and math.isfinite(p))
        return np.array(pts)

    def matrix(self, r, k, medium: MaterialModel, occupancy_radius=None):
        """U(r) at imaginary frequency k.

        ``occupancy_radius`` freezes the angular part (useful inside one
        piece of the node rule, where it is constant anyway).
        """
        eb = eps_at(self.body.material, k)
        em = eps_at(medium, k)
        V = potential_strength(k, eb, em)
        tan, rad = self.angular(r if occupancy_radius is None else occupancy_radius)
        return r * r * V * (tan + (em / eb) * rad)


def assemble_U(body: BodySpec, medium: MaterialModel, k, r, basis: ModeBasis, rule="auto",
               angular: AngularRule | None = None) -> CouplingMatrix:
    """Coupling matrix of ``body`` at radius ``r`` and imaginary frequency ``k``.

    Raises
    ------
    QuadratureOrderError
        if an explicit node rule is below the exactness bound for ``basis``
    """
    if basis.lmax < 1:
        raise ValueError("basis needs lmax >= 1")
    ac = AngularCoupling(body, basis, rule, angular)
    return CouplingMatrix(float(r), ac.matrix(r, k, medium), basis)
