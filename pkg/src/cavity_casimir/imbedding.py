r"""Invariant-imbedding Riccati equations for the four scattering setups.

Physical T-matrices span many orders of magnitude (``t_ext ~ i_l/k_l``), so
the ODEs are written for scaled matrices.  With ``a_l = sqrt(i_l/k_l)`` at
the current radius, ``g_l = sqrt(i_l k_l)`` and ``D = (kappa/2) diag(i'/i - k'/k)``:

==========  =========================  ===============================================
kind        physical                   scaled equation (``' = d/dr``)
==========  =========================  ===============================================
ext         ``A T A``                  ``T' =  kappa W^T U W - D T - T D``, ``W = J + H T``
int         ``A^-1 T A^-1``            ``T' = -kappa W^T U W + D T + T D``, ``W = H + J T``
ei          ``A S A^-1``               ``S' = -kappa (I + S) J^T U W_int - D S + S D``
ie          ``A^-1 R A``               ``R' =  kappa (I + R) H^T U W_ext + D R - R D``
==========  =========================  ===============================================

Here ``J``, ``H`` are the radial matrices divided by ``i_l``, ``k_l`` and ``U`` is
the coupling matrix conjugated by ``g``.  ``ei`` is co-integrated inward with
``int``; ``ie`` is co-integrated outward with the exterior amplitude of the
growing shell ``[r0, r_n]``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .basis import ModeBasis
from .geometry import AngularCoupling, BodySpec
from .materials import MaterialModel, SignClass, eps_at, sign_class
from .mie import static_tm_ext
from .specfun import RadialData


class IntegrationError(RuntimeError):
    """Step-size underflow or a non-finite right-hand side."""

    def __init__(self, message, r):
        super().__init__(f"{message} at r_n = {r:.17g}")
        self.r = r


class SignClassError(ValueError):
    """A sign-definite statement was requested for an indefinite body."""


# --------------------------------------------------------------------------
# Dormand-Prince 5(4)

_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


@dataclass
class StepStats:
    accepted: int = 0
    rejected: int = 0
    max_drift: float = 0.0


def _initial_step(fun, t, y, f, sgn, rtol, atol):
    scale = atol + rtol * np.abs(y)
    d0 = np.sqrt(np.mean((y / scale) ** 2))
    d1 = np.sqrt(np.mean((f / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = max(h0, 1e-12 * max(abs(t), 1e-300))
    with np.errstate(over="ignore", invalid="ignore"):
        f1 = fun(t + sgn * h0, y + sgn * h0 * f)
    if not np.all(np.isfinite(f1)):
        return h0
    d2 = np.sqrt(np.mean(((f1 - f) / scale) ** 2)) / h0
    dm = max(d1, d2)
    h1 = max(1e-6, h0 * 1e-3) if dm <= 1e-15 else (0.01 / dm) ** 0.2
    return min(100 * h0, h1)


def rk45(fun, t0, y0, t1, rtol, atol, h0=None, post=None, stats=None):
    """Adaptive Dormand-Prince integration from t0 to t1 (either direction).

    Parameters
    ----------
    fun : callable(t, y) -> ndarray
    post : callable(y) -> (y, drift), optional
        applied after every accepted step (used for symmetrisation)

    Returns
    -------
    ndarray
        the state at ``t1``
    """
    stats = StepStats() if stats is None else stats
    y = np.array(y0, dtype=float)
    t = float(t0)
    span = float(t1) - t
    if span == 0:
        return y
    sgn = 1.0 if span > 0 else -1.0
    f = fun(t, y)
    if not np.all(np.isfinite(f)):
        raise IntegrationError("non-finite right-hand side", t)
    h = _initial_step(fun, t, y, f, sgn, rtol, atol) if h0 is None else abs(h0)
    h = min(h, abs(span))
    K = [None] * 7
    while sgn * (t1 - t) > 0:
        hmin = 16 * np.spacing(max(abs(t), abs(t1)))
        if h < hmin:
            raise IntegrationError("step size underflow", t)
        if h > sgn * (t1 - t):
            h = sgn * (t1 - t)
        hs = sgn * h
        K[0] = f
        finite = True
        for s in range(1, 7):
            dy = sum(a * K[j] for j, a in enumerate(_A[s]) if a != 0.0)
            with np.errstate(over="ignore", invalid="ignore"):
                K[s] = fun(t + _C[s] * hs, y + hs * dy)
            if not np.all(np.isfinite(K[s])):
                finite = False
                break
        if not finite:
            # a trial stage left the basin; retry with a smaller step
            stats.rejected += 1
            h *= 0.2
            continue
        y_new = y + hs * sum(b * K[j] for j, b in enumerate(_B5) if b != 0.0)
        err_vec = hs * sum(e * K[j] for j, e in enumerate(_E) if e != 0.0)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = float(np.max(np.abs(err_vec) / scale))
        if err <= 1.0:
            t = t + hs if sgn * (t1 - (t + hs)) > 1e-15 * abs(t1) else float(t1)
            if post is not None:
                y_new, drift = post(y_new)
                stats.max_drift = max(stats.max_drift, drift)
                f = fun(t, y_new)
            else:
                f = K[6]
            y = y_new
            stats.accepted += 1
            fac = 5.0 if err == 0 else min(5.0, 0.9 * err ** -0.2)
        else:
            stats.rejected += 1
            fac = max(0.2, 0.9 * err ** -0.2)
        h *= fac
    return y


# --------------------------------------------------------------------------
# scaled wave matrices


class _Waves:
    """Scaled regular/outgoing matrices and scale factors at kappa * r."""

    def __init__(self, basis: ModeBasis, kappa, r):
        z = kappa * r
        rd = RadialData(basis.lmax, z)
        l = basis.lm[:, 0]
        li = l - 1
        n_lm = basis.n_lm
        j = np.arange(n_lm)
        sl = np.sqrt(l * (l + 1.0)) / z
        J = np.zeros((3 * n_lm, 2 * n_lm))
        H = np.zeros((3 * n_lm, 2 * n_lm))
        J[3 * j, 2 * j] = 1.0
        J[3 * j + 1, 2 * j + 1] = rd.psi_i[li]
        J[3 * j + 2, 2 * j + 1] = sl
        H[3 * j, 2 * j] = -1.0
        H[3 * j + 1, 2 * j + 1] = rd.chi_k[li]
        H[3 * j + 2, 2 * j + 1] = sl
        self.J, self.H = J, H
        self.g3 = np.repeat(rd.sqrt_ik[li], 3)
        self.D = np.repeat(0.5 * kappa * (rd.dlog_i - rd.dlog_k)[li], 2)
        # log a_l per T index
        self.log_a = np.repeat(0.5 * (rd.log_i - rd.log_k)[li], 2)


class _ModeWaves:
    """Per-(l) scalar version of the scaled waves for the diagonal fast path."""

    def __init__(self, ells, kappa, r):
        z = kappa * r
        rd = RadialData(int(ells.max()), z)
        li = ells - 1
        self.P = rd.psi_i[li]
        self.Q = rd.chi_k[li]
        self.L_z2 = ells * (ells + 1.0) / (z * z)
        self.g2 = np.exp(rd.log_i + rd.log_k)[li]
        self.D = 0.5 * kappa * (rd.dlog_i - rd.dlog_k)[li]
        self.log_a = 0.5 * (rd.log_i - rd.log_k)[li]


# --------------------------------------------------------------------------
# results


@dataclass
class TMatrix:
    """Dense T-matrix over a mode basis, stored as ``exp(row) * S * exp(col)``.

    Parameters
    ----------
    kind : {'ext', 'int', 'ei', 'ie'}
    k : float
    basis : ModeBasis
    scaled : ndarray
    row_log, col_log : ndarray
    """

    kind: str
    k: float
    basis: ModeBasis
    scaled: np.ndarray
    row_log: np.ndarray
    col_log: np.ndarray
    derivative: np.ndarray | None = None
    stats: StepStats | None = None

    @property
    def entries(self):
        return np.exp(self.row_log)[:, None] * self.scaled * np.exp(self.col_log)[None, :]

    @property
    def symmetric_kind(self):
        return self.kind in ("ext", "int")


@dataclass
class ImbeddingState:
    """Snapshot of co-integrated amplitudes at the imbedding radius r_n."""

    r_n: float
    t_int: TMatrix | None = None
    t_ext: TMatrix | None = None
    t_ei: TMatrix | None = None
    t_ie: TMatrix | None = None
    stats: StepStats = field(default_factory=StepStats)


def _full_from_modes(basis, te, tm):
    """Expand per-l amplitudes (arrays indexed by l - lmin) to the (l,m,P) diagonal."""
    li = basis.ell - basis.lmin
    vals = np.where(basis.pol == 0, te[li], tm[li])
    return np.diag(vals)


def _symmetrize(y):
    n = int(round(math.sqrt(y.size)))
    T = y.reshape(n, n)
    drift = float(np.max(np.abs(T - T.T))) if n else 0.0
    return (0.5 * (T + T.T)).ravel(), drift


def _medium_kappa(k, medium):
    return k * math.sqrt(eps_at(medium, k))


def _check_nonmagnetic(body):
    if body.material.is_magnetic:
        raise ValueError("magnetic bodies are handled by the Mie path only")


def _default_rmax(body: BodySpec, k):
    lo, hi = body.extent()
    if math.isfinite(hi):
        return hi
    kap2 = k * math.sqrt(eps_at(body.material, k))
    return body.cavity_radius + 20.0 / kap2


class _Piecewise:
    """Coupling whose node-rule occupancy is pinned to the current piece.

    The node rule's angular matrices jump at breakpoints; evaluating them at
    the piece midpoint keeps stages that land exactly on a breakpoint on the
    correct side.
    """

    def __init__(self, ac: AngularCoupling):
        self.ac = ac
        self.mid = None

    def matrix(self, r, k, medium):
        at = self.mid if self.ac.rule == "nodes" else None
        return self.ac.matrix(r, k, medium, occupancy_radius=at)

    def pieces(self, start, stop):
        for a, b in _pieces(self.ac.breakpoints(), start, stop):
            self.mid = 0.5 * (a + b)
            yield a, b
        self.mid = None


def _pieces(points, start, stop):
    """Sub-intervals from start to stop split at the given points."""
    lo, hi = min(start, stop), max(start, stop)
    eps = 1e-12 * hi
    inner = []
    for p in sorted(points):
        # symmetric nodes give radii equal up to rounding; merge them
        if lo + eps < p < hi - eps and (not inner or p - inner[-1] > eps):
            inner.append(p)
    seq = [start] + (sorted(inner) if stop > start else sorted(inner, reverse=True)) + [stop]
    return list(zip(seq[:-1], seq[1:]))


# --------------------------------------------------------------------------
# spherical fast path (diagonal in l, P; m-degenerate)


def _sphere_factors(body, medium, k):
    eb = eps_at(body.material, k)
    em = eps_at(medium, k)
    return k * k * (eb - em), em / eb


def _diag_int_rhs(ells, kap, V, e, lo, hi):
    n = len(ells)

    def rhs(r, y):
        w = _ModeWaves(ells, kap, r)
        te, tm = y[:n], y[n:]
        inside = lo <= r <= hi
        c = kap * w.g2 * r * r * V if inside else 0.0
        dte = -c * (te - 1.0) ** 2 + 2 * w.D * te
        dtm = -c * ((w.Q + w.P * tm) ** 2 + e * w.L_z2 * (1 + tm) ** 2) + 2 * w.D * tm
        return np.concatenate([dte, dtm])

    return rhs


def _diag_ext_rhs(ells, kap, V, e, lo, hi):
    n = len(ells)

    def rhs(r, y):
        w = _ModeWaves(ells, kap, r)
        te, tm = y[:n], y[n:]
        inside = lo <= r <= hi
        c = kap * w.g2 * r * r * V if inside else 0.0
        dte = c * (1.0 - te) ** 2 - 2 * w.D * te
        dtm = c * ((w.P + w.Q * tm) ** 2 + e * w.L_z2 * (1 + tm) ** 2) - 2 * w.D * tm
        return np.concatenate([dte, dtm])

    return rhs


def _quasi_static_start(ells, k, kap, body, medium):
    """Start radius and small-sphere amplitudes for a body containing the origin."""
    eb = eps_at(body.material, k)
    em = eps_at(medium, k)
    lo, _ = body.extent()
    n_max = math.sqrt(max(eb, em) / em)
    r_s = min(1e-3 * lo, 1e-4 / (kap * n_max))
    V = k * k * (eb - em)
    te = V * r_s**2 / ((2 * ells + 1) * (2 * ells + 3))
    tm = static_tm_ext(ells, eb, em) * np.ones(len(ells))
    return r_s, te, tm


# --------------------------------------------------------------------------
# public integrators


def _tol_pair(tol):
    return tol, tol * 1e-4


def integrate_t_int(outer: BodySpec, medium: MaterialModel, k, basis: ModeBasis, tol=1e-9,
                    r_max=None, rule="auto") -> TMatrix:
    """Interior T-matrix of a wall, integrated inward from its outer radius to r0.

    The attached ``derivative`` is the scaled d T / d r0 at the cavity face.
    """
    if outer.role != "outer":
        raise ValueError("integrate_t_int needs an outer body")
    _check_nonmagnetic(outer)
    kap = _medium_kappa(k, medium)
    r0 = outer.cavity_radius
    r_top = _default_rmax(outer, k) if r_max is None else float(r_max)
    rtol, atol = _tol_pair(tol)
    stats = StepStats()
    if outer.is_spherical:
        ells = np.arange(basis.lmin, basis.lmax + 1)
        V, e = _sphere_factors(outer, medium, k)
        rhs = _diag_int_rhs(ells, kap, V, e, r0, min(r_top, outer.extent()[1]))
        y = np.zeros(2 * len(ells))
        y = rk45(rhs, r_top, y, r0, rtol, atol, stats=stats)
        n = len(ells)
        w = _ModeWaves(ells, kap, r0)
        c = kap * w.g2 * r0 * r0 * V
        te, tm = y[:n], y[n:]
        dte = -c * (te - 1.0) ** 2
        dtm = -c * ((w.Q + w.P * tm) ** 2 + e * w.L_z2 * (1 + tm) ** 2)
        S = _full_from_modes(basis, te, tm)
        dS = _full_from_modes(basis, dte, dtm)
    else:
        ac = _Piecewise(AngularCoupling(outer, basis, rule))
        rhs = _int_rhs(basis, kap, ac, k, medium)
        y = np.zeros(basis.size**2)
        for a, b in ac.pieces(r_top, r0):
            y = rk45(rhs, a, y, b, rtol, atol, post=_symmetrize, stats=stats)
        S = y.reshape(basis.size, basis.size)
        dS = _int_core(basis, kap, ac, k, medium, r0, S)[0]
    _check_drift(stats, tol)
    w = _Waves(basis, kap, r0)
    return TMatrix("int", k, basis, S, -w.log_a, -w.log_a, derivative=dS, stats=stats)


def _int_core(basis, kap, ac, k, medium, r, T):
    w = _Waves(basis, kap, r)
    U = ac.matrix(r, k, medium) * np.outer(w.g3, w.g3)
    W = w.H + w.J @ T
    return -kap * (W.T @ U @ W), w, U, W


def _int_rhs(basis, kap, ac, k, medium):
    n = basis.size

    def rhs(r, y):
        T = y.reshape(n, n)
        q, w, _, _ = _int_core(basis, kap, ac, k, medium, r, T)
        return (q + w.D[:, None] * T + T * w.D[None, :]).ravel()

    return rhs


def _ext_core(basis, kap, U_raw, r, T):
    w = _Waves(basis, kap, r)
    U = U_raw * np.outer(w.g3, w.g3)
    W = w.J + w.H @ T
    return kap * (W.T @ U @ W), w, U, W


def _check_drift(stats, tol):
    if stats.max_drift > 10 * tol:
        raise IntegrationError(f"symmetry drift {stats.max_drift:.3g} exceeds 10x tolerance", float("nan"))


def integrate_t_ext(inner: BodySpec, medium: MaterialModel, k, basis: ModeBasis, tol=1e-9,
                    rule="auto") -> TMatrix:
    """Exterior T-matrix of a body containing the origin, integrated outward.

    The homogeneous core ``r < min R`` is entered from a tiny radius where the
    quasi-static amplitudes are exact to O((n kappa r)^2); the attached
    ``derivative`` is the scaled d T / d R for one more spherical layer of
    body material at the circumscribing radius.
    """
    if inner.role != "inner":
        raise ValueError("integrate_t_ext needs an inner body")
    _check_nonmagnetic(inner)
    kap = _medium_kappa(k, medium)
    rtol, atol = _tol_pair(tol)
    stats = StepStats()
    lo, hi = inner.extent()
    ells = np.arange(basis.lmin, basis.lmax + 1)
    V, e = _sphere_factors(inner, medium, k)
    n = len(ells)
    r_s, te0, tm0 = _quasi_static_start(ells, k, kap, inner, medium)
    rhs = _diag_ext_rhs(ells, kap, V, e, 0.0, lo)
    y = rk45(rhs, r_s, np.concatenate([te0, tm0]), lo, rtol, atol, h0=0.1 * r_s, stats=stats)
    if inner.is_spherical:
        S = _full_from_modes(basis, y[:n], y[n:])
    else:
        ac = _Piecewise(AngularCoupling(inner, basis, rule))
        S = _full_from_modes(basis, y[:n], y[n:])

        def rhs_full(r, yy):
            T = yy.reshape(basis.size, basis.size)
            q, w, _, _ = _ext_core(basis, kap, ac.matrix(r, k, medium), r, T)
            return (q - w.D[:, None] * T - T * w.D[None, :]).ravel()

        yy = S.ravel()
        for a, b in ac.pieces(lo, hi):
            yy = rk45(rhs_full, a, yy, b, rtol, atol, post=_symmetrize, stats=stats)
        S = yy.reshape(basis.size, basis.size)
    _check_drift(stats, tol)
    shell = AngularCoupling(BodySpec("inner", inner.material, hi), basis, "sphere")
    dS = _ext_core(basis, kap, shell.matrix(hi, k, medium), hi, S)[0]
    w = _Waves(basis, kap, hi)
    return TMatrix("ext", k, basis, S, w.log_a, w.log_a, derivative=dS, stats=stats)


def integrate_mixed(outer: BodySpec, medium: MaterialModel, k, basis: ModeBasis, tol=1e-9,
                    r_max=None, rule="auto"):
    """Mixed amplitudes of a wall.

    ``ei`` (outgoing source inside, detector outside) is co-integrated inward
    with ``int``; ``ie`` (regular source outside, detector inside) is
    co-integrated outward with the exterior amplitude of the growing shell.

    Returns
    -------
    (TMatrix, TMatrix, TMatrix)
        ``(t_ei, t_ie, t_int)`` at the final radii
    """
    if outer.role != "outer":
        raise ValueError("integrate_mixed needs an outer body")
    _check_nonmagnetic(outer)
    kap = _medium_kappa(k, medium)
    r0 = outer.cavity_radius
    r_top = _default_rmax(outer, k) if r_max is None else float(r_max)
    rtol, atol = _tol_pair(tol)
    ac = _Piecewise(AngularCoupling(outer, basis, rule))
    n = basis.size
    I = np.eye(n)

    def rhs_in(r, y):
        T, S = y[: n * n].reshape(n, n), y[n * n:].reshape(n, n)
        q, w, U, W = _int_core(basis, kap, ac, k, medium, r, T)
        dT = q + w.D[:, None] * T + T * w.D[None, :]
        X = w.J.T @ U @ W
        dS = -kap * (I + S) @ X - w.D[:, None] * S + S * w.D[None, :]
        return np.concatenate([dT.ravel(), dS.ravel()])

    def rhs_out(r, y):
        T, R = y[: n * n].reshape(n, n), y[n * n:].reshape(n, n)
        q, w, U, W = _ext_core(basis, kap, ac.matrix(r, k, medium), r, T)
        dT = q - w.D[:, None] * T - T * w.D[None, :]
        Y = w.H.T @ U @ W
        dR = kap * (I + R) @ Y + w.D[:, None] * R - R * w.D[None, :]
        return np.concatenate([dT.ravel(), dR.ravel()])

    def sym_first(y):
        head, drift = _symmetrize(y[: n * n])
        return np.concatenate([head, y[n * n:]]), drift

    stats_in, stats_out = StepStats(), StepStats()
    y = np.zeros(2 * n * n)
    for a, b in ac.pieces(r_top, r0):
        y = rk45(rhs_in, a, y, b, rtol, atol, post=sym_first, stats=stats_in)
    T_int, S_ei = y[: n * n].reshape(n, n), y[n * n:].reshape(n, n)
    y = np.zeros(2 * n * n)
    for a, b in ac.pieces(r0, r_top):
        y = rk45(rhs_out, a, y, b, rtol, atol, post=sym_first, stats=stats_out)
    R_ie = y[n * n:].reshape(n, n)
    _check_drift(stats_in, tol)
    _check_drift(stats_out, tol)
    w0 = _Waves(basis, kap, r0)
    wR = _Waves(basis, kap, r_top)
    t_int = TMatrix("int", k, basis, T_int, -w0.log_a, -w0.log_a, stats=stats_in)
    t_ei = TMatrix("ei", k, basis, S_ei, w0.log_a, -w0.log_a, stats=stats_in)
    t_ie = TMatrix("ie", k, basis, R_ie, -wR.log_a, wR.log_a, stats=stats_out)
    return t_ei, t_ie, t_int


def derivative_definiteness(body: BodySpec, medium: MaterialModel, k, basis: ModeBasis, tol=1e-9):
    """Eigenvalue signs of the symmetrised radius derivative of a T-matrix.

    For an inner body this is d T_ext / d R (one more spherical layer at the
    circumscribing radius); for a wall it is d T_int / d r0.  The scaling is a
    positive diagonal congruence, so the signs are those of the scaled
    derivative.

    Returns
    -------
    dict
        ``sign`` (the body's sign class), ``eigenvalues``, ``expected``
        (+1 for inner, -1 for outer, times the sign class) and ``holds``
    """
    s = sign_class(body.material, medium, [k])
    if not s.definite:
        raise SignClassError("derivative definiteness needs a definite sign class")
    if body.role == "inner":
        t = integrate_t_ext(body, medium, k, basis, tol)
        expected = int(s)
    else:
        t = integrate_t_int(body, medium, k, basis, tol)
        expected = -int(s)
    d = 0.5 * (t.derivative + t.derivative.T)
    ev = np.linalg.eigvalsh(d)
    scale = max(np.max(np.abs(ev)), 1e-300)
    holds = bool(np.all(expected * ev > -1e-12 * scale)) and bool(np.any(expected * ev > 0))
    return {"sign": s, "eigenvalues": ev, "expected": expected, "holds": holds}


def transparent(body: BodySpec, medium: MaterialModel, k):
    return sign_class(body.material, medium, [k]) is SignClass.INDEFINITE and \
        eps_at(body.material, k) == eps_at(medium, k)
