"""Round-trip operator, interaction energy, free energy and mean wall pressure.

Both bodies are expanded about the cavity centre, so the coupling between
the inner body's outgoing waves and the wall's regular waves is the identity
in the mode basis and

    E_int = (1/2pi) int_0^inf dk  log det(I - T_ext T_int).

T-matrices are carried in scaled form (``T = exp(row) * S * exp(col)``); the
product only needs the ratio ``Lambda = a(kappa R1) / a(kappa r0)`` of scale
factors, which is ``~exp(-kappa * gap)`` and never overflows.

With definite sign classes the round-trip operator is written as the
nonnegative matrix ``M = sqrt(s1 T1) s2 T2 sqrt(s1 T1)`` whose eigenvalues lie
in [0, 1); ``log det(I - T1 T2) = sum log(1 - s lambda)``.

Lengths are in arbitrary units L, frequencies and temperature in 1/L
(hbar = c = k_B = 1), energies in 1/L and pressures in 1/L^4.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from numpy.polynomial.legendre import leggauss

from .basis import ModeBasis
from .geometry import BodySpec
from .imbedding import _full_from_modes, integrate_t_ext, integrate_t_int
from .materials import MaterialModel, SignClass, eps_at, sign_class, vacuum
from .mie import t_ext_scaled, t_int_cavity_scaled, t_int_shell_scaled
from .specfun import RadialData


class EigenvalueRangeError(ArithmeticError):
    """An eigenvalue of M left [0, 1)."""


class SignClassViolation(ArithmeticError):
    """s_i T_i has a negative eigenvalue beyond tolerance."""


class ConvergenceError(RuntimeError):
    """Quadrature or Matsubara sum did not converge within its cap."""

    def __init__(self, message, tail_estimate=float("nan")):
        super().__init__(f"{message} (tail estimate {tail_estimate:.3g})")
        self.tail_estimate = tail_estimate


class ZeroModeError(ConvergenceError):
    """The k -> 0+ limit of the integrand did not stabilise under k-halving."""


class PressureMismatchError(ArithmeticError):
    """Analytic and finite-difference pressures disagree."""


@dataclass(frozen=True)
class QuadratureSettings:
    """Numerical knobs shared by the energy and pressure routines.

    Parameters
    ----------
    rtol : float
        relative tolerance of the k quadrature (node doubling) and the
        Matsubara sum
    n_start, n_max : int
        initial and maximal Gauss-Legendre node counts
    ode_tol : float
        tolerance of the imbedding integrator
    k0 : float or None
        scale of the map ``k = k0 (u / (1 - u))^2``; default ``1 / gap``
    fd_step : float
        finite-difference step in units of r0
    pressure_rtol : float
        allowed analytic vs finite-difference gap (10x is an error)
    jobs : int
        worker processes for node evaluation
    strict : bool
        raise on non-convergence; otherwise return the last estimate with
        its error
    """

    rtol: float = 1e-6
    n_start: int = 16
    n_max: int = 64
    ode_tol: float = 1e-10
    k0: float | None = None
    fd_step: float = 1e-4
    pressure_rtol: float = 1e-4
    jobs: int = 1
    strict: bool = True


@dataclass(frozen=True)
class CavityConfig:
    """Inner body inside a cavity of an outer wall, both about a common centre.

    ``lmax=None`` selects ``max(8, ceil(kappa r0) + 6)`` at ``k = 1/gap`` for
    the matrix path and an adaptive per-frequency cutoff for two spheres.
    """

    inner: BodySpec
    outer: BodySpec
    medium: MaterialModel = field(default_factory=vacuum)
    temperature: float = 0.0
    lmax: int | None = None
    quadrature: QuadratureSettings = field(default_factory=QuadratureSettings)
    angular: str = "auto"

    def __post_init__(self):
        if self.inner.role != "inner" or self.outer.role != "outer":
            raise ValueError("inner/outer bodies have the wrong roles")
        if not self.inner.extent()[1] < self.outer.cavity_radius:
            raise ValueError("inner body must fit strictly inside the cavity sphere r0")
        if self.temperature < 0:
            raise ValueError("temperature must be non-negative")
        if self.outer.material.is_magnetic:
            raise ValueError("a magnetic outer body is not supported")
        if self.inner.material.is_magnetic and not self.inner.is_spherical:
            raise ValueError("a magnetic inner body must be spherical (closed-form path)")
        if self.lmax is not None and self.lmax < 1:
            raise ValueError("lmax must be >= 1")

    @property
    def r0(self):
        return self.outer.cavity_radius

    @property
    def gap(self):
        return self.r0 - self.inner.extent()[1]

    @property
    def spherical(self):
        return self.inner.is_spherical and self.outer.is_spherical

    def with_r0(self, r0):
        """Same configuration with the cavity face moved to r0."""
        return replace(self, outer=self.outer.with_cavity_radius(r0))

    def basis(self):
        if self.lmax is not None:
            return ModeBasis(self.lmax)
        k = 1.0 / self.gap
        kap = k * math.sqrt(eps_at(self.medium, k))
        return ModeBasis(max(8, math.ceil(kap * self.r0) + 6))

    def sphere_lmax(self):
        """Per-frequency cutoff for two spheres: terms fall like exp(-2 gap l / r0)."""
        if self.lmax is not None:
            return self.lmax
        return int(min(6000, max(8, math.ceil(18.0 * self.r0 / self.gap) + 10)))

    def sign_classes(self, ks):
        return (sign_class(self.inner.material, self.medium, ks),
                sign_class(self.outer.material, self.medium, ks))


@dataclass
class SpectrumSample:
    """Integrand data at one imaginary frequency.

    ``eigenvalues`` are those of M (for two spheres one entry per (l, P),
    each with multiplicity 2l+1); empty when a sign class is indefinite.
    """

    k: float
    eigenvalues: np.ndarray
    value: float
    derivative: float = float("nan")
    truncation: float = 0.0


@dataclass
class EnergyResult:
    """Energy (or pressure) with quadrature and truncation error estimates."""

    value: float
    quad_error: float
    trunc_error: float
    samples: list
    n_nodes: int = 0
    lmax: int = 0


@dataclass
class PressureResult(EnergyResult):
    """Mean wall pressure by the analytic route plus the finite-difference check."""

    finite_difference: float = float("nan")
    relative_gap: float = float("nan")


# --------------------------------------------------------------------------
# M operator


def _psd_sqrt(A, what):
    w, V = np.linalg.eigh(0.5 * (A + A.T))
    scale = max(float(np.max(np.abs(w))), 1e-300) if w.size else 1.0
    if w.size and w.min() < -1e-9 * scale:
        raise SignClassViolation(f"{what} has eigenvalue {w.min():.3g} < 0")
    return (V * np.sqrt(np.clip(w, 0.0, None))) @ V.T


def build_M(t1, t2, s1, s2, scale=None):
    """Nonnegative round-trip matrix ``sqrt(s1 T1) L s2 T2 L sqrt(s1 T1)``.

    Parameters
    ----------
    t1, t2 : ndarray
        (scaled) exterior and interior T-matrices over one mode basis
    s1, s2 : SignClass or int
    scale : ndarray, optional
        diagonal ``Lambda`` relating the scaled matrices (ones if omitted)
    """
    s1, s2 = int(s1), int(s2)
    t1 = np.atleast_2d(np.asarray(t1, dtype=float))
    t2 = np.atleast_2d(np.asarray(t2, dtype=float))
    if t1.shape != t2.shape:
        raise ValueError("T-matrices must share one basis")
    lam = np.ones(len(t1)) if scale is None else np.asarray(scale, dtype=float)
    R = _psd_sqrt(s1 * t1, "s1 T1")
    _psd_sqrt(s2 * t2, "s2 T2")
    inner = s2 * (lam[:, None] * t2 * lam[None, :])
    M = R @ inner @ R
    return 0.5 * (M + M.T)


def _check_eigenvalues(lam, k, modes=None):
    scale = max(float(np.max(np.abs(lam))), 1e-300) if lam.size else 1.0
    bad = np.flatnonzero((lam < -1e-9 * scale) | (lam >= 1.0))
    if bad.size:
        i = int(bad[0])
        where = f" mode {modes[i]}" if modes is not None else f" index {i}"
        raise EigenvalueRangeError(f"eigenvalue {lam[i]:.6g} of M outside [0,1) at k={k:.6g},{where}")


# --------------------------------------------------------------------------
# per-frequency evaluation


def _wall_derivative_scaled(ells, kap, k, r0, t2, eps2, em):
    """Scaled d T_int / d r0 from the Riccati right-hand side at the face."""
    w = RadialData(int(ells.max()), kap * r0)
    li = ells - 1
    P, Q = w.psi_i[li], w.chi_k[li]
    g2 = np.exp(w.log_i + w.log_k)[li]
    z = kap * r0
    V = k * k * (eps2 - em)
    c = kap * g2 * r0 * r0 * V
    te, tm = t2
    dte = -c * (te - 1.0) ** 2
    dtm = -c * ((Q + P * tm) ** 2 + (em / eps2) * ells * (ells + 1.0) / z**2 * (1 + tm) ** 2)
    return dte, dtm


def _sphere_wall(cfg, k, L):
    em = eps_at(cfg.medium, k)
    eps2 = eps_at(cfg.outer.material, k)
    r0 = cfg.r0
    if math.isinf(cfg.outer.radius):
        return t_int_cavity_scaled(L, k, r0, eps2, em), eps2, em
    return t_int_shell_scaled(L, k, r0, cfg.outer.radius, eps2, em), eps2, em


def _sphere_node(cfg: CavityConfig, k, deriv):
    L = cfg.sphere_lmax()
    ells = np.arange(1, L + 1)
    em = eps_at(cfg.medium, k)
    kap = k * math.sqrt(em)
    inner = cfg.inner
    ext = t_ext_scaled(L, k, inner.radius, eps_at(inner.material, k), inner.material.mu, em)
    wall, eps2, _ = _sphere_wall(cfg, k, L)
    lam2 = np.exp(ext.log_scale + wall.log_scale)
    x_te = ext.te * wall.te * lam2
    x_tm = ext.tm * wall.tm * lam2
    deg = 2 * ells + 1
    g_modes = deg * (np.log1p(-x_te) + np.log1p(-x_tm))
    g = float(np.sum(g_modes))
    s1, s2 = cfg.sign_classes([k])
    lam = np.empty(0)
    if s1.definite and s2.definite:
        s = int(s1) * int(s2)
        lam = s * np.concatenate([x_te, x_tm])
        modes = [(l, "TE") for l in ells] + [(l, "TM") for l in ells]
        _check_eigenvalues(lam, k, modes)
    elif np.any(x_te >= 1) or np.any(x_tm >= 1):
        raise EigenvalueRangeError(f"round-trip amplitude reached 1 at k={k:.6g}")
    dg = float("nan")
    if deriv:
        dte, dtm = _wall_derivative_scaled(ells, kap, k, cfg.r0, (wall.te, wall.tm), eps2, em)
        dg = float(-np.sum(deg * (ext.te * dte * lam2 / (1 - x_te) + ext.tm * dtm * lam2 / (1 - x_tm))))
    # geometric tail beyond L
    q = min(abs(g_modes[-1]) / max(abs(g_modes[-2]), 1e-300), 0.999) if L > 1 else 0.0
    trunc = abs(g_modes[-1]) * q / (1 - q)
    return SpectrumSample(k, lam, g, dg, trunc)


def _inner_t(cfg: CavityConfig, k, basis):
    inner = cfg.inner
    em = eps_at(cfg.medium, k)
    if inner.is_spherical:
        ext = t_ext_scaled(basis.lmax, k, inner.radius, eps_at(inner.material, k), inner.material.mu, em)
        S = _full_from_modes(basis, ext.te, ext.tm)
        log_a = 0.5 * np.repeat(ext.log_scale[basis.lm[:, 0] - 1], 2)
        return S, log_a
    t = integrate_t_ext(inner, cfg.medium, k, basis, cfg.quadrature.ode_tol, rule=cfg.angular)
    return t.scaled, t.row_log


def _outer_t(cfg: CavityConfig, k, basis):
    outer = cfg.outer
    if outer.is_spherical:
        em = eps_at(cfg.medium, k)
        kap = k * math.sqrt(em)
        wall, eps2, _ = _sphere_wall(cfg, k, basis.lmax)
        ells = np.arange(1, basis.lmax + 1)
        dte, dtm = _wall_derivative_scaled(ells, kap, k, cfg.r0, (wall.te, wall.tm), eps2, em)
        S = _full_from_modes(basis, wall.te, wall.tm)
        dS = _full_from_modes(basis, dte, dtm)
        log_b = 0.5 * np.repeat(wall.log_scale[basis.lm[:, 0] - 1], 2)
        return S, dS, log_b
    t = integrate_t_int(outer, cfg.medium, k, basis, cfg.quadrature.ode_tol, rule=cfg.angular)
    return t.scaled, t.derivative, t.row_log


def _matrix_node(cfg: CavityConfig, k, deriv, t1=None):
    basis = cfg.basis()
    S1, log1 = _inner_t(cfg, k, basis) if t1 is None else t1
    S2, dS2, log2 = _outer_t(cfg, k, basis)
    lam_d = np.exp(log1 + log2)
    B = lam_d[:, None] * S2 * lam_d[None, :]
    K = S1 @ B
    n = len(K)
    I = np.eye(n)
    s1, s2 = cfg.sign_classes([k])
    eig = np.empty(0)
    if s1.definite and s2.definite:
        M = build_M(S1, S2, s1, s2, lam_d)
        eig = np.linalg.eigvalsh(M)
        _check_eigenvalues(eig, k)
        s = int(s1) * int(s2)
        g = float(np.sum(np.log1p(-s * eig)))
    else:
        sgn, g = np.linalg.slogdet(I - K)
        if sgn <= 0:
            raise EigenvalueRangeError(f"det(I - T1 T2) <= 0 at k={k:.6g}")
        g = float(g)
    keep = basis.ell < basis.lmax
    trunc = 0.0
    if keep.any():
        sgn, g_sub = np.linalg.slogdet(I[np.ix_(keep, keep)] - K[np.ix_(keep, keep)])
        trunc = abs(g - g_sub)
    dg = float("nan")
    if deriv:
        dB = lam_d[:, None] * dS2 * lam_d[None, :]
        dg = float(-np.trace(np.linalg.solve(I - K, S1 @ dB)))
    return SpectrumSample(k, eig, g, dg, trunc), (S1, log1)


# every round trip carries exp(-2 kappa gap); beyond this the integrand is < e^-80
SCREENED_KAPPA_GAP = 40.0


def _node(args):
    cfg, k, deriv, t1 = args
    if k * math.sqrt(eps_at(cfg.medium, k)) * cfg.gap > SCREENED_KAPPA_GAP:
        return SpectrumSample(k, np.empty(0), 0.0, 0.0 if deriv else float("nan"), 0.0), None
    if cfg.spherical:
        return _sphere_node(cfg, k, deriv), None
    return _matrix_node(cfg, k, deriv, t1)


def _evaluate(cfg: CavityConfig, ks, deriv, t1s=None):
    t1s = [None] * len(ks) if t1s is None else t1s
    tasks = [(cfg, float(k), deriv, t1) for k, t1 in zip(ks, t1s)]
    jobs = cfg.quadrature.jobs
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            out = list(pool.map(_node, tasks))
    else:
        out = [_node(t) for t in tasks]
    return [o[0] for o in out], [o[1] for o in out]


def integrand(cfg: CavityConfig, k) -> SpectrumSample:
    """``sum_alpha log(1 - s lambda_alpha)`` at imaginary frequency k, with d/dr0."""
    if not k > 0:
        raise ValueError("k must be positive")
    return _evaluate(cfg, [k], True)[0][0]


# --------------------------------------------------------------------------
# k quadrature and Matsubara sums


def _k_rule(n, k0):
    """Gauss-Legendre nodes for int_0^inf dk under ``k = k0 (u / (1 - u))^2``.

    Squaring the rational map clusters nodes at small k, which resolves the
    quasi-static region of high-contrast bodies.
    """
    u, w = leggauss(n)
    u = 0.5 * (u + 1)
    w = 0.5 * w
    return k0 * (u / (1 - u)) ** 2, w * 2 * k0 * u / (1 - u) ** 3


@dataclass
class _Sum:
    ks: np.ndarray
    weights: np.ndarray
    samples: list
    t1s: list
    value: float
    dvalue: float
    quad_error: float
    dquad_error: float
    trunc: float
    dtrunc: float = 0.0


def _weighted(samples, weights):
    g = np.array([s.value for s in samples])
    dg = np.array([s.derivative for s in samples])
    tr = np.array([s.truncation for s in samples])
    return float(weights @ g), float(weights @ dg), float(weights @ tr)


def _zero_temperature(cfg: CavityConfig, deriv) -> _Sum:
    q = cfg.quadrature
    k0 = q.k0 if q.k0 is not None else 1.0 / cfg.gap
    n = q.n_start
    prev = None
    while True:
        ks, w = _k_rule(n, k0)
        w = w / (2 * math.pi)
        samples, t1s = _evaluate(cfg, ks, deriv)
        val, dval, tr = _weighted(samples, w)
        if prev is not None:
            err = abs(val - prev[0])
            derr = abs(dval - prev[1]) if deriv else 0.0
            ok = err <= q.rtol * abs(val) and (not deriv or derr <= q.rtol * abs(dval))
            if ok or (val == 0 and prev[0] == 0):
                return _Sum(ks, w, samples, t1s, val, dval, err, derr, tr)
        if 2 * n > q.n_max:
            tail = abs(val - prev[0]) if prev else float("nan")
            if q.strict:
                raise ConvergenceError(f"k quadrature not converged with {n} nodes", tail)
            derr = abs(dval - prev[1]) if prev and deriv else float("nan")
            return _Sum(ks, w, samples, t1s, val, dval, tail, derr, tr)
        prev = (val, dval)
        n *= 2


def zero_mode_nodes(cfg: CavityConfig):
    return np.array([1e-4, 5e-5]) / cfg.r0


def _zero_mode(samples, attr):
    a, b = (getattr(s, attr) for s in samples)
    if abs(a - b) > 1e-3 * abs(b) + 1e-14:
        raise ZeroModeError(f"k -> 0 limit of the {attr} not stable under halving: {a:.6g} vs {b:.6g}",
                            abs(a - b))
    return 2 * b - a


def _matsubara(cfg: CavityConfig, deriv, block=32, n_cap=20000) -> _Sum:
    T = cfg.temperature
    q = cfg.quadrature
    dk = 2 * math.pi * T
    zs, zt1 = _evaluate(cfg, zero_mode_nodes(cfg), deriv)
    g0 = _zero_mode(zs, "value")
    dg0 = _zero_mode(zs, "derivative") if deriv else 0.0
    val, dval = 0.5 * T * g0, 0.5 * T * dg0
    tr = 0.5 * T * zs[1].truncation
    ks_all, w_all, samples_all, t1_all = list(zero_mode_nodes(cfg)), [-0.5 * T, T], list(zs), list(zt1)
    n = 1
    while True:
        ks = dk * np.arange(n, n + block)
        samples, t1s = _evaluate(cfg, ks, deriv)
        bv = T * sum(s.value for s in samples)
        bd = T * sum(s.derivative for s in samples) if deriv else 0.0
        val += bv
        dval += bd
        tr += T * sum(s.truncation for s in samples)
        ks_all += list(ks)
        w_all += [T] * len(ks)
        samples_all += samples
        t1_all += t1s
        n += block
        small = abs(bv) <= 0.1 * q.rtol * abs(val) or val == 0
        dsmall = not deriv or abs(bd) <= 0.1 * q.rtol * abs(dval) or dval == 0
        if small and dsmall:
            err = abs(bv)
            return _Sum(np.array(ks_all), np.array(w_all), samples_all, t1_all, val, dval,
                        err, abs(bd), tr)
        if n > n_cap:
            raise ConvergenceError(f"Matsubara sum not converged after {n} terms", abs(bv))


def _run(cfg: CavityConfig, deriv) -> _Sum:
    return _matsubara(cfg, deriv) if cfg.temperature > 0 else _zero_temperature(cfg, deriv)


def _fixed_nodes(cfg, run: _Sum):
    """Energy of a modified config on the nodes and weights of an earlier run.

    For Matsubara runs the zero-mode weights ``[-T/2, T]`` reproduce the
    linear extrapolation ``T/2 (2 g_b - g_a)``.
    """
    samples, _ = _evaluate(cfg, run.ks, False, run.t1s)
    return float(np.dot(run.weights, [s.value for s in samples]))


def _lmax_of(cfg):
    return cfg.sphere_lmax() if cfg.spherical else cfg.basis().lmax


def interaction_energy(cfg: CavityConfig) -> EnergyResult:
    """Zero-temperature interaction energy."""
    if cfg.temperature != 0:
        raise ValueError("interaction_energy is the T = 0 result; use free_energy")
    run = _zero_temperature(cfg, False)
    return EnergyResult(run.value, run.quad_error, run.trunc, run.samples, len(run.ks), _lmax_of(cfg))


def free_energy(cfg: CavityConfig) -> EnergyResult:
    """Matsubara sum ``T sum'_n log det(I - T1 T2)(k_n)`` with a half-weighted zero mode."""
    if not cfg.temperature > 0:
        raise ValueError("free_energy needs a positive temperature")
    run = _matsubara(cfg, False)
    return EnergyResult(run.value, run.quad_error, run.trunc, run.samples, len(run.ks), _lmax_of(cfg))


def _pressure(cfg: CavityConfig, run: _Sum, check=True, finite_difference=True) -> PressureResult:
    r0 = cfg.r0
    area = 4 * math.pi * r0 * r0
    p = -run.dvalue / area
    p_fd, gap = float("nan"), float("nan")
    if finite_difference:
        h = cfg.quadrature.fd_step * r0
        E = {d: _fixed_nodes(cfg.with_r0(r0 + d), run) for d in (-h, -h / 2, h / 2, h)}
        d1 = (E[h] - E[-h]) / (2 * h)
        d2 = (E[h / 2] - E[-h / 2]) / h
        p_fd = -((4 * d2 - d1) / 3) / area
        denom = max(abs(p), abs(p_fd))
        gap = abs(p - p_fd) / denom if denom > 0 else 0.0
        tol = cfg.quadrature.pressure_rtol
        if check and gap > 10 * tol:
            raise PressureMismatchError(f"analytic {p:.10g} vs finite difference {p_fd:.10g} (gap {gap:.3g})")
    return PressureResult(p, run.dquad_error / area, abs(run.dtrunc) / area, run.samples, len(run.ks),
                          _lmax_of(cfg), finite_difference=p_fd, relative_gap=gap)


def mean_pressure(cfg: CavityConfig, check=True, finite_difference=True) -> PressureResult:
    """Angle-averaged interaction pressure ``-(1/4 pi r0^2) dE/dr0`` on the cavity wall.

    The analytic value inserts the wall's Riccati right-hand side at r0 into
    ``-Tr[(I - T1 T2)^-1 T1 dT2]``; ``finite_difference`` is a central
    difference with one Richardson level on the same frequency nodes.

    Raises
    ------
    PressureMismatchError
        when the two routes differ by more than 10x ``pressure_rtol``
    """
    return _pressure(cfg, _run(cfg, True), check, finite_difference)


@dataclass
class SignVerdict:
    """Outcome of the sign theorems for one configuration."""

    covered: bool
    s: int | None
    sign_energy: int
    sign_pressure: int
    energy_agrees: bool | None
    pressure_agrees: bool | None
    energy: float
    pressure: float
    max_eigenvalue: float
    verdict: str


def evaluate(cfg: CavityConfig, check=True, finite_difference=True):
    """Energy (or free energy) and mean pressure from one shared set of nodes."""
    run = _run(cfg, True)
    energy = EnergyResult(run.value, run.quad_error, run.trunc, run.samples, len(run.ks), _lmax_of(cfg))
    return energy, _pressure(cfg, run, check, finite_difference)


def sign_verdict(cfg: CavityConfig, results=None) -> SignVerdict:
    """Check ``sgn E = sgn <p> = -s1 s2`` on the frequencies actually used."""
    energy, pressure = evaluate(cfg, finite_difference=False) if results is None else results
    ks = np.array([s.k for s in energy.samples])
    s1, s2 = cfg.sign_classes(ks)
    sgn_e = int(np.sign(energy.value))
    sgn_p = int(np.sign(pressure.value))
    lam = [float(np.max(s.eigenvalues)) for s in energy.samples if s.eigenvalues.size]
    lam_max = max(lam) if lam else float("nan")
    if not (s1.definite and s2.definite):
        return SignVerdict(False, None, sgn_e, sgn_p, None, None, energy.value, pressure.value,
                           lam_max, "not covered by theorem")
    s = int(s1) * int(s2)
    e_ok, p_ok = sgn_e == -s, sgn_p == -s
    verdict = "agrees" if e_ok and p_ok else "violates"
    return SignVerdict(True, s, sgn_e, sgn_p, e_ok, p_ok, energy.value, pressure.value, lam_max, verdict)


__all__ = [
    "CavityConfig", "QuadratureSettings", "SpectrumSample", "EnergyResult", "PressureResult",
    "SignVerdict", "build_M", "integrand", "interaction_energy", "free_energy", "mean_pressure",
    "evaluate", "sign_verdict", "EigenvalueRangeError", "SignClassViolation", "ConvergenceError",
    "ZeroModeError", "PressureMismatchError", "SignClass",
]
