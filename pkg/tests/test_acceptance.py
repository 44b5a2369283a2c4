"""Acceptance criteria 1-10, one PASS/FAIL line each (see the terminal summary)."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from cavity_casimir import materials as M
from cavity_casimir import mie
from cavity_casimir.basis import ModeBasis
from cavity_casimir.dlp import lifshitz_pressure, planar_limit_study
from cavity_casimir.geometry import BodySpec
from cavity_casimir.imbedding import derivative_definiteness, integrate_mixed, integrate_t_ext, integrate_t_int
from cavity_casimir.specfun import bessel_i, bessel_i_array, bessel_i_deriv, bessel_k, bessel_k_array, bessel_k_deriv
from cavity_casimir.tgtg import (CavityConfig, QuadratureSettings, evaluate, free_energy, integrand,
                                 interaction_energy, mean_pressure, sign_verdict, zero_mode_nodes)

pytestmark = pytest.mark.slow

SEED = 20240917
KR_GRID = (0.1, 0.5, 1.0, 2.0, 5.0)
EPS_GRID = (2.0, 4.0, 1e4)


def line(report, n, ok, detail):
    report(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    return ok


def _sv(s):
    return s.mantissa, s.log_scale


# ---------------------------------------------------------------------------
# 1


def test_criterion_1_special_functions(report):
    worst_w = worst_r = 0.0
    for z in np.geomspace(0.01, 50, 40):
        for ell in range(0, 21):
            a, la = _sv(bessel_i(ell, z))
            b, lb = _sv(bessel_k_deriv(ell, z))
            c, lc = _sv(bessel_i_deriv(ell, z))
            d, ld = _sv(bessel_k(ell, z))
            w = a * b * math.exp(la + lb + 2 * math.log(z)) - c * d * math.exp(lc + ld + 2 * math.log(z))
            worst_w = max(worst_w, abs(w + 1))
        mi, ei = bessel_i_array(21, z)
        mk, ek = bessel_k_array(21, z)
        for n in range(1, 21):
            lhs = mi[n - 1] * math.exp(ei[n - 1] - ei[n]) - mi[n + 1] * math.exp(ei[n + 1] - ei[n])
            worst_r = max(worst_r, abs(lhs / ((2 * n + 1) / z * mi[n]) - 1))
            lhs = mk[n + 1] * math.exp(ek[n + 1] - ek[n]) - mk[n - 1] * math.exp(ek[n - 1] - ek[n])
            worst_r = max(worst_r, abs(lhs / ((2 * n + 1) / z * mk[n]) - 1))
    ok = worst_w <= 1e-10 and worst_r <= 1e-10
    assert line(report, 1, ok, f"Wronskian max rel err {worst_w:.1e}, recurrences {worst_r:.1e} (tol 1e-10)")


# ---------------------------------------------------------------------------
# 2, 3


def _mode_values(t, amps, basis):
    li = basis.ell - 1
    ref = np.where(basis.pol == 0, amps.te[li], amps.tm[li]) * np.exp(amps.log_scale[li])
    return np.max(np.abs(np.diag(t.entries) / ref - 1))


def test_criterion_2_exterior_vs_mie(report):
    basis = ModeBasis(10)
    worst = 0.0
    for eps in EPS_GRID:
        for x in KR_GRID:
            t = integrate_t_ext(BodySpec("inner", M.constant(eps), x), M.vacuum(), 1.0, basis, tol=1e-10)
            worst = max(worst, _mode_values(t, mie.t_ext_scaled(10, 1.0, x, eps, 1.0, 1.0), basis))
    assert line(report, 2, worst <= 1e-6, f"T^ext vs Mie, l<=10, 15 (eps, kR) points: max rel err {worst:.1e} (tol 1e-6)")


def test_criterion_3_interior_vs_matching(report):
    basis = ModeBasis(10)
    worst_c = worst_s = 0.0
    for eps in EPS_GRID:
        for x in KR_GRID:
            wall = BodySpec("outer", M.constant(eps), math.inf, cavity_radius=x)
            t = integrate_t_int(wall, M.vacuum(), 1.0, basis, tol=1e-10)
            worst_c = max(worst_c, _mode_values(t, mie.t_int_cavity_scaled(10, 1.0, x, eps, 1.0), basis))
            shell = BodySpec("outer", M.constant(eps), 2 * x, cavity_radius=x)
            t = integrate_t_int(shell, M.vacuum(), 1.0, basis, tol=1e-10)
            worst_s = max(worst_s, _mode_values(t, mie.t_int_shell_scaled(10, 1.0, x, 2 * x, eps, 1.0), basis))
    ok = max(worst_c, worst_s) <= 1e-6
    assert line(report, 3, ok, f"T^int vs matching, cavity {worst_c:.1e}, shell R2=2r0 {worst_s:.1e} (tol 1e-6)")


# ---------------------------------------------------------------------------
# 4, 5

SPHERE_Q = QuadratureSettings(rtol=1e-5, strict=False)
# one 16-node pass: each node's log(1 - lambda) has the sign -s, so any
# positive-weight rule preserves sgn E and sgn p
PERTURBED_Q = QuadratureSettings(rtol=1e-3, n_start=16, n_max=16, strict=False)
PERTURBED_LMAX = 3
N_SPHERICAL, N_PERTURBED = 76, 24


def _triple(rng):
    while True:
        e = rng.uniform(1.0, 8.0, 3)
        if np.all(np.abs(e[:2] - e[2]) > 0.2):
            return [float(v) for v in e]


def _random_configs(seed):
    rng = np.random.default_rng(seed)
    out = []
    for i in range(N_SPHERICAL + N_PERTURBED):
        e1, e2, em = _triple(rng)
        r0 = 1.0
        R1 = float(rng.uniform(0.3, 0.8))
        thick = None if rng.random() < 0.5 else float(rng.uniform(0.2, 1.0))
        c_in, c_out = {}, {}
        if i >= N_SPHERICAL:
            j = i - N_SPHERICAL
            lm = (2, 0) if j % 2 == 0 else (3, 1)
            # boundary excursion at most 10% of the radius
            if j % 4 < 2:
                c_in = {lm: float(rng.uniform(0.03, 0.1)) * R1 / math.sqrt(7 / (4 * math.pi))}
            else:
                thick = float(rng.uniform(0.4, 1.0))
                c_out = {lm: float(rng.uniform(0.03, 0.1)) * min(thick, 1.0) * 0.5}
        R2 = math.inf if thick is None else r0 + thick
        med = M.constant(em)
        inner = BodySpec("inner", M.constant(e1), R1, c_in)
        outer = BodySpec("outer", M.constant(e2), R2, c_out, cavity_radius=r0)
        if c_in or c_out:
            cfg = CavityConfig(inner, outer, med, 0.0, PERTURBED_LMAX, PERTURBED_Q)
        else:
            cfg = CavityConfig(inner, outer, med, 0.0, None, SPHERE_Q)
        out.append(cfg)
    return out


@pytest.fixture(scope="module")
def sign_configs():
    return _random_configs(SEED)


def test_criterion_4_sign_theorems(report, sign_configs):
    failures, lam_max = [], 0.0
    n_pert = 0
    for i, cfg in enumerate(sign_configs):
        n_pert += not cfg.spherical
        try:
            v = sign_verdict(cfg)
        except ArithmeticError as exc:
            failures.append(f"#{i}: {exc}")
            continue
        if not (v.covered and v.energy_agrees and v.pressure_agrees):
            failures.append(f"#{i}: s={v.s} E={v.energy:.3e} p={v.pressure:.3e}")
        lam_max = max(lam_max, v.max_eigenvalue)
    ok = not failures and lam_max < 1
    detail = (f"{len(sign_configs)} configs ({n_pert} with Y20/Y31 bumps): {len(failures)} exceptions, "
              f"max M eigenvalue {lam_max:.4f}")
    assert line(report, 4, ok, detail), failures


def test_criterion_5_derivative_definiteness(report, sign_configs):
    failures, checks = [], 0
    for i, cfg in enumerate(sign_configs):
        basis = ModeBasis(PERTURBED_LMAX if not cfg.spherical else 6)
        for k in (0.2 / cfg.gap, 2.0 / cfg.gap):
            for body in (cfg.inner, cfg.outer):
                v = derivative_definiteness(body, cfg.medium, k, basis, tol=1e-9)
                checks += 1
                if not v["holds"]:
                    failures.append(f"#{i} {body.role} k={k:.3g}: {v['eigenvalues']}")
    ok = not failures
    assert line(report, 5, ok, f"{checks} derivative spectra on the configs of item 4: {len(failures)} not uniformly signed"), failures


# ---------------------------------------------------------------------------
# 6


def test_criterion_6_reciprocity(report):
    basis = ModeBasis(6)
    walls = {
        "spherical": BodySpec("outer", M.constant(4.0), 2.0, cavity_radius=1.0),
        "Y20": BodySpec("outer", M.constant(4.0), 2.0, {(2, 0): 0.1}, cavity_radius=1.0),
        "Y31": BodySpec("outer", M.constant(3.0), 1.8, {(3, 1): 0.08}, cavity_radius=1.0),
    }
    errs = {}
    for name, w in walls.items():
        ei, ie, _ = integrate_mixed(w, M.vacuum(), 1.0, basis, tol=1e-10)
        errs[name] = np.max(np.abs(ie.entries - ei.entries.T)) / np.max(np.abs(ei.entries))
    ok = max(errs.values()) <= 1e-8
    detail = ", ".join(f"{k} {v:.1e}" for k, v in errs.items())
    assert line(report, 6, ok, f"max|T^ie - T^ei^T| / max|T^ei|, lmax=6: {detail} (tol 1e-8)")


# ---------------------------------------------------------------------------
# 7


def test_criterion_7_pressure_routes(report):
    fixtures = {
        "eps 2|1|2": CavityConfig(BodySpec("inner", M.constant(2.0), 0.7),
                                  BodySpec("outer", M.constant(2.0), math.inf, cavity_radius=1.0)),
        "eps 2|4|8": CavityConfig(BodySpec("inner", M.constant(2.0), 0.6),
                                  BodySpec("outer", M.constant(8.0), 1.5, cavity_radius=1.0), M.constant(4.0)),
        "conductors": CavityConfig(BodySpec("inner", M.conductor(), 0.8),
                                   BodySpec("outer", M.conductor(), math.inf, cavity_radius=1.0)),
        "drude": CavityConfig(BodySpec("inner", M.drude(9.0, 0.03), 0.5),
                              BodySpec("outer", M.drude(9.0, 0.03), math.inf, cavity_radius=1.0)),
        "Y20 inner": CavityConfig(BodySpec("inner", M.constant(3.0), 0.6, {(2, 0): 0.05}),
                                  BodySpec("outer", M.constant(3.0), math.inf, cavity_radius=1.0),
                                  lmax=3, quadrature=PERTURBED_Q),
    }
    gaps = {}
    for name, cfg in fixtures.items():
        p = mean_pressure(cfg, check=False)
        gaps[name] = p.relative_gap
    ok = max(gaps.values()) <= 1e-4
    detail = ", ".join(f"{k} {v:.1e}" for k, v in gaps.items())
    assert line(report, 7, ok, f"analytic vs Richardson FD relative gap: {detail} (tol 1e-4)")


# ---------------------------------------------------------------------------
# 8


def test_criterion_8_planar_limit(report):
    c = M.conductor()
    rows = planar_limit_study(1.0, [10.0, 20.0, 50.0], c, c)
    dev = [r.deviation for r in rows]
    p = lifshitz_pressure(1.0, c, c)
    ideal = abs(p / (-math.pi**2 / 240) - 1)
    ok = all(np.diff(dev) < 0) and dev[-1] <= 0.05 and ideal <= 5e-3
    detail = (f"deviation at r0/d=10,20,50: {dev[0]:.4f}, {dev[1]:.4f}, {dev[2]:.4f} (<=0.05 at 50); "
              f"Lifshitz conductor vs -pi^2/240: {ideal:.1e} (tol 5e-3)")
    assert line(report, 8, ok, detail)


# ---------------------------------------------------------------------------
# 9


def test_criterion_9_thermal(report):
    inner = BodySpec("inner", M.constant(3.0), 0.5)
    wall = BodySpec("outer", M.constant(3.0), math.inf, cavity_radius=1.0)
    e = interaction_energy(CavityConfig(inner, wall)).value
    f = free_energy(CavityConfig(inner, wall, temperature=0.01)).value
    low = abs(f / e - 1)
    T = 5.0
    hot = CavityConfig(BodySpec("inner", M.constant(2.0), 0.7), BodySpec("outer", M.constant(2.0), math.inf,
                                                                          cavity_radius=1.0), temperature=T)
    g = [integrand(hot, k).value for k in zero_mode_nodes(hot)]
    single = 0.5 * T * (2 * g[1] - g[0])
    high = abs(free_energy(hot).value / single - 1)
    ok = low <= 1e-3 and high <= 1e-2
    assert line(report, 9, ok, f"F(kT=0.01/r0) vs E: {low:.1e} (tol 1e-3); kT=5/r0 vs n=0 term: {high:.1e} (tol 1e-2)")


# ---------------------------------------------------------------------------
# 10


def _mode_pressure(ell, R1, r0, e1, e2, em, h=1e-5):
    """Per-l pressure -(1/4 pi r0^2) d/dr0 (2l+1)/(2pi) int dk sum_P log(1 - t1 t2)."""

    def f(k):
        t1 = np.array(tuple(mie.t_ext_sphere(ell, k, R1, e1, 1.0, em)))
        tp = np.array(tuple(mie.t_int_cavity(ell, k, r0 + h, e2, em)))
        tm = np.array(tuple(mie.t_int_cavity(ell, k, r0 - h, e2, em)))
        t2 = np.array(tuple(mie.t_int_cavity(ell, k, r0, e2, em)))
        return float(np.sum(-t1 * (tp - tm) / (2 * h) / (1 - t1 * t2)))

    # the round trip decays as exp(-2 kappa gap); beyond 40 it is below 1e-34
    k_max = 40 / ((r0 - R1) * math.sqrt(em))
    val = quad(f, 0, k_max, limit=200, epsabs=0, epsrel=1e-8)[0]
    return -(2 * ell + 1) / (2 * math.pi) * val / (4 * math.pi * r0 * r0)


def _quoted_sign(ell, e1, e2, em):
    return np.sign(-(e1 - em) * (e2 - em) * ell * (ell + 1)
                   / ((ell * e1 + em * (ell + 1)) * (ell * em + e2 * (ell + 1))))


def test_criterion_10_per_mode_sign(report):
    rng = np.random.default_rng(SEED + 10)
    mismatches, n = [], 0
    for _ in range(20):
        e1, e2, em = _triple(rng)
        R1 = float(rng.uniform(0.4, 0.8))
        for ell in range(1, 9):
            p = _mode_pressure(ell, R1, 1.0, e1, e2, em)
            n += 1
            if np.sign(p) != _quoted_sign(ell, e1, e2, em):
                mismatches.append((ell, e1, e2, em, p))
    ok = not mismatches
    assert line(report, 10, ok, f"{n} (triple, l<=8) mode pressures: {len(mismatches)} sign mismatches"), mismatches
