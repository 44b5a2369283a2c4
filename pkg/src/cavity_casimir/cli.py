"""Command-line front end: ``cavity-casimir {energy,pressure,sweep,dlp,verify}``.

Configuration is a YAML file (schema in the README).  Unknown keys are
errors.  Exit codes: 0 success, 1 numerical failure, 2 usage/config error.
"""

import argparse
import copy
import csv
import hashlib
import io
import json
import math
import os
import sys

import numpy as np
import yaml

from . import materials
from .geometry import BodySpec
from .imbedding import IntegrationError
from .tgtg import CavityConfig, QuadratureSettings, evaluate, sign_verdict

PRECISION = 12


class ConfigError(ValueError):
    """Invalid or incomplete run configuration."""


SCHEMA = {
    "geometry": {
        "type": None,
        "r0": None,
        "inner": {"radius": None, "coefficients": None},
        "outer": {"radius": None, "coefficients": None},
    },
    "materials": {"inner": None, "outer": None, "medium": None},
    "physics": {"temperature": None, "lmax": None, "rtol": None, "ode_tol": None,
                "n_start": None, "n_max": None, "fd_step": None},
    "output": {"path": None, "precision": None},
    "sweep": {"parameter": None, "range": None, "values": None},
    "dlp": {"gap": None, "radii": None},
}
REQUIRED = (("geometry", "r0"), ("geometry", "inner", "radius"), ("materials", "inner"),
            ("materials", "outer"))


def _check_keys(node, schema, path):
    if not isinstance(node, dict):
        raise ConfigError(f"{'.'.join(path) or 'config'} must be a mapping")
    for key, val in node.items():
        if key not in schema:
            raise ConfigError(f"unknown key '{'.'.join(path + (str(key),))}'")
        if isinstance(schema[key], dict) and val is not None:
            _check_keys(val, schema[key], path + (key,))


def _get(cfg, path, default=None):
    node = cfg
    for key in path:
        if not isinstance(node, dict) or key not in node or node[key] is None:
            return default
        node = node[key]
    return node


def validate(raw):
    """Schema-check a loaded mapping; returns it unchanged."""
    if raw is None:
        raw = {}
    _check_keys(raw, SCHEMA, ())
    for path in REQUIRED:
        if _get(raw, path) is None:
            raise ConfigError(f"missing required key '{'.'.join(path)}'")
    return raw


def load_config(path):
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed YAML in {path}: {exc}") from exc
    return validate(raw)


def config_hash(raw):
    return hashlib.sha256(json.dumps(raw, sort_keys=True, default=str).encode()).hexdigest()[:16]


def _length(val, name, allow_inf=False):
    if isinstance(val, str) and val.strip().lower() in ("inf", "infinity") and allow_inf:
        return math.inf
    try:
        x = float(val)
    except (TypeError, ValueError):
        raise ConfigError(f"'{name}' must be a number") from None
    if not x > 0 or (math.isinf(x) and not allow_inf):
        raise ConfigError(f"'{name}' must be a positive length")
    return x


def _coefficients(items, name):
    out = {}
    for item in items or []:
        if not (isinstance(item, (list, tuple)) and len(item) == 3):
            raise ConfigError(f"'{name}' entries must be [l, m, amplitude]")
        l, m, c = item
        out[(int(l), int(m))] = float(c)
    return out


def _material(spec, name):
    if not isinstance(spec, dict):
        raise ConfigError(f"'{name}' must be a mapping with a 'kind'")
    try:
        return materials.from_dict(spec)
    except KeyError as exc:
        key = exc.args[0]
        raise ConfigError(f"{'missing' if key == 'kind' else 'unknown'} key '{name}.{key}'") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"'{name}': {exc}") from None


def build_config(raw, lmax=None, rtol=None, jobs=1) -> CavityConfig:
    """Turn a validated mapping into a :class:`CavityConfig`."""
    r0 = _length(_get(raw, ("geometry", "r0")), "geometry.r0")
    gtype = _get(raw, ("geometry", "type"), "concentric")
    if gtype not in ("concentric", "star-shaped"):
        raise ConfigError("'geometry.type' must be 'concentric' or 'star-shaped'")
    c_in = _coefficients(_get(raw, ("geometry", "inner", "coefficients")), "geometry.inner.coefficients")
    c_out = _coefficients(_get(raw, ("geometry", "outer", "coefficients")), "geometry.outer.coefficients")
    if gtype == "concentric" and (c_in or c_out):
        raise ConfigError("boundary coefficients need geometry.type: star-shaped")
    R1 = _length(_get(raw, ("geometry", "inner", "radius")), "geometry.inner.radius")
    R2 = _length(_get(raw, ("geometry", "outer", "radius"), "inf"), "geometry.outer.radius", allow_inf=True)
    m_in = _material(_get(raw, ("materials", "inner")), "materials.inner")
    m_out = _material(_get(raw, ("materials", "outer")), "materials.outer")
    m_med = _material(_get(raw, ("materials", "medium"), {"kind": "vacuum"}), "materials.medium")
    phys = _get(raw, ("physics",), {})
    q = QuadratureSettings(
        rtol=float(rtol if rtol is not None else phys.get("rtol") or 1e-6),
        n_start=int(phys.get("n_start") or 16),
        n_max=int(phys.get("n_max") or 64),
        ode_tol=float(phys.get("ode_tol") or 1e-10),
        fd_step=float(phys.get("fd_step") or 1e-4),
        jobs=int(jobs),
    )
    T = float(phys.get("temperature") or 0.0)
    lm = lmax if lmax is not None else phys.get("lmax")
    try:
        return CavityConfig(BodySpec("inner", m_in, R1, c_in),
                            BodySpec("outer", m_out, R2, c_out, cavity_radius=r0),
                            m_med, T, None if lm is None else int(lm), q)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


# --------------------------------------------------------------------------
# output


def _fmt(x, precision=PRECISION):
    if isinstance(x, (bool, np.bool_)):
        return "yes" if x else "no"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.{precision}g}"
    return str(x)


def write_csv(out, header_info, columns, rows, precision=PRECISION):
    buf = io.StringIO()
    buf.write("# " + " ".join(f"{k}={v}" for k, v in header_info.items()) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(v, precision) for v in row])
    text = buf.getvalue()
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    return text


def _sign_columns(cfg, energy, pressure):
    v = sign_verdict(cfg, (energy, pressure))
    if not v.covered:
        return "indefinite", "n/a", "n/a"
    agree = v.energy_agrees and v.pressure_agrees
    return v.s, -v.s, "yes" if agree else "no"


def _header(raw, cfg, n_nodes):
    lmax = cfg.sphere_lmax() if cfg.spherical else cfg.basis().lmax
    return {"config_hash": config_hash(raw), "lmax": lmax, "nodes": n_nodes}


def cmd_energy(raw, args):
    cfg = build_config(raw, args.lmax, args.rtol, args.jobs)
    energy, pressure = evaluate(cfg, finite_difference=False)
    s, pred, agree = _sign_columns(cfg, energy, pressure)
    name = "F_int" if cfg.temperature > 0 else "E_int"
    cols = ["quantity", "value", "quad_error", "trunc_error", "s", "predicted_sign", "agreement"]
    row = [name, energy.value, energy.quad_error, energy.trunc_error, s, pred, agree]
    write_csv(args.out, _header(raw, cfg, energy.n_nodes), cols, [row], _precision(raw))
    return 0


def cmd_pressure(raw, args):
    cfg = build_config(raw, args.lmax, args.rtol, args.jobs)
    energy, pressure = evaluate(cfg)
    s, pred, agree = _sign_columns(cfg, energy, pressure)
    cols = ["p_analytic", "p_finite_difference", "relative_gap", "s", "predicted_sign", "agreement"]
    row = [pressure.value, pressure.finite_difference, pressure.relative_gap, s, pred, agree]
    write_csv(args.out, _header(raw, cfg, pressure.n_nodes), cols, [row], _precision(raw))
    return 0


SWEEPABLE = {
    "r0": ("geometry", "r0"),
    "inner_radius": ("geometry", "inner", "radius"),
    "outer_radius": ("geometry", "outer", "radius"),
    "temperature": ("physics", "temperature"),
    "eps_inner": ("materials", "inner", "eps"),
    "eps_outer": ("materials", "outer", "eps"),
    "eps_medium": ("materials", "medium", "eps"),
}


def parse_range(spec):
    """``start:stop:num`` (inclusive linspace) or a comma-separated list."""
    if isinstance(spec, (list, tuple)):
        return [float(v) for v in spec]
    spec = str(spec).strip()
    if not spec:
        return []
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ConfigError("range must be 'start:stop:num'")
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
        return [float(v) for v in np.linspace(a, b, n)] if n > 0 else []
    return [float(v) for v in spec.split(",")]


def _set(raw, path, value):
    node = raw
    for key in path[:-1]:
        node = node.setdefault(key, {})
    node[path[-1]] = value


def cmd_sweep(raw, args):
    param = args.param or _get(raw, ("sweep", "parameter"))
    if param not in SWEEPABLE:
        raise ConfigError(f"unknown sweep parameter '{param}'; expected one of {sorted(SWEEPABLE)}")
    spec = args.range if args.range is not None else _get(raw, ("sweep", "values"), _get(raw, ("sweep", "range"), ""))
    values = parse_range(spec)
    cols = [param, "energy", "pressure", "s", "predicted_sign", "agreement"]
    rows, nodes, lmax = [], 0, 0
    base = build_config(raw, args.lmax, args.rtol, args.jobs)
    for v in values:
        trial = copy.deepcopy(raw)
        _set(trial, SWEEPABLE[param], v)
        cfg = build_config(trial, args.lmax, args.rtol, args.jobs)
        energy, pressure = evaluate(cfg, finite_difference=False)
        s, pred, agree = _sign_columns(cfg, energy, pressure)
        rows.append([v, energy.value, pressure.value, s, pred, agree])
        nodes = max(nodes, energy.n_nodes)
    header = _header(raw, base, nodes)
    header["parameter"] = param
    write_csv(args.out, header, cols, rows, _precision(raw))
    return 0


def cmd_dlp(raw, args):
    from .dlp import planar_limit_study

    d = _length(_get(raw, ("dlp", "gap")), "dlp.gap")
    radii = _get(raw, ("dlp", "radii"))
    if not radii:
        raise ConfigError("missing required key 'dlp.radii'")
    cfg = build_config(raw, args.lmax, args.rtol, args.jobs)
    rows = planar_limit_study(d, [float(r) for r in radii], cfg.inner.material, cfg.outer.material,
                              cfg.medium, cfg.temperature, cfg.quadrature, cfg.lmax)
    cols = ["r0", "wall_pressure", "plane_pressure", "relative_deviation"]
    header = {"config_hash": config_hash(raw), "lmax": "adaptive" if cfg.lmax is None else cfg.lmax,
              "nodes": cfg.quadrature.n_max}
    write_csv(args.out, header, cols, [[r.r0, r.wall_pressure, r.plane_pressure, r.deviation] for r in rows],
              _precision(raw))
    return 0


def _precision(raw):
    return int(_get(raw, ("output", "precision"), PRECISION))


# --------------------------------------------------------------------------
# verification suites


def _random_sign_configs(rng, n, lmax=None, quadrature=None):
    """Randomised concentric dielectric configurations with definite sign classes."""
    q = quadrature or QuadratureSettings(rtol=1e-3, n_start=8, n_max=16, strict=False)
    out = []
    while len(out) < n:
        em = float(rng.choice([1.0, rng.uniform(1.5, 4.0)]))
        e1, e2 = (float(em * rng.choice([rng.uniform(1.2, 6.0), 1 / rng.uniform(1.2, 3.0)]))
                  for _ in range(2))
        if min(e1, e2) < 1.0:
            continue
        r0 = 1.0
        R1 = float(rng.uniform(0.3, 0.85))
        R2 = math.inf if rng.random() < 0.5 else float(r0 + rng.uniform(0.2, 1.0))
        med = materials.vacuum() if em == 1.0 else materials.constant(em)
        out.append(CavityConfig(BodySpec("inner", materials.constant(e1), R1),
                                BodySpec("outer", materials.constant(e2), R2, cavity_radius=r0),
                                med, 0.0, lmax, q))
    return out


def suite_signs(seed, n=12, report=print):
    rng = np.random.default_rng(seed)
    failures = 0
    for i, cfg in enumerate(_random_sign_configs(rng, n)):
        v = sign_verdict(cfg)
        ok = v.covered and v.energy_agrees and v.pressure_agrees
        failures += not ok
        report(f"signs[{i}] s={v.s:+d} E={v.energy:+.6e} p={v.pressure:+.6e} "
               f"max_lambda={v.max_eigenvalue:.4f} {'PASS' if ok else 'FAIL'}")
    return failures


def suite_oracles(seed, report=print):
    from .basis import ModeBasis
    from .dlp import lifshitz_pressure
    from .imbedding import integrate_t_ext, integrate_t_int
    from .mie import t_ext_scaled, t_int_cavity_scaled

    failures = 0
    basis = ModeBasis(6)
    li = basis.ell - 1
    for eps in (2.0, 4.0, 1e4):
        for x in (0.5, 2.0):
            vac = materials.vacuum()
            t = integrate_t_ext(BodySpec("inner", materials.constant(eps), 1.0), vac, x, basis, 1e-10)
            ref = t_ext_scaled(6, x, 1.0, eps, 1.0, 1.0)
            err_e = np.max(np.abs(np.diag(t.scaled) / np.where(basis.pol == 0, ref.te[li], ref.tm[li]) - 1))
            t = integrate_t_int(BodySpec("outer", materials.constant(eps), math.inf, cavity_radius=1.0),
                                vac, x, basis, 1e-10)
            ref = t_int_cavity_scaled(6, x, 1.0, eps, 1.0)
            err_i = np.max(np.abs(np.diag(t.scaled) / np.where(basis.pol == 0, ref.te[li], ref.tm[li]) - 1))
            ok = max(err_e, err_i) <= 1e-6
            failures += not ok
            report(f"mie-vs-imbedding eps={eps:g} kR={x:g} ext={err_e:.2e} int={err_i:.2e} "
                   f"{'PASS' if ok else 'FAIL'}")
    c = materials.conductor()
    p = lifshitz_pressure(1.0, c, c)
    dev = abs(p / (-math.pi**2 / 240) - 1)
    ok = dev <= 5e-3
    failures += not ok
    report(f"lifshitz conductor limit p={p:.8f} deviation={dev:.2e} {'PASS' if ok else 'FAIL'}")
    return failures


SUITES = {"signs": suite_signs, "oracles": suite_oracles}


def cmd_verify(args):
    if args.suite not in SUITES:
        raise ConfigError(f"unknown suite '{args.suite}'; expected one of {sorted(SUITES)}")
    failures = SUITES[args.suite](args.seed)
    print(f"{args.suite}: {'all passed' if failures == 0 else f'{failures} failed'}")
    return 0 if failures == 0 else 1


# --------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="cavity-casimir", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML run configuration")
    common.add_argument("--out", default=None, help="CSV output path (default: output.path or stdout)")
    common.add_argument("--seed", type=int, default=12345)
    common.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    common.add_argument("--lmax", type=int, default=None)
    common.add_argument("--rtol", type=float, default=None)
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("energy", "pressure", "dlp"):
        sub.add_parser(name, parents=[common])
    sw = sub.add_parser("sweep", parents=[common])
    sw.add_argument("--param", default=None, help=f"one of {', '.join(SWEEPABLE)}")
    sw.add_argument("--range", default=None, help="start:stop:num or comma-separated values")
    vf = sub.add_parser("verify", parents=[common])
    vf.add_argument("suite", help="signs | oracles")
    return p


COMMANDS = {"energy": cmd_energy, "pressure": cmd_pressure, "sweep": cmd_sweep, "dlp": cmd_dlp}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        if args.command == "verify":
            return cmd_verify(args)
        if not args.config:
            raise ConfigError("--config is required")
        raw = load_config(args.config)
        if args.out is None:
            args.out = _get(raw, ("output", "path"))
        return COMMANDS[args.command](raw, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, RuntimeError, IntegrationError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
