# Batch front door: a JSON config names one pipeline (solve, benchmark,
# blowup, oracle comparison, lemma checks, export); running it emits
# solution/mesh/sample artifacts plus a report.json that records every
# verdict, measurement, and artifact hash.  Exit codes: 0 all contracts
# pass, 1 contract failure, 2 validation error, 3 non-convergence.
import argparse
import ast
import hashlib
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from .domains import (ConvexPolygonDomain, DiskDomain, QuadratureError,
                      SourceDensity, boundary_geometry, constant_density,
                      d0_threshold, distance_to_boundary, domain_area,
                      make_cone_spec, total_mass)
from .experiments import (blowup_experiment, cone_inclusion_check,
                          estar_volume_check, slice_estimate_check,
                          sphere_benchmark)
from .oracle import (agreement_ceiling, monotonicity_certificate,
                     semidiscrete_agreement)
from .solver import (ConvergenceError, MassBalanceError, _cell_polyline,
                     export_mesh, solution_to_csv, solve)
from .targets import (DiscreteTarget, chart_disk, chart_polygon, discretize,
                      full_hemisphere, truncation_radius_for)

COMMANDS = ("solve", "sphere-benchmark", "blowup", "oracle-compare",
            "lemmas", "export")


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the field path."""


# ---------------------------------------------------------------------------
# density expressions
#
# A deliberately small grammar: arithmetic over the coordinates x1, x2 and
# the boundary distance d, numeric literals, and a fixed function table.
# Everything else is rejected at parse time, so configs stay data, not code.

_FUNCS = {
    "exp": (np.exp, 1), "sqrt": (np.sqrt, 1), "sin": (np.sin, 1),
    "cos": (np.cos, 1), "abs": (np.abs, 1), "log": (np.log, 1),
    "min": (np.minimum, 2), "max": (np.maximum, 2),
}
_BINOPS = {ast.Add: np.add, ast.Sub: np.subtract, ast.Mult: np.multiply,
           ast.Div: np.divide, ast.Pow: np.power}
_NAMES = ("x1", "x2", "d")


def compile_expression(formula, path="density.formula"):
    """Compile the restricted density grammar to a vectorized evaluator
    taking an environment {x1, x2, d} of equal-length arrays."""
    try:
        tree = ast.parse(formula, mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"{path}: cannot parse {formula!r} ({exc.msg})")

    def build(node):
        if isinstance(node, ast.Expression):
            return build(node.body)
        if isinstance(node, ast.Constant):
            if isinstance(node.value, bool) or not isinstance(
                    node.value, (int, float)):
                raise ConfigError(f"{path}: only numeric literals allowed")
            v = float(node.value)
            return lambda env: v
        if isinstance(node, ast.Name):
            if node.id not in _NAMES:
                raise ConfigError(
                    f"{path}: unknown name {node.id!r} (allowed: x1, x2, d)")
            name = node.id
            return lambda env: env[name]
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            op = _BINOPS[type(node.op)]
            lhs, rhs = build(node.left), build(node.right)
            return lambda env: op(lhs(env), rhs(env))
        if isinstance(node, ast.UnaryOp) and isinstance(
                node.op, (ast.USub, ast.UAdd)):
            sub = build(node.operand)
            if isinstance(node.op, ast.USub):
                return lambda env: -sub(env)
            return sub
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name):
            fname = node.func.id
            if fname not in _FUNCS:
                raise ConfigError(f"{path}: unknown function {fname!r}")
            fn, arity = _FUNCS[fname]
            if node.keywords or len(node.args) != arity:
                raise ConfigError(
                    f"{path}: {fname} takes exactly {arity} argument(s)")
            args = [build(a) for a in node.args]
            return lambda env: fn(*(a(env) for a in args))
        raise ConfigError(
            f"{path}: disallowed syntax {type(node).__name__}")

    return build(tree)


def _needs_distance(formula):
    return any(isinstance(n, ast.Name) and n.id == "d"
               for n in ast.walk(ast.parse(formula, mode="eval")))


# ---------------------------------------------------------------------------
# config -> objects


def _get(spec, key, path, kind=None, default=KeyError):
    if key not in spec:
        if default is KeyError:
            raise ConfigError(f"{path}.{key}: required field is missing")
        return default
    v = spec[key]
    if kind is float:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"{path}.{key}: expected a number")
        return float(v)
    if kind is int:
        if isinstance(v, bool) or not isinstance(v, int):
            raise ConfigError(f"{path}.{key}: expected an integer")
        return v
    if kind is not None and not isinstance(v, kind):
        raise ConfigError(f"{path}.{key}: expected {kind.__name__}")
    return v


def build_domain(spec, path="domain"):
    if not isinstance(spec, dict):
        raise ConfigError(f"{path}: expected an object")
    kind = _get(spec, "kind", path, str)
    if kind == "disk":
        center = _get(spec, "center", path, list, default=[0.0, 0.0])
        radius = _get(spec, "radius", path, float)
        if radius <= 0:
            raise ConfigError(f"{path}.radius: must be positive")
        return DiskDomain(np.asarray(center, dtype=float), radius)
    if kind == "polygon":
        verts = _get(spec, "vertices", path, list)
        if len(verts) < 3:
            raise ConfigError(f"{path}.vertices: need at least 3 vertices")
        try:
            return ConvexPolygonDomain(np.asarray(verts, dtype=float))
        except ValueError as exc:
            raise ConfigError(f"{path}.vertices: {exc}")
    raise ConfigError(f"{path}.kind: unknown domain kind {kind!r}")


def build_density(spec, domain, path="density"):
    if not isinstance(spec, dict):
        raise ConfigError(f"{path}: expected an object")
    kind = _get(spec, "kind", path, str, default="constant")
    lower = _get(spec, "lower", path, float, default=None)
    upper = _get(spec, "upper", path, float, default=None)

    if kind == "constant":
        value = _get(spec, "value", path, float)
        if value <= 0:
            raise ConfigError(f"{path}.value: must be positive")
        return constant_density(value, lower_bound=lower, upper_bound=upper)

    if kind == "expression":
        formula = _get(spec, "formula", path, str)
        ev = compile_expression(formula, f"{path}.formula")
        wants_d = _needs_distance(formula)

        def fn(pts):
            env = {"x1": pts[:, 0], "x2": pts[:, 1]}
            if wants_d:
                env["d"] = distance_to_boundary(domain, pts)
            return np.asarray(ev(env), dtype=float) * np.ones(len(pts))

        dens = SourceDensity(fn=fn, lower_bound=lower, upper_bound=upper)
        _check_density(dens, domain, path)
        return dens

    if kind == "decay":
        C0 = _get(spec, "C0", path, float)
        delta = _get(spec, "delta", path, float)
        r0 = _get(spec, "r0", path, float, default=None)
        if C0 <= 0:
            raise ConfigError(f"{path}.C0: must be positive")
        if not 0 < delta < 1:
            raise ConfigError(f"{path}.delta: must lie in (0, 1)")
        if r0 is None:
            geo = boundary_geometry(domain)
            r0 = geo.rho
        if r0 <= 0:
            raise ConfigError(f"{path}.r0: must be positive")

        def fn(pts):
            d = np.maximum(distance_to_boundary(domain, pts), 1e-14)
            return C0 * d ** (-delta)

        dens = SourceDensity(fn=fn, lower_bound=lower, upper_bound=upper,
                             decay=(C0, delta, r0))
        _check_density(dens, domain, path)
        return dens

    raise ConfigError(f"{path}.kind: unknown density kind {kind!r}")


def _check_density(dens, domain, path):
    """Reject densities that go negative or non-finite on sample nodes."""
    from .domains import _sample_nodes
    nodes = _sample_nodes(domain)
    vals = dens(nodes)
    if not np.all(np.isfinite(vals)):
        raise ConfigError(f"{path}: non-finite values on the domain")
    try:
        dens.validate(domain, nodes)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}")


def build_target(spec, N, source_mass, seed, path="target"):
    if not isinstance(spec, dict):
        raise ConfigError(f"{path}: expected an object")
    kind = _get(spec, "kind", path, str)
    if kind == "chart_disk":
        center = _get(spec, "center", path, list, default=[0.0, 0.0])
        radius = _get(spec, "radius", path, float)
        if radius <= 0:
            raise ConfigError(f"{path}.radius: must be positive")
        region = chart_disk(np.asarray(center, dtype=float), radius)
    elif kind == "chart_polygon":
        verts = _get(spec, "vertices", path, list)
        try:
            region = chart_polygon(np.asarray(verts, dtype=float))
        except ValueError as exc:
            raise ConfigError(f"{path}.vertices: {exc}")
    elif kind == "hemisphere":
        if "truncation_radius" in spec:
            P_max = _get(spec, "truncation_radius", path, float)
        else:
            eps = _get(spec, "tail_epsilon", path, float,
                       default=math.pi * 1e-4)
            if not 0 < eps < math.pi:
                raise ConfigError(f"{path}.tail_epsilon: must lie in (0, pi)")
            P_max = truncation_radius_for(eps)
        if P_max <= 0:
            raise ConfigError(f"{path}.truncation_radius: must be positive")
        region = full_hemisphere(P_max)
    elif kind == "explicit":
        sites = np.asarray(_get(spec, "sites", path, list), dtype=float)
        masses = np.asarray(_get(spec, "masses", path, list), dtype=float)
        if sites.ndim != 2 or sites.shape[1] != 2:
            raise ConfigError(f"{path}.sites: expected a list of [p1, p2]")
        if len(masses) != len(sites):
            raise ConfigError(
                f"{path}.masses: length must match sites")
        raw = float(masses.sum())
        if raw <= 0:
            raise ConfigError(f"{path}.masses: total must be positive")
        try:
            return DiscreteTarget(sites, masses * (source_mass / raw),
                                  total=source_mass,
                                  rescale_factor=source_mass / raw,
                                  pre_rescale_mismatch=abs(raw - source_mass))
        except ValueError as exc:
            raise ConfigError(f"{path}.sites: {exc}")
    else:
        raise ConfigError(f"{path}.kind: unknown target kind {kind!r}")
    return discretize(region, N, source_mass, seed=seed)


# ---------------------------------------------------------------------------
# the config document

_DEFAULTS = dict(tol=1e-6, max_iter=100, seed=0, threads=1, out="out")


@dataclass
class ExperimentConfig:
    """Normalized, JSON-native experiment description.  to_dict/from_dict
    round-trip exactly, so a config survives serialization unchanged."""
    command: str
    domain: dict = None
    density: dict = None
    target: dict = None
    N: int = None
    tol: float = 1e-6
    max_iter: int = 100
    seed: int = 0
    threads: int = 1
    out: str = "out"
    params: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, raw):
        if not isinstance(raw, dict):
            raise ConfigError("config: expected a JSON object")
        known = {"command", "domain", "density", "target", "N", "tol",
                 "max_iter", "seed", "threads", "out", "params"}
        for key in raw:
            if key not in known:
                raise ConfigError(f"config.{key}: unknown field")
        command = _get(raw, "command", "config", str)
        if command not in COMMANDS:
            raise ConfigError(
                f"config.command: unknown command {command!r} "
                f"(choose from {', '.join(COMMANDS)})")
        cfg = cls(
            command=command,
            domain=_get(raw, "domain", "config", dict, default=None),
            density=_get(raw, "density", "config", dict, default=None),
            target=_get(raw, "target", "config", dict, default=None),
            N=_get(raw, "N", "config", int, default=None),
            tol=_get(raw, "tol", "config", float, default=_DEFAULTS["tol"]),
            max_iter=_get(raw, "max_iter", "config", int,
                          default=_DEFAULTS["max_iter"]),
            seed=_get(raw, "seed", "config", int, default=_DEFAULTS["seed"]),
            threads=_get(raw, "threads", "config", int,
                         default=_DEFAULTS["threads"]),
            out=_get(raw, "out", "config", str, default=_DEFAULTS["out"]),
            params=_get(raw, "params", "config", dict, default={}),
        )
        cfg.validate()
        return cfg

    def to_dict(self):
        d = {"command": self.command, "tol": self.tol,
             "max_iter": self.max_iter, "seed": self.seed,
             "threads": self.threads, "out": self.out, "params": self.params}
        for key in ("domain", "density", "target", "N"):
            if getattr(self, key) is not None:
                d[key] = getattr(self, key)
        return d

    def validate(self):
        if not 0 < self.tol <= 1e-2:
            raise ConfigError("config.tol: must lie in (0, 1e-2]")
        if self.max_iter < 1:
            raise ConfigError("config.max_iter: must be at least 1")
        if self.seed < 0:
            raise ConfigError("config.seed: must be nonnegative")
        if self.threads < 1:
            raise ConfigError("config.threads: must be at least 1")
        if self.N is not None and self.N < 1:
            raise ConfigError("config.N: must be at least 1")
        if not isinstance(self.params, dict):
            raise ConfigError("config.params: expected an object")


# ---------------------------------------------------------------------------
# pipelines; each returns (verdicts, measurements) and writes artifacts


def _solve_instance(cfg, out, mesh=True):
    if cfg.domain is None:
        raise ConfigError("config.domain: required for this command")
    if cfg.density is None:
        raise ConfigError("config.density: required for this command")
    if cfg.target is None:
        raise ConfigError("config.target: required for this command")
    if cfg.N is None:
        raise ConfigError("config.N: required for this command")
    domain = build_domain(cfg.domain)
    K = build_density(cfg.density, domain)
    mass, regime = total_mass(domain, K, tol=1e-8)
    if not K.is_constant:
        # Re-quadrate at the tolerance the solver itself will use for its
        # mass-balance precondition, so the two values agree within its slack.
        qtol = min(1e-9, 1e-3 * cfg.tol * mass)
        mass, regime = total_mass(domain, K, tol=max(qtol, 1e-12))
    if regime == "infeasible":
        raise ConfigError(
            f"config.density: total source mass {mass:.6g} exceeds the "
            f"hemisphere mass pi; no admissible target remains")
    target = build_target(cfg.target, cfg.N, mass, cfg.seed)
    sol = solve(domain, K, target, tol=cfg.tol, max_iter=cfg.max_iter)
    solution_to_csv(sol, os.path.join(out, "solution.csv"))
    if mesh:
        export_mesh(sol, os.path.join(out, "mesh.obj"))
    area_err = abs(sum(c.area for c in sol.diagram.cells)
                   - domain_area(domain)) / domain_area(domain)
    verdicts = {
        "converged": bool(sol.report.converged),
        "mass_balance": bool(sol.report.final_residual <= cfg.tol),
        "area_identity": bool(area_err <= 1e-9),
    }
    meas = {
        "n_sites": len(target), "source_mass": mass, "regime": regime,
        "residual": sol.report.final_residual,
        "iterations": sol.report.iterations,
        "damping_events": sol.report.damping_events,
        "area_error": area_err, "init": sol.report.init_kind,
        "connected": bool(sol.report.connected),
        "rescale_factor": target.rescale_factor,
    }
    return sol, verdicts, meas, {"solve_s": sol.report.runtime}


def _cmd_solve(cfg, out):
    _, verdicts, meas, times = _solve_instance(cfg, out)
    return verdicts, meas, times


def _cmd_export(cfg, out):
    sol, verdicts, meas, times = _solve_instance(cfg, out)
    rows = ["site,k,x1,x2"]
    for c in sol.diagram.cells:
        if c.is_empty:
            continue
        for k, (x, y) in enumerate(_cell_polyline(c)):
            rows.append(f"{c.site_index},{k},{float(x)!r},{float(y)!r}")
    with open(os.path.join(out, "cells.csv"), "w") as fh:
        fh.write("\n".join(rows) + "\n")
    verdicts = {"converged": verdicts["converged"]}
    return verdicts, meas, times


def _cmd_sphere(cfg, out):
    p = cfg.params
    r = _get(p, "r", "config.params", float, default=0.6)
    if not 0 < r < 1:
        raise ConfigError("config.params.r: must lie in (0, 1)")
    n_eval = _get(p, "n_eval", "config.params", int, default=20000)
    N = cfg.N if cfg.N is not None else 2000
    t0 = time.time()
    rep, sol = sphere_benchmark(r, N, tol=cfg.tol, max_iter=cfg.max_iter,
                                n_eval=n_eval, seed=cfg.seed, out_dir=out)
    solution_to_csv(sol, os.path.join(out, "solution.csv"))
    export_mesh(sol, os.path.join(out, "mesh.obj"))
    os.replace(os.path.join(out, "sphere_benchmark_samples.csv"),
               os.path.join(out, "samples.csv"))
    verdicts = {
        "converged": bool(rep.converged),
        "gradient_sup_error": bool(rep.grad_error <= 5e-2),
        "height_sup_error": bool(rep.height_error <= 5e-2),
        "cap_inclusion": bool(rep.cap_excess <= 1e-9),
    }
    meas = {
        "r": rep.r, "n_sites": rep.n_sites,
        "site_spacing": rep.site_spacing, "grad_error": rep.grad_error,
        "height_error": rep.height_error, "cap_excess": rep.cap_excess,
        "residual": rep.residual, "iterations": rep.iterations,
    }
    return verdicts, meas, {"solve_s": rep.runtime,
                            "benchmark_s": time.time() - t0}


def _cmd_blowup(cfg, out):
    p = cfg.params
    domain = build_domain(cfg.domain) if cfg.domain is not None \
        else DiskDomain(np.zeros(2), 1.0)
    K = build_density(cfg.density, domain) if cfg.density is not None \
        else constant_density(1.0)
    mass, regime = total_mass(domain, K, tol=1e-8 if K.is_constant else 1e-10)
    if regime != "critical":
        raise ConfigError(
            f"config.density: the blowup run needs the critical mass "
            f"balance (total curvature mass = pi = full hemisphere mass); "
            f"got {mass:.9g} ({regime})")
    if not (isinstance(domain, DiskDomain)
            and abs(domain.radius - 1.0) < 1e-12
            and np.allclose(domain.center, 0.0)
            and K.is_constant and abs(K.constant - 1.0) < 1e-12):
        raise ConfigError(
            "config.domain: the blowup pipeline supports the unit disk "
            "with constant curvature 1")
    samples = _get(p, "samples", "config.params", int, default=1000)
    delta = _get(p, "delta", "config.params", float, default=0.5)
    C0 = _get(p, "C0", "config.params", float, default=1.0)
    eps = _get(p, "tail_epsilon", "config.params", float,
               default=math.pi * 1e-4)
    if samples < 1:
        raise ConfigError("config.params.samples: must be at least 1")
    if not 0 < delta < 1:
        raise ConfigError("config.params.delta: must lie in (0, 1)")
    N = cfg.N if cfg.N is not None else 4000
    t0 = time.time()
    rep, sol = blowup_experiment(samples, delta=delta, N=N, C0=C0,
                                 tail_epsilon=eps, seed=cfg.seed,
                                 tol=cfg.tol, max_iter=cfg.max_iter,
                                 out_dir=out)
    solution_to_csv(sol, os.path.join(out, "solution.csv"))
    os.replace(os.path.join(out, "blowup_samples.csv"),
               os.path.join(out, "samples.csv"))
    trunc_frac = rep.truncation_excluded / max(samples, 1)
    verdicts = {
        "converged": bool(rep.converged),
        "no_bound_violations": not rep.violations,
        "truncation_fraction": bool(trunc_frac < 0.05),
        "gradient_agreement": bool(rep.agreement_max_rel_err <= 0.10),
    }
    meas = {
        "Lambda": rep.Lambda, "d_max": rep.d_max, "P_max": rep.P_max,
        "n_sites": rep.n_sites, "n_violations": len(rep.violations),
        "truncation_excluded": rep.truncation_excluded,
        "agreement_max_rel_err": rep.agreement_max_rel_err,
        "max_ray_backstep": rep.max_ray_backstep,
        "iterations": rep.iterations, "delta": rep.delta, "C0": rep.C0,
    }
    return verdicts, meas, {"blowup_s": time.time() - t0}


def _cmd_oracle(cfg, out):
    p = cfg.params
    grid_m = _get(p, "grid_m", "config.params", int, default=15)
    if grid_m < 1 or grid_m ** 2 > 1000:
        raise ConfigError(
            "config.params.grid_m: grid_m^2 must lie in [1, 1000]")
    threshold = _get(p, "threshold", "config.params", float, default=0.95)
    if cfg.domain is None:
        raise ConfigError("config.domain: required for this command")
    domain = build_domain(cfg.domain)
    K = build_density(cfg.density, domain) if cfg.density is not None \
        else constant_density(1.0)
    mass, _ = total_mass(domain, K, tol=1e-8 if K.is_constant else 1e-10)
    N = cfg.N if cfg.N is not None else 20
    if N > 1000:
        raise ConfigError("config.N: the exact oracle handles at most 1000")
    if cfg.target is None:
        raise ConfigError("config.target: required for this command")
    target = build_target(cfg.target, N, mass, cfg.seed)
    t0 = time.time()
    fraction, plan, sol = semidiscrete_agreement(
        domain, K, target, grid_m, tol=cfg.tol, seed=cfg.seed)
    ceiling = agreement_ceiling(domain, K, target, grid_m, tol=cfg.tol)
    cert = monotonicity_certificate(plan)
    plan.to_csv(os.path.join(out, "samples.csv"))
    solution_to_csv(sol, os.path.join(out, "solution.csv"))
    verdicts = {
        "converged": bool(sol.report.converged),
        "agreement": bool(fraction >= threshold),
        "monotonicity": bool(cert >= -1e-10),
        "dual_feasibility": bool(plan.min_reduced_cost >= -1e-10),
    }
    meas = {
        "agreement_fraction": fraction, "agreement_ceiling": ceiling,
        "threshold": threshold, "monotonicity_certificate": cert,
        "plan_cost": plan.cost, "grid_m": grid_m,
        "max_support_slack": plan.max_support_slack,
        "min_reduced_cost": plan.min_reduced_cost,
        "n_plan_entries": len(plan.entries),
    }
    return verdicts, meas, {"oracle_s": time.time() - t0}


def _cmd_lemmas(cfg, out):
    p = cfg.params
    domain = build_domain(cfg.domain) if cfg.domain is not None \
        else DiskDomain(np.zeros(2), 1.0)
    if not isinstance(domain, DiskDomain):
        raise ConfigError("config.domain: the lemma checks run on a disk")
    trials = _get(p, "trials", "config.params", int, default=100)
    n_points = _get(p, "n_points", "config.params", int, default=4000)
    thetas = _get(p, "thetas", "config.params", list,
                  default=[0.05, 0.1, 0.2, 0.4])
    estar_samples = _get(p, "estar_samples", "config.params", int,
                         default=2000000)
    dim = _get(p, "dimension", "config.params", int, default=2)
    if trials < 1:
        raise ConfigError("config.params.trials: must be at least 1")

    t0 = time.time()
    cone = cone_inclusion_check(domain, trials, n_points=n_points,
                                seed=cfg.seed, out_dir=out)
    geo = boundary_geometry(domain)
    d0 = d0_threshold(geo)
    spec = make_cone_spec(
        domain, domain.center + np.array([domain.radius - d0, 0.0]), geo)
    t_values = _get(p, "t_values", "config.params", list, default=None)
    if t_values is None:
        t_values = [f * d0 for f in (0.25, 0.5, 1.0, 1.5, 1.99)]
    sl = slice_estimate_check(domain, t_values, spec, out_dir=out)
    estar = []
    for th in thetas:
        if not 0 < th < 1 / math.sqrt(6.0):
            raise ConfigError(
                "config.params.thetas: each theta must lie in "
                "(0, 1/sqrt(6))")
        estar.append(estar_volume_check(th, dim, estar_samples,
                                        seed=cfg.seed))
    with open(os.path.join(out, "estar_volume_samples.csv"), "w") as fh:
        fh.write("theta,measured,bound,stderr\n")
        for r in estar:
            fh.write(",".join(repr(v) for v in
                              (r.theta, r.measured, r.bound, r.stderr))
                     + "\n")
    os.replace(os.path.join(out, "cone_inclusion_samples.csv"),
               os.path.join(out, "samples.csv"))
    verdicts = {
        "cone_inclusion": bool(cone.max_excess == 0.0),
        "cone_negative_control": bool(cone.negative_control_excess > 0.0),
        "slice_estimate": bool(sl.all_ok),
        "estar_volume": bool(all(r.measured - 3.0 * r.stderr >= r.bound
                                 for r in estar)),
    }
    meas = {
        "trials": trials, "cone_max_excess": cone.max_excess,
        "cone_negative_control_excess": cone.negative_control_excess,
        "slice_bound": sl.bound, "d0": sl.d0,
        "slice_rows": [[row[0], row[1], row[3], row[4]] for row in sl.rows],
        "estar": [{"theta": r.theta, "measured": r.measured,
                   "bound": r.bound, "stderr": r.stderr} for r in estar],
    }
    return verdicts, meas, {"lemmas_s": time.time() - t0}


_PIPELINES = {
    "solve": _cmd_solve,
    "sphere-benchmark": _cmd_sphere,
    "blowup": _cmd_blowup,
    "oracle-compare": _cmd_oracle,
    "lemmas": _cmd_lemmas,
    "export": _cmd_export,
}


# ---------------------------------------------------------------------------
# report emission


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_report(out, cfg, verdicts, measurements, timings, error=None):
    artifacts = {}
    for name in sorted(os.listdir(out)):
        path = os.path.join(out, name)
        if name == "report.json" or not os.path.isfile(path):
            continue
        artifacts[name] = {"sha256": _sha256(path),
                           "bytes": os.path.getsize(path)}
    report = {
        "command": cfg.command,
        "config": cfg.to_dict(),
        "verdicts": verdicts,
        "passed": bool(verdicts) and all(verdicts.values()),
        "measurements": measurements,
        "artifacts": artifacts,
        "timings": timings,
    }
    if error is not None:
        report["error"] = error
    path = os.path.join(out, "report.json")
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return report


def run(config):
    """Execute one configured pipeline.  Returns the process exit code and
    leaves report.json plus the command's artifacts in the output
    directory; partial artifacts survive a failed run."""
    cfg = config if isinstance(config, ExperimentConfig) \
        else ExperimentConfig.from_dict(config)
    out = cfg.out
    os.makedirs(out, exist_ok=True)
    t0 = time.time()
    try:
        verdicts, meas, times = _PIPELINES[cfg.command](cfg, out)
    except ConfigError:
        raise
    except MassBalanceError as exc:
        raise ConfigError(f"config.target: {exc}")
    except QuadratureError as exc:
        raise ConfigError(f"config.density: {exc}")
    except ConvergenceError as exc:
        times = {"total_s": time.time() - t0}
        _write_report(out, cfg, {"converged": False}, {}, times,
                      error=str(exc))
        print(f"{cfg.command}: NO CONVERGENCE ({exc})", file=sys.stderr)
        return 3
    times["total_s"] = time.time() - t0
    report = _write_report(out, cfg, verdicts, meas, times)
    status = "PASS" if report["passed"] else "FAIL"
    print(f"{cfg.command}: {status} "
          f"({os.path.join(out, 'report.json')})")
    if not verdicts.get("converged", True):
        return 3
    return 0 if report["passed"] else 1


def main(argv=None):
    ap = argparse.ArgumentParser(
        prog="hemiot",
        description="Semi-discrete curvature-prescription runs: solve, "
                    "benchmark, and verification pipelines driven by a "
                    "JSON config.")
    ap.add_argument("--config", required=True, help="path to a JSON config")
    ap.add_argument("--out", help="output directory (overrides config)")
    ap.add_argument("--threads", type=int,
                    help="worker cap (orchestration is sequential)")
    ap.add_argument("--seed", type=int, help="seed override")
    ap.add_argument("--tol", type=float, help="solver tolerance override")
    args = ap.parse_args(argv)

    try:
        with open(args.config) as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        print(f"validation error: config: file not found: {args.config}",
              file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"validation error: config: invalid JSON ({exc})",
              file=sys.stderr)
        return 2

    if args.out is not None:
        raw["out"] = args.out
    if args.threads is not None:
        raw["threads"] = args.threads
    if args.seed is not None:
        raw["seed"] = args.seed
    if args.tol is not None:
        raw["tol"] = args.tol

    try:
        return run(raw)
    except ConfigError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
