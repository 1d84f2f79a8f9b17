"""Numerical certification of the comparability statements.

Each check evaluates a ratio field (kernel over envelope, quadrature over
closed form, estimate over comparator, ...) on a grid or a seeded sample,
fits the empirical constants as the extreme ratios and compares them with
a budget.  Checks with a tolerance instead of a budget report their
error in the same structure.
"""
import csv
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .bounds import (BoundParams, chord_integral, grube_comparator, m_beta,
                     moment_integral, n_beta)
from .errors import ConfigurationError, KSKError
from .geometry import PhasePoint, dilate
from .kernel import (GridSpec, density_derivatives, density_grid, density_point,
                     kolmogorov_density)
from .levy import GaussianSurrogate, LevyKernel, decompose_vectors, iso_constant
from .simulate import (Cube, SimConfig, conditional_moment, cube_chord_ratio,
                       empirical_char_function, empirical_density,
                       large_jump_cube_probability, simulate_endpoints,
                       small_jump_tail_check)

__all__ = ["CheckSpec", "ComparabilityReport", "CHECKS", "default_spec",
           "run_check", "run_suite", "emit_report"]

CHECKS = (
    "kolmogorov_oracle", "scaling_exact", "theorem_envelope", "gradient_log",
    "chord_lemma", "moment_lemma", "large_jump_lemma", "decompose_lemma",
    "simulation_consistency", "conditional_moment", "grube_d1", "small_jump_tail",
)

_DEFAULTS = {
    "kolmogorov_oracle": ({"d": 1, "t": [0.5, 1.0, 2.0], "extent": 3.0, "step": 0.25},
                          {"tolerance": 1e-6}),
    "scaling_exact": ({"d": 1, "alpha": [0.5, 1.0, 1.5], "lam": 2.0, "t": 0.5,
                       "t_self": [0.5, 2.0], "n_points": 200, "box": 3.0},
                      {"tolerance": 1e-4}),
    "theorem_envelope": ({"d": 1, "alpha": [0.5, 1.0, 1.5], "t": 1.0, "x_max": 40.0,
                          "v_max": 10.0, "x_step": 1.0, "v_step": 0.5, "kappa_probe": [1.0, 2.0, 4.0]},
                         {"budget": 1e3, "slope": 0.15, "noise_floor": 1e-9}),
    "gradient_log": ({"d": 1, "alpha": [0.5, 1.0, 1.5], "t": [0.5, 1.0, 2.0], "x_max": 40.0,
                      "v_max": 10.0, "x_step": 1.0, "v_step": 0.5},
                     {"stability": 3.0, "noise_floor": 1e-9}),
    "chord_lemma": ({"d": [1, 2, 3], "beta_offset": [0.5, 1.0, 1.5], "n_points": 10_000},
                    {"budget": 50.0, "slice_tolerance": 1e-10}),
    "moment_lemma": ({"d": [1, 2], "beta_offset": 1.5, "q": [0.0, 1.0], "v_range": [10.0, 160.0],
                      "n_v": 5},
                     {"slope": 0.1}),
    "large_jump_lemma": ({"d": 1, "alpha": 1.0, "n_points": 50, "z_range": [5.0, 30.0],
                          "n_max": 8, "m_per_term": 50_000, "target_rel_stderr": 0.07,
                          "max_samples": 4_000_000},
                         {"budget": 100.0, "rel_stderr": 0.1, "truncation": 1e-6}),
    "decompose_lemma": ({"d": [1, 2, 3], "n_points": 100_000, "n_range": [2, 20]},
                        {"sum_tolerance": 1e-12}),
    "simulation_consistency": ({"d": 1, "alpha": 1.5, "n_paths": 1_000_000, "eps": 0.1,
                                "x_max": 10.0, "v_max": 6.0, "boxes": 20, "n_freq": 20},
                               {"sigmas": 4.0, "box_fraction": 0.95}),
    "conditional_moment": ({"d": 1, "alpha": 1.5, "n_paths": 10_000_000, "eps": 0.1,
                            "q": [0.5, 1.0], "v_range": [2.0, 30.0], "n_v": 8, "h": 0.5},
                           {"slope": 0.15}),
    "grube_d1": ({"d": 1, "alpha": [0.5, 1.0, 1.5], "extent": 100.0, "step": 1.0},
                 {"budget": 50.0}),
    "small_jump_tail": ({"d": 1, "alpha": 1.5, "n_paths": 1_000_000, "eps": 0.1,
                         "radii": [0, 1, 2, 3, 4, 5, 6, 7, 8]},
                        {}),
}


@dataclass
class CheckSpec:
    """A named check with parameters and thresholds (defaults filled in)."""

    name: str
    params: dict = field(default_factory=dict)
    thresholds: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.name not in _DEFAULTS:
            raise ConfigurationError(f"unknown check {self.name!r}")
        p, th = _DEFAULTS[self.name]
        unknown = set(self.params) - set(p)
        unknown |= set(self.thresholds) - set(th)
        if unknown:
            raise ConfigurationError(f"unknown keys for {self.name}: {sorted(unknown)}")
        self.params = {**p, **self.params}
        self.thresholds = {**th, **self.thresholds}


def default_spec(name, seed=0, **params):
    return CheckSpec(name, params=params, seed=seed)


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    return obj


@dataclass
class ComparabilityReport:
    """Outcome of one check.

    ``passed`` holds iff every criterion passed and no point evaluation
    failed.  ``criteria`` lists each sub-check with its value and
    threshold.
    """

    check: str
    params: dict
    domain: str
    n_points: int
    ratio_stats: dict
    fitted_constants: dict
    passed: bool
    seed: int
    runtime_s: float
    criteria: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def to_dict(self):
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return _clean(d)

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["passed"] = d.pop("pass")
        return cls(**d)


def _ratio_stats(r):
    r = np.asarray(r, dtype=float)
    r = r[np.isfinite(r)]
    if len(r) == 0:
        return {k: float("nan") for k in ("min", "p1", "p50", "p99", "max")}
    q = np.percentile(r, [0, 1, 50, 99, 100])
    return dict(zip(("min", "p1", "p50", "p99", "max"), map(float, q)))


def _crit(name, value, threshold, ok):
    return {"name": name, "value": value, "threshold": threshold, "pass": bool(ok)}


def _slope(x, y, w=None):
    return float(np.polyfit(np.asarray(x, float), np.asarray(y, float), 1,
                            w=None if w is None else np.asarray(w, float))[0])


def _phase_grid(p):
    xs = np.arange(-p["x_max"], p["x_max"] + 1e-9, p["x_step"])
    vs = np.arange(-p["v_max"], p["v_max"] + 1e-9, p["v_step"])
    X, V = np.meshgrid(xs, vs, indexing="ij")
    return X.ravel(), V.ravel()


def _field(k, t, X, V, orders, failures):
    out = np.full((len(X), len(orders)), np.nan)
    for i, (x, v) in enumerate(zip(X, V)):
        try:
            out[i] = density_derivatives(k, t, (x, v), orders)
        except KSKError as exc:
            failures.append({"z": [float(x), float(v)], "t": t, "error": str(exc)})
    return out


# ---------------------------------------------------------------- checks

def _kolmogorov_oracle(spec, rng):
    p, th = spec.params, spec.thresholds
    g = GaussianSurrogate(d=1)
    axis = np.arange(-p["extent"], p["extent"] + 1e-9, p["step"])
    ratios, failures = [], []
    for t in p["t"]:
        for x in axis:
            for v in axis:
                try:
                    ratios.append(density_point(g, t, (x, v)) / kolmogorov_density((0, 0), (x, v), t))
                except KSKError as exc:
                    failures.append({"z": [x, v], "t": t, "error": str(exc)})
    err = float(np.max(np.abs(np.asarray(ratios) - 1)))
    crit = [_crit("max_rel_error", err, th["tolerance"], err <= th["tolerance"])]
    return dict(domain=f"|x|,|v|<={p['extent']}, t in {p['t']}", ratios=ratios,
                criteria=crit, failures=failures, details={"max_rel_error": err})


def _scaling_exact(spec, rng):
    p, th = spec.params, spec.thresholds
    lam, t = p["lam"], p["t"]
    ratios, failures, det = [], [], {}
    worst = 0.0
    for a in p["alpha"]:
        k = LevyKernel(1, a)
        kl = k.scaled(lam)
        Z = rng.uniform(-p["box"], p["box"], size=(p["n_points"], 2))
        e_lam, e_self = 0.0, 0.0
        for x, v in Z:
            try:
                lhs = density_point(kl, t, (x, v))
                rhs = lam * density_point(k, lam * t, (lam * x, v))
                e_lam = max(e_lam, abs(lhs / rhs - 1))
                ratios.append(lhs / rhs)
                for ts in p["t_self"]:
                    z = PhasePoint([x], [v])
                    lhs = density_point(k, ts, z)
                    rhs = ts ** (-2 / a - 1) * density_point(k, 1.0, dilate(z, ts, a))
                    e_self = max(e_self, abs(lhs / rhs - 1))
                    ratios.append(lhs / rhs)
            except KSKError as exc:
                failures.append({"alpha": a, "z": [x, v], "error": str(exc)})
        det[f"alpha={a}"] = {"lambda_scaling_max_rel_error": e_lam, "self_similarity_max_rel_error": e_self}
        worst = max(worst, e_lam, e_self)
    crit = [_crit("max_rel_error", worst, th["tolerance"], worst <= th["tolerance"])]
    return dict(domain=f"{p['n_points']} uniform z in [-{p['box']},{p['box']}]^2 per alpha",
                ratios=ratios, criteria=crit, failures=failures, details=det)


def _theorem_envelope(spec, rng):
    p, th = spec.params, spec.thresholds
    X, V = _phase_grid(p)
    nz = np.hypot(X, V)
    ratios, crit, failures, det = [], [], [], {}
    for a in p["alpha"]:
        k = LevyKernel(1, a)
        dens = _field(k, p["t"], X, V, [(0, 0)], failures)[:, 0]
        env = n_beta(np.column_stack([X, V]), BoundParams(1 + a, 1))
        keep = dens >= th["noise_floor"] * np.nanmax(dens)
        r = dens[keep] / env[keep]
        spread = float(r.max() / r.min())
        slope = _slope(np.log1p(nz[keep]), np.log(r))
        ratios.extend(r)
        crit.append(_crit(f"alpha={a}: max/min ratio", spread, th["budget"], spread <= th["budget"]))
        crit.append(_crit(f"alpha={a}: |slope|", abs(slope), th["slope"], abs(slope) <= th["slope"]))
        probe = {}
        for kap in p["kappa_probe"]:
            # constant kappa rescales time: p^{kappa nu}_1 = p^{nu}_{kappa} (d = 1)
            sub = slice(None, None, 7)
            dk = _field(k.scaled(kap), p["t"], X[sub], V[sub], [(0, 0)], failures)[:, 0]
            ek = n_beta(np.column_stack([X[sub], V[sub]]), BoundParams(1 + a, 1))
            ok = dk >= th["noise_floor"] * np.nanmax(dk)
            rk = dk[ok] / ek[ok]
            probe[str(kap)] = {"C_lower": float(rk.min()), "C_upper": float(rk.max())}
        det[f"alpha={a}"] = {"spread": spread, "slope": slope,
                             "C_lower": float(r.min()), "C_upper": float(r.max()),
                             "excluded_fraction": float(1 - keep.mean()),
                             "kappa_probe": probe}
    return dict(domain=f"|x|<={p['x_max']}, |v|<={p['v_max']}, t={p['t']}",
                ratios=ratios, criteria=crit, failures=failures, details=det)


def _gradient_log(spec, rng):
    p, th = spec.params, spec.thresholds
    X, V = _phase_grid(p)
    ratios, crit, failures, det = [], [], [], {}
    for a in p["alpha"]:
        k = LevyKernel(1, a)
        cx, cv = [], []
        for t in p["t"]:
            f = _field(k, t, X, V, [(0, 0), (1, 0), (0, 1)], failures)
            keep = f[:, 0] >= th["noise_floor"] * np.nanmax(f[:, 0])
            gx = t ** (1 / a + 1) * np.abs(f[keep, 1] / f[keep, 0])
            gv = t ** (1 / a) * np.abs(f[keep, 2] / f[keep, 0])
            cx.append(float(gx.max()))
            cv.append(float(gv.max()))
            ratios.extend(gx)
            ratios.extend(gv)
        sx, sv = max(cx) / min(cx), max(cv) / min(cv)
        det[f"alpha={a}"] = {"C_x_by_t": cx, "C_v_by_t": cv, "C_x": max(cx), "C_v": max(cv)}
        crit.append(_crit(f"alpha={a}: x-constant stability", sx, th["stability"], sx <= th["stability"]))
        crit.append(_crit(f"alpha={a}: v-constant stability", sv, th["stability"], sv <= th["stability"]))
    return dict(domain=f"|x|<={p['x_max']}, |v|<={p['v_max']}, t in {p['t']}",
                ratios=ratios, criteria=crit, failures=failures, details=det)


def _random_phase(rng, n, d):
    scale = 10.0 ** rng.uniform(-1, 3, size=(n, 1))
    return rng.standard_normal((n, 2 * d)) * scale


def _chord_lemma(spec, rng):
    p, th = spec.params, spec.thresholds
    ratios, crit, failures, det = [], [], [], {}
    for d in p["d"]:
        for off in p["beta_offset"]:
            bp = BoundParams(d + off, d)
            Z = _random_phase(rng, p["n_points"], d)
            r = np.empty(len(Z))
            for i, z in enumerate(Z):
                try:
                    r[i] = chord_integral(z, bp) * (1 + np.linalg.norm(z)) / m_beta(z, bp)
                except KSKError as exc:
                    r[i] = np.nan
                    failures.append({"d": d, "beta": d + off, "z": z.tolist(), "error": str(exc)})
            # v = 0 slice: the chord integral is exact
            Zs = _random_phase(rng, 200, d)
            Zs[:, d:] = 0.0
            slice_err = max(abs(chord_integral(z, bp) * (1 + np.linalg.norm(z)) / m_beta(z, bp) - 1)
                            for z in Zs)
            lo, hi = float(np.nanmin(r)), float(np.nanmax(r))
            C = max(hi, 1 / lo)
            tag = f"d={d}, beta={d + off}"
            crit.append(_crit(f"{tag}: batch constant C", C, th["budget"], C <= th["budget"]))
            crit.append(_crit(f"{tag}: v=0 slice error", slice_err, th["slice_tolerance"],
                              slice_err <= th["slice_tolerance"]))
            det[tag] = {"C_lower": lo, "C_upper": hi}
            ratios.extend(r)
    return dict(domain=f"{p['n_points']} log-scale random z per (d, beta)", ratios=ratios,
                criteria=crit, failures=failures, details=det)


def _moment_lemma(spec, rng):
    p, th = spec.params, spec.thresholds
    crit, failures, det, ratios = [], [], {}, []
    vs = np.geomspace(p["v_range"][0], p["v_range"][1], p["n_v"])
    for d in p["d"]:
        beta = d + p["beta_offset"]
        bp = BoundParams(beta, d)
        crit_q = 2 * beta - d
        flags_ok = True
        for q in (0.0, 1.0, crit_q - 0.5, crit_q, crit_q + 0.5):
            res = moment_integral(np.zeros(d), q, bp) if q < crit_q else moment_integral(np.ones(d), q, bp)
            flags_ok &= res.divergent == (q >= crit_q)
        crit.append(_crit(f"d={d}: divergence flag", flags_ok, True, flags_ok))
        for q in p["q"]:
            vals = []
            for v in vs:
                vec = np.zeros(d)
                vec[0] = v
                vals.append(moment_integral(vec, q, bp).value)
            vals = np.asarray(vals)
            s = _slope(np.log1p(vs), np.log(vals))
            dev = abs(s - (q - beta))
            ratios.extend(vals * (1 + vs) ** (beta - q))
            det[f"d={d}, q={q}"] = {"slope": s, "expected": q - beta}
            crit.append(_crit(f"d={d}, q={q}: |slope-(q-beta)|", dev, th["slope"], dev <= th["slope"]))
    return dict(domain=f"|v| in {p['v_range']}", ratios=ratios, criteria=crit,
                failures=failures, details=det)


def _large_jump_lemma(spec, rng):
    p, th = spec.params, spec.thresholds
    k = LevyKernel(p["d"], p["alpha"])
    n = p["n_points"]
    rad = rng.uniform(*p["z_range"], size=n)
    ang = rng.uniform(0, 2 * np.pi, size=n)
    Z = np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])
    ratios, rel, points = [], [], []
    trunc = None
    for z in Z:
        cube = Cube(PhasePoint([z[0]], [z[1]]), 1.0)
        est = large_jump_cube_probability(k, cube, p["n_max"], p["m_per_term"], rng,
                                          target_rel_stderr=p["target_rel_stderr"],
                                          max_samples=p["max_samples"])
        trunc = est.truncation_bound
        r = cube_chord_ratio(k, cube.center, est.estimate)
        ratios.append(r)
        rel.append(est.stderr / est.estimate if est.estimate > 0 else np.inf)
        points.append({"z": z.tolist(), "estimate": est.estimate, "stderr": est.stderr, "ratio": r})
    ratios = np.asarray(ratios)
    pos = ratios[ratios > 0]
    C = float(max(pos.max(), 1 / pos.min())) if len(pos) == len(ratios) else math.inf
    crit = [_crit("batch constant C", C, th["budget"], C <= th["budget"]),
            _crit("max relative stderr", float(max(rel)), th["rel_stderr"], max(rel) < th["rel_stderr"]),
            _crit("Poisson truncation bound", trunc, th["truncation"], trunc < th["truncation"])]
    return dict(domain=f"{n} z with |z| in {p['z_range']}", ratios=ratios, criteria=crit,
                failures=[], details={"points": points, "truncation_bound": trunc})


def _decompose_lemma(spec, rng):
    p, th = spec.params, spec.thresholds
    crit, ratios, det = [], [], {}
    for d in p["d"]:
        ns = rng.integers(p["n_range"][0], p["n_range"][1] + 1, size=p["n_points"])
        U = rng.standard_normal((p["n_points"], d))
        U *= (ns * rng.random(p["n_points"]) ** (1 / d) / np.linalg.norm(U, axis=1))[:, None]
        lo, hi, err = np.inf, 0.0, 0.0
        for n in np.unique(ns):
            sel = ns == n
            parts = decompose_vectors(U[sel], int(n))
            norms = np.linalg.norm(parts, axis=2)
            lo, hi = min(lo, norms.min()), max(hi, norms.max())
            err = max(err, float(np.linalg.norm(parts.sum(axis=1) - U[sel], axis=1).max()))
            ratios.extend(norms.ravel()[:100])
        ok = lo >= 1 / 3 - 1e-15 and hi <= 1 + 1e-15
        crit.append(_crit(f"d={d}: norms in [1/3,1]", [float(lo), float(hi)], [1 / 3, 1.0], ok))
        crit.append(_crit(f"d={d}: |sum - u|", err, th["sum_tolerance"], err <= th["sum_tolerance"]))
        det[f"d={d}"] = {"min_norm": float(lo), "max_norm": float(hi), "max_sum_error": err}
    return dict(domain=f"{p['n_points']} random (n, u) per d", ratios=ratios, criteria=crit,
                failures=[], details=det)


def box_grid(k, t, x_max, v_max, boxes, sub=4):
    """Direct-inversion DensityGrid whose nodes contain the box edges."""
    hx, hv = 2 * x_max / (boxes * sub), 2 * v_max / (boxes * sub)
    spec = GridSpec((x_max + hx, v_max + hv), (hx, hv))
    return density_grid(k, t, spec, method="direct")


def _simulation_consistency(spec, rng):
    p, th = spec.params, spec.thresholds
    k = LevyKernel(1, p["alpha"])
    cfg = SimConfig(seed=spec.seed, n_paths=p["n_paths"], small_jump_cutoff=p["eps"])
    X, V = simulate_endpoints(k, cfg)
    xe = np.linspace(-p["x_max"], p["x_max"], p["boxes"] + 1)
    ve = np.linspace(-p["v_max"], p["v_max"], p["boxes"] + 1)
    G = box_grid(k, 1.0, p["x_max"], p["v_max"], p["boxes"])
    model = G.box_probabilities((xe, ve))
    emp = empirical_density(np.column_stack([X, V]), [xe, ve])
    zs = emp.z_scores(model)
    frac = float(np.mean(np.abs(zs) <= th["sigmas"]))
    xi = np.linspace(0.1, 3.0, p["n_freq"])
    cf, se_re, se_im = empirical_char_function(V, xi[:, None])
    exact = np.exp(-iso_constant(1, p["alpha"]) * xi ** p["alpha"])
    zc = np.maximum(np.abs(cf.real - exact) / se_re, np.abs(cf.imag) / se_im)
    crit = [_crit("fraction of boxes within 4 sigma", frac, th["box_fraction"], frac >= th["box_fraction"]),
            _crit("max |z| of char. function", float(zc.max()), th["sigmas"], zc.max() <= th["sigmas"])]
    return dict(domain=f"{p['boxes']}x{p['boxes']} boxes on |x|<={p['x_max']}, |v|<={p['v_max']}",
                ratios=(emp.probability / np.where(model > 0, model, np.nan)).ravel(), criteria=crit,
                failures=[], details={"box_z_max": float(np.abs(zs).max()), "grid_mass": G.mass,
                                      "outside": emp.outside, "cf_z": zc})


def _conditional_moment(spec, rng):
    p, th = spec.params, spec.thresholds
    k = LevyKernel(1, p["alpha"])
    cfg = SimConfig(seed=spec.seed, n_paths=p["n_paths"], small_jump_cutoff=p["eps"])
    X, V = simulate_endpoints(k, cfg)
    # (X, V) and (-X, -V) have the same law: fold to double the sample
    flip = V[:, 0] < 0
    X[flip] *= -1
    V[flip] *= -1
    vs = np.geomspace(p["v_range"][0], p["v_range"][1], p["n_v"])
    crit, det, ratios = [], {}, []
    for q in p["q"]:
        est = [conditional_moment(X, V, v, p["h"], q) for v in vs]
        m = np.array([e[0] for e in est])
        se = np.array([e[1] for e in est])
        s = _slope(np.log1p(vs), np.log(m))
        dev = abs(s - q)
        det[f"q={q}"] = {"v": vs, "moment": m, "stderr": se, "counts": [e[2] for e in est], "slope": s,
                         "precision_weighted_slope": _slope(np.log1p(vs), np.log(m), w=m / se)}
        ratios.extend(m / (1 + vs) ** q)
        crit.append(_crit(f"q={q}: |slope-q|", dev, th["slope"], dev <= th["slope"]))
    return dict(domain=f"|v| in {p['v_range']}, window {p['h']}", ratios=ratios, criteria=crit,
                failures=[], details=det)


def _grube_d1(spec, rng):
    p, th = spec.params, spec.thresholds
    axis = np.arange(-p["extent"], p["extent"] + 1e-9, p["step"])
    Xg, Vg = np.meshgrid(axis, axis, indexing="ij")
    Z = np.column_stack([Xg.ravel(), Vg.ravel()])
    crit, ratios, det = [], [], {}
    for a in p["alpha"]:
        r = n_beta(Z, BoundParams(1 + a, 1)) / grube_comparator(Z, a, form="d1")
        spread = float(r.max() / r.min())
        det[f"alpha={a}"] = {"C_lower": float(r.min()), "C_upper": float(r.max()), "spread": spread}
        crit.append(_crit(f"alpha={a}: max/min ratio", spread, th["budget"], spread <= th["budget"]))
        ratios.extend(r)
    return dict(domain=f"|x|,|v|<={p['extent']}", ratios=ratios, criteria=crit, failures=[], details=det)


def _small_jump_tail(spec, rng):
    p = spec.params
    k = LevyKernel(1, p["alpha"])
    cfg = SimConfig(seed=spec.seed, n_paths=p["n_paths"], small_jump_cutoff=p["eps"])
    rep = small_jump_tail_check(k, cfg, p["radii"])
    r0 = rep.probability[np.asarray(p["radii"]) == 0]
    crit = [_crit("P(|Z| > 0) = 1", float(r0[0]) if len(r0) else None, 1.0, len(r0) == 0 or r0[0] == 1.0),
            _crit("monotone in R", rep.monotone, True, rep.monotone),
            _crit("slope vs (R+2)log(R+2)", rep.slope, 0.0, rep.slope < 0)]
    return dict(domain=f"R in {p['radii']}", ratios=rep.probability, criteria=crit, failures=[],
                details={"probability": rep.probability, "censored": rep.censored,
                         "local_slopes": rep.local_slopes, "steepening": rep.steepening})


_RUNNERS = {
    "kolmogorov_oracle": _kolmogorov_oracle,
    "scaling_exact": _scaling_exact,
    "theorem_envelope": _theorem_envelope,
    "gradient_log": _gradient_log,
    "chord_lemma": _chord_lemma,
    "moment_lemma": _moment_lemma,
    "large_jump_lemma": _large_jump_lemma,
    "decompose_lemma": _decompose_lemma,
    "simulation_consistency": _simulation_consistency,
    "conditional_moment": _conditional_moment,
    "grube_d1": _grube_d1,
    "small_jump_tail": _small_jump_tail,
}


def run_check(spec):
    """Run one check and return its :class:`ComparabilityReport`."""
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed, spawn_key=(CHECKS.index(spec.name),)))
    t0 = time.perf_counter()
    try:
        out = _RUNNERS[spec.name](spec, rng)
    except KSKError as exc:
        out = dict(domain="", ratios=[], criteria=[], failures=[{"error": str(exc)}], details={})
    ratios = np.asarray(out["ratios"], dtype=float)
    stats = _ratio_stats(ratios)
    passed = bool(out["criteria"]) and all(c["pass"] for c in out["criteria"]) and not out["failures"]
    return ComparabilityReport(
        check=spec.name, params=_clean(spec.params), domain=out["domain"],
        n_points=int(np.isfinite(ratios).sum()), ratio_stats=stats,
        fitted_constants={"C_lower": stats["min"], "C_upper": stats["max"]},
        passed=passed, seed=int(spec.seed), runtime_s=time.perf_counter() - t0,
        criteria=_clean(out["criteria"]), failures=_clean(out["failures"]),
        details=_clean(out["details"]))


def run_suite(specs, n_jobs=1):
    """Run several checks, in parallel processes when ``n_jobs > 1``."""
    specs = list(specs)
    if n_jobs and n_jobs > 1 and len(specs) > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as ex:
            return list(ex.map(run_check, specs))
    return [run_check(s) for s in specs]


def emit_report(reports, outdir, header=None):
    """Write one JSON file per report plus a CSV summary.

    File names embed the check name and the seed.  ``header`` is a list of
    lines stored under ``_header`` in JSON and as ``#`` lines in the CSV.
    Returns the written paths and the exit status (1 if any check failed).
    """
    if not reports:
        raise ConfigurationError("no reports to write")
    os.makedirs(outdir, exist_ok=True)
    head = list(header) if header else [f"ksk {__version__}"]
    paths = []
    for r in reports:
        path = os.path.join(outdir, f"{r.check}_seed{r.seed}.json")
        with open(path, "w") as fh:
            json.dump({"_header": head, **r.to_dict()}, fh, indent=2)
        paths.append(path)
    seeds = sorted({r.seed for r in reports})
    path = os.path.join(outdir, f"summary_seed{'-'.join(map(str, seeds))}.csv")
    with open(path, "w", newline="") as fh:
        for line in head:
            fh.write(f"# {line}\n")
        w = csv.writer(fh)
        w.writerow(["check", "pass", "n_points", "ratio_min", "ratio_p50", "ratio_max",
                    "C_lower", "C_upper", "seed", "runtime_s"])
        for r in reports:
            s = r.ratio_stats
            w.writerow([r.check, r.passed, r.n_points, s["min"], s["p50"], s["max"],
                        r.fitted_constants["C_lower"], r.fitted_constants["C_upper"], r.seed,
                        f"{r.runtime_s:.3f}"])
    paths.append(path)
    return paths, int(any(not r.passed for r in reports))


def load_report(path):
    with open(path) as fh:
        d = json.load(fh)
    d.pop("_header", None)
    return ComparabilityReport.from_dict(d)
