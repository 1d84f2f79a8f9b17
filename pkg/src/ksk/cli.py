"""Command-line front end.

Every option has a configuration key ``section.name``.  Values come from
built-in defaults, then an optional ``--config`` file of ``key=value``
lines, then flags; the effective configuration and the source of each
value are written at the top of every output file.  Any output file can
be passed back as ``--config``: its ``# config`` header lines are read.
"""
import argparse
import csv
import os
import sys
import time

import numpy as np

from . import __version__
from .errors import AccuracyError, ConfigurationError, DomainError, KSKError, UnsupportedError

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_ACCURACY = 0, 1, 2, 3
COMMANDS = ("eval", "grid", "simulate", "bounds", "verify", "figure")
KINDS = ("constant", "anisotropic-even", "non-symmetric", "gaussian")


class UsageError(Exception):
    pass


def _floats(s):
    return [float(p) for p in str(s).replace(";", ",").split(",") if p.strip()]


def _points(s):
    """``"2,3"`` or ``"2,3;4,5"`` -> list of float lists."""
    return [_floats(chunk) for chunk in str(s).split(";") if chunk.strip()]


def _bool(s):
    if isinstance(s, bool):
        return s
    if str(s).lower() in ("1", "true", "yes", "on"):
        return True
    if str(s).lower() in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


# key, type, default, commands (None = all), help
_OPTIONS = [
    ("kernel.d", int, 1, None, "dimension of position and velocity"),
    ("kernel.alpha", float, 1.5, None, "stability index in (0, 2)"),
    ("kernel.kind", str, "constant", None, "jump kernel: " + ", ".join(KINDS)),
    ("kernel.kappa", float, 1.0, None, "constant intensity for kind=constant"),
    ("kernel.kappa0", float, None, None, "lower intensity bound (checked against kappa1)"),
    ("kernel.kappa1", float, None, None, "upper intensity bound"),
    ("run.t", float, 1.0, None, "time"),
    ("run.seed", int, 0, None, "random seed"),
    ("run.out", str, "ksk-out", None, "output directory"),
    ("run.threads", int, None, None, "worker cap (fallback: KSK_THREADS)"),
    ("eval.z", str, "0,0", ("eval", "bounds"), "points x1..xd,v1..vd; ';' separates points"),
    ("eval.method", str, "auto", ("eval",), "inversion route"),
    ("eval.gradient", _bool, False, ("eval",), "also evaluate the spatial gradient"),
    ("eval.rtol", float, None, ("eval",), "check accuracy by refinement"),
    ("grid.x_extent", float, 10.0, ("grid", "figure"), "half-width in x"),
    ("grid.v_extent", float, 5.0, ("grid", "figure"), "half-width in v"),
    ("grid.x_step", float, 0.25, ("grid", "figure"), "x spacing"),
    ("grid.v_step", float, 0.25, ("grid", "figure"), "v spacing"),
    ("grid.method", str, "auto", ("grid", "figure"), "fft, direct, or auto (fft when the step allows)"),
    ("grid.pad", int, 2, ("grid", "figure"), "fft padding factor"),
    ("grid.format", str, "csv", ("grid",), "csv or binary"),
    ("simulate.paths", int, 1000, ("simulate",), "number of paths"),
    ("simulate.eps", float, 0.01, ("simulate",), "small-jump cutoff"),
    ("simulate.scheme", str, "gaussian_compensate", ("simulate",), "small-jump scheme"),
    ("simulate.mesh", int, 1000, ("simulate",), "time steps of a plotted path"),
    ("bounds.beta", float, None, ("bounds",), "envelope exponent (default d + alpha)"),
    ("verify.suite", str, "all", ("verify",), "'all' or comma-separated check names"),
    ("figure.kind", str, "envelope", ("figure",), "envelope or path"),
]
_BY_KEY = {o[0]: o for o in _OPTIONS}


_FLAG_NAMES = {"kernel.kind": "--kernel"}


def _flag(key):
    if key in _FLAG_NAMES:
        return _FLAG_NAMES[key]
    return "--" + key.split(".", 1)[1].replace("_", "-")


def _build_parser():
    p = argparse.ArgumentParser(prog="ksk", description="Kinetic stable-like heat kernels.")
    p.add_argument("--version", action="version", version=f"ksk {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for cmd in COMMANDS:
        sp = sub.add_parser(cmd)
        sp.add_argument("--config", help="key=value file (or a previous output file)")
        for key, typ, default, cmds, hlp in _OPTIONS:
            if cmds is not None and cmd not in cmds:
                continue
            sp.add_argument(_flag(key), dest=key, default=argparse.SUPPRESS, help=hlp,
                            type=str)
    return p


def read_config_file(path):
    """Parse ``key=value`` lines; ``#`` starts a comment.

    A previous CSV or SVG output (recognised by its ``# ksk`` first header
    line) is also accepted; then only its ``# config`` lines are read.
    """
    try:
        with open(path, encoding="utf-8", errors="replace") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from None
    from_output = any(ln.startswith("# ksk ") for ln in lines[:3])
    out = {}
    for n, raw in enumerate(lines, 1):
        line = raw.strip()
        if line.startswith("# config "):
            line = line[len("# config "):].split("  [", 1)[0]
        elif from_output or line.startswith("#") or not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key=value")
        key, val = (part.strip() for part in line.split("=", 1))
        if key not in _BY_KEY:
            raise UsageError(f"{path}:{n}: unknown key {key!r}")
        out[key] = val
    return out


def parse_config(argv):
    """Return ``(command, values, provenance)``."""
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        raise UsageError("invalid arguments") if exc.code else exc
    cmd = ns.command
    raw = {k: ("default", o[2]) for k, o in _BY_KEY.items() if o[3] is None or cmd in o[3]}
    if ns.config:
        for k, v in read_config_file(ns.config).items():
            if k in raw:
                raw[k] = ("file", v)
    for k in raw:
        if hasattr(ns, k):
            src = "flag, overrides file" if raw[k][0] == "file" else "flag"
            raw[k] = (src, getattr(ns, k))
    values, prov = {}, {}
    for k, (src, v) in raw.items():
        typ = _BY_KEY[k][1]
        try:
            values[k] = None if v is None else typ(v)
        except ValueError:
            raise UsageError(f"{_flag(k)}: cannot parse {v!r}") from None
        prov[k] = src
    _validate(cmd, values)
    return cmd, values, prov


def _validate(cmd, c):
    a = c["kernel.alpha"]
    if not 0 < a < 2:
        raise UsageError("alpha must lie in (0,2)")
    if c["kernel.d"] < 1:
        raise UsageError("d must be at least 1")
    if c["kernel.kind"] not in KINDS:
        raise UsageError(f"kind must be one of {', '.join(KINDS)}")
    k0, k1 = c["kernel.kappa0"], c["kernel.kappa1"]
    if k0 is not None and k1 is not None and k0 > k1:
        raise UsageError("kappa0 must not exceed kappa1")
    kap = c["kernel.kappa"]
    if not kap > 0:
        raise UsageError("kappa must be positive")
    if c["kernel.kind"] == "constant":
        if (k0 is not None and kap < k0) or (k1 is not None and kap > k1):
            raise UsageError("kappa lies outside [kappa0, kappa1]")
    if not c["run.t"] > 0:
        raise UsageError("t must be positive")
    if c.get("run.threads") is not None and c["run.threads"] < 1:
        raise UsageError("threads must be at least 1")
    if cmd == "grid" and c["grid.format"] not in ("csv", "binary"):
        raise UsageError("format must be csv or binary")
    if cmd in ("grid", "figure") and c["grid.method"] not in ("fft", "direct", "auto"):
        raise UsageError("grid method must be fft, direct or auto")
    if cmd == "figure" and c["figure.kind"] not in ("envelope", "path"):
        raise UsageError("figure kind must be envelope or path")
    if cmd == "simulate" and c["simulate.paths"] < 1:
        raise UsageError("paths must be at least 1")
    if cmd in ("eval", "bounds"):
        try:
            pts = _points(c["eval.z"])
        except ValueError:
            raise UsageError("z must be comma-separated numbers") from None
        if not pts or any(len(p) != 2 * c["kernel.d"] for p in pts):
            raise UsageError(f"each point needs {2 * c['kernel.d']} coordinates")


def _threads(c):
    if c.get("run.threads") is not None:
        return c["run.threads"]
    env = os.environ.get("KSK_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise UsageError("KSK_THREADS must be an integer") from None
        if n < 1:
            raise UsageError("KSK_THREADS must be at least 1")
        return n
    return 1


def header_lines(cmd, c, prov):
    lines = [f"ksk {__version__}", f"command {cmd}", f"seed {c['run.seed']}"]
    for k in sorted(c):
        if c[k] is not None:
            lines.append(f"config {k}={c[k]}  [{prov[k]}]")
    return lines


def _write_csv(path, head, columns, rows):
    with open(path, "w", newline="") as fh:
        for line in head:
            fh.write(f"# {line}\n")
        w = csv.writer(fh)
        w.writerow(columns)
        for r in rows:
            w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])


def _save_svg(fig, path, head):
    """Save a figure as SVG with a comment block after the XML declaration."""
    import io
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    text = buf.getvalue()
    comment = "<!--\n" + "\n".join("# " + h.replace("--", "- -") for h in head) + "\n-->\n"
    first, rest = text.split("\n", 1) if text.startswith("<?xml") else ("", text)
    with open(path, "w") as fh:
        fh.write((first + "\n" if first else "") + comment + rest)


def _kernel(c):
    from .levy import GaussianSurrogate, LevyKernel
    if c["kernel.kind"] == "gaussian":
        return GaussianSurrogate(d=c["kernel.d"])
    return LevyKernel.named(c["kernel.kind"], c["kernel.d"], c["kernel.alpha"], c["kernel.kappa"])


def _out(c):
    os.makedirs(c["run.out"], exist_ok=True)
    return c["run.out"]


def _coord_names(d):
    return [f"x{i + 1}" for i in range(d)] + [f"v{i + 1}" for i in range(d)]


# ------------------------------------------------------------ commands

def cmd_eval(c, head):
    from .kernel import density_derivatives, density_point
    k, t, d = _kernel(c), c["run.t"], c["kernel.d"]
    pts = _points(c["eval.z"])
    cols = _coord_names(d) + ["density"]
    grad = c["eval.gradient"]
    if grad:
        cols += [f"d_{n}" for n in _coord_names(d)]
    rows = []
    for z in pts:
        z = np.asarray(z)
        if grad:
            orders = [(0,) * (2 * d)] + [tuple(int(i == j) for i in range(2 * d)) for j in range(2 * d)]
            vals = density_derivatives(k, t, z, orders, method=c["eval.method"], rtol=c["eval.rtol"])
            rows.append(list(z) + list(vals))
        else:
            rows.append(list(z) + [density_point(k, t, z, method=c["eval.method"], rtol=c["eval.rtol"])])
    path = os.path.join(_out(c), "eval.csv")
    _write_csv(path, head, cols, rows)
    w = csv.writer(sys.stdout)
    w.writerow(cols)
    for r in rows:
        w.writerow([f"{x:.12g}" for x in r])
    return EXIT_OK, [path]


def _grid(c, k, head):
    """Density grid for the configured box; ``auto`` picks fft when the step allows it."""
    from .kernel import GridSpec, density_grid, truncation_radius
    spec = GridSpec.phase(c["kernel.d"], c["grid.x_extent"], c["grid.v_extent"],
                          c["grid.x_step"], c["grid.v_step"])
    method = c["grid.method"]
    if method == "auto":
        R = truncation_radius(k, c["run.t"])[0]
        method = "fft" if np.pi / max(spec.step) >= R else "direct"
        head.append(f"grid method auto -> {method}")
    return density_grid(k, c["run.t"], spec, method=method, pad=c["grid.pad"])


def cmd_grid(c, head):
    k = _kernel(c)
    g = _grid(c, k, head)
    text = "\n".join(head + [f"mass {g.mass!r}"] + [f"meta {m}={v}" for m, v in sorted(g.meta.items())])
    if c["grid.format"] == "binary":
        path = os.path.join(_out(c), "grid.bin")
        g.to_binary(path, header=text)
    else:
        path = os.path.join(_out(c), "grid.csv")
        g.to_csv(path, header=text)
    print(f"grid {tuple(len(a) for a in g.axes)} mass {g.mass:.6g} -> {path}")
    return EXIT_OK, [path]


def cmd_simulate(c, head):
    from .simulate import SimConfig, sample_kinetic_path, simulate_endpoints
    k, d = _kernel(c), c["kernel.d"]
    cfg = SimConfig(seed=c["run.seed"], n_paths=c["simulate.paths"],
                    small_jump_cutoff=c["simulate.eps"], small_jump_scheme=c["simulate.scheme"],
                    t=c["run.t"])
    out = _out(c)
    if cfg.n_paths == 1:
        rng = np.random.default_rng(cfg.seed)
        path = sample_kinetic_path(k, cfg, rng, mesh=c["simulate.mesh"])
        times, xs, vs = path.trajectory
        csv_path = os.path.join(out, f"path_seed{cfg.seed}.csv")
        _write_csv(csv_path, head + [f"jumps {path.n_jumps}"], ["t"] + _coord_names(d),
                   np.column_stack([times, xs, vs]))
        svg_path = os.path.join(out, f"path_seed{cfg.seed}.svg")
        _plot_path(times, xs, vs, path, svg_path, head, c)
        print(f"one path, {path.n_jumps} jumps -> {csv_path}, {svg_path}")
        return EXIT_OK, [csv_path, svg_path]
    X, V = simulate_endpoints(k, cfg, n_jobs=_threads(c))
    csv_path = os.path.join(out, f"endpoints_seed{cfg.seed}.csv")
    rows = ([i, *r] for i, r in enumerate(np.hstack([X, V]).tolist()))
    _write_csv(csv_path, head, ["path_id"] + _coord_names(d), rows)
    print(f"{cfg.n_paths} endpoints -> {csv_path}")
    return EXIT_OK, [csv_path]


def cmd_bounds(c, head):
    from .bounds import BoundParams, chord_integral, m_beta, n_beta
    d = c["kernel.d"]
    beta = c["bounds.beta"] if c["bounds.beta"] is not None else d + c["kernel.alpha"]
    bp = BoundParams(beta, d)
    rows = []
    for z in _points(c["eval.z"]):
        z = np.asarray(z)
        rows.append(list(z) + [n_beta(z, bp), m_beta(z, bp), chord_integral(z, bp)])
    cols = _coord_names(d) + ["n_beta", "m_beta", "chord_integral"]
    path = os.path.join(_out(c), "bounds.csv")
    _write_csv(path, head, cols, rows)
    w = csv.writer(sys.stdout)
    w.writerow(cols)
    for r in rows:
        w.writerow([f"{x:.12g}" for x in r])
    return EXIT_OK, [path]


def cmd_verify(c, head):
    from .verify import CHECKS, CheckSpec, emit_report, run_suite
    suite = c["verify.suite"]
    names = list(CHECKS) if suite == "all" else [s.strip() for s in suite.split(",") if s.strip()]
    bad = [n for n in names if n not in CHECKS]
    if bad or not names:
        raise UsageError(f"unknown check(s) {bad}; choose from {', '.join(CHECKS)}")
    specs = [CheckSpec(n, seed=c["run.seed"]) for n in names]
    reports = run_suite(specs, n_jobs=_threads(c))
    paths, status = emit_report(reports, _out(c), header=head)
    for r in reports:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.check} ({r.runtime_s:.1f}s)")
    return (EXIT_CHECK if status else EXIT_OK), paths


def cmd_figure(c, head):
    if c["figure.kind"] == "path":
        c = dict(c, **{"simulate.paths": 1})
        return cmd_simulate(c, head)
    return _envelope_figure(c, head)


# ------------------------------------------------------------- figures

def _plot_path(times, xs, vs, path, svg_path, head, c):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    fig, ax = plt.subplots(1, 2, figsize=(10, 4))
    ax[0].plot(times, vs[:, 0], lw=0.8, label="V")
    ax[0].plot(times, xs[:, 0], lw=0.8, label="X")
    ax[0].set_xlabel("t")
    ax[0].legend()
    ax[0].set_title(f"alpha = {c['kernel.alpha']}, {path.n_jumps} jumps above cutoff")
    ax[1].plot(xs[:, 0], vs[:, 0], lw=0.8)
    ax[1].set_xlabel("x")
    ax[1].set_ylabel("v")
    ax[1].set_title("phase-space trajectory")
    fig.tight_layout()
    _save_svg(fig, svg_path, head)
    plt.close(fig)


def _envelope_figure(c, head):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    from .bounds import BoundParams, n_beta
    if c["kernel.d"] != 1:
        raise UnsupportedError("envelope figures are drawn for d = 1")
    k, out = _kernel(c), _out(c)
    g = _grid(c, k, head)
    xs, vs = g.axes
    X, V = np.meshgrid(xs, vs, indexing="ij")
    Z = np.column_stack([X.ravel(), V.ravel()])
    env = n_beta(Z, BoundParams(1 + c["kernel.alpha"], 1)).reshape(X.shape)
    floor = 1e-9 * g.values.max()
    with np.errstate(divide="ignore", invalid="ignore"):
        lp = np.where(g.values > floor, np.log10(np.abs(g.values)), np.nan)
    ln = np.log10(env)
    lr = lp - ln
    paths = []
    extent = (xs[0], xs[-1], vs[0], vs[-1])
    for name, field, title in (("log_density", lp, "log10 p_t"),
                               ("log_envelope", ln, f"log10 N_(1+alpha), alpha = {c['kernel.alpha']}"),
                               ("log_ratio", lr, "log10 (p_t / N)")):
        fig, ax = plt.subplots(figsize=(6, 4.5))
        im = ax.imshow(field.T, origin="lower", extent=extent, aspect="auto", cmap="viridis")
        ax.plot([0, min(vs[-1], xs[-1])], [0, min(vs[-1], xs[-1])], "w--", lw=0.6)
        ax.set_xlabel("x")
        ax.set_ylabel("v")
        ax.set_title(title)
        fig.colorbar(im, ax=ax)
        fig.tight_layout()
        p = os.path.join(out, f"envelope_{name}.svg")
        _save_svg(fig, p, head)
        plt.close(fig)
        paths.append(p)
    p = os.path.join(out, "envelope.csv")
    _write_csv(p, head + [f"noise floor {floor!r} (log_density blank below)"],
               ["x", "v", "density", "envelope", "log10_ratio"],
               np.column_stack([X.ravel(), V.ravel(), g.values.ravel(), env.ravel(), lr.ravel()]))
    paths.append(p)
    print("wrote " + ", ".join(paths))
    return EXIT_OK, paths


_DISPATCH = {"eval": cmd_eval, "grid": cmd_grid, "simulate": cmd_simulate,
             "bounds": cmd_bounds, "verify": cmd_verify, "figure": cmd_figure}


def dispatch(cmd, c, prov):
    """Run a validated command; returns ``(status, written paths)``."""
    head = header_lines(cmd, c, prov)
    from threadpoolctl import threadpool_limits
    with threadpool_limits(limits=_threads(c)):
        return _DISPATCH[cmd](c, head)


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cmd, c, prov = parse_config(argv)
        t0 = time.perf_counter()
        status, _ = dispatch(cmd, c, prov)
        print(f"done in {time.perf_counter() - t0:.1f}s", file=sys.stderr)
        return status
    except UsageError as exc:
        print(f"ksk: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AccuracyError as exc:
        print(f"ksk: accuracy failure: {exc}", file=sys.stderr)
        return EXIT_ACCURACY
    except (ConfigurationError, DomainError, UnsupportedError) as exc:
        print(f"ksk: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except KSKError as exc:
        print(f"ksk: error: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except OSError as exc:
        print(f"ksk: {exc}", file=sys.stderr)
        return EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
