"""Monte Carlo for the kinetic pair ``(X_t, V_t) = (int_0^t L_s ds, L_t)``.

Jumps larger than a cutoff ``eps`` form a compound Poisson process and
are integrated exactly: a jump ``y`` at time ``tau`` adds ``y`` to ``V``
and ``y (t - tau)`` to ``X``.  The remaining small jumps are dropped,
replaced by a Brownian pair of matched covariance, or simulated on a
mesh, depending on the scheme.

Random streams are keyed by ``(seed, chunk)`` so that output does not
depend on how chunks are distributed over workers.
"""
import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import stats

from .bounds import BoundParams, chord_integral
from .errors import ConfigurationError, DomainError, UnsupportedError
from .geometry import PhasePoint, as_phase_point
from .levy import (GaussianSurrogate, RadialLaw, iso_constant, jump_rate,
                   small_jump_covariance)

__all__ = [
    "SimConfig",
    "PathSample",
    "Cube",
    "CubeEstimate",
    "EmpiricalDensity",
    "TailReport",
    "sample_stable_increment",
    "sample_kinetic_path",
    "simulate_endpoints",
    "large_jump_cube_probability",
    "small_jump_tail_check",
    "empirical_density",
    "conditional_moment",
    "empirical_char_function",
]

_SCHEME = re.compile(r"^(truncate|gaussian_compensate|euler_mesh)(?:\((\d+)\))?$")


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings.

    Parameters
    ----------
    seed : int
    n_paths : int
    small_jump_cutoff : float in (0, 1]
    small_jump_scheme : str
        ``truncate``, ``gaussian_compensate`` or ``euler_mesh(m)``.  The
        mesh scheme simulates jumps down to ``eps/m`` and snaps their
        times to an ``m``-step grid.
    t : float
    """

    seed: int = 0
    n_paths: int = 1000
    small_jump_cutoff: float = 0.01
    small_jump_scheme: str = "gaussian_compensate"
    t: float = 1.0

    def __post_init__(self):
        if int(self.seed) != self.seed or not 0 <= self.seed < 2 ** 64:
            raise ConfigurationError("seed must be a 64-bit nonnegative integer")
        if int(self.n_paths) != self.n_paths or self.n_paths < 1:
            raise ConfigurationError("n_paths must be a positive integer")
        if not 0 < self.small_jump_cutoff <= 1:
            raise ConfigurationError("small_jump_cutoff must lie in (0, 1]")
        if not self.t > 0:
            raise ConfigurationError("t must be positive")
        if _SCHEME.match(self.small_jump_scheme) is None:
            raise ConfigurationError(f"unknown small-jump scheme {self.small_jump_scheme!r}")

    @property
    def scheme(self):
        """``(name, mesh)``; mesh is ``None`` unless the scheme is ``euler_mesh``."""
        name, m = _SCHEME.match(self.small_jump_scheme).groups()
        if name == "euler_mesh":
            return name, int(m or 10)
        return name, None


@dataclass(frozen=True)
class Cube:
    """``Q_r(z) = {(x', v'): |x - x'| <= r, |v - v'| <= r}``."""

    center: PhasePoint
    r: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "center", as_phase_point(self.center))
        if not self.r > 0:
            raise DomainError("cube radius must be positive")

    def contains(self, x, v):
        c = self.center
        return ((np.linalg.norm(np.atleast_2d(x) - c.x, axis=-1) <= self.r)
                & (np.linalg.norm(np.atleast_2d(v) - c.v, axis=-1) <= self.r))


@dataclass(frozen=True, eq=False)
class PathSample:
    """One trajectory.

    ``X`` and ``V`` are endpoints including the small-jump part, which is
    also kept separately in ``small_jump_contribution`` as ``(X_s, V_s)``.
    ``trajectory`` holds ``(times, X(times), V(times))`` when a mesh was
    requested.
    """

    t: float
    jump_times: np.ndarray
    jump_sizes: np.ndarray
    V: np.ndarray
    X: np.ndarray
    small_jump_contribution: tuple
    scheme: str
    trajectory: tuple = None

    @property
    def n_jumps(self):
        return len(self.jump_times)

    def jump_part(self):
        """``(X, V)`` of the large jumps alone."""
        y = self.jump_sizes
        return (y * (self.t - self.jump_times)[:, None]).sum(axis=0), y.sum(axis=0)


# ----------------------------------------------------------- increments

def _check_samplable(k):
    if isinstance(k, GaussianSurrogate):
        return
    if not k.even:
        raise UnsupportedError("no sampler for non-even kappa")


def _positive_stable(rng, beta, size):
    """Positive beta-stable variables with ``E exp(-s S) = exp(-s^beta)``."""
    u = rng.random(size) * np.pi
    w = rng.exponential(size=size)
    return (np.sin(beta * u) / np.sin(u) ** (1 / beta)
            * (np.sin((1 - beta) * u) / w) ** ((1 - beta) / beta))


def _symmetric_stable(rng, alpha, size):
    """Symmetric stable variables with ``E exp(i xi S) = exp(-|xi|^alpha)``."""
    u = (rng.random(size) - 0.5) * np.pi
    w = rng.exponential(size=size)
    if alpha == 1.0:
        return np.tan(u)
    return (np.sin(alpha * u) / np.cos(u) ** (1 / alpha)
            * (np.cos((1 - alpha) * u) / w) ** ((1 - alpha) / alpha))


def sample_stable_increment(k, dt, rng, size=None):
    """Increments ``L_{s+dt} - L_s``.

    Constant kappa is sampled exactly: in d = 1 by the trigonometric
    transform, in d >= 2 as ``sqrt(2A) G`` with ``A`` positive
    ``alpha/2``-stable.  A general even kappa falls back to a compound
    Poisson sum above ``0.01`` plus a Gaussian for the rest, which is
    biased at the level of the neglected fourth cumulant.

    Returns
    -------
    ndarray of shape (d,) or (size, d)
    """
    _check_samplable(k)
    if not dt > 0:
        raise DomainError("dt must be positive")
    n = 1 if size is None else int(size)
    d = k.d
    if isinstance(k, GaussianSurrogate):
        out = math.sqrt(2 * dt) * rng.standard_normal((n, d))
    elif k.isotropic:
        scale = (dt * k.kappa * iso_constant(d, k.alpha)) ** (1 / k.alpha)
        if d == 1:
            out = scale * _symmetric_stable(rng, k.alpha, n)[:, None]
        else:
            a = _positive_stable(rng, k.alpha / 2, n)
            out = scale * np.sqrt(2 * a)[:, None] * rng.standard_normal((n, d))
    else:
        cfg = SimConfig(seed=int(rng.integers(2 ** 63)), n_paths=n,
                        small_jump_cutoff=0.01, t=float(dt))
        _, out = simulate_endpoints(k, cfg)
    return out[0] if size is None else out


# ---------------------------------------------------------------- paths

def _small_cov(k, eps):
    if isinstance(k, GaussianSurrogate):
        return 2.0 * np.eye(k.d)
    return small_jump_covariance(k, eps)


def _pair_chol(h):
    """Cholesky factor of the covariance of ``(int_0^h B, B_h)`` for unit B."""
    return np.linalg.cholesky(np.array([[h ** 3 / 3, h ** 2 / 2], [h ** 2 / 2, h]]))


def _gaussian_pair(rng, k, eps, t, n):
    """Brownian pair with generator covariance of the sub-``eps`` jumps."""
    d = k.d
    g = rng.standard_normal((n, d, 2)) @ _pair_chol(t).T
    L = np.linalg.cholesky(_small_cov(k, eps))
    return g[..., 0] @ L.T, g[..., 1] @ L.T


def _jumps(rng, k, law, lo, hi, t, n):
    """Compound Poisson jumps with ``lo < |y| <= hi`` for ``n`` paths.

    Returns path index, times and sizes, already thinned.
    """
    rate = law.proposal_rate * t
    counts = rng.poisson(rate, n)
    m = int(counts.sum())
    y = law.propose(rng, m)
    tau = rng.random(m) * t
    keep = law.accept(rng, y)
    if np.isfinite(hi):
        keep &= np.linalg.norm(y, axis=1) <= hi
    idx = np.repeat(np.arange(n), counts)
    return idx[keep], tau[keep], y[keep]


def _chunk_size(k, cfg):
    if isinstance(k, GaussianSurrogate):
        return 1 << 16
    name, m = cfg.scheme
    lo = cfg.small_jump_cutoff / (m if name == "euler_mesh" else 1)
    per_path = RadialLaw(k, lo).proposal_rate * cfg.t
    size = 1 << 16
    while size > 256 and size * per_path > 4e6:
        size >>= 1
    return size


def _simulate_chunk(args):
    k, cfg, chunk, n, cap = args
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(chunk,)))
    d, t = k.d, cfg.t
    X = np.zeros((n, d))
    V = np.zeros((n, d))
    if isinstance(k, GaussianSurrogate):
        xs, vs = _gaussian_pair(rng, k, None, t, n)
        return X + xs, V + vs
    eps = cfg.small_jump_cutoff
    name, m = cfg.scheme
    idx, tau, y = _jumps(rng, k, RadialLaw(k, eps), eps, cap, t, n)
    for i in range(d):
        V[:, i] += np.bincount(idx, weights=y[:, i], minlength=n)
        X[:, i] += np.bincount(idx, weights=y[:, i] * (t - tau), minlength=n)
    if name == "gaussian_compensate":
        xs, vs = _gaussian_pair(rng, k, min(eps, cap), t, n)
        X += xs
        V += vs
    elif name == "euler_mesh":
        lo = eps / m
        idx, tau, y = _jumps(rng, k, RadialLaw(k, lo), lo, eps, t, n)
        # left-point Riemann rule on an m-step mesh
        tau = np.floor(tau / t * m) * t / m
        for i in range(d):
            V[:, i] += np.bincount(idx, weights=y[:, i], minlength=n)
            X[:, i] += np.bincount(idx, weights=y[:, i] * (t - tau), minlength=n)
    return X, V


def simulate_endpoints(k, cfg, n_jobs=1, cap=np.inf):
    """Endpoints ``(X_t, V_t)`` of ``cfg.n_paths`` independent paths.

    Parameters
    ----------
    k : LevyKernel or GaussianSurrogate
    cfg : SimConfig
    n_jobs : int
        Worker processes.  Output is identical for any value.
    cap : float
        Drop jumps larger than this (``1`` gives the small-jump part).

    Returns
    -------
    X, V : ndarray of shape (n_paths, d)
    """
    _check_samplable(k)
    size = _chunk_size(k, cfg)
    jobs = []
    left, chunk = cfg.n_paths, 0
    while left > 0:
        n = min(size, left)
        jobs.append((k, cfg, chunk, n, cap))
        left -= n
        chunk += 1
    if n_jobs and n_jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as ex:
            parts = list(ex.map(_simulate_chunk, jobs))
    else:
        parts = [_simulate_chunk(j) for j in jobs]
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def sample_kinetic_path(k, cfg, rng, mesh=0):
    """One path with its jump record.

    Parameters
    ----------
    k : LevyKernel
    cfg : SimConfig
        ``n_paths`` is ignored.
    rng : numpy.random.Generator
    mesh : int
        If positive, also return the trajectory on ``mesh`` equal steps;
        the Gaussian small part is then built from exact pair increments.
    """
    _check_samplable(k)
    d, t, eps = k.d, cfg.t, cfg.small_jump_cutoff
    name, m = cfg.scheme
    if isinstance(k, GaussianSurrogate):
        tau, y = np.empty(0), np.empty((0, d))
    else:
        _, tau, y = _jumps(rng, k, RadialLaw(k, eps), eps, np.inf, t, 1)
        order = np.argsort(tau, kind="stable")
        tau, y = tau[order], y[order]
    steps = max(int(mesh), 1)
    h = t / steps
    xs = np.zeros((steps + 1, d))
    vs = np.zeros((steps + 1, d))
    if name == "gaussian_compensate" or isinstance(k, GaussianSurrogate):
        L = np.linalg.cholesky(_small_cov(k, eps))
        g = rng.standard_normal((steps, d, 2)) @ _pair_chol(h).T
        dx, dv = g[..., 0] @ L.T, g[..., 1] @ L.T
        for i in range(steps):
            xs[i + 1] = xs[i] + h * vs[i] + dx[i]
            vs[i + 1] = vs[i] + dv[i]
    elif name == "euler_mesh":
        _, st, sy = _jumps(rng, k, RadialLaw(k, eps / m), eps / m, eps, t, 1)
        st = np.floor(st / t * m) * t / m
        grid = np.linspace(0, t, steps + 1)
        for i, s in enumerate(grid):
            on = st <= s
            vs[i] = sy[on].sum(axis=0)
            xs[i] = (sy[on] * (s - st[on])[:, None]).sum(axis=0)
    small = (xs[-1].copy(), vs[-1].copy())
    VX = (y * (t - tau)[:, None]).sum(axis=0) + small[0]
    VV = y.sum(axis=0) + small[1]
    traj = None
    if mesh:
        times = np.linspace(0, t, steps + 1)
        on = tau[None, :] <= times[:, None]
        jv = on.astype(float) @ y
        jx = (on * np.maximum(times[:, None] - tau[None, :], 0.0)) @ y
        traj = (times, jx + xs, jv + vs)
    return PathSample(t=t, jump_times=tau, jump_sizes=y, V=VV, X=VX,
                      small_jump_contribution=small, scheme=cfg.small_jump_scheme,
                      trajectory=traj)


# ------------------------------------------------------- large jumps

class CubeEstimate(NamedTuple):
    estimate: float
    stderr: float
    truncation_bound: float


_GL_X, _GL_W = np.polynomial.legendre.leggauss(12)


def _cube_term_conditional(rng, law, n, m, x, v, r, chunk=50_000):
    if m > chunk:
        return np.concatenate([_cube_term_conditional(rng, law, n, min(chunk, m - i), x, v, r, chunk)
                               for i in range(0, m, chunk)])
    return _cube_term_conditional_chunk(rng, law, n, m, x, v, r)


def _cube_term_conditional_chunk(rng, law, n, m, x, v, r):
    """Rao-Blackwellised ``E[1{sum y s in x+B_r} 1{sum y in v+B_r}]`` (d = 1).

    Given the other jumps and times, the first jump and its time are
    integrated out: ``int_{I} mu(dy) |{s in [0,1] : y s in J}|`` over the
    velocity window ``I``, with ``J`` the position window.  The integrand is
    a power of ``y`` between the kinks ``+-eps`` and the ends of ``J``, so
    Gauss-Legendre on those pieces is exact to rounding.
    """
    if n > 1:
        s = rng.random((m, n - 1))
        y = law.sample(rng, m * (n - 1))[:, 0].reshape(m, n - 1)
        A, B = (y * s).sum(axis=1), y.sum(axis=1)
    else:
        A = B = np.zeros(m)
    c = x - A
    lo, hi = v - B - r, v - B + r
    e = law.eps
    cuts = np.column_stack([lo, hi, np.full(m, -e), np.full(m, e), c - r, c + r])
    cuts = np.sort(np.clip(cuts, lo[:, None], hi[:, None]), axis=1)
    a, b = cuts[:, :-1], cuts[:, 1:]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    yq = mid[..., None] + half[..., None] * _GL_X
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = (c - r)[:, None, None] / yq
        t2 = (c + r)[:, None, None] / yq
    frac = np.abs(np.clip(t2, 0, 1) - np.clip(t1, 0, 1))
    frac = np.where(np.abs(yq) > e, frac, 0.0)
    vals = law.pdf1(yq) * frac
    return (vals @ _GL_W * half).sum(axis=1)


def _cube_term_indicator(rng, law, n, m, x, v, r, d):
    s = rng.random((m, n))
    y = law.sample(rng, m * n).reshape(m, n, d)
    px = (y * s[..., None]).sum(axis=1)
    pv = y.sum(axis=1)
    return ((np.linalg.norm(px - x, axis=1) <= r)
            & (np.linalg.norm(pv - v, axis=1) <= r)).astype(float)


def large_jump_cube_probability(k, cube, n_max, m_per_term, rng, method="auto",
                                return_terms=False, target_rel_stderr=None, max_samples=None):
    """``P(Z_1 in Q_r(z))`` for the large-jump pair, by its Poisson series.

    ``I_n = P(N = n) E[1{sum y_j s_j in x + B_r} 1{sum y_j in v + B_r}]``
    with ``s_j`` uniform and ``y_j`` from the normalised large-jump law.
    Each term uses its own child stream of ``rng``.

    Parameters
    ----------
    method : {"auto", "conditional", "indicator"}
        ``conditional`` integrates one jump out exactly (d = 1, constant
        kappa); ``auto`` uses it when possible.
    target_rel_stderr : float, optional
        After ``m_per_term`` pilot samples per term, keep doubling the
        sample of the term with the largest variance contribution until
        the relative standard error is below this value or the total
        sample reaches ``max_samples`` (default ``64 n_max m_per_term``).

    Returns
    -------
    CubeEstimate
        ``(estimate, stderr, truncation_bound)``; the bound is the exact
        Poisson tail beyond ``n_max``.  With ``return_terms`` also the
        per-term means and standard errors.
    """
    if n_max < 1 or m_per_term < 2:
        raise DomainError("need n_max >= 1 and m_per_term >= 2")
    d = k.d
    law = RadialLaw(k, 1.0)
    lam = jump_rate(k, 1.0)
    c = cube.center
    if method == "auto":
        method = "conditional" if (d == 1 and k.isotropic) else "indicator"
    if method == "conditional" and not (d == 1 and k.isotropic):
        raise UnsupportedError("the conditional estimator needs d = 1 and constant kappa")

    def draw(n, sub, m):
        if method == "conditional":
            return _cube_term_conditional(sub, law, n, m, float(c.x[0]), float(c.v[0]), cube.r)
        return _cube_term_indicator(sub, law, n, m, c.x, c.v, cube.r, d)

    streams = rng.spawn(n_max)
    w = stats.poisson.pmf(np.arange(1, n_max + 1), lam)
    # running sums per term: count, sum, sum of squares
    cnt = np.zeros(n_max)
    s1 = np.zeros(n_max)
    s2 = np.zeros(n_max)

    def add(i, m):
        vals = draw(i + 1, streams[i], m)
        cnt[i] += m
        s1[i] += vals.sum()
        s2[i] += np.square(vals).sum()

    def summary():
        mean = s1 / cnt
        var = np.maximum(s2 / cnt - mean ** 2, 0.0) * cnt / (cnt - 1)
        contrib = w ** 2 * var / cnt
        return mean, var, contrib

    for i in range(n_max):
        add(i, m_per_term)
    if target_rel_stderr is not None:
        cap = max_samples if max_samples is not None else 64 * n_max * m_per_term
        while True:
            mean, var, contrib = summary()
            est = float(np.dot(w, mean))
            if est > 0 and math.sqrt(contrib.sum()) <= target_rel_stderr * est:
                break
            if cnt.sum() >= cap:
                break
            i = int(np.argmax(contrib))
            add(i, int(min(cnt[i], max(cap - cnt.sum(), 2))))
    mean, var, contrib = summary()
    est = CubeEstimate(float(np.dot(w, mean)), float(math.sqrt(contrib.sum())),
                       float(stats.poisson.sf(n_max, lam)))
    if return_terms:
        return est, (w * mean, np.sqrt(contrib))
    return est


def cube_chord_ratio(k, z, estimate):
    """``estimate (|z|+1)^{d+alpha} / chord_integral(z, d+alpha)``."""
    z = as_phase_point(z)
    p = k.d + k.alpha
    return estimate * (z.norm + 1) ** p / chord_integral(z.z, BoundParams(p, k.d))


# ---------------------------------------------------------- small jumps

@dataclass
class TailReport:
    radii: np.ndarray
    probability: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    censored: np.ndarray
    slope: float
    local_slopes: np.ndarray
    n_paths: int

    @property
    def monotone(self):
        return bool(np.all(np.diff(self.probability) <= 0))

    @property
    def steepening(self):
        s = self.local_slopes[np.isfinite(self.local_slopes)]
        return bool(len(s) >= 2 and np.all(np.diff(s) < 0))


def _clopper_pearson(count, n, level=0.95):
    a = (1 - level) / 2
    lo = np.where(count > 0, stats.beta.ppf(a, count, n - count + 1), 0.0)
    hi = np.where(count < n, stats.beta.ppf(1 - a, count + 1, n - count), 1.0)
    return lo, hi


def small_jump_tail_check(k, cfg, radii, n_jobs=1, fit_range=(2.0, 8.0)):
    """Tail of ``|Z_1^{(0)}|`` for the pair driven by jumps ``|y| <= 1``.

    Radii with no exceedance are censored.  ``slope`` is the regression
    slope of ``log P`` on ``(R+2) log(R+2)`` over the uncensored radii in
    ``fit_range``; ``local_slopes`` are successive slopes of ``log P`` in
    ``R`` (steepening means super-exponential decay).
    """
    if not getattr(k, "isotropic", False) or isinstance(k, GaussianSurrogate):
        raise DomainError("the tail check is defined for constant kappa")
    X, V = simulate_endpoints(k, cfg, n_jobs=n_jobs, cap=1.0)
    norm = np.sqrt((X ** 2).sum(axis=1) + (V ** 2).sum(axis=1))
    radii = np.asarray(radii, dtype=float)
    n = len(norm)
    count = np.array([(norm > r).sum() if r > 0 else n for r in radii])
    prob = count / n
    lo, hi = _clopper_pearson(count, n)
    censored = count == 0
    with np.errstate(divide="ignore"):
        logp = np.log(prob)
    sel = (~censored) & (radii >= fit_range[0]) & (radii <= fit_range[1])
    slope = float("nan")
    if sel.sum() >= 2:
        u = (radii[sel] + 2) * np.log(radii[sel] + 2)
        slope = float(np.polyfit(u, logp[sel], 1)[0])
    ok = ~censored
    local = np.full(max(len(radii) - 1, 0), np.nan)
    for i in range(len(radii) - 1):
        if ok[i] and ok[i + 1] and radii[i] > 0:
            local[i] = (logp[i + 1] - logp[i]) / (radii[i + 1] - radii[i])
    return TailReport(radii, prob, lo, hi, censored, slope, local, n)


# --------------------------------------------------------- estimators

@dataclass
class EmpiricalDensity:
    """Histogram estimate with exact binomial intervals per box."""

    edges: list
    counts: np.ndarray
    n: int
    outside: int
    probability: np.ndarray = field(init=False)
    density: np.ndarray = field(init=False)
    ci_low: np.ndarray = field(init=False)
    ci_high: np.ndarray = field(init=False)

    def __post_init__(self):
        self.probability = self.counts / self.n
        vol = np.ones(self.counts.shape)
        for i, e in enumerate(self.edges):
            w = np.diff(e)
            shape = [1] * len(self.edges)
            shape[i] = len(w)
            vol = vol * w.reshape(shape)
        self.volume = vol
        self.density = self.probability / vol
        self.ci_low, self.ci_high = _clopper_pearson(self.counts, self.n)

    def z_scores(self, p_model):
        """``(p_hat - p) / sqrt(p (1 - p) / n)`` against model box probabilities."""
        p = np.asarray(p_model, dtype=float)
        sd = np.sqrt(np.maximum(p * (1 - p), 1e-300) / self.n)
        return (self.probability - p) / sd


def empirical_density(samples, boxes):
    """Box-count estimate of a density from phase-space samples.

    Parameters
    ----------
    samples : array of shape (n, 2d) or list of PhasePoint
    boxes : list of 2d increasing edge arrays
    """
    if isinstance(samples, (list, tuple)) and samples and isinstance(samples[0], PhasePoint):
        samples = np.array([s.z for s in samples])
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2 or len(samples) < 1:
        raise DomainError("need at least one sample")
    if len(boxes) != samples.shape[1] or any(len(e) < 2 for e in boxes):
        raise DomainError("need one edge array of length >= 2 per coordinate")
    edges = [np.asarray(e, dtype=float) for e in boxes]
    counts, _ = np.histogramdd(samples, bins=edges)
    inside = int(counts.sum())
    return EmpiricalDensity(edges, counts, len(samples), len(samples) - inside)


def conditional_moment(X, V, v, h, q):
    """``E(|X|^q | |V - v| <= h)`` with its standard error (d = 1).

    Returns
    -------
    mean, stderr, count
    """
    X = np.asarray(X, dtype=float).reshape(len(X), -1)
    V = np.asarray(V, dtype=float).reshape(len(V), -1)
    sel = np.linalg.norm(V - v, axis=1) <= h
    m = int(sel.sum())
    if m < 2:
        return float("nan"), float("nan"), m
    vals = np.linalg.norm(X[sel], axis=1) ** q
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(m)), m


def empirical_char_function(V, xi):
    """``mean exp(i xi . V)`` with the standard errors of real and imaginary parts."""
    V = np.asarray(V, dtype=float).reshape(len(V), -1)
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    if xi.shape[-1] != V.shape[1]:
        xi = xi.reshape(-1, V.shape[1])
    ph = V @ xi.T
    c, s = np.cos(ph), np.sin(ph)
    n = len(V)
    return (c.mean(axis=0) + 1j * s.mean(axis=0),
            c.std(axis=0, ddof=1) / math.sqrt(n), s.std(axis=0, ddof=1) / math.sqrt(n))
