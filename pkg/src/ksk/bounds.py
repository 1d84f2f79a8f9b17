"""Comparison functions for the kinetic heat kernel and their comparators.

The central object is

    N_beta(z) = (1 + |z|)^{-1-beta} (1 + inf_{s in [0,1]} |x - s v|)^{1-beta},

together with M_beta (its second factor), the chord integral
``int_0^1 (|x - s v| + 1)^{-beta} ds`` and velocity-conditional moments
``int |x|^q N_beta(x, v) dx``.

Functions taking ``z`` accept a :class:`~ksk.geometry.PhasePoint` (and
return a float) or an array of shape (..., 2d) (and return an array).
"""
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import integrate

from .errors import AccuracyError, DomainError
from .geometry import PhasePoint, as_phase_point, min_gamma_arrays, split_z

__all__ = [
    "BoundParams",
    "EnvelopeParams",
    "Envelope",
    "MomentIntegral",
    "n_beta",
    "n_beta_piecewise",
    "m_beta",
    "chord_integral",
    "moment_integral",
    "grube_comparator",
    "c0_star",
    "sphere_area",
    "envelope",
]


@dataclass(frozen=True)
class BoundParams:
    """Exponent data: ``beta > 1``, dimension ``d``, optional ``alpha``."""

    beta: float
    d: int = 1
    alpha: float = None

    def __post_init__(self):
        if not self.beta > 1:
            raise DomainError(f"beta must exceed 1, got {self.beta!r}")
        if int(self.d) != self.d or self.d < 1:
            raise DomainError(f"d must be a positive integer, got {self.d!r}")
        if self.alpha is not None and not 0 < self.alpha <= 2:
            raise DomainError("alpha must lie in (0,2]")

    @classmethod
    def for_kernel(cls, d, alpha):
        return cls(beta=d + alpha, d=d, alpha=alpha)


@dataclass(frozen=True)
class EnvelopeParams:
    kappa0: float
    kappa1: float
    t: float
    alpha: float
    d: int = 1

    def __post_init__(self):
        if not 0 < self.kappa0 <= self.kappa1:
            raise DomainError("need 0 < kappa0 <= kappa1")
        if not self.t > 0:
            raise DomainError("t must be positive")
        if not 0 < self.alpha < 2:
            raise DomainError("alpha must lie in (0,2)")


class Envelope(NamedTuple):
    lower: float
    upper_shape: float


class MomentIntegral(NamedTuple):
    """Result of :func:`moment_integral`; ``value`` is inf when divergent."""

    finite: bool
    value: float

    @property
    def divergent(self):
        return not self.finite


def _xv(z):
    if isinstance(z, (PhasePoint, tuple)):
        z = as_phase_point(z)
        return z.x, z.v, True
    x, v = split_z(z)
    return x, v, False


def _out(val, scalar):
    return float(val) if scalar else val


def _norm(a):
    return np.sqrt(np.sum(a * a, axis=-1))


def n_beta(z, p):
    """``(1+|z|)^{-1-beta} (1 + min_s |x - s v|)^{1-beta}``."""
    x, v, scalar = _xv(z)
    _, m = min_gamma_arrays(x, v)
    nz = np.sqrt(np.sum(x * x, axis=-1) + np.sum(v * v, axis=-1))
    return _out((1 + nz) ** (-1 - p.beta) * (1 + m) ** (1 - p.beta), scalar)


def n_beta_piecewise(z, p):
    """Same value as :func:`n_beta`, via the explicit three-region formula.

    The regions are ``<x,v> <= 0``, ``0 < <x,v> <= |v|^2`` and
    ``<x,v> > |v|^2``; the middle one uses the distance from x to the line
    spanned by v.
    """
    x, v, scalar = _xv(z)
    xv = np.sum(x * v, axis=-1)
    vv = np.sum(v * v, axis=-1)
    nx = _norm(x)
    nz = np.sqrt(nx ** 2 + vv)
    # |x|^2 - <x, v/|v|>^2, written as a residual norm to avoid cancellation
    vhat = v / np.where(vv > 0, np.sqrt(vv), 1.0)[..., None]
    perp = _norm(x - np.sum(x * vhat, axis=-1)[..., None] * vhat)
    far = _norm(x - v)
    m = np.where(xv <= 0, nx, np.where(xv <= vv, perp, far))
    return _out((1 + nz) ** (-1 - p.beta) * (1 + m) ** (1 - p.beta), scalar)


def m_beta(z, p):
    x, v, scalar = _xv(z)
    _, m = min_gamma_arrays(x, v)
    return _out((1 + m) ** (1 - p.beta), scalar)


def chord_integral(z, p, rtol=1e-8):
    """``int_0^1 (|x - s v| + 1)^{-beta} ds`` by adaptive quadrature.

    The interval is split at the minimiser of ``|x - s v|``.

    Raises
    ------
    AccuracyError
        If QUADPACK cannot reach ``rtol``; the estimate is attached.
    """
    if not isinstance(z, (PhasePoint, tuple)):
        x, v = split_z(z)
        flat = [chord_integral(PhasePoint(a, b), p, rtol) for a, b in
                zip(x.reshape(-1, x.shape[-1]), v.reshape(-1, v.shape[-1]))]
        return np.array(flat).reshape(x.shape[:-1])
    z = as_phase_point(z)
    x, v = z.x, z.v
    beta = p.beta
    vv = float(v @ v)
    if vv == 0.0:
        nx = math.sqrt(float(x @ x))

        def f(s):
            return (nx + 1.0) ** -beta
    else:
        s0 = float(x @ v) / vv
        h = math.sqrt(float(np.sum((x - s0 * v) ** 2)))

        def f(s):
            return (math.sqrt(h * h + vv * (s - s0) ** 2) + 1.0) ** -beta
    s_star, _ = min_gamma_arrays(x, v)
    pieces = [0.0, 1.0]
    if 0.0 < s_star < 1.0:
        pieces = [0.0, float(s_star), 1.0]
    total = 0.0
    abserr = 0.0
    for a, b in zip(pieces[:-1], pieces[1:]):
        val, err, info = integrate.quad(f, a, b, epsabs=0.0, epsrel=rtol * 0.1,
                                        limit=200, full_output=1)[:3]
        total += val
        abserr += err
    if abserr > rtol * abs(total):
        raise AccuracyError(f"chord integral did not reach rtol={rtol}", total, abserr)
    return total


def sphere_area(n):
    """Surface area of the unit sphere S^{n-1} in R^n (``2`` for n=1)."""
    return 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)


def _reduced_integrand(q, beta, b):
    def g(a, r):
        xx = a * a + r * r
        nz = math.sqrt(xx + b * b)
        if a <= 0:
            m = math.sqrt(xx)
        elif a <= b:
            m = r
        else:
            m = math.sqrt((a - b) ** 2 + r * r)
        if xx == 0.0:
            return 0.0 if q > 0 else (1 + nz) ** (-1 - beta) * (1 + m) ** (1 - beta)
        # log space: the exterior substitution reaches radii near the float limit
        return math.exp(0.5 * q * math.log(xx) - (1 + beta) * math.log1p(nz)
                        + (1 - beta) * math.log1p(m))
    return g


def _quad(f, a, b, rtol, points=None, args=()):
    pts = None
    if points:
        pts = [p for p in points if a < p < b] or None
    val, err, info = integrate.quad(f, a, b, args=args, epsabs=0.0, epsrel=rtol,
                                    limit=400, points=pts, full_output=1)[:3]
    return val, err


def moment_integral(v, q, p, rtol=1e-6):
    """``int_{R^d} |x|^q N_beta(x, v) dx``.

    Divergence (``q >= 2 beta - d``) is decided analytically.  Otherwise the
    integrand is rotated so that v lies on the first axis, which leaves a
    two-variable integral in ``(x_1, |x_perp|)``.  The disc ``|x| <= R``
    with ``1 + R = 100 (1 + |v|)`` is integrated in those coordinates, the
    exterior in polar coordinates after the substitution ``rho = R/u``.
    """
    v = np.atleast_1d(np.asarray(v, dtype=float))
    d = p.d
    if v.size != d:
        raise DomainError("velocity has the wrong dimension")
    if not p.beta > d:
        raise DomainError("moment integrals need beta > d")
    if q < 0:
        raise DomainError("q must be nonnegative")
    if q >= 2 * p.beta - d:
        return MomentIntegral(False, math.inf)
    b = float(np.sqrt(v @ v))
    beta = p.beta
    g = _reduced_integrand(q, beta, b)
    R = 100.0 * (1.0 + b) - 1.0
    inner_tol = rtol * 0.01
    errs = []

    if d == 1:
        core, e1 = _quad(lambda a: g(a, 0.0), -R, R, inner_tol, points=[0.0, b])

        def tail(u):
            rho = R / u
            return (g(rho, 0.0) + g(-rho, 0.0)) * R / (u * u)
        outer, e2 = _quad(tail, 0.0, 1.0, inner_tol)
        errs = [e1, e2]
        value = core + outer
    else:
        omega = sphere_area(d - 1)
        k = d - 2

        def inner_r(a):
            top = math.sqrt(max(R * R - a * a, 0.0))
            val, err = _quad(lambda r: r ** k * g(a, r), 0.0, top, inner_tol,
                             points=[1.0, 10.0])
            return val
        core, e1 = _quad(inner_r, -R, R, inner_tol * 10, points=[0.0, b])

        def shell(u):
            rho = R / u
            tb = math.acos(min(b / rho, 1.0))

            def ang(th):
                return math.sin(th) ** k * g(rho * math.cos(th), rho * math.sin(th))
            val, _ = _quad(ang, 0.0, math.pi, inner_tol, points=[tb, math.pi / 2])
            return val * rho ** (d - 1) * R / (u * u)
        outer, e2 = _quad(shell, 0.0, 1.0, inner_tol * 10)
        errs = [omega * e1, omega * e2]
        value = omega * (core + outer)
    err = sum(errs)
    if not np.isfinite(value) or err > rtol * abs(value):
        raise AccuracyError("moment integral did not reach tolerance", value, err)
    return MomentIntegral(True, float(value))


def grube_comparator(z, alpha, form="auto"):
    """Explicit comparison function in the style of the one-dimensional
    two-sided estimate, or its d-dimensional analogue.

    ``form="d1"`` gives ``(1+|x|+|v|)^{-2-alpha} (1+(|2x-v|-|v|)_+)^{-alpha}``;
    ``form="general"`` gives
    ``(1+|z|)^{-1-b}(1+|x|sqrt(1-w^2)+(| 2|x|w-|v| |-|v|)_+)^{1-b}`` with
    ``b = d + alpha`` and ``w = <x/|x|, v/|v|>`` (zero if either vanishes).
    ``auto`` picks ``d1`` when d == 1.
    """
    x, v, scalar = _xv(z)
    d = x.shape[-1]
    if form == "auto":
        form = "d1" if d == 1 else "general"
    if form == "d1":
        if d != 1:
            raise DomainError("the d1 form needs d = 1")
        xs, vs = x[..., 0], v[..., 0]
        val = ((1 + np.abs(xs) + np.abs(vs)) ** (-2 - alpha)
               * (1 + np.maximum(np.abs(2 * xs - vs) - np.abs(vs), 0.0)) ** (-alpha))
        return _out(val, scalar)
    if form != "general":
        raise DomainError(f"unknown form {form!r}")
    beta = d + alpha
    nx, nv = _norm(x), _norm(v)
    denom = nx * nv
    w = np.where(denom > 0, np.sum(x * v, axis=-1) / np.where(denom > 0, denom, 1.0), 0.0)
    w = np.clip(w, -1.0, 1.0)
    nz = np.sqrt(nx ** 2 + nv ** 2)
    inner = (1 + nx * np.sqrt(1 - w * w)
             + np.maximum(np.abs(2 * nx * w - nv) - nv, 0.0))
    return _out((1 + nz) ** (-1 - beta) * inner ** (1 - beta), scalar)


def c0_star(d, alpha):
    """``int_{|y| > 1/3} |y|^{-d-alpha} dy`` by radial quadrature."""
    val, _ = integrate.quad(lambda r: r ** (-1.0 - alpha), 1.0 / 3.0, np.inf,
                            epsabs=0.0, epsrel=1e-12)
    return sphere_area(d) * val


def envelope(z0, z, e, jx=0, jv=0):
    """Lower and upper envelope shapes for the kernel or its derivatives.

    Both sides are evaluated at ``kappa0^{-1/alpha} T_t (z - theta_t z0)``
    and returned without the unknown multiplicative constant.  ``lower``
    is ``None`` when derivatives are requested.
    """
    if jx < 0 or jv < 0:
        raise DomainError("derivative orders must be nonnegative")
    z0 = as_phase_point(z0)
    z = as_phase_point(z)
    a, d, t, k0, k1 = e.alpha, e.d, e.t, e.kappa0, e.kappa1
    if z.d != d or z0.d != d:
        raise DomainError("phase points do not match EnvelopeParams.d")
    w = z - PhasePoint(z0.x + t * z0.v, z0.v)
    scale = k0 ** (-1.0 / a)
    arg = PhasePoint(scale * t ** (-1.0 / a - 1.0) * w.x, scale * t ** (-1.0 / a) * w.v)
    nb = n_beta(arg, BoundParams(beta=d + a, d=d))
    j = jx + jv
    upper = (k0 ** (-(2 * d + j) / a) * (k1 / k0) ** (3 + 4 * d + 3 * a)
             * t ** (-(2 * d + j) / a - jx - d) * nb)
    lower = None
    if j == 0:
        lower = (k0 ** (-2 * d / a) * math.exp(-c0_star(d, a) * k1 / k0)
                 * t ** (-2 * d / a - d) * nb)
    return Envelope(lower, upper)


