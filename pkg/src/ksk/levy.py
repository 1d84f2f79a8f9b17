"""Jump kernels ``nu(dx) = kappa(x) |x|^{-d-alpha} dx`` and their exponents.

``psi(xi) = int (1 - e^{i xi.x} + i xi.x 1{|x|<=1}) nu(dx)`` is the
characteristic exponent of the Levy process L, and the pair
``(int_0^t L_s ds, L_t)`` has characteristic function
``exp(-phi(xi, eta))`` with ``phi = int_0^t psi(s xi + eta) ds``.
"""
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate, interpolate

from .errors import AccuracyError, DomainError, UnsupportedError

__all__ = [
    "LevyKernel",
    "GaussianSurrogate",
    "JumpSplit",
    "RadialLaw",
    "iso_constant",
    "iso_constant_closed",
    "char_exponent",
    "kinetic_exponent",
    "split_measure",
    "jump_rate",
    "small_jump_covariance",
    "decompose_vector",
    "decompose_vectors",
    "sphere_points",
]


def _sphere_area(n):
    return 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)


@lru_cache(maxsize=None)
def iso_constant(d, alpha):
    """``c(d, alpha) = int (1 - cos(e.y)) |y|^{-d-alpha} dy`` by quadrature.

    In polar coordinates the integral factors into a sphere moment
    ``int |w_1|^alpha dw`` and the one-dimensional integral
    ``int_0^inf (1 - cos u) u^{-1-alpha} du``.
    """
    # (1 - cos u)/u^2 is smooth; the weight u^{1-alpha} goes to QUADPACK
    near, _ = integrate.quad(lambda u: 2.0 * _sinc_half(u) ** 2, 0.0, 1.0,
                             weight="alg", wvar=(1.0 - alpha, 0.0),
                             epsabs=0.0, epsrel=1e-13)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        osc, _ = integrate.quad(lambda u: u ** (-1.0 - alpha), 1.0, np.inf,
                                weight="cos", wvar=1.0, epsabs=1e-15)
    radial = near + 1.0 / alpha - osc
    if d == 1:
        sph = 2.0
    else:
        # (1 - u^2)^{(d-3)/2} = (1 - u)^{(d-3)/2} (1 + u)^{(d-3)/2}
        w, _ = integrate.quad(lambda u: (1.0 + u) ** ((d - 3) / 2.0), 0.0, 1.0,
                              weight="alg", wvar=(alpha, (d - 3) / 2.0),
                              epsabs=0.0, epsrel=1e-13)
        sph = 2.0 * _sphere_area(d - 1) * w
    return sph * radial


def _sinc_half(u):
    # sin(u/2)/u, stable near 0
    return 0.5 * np.sinc(u / (2.0 * np.pi))


def iso_constant_closed(d, alpha):
    """Closed form ``2^{-alpha} pi^{d/2} |Gamma(-alpha/2)| / Gamma((d+alpha)/2)``."""
    return (2.0 ** (-alpha) * math.pi ** (d / 2) * abs(math.gamma(-alpha / 2))
            / math.gamma((d + alpha) / 2))


def sphere_points(d, n=None):
    """Deterministic points and weights on S^{d-1} (weights sum to the area)."""
    if d == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if d == 2:
        n = n or 256
        th = 2 * np.pi * np.arange(n) / n
        return np.column_stack([np.cos(th), np.sin(th)]), np.full(n, 2 * np.pi / n)
    if d == 3:
        n = n or 32
        u, wu = np.polynomial.legendre.leggauss(n)
        ph = 2 * np.pi * np.arange(2 * n) / (2 * n)
        U, P = np.meshgrid(u, ph, indexing="ij")
        s = np.sqrt(1 - U ** 2)
        pts = np.column_stack([U.ravel(), (s * np.cos(P)).ravel(), (s * np.sin(P)).ravel()])
        w = (wu[:, None] * np.full(2 * n, 2 * np.pi / (2 * n))[None, :]).ravel()
        return pts, w
    rng = np.random.default_rng(12345)
    g = rng.standard_normal((n or 4096, d))
    pts = g / np.linalg.norm(g, axis=1, keepdims=True)
    return pts, np.full(len(pts), _sphere_area(d) / len(pts))


# ---------------------------------------------------------------- kernels

def _kappa_anisotropic_even(y):
    y = np.asarray(y, dtype=float)
    r = np.linalg.norm(y, axis=-1)
    if y.shape[-1] == 1:
        with np.errstate(divide="ignore"):
            return 1.0 + 0.5 * np.cos(np.log(np.where(r > 0, r, 1.0)))
    w = y / np.where(r > 0, r, 1.0)[..., None]
    return 1.0 + 0.5 * (w[..., 0] ** 2 - w[..., 1] ** 2)


def _kappa_non_symmetric(y):
    y = np.asarray(y, dtype=float)
    r = np.linalg.norm(y, axis=-1)
    w = y / np.where(r > 0, r, 1.0)[..., None]
    if y.shape[-1] == 2:
        # sin(3 theta)
        return 1.0 + 0.5 * (3 * w[..., 0] ** 2 * w[..., 1] - w[..., 1] ** 3)
    return 1.0 + 0.5 * 3.0 ** 1.5 * w[..., 0] * w[..., 1] * w[..., 2]


@dataclass(frozen=True, eq=False)
class LevyKernel:
    """Jump intensity ``kappa(x) |x|^{-d-alpha}``.

    Use ``LevyKernel(d, alpha, kappa=...)`` for a constant kappa, or
    :meth:`general` for a position-dependent one.

    Parameters
    ----------
    d : int
    alpha : float in (0, 2)
    kappa : float
        Constant value (isotropic case).
    kappa_fn : callable, optional
        Vectorised ``kappa(y)`` for ``y`` of shape (..., d).
    kappa0, kappa1 : float
        Bounds of kappa.
    even : bool
        Whether ``kappa(-x) = kappa(x)``.
    """

    d: int
    alpha: float
    kappa: float = 1.0
    kappa_fn: object = None
    kappa0: float = None
    kappa1: float = None
    even: bool = True
    name: str = "constant"
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise DomainError(f"d must be a positive integer, got {self.d!r}")
        object.__setattr__(self, "d", int(self.d))
        if not 0 < self.alpha < 2:
            raise DomainError("alpha must lie in (0,2)")
        if self.kappa_fn is None:
            if not self.kappa > 0:
                raise DomainError("kappa must be positive")
            object.__setattr__(self, "kappa0", float(self.kappa))
            object.__setattr__(self, "kappa1", float(self.kappa))
            object.__setattr__(self, "even", True)
        else:
            if self.kappa0 is None or self.kappa1 is None:
                raise DomainError("general kernels need kappa0 and kappa1")
            if not 0 < self.kappa0 <= self.kappa1:
                raise DomainError("need 0 < kappa0 <= kappa1")
            self._validate()

    # construction helpers
    @classmethod
    def general(cls, d, alpha, kappa_fn, kappa0, kappa1, even, name="general"):
        return cls(d=d, alpha=alpha, kappa_fn=kappa_fn, kappa0=kappa0,
                   kappa1=kappa1, even=even, name=name)

    @classmethod
    def named(cls, name, d, alpha, kappa=1.0):
        """Built-in kernels: ``constant``, ``anisotropic-even``, ``non-symmetric``."""
        if name == "constant":
            return cls(d=d, alpha=alpha, kappa=kappa)
        if name == "anisotropic-even":
            return cls.general(d, alpha, _kappa_anisotropic_even, 0.5, 1.5, True, name)
        if name == "non-symmetric":
            if d == 1:
                raise DomainError("in d=1 the odd-moment condition forces an even kappa")
            return cls.general(d, alpha, _kappa_non_symmetric, 0.5, 1.5, False, name)
        raise DomainError(f"unknown kernel {name!r}")

    @property
    def isotropic(self):
        return self.kappa_fn is None

    @property
    def homogeneous_degree(self):
        return self.alpha if self.isotropic else None

    def kappa_at(self, y):
        y = np.asarray(y, dtype=float)
        if self.isotropic:
            return np.full(y.shape[:-1], self.kappa)
        return np.asarray(self.kappa_fn(y), dtype=float)

    def _validate(self):
        pts, w = sphere_points(self.d)
        radii = np.array([0.05, 0.3, 1.0, 2.5, 20.0])
        for r in radii:
            kv = self.kappa_at(r * pts)
            if np.any(kv < self.kappa0 * (1 - 1e-12)) or np.any(kv > self.kappa1 * (1 + 1e-12)):
                raise DomainError("kappa leaves [kappa0, kappa1] on sampled points")
            mom = (w[:, None] * pts * kv[:, None]).sum(axis=0)
            if np.max(np.abs(mom)) > 1e-8 * self.kappa1 * w.sum():
                raise DomainError("kappa violates the spherical odd-moment condition")
            if self.even:
                if np.max(np.abs(kv - self.kappa_at(-r * pts))) > 1e-12 * self.kappa1:
                    raise DomainError("kappa declared even but kappa(-x) != kappa(x)")

    def psi(self, xi):
        """Characteristic exponent at ``xi`` of shape (..., d)."""
        return char_exponent(self, xi)

    def kinetic_exponent(self, xi, eta, t):
        return kinetic_exponent(self, xi, eta, t)

    def scaled(self, lam):
        """The kernel of ``lam * nu``."""
        if self.isotropic:
            return LevyKernel(self.d, self.alpha, kappa=lam * self.kappa)
        fn = self.kappa_fn
        return LevyKernel.general(self.d, self.alpha, lambda y: lam * fn(y),
                                  lam * self.kappa0, lam * self.kappa1, self.even,
                                  name=f"{lam}*{self.name}")

    def describe(self):
        return {"d": self.d, "alpha": self.alpha, "kernel": self.name,
                "kappa0": self.kappa0, "kappa1": self.kappa1}


@dataclass(frozen=True)
class GaussianSurrogate:
    """The quadratic exponent ``psi(xi) = |xi|^2`` (the alpha = 2 endpoint).

    Its kinetic pair is Gaussian with covariance blocks ``2t^3/3``, ``t^2``
    and ``2t`` per coordinate.
    """

    d: int = 1
    alpha: float = 2.0
    name: str = "gaussian"
    even: bool = True
    isotropic: bool = True
    kappa: float = 1.0

    @property
    def homogeneous_degree(self):
        return 2.0

    def psi(self, xi):
        xi = np.asarray(xi)
        return np.sum(xi * xi, axis=-1)

    def kinetic_exponent(self, xi, eta, t):
        xi, eta = np.asarray(xi), np.asarray(eta)
        return (np.sum(xi * xi, axis=-1) * t ** 3 / 3 + np.sum(xi * eta, axis=-1) * t ** 2
                + np.sum(eta * eta, axis=-1) * t)

    def describe(self):
        return {"d": self.d, "alpha": 2.0, "kernel": self.name}


# ---------------------------------------------------------- exponents

def char_exponent(k, xi):
    """``psi(xi)`` for ``xi`` of shape (..., d); complex output.

    Constant kappa uses ``c(d, alpha) kappa |xi|^alpha``.  Otherwise the
    Levy-Khintchine integral is evaluated in spherical coordinates.
    """
    if isinstance(k, GaussianSurrogate):
        return k.psi(xi).astype(complex)
    xi = np.asarray(xi, dtype=float)
    if xi.ndim == 0:
        xi = xi[None]
    if xi.shape[-1] != k.d:
        raise DomainError(f"frequency must have last axis of length {k.d}")
    if k.isotropic:
        nrm = np.sqrt(np.sum(xi * xi, axis=-1))
        return (iso_constant(k.d, k.alpha) * k.kappa * nrm ** k.alpha).astype(complex)
    flat = xi.reshape(-1, k.d)
    out = np.array([_psi_general(k, row) for row in flat])
    return out.reshape(xi.shape[:-1])


_EPSREL = 1e-10


def _radial_part(k, a, omega):
    """``int_0^inf (1 - e^{i r a} + i r a 1{r<=1}) kappa(r w) r^{-1-alpha} dr``."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        return _radial_part_raw(k, a, omega)


def _radial_part_raw(k, a, omega):
    if a == 0.0:
        return 0j
    alpha = k.alpha

    def kap(r):
        return float(k.kappa_at(r * omega))

    def re_near(r):
        return 2.0 * (a * _sinc_half(a * r)) ** 2 * kap(r)

    def im_near(r):
        x = a * r
        if abs(x) < 0.1:
            x2 = x * x
            c = -1.0 / 6 + x2 / 120 - x2 * x2 / 5040 + x2 ** 3 / 362880
        else:
            c = (math.sin(x) - x) / x ** 3
        return c * a ** 3 * kap(r)

    re1, _ = integrate.quad(re_near, 0.0, 1.0, weight="alg", wvar=(1.0 - alpha, 0.0),
                            epsabs=0.0, epsrel=_EPSREL, limit=200)
    im1, _ = integrate.quad(im_near, 0.0, 1.0, weight="alg", wvar=(2.0 - alpha, 0.0),
                            epsabs=0.0, epsrel=_EPSREL, limit=200)

    def tail(r):
        return kap(r) * r ** (-1.0 - alpha)

    # non-oscillatory stretch up to one period, QAWF beyond it
    L = max(1.0, 2.0 * math.pi / abs(a))
    re2 = im2 = 0.0
    if L > 1.0:
        re2, _ = integrate.quad(lambda r: (1.0 - math.cos(a * r)) * tail(r), 1.0, L,
                                epsabs=0.0, epsrel=_EPSREL, limit=200)
        im2, _ = integrate.quad(lambda r: math.sin(a * r) * tail(r), 1.0, L,
                                epsabs=0.0, epsrel=_EPSREL, limit=200)
    base, _ = integrate.quad(tail, L, np.inf, epsabs=0.0, epsrel=_EPSREL, limit=200)
    cs, _ = integrate.quad(tail, L, np.inf, weight="cos", wvar=abs(a), epsabs=1e-15)
    sn, _ = integrate.quad(tail, L, np.inf, weight="sin", wvar=abs(a), epsabs=1e-15)
    sn *= math.copysign(1.0, a)
    return complex(re1 + re2 + base - cs, -(im1 + im2 + sn))


def _graded_rule(a, b, n=24):
    """Gauss-Legendre nodes on [a, b] under a quintic smoothstep map.

    The map flattens both endpoints, which absorbs ``|.|^alpha`` kinks of
    the angular integrand placed there.
    """
    g, w = np.polynomial.legendre.leggauss(n)
    u = 0.5 * (g + 1.0)
    step = u ** 3 * (10.0 - 15.0 * u + 6.0 * u * u)
    dstep = 30.0 * u * u * (1.0 - u) ** 2
    return a + (b - a) * step, 0.5 * w * (b - a) * dstep


def _psi_general(k, xi):
    d = k.d
    nx = float(np.linalg.norm(xi))
    if nx == 0.0:
        return 0j
    if d == 1:
        return sum(_radial_part(k, xi[0] * s, np.array([s])) for s in (1.0, -1.0))
    e = xi / nx
    if d == 2:
        # theta measured from e; the kinks of |cos theta|^alpha sit at +-pi/2
        perp = np.array([-e[1], e[0]])
        out = 0j
        for lo in (-math.pi / 2, math.pi / 2):
            th, w = _graded_rule(lo, lo + math.pi)
            for ti, wi in zip(th, w):
                omega = math.cos(ti) * e + math.sin(ti) * perp
                out += wi * _radial_part(k, nx * math.cos(ti), omega)
        return out
    if d == 3:
        q, _ = np.linalg.qr(np.column_stack([e, np.eye(3)]))
        f1, f2 = q[:, 1], q[:, 2]
        nphi = 24
        phis = 2 * math.pi * np.arange(nphi) / nphi
        out = 0j
        for lo in (-1.0, 0.0):
            us, w = _graded_rule(lo, lo + 1.0, 16)
            for u, wu in zip(us, w):
                s = math.sqrt(max(1 - u * u, 0.0))
                ring = 0j
                for ph in phis:
                    omega = u * e + s * (math.cos(ph) * f1 + math.sin(ph) * f2)
                    ring += _radial_part(k, nx * u, omega)
                out += wu * ring * 2 * math.pi / nphi
        return out
    raise UnsupportedError("general kappa exponents are implemented for d <= 3")


class _TabulatedPsi:
    """Spline of ``psi(xi)/(c |xi|^alpha)`` in ``log|xi|`` (d = 1, even kappa)."""

    def __init__(self, k, lo=1e-4, hi=1e4, n=161):
        self.k = k
        self.c = iso_constant(1, k.alpha)
        u = np.linspace(math.log(lo), math.log(hi), n)
        h = np.array([_psi_general(k, np.array([math.exp(s)])).real for s in u])
        h /= self.c * np.exp(u) ** k.alpha
        self.lo, self.hi = u[0], u[-1]
        self.spline = interpolate.CubicSpline(u, h)
        mid = 0.5 * (u[:-1] + u[1:])[::16]
        exact = np.array([_psi_general(k, np.array([math.exp(s)])).real for s in mid])
        exact /= self.c * np.exp(mid) ** k.alpha
        self.max_rel_error = float(np.max(np.abs(self.spline(mid) / exact - 1)))

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=float)[..., 0]
        a = np.abs(xi)
        with np.errstate(divide="ignore"):
            u = np.clip(np.log(np.where(a > 0, a, 1.0)), self.lo, self.hi)
        return (self.c * self.spline(u) * a ** self.k.alpha).astype(complex)

    def _antiderivative_table(self):
        # H(a) = int_0^a psi = int_{-inf}^{log a} c h(s) e^{(alpha+1)s} ds,
        # tabulated as a ratio to c a^{alpha+1}/(alpha+1)
        if getattr(self, "_G", None) is None:
            b = self.k.alpha + 1
            s = np.linspace(self.lo, self.hi, 4001)
            f = self.c * self.spline(s) * np.exp(b * s)
            head = self.c * float(self.spline(self.lo)) * math.exp(b * self.lo) / b
            H = head + integrate.cumulative_simpson(f, x=s, initial=0.0)
            self._G = interpolate.CubicSpline(s, H / (self.c * np.exp(b * s) / b))
            self._H_hi = float(H[-1])
        return self._G

    def antiderivative(self, a):
        """``Psi1(a) = int_0^a psi(u) du`` (odd in ``a``)."""
        G = self._antiderivative_table()
        a = np.asarray(a, dtype=float)
        b = self.k.alpha + 1
        m = np.abs(a)
        with np.errstate(divide="ignore"):
            s = np.log(np.where(m > 0, m, 1.0))
        inner = np.clip(s, self.lo, self.hi)
        ratio = np.where(s < self.lo, float(self.spline(self.lo)), G(inner))
        hs = float(self.spline(self.hi))
        above = s > self.hi
        if np.any(above):
            # beyond the table psi is continued as c h(hi) |u|^alpha
            top = (self._H_hi + self.c * hs * (np.exp(b * s) - math.exp(b * self.hi)) / b)
            ratio = np.where(above, top / (self.c * np.exp(b * s) / b), ratio)
        return np.sign(a) * ratio * self.c * m ** b / b


def fast_psi(k):
    """A vectorised exponent for repeated evaluation.

    Constant kappa and the Gaussian surrogate are already cheap; a general
    even kappa in d = 1 is tabulated once.  Other cases use the direct
    (slow) quadrature.
    """
    if isinstance(k, GaussianSurrogate) or k.isotropic:
        return lambda xi: char_exponent(k, xi)
    if k.d == 1 and k.even:
        tab = k._cache.get("tab")
        if tab is None:
            tab = k._cache["tab"] = _TabulatedPsi(k)
        return tab
    return lambda xi: char_exponent(k, xi)


def kinetic_exponent(k, xi, eta, t, rtol=1e-9, max_nodes=4096, psi=None):
    """``phi = int_0^t psi(s xi + eta) ds`` by Gauss-Legendre quadrature.

    The interval is split at the minimiser of ``|s xi + eta|`` and each
    piece is graded towards it with ``s = s_c +/- (.) u^3``, which smooths
    the ``|.|^alpha`` cusp.  Nodes double until the relative change is
    below ``rtol``.

    ``xi`` and ``eta`` broadcast against each other with the last axis of
    length d.
    """
    if not t > 0:
        raise DomainError("t must be positive")
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    if xi.ndim == 0:
        xi = xi[None]
    if eta.ndim == 0:
        eta = eta[None]
    xi, eta = np.broadcast_arrays(xi, eta)
    shape = xi.shape[:-1]
    d = xi.shape[-1]
    X = xi.reshape(-1, d)
    E = eta.reshape(-1, d)
    if psi is None:
        psi = fast_psi(k)
    xx = np.sum(X * X, axis=1)
    s0 = np.where(xx > 0, -np.sum(X * E, axis=1) / np.where(xx > 0, xx, 1.0), 0.0)
    sc = np.clip(s0, 0.0, t)

    def rule(n):
        g, w = np.polynomial.legendre.leggauss(n)
        u = 0.5 * (g + 1.0)
        w = 0.5 * w
        tot = np.zeros(len(X), dtype=complex)
        for lo_side in (False, True):
            length = sc if lo_side else t - sc
            sgn = -1.0 if lo_side else 1.0
            s = sc[:, None] + sgn * length[:, None] * u[None, :] ** 3
            jac = 3.0 * length[:, None] * u[None, :] ** 2
            vals = psi(s[..., None] * X[:, None, :] + E[:, None, :])
            tot += np.sum(w[None, :] * jac * vals, axis=1)
        return tot

    n = 16
    prev = rule(n)
    while True:
        n *= 2
        cur = rule(n)
        scale = np.maximum(np.abs(cur), 1e-300)
        if np.all(np.abs(cur - prev) <= rtol * scale) or n >= max_nodes:
            break
        prev = cur
    return cur.reshape(shape)


def kinetic_exponent_iso1(alpha, c, t, xi, eta):
    """Closed form of ``c int_0^t |s xi + eta|^alpha ds`` in d = 1."""
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    a1 = t * xi + eta
    with np.errstate(all="ignore"):
        same = (np.sign(a1) == np.sign(eta)) & (eta != 0)
        r = t * xi / np.where(eta == 0, 1.0, eta)
        stable = eta * np.abs(eta) ** alpha * np.expm1((alpha + 1) * np.log1p(r))
        direct = a1 * np.abs(a1) ** alpha - eta * np.abs(eta) ** alpha
        val = np.where(same, stable, direct) / ((alpha + 1) * xi)
        val = np.where(xi == 0, t * np.abs(eta) ** alpha, val)
    return c * val


# ----------------------------------------------------------- jump split

def jump_rate(k, eps=1.0):
    """``nu({|x| > eps})``."""
    if k.isotropic:
        return k.kappa * _sphere_area(k.d) * eps ** (-k.alpha) / k.alpha
    pts, w = sphere_points(k.d)

    def radial(omega):
        val, _ = integrate.quad(lambda r: float(k.kappa_at(r * omega)) * r ** (-1 - k.alpha),
                                eps, np.inf, epsabs=0.0, epsrel=1e-10, limit=200)
        return val
    return float(sum(wi * radial(p) for p, wi in zip(pts, w)))


def small_jump_covariance(k, eps):
    """``int_{|y| <= eps} y y^T nu(dy)`` as a d x d matrix."""
    if k.isotropic:
        s2 = k.kappa * _sphere_area(k.d) * eps ** (2 - k.alpha) / ((2 - k.alpha) * k.d)
        return s2 * np.eye(k.d)
    pts, w = sphere_points(k.d)
    out = np.zeros((k.d, k.d))
    for p, wi in zip(pts, w):
        val, _ = integrate.quad(lambda r: float(k.kappa_at(r * p)), 0.0, eps,
                                weight="alg", wvar=(1.0 - k.alpha, 0.0),
                                epsabs=0.0, epsrel=1e-10)
        out += wi * val * np.outer(p, p)
    return out


class RadialLaw:
    """Normalised restriction of nu to ``{|y| > eps}``.

    Radii come from the inverse CDF ``r = eps U^{-1/alpha}``, directions
    are uniform on the sphere and a general kappa is handled by accepting
    with probability ``kappa(y)/kappa1``.
    """

    def __init__(self, k, eps=1.0):
        self.k = k
        self.eps = float(eps)

    @property
    def proposal_rate(self):
        return self.k.kappa1 * _sphere_area(self.k.d) * self.eps ** (-self.k.alpha) / self.k.alpha

    def propose(self, rng, n):
        d, a = self.k.d, self.k.alpha
        r = self.eps * rng.random(n) ** (-1.0 / a)
        if d == 1:
            direction = np.where(rng.random(n) < 0.5, -1.0, 1.0)[:, None]
        else:
            g = rng.standard_normal((n, d))
            direction = g / np.linalg.norm(g, axis=1, keepdims=True)
        return r[:, None] * direction

    def accept(self, rng, y):
        if self.k.isotropic:
            return np.ones(len(y), dtype=bool)
        return rng.random(len(y)) * self.k.kappa1 < self.k.kappa_at(y)

    def sample(self, rng, n):
        """``n`` draws from the normalised law (rejection for general kappa)."""
        out = np.empty((0, self.k.d))
        while len(out) < n:
            m = max(n - len(out), 16)
            if not self.k.isotropic:
                m = int(m * self.k.kappa1 / self.k.kappa0) + 16
            y = self.propose(rng, m)
            out = np.concatenate([out, y[self.accept(rng, y)]])
        return out[:n]

    def cdf1(self, y):
        """CDF of the law for constant kappa in d = 1."""
        if not (self.k.isotropic and self.k.d == 1):
            raise UnsupportedError("closed-form CDF needs constant kappa and d = 1")
        y = np.asarray(y, dtype=float)
        a, e = self.k.alpha, self.eps
        with np.errstate(divide="ignore", invalid="ignore"):
            neg = 0.5 * (np.maximum(-y, e) / e) ** (-a)
            pos = 1.0 - 0.5 * (np.maximum(y, e) / e) ** (-a)
        return np.where(y < 0, neg, np.where(y < e, 0.5, pos))

    def pdf1(self, y):
        """Density of the law for constant kappa in d = 1."""
        if not (self.k.isotropic and self.k.d == 1):
            raise UnsupportedError("closed-form density needs constant kappa and d = 1")
        y = np.abs(np.asarray(y, dtype=float))
        a, e = self.k.alpha, self.eps
        with np.errstate(divide="ignore"):
            return np.where(y > e, 0.5 * a * e ** a * y ** (-1.0 - a), 0.0)


@dataclass(frozen=True)
class JumpSplit:
    """Small (``|x| <= 1``) and large (``|x| > 1``) parts of nu."""

    kernel: LevyKernel
    lam: float
    mu: RadialLaw

    def small_mass(self, r1, r2):
        """nu-mass of the annulus ``r1 < |x| <= r2`` inside the unit ball."""
        return _annulus_mass(self.kernel, max(r1, 0.0), min(r2, 1.0))

    def large_mass(self, r1, r2):
        return _annulus_mass(self.kernel, max(r1, 1.0), r2)


def _annulus_mass(k, r1, r2):
    if r2 <= r1:
        return 0.0
    if k.isotropic:
        return k.kappa * _sphere_area(k.d) * (r1 ** -k.alpha - r2 ** -k.alpha) / k.alpha
    return jump_rate(k, r1) - (jump_rate(k, r2) if np.isfinite(r2) else 0.0)


def split_measure(k):
    return JumpSplit(kernel=k, lam=jump_rate(k, 1.0), mu=RadialLaw(k, 1.0))


# ------------------------------------------------------ decomposition

def decompose_vector(u, n):
    """Write u as a sum of n vectors with norms in [1/3, 1].

    Requires ``|u| <= n`` and ``n >= 2``.  Unit vectors ``u/|u|`` are
    peeled off until two summands remain; then either ``u = u/2 + u/2``
    (``|u| > 2/3``) or ``u = -e/3 + (u + e/3)`` with ``e = u/|u|``
    (``e_1`` when u = 0).
    """
    u = np.atleast_1d(np.asarray(u, dtype=float))
    return list(decompose_vectors(u[None, :], n)[0])


def decompose_vectors(U, n):
    """Row-wise :func:`decompose_vector`; returns shape (m, n, d)."""
    U = np.asarray(U, dtype=float)
    if U.ndim != 2:
        raise DomainError("expected an (m, d) array")
    if int(n) != n or n < 2:
        raise DomainError("n must be an integer >= 2")
    n = int(n)
    norms = np.linalg.norm(U, axis=1)
    if np.any(norms > n):
        raise DomainError("|u| must not exceed n")
    m, d = U.shape
    e1 = np.zeros(d)
    e1[0] = 1.0

    def unit(r):
        nr = np.linalg.norm(r, axis=1, keepdims=True)
        return np.where(nr > 0, r / np.where(nr > 0, nr, 1.0), e1)

    out = np.empty((m, n, d))
    rest = U.copy()
    for i in range(n - 1, 1, -1):
        e = unit(rest)
        out[:, i] = e
        rest = rest - e
    nr = np.linalg.norm(rest, axis=1)
    e = unit(rest)
    small = (nr <= 2.0 / 3.0)[:, None]
    out[:, 0] = np.where(small, -e / 3.0, rest / 2.0)
    out[:, 1] = np.where(small, rest + e / 3.0, rest / 2.0)
    return out


