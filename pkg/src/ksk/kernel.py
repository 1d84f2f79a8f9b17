"""Heat kernel ``p_t(z)`` of the kinetic pair by Fourier inversion.

``p_t(x, v) = (2 pi)^{-2d} int exp(-i w.z) exp(-phi_t(w)) dw`` where
``phi_t(xi, eta) = int_0^t psi(s xi + eta) ds``.

Three routes are available.

``polar``
    For exponents homogeneous of degree alpha (constant kappa, or the
    Gaussian surrogate with alpha = 2) the radial integral is done exactly
    through tabulated ``F_m`` transforms and only an angular quadrature is
    left.  This is the accurate default.
``tensor``
    Tensor Gauss-Legendre panels inside the truncation radius (d = 1).
    Used for a general even kappa; for the Gaussian surrogate the
    frequency contour is shifted through the saddle point, which removes
    the oscillation and keeps full relative accuracy far in the tails.
``fft``
    Whole grids at once, see :func:`density_grid`.
"""
import math
import struct
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from ._radial import radial_table
from .errors import AccuracyError, ConfigurationError, DomainError, UnsupportedError
from .geometry import PhasePoint, as_phase_point, dilate, shear
from .levy import (GaussianSurrogate, LevyKernel, fast_psi, iso_constant,
                   kinetic_exponent, kinetic_exponent_iso1)

__all__ = [
    "DensityGrid",
    "GridSpec",
    "density_point",
    "density_gradient",
    "density_derivatives",
    "log_gradient",
    "density_grid",
    "density_from",
    "kolmogorov_density",
    "kolmogorov_gradient",
    "truncation_radius",
]

_GL_CACHE = {}


def _gl(n):
    r = _GL_CACHE.get(n)
    if r is None:
        r = _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return r


def _panels(edges, n):
    g, w = _gl(n)
    a, b = edges[:-1], edges[1:]
    x = (0.5 * (a + b)[:, None] + 0.5 * (b - a)[:, None] * g).ravel()
    wt = (0.5 * (b - a)[:, None] * w).ravel()
    return x, wt


# ------------------------------------------------------------ exponents

def _homogeneous_degree(k):
    return getattr(k, "homogeneous_degree", None)


def unit_exponent(k, t):
    """Vectorised ``w -> phi_t(w)`` for ``w`` of shape (..., 2d).

    Real for even kernels (the only ones the polar route accepts).
    """
    d = k.d
    if isinstance(k, GaussianSurrogate):
        return lambda w: k.kinetic_exponent(w[..., :d], w[..., d:], t)
    if k.isotropic and d == 1:
        c = iso_constant(1, k.alpha) * k.kappa
        return lambda w: kinetic_exponent_iso1(k.alpha, c, t, w[..., 0], w[..., 1])
    if d == 1 and k.even:
        return lambda w: _phi_general1(k, t, w[..., 0], w[..., 1])

    def f(w):
        return kinetic_exponent(k, w[..., :d], w[..., d:], t).real
    return f


def _phi_general1(k, t, xi, eta):
    """``int_0^t psi(s xi + eta) ds`` for a tabulated even psi in d = 1."""
    tab = fast_psi(k)
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    xi, eta = np.broadcast_arrays(xi, eta)
    with np.errstate(all="ignore"):
        out = (tab.antiderivative(t * xi + eta) - tab.antiderivative(eta)) / xi
    # short chords lose digits to cancellation; integrate those directly
    close = np.abs(t * xi) < 0.05 * np.abs(eta)
    close |= xi == 0
    if np.any(close):
        g, w = _gl(16)
        s = 0.5 * t * (g + 1.0)
        vals = tab((s[:, None] * xi[close][None, :] + eta[close][None, :])[..., None]).real
        out = np.array(out, dtype=float)
        out[close] = 0.5 * t * (w[:, None] * vals).sum(axis=0)
    return out


def _quadratic_form(k, t):
    """Matrix ``A`` with ``phi_t(w) = w.A.w / 2`` (Gaussian surrogate)."""
    n = 2 * k.d
    phi = unit_exponent(k, t)
    eye = np.eye(n)
    diag = phi(eye)
    A = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            if i == j:
                A[i, i] = 2 * diag[i]
            else:
                A[i, j] = phi(eye[i] + eye[j]) - diag[i] - diag[j]
    return A


def truncation_radius(k, t, tol=1e-8):
    """Frequency radius ``R`` beyond which ``exp(-Re phi)`` is negligible.

    ``Re phi(w) >= c min(|w|^2, |w|^alpha)`` is used with ``c`` estimated
    from samples on spheres (halved for safety); the neglected tail is
    then below ``tol`` times a matching estimate of the full integral.

    Returns
    -------
    R, c_lo, c_hi : float
    """
    n = 2 * k.d
    rng = np.random.default_rng(12345)
    if n == 2:
        th = np.linspace(0, 2 * np.pi, 256, endpoint=False)
        dirs = np.stack([np.cos(th), np.sin(th)], axis=-1)
    else:
        dirs = rng.standard_normal((512, n))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = np.logspace(-2, 2, 9)
    phi = unit_exponent(k, t)
    a = float(k.alpha)
    lo, hi = np.inf, 0.0
    for r in radii:
        ratio = np.real(phi(r * dirs)) / min(r * r, r ** a)
        lo = min(lo, float(ratio.min()))
        if r >= 1:
            # the reference integral is governed by the large-|w| regime
            hi = max(hi, float(ratio.max()))
    c_lo, c_hi = 0.5 * lo, hi
    s = n / a
    target = tol * (c_lo / c_hi) ** s
    x = special.gammainccinv(s, target)
    R = max((x / c_lo) ** (1 / a), 1.0)
    return float(R), c_lo, c_hi


# ----------------------------------------------------------------- polar

def _order_tuple(orders, n):
    orders = tuple(int(o) for o in orders)
    if len(orders) != n or min(orders) < 0:
        raise DomainError(f"derivative multi-index must have {n} nonnegative entries")
    return orders


def _polar_sum(k, z, omega, wts, Phi, orders_list, half_sphere):
    n = len(z)
    a = float(_homogeneous_degree(k))
    proj = omega @ z
    out = []
    for orders in orders_list:
        j = sum(orders)
        tab = radial_table(n - 1 + j, a)
        y = proj * Phi ** (-1.0 / a)
        K = 2.0 * np.real((1j ** j) * tab(y))
        mono = np.ones(len(Phi))
        for i, o in enumerate(orders):
            if o:
                mono = mono * omega[:, i] ** o
        val = np.sum(wts * mono * Phi ** (-(n + j) / a) * K)
        if not half_sphere:
            val *= 0.5
        out.append(val / (2 * np.pi) ** n)
    return out


def _polar_rule_1(k, t, z, phi, nodes):
    """Graded angular rule on the half circle centred at ``z``'s normal."""
    r = math.hypot(z[0], z[1])
    ts = math.atan2(z[1], z[0]) + math.pi / 2 if r > 0 else math.pi / 2
    lo, hi = ts - math.pi / 2, ts + math.pi / 2
    a = float(_homogeneous_degree(k))
    p_star = float(phi(np.array([math.cos(ts), math.sin(ts)])))
    pts = [lo, hi, ts]
    if r > 0:
        delta = min(0.25 * p_star ** (1 / a) / r, math.pi / 4)
        step = delta
        while step < math.pi / 2:
            pts += [ts - step, ts + step]
            step *= 2
    # kinks of phi: eta = 0 and t xi + eta = 0
    for base in (0.0, math.atan(-t)):
        for s in range(-3, 4):
            b = base + s * math.pi
            if lo < b < hi:
                pts.append(b)
    edges = np.unique(np.clip(pts, lo, hi))
    th, w = _panels(edges, nodes)
    omega = np.stack([np.cos(th), np.sin(th)], axis=-1)
    return omega, w


def _sphere_rule(m, n):
    """Product rule on ``S^m`` in ``R^{m+1}`` with about ``n`` nodes per angle."""
    if m == 0:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if m == 1:
        th = np.linspace(0, 2 * np.pi, 2 * n, endpoint=False)
        return np.stack([np.cos(th), np.sin(th)], axis=-1), np.full(2 * n, np.pi / n)
    c, w = special.roots_jacobi(n, (m - 2) / 2, (m - 2) / 2)
    sub, sw = _sphere_rule(m - 1, n)
    s = np.sqrt(1 - c * c)
    pts = np.concatenate([np.column_stack([np.full(len(sub), ci), si * sub]) for ci, si in zip(c, s)])
    wts = np.concatenate([wi * sw for wi in w])
    return pts, wts


def _polar_rule_n(k, t, z, phi, nodes, inner):
    """Rule on ``S^{n-1}``: graded polar angle from ``z`` times an inner sphere."""
    n = len(z)
    r = float(np.linalg.norm(z))
    zhat = z / r if r > 0 else np.eye(n)[0]
    # orthonormal complement of zhat
    q, _ = np.linalg.qr(np.column_stack([zhat, np.eye(n)]))
    basis = q[:, 1:n]
    sub, sw = _sphere_rule(n - 2, inner)
    a = float(_homogeneous_degree(k))
    eq_dirs = sub @ basis.T
    p_star = float(np.mean(phi(eq_dirs)))
    pts = [0.0, math.pi, math.pi / 2]
    if r > 0:
        delta = min(0.25 * p_star ** (1 / a) / r, math.pi / 4)
        step = delta
        while step < math.pi / 2:
            pts += [math.pi / 2 - step, math.pi / 2 + step]
            step *= 2
    th, tw = _panels(np.unique(pts), nodes)
    tw = tw * np.sin(th) ** (n - 2)
    omega = (np.cos(th)[:, None, None] * zhat[None, None, :]
             + np.sin(th)[:, None, None] * eq_dirs[None, :, :]).reshape(-1, n)
    wts = (tw[:, None] * sw[None, :]).ravel()
    return omega, wts


def _polar(k, t, z, orders_list, nodes=20, inner=None):
    if _homogeneous_degree(k) is None:
        raise UnsupportedError("the polar route needs a homogeneous exponent")
    if not k.even:
        raise UnsupportedError("the polar route needs an even kernel")
    phi = unit_exponent(k, t)
    if k.d == 1:
        omega, w = _polar_rule_1(k, t, z, phi, nodes)
        half = True
    else:
        # the inner sphere carries most of the cost and most of the error
        inner = inner or int(round(1.6 * nodes))
        omega, w = _polar_rule_n(k, t, z, phi, nodes, inner)
        half = False
    Phi = np.real(phi(omega))
    return _polar_sum(k, z, omega, w, Phi, orders_list, half)


# ---------------------------------------------------------------- tensor

def _axis_nodes(R, h, graded, n):
    if graded:
        e = [0.0]
        g = h * 2.0 ** -30
        while g < h:
            e.append(g)
            g *= 2
        e += list(np.arange(h, R + 0.5 * h, h))
    else:
        m = max(int(math.ceil(R / h)), 1)
        e = list(np.linspace(0, m * h, m + 1))
    e = np.asarray(e)
    edges = np.concatenate([-e[::-1], e[1:]])
    return _panels(edges, n)


def _tensor1(k, t, z, orders_list, nodes=12, budget=4_000_000, refine=1.0):
    """Tensor Gauss-Legendre inversion in d = 1.

    Stable kernels are integrated in ``(a, b) = (eta, t xi + eta)``, where
    the kink lines of ``phi`` become the coordinate axes and are graded.
    The Gaussian surrogate is smooth; its contour is moved to
    ``w - i A^{-1} z`` so that the integrand no longer oscillates.
    """
    if k.d != 1:
        raise UnsupportedError("the tensor route is implemented for d = 1")
    if not k.even:
        raise UnsupportedError("densities of non-even kernels are not supported")
    phi = unit_exponent(k, t)
    R, _, _ = truncation_radius(k, t)
    x, v = float(z[0]), float(z[1])
    surrogate = isinstance(k, GaussianSurrogate)
    if surrogate:
        sigma = np.linalg.solve(_quadratic_form(k, t), z)
        extents = [R, R]
        hs = [R / (8 * refine)] * 2
    else:
        sigma = np.zeros(2)
        # phase in (a, b) is a (v - x/t) + b x/t
        extents = [R, (1 + t) * R]
        hs = [min(e / 16, 4.0 / (1 + abs(f))) / refine for e, f in zip(extents, (v - x / t, x / t))]
    rules = [_axis_nodes(e, h, not surrogate, nodes) for e, h in zip(extents, hs)]
    count = len(rules[0][0]) * len(rules[1][0])
    over = count > budget
    if over:
        shrink = math.sqrt(count / budget)
        rules = [_axis_nodes(e, h * shrink, not surrogate, nodes) for e, h in zip(extents, hs)]
    (u1, w1), (u2, w2) = rules
    sums = [0j] * len(orders_list)
    block = max(1, 2_000_000 // len(u2))
    for s in range(0, len(u1), block):
        U1, U2 = u1[s:s + block, None], u2[None, :]
        W = w1[s:s + block, None] * w2[None, :]
        if surrogate:
            XI, ET = U1 - 1j * sigma[0], U2 - 1j * sigma[1]
            ex = np.exp(-1j * (XI * x + ET * v) - phi(np.stack(np.broadcast_arrays(XI, ET), axis=-1)))
        else:
            ET, XI = U1, (U2 - U1) / t
            W = W / t
            P = phi(np.stack(np.broadcast_arrays(XI, ET), axis=-1))
            ex = np.exp(-1j * (XI * x + ET * v) - P)
        for i, (jx, jv) in enumerate(orders_list):
            f = ex * W
            if jx:
                f = f * (-1j * XI) ** jx
            if jv:
                f = f * (-1j * ET) ** jv
            sums[i] += f.sum()
    vals = [float(val.real) / (2 * np.pi) ** 2 for val in sums]
    if over:
        raise AccuracyError(f"tensor grid needs {count} nodes, budget is {budget}",
                            estimate=vals[0] if len(vals) == 1 else vals, error=float("nan"))
    return vals


# ------------------------------------------------------------ front ends

def _route(k, method):
    if method != "auto":
        return method
    if isinstance(k, GaussianSurrogate):
        return "tensor" if k.d == 1 else "polar"
    if _homogeneous_degree(k) is not None:
        return "polar"
    if k.d == 1 and k.even:
        return "tensor"
    raise UnsupportedError("no density route for this kernel (need an even kernel, "
                           "homogeneous in d >= 2)")


def _evaluate(k, t, z, orders_list, method="auto", nodes=None, rtol=None):
    if not t > 0:
        raise DomainError("t must be positive")
    z = as_phase_point(z)
    if z.d != k.d:
        raise DomainError(f"phase point has d={z.d}, kernel has d={k.d}")
    zz = np.asarray(z.z, dtype=float)
    route = _route(k, method)
    if k.d >= 2 and route == "polar":
        warnings.warn("d >= 2 densities use a product sphere rule and are slow",
                      RuntimeWarning, stacklevel=3)
    if route == "polar":
        n0 = nodes or 20
        vals = _polar(k, t, zz, orders_list, nodes=n0)
        if rtol is not None:
            fine = _polar(k, t, zz, orders_list, nodes=2 * n0)
            _check(vals, fine, rtol)
            vals = fine
    elif route == "tensor":
        n0 = nodes or 12
        vals = _tensor1(k, t, zz, orders_list, nodes=n0)
        if rtol is not None:
            fine = _tensor1(k, t, zz, orders_list, nodes=n0, refine=1.5)
            _check(vals, fine, rtol)
            vals = fine
    else:
        raise ConfigurationError(f"unknown method {method!r}")
    return vals


def _check(coarse, fine, rtol):
    for c, f in zip(coarse, fine):
        err = abs(f - c)
        # absolute floor of the quadrature noise
        if err > rtol * abs(f) + 1e-16:
            raise AccuracyError(f"refinement changed the value by {err:.3g}", estimate=f, error=err)


def density_point(k, t, z, method="auto", nodes=None, rtol=None):
    """Heat kernel ``p_t(0, z)``.

    Parameters
    ----------
    k : LevyKernel or GaussianSurrogate
    t : float
    z : PhasePoint or array-like of length 2d
    method : {"auto", "polar", "tensor"}
    nodes : int, optional
        Gauss-Legendre nodes per panel.
    rtol : float, optional
        When given, the value is recomputed on a refined rule and an
        :class:`AccuracyError` is raised if the two differ by more.

    Returns
    -------
    float
    """
    n = 2 * k.d
    return _evaluate(k, t, z, [(0,) * n], method, nodes, rtol)[0]


def density_derivatives(k, t, z, orders_list, method="auto", nodes=None, rtol=None):
    """Several spectral derivatives of ``p_t`` at one point.

    ``orders_list`` holds multi-indices of length 2d (x block first).
    """
    n = 2 * k.d
    orders_list = [_order_tuple(o, n) for o in orders_list]
    if any(sum(o) > 2 for o in orders_list):
        raise DomainError("derivative order must be at most 2")
    return _evaluate(k, t, z, orders_list, method, nodes, rtol)


def density_gradient(k, t, z, jx, jv, axis=0, method="auto", nodes=None, rtol=None):
    """``d^jx/dx_axis^jx d^jv/dv_axis^jv p_t(z)`` with ``jx + jv <= 2``."""
    if jx < 0 or jv < 0 or jx + jv > 2:
        raise DomainError("need jx, jv >= 0 and jx + jv <= 2")
    d = k.d
    if not 0 <= axis < d:
        raise DomainError("axis out of range")
    orders = [0] * (2 * d)
    orders[axis] += jx
    orders[d + axis] += jv
    return _evaluate(k, t, z, [tuple(orders)], method, nodes, rtol)[0]


def log_gradient(k, t, z, method="auto", nodes=None):
    """``(grad_x log p_t, grad_v log p_t)`` at ``z``."""
    d = k.d
    orders = [(0,) * (2 * d)]
    for i in range(2 * d):
        o = [0] * (2 * d)
        o[i] = 1
        orders.append(tuple(o))
    vals = _evaluate(k, t, z, orders, method, nodes)
    p = vals[0]
    g = np.asarray(vals[1:]) / p
    return g[:d], g[d:]


def density_from(k, z0, z, t, **kwargs):
    """``p_t(z0, z) = p_t(0, z - theta_t z0)``."""
    z0 = as_phase_point(z0)
    z = as_phase_point(z)
    return density_point(k, t, z - shear(z0, t), **kwargs)


# ------------------------------------------------------------ Kolmogorov

def _kolmogorov_quad(x, v, t):
    return -3 * x * x / t ** 3 + 3 * x * v / t ** 2 - v * v / t


def kolmogorov_density(z0, z, t):
    """Transition density of ``(int_0^t B_s ds, B_t)`` for generator ``Delta_v + v.grad_x``.

    Per coordinate the pair is Gaussian with mean ``(x0 + t v0, v0)`` and
    covariance ``[[2t^3/3, t^2], [t^2, 2t]]``.
    """
    if not t > 0:
        raise DomainError("t must be positive")
    z0, z = as_phase_point(z0), as_phase_point(z)
    w = z - shear(z0, t)
    x, v = np.asarray(w.x), np.asarray(w.v)
    d = w.d
    return float((math.sqrt(3) / (2 * math.pi * t * t)) ** d * math.exp(np.sum(_kolmogorov_quad(x, v, t))))


def kolmogorov_gradient(z0, z, t):
    """``(grad_x p, grad_v p)`` of :func:`kolmogorov_density`."""
    z0, z = as_phase_point(z0), as_phase_point(z)
    w = z - shear(z0, t)
    x, v = np.asarray(w.x), np.asarray(w.v)
    p = kolmogorov_density(z0, z, t)
    gx = (-6 * x / t ** 3 + 3 * v / t ** 2) * p
    gv = (3 * x / t ** 2 - 2 * v / t) * p
    return gx, gv


# ------------------------------------------------------------------ grids

@dataclass(frozen=True)
class GridSpec:
    """Uniform origin-centred grid: ``n_i`` nodes ``(j - n_i/2) h_i``.

    Parameters
    ----------
    extent : sequence of float
        Half-widths per coordinate (x block, then v block).
    step : sequence of float
    """

    extent: tuple
    step: tuple

    def __post_init__(self):
        ext = tuple(float(e) for e in self.extent)
        st = tuple(float(s) for s in self.step)
        if len(ext) != len(st) or len(ext) % 2:
            raise ConfigurationError("extent and step need 2d entries each")
        if min(ext) <= 0 or min(st) <= 0:
            raise ConfigurationError("extent and step must be positive")
        object.__setattr__(self, "extent", ext)
        object.__setattr__(self, "step", st)
        for n in self.counts:
            if n % 2:
                raise ConfigurationError("grid node counts must be even")

    @classmethod
    def phase(cls, d, x_extent, v_extent, x_step, v_step):
        return cls((x_extent,) * d + (v_extent,) * d, (x_step,) * d + (v_step,) * d)

    @property
    def d(self):
        return len(self.extent) // 2

    @property
    def counts(self):
        return tuple(2 * int(round(e / s)) for e, s in zip(self.extent, self.step))

    def axes(self):
        return tuple((np.arange(n) - n // 2) * h for n, h in zip(self.counts, self.step))


@dataclass(frozen=True, eq=False)
class DensityGrid:
    """Kernel values on a uniform phase-space grid.

    ``values`` are raw (tiny negative ringing kept); :attr:`clamped` is
    the reporting view.
    """

    t: float
    kernel: object
    axes: tuple
    values: np.ndarray
    mass: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values.setflags(write=False)

    @property
    def d(self):
        return len(self.axes) // 2

    @property
    def steps(self):
        return tuple(float(a[1] - a[0]) for a in self.axes)

    @property
    def clamped(self):
        return np.maximum(self.values, 0.0)

    def nearest(self, z):
        idx = tuple(int(round((zi - a[0]) / (a[1] - a[0]))) for zi, a in zip(np.ravel(z), self.axes))
        return self.values[idx]

    def box_probabilities(self, edges):
        """Simpson integrals over boxes whose edges fall on grid nodes (d = 1).

        Parameters
        ----------
        edges : (x_edges, v_edges)

        Returns
        -------
        ndarray of shape (len(x_edges)-1, len(v_edges)-1)
        """
        if self.d != 1:
            raise UnsupportedError("box integrals are implemented for d = 1")
        idx = []
        for e, a in zip(edges, self.axes):
            h = a[1] - a[0]
            i = np.rint((np.asarray(e) - a[0]) / h).astype(int)
            if np.any(np.abs(a[0] + i * h - e) > 1e-9 * h) or i.min() < 0 or i.max() >= len(a):
                raise ConfigurationError("box edges must lie on grid nodes")
            idx.append(i)
        (ix, iv), (hx, hv) = idx, self.steps
        out = np.empty((len(ix) - 1, len(iv) - 1))
        for a in range(len(ix) - 1):
            col = integrate.simpson(self.values[ix[a]:ix[a + 1] + 1], dx=hx, axis=0)
            for b in range(len(iv) - 1):
                out[a, b] = integrate.simpson(col[iv[b]:iv[b + 1] + 1], dx=hv)
        return out

    # serialisation
    def to_csv(self, path, header=""):
        names = [f"x{i + 1}" for i in range(self.d)] + [f"v{i + 1}" for i in range(self.d)]
        mesh = np.meshgrid(*self.axes, indexing="ij")
        cols = np.column_stack([m.ravel() for m in mesh] + [self.values.ravel()])
        with open(path, "w") as fh:
            for line in header.splitlines():
                fh.write(f"# {line}\n")
            fh.write(",".join(names + ["value"]) + "\n")
            np.savetxt(fh, cols, delimiter=",", fmt="%.17g")

    _MAGIC = b"KSKGRID\0"

    def to_binary(self, path, header=""):
        """Little-endian layout: magic, u32 version, u32 d, f64 t, f64 alpha,
        u32 header length and UTF-8 header, then per axis (u64 n, f64 start,
        f64 step), then row-major f64 values."""
        alpha = float(getattr(self.kernel, "alpha", self.meta.get("alpha", float("nan"))))
        hb = header.encode()
        with open(path, "wb") as fh:
            fh.write(self._MAGIC)
            fh.write(struct.pack("<IIddI", 1, self.d, float(self.t), alpha, len(hb)))
            fh.write(hb)
            for a in self.axes:
                fh.write(struct.pack("<Qdd", len(a), float(a[0]), float(a[1] - a[0])))
            fh.write(np.ascontiguousarray(self.values, dtype="<f8").tobytes())

    @classmethod
    def from_binary(cls, path, kernel=None):
        with open(path, "rb") as fh:
            if fh.read(8) != cls._MAGIC:
                raise ConfigurationError("not a density grid file")
            version, d, t, alpha, hl = struct.unpack("<IIddI", fh.read(28))
            if version != 1:
                raise ConfigurationError(f"unsupported grid file version {version}")
            header = fh.read(hl).decode()
            axes = []
            for _ in range(2 * d):
                n, a0, h = struct.unpack("<Qdd", fh.read(24))
                axes.append(a0 + h * np.arange(n))
            vals = np.frombuffer(fh.read(), dtype="<f8").reshape([len(a) for a in axes]).copy()
        h = np.prod([a[1] - a[0] for a in axes])
        return cls(t, kernel, tuple(axes), vals, float(vals.sum() * h),
                   {"alpha": alpha, "header": header})


def density_grid(k, t, spec, method="fft", pad=2, tol=1e-8):
    """Kernel values on the nodes of ``spec``.

    ``method="fft"`` samples ``exp(-phi)`` on the dual grid of a grid
    ``pad`` times wider and crops; the dual half-width ``pi/h`` must reach
    the truncation radius at tail tolerance ``tol``.  ``method="direct"`` evaluates
    :func:`density_point` at each node.
    """
    if not t > 0:
        raise DomainError("t must be positive")
    if spec.d != k.d:
        raise ConfigurationError("grid and kernel dimensions differ")
    axes = spec.axes()
    n = 2 * k.d
    hvol = float(np.prod(spec.step))
    if method == "direct":
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.column_stack([m.ravel() for m in mesh])
        vals = np.array([density_point(k, t, p) for p in pts]).reshape(mesh[0].shape)
        return DensityGrid(float(t), k, axes, vals, float(vals.sum() * hvol),
                           {"method": "direct", "nodes": pts.shape[0]})
    if method != "fft":
        raise ConfigurationError(f"unknown grid method {method!r}")
    if pad < 1 or int(pad) != pad:
        raise ConfigurationError("pad must be a positive integer")
    R, _, _ = truncation_radius(k, t, tol)
    for h in spec.step:
        if math.pi / h < R:
            raise ConfigurationError(
                f"step {h} gives dual half-width {math.pi / h:.3g} below truncation radius {R:.3g}; "
                f"use a step <= {math.pi / R:.3g}, a larger tol, or method='direct'")
    counts = [int(pad) * c for c in spec.counts]
    freqs = [(np.arange(N) - N // 2) * (2 * np.pi / (N * h)) for N, h in zip(counts, spec.step)]
    phi = unit_exponent(k, t)
    W = np.stack(np.meshgrid(*freqs, indexing="ij"), axis=-1)
    E = np.exp(-phi(W))
    del W
    F = np.fft.fftshift(np.fft.fftn(np.fft.ifftshift(E)))
    dw = np.prod([f[1] - f[0] for f in freqs])
    vals = np.real(F) * dw / (2 * np.pi) ** n
    # the padded grid starts at -N/2 h; crop to the requested nodes
    sl = tuple(slice(N // 2 - c // 2, N // 2 - c // 2 + c) for N, c in zip(counts, spec.counts))
    full_mass = float(vals.sum() * hvol)
    vals = np.ascontiguousarray(vals[sl])
    return DensityGrid(float(t), k, axes, vals, float(vals.sum() * hvol),
                       {"method": "fft", "truncation_radius": R, "pad": int(pad),
                        "fft_shape": tuple(counts), "padded_mass": full_mass})
