"""Phase-space primitives.

A phase point is ``z = (x, v)`` with position ``x`` and velocity ``v`` in
R^d.  The maps here are the chord ``x - s v``, the anisotropic dilation
``(t^{-1/a-1} x, t^{-1/a} v)`` and the free-transport shear
``(x + t v, v)``.

Every function accepts either a :class:`PhasePoint` or plain arrays.  The
``*_arrays`` variants work on batches, with the last axis of ``x`` and
``v`` holding the d coordinates.
"""
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "PhasePoint",
    "as_phase_point",
    "gamma",
    "dilate",
    "shear",
    "min_gamma",
    "min_gamma_arrays",
    "split_z",
]


@dataclass(frozen=True, eq=False)
class PhasePoint:
    """A point ``(x, v)`` of R^d x R^d."""

    x: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float).reshape(-1)
        v = np.array(self.v, dtype=float).reshape(-1)
        if x.shape != v.shape or x.size == 0:
            raise DomainError("x and v must be non-empty vectors of equal length")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v))):
            raise DomainError("phase point coordinates must be finite")
        x.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "v", v)

    @property
    def d(self):
        return self.x.size

    @property
    def z(self):
        """The concatenated 2d-vector ``(x, v)``."""
        return np.concatenate([self.x, self.v])

    @property
    def norm(self):
        return float(np.sqrt(self.x @ self.x + self.v @ self.v))

    @classmethod
    def from_z(cls, z):
        z = np.asarray(z, dtype=float).reshape(-1)
        if z.size % 2:
            raise DomainError("a phase vector has even length 2d")
        d = z.size // 2
        return cls(z[:d], z[d:])

    def __sub__(self, other):
        return PhasePoint(self.x - other.x, self.v - other.v)

    def __add__(self, other):
        return PhasePoint(self.x + other.x, self.v + other.v)

    def __eq__(self, other):
        if not isinstance(other, PhasePoint):
            return NotImplemented
        return np.array_equal(self.x, other.x) and np.array_equal(self.v, other.v)

    def __hash__(self):
        return hash((self.x.tobytes(), self.v.tobytes()))

    def __repr__(self):
        return f"PhasePoint(x={self.x.tolist()}, v={self.v.tolist()})"


def as_phase_point(z):
    """Coerce a PhasePoint, an ``(x, v)`` pair or a flat 2d-vector."""
    if isinstance(z, PhasePoint):
        return z
    if isinstance(z, tuple) and len(z) == 2:
        return PhasePoint(*z)
    return PhasePoint.from_z(z)


def split_z(z):
    """Split an array of shape (..., 2d) into ``(x, v)`` of shape (..., d)."""
    z = np.asarray(z, dtype=float)
    if z.shape[-1] % 2:
        raise DomainError("last axis must have even length 2d")
    d = z.shape[-1] // 2
    return z[..., :d], z[..., d:]


def gamma(z, s):
    """Chord map ``x - s v``."""
    z = as_phase_point(z)
    return z.x - s * z.v


def dilate(z, t, alpha):
    """Anisotropic dilation ``(t^{-1/alpha-1} x, t^{-1/alpha} v)``."""
    if not t > 0:
        raise DomainError(f"dilation needs t > 0, got {t!r}")
    z = as_phase_point(z)
    return PhasePoint(t ** (-1.0 / alpha - 1.0) * z.x, t ** (-1.0 / alpha) * z.v)


def shear(z, t):
    """Free transport ``(x + t v, v)``."""
    z = as_phase_point(z)
    return PhasePoint(z.x + t * z.v, z.v)


def min_gamma_arrays(x, v):
    """Batch version of :func:`min_gamma`.

    Parameters
    ----------
    x, v : array_like, shape (..., d)

    Returns
    -------
    s_star, value : ndarray, shape (...)
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    xv = np.sum(x * v, axis=-1)
    vv = np.sum(v * v, axis=-1)
    safe = np.where(vv > 0, vv, 1.0)
    s0 = np.where(vv > 0, xv / safe, 0.0)
    s_star = np.clip(s0, 0.0, 1.0)
    value = np.sqrt(np.sum((x - s_star[..., None] * v) ** 2, axis=-1))
    return s_star, value


def min_gamma(z):
    """Minimise ``|x - s v|`` over ``s`` in [0, 1].

    Uses the clamped projection ``s0 = <x, v>/|v|^2`` (``s0 = 0`` when
    ``v = 0``).

    Returns
    -------
    s_star : float
    value : float
    """
    z = as_phase_point(z)
    s, val = min_gamma_arrays(z.x, z.v)
    return float(s), float(val)
