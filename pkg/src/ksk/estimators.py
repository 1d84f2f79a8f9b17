"""scikit-learn style wrappers.

The heat kernel has no parameters to learn from data, so ``fit`` only
validates hyperparameters and builds the kernel object.  The wrappers
exist so that the density, the envelope and the phase rescaling compose
with pipelines and model-selection utilities.
"""
import numpy as np
from sklearn.base import BaseEstimator, DensityMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .bounds import BoundParams, n_beta
from .errors import ConfigurationError
from .kernel import density_derivatives, density_point
from .levy import GaussianSurrogate, LevyKernel
from .simulate import SimConfig, simulate_endpoints

__all__ = ["KineticHeatKernel", "EnvelopeTransformer", "KineticPhaseScaler"]


def _kernel(d, alpha, kappa, kind):
    if kind == "gaussian":
        return GaussianSurrogate(d=d)
    return LevyKernel.named(kind, d, alpha, kappa)


def _rows(Z, d):
    Z = check_array(Z, dtype=float)
    if Z.shape[1] != 2 * d:
        raise ConfigurationError(f"expected {2 * d} columns (x then v), got {Z.shape[1]}")
    return Z


class KineticHeatKernel(DensityMixin, BaseEstimator):
    """Density of ``(X_t, V_t)`` started at the origin.

    Parameters
    ----------
    d : int
        Dimension of position and of velocity.
    alpha : float
        Stability index in (0, 2).
    kappa : float
        Constant jump intensity.
    t : float
        Time.
    kind : {"constant", "anisotropic-even", "non-symmetric", "gaussian"}
        Built-in jump kernel.
    method : str
        Inversion route passed to :func:`ksk.kernel.density_point`.
    """

    def __init__(self, d=1, alpha=1.5, kappa=1.0, t=1.0, kind="constant", method="auto"):
        self.d = d
        self.alpha = alpha
        self.kappa = kappa
        self.t = t
        self.kind = kind
        self.method = method

    def fit(self, X=None, y=None):
        """Build the kernel; ``X`` is ignored beyond a shape check."""
        if not self.t > 0:
            raise ConfigurationError("t must be positive")
        self.kernel_ = _kernel(self.d, self.alpha, self.kappa, self.kind)
        if X is not None:
            _rows(X, self.d)
        self.n_features_in_ = 2 * self.d
        return self

    def density(self, Z):
        check_is_fitted(self)
        Z = _rows(Z, self.d)
        return np.array([density_point(self.kernel_, self.t, z, method=self.method) for z in Z])

    def score_samples(self, Z):
        """Log density at each row of ``Z``."""
        with np.errstate(divide="ignore"):
            return np.log(self.density(Z))

    def score(self, Z, y=None):
        return float(np.mean(self.score_samples(Z)))

    def gradient(self, Z):
        """Spatial gradient ``(grad_x p, grad_v p)`` per row, shape (n, 2d)."""
        check_is_fitted(self)
        Z = _rows(Z, self.d)
        n = 2 * self.d
        orders = [tuple(int(i == j) for i in range(n)) for j in range(n)]
        return np.array([density_derivatives(self.kernel_, self.t, z, orders, method=self.method)
                         for z in Z])

    def sample(self, n_samples=1, random_state=0, small_jump_cutoff=0.05):
        """Draw endpoints ``(X_t, V_t)`` by simulation, shape (n, 2d)."""
        check_is_fitted(self)
        if isinstance(self.kernel_, GaussianSurrogate):
            raise ConfigurationError("sampling is implemented for jump kernels only")
        seed = random_state if isinstance(random_state, (int, np.integer)) else \
            int(np.random.default_rng(random_state).integers(2 ** 32))
        cfg = SimConfig(seed=seed, n_paths=n_samples, small_jump_cutoff=small_jump_cutoff, t=self.t)
        X, V = simulate_endpoints(self.kernel_, cfg)
        return np.hstack([X, V])


class EnvelopeTransformer(TransformerMixin, BaseEstimator):
    """Map phase points to ``log N_beta`` (one output column).

    ``beta`` defaults to ``d + alpha``.
    """

    def __init__(self, d=1, alpha=1.5, beta=None):
        self.d = d
        self.alpha = alpha
        self.beta = beta

    def fit(self, X=None, y=None):
        beta = self.d + self.alpha if self.beta is None else self.beta
        self.params_ = BoundParams(beta, self.d)
        self.n_features_in_ = 2 * self.d
        return self

    def transform(self, X):
        check_is_fitted(self)
        Z = _rows(X, self.d)
        return np.log(n_beta(Z, self.params_)).reshape(-1, 1)


class KineticPhaseScaler(TransformerMixin, BaseEstimator):
    """The anisotropic dilation ``(t^{-1/alpha-1} x, t^{-1/alpha} v)``.

    It maps the time-``t`` kernel's natural coordinates to time one, so
    ``p_t(z) = t^{-2d/alpha-d} p_1(transform(z))`` for constant intensity.
    """

    def __init__(self, d=1, alpha=1.5, t=1.0):
        self.d = d
        self.alpha = alpha
        self.t = t

    def fit(self, X=None, y=None):
        if not self.t > 0:
            raise ConfigurationError("t must be positive")
        self.sx_ = self.t ** (-1.0 / self.alpha - 1.0)
        self.sv_ = self.t ** (-1.0 / self.alpha)
        self.n_features_in_ = 2 * self.d
        return self

    def _scale(self, X, sx, sv):
        Z = _rows(X, self.d).copy()
        Z[:, :self.d] *= sx
        Z[:, self.d:] *= sv
        return Z

    def transform(self, X):
        check_is_fitted(self)
        return self._scale(X, self.sx_, self.sv_)

    def inverse_transform(self, X):
        check_is_fitted(self)
        return self._scale(X, 1 / self.sx_, 1 / self.sv_)

    def jacobian(self):
        """Density factor ``t^{-2d/alpha-d}``."""
        check_is_fitted(self)
        return (self.sx_ * self.sv_) ** self.d

