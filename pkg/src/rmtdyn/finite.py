"""Exact finite-(N, M) kernel of Y = X_M^dagger X_M by contour quadrature.

    K_Y(x, y) = (1/x) sum_{j=1}^N (x/y)^j G_j(y),

    G_j(y) = int dt/(2 pi i) sin(pi t)/(pi t) y^t
             (Gamma(j-t)/Gamma(j))^(M+1) Gamma(N-j+1+t)/Gamma(N-j+1),

with the contour on the imaginary axis, t = i tau, and M the number of
Ginibre factors (M = 1 gives the exponential law of |g|^2).  On that line

    G_j(y) = (1/2 pi) int A_j(tau) exp(i tau log y) dtau,

where A_j collects the gamma ratios and sinh(pi tau)/(pi tau); A_j(0) = 1
and |A_j| decays like exp(-M pi |tau| / 2).  A_j is assembled from complex
log-gamma values and exponentiated once, the integral is the trapezoidal
rule on a uniform tau grid, and every result is checked against a
half-step / doubled-cutoff evaluation.

For M = 0 (no factors, Y = identity) the integrand does not decay and
:class:`ConvergenceError` is raised.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exceptions import ConvergenceError
from .specfun import digamma, log_gamma_complex

__all__ = [
    "FiniteKernelConfig",
    "FiniteKernel",
    "G_j",
    "kernel_KY",
    "kernel_KL",
    "kernel_Ku",
]

_T_MAX = 2000.0
# evaluation points per block, bounding the (ntau, points) phase matrix
_BLOCK = 512


@dataclass(frozen=True)
class FiniteKernelConfig:
    """Quadrature settings.  ``h`` and ``T`` default to automatic choices."""

    n: int
    m: int
    h: float | None = None
    T: float | None = None
    tol: float = 1e-10
    max_refinements: int = 4

    def __post_init__(self):
        if self.n < 1 or self.m < 0:
            raise ValueError("need n >= 1 and m >= 0")
        if (self.h is not None and self.h <= 0) or (self.T is not None and self.T <= 0):
            raise ValueError("h and T must be positive")


def _log_sinhc(tau):
    # log(sinh(pi tau)/(pi tau)), stable for large |tau|, = 0 at tau = 0
    a = np.pi * np.abs(tau)
    out = np.zeros_like(a)
    small = a < 1e-4
    out[small] = a[small] ** 2 / 6
    big = ~small
    ab = a[big]
    out[big] = ab + np.log1p(-np.exp(-2 * ab)) - np.log(2 * ab)
    return out


class FiniteKernel:
    """Finite-(N, M) kernel evaluator; all public methods are vectorised."""

    def __init__(self, cfg):
        self.cfg = cfg
        self.n = cfg.n
        self.m = cfg.m
        j = np.arange(1, self.n + 1, dtype=float)
        self._j = j
        self._lg_j = log_gamma_complex(j).real
        self._lg_nj = log_gamma_complex(self.n - j + 1).real
        # phase centre: d/dtau arg A_j at 0, so A_j e^{i tau L} is slow near L = c_j
        self.centre = (self.m + 1) * digamma(j) - digamma(self.n - j + 1)
        self.T = cfg.T if cfg.T is not None else self._auto_cutoff()

    def log_integrand(self, tau):
        """log A_j(tau), shape ``(n, len(tau))``."""
        tau = np.atleast_1d(np.asarray(tau, float))
        t = 1j * tau[None, :]
        j = self._j[:, None]
        return ((self.m + 1) * (log_gamma_complex(j - t) - self._lg_j[:, None])
                + log_gamma_complex(self.n - j + 1 + t) - self._lg_nj[:, None]
                + _log_sinhc(tau)[None, :])

    def _auto_cutoff(self):
        # smallest T (on a 0.25 grid) beyond which every |A_j| < tol * 1e-3,
        # confirmed over the following doubling range
        target = np.log(self.cfg.tol * 1e-3)
        T = 1.0
        while T <= _T_MAX:
            probe = np.linspace(T, 2 * T, 64)
            if self.log_integrand(probe).real.max() < target:
                return T
            T *= 1.25
        raise ConvergenceError(
            f"integrand of G_j does not decay below tol for |tau| <= {_T_MAX} "
            f"(N={self.n}, M={self.m}); M >= 1 is required"
        )

    def _grid(self, L, h=None, T=None):
        T = self.T if T is None else T
        if h is None:
            h = self.cfg.h if self.cfg.h is not None else self.default_step(L)
        k = int(np.ceil(T / h))
        return np.arange(-k, k + 1) * h, h

    def default_step(self, L):
        """h = pi / (8 (1 + max |log y - c_j|)) for the oscillation of the integrand."""
        L = np.atleast_1d(L)
        dev = np.abs(L[:, None] - self.centre[None, :]).max() if L.size else 0.0
        return np.pi / (8 * (1 + dev))

    def _g_raw(self, L, h=None, T=None):
        tau, h = self._grid(L, h, T)
        A = np.exp(self.log_integrand(tau))
        out = np.empty((self.n, L.size))
        for b in range(0, L.size, _BLOCK):
            # (n, ntau) @ (ntau, block)
            phases = np.exp(1j * np.outer(tau, L[b:b + _BLOCK]))
            out[:, b:b + _BLOCK] = (A @ phases).real
        return out * h / (2 * np.pi)

    def _certified(self, fn, L):
        L = np.atleast_1d(np.asarray(L, float))
        h = self.cfg.h if self.cfg.h is not None else self.default_step(L)
        base = fn(L, h, self.T)
        for _ in range(self.cfg.max_refinements + 1):
            fine = fn(L, h / 2, self.T)
            wide = fn(L, h, 2 * self.T)
            err = max(np.abs(fine - base).max(), np.abs(wide - base).max())
            if err <= self.cfg.tol:
                return fine, err
            h /= 2
            base = fine
        raise ConvergenceError(
            f"G_j quadrature not within tol={self.cfg.tol:g} (last change {err:.2e}, "
            f"h={h:.2e}, T={self.T:g}, N={self.n}, M={self.m})"
        )

    def g_all(self, y, return_error=False):
        """G_j(y) for every j = 1..N; shape ``(n,) + y.shape``."""
        y = np.asarray(y, float)
        if np.any(y <= 0):
            raise ValueError("G_j requires y > 0")
        vals, err = self._certified(self._g_raw, np.log(y).ravel())
        vals = vals.reshape((self.n,) + y.shape)
        return (vals, err) if return_error else vals

    def g(self, y, j):
        if not 1 <= j <= self.n:
            raise ValueError("need 1 <= j <= n")
        return self.g_all(y)[j - 1]

    def _sum_weighted(self, log_ratio, log_y):
        # sum_j exp(j * log_ratio) G_j(y) with G_j from log_y
        log_ratio, log_y = np.broadcast_arrays(np.asarray(log_ratio, float),
                                               np.asarray(log_y, float))
        shape = log_y.shape
        g, _ = self._certified(self._g_raw, log_y.ravel())
        weights = np.exp(self._j[:, None] * log_ratio.ravel()[None, :])
        return (weights * g).sum(axis=0).reshape(shape)

    def KY(self, x, y):
        """K_Y(x, y) for x, y > 0."""
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        if np.any(x <= 0) or np.any(y <= 0):
            raise ValueError("K_Y requires x, y > 0")
        lx, ly = np.log(x), np.log(y)
        out = self._sum_weighted(lx - ly, ly) / x
        return out.item() if out.ndim == 0 else out

    def KL(self, lam_x, lam_y):
        """Kernel of the Lyapunov exponents, lambda = log(y) / (2M)."""
        lx, ly = np.broadcast_arrays(np.asarray(lam_x, float), np.asarray(lam_y, float))
        two_m = 2.0 * self.m
        out = two_m * self._sum_weighted(two_m * (lx - ly), two_m * ly)
        return out.item() if out.ndim == 0 else out

    def Ku(self, px, py):
        """Kernel of u = Y^(1/M) / N at (px, py), px, py > 0."""
        px, py = np.broadcast_arrays(np.asarray(px, float), np.asarray(py, float))
        if np.any(px <= 0) or np.any(py <= 0):
            raise ValueError("K_u requires px, py > 0")
        m, n = self.m, self.n
        ly = m * np.log(py * n)
        out = (m / px) * self._sum_weighted(m * (np.log(px) - np.log(py)), ly)
        return out.item() if out.ndim == 0 else out

    def _cdf_raw(self, L, h, T):
        # per-j CDF in log y: 1/2 + (1/pi) int_0^inf Im(A_j e^{i tau L}) / tau dtau
        k = int(np.ceil(T / h))
        tau = np.arange(1, k + 1) * h
        A = np.exp(self.log_integrand(tau)) / tau[None, :]
        f = np.empty((self.n, L.size))
        for b in range(0, L.size, _BLOCK):
            f[:, b:b + _BLOCK] = (A @ np.exp(1j * np.outer(tau, L[b:b + _BLOCK]))).imag
        # tau -> 0 limit of the integrand
        f0 = L[None, :] - self.centre[:, None]
        return 0.5 + (h / np.pi) * (0.5 * f0 + f)

    def diagonal_cdf(self, x):
        """Expected number of eigenvalues of Y below x (from 0 to N)."""
        x = np.asarray(x, float)
        out = np.zeros(x.shape)
        pos = x > 0
        if pos.any():
            vals, _ = self._certified(self._cdf_raw, np.log(x[pos]))
            out[pos] = vals.sum(axis=0)
        return out.item() if out.ndim == 0 else out

    def diagonal_cdf_L(self, lam):
        return self.diagonal_cdf(np.exp(2.0 * self.m * np.asarray(lam, float)))

    def diagonal_cdf_u(self, p):
        p = np.asarray(p, float)
        return self.diagonal_cdf(np.where(p > 0, (np.maximum(p, 1e-300) * self.n), 0.0) ** self.m)


@lru_cache(maxsize=32)
def _kernel_for(cfg):
    return FiniteKernel(cfg)


def _cfg(n, m, cfg):
    if cfg is None:
        return FiniteKernelConfig(n, m)
    if (cfg.n, cfg.m) != (n, m):
        raise ValueError("cfg does not match (n, m)")
    return cfg


def G_j(y, j, n, m, cfg=None):
    """The contour integral G_j(y), certified to ``cfg.tol``."""
    return _kernel_for(_cfg(n, m, cfg)).g(y, j)


def kernel_KY(x, y, n, m, cfg=None):
    return _kernel_for(_cfg(n, m, cfg)).KY(x, y)


def kernel_KL(lam_x, lam_y, n, m, cfg=None):
    return _kernel_for(_cfg(n, m, cfg)).KL(lam_x, lam_y)


def kernel_Ku(px, py, n, m, cfg=None):
    return _kernel_for(_cfg(n, m, cfg)).Ku(px, py)
