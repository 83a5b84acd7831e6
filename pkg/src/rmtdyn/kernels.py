"""Limiting determinantal kernels parameterised by the width-to-spacing ratio w.

Two families are evaluated from their series:

* ``kernel_Kw`` -- Fourier-mode sum over k for Dyson Brownian motion from
  an equidistant start (``kernel_Kt`` is the same kernel in unscaled
  coordinates);
* ``kernel_Khat`` -- sum over lattice sites nu of erfi terms, the local
  kernel of the unfolded Lyapunov spectrum (``kernel_Kp`` is it at
  w = sqrt(a p)).

Both tend to the sine kernel for w -> infinity and to a Dirac comb for
w -> 0.  They describe the same point process: their diagonals and all
determinants coincide, while off the diagonal they differ by the gauge
factor exp(-(xi^2 - zeta^2) / (2 w^2)).

Accuracy of ``kernel_Khat``: each term is assembled in log-magnitude form
and scaled by the gauge factor, so the reported error bound refers to the
gauge-balanced value ``exp(-(xi^2 - zeta^2)/(2 w^2)) * Khat``.  For large w
the nu-sum cancels catastrophically (terms of size exp(pi^2 w^2 / 2)); a
posteriori bounds detect this and those points are re-summed with mpmath
at the precision the bound asks for.
"""
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .specfun import erfi_real_scaled

__all__ = [
    "KW_TOL",
    "KHAT_TOL",
    "kw_cutoff",
    "kernel_Kw",
    "kernel_Kt",
    "sine_kernel",
    "khat_cutoff",
    "kernel_Khat",
    "kernel_Kp",
    "density_Kw",
    "density_Rhat",
    "KernelEvaluator",
    "make_kernel",
    "correlation_Rk",
    "DualityReport",
    "duality_report",
]

KW_TOL = 1e-13
KHAT_TOL = 1e-10
_EPS = np.finfo(float).eps
_SQRT2 = np.sqrt(2.0)


def _positive_w(w):
    if not w > 0:
        raise ValueError("w must be > 0 (w = 0 is the Dirac comb, not evaluable pointwise)")
    return float(w)


def kw_cutoff(w, tol=KW_TOL):
    """Cutoff K for the k-sum and a bound on the discarded tail.

    Terms k and 1 - k carry the same factor exp(-2 pi^2 w^2 k (k-1)), so the
    sum runs over k = 1-K .. K.
    """
    w = _positive_w(w)
    a = 2 * np.pi**2 * w * w
    K = 1
    while np.exp(-a * K * (K - 1)) / (2 * np.pi * w * w * K) >= tol / 10:
        K += 1
    last = np.exp(-a * K * (K - 1)) / (2 * np.pi * w * w * K)
    ratio = np.exp(-2 * a * K)
    tail = 2 * last * ratio / (1 - ratio) / np.pi if ratio < 1 else np.inf
    return K, tail


def kernel_Kw(xi, zeta, w, tol=KW_TOL, cutoff=None):
    r"""Rescaled Dyson kernel

    .. math::
        K_w(\xi,\zeta) = \frac{1}{\pi}\,\mathrm{Re}\sum_k
        e^{-2\pi^2 w^2 k(k-1)}
        \frac{e^{i\pi((2k-1)\xi+\zeta)}}{2\pi w^2 k + i(\zeta-\xi)} .

    The k = 0 term equals the sine kernel and is evaluated as such, which
    also handles the diagonal limit.
    """
    w = _positive_w(w)
    K = kw_cutoff(w, tol)[0] if cutoff is None else int(cutoff)
    xi, zeta = np.broadcast_arrays(np.asarray(xi, float), np.asarray(zeta, float))
    shape = xi.shape
    x = xi.reshape(-1, 1)
    z = zeta.reshape(-1, 1)
    k = np.arange(1 - K, K + 1)
    k = k[k != 0].astype(float)
    weight = np.exp(-2 * np.pi**2 * w * w * k * (k - 1))
    phase = np.exp(1j * np.pi * ((2 * k - 1) * x + z))
    terms = weight * phase / (2 * np.pi * w * w * k + 1j * (z - x))
    out = terms.real.sum(axis=1) / np.pi + np.sinc(z - x)[:, 0]
    out = out.reshape(shape)
    return out.item() if out.ndim == 0 else out


def kernel_Kt(x, y, s, w, tol=KW_TOL, cutoff=None):
    """Johansson kernel K_t(x, y) = K_w(x/s, y/s) / s with w = sigma_c sqrt(t)/s."""
    if not s > 0:
        raise ValueError("s must be > 0")
    return kernel_Kw(np.asarray(x) / s, np.asarray(y) / s, w, tol, cutoff) / s


def sine_kernel(xi, zeta):
    """sin(pi (xi - zeta)) / (pi (xi - zeta)), equal to 1 on the diagonal."""
    out = np.sinc(np.asarray(xi, float) - np.asarray(zeta, float))
    return out.item() if np.ndim(out) == 0 else out


def density_Kw(xi, w, **kw):
    return kernel_Kw(xi, xi, w, **kw)


def khat_cutoff(w, tol=KHAT_TOL):
    """Half-width R of the nu-window around round(xi).

    Relative to the largest term, the term at distance d from the window
    centre is suppressed by exp(-d^2 / (2 w^2)); R makes that smaller than
    tol * exp(-5) times exp(-pi^2 w^2 / 2), the worst cancellation scale.
    """
    w = _positive_w(w)
    depth = np.pi**2 * w * w / 2 + np.log(1 / tol) + 5
    return int(np.ceil(w * np.sqrt(2 * depth))) + 2


def _khat_terms(x, z, w, R):
    X = np.pi * w / _SQRT2
    nu = np.round(x)[:, None] + np.arange(-R, R + 1)[None, :]
    Y = (z[:, None] - nu) / (w * _SQRT2)
    expo = nu * (x - z)[:, None] / (w * w) + X * X - Y * Y
    v = erfi_real_scaled(X + 1j * Y)
    return nu, expo, v


def _mp_re_erfi(zr, zi):
    # Re erfi(z) = s Im erfc(-i s z), s = sign(Im z); erfc of an argument
    # with positive real part keeps full relative accuracy in mpmath.
    s = -1 if zi < 0 else 1
    z = mpmath.mpc(zr, zi)
    return s * mpmath.erfc(-1j * s * z).imag


def _khat_mp(x, z, w, nus, digits):
    """Gauge-balanced Khat at points (x[i], z[i]) summed over nus[i], in mpmath.

    The erfi factors depend on zeta - nu only and the weights factor as
    exp(nu x / w^2) exp(-nu z / w^2), so each is computed once per value.
    """
    out = np.empty(len(x))
    with mpmath.workdps(digits):
        wm = mpmath.mpf(w)
        w2 = wm * wm
        X = mpmath.pi * wm / mpmath.sqrt(2)
        scale = wm * mpmath.sqrt(2)
        re_erfi, ex, ez = {}, {}, {}
        for i in range(len(x)):
            xm = mpmath.mpf(x[i])
            zm = mpmath.mpf(z[i])
            total = mpmath.mpf(0)
            for nu in nus[i]:
                key_z = (z[i], nu)
                if key_z not in re_erfi:
                    re_erfi[key_z] = _mp_re_erfi(X, (zm - nu) / scale)
                    ez[key_z] = mpmath.exp(-nu * zm / w2)
                key_x = (x[i], nu)
                if key_x not in ex:
                    ex[key_x] = mpmath.exp(nu * xm / w2)
                total += ex[key_x] * ez[key_z] * re_erfi[key_z]
            total *= mpmath.exp(-(xm * xm - zm * zm) / (2 * w2)) / (2 * mpmath.pi * w2)
            out[i] = float(total)
    return out


def kernel_Khat(xi, zeta, w, tol=KHAT_TOL, cutoff=None, balanced=False, return_bound=False):
    r"""Lyapunov-unfolded kernel

    .. math::
        \hat K_w(\xi,\zeta) = \frac{1}{2\pi w^2}\,\mathrm{Re}\sum_\nu
        e^{\nu(\xi-\zeta)/w^2}\,
        \mathrm{erfi}\!\left(\frac{\pi w}{\sqrt2} + i\frac{\zeta-\nu}{w\sqrt2}\right).

    Parameters
    ----------
    balanced : bool
        Return exp(-(xi^2 - zeta^2)/(2 w^2)) * Khat, a diagonal similarity
        of the kernel with identical determinants that does not overflow
        far off the diagonal.
    return_bound : bool
        Also return the a posteriori rounding bound (gauge-balanced units)
        of each value.
    """
    w = _positive_w(w)
    R = khat_cutoff(w, tol) if cutoff is None else int(cutoff)
    xi, zeta = np.broadcast_arrays(np.asarray(xi, float), np.asarray(zeta, float))
    shape = xi.shape
    x = xi.ravel()
    z = zeta.ravel()
    nu, expo, v = _khat_terms(x, z, w, R)
    gauge = (x * x - z * z) / (2 * w * w)
    top = expo.max(axis=1)
    scaled = np.exp(expo - top[:, None]) * v
    norm = 2 * np.pi * w * w
    log_bal = top - gauge - np.log(norm)
    value_bal = np.exp(log_bal) * scaled.sum(axis=1)
    bound = 16 * _EPS * np.exp(log_bal) * np.abs(scaled).sum(axis=1)

    redo = np.flatnonzero(~(bound <= tol))
    if redo.size:
        need = (log_bal[redo] + np.log(np.abs(scaled[redo]).sum(axis=1) + 1e-300)
                - np.log(tol)) / np.log(10)
        digits = int(np.ceil(need.max())) + 20
        windows = [[int(n) for n in nu[i]] for i in redo]
        value_bal[redo] = _khat_mp(x[redo], z[redo], w, windows, digits)
        bound[redo] = 0.0

    if balanced:
        out = value_bal
    else:
        with np.errstate(over="ignore"):
            out = value_bal * np.exp(gauge)
    out = out.reshape(shape)
    out = out.item() if out.ndim == 0 else out
    if return_bound:
        bound = bound.reshape(shape)
        return out, (bound.item() if bound.ndim == 0 else bound)
    return out


def kernel_Kp(xi, zeta, a, p, **kw):
    """Double-scaling kernel at position p for aspect ratio a; depends on a p only."""
    if not a > 0 or not 0 < p < 1:
        raise ValueError("need a > 0 and 0 < p < 1")
    return kernel_Khat(xi, zeta, np.sqrt(a * p), **kw)


def density_Rhat(xi, w, **kw):
    """Eigenvalue density of the unfolded Lyapunov spectrum, Khat(xi, xi)."""
    return kernel_Khat(xi, xi, w, **kw)


_FAMILIES = {
    "kt": ("s", "w"),
    "kw": ("w",),
    "sine": (),
    "khat": ("w",),
    "kp": ("a", "p"),
}


@dataclass(frozen=True)
class KernelEvaluator:
    """A kernel family with fixed parameters, callable as ``K(xi, zeta)``."""

    family: str
    params: dict = field(default_factory=dict)
    tol: float | None = None

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}")
        missing = [p for p in _FAMILIES[self.family] if p not in self.params]
        if missing:
            raise ValueError(f"kernel {self.family!r} needs parameters {missing}")

    def _kw(self):
        return {} if self.tol is None else {"tol": self.tol}

    def __call__(self, xi, zeta, balanced=False):
        p = self.params
        f = self.family
        if f == "kt":
            return kernel_Kt(xi, zeta, p["s"], p["w"], **self._kw())
        if f == "kw":
            return kernel_Kw(xi, zeta, p["w"], **self._kw())
        if f == "sine":
            return sine_kernel(xi, zeta)
        if f == "khat":
            return kernel_Khat(xi, zeta, p["w"], balanced=balanced, **self._kw())
        return kernel_Kp(xi, zeta, p["a"], p["p"], balanced=balanced, **self._kw())

    def diagonal(self, x):
        return self(x, x)

    def matrix(self, points):
        """Kernel matrix K(x_i, x_j); gauge-balanced for the erfi families."""
        x = np.asarray(points, float)
        return np.asarray(self(x[:, None], x[None, :], balanced=True)
                          if self.family in ("khat", "kp") else self(x[:, None], x[None, :]))


def make_kernel(family, tol=None, **params):
    return KernelEvaluator(family, dict(params), tol)


def correlation_Rk(points, kernel):
    """k-point correlation det[K(x_i, x_j)] for k <= 12 points."""
    points = np.atleast_1d(np.asarray(points, float))
    if points.size > 12:
        raise ValueError("correlation_Rk supports at most 12 points")
    if not isinstance(kernel, KernelEvaluator):
        x = points
        mat = np.asarray(kernel(x[:, None], x[None, :]), float)
    else:
        mat = kernel.matrix(points)
    return float(np.linalg.det(mat))


@dataclass
class DualityReport:
    """Comparison of K_w and Khat_w on a grid.

    ``diag_max`` and ``r2_max`` are gauge invariant and should vanish;
    ``pointwise_max`` compares the raw kernels.  The gauge fit models
    log(K_w / Khat) = quad (xi^2 - zeta^2) + lin (xi - zeta); the
    linear-only fit ``linear_only`` is reported for contrast.
    """

    w: float
    extent: float
    step: float
    diag_max: float
    r2_max: float
    pointwise_max: float
    balanced_pointwise_max: float
    gauge_quadratic: float
    gauge_linear: float
    gauge_residual: float
    linear_only: float
    linear_only_residual: float

    @property
    def expected_gauge_quadratic(self):
        return -1.0 / (2 * self.w**2)

    def to_dict(self):
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d["expected_gauge_quadratic"] = self.expected_gauge_quadratic
        return d


def duality_report(w, extent=3.0, step=0.05, grid=None, tol=KHAT_TOL):
    """Measure the relation between K_w and Khat_w on a square grid.

    ``grid`` overrides the square ``[-extent, extent]`` with ``step``
    spacing by an explicit 1-d array of coordinates.
    """
    w = _positive_w(w)
    xs = np.arange(-extent, extent + step / 2, step) if grid is None else np.asarray(grid, float)
    X, Z = np.meshgrid(xs, xs, indexing="ij")
    kw = kernel_Kw(X, Z, w)
    kb = kernel_Khat(X, Z, w, tol=tol, balanced=True)
    dw = np.diag(kw)
    dh = np.diag(kb)
    diag_max = float(np.abs(dw - dh).max())
    r2_w = dw[:, None] * dw[None, :] - kw * kw.T
    r2_h = dh[:, None] * dh[None, :] - kb * kb.T
    r2_max = float(np.abs(r2_w - r2_h).max())
    gauge = (X * X - Z * Z) / (2 * w * w)
    with np.errstate(over="ignore", invalid="ignore"):
        raw = kb * np.exp(gauge)
        pointwise = float(np.nanmax(np.abs(kw - raw)))

    sel = (np.abs(kw) > 1e-8) & (np.abs(kb) > 1e-8) & (np.sign(kw) == np.sign(kb)) & (X != Z)
    target = np.log(np.abs(kw[sel])) - (np.log(np.abs(kb[sel])) + gauge[sel])
    dsq = (X * X - Z * Z)[sel]
    dlin = (X - Z)[sel]
    if target.size >= 2:
        coef, *_ = np.linalg.lstsq(np.stack([dsq, dlin], axis=1), target, rcond=None)
        resid = float(np.abs(target - coef[0] * dsq - coef[1] * dlin).max())
        c_lin = float(dlin @ target / (dlin @ dlin))
        resid_lin = float(np.abs(target - c_lin * dlin).max())
    else:
        coef, resid, c_lin, resid_lin = (np.nan, np.nan), np.nan, np.nan, np.nan
    return DualityReport(
        w=w, extent=float(xs.max()), step=float(step), diag_max=diag_max, r2_max=r2_max,
        pointwise_max=pointwise, balanced_pointwise_max=float(np.abs(kw - kb).max()),
        gauge_quadratic=float(coef[0]), gauge_linear=float(coef[1]), gauge_residual=resid,
        linear_only=c_lin, linear_only_residual=resid_lin,
    )
