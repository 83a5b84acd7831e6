"""Products of random matrices and their Lyapunov spectra.

X_M = G_M ... G_1 (X_0 = identity).  The Lyapunov exponents are the
eigenvalues of L = log(X_M^dagger X_M) / (2M), i.e. log(singular value)/M.

Two extraction routes are provided:

* ``product_spectrum_svd``: exact finite-M exponents from the singular
  values of the running product, Frobenius-rescaled each step.  Only
  usable while the singular values fit in double precision.
* ``product_spectrum_qr``: QR re-orthogonalisation with accumulated
  log|diag R|.  Always stable and exact in the M -> infinity limit; for
  Ginibre factors each accumulated column is an independent sum, so this
  route does not carry the finite-M level repulsion between exponents.
* ``product_spectrum_graded``: exact finite-M exponents for large spreads.
  The same QR sweep also accumulates the triangular product
  T = R_M ... R_1, whose singular values are those of X_M.  T is strongly
  row-graded, and one-sided Jacobi SVD (LAPACK ``gejsv``) of T^dagger
  resolves all singular values to high relative accuracy.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lapack

from .ensembles import RngStream, sample_entries
from .exceptions import ConditioningError, ConvergenceError
from .parallel import map_chunks
from .specfun import digamma, trigamma

__all__ = [
    "ProductConfig",
    "LyapunovSpectrum",
    "log_spread",
    "product_spectrum_svd",
    "product_spectrum_qr",
    "product_spectrum_graded",
    "product_spectrum",
    "graded_singular_values",
    "deterministic_positions",
    "peak_width",
    "gaussian_peak_density",
    "wsr_lyapunov",
    "wsr_lyapunov_approx",
    "unfold_u",
    "aspect_ratio",
    "architecture",
]

SVD_SAFE_SPREAD = 30.0
GRADED_SAFE_SPREAD = 600.0
METHODS = ("svd", "qr", "graded")


@dataclass
class ProductConfig:
    """Product of ``m`` i.i.d. ``n x n`` factors, ``samples`` independent copies.

    ``sampler(shape, gen)`` overrides the entry law; it must return complex
    arrays of the requested shape (used e.g. for deterministic factors).
    Chunk ``c`` of ``chunk_size`` samples uses ``rng.child(c)``.
    """

    n: int
    m: int
    law: str = "gaussian-complex"
    rng: RngStream = field(default_factory=lambda: RngStream(0))
    samples: int = 1
    chunk_size: int = 256
    threads: int | None = None
    sampler: object = None

    def __post_init__(self):
        if self.n < 1 or self.m < 1 or self.samples < 1:
            raise ValueError("need n >= 1, m >= 1, samples >= 1")

    def factors(self, gen, batch):
        shape = (batch, self.n, self.n)
        if self.sampler is not None:
            return np.asarray(self.sampler(shape, gen), dtype=complex)
        return sample_entries(shape, self.law, gen)


@dataclass
class LyapunovSpectrum:
    """Ascending exponents, shape ``(samples, n)``."""

    exponents: np.ndarray
    m: int
    method: str

    @property
    def n(self):
        return self.exponents.shape[-1]


def log_spread(n, m):
    """Expected log-spread M (psi(N) - psi(1)) of the product's spectrum."""
    return m * (digamma(float(n)) - digamma(1.0))


def _run(cfg, chunk_fn):
    def work(c, lo, hi):
        return chunk_fn(cfg.rng.child(c).generator(), hi - lo)

    parts = map_chunks(work, cfg.samples, cfg.chunk_size, cfg.threads)
    return np.sort(np.concatenate(parts, axis=0), axis=-1)


def product_spectrum_svd(cfg):
    """Exact finite-M exponents log(sigma_j(X_M))/M.

    Raises
    ------
    ConditioningError
        When ``log_spread(n, m) >= 30``; use :func:`product_spectrum_qr`.
    """
    spread = log_spread(cfg.n, cfg.m)
    if spread >= SVD_SAFE_SPREAD:
        raise ConditioningError(
            f"log-spread {spread:.1f} >= {SVD_SAFE_SPREAD}: singular values of the "
            "product are not resolvable in double precision; use the qr method"
        )

    def chunk(gen, batch):
        p = np.broadcast_to(np.eye(cfg.n, dtype=complex), (batch, cfg.n, cfg.n)).copy()
        log_scale = np.zeros(batch)
        for _ in range(cfg.m):
            p = cfg.factors(gen, batch) @ p
            norm = np.linalg.norm(p, axis=(-2, -1))
            p /= norm[:, None, None]
            log_scale += np.log(norm)
        sv = np.linalg.svd(p, compute_uv=False)
        with np.errstate(divide="ignore"):
            return (np.log(sv) + log_scale[:, None]) / cfg.m

    return LyapunovSpectrum(_run(cfg, chunk), cfg.m, "scaled-svd")


def product_spectrum_qr(cfg):
    """Exponents from QR accumulation: Q_m R_m = G_m Q_{m-1}, sum log|diag R_m| / M.

    Raises
    ------
    ConvergenceError
        On a rank-deficient factor (zero on the diagonal of R).
    """

    def chunk(gen, batch):
        q = np.broadcast_to(np.eye(cfg.n, dtype=complex), (batch, cfg.n, cfg.n))
        acc = np.zeros((batch, cfg.n))
        for _ in range(cfg.m):
            q, r = np.linalg.qr(cfg.factors(gen, batch) @ q)
            d = np.abs(np.diagonal(r, axis1=-2, axis2=-1))
            if np.any(d == 0):
                raise ConvergenceError("QR breakdown: rank-deficient product")
            acc += np.log(d)
        return acc / cfg.m

    return LyapunovSpectrum(_run(cfg, chunk), cfg.m, "qr-accumulation")


def graded_singular_values(t):
    """log singular values (ascending) of a square complex matrix ``t`` whose
    rows are strongly graded, e.g. an accumulated product of QR factors.

    The complex ``t^dagger`` is embedded as the real ``[[A, -B], [B, A]]``
    (each singular value appears twice) and passed to Jacobi SVD.
    """
    a = np.asarray(t, dtype=complex).conj().T
    real = np.block([[a.real, -a.imag], [a.imag, a.real]])
    sva, _, _, work, _, info = lapack.dgejsv(real, joba=0, jobu=3, jobv=3, jobr=0, jobp=0)
    if info != 0 or work[1] == 0:
        raise ConvergenceError(f"Jacobi SVD failed (info={info})")
    with np.errstate(divide="ignore"):
        logs = np.log(np.sort(sva)[::2]) + np.log(work[0] / work[1])
    return logs


def product_spectrum_graded(cfg):
    """Exact finite-M exponents via the graded triangular product and Jacobi SVD.

    Agrees with :func:`product_spectrum_svd` where both apply and stays
    accurate far beyond its double-precision limit.

    Raises
    ------
    ConditioningError
        When ``log_spread(n, m) >= 600`` (entries of T would underflow).
    ConvergenceError
        On a rank-deficient factor or a failed Jacobi sweep.
    """
    spread = log_spread(cfg.n, cfg.m)
    if spread >= GRADED_SAFE_SPREAD:
        raise ConditioningError(
            f"log-spread {spread:.1f} >= {GRADED_SAFE_SPREAD}: graded product leaves the "
            "double-precision range; use the qr method"
        )

    def chunk(gen, batch):
        eye = np.broadcast_to(np.eye(cfg.n, dtype=complex), (batch, cfg.n, cfg.n))
        q = eye
        t = eye.copy()
        log_scale = np.zeros(batch)
        for _ in range(cfg.m):
            q, r = np.linalg.qr(cfg.factors(gen, batch) @ q)
            if np.any(np.abs(np.diagonal(r, axis1=-2, axis2=-1)) == 0):
                raise ConvergenceError("QR breakdown: rank-deficient product")
            t = r @ t
            s = np.abs(t).max(axis=(-2, -1))
            t /= s[:, None, None]
            log_scale += np.log(s)
        out = np.stack([graded_singular_values(t[b]) for b in range(batch)])
        return (out + log_scale[:, None]) / cfg.m

    return LyapunovSpectrum(_run(cfg, chunk), cfg.m, "graded-jacobi")


def product_spectrum(cfg, method="qr"):
    """Dispatch on ``method`` in ``{'svd', 'qr', 'graded'}``."""
    if method == "svd":
        return product_spectrum_svd(cfg)
    if method == "qr":
        return product_spectrum_qr(cfg)
    if method == "graded":
        return product_spectrum_graded(cfg)
    raise ValueError(f"method must be one of {METHODS}")


def deterministic_positions(j):
    """Limiting exponents lambda_j = psi(j)/2 for M -> infinity."""
    return 0.5 * digamma(np.asarray(j, dtype=float))


def peak_width(j, m):
    """Width sqrt(psi'(j) / (4M)) of the j-th Lyapunov peak."""
    return np.sqrt(trigamma(np.asarray(j, dtype=float)) / (4.0 * m))


def gaussian_peak_density(lam, n, m):
    """Large-M density: sum of n normalised Gaussian peaks (integrates to n)."""
    lam = np.asarray(lam, dtype=float)
    j = np.arange(1, n + 1, dtype=float)
    mu = deterministic_positions(j)
    sd = peak_width(j, m)
    z = (lam[..., None] - mu) / sd
    return (np.exp(-0.5 * z * z) / (np.sqrt(2 * np.pi) * sd)).sum(axis=-1)


def wsr_lyapunov(j, m):
    """Width-to-spacing ratio (sigma_{j+1} + sigma_j) / (2 (lambda_{j+1} - lambda_j))."""
    j = np.asarray(j, dtype=float)
    spacing = deterministic_positions(j + 1) - deterministic_positions(j)
    return (peak_width(j + 1, m) + peak_width(j, m)) / (2.0 * spacing)


def wsr_lyapunov_approx(j, m):
    """Large-j form sqrt(j/M) of :func:`wsr_lyapunov`."""
    return np.sqrt(np.asarray(j, dtype=float) / m)


def unfold_u(spectrum, n=None):
    """u_j = exp(2 lambda_j) / n, computed as exp(2 lambda_j - log n)."""
    lam = spectrum.exponents if isinstance(spectrum, LyapunovSpectrum) else np.asarray(spectrum, float)
    n = lam.shape[-1] if n is None else n
    expo = 2.0 * lam - np.log(n)
    if np.any(expo > 709.0):
        raise OverflowError("u = exp(2 lambda)/n overflows")
    return np.exp(expo)


def aspect_ratio(n, m):
    if m < 1:
        raise ValueError("m must be >= 1")
    return n / m


def architecture(a):
    """Classify a limiting aspect ratio: 'deep' (0), 'shallow' (inf) or 'critical'."""
    if a == 0:
        return "deep"
    if np.isinf(a):
        return "shallow"
    return "critical"
