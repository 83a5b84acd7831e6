"""Random matrix sampling and the Hermitian eigensolver.

Complex Gaussian convention: every entry law has zero mean and unit second
moment, E|g|^2 = 1.  For the Gaussian law the real and imaginary parts are
independent N(0, 1/2).  All width and spacing formulas elsewhere in the
package assume this normalization.

Matrices are plain numpy arrays; leading axes are batch axes.
"""
from dataclasses import dataclass

import numpy as np

from .exceptions import ConvergenceError, DomainError

__all__ = [
    "ENTRY_LAWS",
    "RngStream",
    "as_generator",
    "sample_entries",
    "sample_ginibre",
    "sample_gue",
    "check_hermitian",
    "hermitian_eigenvalues",
]

ENTRY_LAWS = ("gaussian-complex", "uniform-complex", "bernoulli-complex")

_UNIFORM_HALF_WIDTH = np.sqrt(1.5)


@dataclass(frozen=True)
class RngStream:
    """Reproducible random stream identified by ``(seed, stream_id)``.

    ``stream_id`` may be an integer or a tuple of integers; distinct ids give
    statistically independent streams (numpy ``SeedSequence`` spawn keys).
    """

    seed: int
    stream_id: int | tuple = 0

    @property
    def key(self):
        sid = self.stream_id
        return tuple(sid) if isinstance(sid, tuple) else (int(sid),)

    def child(self, k):
        """Independent sub-stream number ``k``."""
        return RngStream(self.seed, self.key + (int(k),))

    def generator(self):
        ss = np.random.SeedSequence(entropy=int(self.seed), spawn_key=self.key)
        return np.random.Generator(np.random.PCG64(ss))


def as_generator(rng):
    """Accept an RngStream, a numpy Generator or an integer seed."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    if rng is None:
        raise ValueError("an explicit rng is required for reproducibility")
    return RngStream(int(rng)).generator()


def sample_entries(shape, law, rng):
    """Draw i.i.d. complex entries with zero mean and E|g|^2 = 1."""
    gen = as_generator(rng)
    shape = tuple(shape)
    if law == "gaussian-complex":
        re = gen.standard_normal(shape)
        im = gen.standard_normal(shape)
        return (re + 1j * im) * np.sqrt(0.5)
    if law == "uniform-complex":
        u = gen.uniform(-_UNIFORM_HALF_WIDTH, _UNIFORM_HALF_WIDTH, shape + (2,))
        return u[..., 0] + 1j * u[..., 1]
    if law == "bernoulli-complex":
        b = gen.integers(0, 2, shape + (2,)) * 2.0 - 1.0
        return (b[..., 0] + 1j * b[..., 1]) * np.sqrt(0.5)
    raise ValueError(f"unknown entry law {law!r}; expected one of {ENTRY_LAWS}")


def sample_ginibre(n, law="gaussian-complex", rng=None, size=()):
    """Square matrix (or batch of shape ``size + (n, n)``) of i.i.d. entries."""
    if n < 1:
        raise ValueError("n must be >= 1")
    size = (size,) if np.isscalar(size) else tuple(size)
    return sample_entries(size + (n, n), law, rng)


def sample_gue(n, rng=None, size=()):
    """GUE matrix H = (G + G^dagger)/sqrt(2) built from a Ginibre G.

    Diagonal entries are real N(0, 1); off-diagonal entries are complex
    Gaussian with E|h|^2 = 1, so E tr H^2 = n^2.
    """
    g = sample_ginibre(n, "gaussian-complex", rng, size)
    return (g + np.swapaxes(g, -1, -2).conj()) * np.sqrt(0.5)


def check_hermitian(h, rtol=1e-14):
    h = np.asarray(h)
    if h.ndim < 2 or h.shape[-1] != h.shape[-2]:
        raise ValueError("expected square matrices")
    if not np.all(np.isfinite(h)):
        raise ValueError("matrix has non-finite entries")
    scale = max(np.abs(h).max(initial=0.0), 1.0)
    if np.abs(h - np.swapaxes(h, -1, -2).conj()).max(initial=0.0) > rtol * scale:
        raise DomainError("matrix is not Hermitian")
    return h


def hermitian_eigenvalues(h, check=True):
    """Ascending eigenvalues of a Hermitian matrix or a stack of them.

    Delegates to LAPACK (``numpy.linalg.eigvalsh``); convergence failures
    are re-raised as :class:`ConvergenceError`.
    """
    if check:
        h = check_hermitian(h, rtol=1e-12)
    try:
        return np.linalg.eigvalsh(h)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"Hermitian eigensolver failed: {exc}") from exc
