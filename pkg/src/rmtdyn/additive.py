"""Additive matrix dynamics: Dyson random walk and Coulomb-gas eigenvalues.

The matrix walk is A_m = A_{m-1} + sigma H_m with GUE increments H_m.  Its
eigenvalues follow the Coulomb-gas equations

    da_j = sum_{k != j} dt / (a_j - a_k) + sigma_c dW_j,

integrated here with Euler-Maruyama.  With ``dt = 1`` and ``sigma_c =
sigma`` one step reproduces the discrete eigenvalue recursion.
"""
from dataclasses import dataclass, field

import numpy as np

from .ensembles import as_generator, sample_gue
from .exceptions import ConvergenceError

__all__ = [
    "AdditiveConfig",
    "Trajectory",
    "equidistant_initial",
    "additive_walk",
    "additive_shortcut",
    "coulomb_drift",
    "coulomb_gas_walk",
    "hypothetical_spacing",
    "wsr_additive",
]


@dataclass
class AdditiveConfig:
    """Parameters of an equidistant-start additive run.

    ``n = 2k - 1`` eigenvalues start at ``(j - k) s``; the width-to-spacing
    ratio of the run is ``sigma_c sqrt(t) / s``.
    """

    k: int
    s: float = 1.0
    sigma_c: float = 1.0
    t: float = 1.0
    m_steps: int | None = None

    def __post_init__(self):
        if self.k < 1 or self.s <= 0 or self.sigma_c <= 0 or self.t < 0:
            raise ValueError("need k >= 1, s > 0, sigma_c > 0, t >= 0")

    @property
    def n(self):
        return 2 * self.k - 1

    @property
    def dt(self):
        return None if self.m_steps is None else self.t / self.m_steps

    @property
    def sigma(self):
        """Per-step scale sigma = sigma_c sqrt(dt) of the discrete walk."""
        return None if self.m_steps is None else self.sigma_c * np.sqrt(self.dt)

    @property
    def w(self):
        return wsr_additive(self.sigma_c, self.t, self.s)


@dataclass
class Trajectory:
    """Recorded eigenvalue paths: ``spectra[i]`` is the sorted spectrum at ``times[i]``.

    For batched runs ``spectra`` has shape ``(len(times), batch, n)``.
    """

    times: np.ndarray
    spectra: np.ndarray
    rejected_steps: int = 0
    meta: dict = field(default_factory=dict)

    def to_rows(self):
        """Rows ``(time, j, a_j)`` with 1-based j, for CSV export."""
        spectra = np.asarray(self.spectra)
        if spectra.ndim != 2:
            raise ValueError("CSV export supports single trajectories only")
        n = spectra.shape[1]
        for t, spectrum in zip(self.times, spectra):
            for j in range(n):
                yield float(t), j + 1, float(spectrum[j])


def equidistant_initial(k, s=1.0):
    """Diagonal A_0 = diag(-s(k-1), ..., 0, ..., s(k-1)) of size 2k - 1."""
    if k < 1 or s <= 0:
        raise ValueError("need k >= 1 and s > 0")
    j = np.arange(1, 2 * k)
    return np.diag((j - k) * float(s)).astype(complex)


def additive_walk(a0, sigma, m, rng, size=()):
    """A_0 + sigma (H_1 + ... + H_m) with independent GUE increments."""
    if m < 0:
        raise ValueError("m must be >= 0")
    gen = as_generator(rng)
    a0 = np.asarray(a0, dtype=complex)
    size = (size,) if np.isscalar(size) else tuple(size)
    out = np.broadcast_to(a0, size + a0.shape).copy()
    n = a0.shape[-1]
    for _ in range(m):
        out += sigma * sample_gue(n, gen, size)
    return out


def additive_shortcut(a0, sigma_c, t, rng, size=()):
    """A_0 + sigma_c sqrt(t) H with a single GUE draw.

    Equal in law to the walk at time t because GUE is stable under addition.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    a0 = np.asarray(a0, dtype=complex)
    size = (size,) if np.isscalar(size) else tuple(size)
    h = sample_gue(a0.shape[-1], rng, size)
    return a0 + (sigma_c * np.sqrt(t)) * h


def coulomb_drift(a):
    """sum_{k != j} 1/(a_j - a_k) along the last axis."""
    diff = a[..., :, None] - a[..., None, :]
    n = a.shape[-1]
    idx = np.arange(n)
    diff[..., idx, idx] = np.inf
    return (1.0 / diff).sum(axis=-1)


def _strictly_increasing(a):
    return np.all(np.diff(a, axis=-1) > 0, axis=-1)


def _advance(a, dw, dt, sigma_c, gen, depth, max_halvings, counter):
    # One Euler-Maruyama step over dt with Brownian increments dw.  Rows
    # whose ordering breaks are redone as two half steps, splitting dw by a
    # Brownian bridge so the driving path is unchanged.
    new = a + coulomb_drift(a) * dt + sigma_c * dw
    bad = ~_strictly_increasing(new)
    if not bad.any():
        return new
    if depth >= max_halvings:
        raise ConvergenceError(
            f"Coulomb-gas step still crosses after {max_halvings} halvings "
            f"(dt={dt:.3e}); near-collision of eigenvalues"
        )
    counter[0] += int(bad.sum())
    half = 0.5 * dt
    dw_b = dw[bad]
    first = 0.5 * dw_b + np.sqrt(0.25 * dt) * gen.standard_normal(dw_b.shape)
    mid = _advance(a[bad], first, half, sigma_c, gen, depth + 1, max_halvings, counter)
    new[bad] = _advance(mid, dw_b - first, half, sigma_c, gen, depth + 1, max_halvings, counter)
    return new


def coulomb_gas_walk(initial, sigma_c, t_final, dt, rng, record_every=1, max_halvings=40):
    """Integrate the Coulomb-gas SDE from a strictly increasing spectrum.

    ``initial`` may be a single spectrum ``(n,)`` or a batch ``(batch, n)``.
    Every accepted step keeps each spectrum strictly increasing; a step
    that would reorder particles is retried as two half steps, recursively,
    at most ``max_halvings`` times.

    Returns a :class:`Trajectory` recorded every ``record_every`` steps
    (always including t = 0 and the final time).
    """
    a = np.array(initial, dtype=float)
    if dt <= 0:
        raise ValueError("dt must be > 0")
    if t_final < 0:
        raise ValueError("t_final must be >= 0")
    if not np.all(_strictly_increasing(a)):
        raise ValueError("initial spectrum must be strictly increasing")
    single = a.ndim == 1
    a = np.atleast_2d(a)
    gen = as_generator(rng)
    n_steps = int(np.ceil(t_final / dt - 1e-12)) if t_final > 0 else 0
    times, spectra = [0.0], [a[0].copy() if single else a.copy()]
    counter = [0]
    t = 0.0
    for i in range(n_steps):
        h = min(dt, t_final - t)
        dw = np.sqrt(h) * gen.standard_normal(a.shape)
        a = _advance(a, dw, h, sigma_c, gen, 0, max_halvings, counter)
        t = t_final if i == n_steps - 1 else t + h
        if (i + 1) % record_every == 0 or i == n_steps - 1:
            times.append(t)
            spectra.append(a[0].copy() if single else a.copy())
    return Trajectory(np.array(times), np.array(spectra), counter[0],
                      {"sigma_c": sigma_c, "dt": dt, "t_final": t_final})


def hypothetical_spacing(s, sigma_c, t, n):
    """Spacing S = s sqrt(1 + 12 sigma_c^2 t / (s^2 n)) of an equidistant gas
    with the same radius of gyration; an upper bound on the central spacing."""
    return s * np.sqrt(1.0 + 12.0 * sigma_c**2 * t / (s**2 * n))


def wsr_additive(sigma_c, t, s):
    """Width-to-spacing ratio w = sigma_c sqrt(t) / s."""
    if s <= 0 or t < 0:
        raise ValueError("need s > 0 and t >= 0")
    return sigma_c * np.sqrt(t) / s
