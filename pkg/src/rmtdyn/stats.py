"""Histograms, unfolding, local zoom and Monte-Carlo vs analytic comparison.

Error bars are Poisson per bin: eigenvalues are counted across independent
matrix samples and the per-sample occupancy of a bin is small.  Analytic
expectations are bin averages by Gauss-Legendre quadrature so that sharply
peaked densities do not bias the chi-square.
"""
from dataclasses import asdict, dataclass, field

import numpy as np

__all__ = [
    "NORMALIZATIONS",
    "Histogram",
    "ComparisonReport",
    "histogram",
    "unfold_by_rank",
    "zoom_local",
    "bin_expectations",
    "compare",
    "spacing_distribution",
]

NORMALIZATIONS = ("density-total", "density-per-eigenvalue")


@dataclass
class Histogram:
    """Uniform-bin tally of values drawn in ``total_samples`` groups.

    Every group (one matrix sample, say) contributes ``per_sample`` values.
    ``density()`` is per group and unit length ("density-total", which
    integrates to the expected number of values per group in range) or,
    additionally divided by ``per_sample``, per value
    ("density-per-eigenvalue").
    """

    lo: float
    hi: float
    bins: int
    counts: np.ndarray
    total_samples: int = 0
    per_sample: int = 1
    underflow: int = 0
    overflow: int = 0
    normalization: str = "density-total"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.lo < self.hi or self.bins < 1:
            raise ValueError("need lo < hi and bins >= 1")
        if self.normalization not in NORMALIZATIONS:
            raise ValueError(f"normalization must be one of {NORMALIZATIONS}")
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.shape != (self.bins,):
            raise ValueError("counts must have one entry per bin")

    @property
    def edges(self):
        return np.linspace(self.lo, self.hi, self.bins + 1)

    @property
    def centers(self):
        e = self.edges
        return 0.5 * (e[1:] + e[:-1])

    @property
    def width(self):
        return (self.hi - self.lo) / self.bins

    @property
    def in_range(self):
        return int(self.counts.sum())

    @property
    def total_values(self):
        return self.in_range + self.underflow + self.overflow

    @property
    def scale(self):
        """Expected count in a bin = scale * integral of the density over it."""
        s = float(self.total_samples)
        if self.normalization == "density-per-eigenvalue":
            s *= self.per_sample
        return s

    def density(self):
        if self.total_samples == 0:
            return np.zeros(self.bins)
        return self.counts / (self.scale * self.width)

    def errors(self):
        """Poisson error sqrt(count) in density units."""
        if self.total_samples == 0:
            return np.zeros(self.bins)
        return np.sqrt(self.counts) / (self.scale * self.width)

    def renormalized(self, normalization):
        return Histogram(self.lo, self.hi, self.bins, self.counts.copy(), self.total_samples,
                         self.per_sample, self.underflow, self.overflow, normalization,
                         dict(self.meta))

    def _compatible(self, other):
        return (self.lo, self.hi, self.bins, self.per_sample, self.normalization) == (
            other.lo, other.hi, other.bins, other.per_sample, other.normalization)

    def __add__(self, other):
        if not isinstance(other, Histogram) or not self._compatible(other):
            raise ValueError("histograms differ in range, bins, per_sample or normalization")
        return Histogram(self.lo, self.hi, self.bins, self.counts + other.counts,
                         self.total_samples + other.total_samples, self.per_sample,
                         self.underflow + other.underflow, self.overflow + other.overflow,
                         self.normalization, dict(self.meta))

    def to_rows(self):
        """Rows ``(bin_center, density, poisson_error)``."""
        return list(zip(self.centers.tolist(), self.density().tolist(), self.errors().tolist()))


def histogram(samples, lo, hi, bins, normalization="density-total", total_samples=None):
    """Bin ``samples`` into ``bins`` uniform bins on ``[lo, hi)``.

    A 2-D ``samples`` array is read as ``(groups, values_per_group)``, e.g.
    one spectrum per row.  Values outside the range, and NaNs, go to the
    under/overflow tallies (NaN counts as overflow), so the total is
    always preserved.  The last bin is closed on the right.
    """
    if not lo < hi or bins < 1:
        raise ValueError("need lo < hi and bins >= 1")
    x = np.asarray(samples, dtype=float)
    if x.ndim == 2:
        groups, per = x.shape
    elif x.ndim <= 1:
        x = x.reshape(-1)
        groups, per = x.size, 1
    else:
        raise ValueError("samples must be 1-D or 2-D")
    if total_samples is not None:
        groups = int(total_samples)
    x = x.reshape(-1)
    under = int(np.count_nonzero(x < lo))
    upper = (x > hi) | np.isnan(x)
    over = int(np.count_nonzero(upper))
    inside = x[(x >= lo) & ~upper]
    idx = np.minimum(((inside - lo) / (hi - lo) * bins).astype(np.int64), bins - 1)
    counts = np.bincount(idx, minlength=bins)
    return Histogram(float(lo), float(hi), int(bins), counts, groups, per, under, over,
                     normalization)


def unfold_by_rank(spectrum):
    """Rank unfolding p_j = j / n for a sorted spectrum (or a batch of them)."""
    spectrum = np.asarray(spectrum)
    n = spectrum.shape[-1]
    p = np.arange(1, n + 1) / n
    return np.broadcast_to(p, spectrum.shape).copy()


def zoom_local(u_values, p, n, xi_max=None):
    """Local coordinates xi = n (u - p), optionally restricted to |xi| <= xi_max."""
    if not 0 < p < 1:
        raise ValueError("need 0 < p < 1")
    xi = n * (np.asarray(u_values, dtype=float) - p)
    if xi_max is not None:
        xi = xi[np.abs(xi) <= xi_max]
    return xi


def bin_expectations(analytic, edges, order=8, subdivisions=4):
    """Integral of ``analytic`` over each bin (bins split into ``subdivisions``
    pieces, each with ``order``-point Gauss-Legendre).  ``analytic`` must be
    vectorised."""
    edges = np.asarray(edges, dtype=float)
    x, wts = np.polynomial.legendre.leggauss(order)
    sub = np.linspace(0.0, 1.0, subdivisions + 1)
    a = edges[:-1, None] + np.diff(edges)[:, None] * sub[None, :-1]
    h = (np.diff(edges) / subdivisions)[:, None]
    nodes = a[..., None] + 0.5 * h[..., None] * (x + 1.0)
    vals = np.asarray(analytic(nodes.ravel()), dtype=float).reshape(nodes.shape)
    return (vals * wts).sum(axis=-1).sum(axis=-1) * 0.5 * h[:, 0]


@dataclass
class ComparisonReport:
    """Histogram vs analytic density.  ``sup_deviation`` is in density units."""

    sup_deviation: float
    chi2_per_bin: float
    ks_statistic: float
    bins_exceeding_3sigma: int
    bins: int
    merged_bins: int
    chi2: float
    observed: int
    expected: float

    @property
    def fraction_exceeding_3sigma(self):
        return self.bins_exceeding_3sigma / self.bins if self.bins else 0.0

    def passes(self, chi2_max=2.0, max_fraction_3sigma=0.02):
        return bool(self.chi2_per_bin <= chi2_max
                    and self.fraction_exceeding_3sigma <= max_fraction_3sigma)

    def to_dict(self):
        d = asdict(self)
        d["fraction_exceeding_3sigma"] = self.fraction_exceeding_3sigma
        return d


def _merge_groups(expected, min_expected):
    groups, start, acc = [], 0, 0.0
    for i, e in enumerate(expected):
        acc += e
        if acc >= min_expected:
            groups.append((start, i + 1))
            start, acc = i + 1, 0.0
    if start < len(expected):
        if groups:
            groups[-1] = (groups[-1][0], len(expected))
        else:
            groups.append((start, len(expected)))
    return groups


def compare(hist, analytic, min_expected=5.0, order=8, subdivisions=4):
    """Compare a histogram with an analytic density in the same normalization.

    Expected bin counts are ``hist.scale`` times bin integrals of
    ``analytic``.  Adjacent bins are merged until each group expects at
    least ``min_expected`` counts before the chi-square is formed; a group
    with zero expectation but nonzero count gives ``chi2 = inf``.  The
    3-sigma count uses the unmerged bins and Poisson bands
    ``sqrt(expected)``.
    """
    integrals = bin_expectations(analytic, hist.edges, order, subdivisions)
    expected = hist.scale * integrals
    obs = hist.counts.astype(float)

    chi2 = 0.0
    groups = _merge_groups(expected, min_expected)
    for a, b in groups:
        o, e = obs[a:b].sum(), expected[a:b].sum()
        if e > 0:
            chi2 += (o - e) ** 2 / e
        elif o > 0:
            chi2 = np.inf
    chi2_per_bin = chi2 / len(groups)

    with np.errstate(divide="ignore", invalid="ignore"):
        exceed = np.where(expected > 0, np.abs(obs - expected) > 3 * np.sqrt(expected), obs > 0)
    sup = float(np.max(np.abs(obs - expected)) / (hist.scale * hist.width)) if hist.scale else 0.0

    tot_o, tot_e = obs.sum(), expected.sum()
    if tot_o > 0 and tot_e > 0:
        ks = float(np.max(np.abs(np.cumsum(obs) / tot_o - np.cumsum(expected) / tot_e)))
    else:
        ks = 0.0 if tot_o == tot_e else 1.0
    return ComparisonReport(sup, float(chi2_per_bin), ks, int(exceed.sum()), hist.bins,
                            len(groups), float(chi2), int(tot_o), float(tot_e))


def spacing_distribution(spectra, window, bins=40, s_max=4.0):
    """Histogram of consecutive spacings inside ``window`` in units of the mean
    spacing there (pooled over all spectra).  The result is normalised as a
    probability density."""
    lo, hi = window
    if not lo < hi:
        raise ValueError("need lo < hi")
    gaps = []
    for spectrum in spectra:
        s = np.sort(np.asarray(spectrum, dtype=float).ravel())
        s = s[(s >= lo) & (s <= hi)]
        if s.size >= 2:
            gaps.append(np.diff(s))
    gaps = np.concatenate(gaps) if gaps else np.zeros(0)
    if gaps.size and gaps.mean() > 0:
        gaps = gaps / gaps.mean()
    h = histogram(gaps, 0.0, s_max, bins, normalization="density-per-eigenvalue")
    h.meta["window"] = (float(lo), float(hi))
    return h
