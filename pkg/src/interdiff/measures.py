"""Per-step measurements of belief structure and polarization.

All functions are pure given their inputs plus an explicit random generator
where a random tiebreak or shuffle is involved. Undefined statistics (zero
variance, nothing to measure) come back as ``nan``.
"""
from __future__ import annotations

import math
from dataclasses import astuple, dataclass, fields

import numpy as np
from scipy import special

from . import kernels
from .graphs import average_clustering


# Column labels, in output order. The similarity labels depend on the
# percentiles in use and are produced by ``measure_labels``.
MEASURE_FIELDS = (
    "frac_susceptible",
    "frac_adopting",
    "prediction_correlation",
    "leading_neighbor_correlation",
    "popular_clustering",
    "sim_p95",
    "sim_p05",
    "pc1_pct",
)


def measure_labels(q_low: float = 0.05, q_high: float = 0.95) -> dict[str, str]:
    return {
        "frac_susceptible": "% susceptible",
        "frac_adopting": "% adopted",
        "prediction_correlation": "initial prediction correlation",
        "leading_neighbor_correlation": "leading neighbor correlation",
        "popular_clustering": "popular belief clustering",
        "sim_p95": f"{q_high * 100:g}% similarity",
        "sim_p05": f"{q_low * 100:g}% similarity",
        "pc1_pct": "PC1 percent of variance",
    }


@dataclass(frozen=True)
class MeasurementRecord:
    frac_susceptible: float
    frac_adopting: float
    prediction_correlation: float
    leading_neighbor_correlation: float
    popular_clustering: float
    sim_p95: float
    sim_p05: float
    pc1_pct: float

    def as_tuple(self) -> tuple[float, ...]:
        return astuple(self)

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def pearson(x, y) -> float:
    """Pearson correlation; nan when either input has zero variance."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = float(xc @ xc)
    syy = float(yc @ yc)
    if sxx == 0.0 or syy == 0.0:
        return math.nan
    r = float(xc @ yc) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


def adoption_matrix(population) -> np.ndarray:
    """Who (rows) holds which universe belief (columns)."""
    lo, hi = population.universe[:, 0], population.universe[:, 1]
    return population.minds[:, lo, hi]


def susceptibility_matrix(population) -> np.ndarray:
    """Who (rows) would adopt which universe belief (columns) on exposure; holders included."""
    lo, hi = population.universe[:, 0], population.universe[:, 1]
    if population.susceptibility is not None:
        return population.susceptibility[:, lo, hi] | population.minds[:, lo, hi]
    return kernels.interdependent_susceptibility(population.minds, lo, hi)


def prediction_correlation(adopt_now: np.ndarray, adopted_t0, susceptible_t0) -> float:
    """Correlation of new adoption since t=0 with initial non-holder susceptibility.

    Pass ``adopted_t0=None`` at t=0, where the measure is undefined.
    """
    if adopted_t0 is None or susceptible_t0 is None:
        return math.nan
    adopted_t0 = np.asarray(adopted_t0)
    new = adopt_now.sum(axis=0) - adopted_t0
    predicted = np.asarray(susceptible_t0) - adopted_t0
    return pearson(new, predicted)


def belief_neighbor_mask(universe: np.ndarray) -> np.ndarray:
    """``mask[i, j]`` is True when beliefs i and j share exactly one concept."""
    u = np.asarray(universe)
    lo, hi = u[:, 0][:, None], u[:, 1][:, None]
    shared = (lo == lo.T).astype(np.int8) + (lo == hi.T) + (hi == lo.T) + (hi == hi.T)
    return shared == 1


def leading_neighbor_values(popularity, mask: np.ndarray) -> np.ndarray:
    pop = np.asarray(popularity, dtype=np.float64)
    if pop.size == 0:
        return pop
    return np.where(mask, pop[None, :], 0.0).max(axis=1)


def leading_neighbor_correlation(popularity, universe, mask: np.ndarray | None = None) -> float:
    """Correlation between each belief's popularity and that of its most popular neighbour belief."""
    if mask is None:
        mask = belief_neighbor_mask(universe)
    return pearson(popularity, leading_neighbor_values(popularity, mask))


def popular_beliefs(popularity, universe, threshold_fraction: float, rng: np.random.Generator) -> np.ndarray:
    """Top ``floor(N * threshold_fraction)`` beliefs by popularity, ties broken at random."""
    if not 0 < threshold_fraction <= 1:
        raise ValueError(f"threshold_fraction must be in (0, 1], got {threshold_fraction}")
    pop = np.asarray(popularity)
    tiebreak = rng.random(pop.shape[0])
    # lexsort: last key is primary; negate for descending order
    order = np.lexsort((-tiebreak, -pop))
    k = int(pop.shape[0] * threshold_fraction)
    if k == 0:
        raise ValueError(f"threshold {threshold_fraction} selects no beliefs out of {pop.shape[0]}")
    return np.asarray(universe)[order[:k]]


def edge_clustering(edges: np.ndarray) -> float:
    """Average local clustering of the graph spanned by ``edges`` (only their endpoints are nodes)."""
    nodes, inv = np.unique(np.asarray(edges), return_inverse=True)
    inv = inv.reshape(-1, 2)
    adj = np.zeros((nodes.shape[0], nodes.shape[0]), dtype=np.bool_)
    adj[inv[:, 0], inv[:, 1]] = adj[inv[:, 1], inv[:, 0]] = True
    return average_clustering(adj)


def popular_clustering(popularity, universe, threshold_fraction: float, rng: np.random.Generator) -> float:
    return edge_clustering(popular_beliefs(popularity, universe, threshold_fraction, rng))


def threshold_sweep(popularity, universe, thresholds, rng: np.random.Generator) -> list[tuple[float, float]]:
    return [(t, popular_clustering(popularity, universe, t, rng)) for t in thresholds]


def pairwise_similarities(adopt: np.ndarray) -> np.ndarray:
    """Pearson correlations of every distinct agent pair's rows; undefined pairs dropped."""
    x = np.asarray(adopt, dtype=np.float64)
    xc = x - x.mean(axis=1, keepdims=True)
    norms = np.sqrt(np.einsum("ij,ij->i", xc, xc))
    safe = np.where(norms > 0, norms, 1.0)
    corr = (xc @ xc.T) / np.outer(safe, safe)
    iu, ju = np.triu_indices(x.shape[0], 1)
    keep = (norms[iu] > 0) & (norms[ju] > 0)
    return np.clip(corr[iu[keep], ju[keep]], -1.0, 1.0)


def similarity_percentiles(adopt: np.ndarray, q_low: float = 0.05, q_high: float = 0.95) -> tuple[float, float]:
    if adopt.shape[0] < 2:
        raise ValueError("need at least two agents")
    if not 0 <= q_low < q_high <= 1:
        raise ValueError(f"need 0 <= q_low < q_high <= 1, got {q_low}, {q_high}")
    sims = pairwise_similarities(adopt)
    if sims.size == 0:
        raise ValueError("every agent pair has an undefined similarity")
    lo, hi = np.quantile(sims, [q_low, q_high])
    return float(lo), float(hi)


def pc1_percent_variance(adopt: np.ndarray) -> float:
    """Share of between-agent variance on the first principal axis, in percent."""
    x = np.asarray(adopt, dtype=np.float64)
    xc = x - x.mean(axis=0)
    if not xc.any():
        return math.nan
    s = np.linalg.svd(xc, compute_uv=False)
    s2 = s * s
    return float(s2[0] / s2.sum() * 100.0)


def has_checkerboard(mat: np.ndarray) -> bool:
    """True when some 2x2 submatrix reads [[1, 0], [0, 1]] (a swap is possible)."""
    a = np.asarray(mat, dtype=np.int64)
    only_in_row = a @ (1 - a).T
    return bool(((only_in_row > 0) & (only_in_row.T > 0)).any())


def degree_preserving_shuffle(matrix, rng: np.random.Generator, n_swaps: int | None = None,
                              batch: int = 4096) -> np.ndarray:
    """Randomise a binary matrix keeping every row and column sum fixed.

    Runs ``n_swaps`` successful checkerboard swaps (default ten per one). A
    matrix without any swappable 2x2 pattern comes back unchanged.
    """
    mat = np.array(matrix, dtype=np.bool_, copy=True)
    r, c = np.nonzero(mat)
    ones_r, ones_c = r.astype(np.int64), c.astype(np.int64)
    k = ones_r.shape[0]
    if n_swaps is None:
        n_swaps = 10 * k
    if n_swaps <= 0 or k < 2 or not has_checkerboard(mat):
        return mat
    done = 0
    while done < n_swaps:
        picks = rng.integers(0, k, size=(batch, 2))
        got, _ = kernels.checkerboard_swaps(mat, ones_r, ones_c, picks, n_swaps - done)
        done += got
    return mat


def shuffle_corrected_percentiles(adopt: np.ndarray, rng: np.random.Generator, q_low: float = 0.05,
                                  q_high: float = 0.95, n_shuffles: int = 1) -> tuple[float, float]:
    """Similarity percentiles minus those of margin-preserving shuffles of the same matrix."""
    lo, hi = similarity_percentiles(adopt, q_low, q_high)
    base = np.array([similarity_percentiles(degree_preserving_shuffle(adopt, rng), q_low, q_high)
                     for _ in range(n_shuffles)])
    return lo - float(base[:, 0].mean()), hi - float(base[:, 1].mean())


def paired_t_test_one_sided(a, b) -> tuple[float, float, float]:
    """Paired t-test of ``mean(a - b) > 0``; returns (mean difference, t, one-sided p)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("samples must be 1-d and of equal length")
    n = a.shape[0]
    if n < 2:
        raise ValueError("need at least two pairs")
    d = a - b
    mean = float(d.mean())
    sd = float(d.std(ddof=1))
    if sd == 0.0:
        if mean == 0.0:
            # identical samples: no evidence either way
            return 0.0, 0.0, 0.5
        raise ValueError("differences have zero variance")
    t = mean / (sd / math.sqrt(n))
    p = float(special.stdtr(n - 1, -t))
    return mean, t, p


def bootstrap_mean_ci(x, rng: np.random.Generator, n_boot: int = 2000, level: float = 0.95) -> tuple[float, float]:
    """Percentile bootstrap interval for the mean of ``x``."""
    x = np.asarray(x, dtype=np.float64)
    idx = rng.integers(0, x.shape[0], size=(n_boot, x.shape[0]))
    means = x[idx].mean(axis=1)
    alpha = (1 - level) / 2
    lo, hi = np.quantile(means, [alpha, 1 - alpha])
    return float(lo), float(hi)


class Measurer:
    """Takes the per-step measurements for one simulated condition.

    The first call establishes the t=0 baseline used by the prediction
    correlation; later calls measure against it.
    """

    def __init__(self, universe: np.ndarray, rng: np.random.Generator, threshold: float = 0.1,
                 q_low: float = 0.05, q_high: float = 0.95):
        self.universe = universe
        self.rng = rng
        self.threshold = threshold
        self.q_low = q_low
        self.q_high = q_high
        self.mask = belief_neighbor_mask(universe)
        self.initial_adopted: np.ndarray | None = None
        self.initial_susceptible: np.ndarray | None = None

    def __call__(self, population) -> MeasurementRecord:
        adopt = adoption_matrix(population)
        suscep = susceptibility_matrix(population)
        popularity = adopt.sum(axis=0)
        if self.initial_adopted is None:
            pred = math.nan
            self.initial_adopted = popularity
            self.initial_susceptible = suscep.sum(axis=0)
        else:
            pred = prediction_correlation(adopt, self.initial_adopted, self.initial_susceptible)
        try:
            p_low, p_high = similarity_percentiles(adopt, self.q_low, self.q_high)
        except ValueError:
            p_low = p_high = math.nan
        return MeasurementRecord(
            frac_susceptible=float(suscep.mean()),
            frac_adopting=float(adopt.mean()),
            prediction_correlation=pred,
            leading_neighbor_correlation=leading_neighbor_correlation(popularity, self.universe, self.mask),
            popular_clustering=popular_clustering(popularity, self.universe, self.threshold, self.rng),
            sim_p95=p_high,
            sim_p05=p_low,
            pc1_pct=pc1_percent_variance(adopt),
        )
