"""Statistics for the simulator's verification suite.

Pure functions over immutable inputs: Kolmogorov-Smirnov machinery with the
asymptotic p-value series, Poissonity and independence checks for death
processes, quadratic variation over partitions, cumulative squared
life-length sums, the variance-scaling ratio, and log-slope fits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "KSResult",
    "Partition",
    "RunningStats",
    "fit_log_slope",
    "gumbel_cdf",
    "independence_check",
    "kolmogorov_sf",
    "ks_test",
    "ks_test_two_sample",
    "poisson_suite",
    "quadratic_variation",
    "qv_mesh_scan",
    "sum_squared_lifelengths",
    "variance_scaling",
]

_KS_MIN_N = 8
_KS_TERM_FLOOR = 1e-10


# ---------------------------------------------------------------------------
# Kolmogorov-Smirnov
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KSResult:
    statistic: float
    p_value: float
    n: int


def kolmogorov_sf(lam: float) -> float:
    """Asymptotic Kolmogorov survival function Q(lam).

    Q(lam) = 2 * sum_{r>=1} (-1)^(r-1) exp(-2 r^2 lam^2), truncated once a
    term falls below 1e-10. For tiny lam the series is numerically useless
    and the survival probability is 1 to double precision.
    """
    if lam <= 0.05:
        return 1.0
    total = 0.0
    sign = 1.0
    for r in range(1, 10_000):
        term = math.exp(-2.0 * (r * lam) ** 2)
        if term < _KS_TERM_FLOOR:
            break
        total += sign * term
        sign = -sign
    return min(1.0, max(0.0, 2.0 * total))


def ks_test(sample: np.ndarray, cdf: Callable[[np.ndarray], np.ndarray]) -> KSResult:
    """One-sample KS test of `sample` against the continuous CDF `cdf`.

    D = sup_x |F_n(x) - F(x)| computed at the order statistics; the p-value
    uses the asymptotic Kolmogorov distribution of sqrt(n) D (no
    small-sample correction), so n >= 8 is required.
    """
    x = np.sort(np.asarray(sample, dtype=np.float64))
    n = x.size
    if n < _KS_MIN_N:
        raise ValueError(f"KS test needs at least {_KS_MIN_N} observations, got {n}")
    f = np.asarray(cdf(x), dtype=np.float64)
    if f.shape != x.shape:
        raise ValueError("cdf must evaluate elementwise on the sample")
    if np.any(f < -1e-12) or np.any(f > 1.0 + 1e-12):
        raise ValueError("cdf values fall outside [0, 1]")
    grid = np.arange(1, n + 1, dtype=np.float64) / n
    d_plus = float(np.max(grid - f))
    d_minus = float(np.max(f - (grid - 1.0 / n)))
    d = max(d_plus, d_minus)
    return KSResult(statistic=d, p_value=kolmogorov_sf(math.sqrt(n) * d), n=n)


def ks_test_two_sample(a: np.ndarray, b: np.ndarray) -> KSResult:
    """Two-sample KS test with the asymptotic p-value.

    D is the sup distance between the two empirical CDFs and the effective
    sample size is n_a n_b / (n_a + n_b).
    """
    a = np.sort(np.asarray(a, dtype=np.float64))
    b = np.sort(np.asarray(b, dtype=np.float64))
    if a.size < _KS_MIN_N or b.size < _KS_MIN_N:
        raise ValueError(f"two-sample KS needs {_KS_MIN_N} observations per sample")
    pooled = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, pooled, side="right") / a.size
    cdf_b = np.searchsorted(b, pooled, side="right") / b.size
    d = float(np.max(np.abs(cdf_a - cdf_b)))
    n_eff = a.size * b.size / (a.size + b.size)
    return KSResult(statistic=d, p_value=kolmogorov_sf(math.sqrt(n_eff) * d), n=int(n_eff))


def gumbel_cdf(x: np.ndarray | float) -> np.ndarray | float:
    """Standard Gumbel CDF exp(-exp(-x))."""
    return np.exp(-np.exp(-np.asarray(x, dtype=np.float64)))


# ---------------------------------------------------------------------------
# Partitions and quadratic variation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Partition:
    """A finite partition s = p_0 < p_1 < ... < p_m = t of a window."""

    points: np.ndarray

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 1 or pts.size < 2:
            raise ValueError("partition needs at least two points")
        if not np.all(np.diff(pts) > 0.0):
            raise ValueError("partition points must be strictly increasing")
        object.__setattr__(self, "points", pts)

    @property
    def mesh(self) -> float:
        return float(np.max(np.diff(self.points)))

    @property
    def n_cells(self) -> int:
        return self.points.size - 1

    @classmethod
    def uniform(cls, start: float, end: float, n_cells: int) -> "Partition":
        if n_cells < 1:
            raise ValueError("need at least one cell")
        return cls(np.linspace(start, end, n_cells + 1))

    @classmethod
    def dyadic(cls, start: float, end: float, level: int) -> "Partition":
        """2^level uniform cells."""
        if level < 0:
            raise ValueError("dyadic level must be nonnegative")
        return cls.uniform(start, end, 2**level)

    @classmethod
    def random(cls, start: float, end: float, n_cells: int, stream) -> "Partition":
        """Random partition: n_cells - 1 uniform interior points, sorted."""
        if n_cells < 1:
            raise ValueError("need at least one cell")
        interior = np.sort(stream.generator.uniform(start, end, size=n_cells - 1))
        return cls(np.concatenate([[start], interior, [end]]))


def quadratic_variation(path, partition: Partition) -> float:
    """Sum of squared path increments over the partition cells."""
    values = path.eval(partition.points)
    return float(np.sum(np.diff(values) ** 2))


def qv_mesh_scan(path, window: tuple[float, float], levels: Sequence[int]):
    """Quadratic variation along dyadic refinements of `window`.

    Returns a list of (mesh, qv) rows, one per dyadic level, in the order
    given. Meshes are (t - s) * 2^-m.
    """
    s, t = float(window[0]), float(window[1])
    if not t > s:
        raise ValueError("window must have positive length")
    rows = []
    for m in levels:
        part = Partition.dyadic(s, t, m)
        rows.append(((t - s) * 2.0 ** (-m), quadratic_variation(path, part)))
    return rows


# ---------------------------------------------------------------------------
# Squared life-length sums
# ---------------------------------------------------------------------------

def sum_squared_lifelengths(samples) -> tuple[np.ndarray, np.ndarray]:
    """Cumulative squared life-length sums over levels.

    `samples` holds one PointProcessSample per level for levels 2..K over a
    common window. Returns (levels, S) where S[j] is the sum of squared life
    lengths of all lines dying in the window at levels up to levels[j].
    Empty input gives empty arrays.
    """
    if not samples:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64)
    levels = np.array([s.level for s in samples], dtype=np.int64)
    order = np.argsort(levels)
    levels = levels[order]
    if np.unique(levels).size != levels.size:
        raise ValueError("duplicate levels in sample list")
    if levels[0] != 2 or not np.all(np.diff(levels) == 1):
        raise ValueError("levels must be contiguous starting at 2")
    windows = {(float(s.window[0]), float(s.window[1])) for s in samples}
    if len(windows) != 1:
        raise ValueError("samples must share one window")
    per_level = np.array(
        [float(np.sum(np.square(samples[i].life_lengths))) for i in order]
    )
    return levels, np.cumsum(per_level)


# ---------------------------------------------------------------------------
# Poissonity, independence
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PoissonSuiteResult:
    level: int
    window: tuple[float, float]
    n_reps: int
    counts: np.ndarray
    expected_count: float
    mean_count: float
    count_z: float
    dispersion_index: float
    dispersion_z: float
    gap_rejection_fraction: float
    n_valid_gap_reps: int
    pooled_gap_ks: KSResult | None


def poisson_suite(samples, alpha: float = 0.05) -> PoissonSuiteResult:
    """Poissonity checks for replicate death-process samples of one level.

    Checks, against a homogeneous Poisson process of rate (level - 1):
    (a) per-replicate KS of inter-death gaps vs Exp(level - 1), counting the
        rejection fraction at `alpha` over replicates with at least 8 gaps;
    (b) mean death count vs (level - 1) * window length (z score);
    (c) dispersion index (variance/mean of counts) vs 1 (z score, the
        3-sigma band being +- 3 sqrt(2/(reps-1))).
    A pooled-gap KS over all replicates is included for reference.
    """
    if not samples:
        raise ValueError("need at least one replicate sample")
    level = samples[0].level
    window = (float(samples[0].window[0]), float(samples[0].window[1]))
    for s in samples:
        if s.level != level or (float(s.window[0]), float(s.window[1])) != window:
            raise ValueError("samples must share level and window")
    rate = float(level - 1)
    span = window[1] - window[0]
    cdf = lambda x: 1.0 - np.exp(-rate * np.asarray(x))  # noqa: E731

    counts = np.array([s.death_times.size for s in samples], dtype=np.float64)
    n_reps = counts.size
    expected = rate * span
    mean_count = float(counts.mean())
    count_z = (mean_count - expected) / math.sqrt(expected / n_reps)
    dispersion = float(counts.var(ddof=1) / mean_count) if mean_count > 0 else math.nan
    dispersion_z = (
        (dispersion - 1.0) / math.sqrt(2.0 / (n_reps - 1)) if n_reps > 1 else math.nan
    )

    rejections = 0
    valid = 0
    all_gaps = []
    for s in samples:
        gaps = np.diff(s.death_times)
        if gaps.size:
            all_gaps.append(gaps)
        if gaps.size >= _KS_MIN_N:
            valid += 1
            if ks_test(gaps, cdf).p_value < alpha:
                rejections += 1
    pooled = None
    if all_gaps:
        pooled_gaps = np.concatenate(all_gaps)
        if pooled_gaps.size >= _KS_MIN_N:
            pooled = ks_test(pooled_gaps, cdf)
    return PoissonSuiteResult(
        level=level,
        window=window,
        n_reps=n_reps,
        counts=counts,
        expected_count=expected,
        mean_count=mean_count,
        count_z=float(count_z),
        dispersion_index=dispersion,
        dispersion_z=float(dispersion_z),
        gap_rejection_fraction=(rejections / valid) if valid else 0.0,
        n_valid_gap_reps=valid,
        pooled_gap_ks=pooled,
    )


@dataclass(frozen=True)
class IndependenceResult:
    levels: np.ndarray
    max_abs_correlation: float
    argmax_pair: tuple[int, int]
    degenerate_levels: tuple[int, ...]


def independence_check(count_matrix: np.ndarray, levels: Sequence[int]) -> IndependenceResult:
    """Max absolute pairwise Pearson correlation between per-level counts.

    `count_matrix` has one row per replicate and one column per level.
    Degenerate (constant) columns cannot be correlated; they are flagged and
    excluded rather than propagating NaNs.
    """
    m = np.asarray(count_matrix, dtype=np.float64)
    levels = np.asarray(levels, dtype=np.int64)
    if m.ndim != 2 or m.shape[1] != levels.size:
        raise ValueError("count matrix columns must match levels")
    if m.shape[0] < 3:
        raise ValueError("need at least 3 replicates")
    stds = m.std(axis=0)
    degenerate = levels[stds == 0.0]
    keep = stds > 0.0
    kept_levels = levels[keep]
    if kept_levels.size < 2:
        return IndependenceResult(levels, 0.0, (0, 0), tuple(int(v) for v in degenerate))
    corr = np.corrcoef(m[:, keep], rowvar=False)
    off = np.abs(corr - np.eye(corr.shape[0]))
    flat = int(np.argmax(off))
    i, j = divmod(flat, corr.shape[0])
    return IndependenceResult(
        levels=levels,
        max_abs_correlation=float(off[i, j]),
        argmax_pair=(int(kept_levels[i]), int(kept_levels[j])),
        degenerate_levels=tuple(int(v) for v in degenerate),
    )


# ---------------------------------------------------------------------------
# Scaling fits
# ---------------------------------------------------------------------------

def fit_log_slope(xs: np.ndarray, ys: np.ndarray) -> tuple[float, float, float]:
    """OLS fit of ys against ln(xs): returns (slope, intercept, r_squared)."""
    x = np.log(np.asarray(xs, dtype=np.float64))
    y = np.asarray(ys, dtype=np.float64)
    if x.size != y.size or x.size < 2:
        raise ValueError("need two or more points")
    xm, ym = x.mean(), y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    if sxx == 0.0:
        raise ValueError("x values are all equal")
    sxy = float(np.sum((x - xm) * (y - ym)))
    slope = sxy / sxx
    intercept = ym - slope * xm
    ss_res = float(np.sum((y - (intercept + slope * x)) ** 2))
    ss_tot = float(np.sum((y - ym) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return slope, intercept, r2


def variance_scaling(
    n_levels: int,
    epsilons: Sequence[float],
    reps: int,
    increment_sampler: Callable[[float, int], np.ndarray],
) -> list[tuple[float, float, float, float]]:
    """Mean-square increment ratio E[(path(t0+eps) - path(t0))^2] / (eps |ln eps|).

    `increment_sampler(eps, reps)` returns `reps` independent stationary
    increments of the compensated tree-length path over a window of length
    eps (the caller binds the engine and its streams; tests may inject
    synthetic paths such as pure drift, for which the ratio is exactly
    N^2 eps / |ln eps|).

    Returns rows (eps, ratio, mean_square, se_mean_square).
    """
    if n_levels < 2:
        raise ValueError("n_levels must be at least 2")
    if reps < 1:
        raise ValueError("reps must be positive")
    rows = []
    for eps in epsilons:
        eps = float(eps)
        if not 0.0 < eps < 1.0:
            raise ValueError(f"epsilon must lie in (0, 1), got {eps}")
        inc = np.asarray(increment_sampler(eps, reps), dtype=np.float64)
        if inc.shape != (reps,):
            raise ValueError("increment sampler must return one increment per rep")
        sq = inc**2
        mean_sq = float(sq.mean())
        se = float(sq.std(ddof=1) / math.sqrt(reps)) if reps > 1 else math.nan
        denom = eps * abs(math.log(eps))
        rows.append((eps, mean_sq / denom, mean_sq, se))
    return rows


# ---------------------------------------------------------------------------
# Mergeable accumulator
# ---------------------------------------------------------------------------

@dataclass
class RunningStats:
    """Welford accumulator for mean and variance with associative merge."""

    n: int = 0
    mean: float = 0.0
    m2: float = 0.0
    _min: float = field(default=math.inf, repr=False)
    _max: float = field(default=-math.inf, repr=False)

    def add(self, x: float) -> None:
        self.n += 1
        delta = x - self.mean
        self.mean += delta / self.n
        self.m2 += delta * (x - self.mean)
        self._min = min(self._min, x)
        self._max = max(self._max, x)

    def add_many(self, xs: np.ndarray) -> None:
        other = RunningStats.from_array(xs)
        self.merge(other)

    @classmethod
    def from_array(cls, xs: np.ndarray) -> "RunningStats":
        xs = np.asarray(xs, dtype=np.float64)
        out = cls()
        if xs.size == 0:
            return out
        out.n = int(xs.size)
        out.mean = float(xs.mean())
        out.m2 = float(np.sum((xs - xs.mean()) ** 2))
        out._min = float(xs.min())
        out._max = float(xs.max())
        return out

    def merge(self, other: "RunningStats") -> "RunningStats":
        if other.n == 0:
            return self
        if self.n == 0:
            self.n, self.mean, self.m2 = other.n, other.mean, other.m2
            self._min, self._max = other._min, other._max
            return self
        n = self.n + other.n
        delta = other.mean - self.mean
        self.mean += delta * other.n / n
        self.m2 += other.m2 + delta * delta * self.n * other.n / n
        self.n = n
        self._min = min(self._min, other._min)
        self._max = max(self._max, other._max)
        return self

    @property
    def variance(self) -> float:
        return self.m2 / (self.n - 1) if self.n > 1 else math.nan

    @property
    def std_error(self) -> float:
        return math.sqrt(self.variance / self.n) if self.n > 1 else math.nan
