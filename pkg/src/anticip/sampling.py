"""Random spectral differences and streaming Monte Carlo estimation.

Components yhat_k are drawn i.i.d. from a law on [-1, 1]. Trials are grouped
into fixed-size chunks; chunk c draws from the counter-based stream
(seed, c), so the set of drawn values depends only on the seed and never on
how chunks are partitioned across workers. Per-statistic accumulators track
central moments up to order four and merge associatively, which makes
chunked, threaded and single-pass runs agree to rounding.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import rng as rng_mod
from . import closed_form as cf
from .closed_form import MomentTuple
from .spectral import (
    SpectralDifferenceContinuous,
    SpectralDifferencePeriodic,
    continuous_kernel,
)

CHUNK = 256  # trials per RNG stream; fixed so partitioning never moves a draw

THREADS_ENV = "ANTICIP_THREADS"

# zero-variance statistics (degenerate laws) compare exactly, to this slack
_EXACT_SLACK = 1e-12


@dataclass(frozen=True)
class SamplingDistribution:
    """A component law on [-1, 1] with analytic moments m1..m4.

    Built-ins: `uniform` on [-1, 1], symmetric `two-point` at +-y0, and
    discrete `table` laws given by atoms and masses. Declaring a law
    symmetric asserts m1 = m3 = 0.
    """

    family: str
    label: str
    moments: MomentTuple
    symmetric: bool
    points: np.ndarray | None = None
    masses: np.ndarray | None = None
    _cum: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.symmetric and (self.moments.m1 != 0.0 or self.moments.m3 != 0.0):
            raise ValueError("a symmetric law must have m1 = m3 = 0")
        for name in ("points", "masses", "_cum"):
            arr = getattr(self, name)
            if arr is not None:
                arr = np.asarray(arr, dtype=float)
                arr.setflags(write=False)
                object.__setattr__(self, name, arr)

    @classmethod
    def uniform(cls) -> "SamplingDistribution":
        return cls(
            family="uniform",
            label="uniform",
            moments=MomentTuple(0.0, 1.0 / 3.0, 0.0, 1.0 / 5.0),
            symmetric=True,
        )

    @classmethod
    def two_point(cls, y0: float) -> "SamplingDistribution":
        if not 0.0 <= y0 <= 1.0:
            raise ValueError("two-point amplitude must lie in [0, 1]")
        return cls(
            family="two-point",
            label=f"two-point:{y0:g}",
            moments=MomentTuple(0.0, y0**2, 0.0, y0**4),
            symmetric=True,
            points=np.array([-y0, y0]),
            masses=np.array([0.5, 0.5]),
            _cum=np.array([0.5, 1.0]),
        )

    @classmethod
    def table(
        cls, points, masses, symmetric: bool = False, label: str | None = None
    ) -> "SamplingDistribution":
        pts = np.asarray(points, dtype=float)
        ms = np.asarray(masses, dtype=float)
        if pts.ndim != 1 or pts.shape != ms.shape or pts.size == 0:
            raise ValueError("table needs matching 1-d points and masses")
        if float(np.abs(pts).max()) > 1.0:
            raise ValueError("table support must lie within [-1, 1]")
        if np.any(ms < 0) or abs(float(ms.sum()) - 1.0) > 1e-9:
            raise ValueError("table masses must be nonnegative and sum to 1")
        ms = ms / ms.sum()
        order = np.argsort(pts)
        pts, ms = pts[order], ms[order]
        mom = MomentTuple(*(float((ms * pts**r).sum()) for r in (1, 2, 3, 4)))
        return cls(
            family="table",
            label=label or "table",
            moments=mom,
            symmetric=symmetric,
            points=pts,
            masses=ms,
            _cum=np.cumsum(ms),
        )

    def sample(self, rng: np.random.Generator, shape) -> np.ndarray:
        if self.family == "uniform":
            return rng.uniform(-1.0, 1.0, shape)
        u = rng.random(shape)
        idx = np.minimum(np.searchsorted(self._cum, u, side="right"), self.points.size - 1)
        return self.points[idx]

    def mass_within(self, epsilon: float) -> float:
        """P(|yhat| < epsilon), analytic per family."""
        if not 0.0 < epsilon:
            raise ValueError("epsilon must be positive")
        if self.family == "uniform":
            return min(epsilon, 1.0)
        return float(self.masses[np.abs(self.points) < epsilon].sum())


def parse_distribution(text: str) -> SamplingDistribution:
    """Parse 'uniform' | 'two-point:<y0>' | 'table:<json path>'."""
    if text == "uniform":
        return SamplingDistribution.uniform()
    if text.startswith("two-point:"):
        return SamplingDistribution.two_point(float(text.split(":", 1)[1]))
    if text.startswith("table:"):
        import json

        path = text.split(":", 1)[1]
        with open(path, "r", encoding="utf-8") as fh:
            spec = json.load(fh)
        return SamplingDistribution.table(
            spec["points"],
            spec["masses"],
            symmetric=bool(spec.get("symmetric", False)),
            label=text,
        )
    raise ValueError(f"unknown distribution {text!r}")


def sample_spectral_difference(
    dist: SamplingDistribution,
    rng: np.random.Generator,
    *,
    period: int | None = None,
    cells: int | None = None,
):
    """One i.i.d. spectral difference of the requested size."""
    if (period is None) == (cells is None):
        raise ValueError("exactly one of period and cells must be given")
    size = period if period is not None else cells
    vals = dist.sample(rng, size)
    if period is not None:
        return SpectralDifferencePeriodic(vals)
    return SpectralDifferenceContinuous(vals)


# -- streaming accumulation --------------------------------------------------

@dataclass
class MomentAccumulator:
    """Count, mean and central sums M2..M4; merges associatively (Pebay)."""

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0
    m3: float = 0.0
    m4: float = 0.0

    def add_batch(self, x: np.ndarray) -> None:
        x = np.asarray(x, dtype=float)
        if x.size == 0:
            return
        if np.all(x == x[0]):
            # constant batches carry exactly zero central moments; computing
            # them through the rounded batch mean would leave ~eps^2 residue
            other = MomentAccumulator(count=x.size, mean=float(x[0]))
        else:
            bmean = float(x.mean())
            d = x - bmean
            d2 = d * d
            other = MomentAccumulator(
                count=x.size,
                mean=bmean,
                m2=float(d2.sum()),
                m3=float((d2 * d).sum()),
                m4=float((d2 * d2).sum()),
            )
        merged = merge_accumulators(self, other)
        self.count, self.mean = merged.count, merged.mean
        self.m2, self.m3, self.m4 = merged.m2, merged.m3, merged.m4

    @property
    def variance(self) -> float:
        return self.m2 / (self.count - 1) if self.count > 1 else 0.0

    @property
    def std_error(self) -> float:
        return math.sqrt(self.variance / self.count) if self.count else 0.0

    @property
    def variance_std_error(self) -> float:
        """Standard error of the sample variance, from the empirical fourth
        central moment: Var(s^2) ~ (mu4 - s^4 (n-3)/(n-1)) / n."""
        n = self.count
        if n < 2:
            return 0.0
        mu4 = self.m4 / n
        s2 = self.variance
        return math.sqrt(max(mu4 - s2 * s2 * (n - 3) / (n - 1), 0.0) / n)


def merge_accumulators(a: MomentAccumulator, b: MomentAccumulator) -> MomentAccumulator:
    if a.count == 0:
        return MomentAccumulator(b.count, b.mean, b.m2, b.m3, b.m4)
    if b.count == 0:
        return MomentAccumulator(a.count, a.mean, a.m2, a.m3, a.m4)
    na, nb = a.count, b.count
    n = na + nb
    d = b.mean - a.mean
    mean = a.mean + d * nb / n
    m2 = a.m2 + b.m2 + d * d * na * nb / n
    m3 = (
        a.m3
        + b.m3
        + d**3 * na * nb * (na - nb) / n**2
        + 3.0 * d * (na * b.m2 - nb * a.m2) / n
    )
    m4 = (
        a.m4
        + b.m4
        + d**4 * na * nb * (na * na - na * nb + nb * nb) / n**3
        + 6.0 * d * d * (na * na * b.m2 + nb * nb * a.m2) / n**2
        + 4.0 * d * (na * b.m3 - nb * a.m3) / n
    )
    return MomentAccumulator(n, mean, m2, m3, m4)


# -- configuration and report -------------------------------------------------

@dataclass(frozen=True)
class MonteCarloConfig:
    """What to estimate: p_n for n in n_list, p_N for N in N_list, p_tot
    always, and windowed tilde(n)^r for r in r_list."""

    dist: SamplingDistribution
    trials: int
    seed: int
    period: int | None = None
    cells: int | None = None
    n_list: tuple[int, ...] = ()
    N_list: tuple[int, ...] = ()
    r_list: tuple[float, ...] = ()
    epsilon: float | None = None

    def __post_init__(self):
        if (self.period is None) == (self.cells is None):
            raise ValueError("exactly one of period and cells must be given")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        size = self.period if self.period is not None else self.cells
        if size < 2:
            raise ValueError("size must be at least 2")
        if self.period is not None:
            for n in self.n_list:
                if not 1 <= n <= self.period:
                    raise ValueError(f"n = {n} outside 1..{self.period}")
            for N in self.N_list:
                if not 0 <= N < self.period / 2:
                    raise ValueError(f"N = {N} outside 0..<{self.period / 2}")
        else:
            for N in self.N_list:
                if N < 0:
                    raise ValueError("N must be nonnegative")
        for r in self.r_list:
            if r < 0:
                raise ValueError("moment orders must be nonnegative")
        if self.epsilon is not None and not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")

    @property
    def mode(self) -> str:
        return "periodic" if self.period is not None else "continuous"

    @property
    def size(self) -> int:
        return self.period if self.period is not None else self.cells


@dataclass
class StatRow:
    """One estimated statistic with its closed-form pairing, when available.

    `exact_pred` marks predictions that are exact at this size; asymptotic or
    cell-mapped pairings keep their note but carry no z-score.
    """

    statistic: str
    index: float | None
    acc: MomentAccumulator
    pred_mean: float | None = None
    pred_var: float | None = None
    note: str | None = None
    exact_pred: bool = False

    @property
    def key(self) -> tuple:
        return (self.statistic, self.index)

    def _z(self, measured: float, predicted: float | None, se: float) -> float | None:
        if predicted is None or not self.exact_pred:
            return None
        if se == 0.0:
            return 0.0 if abs(measured - predicted) <= _EXACT_SLACK else math.inf
        return (measured - predicted) / se

    @property
    def z_mean(self) -> float | None:
        return self._z(self.acc.mean, self.pred_mean, self.acc.std_error)

    @property
    def z_var(self) -> float | None:
        return self._z(self.acc.variance, self.pred_var, self.acc.variance_std_error)


@dataclass
class EstimateReport:
    mode: str
    size: int
    dist_label: str
    seed: int
    trials: int
    rows: list[StatRow]

    def row(self, statistic: str, index: float | None = None) -> StatRow:
        for r in self.rows:
            if r.key == (statistic, index):
                return r
        raise KeyError(f"no row for {(statistic, index)!r}")

    def merge(self, other: "EstimateReport") -> "EstimateReport":
        """Combine two disjoint trial partitions of the same configuration."""
        if (self.mode, self.size, self.dist_label, self.seed) != (
            other.mode,
            other.size,
            other.dist_label,
            other.seed,
        ):
            raise ValueError("reports to merge must share their configuration")
        if [r.key for r in self.rows] != [r.key for r in other.rows]:
            raise ValueError("reports to merge must carry the same statistics")
        rows = [
            replace(a, acc=merge_accumulators(a.acc, b.acc))
            for a, b in zip(self.rows, other.rows)
        ]
        return EstimateReport(
            mode=self.mode,
            size=self.size,
            dist_label=self.dist_label,
            seed=self.seed,
            trials=self.trials + other.trials,
            rows=rows,
        )

    def max_abs_z(self) -> float:
        worst = 0.0
        for r in self.rows:
            for z in (r.z_mean, r.z_var):
                if z is not None:
                    worst = max(worst, abs(z))
        return worst


def _resolve_threads(threads: int | None) -> int:
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get(THREADS_ENV, "")
    return max(1, int(env)) if env.strip() else 1


def _chunk_sizes(trials: int) -> list[int]:
    full, rest = divmod(trials, CHUNK)
    sizes = [CHUNK] * full
    if rest:
        sizes.append(rest)
    return sizes


def _fold_indices(p: int) -> np.ndarray:
    n = np.arange(1, p + 1)
    m = n % p
    return np.where(2 * m <= p + 1, m, p + 1 - m)


def _run_chunked(worker, trials: int, seed: int, threads: int, chunk_range):
    """Evaluate worker(chunk_ordinal, rng, n_trials) over the selected chunks
    and return results in ordinal order."""
    sizes = _chunk_sizes(trials)
    lo, hi = (0, len(sizes)) if chunk_range is None else chunk_range
    if not 0 <= lo <= hi <= len(sizes):
        raise ValueError(f"chunk range {(lo, hi)} outside 0..{len(sizes)}")
    ordinals = range(lo, hi)

    def call(c: int):
        return worker(c, rng_mod.stream(seed, c), sizes[c])

    n_threads = _resolve_threads(threads)
    if n_threads == 1 or len(ordinals) <= 1:
        return [call(c) for c in ordinals]
    with ThreadPoolExecutor(max_workers=n_threads) as pool:
        return list(pool.map(call, ordinals))


def _periodic_trial_stats(config: MonteCarloConfig, y: np.ndarray) -> dict:
    p = config.period
    k = np.arange(p)
    chirp = np.exp(1j * np.pi * k / p)
    pn = np.abs(np.roll(np.fft.fft(y * chirp, axis=1) / p, -1, axis=1)) ** 2
    ptot = (y * y).mean(axis=1)  # Parseval: exact, no transform error
    out = {("p_tot", None): ptot}
    for n in config.n_list:
        out[("p_n", float(n))] = pn[:, n - 1]
    for N in config.N_list:
        near = pn[:, :N].sum(axis=1) + pn[:, p - N :].sum(axis=1) if N else 0.0
        out[("p_N", float(N))] = ptot - near
    if config.r_list:
        folded = _fold_indices(p).astype(float)
        for r in config.r_list:
            out[("moment", float(r))] = pn @ (folded**r)
    return out


def _continuous_window(config: MonteCarloConfig) -> np.ndarray:
    half = 1
    if config.N_list:
        half = max(half, max(config.N_list))
    for n in config.n_list:
        half = max(half, abs(n), abs(1 - n))
    if config.r_list:
        half = max(half, 32)
    return np.arange(1 - half, half + 1)


def _continuous_trial_stats(
    config: MonteCarloConfig, y: np.ndarray, window: np.ndarray, kernel: np.ndarray
) -> dict:
    pn = np.abs(y @ kernel.T) ** 2  # columns follow `window`
    ptot = (y * y).mean(axis=1)
    col = {int(n): j for j, n in enumerate(window)}
    out = {("p_tot", None): ptot}
    for n in config.n_list:
        out[("p_n", float(n))] = pn[:, col[n]]
    absn = np.abs(window)
    for N in config.N_list:
        out[("p_N", float(N))] = ptot - pn[:, absn <= N].sum(axis=1)
    for r in config.r_list:
        out[("moment", float(r))] = pn @ (absn.astype(float) ** r)
    return out


def _predictions(config: MonteCarloConfig) -> dict:
    """Closed-form pairings per statistic: (mean, var, note, exact)."""
    m = config.dist.moments
    preds = {}
    if config.mode == "periodic":
        p = config.period
        preds[("p_tot", None)] = (cf.expected_ptot(m), cf.var_pN(p, 0, m), None, True)
        for n in config.n_list:
            preds[("p_n", float(n))] = (cf.expected_pn(p, n, m), cf.var_pn(p, n, m), None, True)
        for N in config.N_list:
            preds[("p_N", float(N))] = (cf.expected_pN(p, N, m), cf.var_pN(p, N, m), None, True)
        for r in config.r_list:
            lead = cf.expected_moment_observable(p, r, m)
            preds[("moment", float(r))] = (lead.value, None, f"leading order, error {lead.error_order}", False)
    else:
        M = config.cells
        preds[("p_tot", None)] = (cf.continuous_expected_ptot(m), cf.var_pN(M, 0, m), None, True)
        note = "finite-cell mapping, O(M^-2) bias"
        for n in config.n_list:
            preds[("p_n", float(n))] = (
                cf.finite_cell_expected_pn(M, n, m),
                cf.finite_cell_var_pn(M, n, m),
                note,
                False,
            )
        for N in config.N_list:
            if N < M / 2:
                preds[("p_N", float(N))] = (
                    cf.finite_cell_expected_pN(M, N, m),
                    cf.finite_cell_var_pN(M, N, m),
                    note,
                    False,
                )
            else:
                preds[("p_N", float(N))] = (None, None, None, False)
        for r in config.r_list:
            preds[("moment", float(r))] = (None, None, "window partial sum of a divergent series", False)
    return preds


def run_monte_carlo(
    config: MonteCarloConfig,
    *,
    threads: int | None = None,
    chunk_range: tuple[int, int] | None = None,
) -> EstimateReport:
    """Estimate the configured statistics over i.i.d. spectral differences.

    `chunk_range` restricts the run to chunk ordinals [lo, hi); partial
    reports over disjoint ranges merge back to the single-pass report.
    """
    keys = list(_predictions(config).keys())
    window = kernel = None
    if config.mode == "continuous":
        window = _continuous_window(config)
        kernel = continuous_kernel(config.cells, window)

    def worker(c: int, rng: np.random.Generator, n_trials: int):
        y = config.dist.sample(rng, (n_trials, config.size))
        if config.mode == "periodic":
            stats = _periodic_trial_stats(config, y)
        else:
            stats = _continuous_trial_stats(config, y, window, kernel)
        accs = {}
        for key in keys:
            acc = MomentAccumulator()
            acc.add_batch(np.broadcast_to(stats[key], (n_trials,)))
            accs[key] = acc
        return accs

    chunk_accs = _run_chunked(worker, config.trials, config.seed, threads, chunk_range)
    totals = {key: MomentAccumulator() for key in keys}
    for accs in chunk_accs:
        for key in keys:
            totals[key] = merge_accumulators(totals[key], accs[key])

    preds = _predictions(config)
    rows = []
    for key in keys:
        mean_pred, var_pred, note, exact = preds[key]
        rows.append(
            StatRow(
                statistic=key[0],
                index=key[1],
                acc=totals[key],
                pred_mean=mean_pred,
                pred_var=var_pred,
                note=note,
                exact_pred=exact,
            )
        )
    trials_done = sum(acc[keys[0]].count for acc in chunk_accs) if chunk_accs else 0
    return EstimateReport(
        mode=config.mode,
        size=config.size,
        dist_label=config.dist.label,
        seed=config.seed,
        trials=trials_done,
        rows=rows,
    )


def tail_exceedance(
    dist: SamplingDistribution,
    p: int,
    N: int,
    delta: float,
    trials: int,
    seed: int,
    *,
    threads: int | None = None,
) -> float:
    """Fraction of trials whose tail probability p_N exceeds delta."""
    if not 0 <= N < p / 2:
        raise ValueError(f"N must lie in 0..<{p / 2}")
    k = np.arange(p)
    chirp = np.exp(1j * np.pi * k / p)

    def worker(c: int, rng: np.random.Generator, n_trials: int):
        y = dist.sample(rng, (n_trials, p))
        pn = np.abs(np.roll(np.fft.fft(y * chirp, axis=1) / p, -1, axis=1)) ** 2
        ptot = (y * y).mean(axis=1)
        near = pn[:, :N].sum(axis=1) + pn[:, p - N :].sum(axis=1) if N else 0.0
        return int(((ptot - near) > delta).sum())

    counts = _run_chunked(worker, trials, seed, threads, None)
    return sum(counts) / trials


@dataclass
class NearZeroReport:
    """Count of near-zero components per trial versus its Binomial law."""

    period: int
    epsilon: float
    q: float
    trials: int
    seed: int
    histogram: np.ndarray
    acc: MomentAccumulator
    chi_square: float
    chi_square_dof: int

    @property
    def pred_mean(self) -> float:
        return self.period * self.q

    @property
    def pred_var(self) -> float:
        return self.period * self.q * (1.0 - self.q)

    @property
    def z_mean(self) -> float:
        se = self.acc.std_error
        diff = self.acc.mean - self.pred_mean
        if se == 0.0:
            return 0.0 if abs(diff) <= _EXACT_SLACK else math.inf
        return diff / se

    @property
    def z_var(self) -> float:
        se = self.acc.variance_std_error
        diff = self.acc.variance - self.pred_var
        if se == 0.0:
            return 0.0 if abs(diff) <= _EXACT_SLACK else math.inf
        return diff / se


def _binomial_pmf(p: int, q: float) -> np.ndarray:
    if q <= 0.0:
        out = np.zeros(p + 1)
        out[0] = 1.0
        return out
    if q >= 1.0:
        out = np.zeros(p + 1)
        out[p] = 1.0
        return out
    k = np.arange(p + 1)
    logc = (
        math.lgamma(p + 1)
        - np.array([math.lgamma(v + 1) + math.lgamma(p - v + 1) for v in k])
    )
    return np.exp(logc + k * math.log(q) + (p - k) * math.log1p(-q))


def _chi_square(hist: np.ndarray, expected: np.ndarray) -> tuple[float, int]:
    """Pearson statistic after pooling adjacent cells to expected count >= 5."""
    obs_bins, exp_bins = [], []
    o_acc = e_acc = 0.0
    for o, e in zip(hist, expected):
        o_acc += o
        e_acc += e
        if e_acc >= 5.0:
            obs_bins.append(o_acc)
            exp_bins.append(e_acc)
            o_acc = e_acc = 0.0
    if e_acc > 0.0 or o_acc > 0.0:
        if exp_bins:
            obs_bins[-1] += o_acc
            exp_bins[-1] += e_acc
        else:
            obs_bins, exp_bins = [o_acc], [e_acc]
    obs = np.asarray(obs_bins)
    exp = np.asarray(exp_bins)
    ok = exp > 0
    if not np.all(ok):
        if np.any(obs[~ok] > 0):
            return math.inf, max(len(obs_bins) - 1, 0)
        obs, exp = obs[ok], exp[ok]
    stat = float(((obs - exp) ** 2 / exp).sum())
    return stat, max(obs.size - 1, 0)


def near_zero_statistics(
    dist: SamplingDistribution,
    p: int,
    epsilon: float,
    trials: int,
    seed: int,
    *,
    threads: int | None = None,
) -> NearZeroReport:
    """Distribution of #{k : |yhat_k| < epsilon}, checked against
    Binomial(p, q) with q = P(|yhat| < epsilon)."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    if p < 2:
        raise ValueError("period must be at least 2")

    def worker(c: int, rng: np.random.Generator, n_trials: int):
        y = dist.sample(rng, (n_trials, p))
        counts = (np.abs(y) < epsilon).sum(axis=1)
        acc = MomentAccumulator()
        acc.add_batch(counts.astype(float))
        return np.bincount(counts, minlength=p + 1), acc

    results = _run_chunked(worker, trials, seed, threads, None)
    hist = np.zeros(p + 1, dtype=np.int64)
    acc = MomentAccumulator()
    for h, a in results:
        hist += h
        acc = merge_accumulators(acc, a)

    q = dist.mass_within(epsilon)
    expected = trials * _binomial_pmf(p, q)
    stat, dof = _chi_square(hist.astype(float), expected)
    return NearZeroReport(
        period=p,
        epsilon=epsilon,
        q=q,
        trials=trials,
        seed=seed,
        histogram=hist,
        acc=acc,
        chi_square=stat,
        chi_square_dof=dof,
    )
