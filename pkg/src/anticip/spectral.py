"""Spectral differences and the half-step amplitudes they generate.

The normalized spectral difference yhat stores p*y per residue class
(periodic) or 2*pi*y per cell (piecewise constant on M cells of [0, 2*pi)),
so components always lie in [-1, 1] and a constant difference y has total
half-step probability y^2.

Half-step amplitudes use half-integer frequencies:

    periodic:    alpha_n = p^-1 sum_k yhat_k exp(-2*pi*i*(n-1/2)*k/p)
    continuous:  alpha_n = (2*pi)^-1 integral yhat(kappa) exp(-i*(n-1/2)*kappa) dkappa

The periodic transform is a plain DFT after the chirp premultiplication
yhat_k -> yhat_k * exp(i*pi*k/p); the continuous one integrates each cell
with its closed-form antiderivative, so neither path carries quadrature
error.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .bounds import DiscreteMeasure

_BOUND_SLACK = 1e-12

AMPLITUDE_MODES = ("fast-transform", "exact-sum")


class ReductionError(ValueError):
    """Measure does not fold to the uniform law required by orthogonality."""


def _frozen(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


def _check_unit_band(arr: np.ndarray) -> None:
    if arr.size and float(np.abs(arr).max()) > 1.0 + _BOUND_SLACK:
        raise ValueError("normalized spectral difference must lie in [-1, 1]")


@dataclass(frozen=True)
class SpectralDifferencePeriodic:
    """yhat_0..yhat_{p-1}, one component per residue class, each in [-1, 1]."""

    values: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.values, float)
        if arr.ndim != 1 or arr.size < 2:
            raise ValueError("period must be at least 2")
        _check_unit_band(arr)
        object.__setattr__(self, "values", arr)

    @property
    def period(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class SpectralDifferenceContinuous:
    """yhat_0..yhat_{M-1}, cell j covering kappa in [2*pi*j/M, 2*pi*(j+1)/M)."""

    values: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.values, float)
        if arr.ndim != 1 or arr.size < 2:
            raise ValueError("cell count must be at least 2")
        _check_unit_band(arr)
        object.__setattr__(self, "values", arr)

    @property
    def cells(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class AmplitudeSeries:
    """Amplitudes over a contiguous index range; p-periodic when period is set."""

    n_start: int
    values: np.ndarray
    period: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values, complex))

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.n_start, self.n_start + self.values.size)

    def at(self, n: int) -> complex:
        """Amplitude at index n, using exact periodicity when available."""
        offset = n - self.n_start
        if self.period is not None:
            offset %= self.period
        if not 0 <= offset < self.values.size:
            raise IndexError(f"index {n} outside the computed range")
        return complex(self.values[offset])


@dataclass(frozen=True)
class ProbabilitySeries:
    """Detection probabilities |alpha_n|^2 plus their total over the range."""

    n_start: int
    values: np.ndarray
    p_tot: float
    period: int | None = None

    def __post_init__(self):
        arr = _frozen(self.values, float)
        if arr.size and (float(arr.min()) < -1e-15 or float(arr.max()) > 1.0 + 1e-9):
            raise ValueError("probabilities must lie in [0, 1]")
        if self.p_tot > 1.0 + 1e-9:
            raise ValueError("total probability exceeds 1")
        object.__setattr__(self, "values", arr)

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.n_start, self.n_start + self.values.size)


class MomentResult(NamedTuple):
    """Partial sum of tilde(n)^r p_n, flagged when it fails to converge."""

    value: float
    diverged: bool


def amplitudes_periodic(
    sd: SpectralDifferencePeriodic, mode: str = "fast-transform"
) -> AmplitudeSeries:
    """Amplitudes for n = 1..p.

    `fast-transform` premultiplies by the half-step chirp and runs one DFT;
    `exact-sum` is the O(p^2) direct summation oracle. The two agree to
    rounding (the DFT index n = 0 output is alpha_p by exact periodicity).
    """
    p = sd.period
    if mode == "fast-transform":
        k = np.arange(p)
        chirped = sd.values * np.exp(1j * np.pi * k / p)
        amps = np.roll(np.fft.fft(chirped) / p, -1)
    elif mode == "exact-sum":
        k = np.arange(p)
        amps = np.empty(p, dtype=complex)
        block = 256
        for lo in range(0, p, block):
            n = np.arange(lo + 1, min(lo + block, p) + 1, dtype=float)
            phases = np.exp(-2j * np.pi * np.outer(n - 0.5, k) / p)
            amps[lo : lo + n.size] = phases @ sd.values / p
    else:
        raise ValueError(f"unknown mode {mode!r}; expected one of {AMPLITUDE_MODES}")
    return AmplitudeSeries(n_start=1, values=amps, period=p)


def continuous_kernel(cells: int, indices: np.ndarray) -> np.ndarray:
    """Exact per-cell integration weights: row n, column j gives the cell-j
    contribution to alpha_n for a unit yhat on that cell."""
    edges = 2.0 * np.pi * np.arange(cells + 1) / cells
    omega = np.asarray(indices, dtype=float) - 0.5
    lo = np.exp(-1j * np.outer(omega, edges[:-1]))
    hi = np.exp(-1j * np.outer(omega, edges[1:]))
    return (lo - hi) / (2j * np.pi * omega[:, None])


def amplitudes_continuous(
    sd: SpectralDifferenceContinuous, n_min: int, n_max: int
) -> AmplitudeSeries:
    """Amplitudes for n = n_min..n_max by exact cell-wise integration."""
    if n_min > n_max:
        raise ValueError("n_min must not exceed n_max")
    indices = np.arange(n_min, n_max + 1)
    amps = continuous_kernel(sd.cells, indices) @ sd.values
    return AmplitudeSeries(n_start=n_min, values=amps, period=None)


def probabilities(amps: AmplitudeSeries) -> ProbabilitySeries:
    """p_n = |alpha_n|^2, with p_tot summed over the series range."""
    vals = np.abs(amps.values) ** 2
    return ProbabilitySeries(
        n_start=amps.n_start,
        values=vals,
        p_tot=float(vals.sum()),
        period=amps.period,
    )


def parseval_total(sd) -> float:
    """Total half-step probability from the difference alone: mean(yhat^2)."""
    return float(np.mean(sd.values**2))


def truncation_window(sd: SpectralDifferenceContinuous, tail_tol: float = 1e-6) -> int:
    """Default symmetric window bound: smallest n_max whose tail estimate
    2*max(yhat^2)/(pi^2*(n_max-1/2)) falls below tail_tol.

    The estimate is tight for smooth (constant-like) differences; rapidly
    alternating cells carry tails up to a factor M larger.
    """
    peak = float(np.max(sd.values**2))
    if peak == 0.0:
        return 1
    return int(np.ceil(0.5 + 2.0 * peak / (np.pi**2 * tail_tol)))


def tilde_index(n: int, period: int | None = None) -> int:
    """Folded index distance: |n| mod p reflected into 0..ceil(p/2); |n| when
    the period is infinite (None)."""
    if period is None:
        return abs(int(n))
    p = int(period)
    if p < 1:
        raise ValueError("period must be positive")
    m = abs(int(n)) % p
    return m if 2 * m <= p + 1 else p + 1 - m


def cumulative_probability(probs: ProbabilitySeries, N: int) -> float:
    """Tail probability beyond folded index N.

    Periodic: sum over n = N+1 .. p-N of a full-period series (requires
    N < p/2). Continuous: sum over the window indices with |n| > N.
    """
    if N < 0:
        raise ValueError("N must be nonnegative")
    if probs.period is not None:
        p = probs.period
        if probs.n_start != 1 or probs.values.size != p:
            raise ValueError("periodic tail sums need the full-period series n = 1..p")
        if N >= p / 2:
            raise ValueError(f"N must be below p/2 = {p / 2} (got {N})")
        return float(probs.values[N : p - N].sum())
    mask = np.abs(probs.indices) > N
    return float(probs.values[mask].sum())


def moment_observable(probs: ProbabilitySeries, r: float) -> MomentResult:
    """Windowed sum of tilde(n)^r p_n.

    Periodic series sum exactly over the period. Continuous series report the
    window partial sum and flag divergence when dyadic blocks of the folded
    index stop decaying (the partial sums then fail to Cauchy-converge).
    """
    if r < 0:
        raise ValueError("moment order must be nonnegative")
    if probs.period is not None:
        folded = np.array([tilde_index(int(n), probs.period) for n in probs.indices])
        terms = folded.astype(float) ** r * probs.values
        return MomentResult(float(terms.sum()), False)

    folded = np.abs(probs.indices).astype(float)
    terms = folded**r * probs.values
    total = float(terms.sum())

    top = folded.max(initial=0.0)
    blocks = []
    hi = 1
    while hi <= top:  # only dyadic blocks fully inside the window
        sel = (folded > hi / 2) & (folded <= hi)
        blocks.append(float(terms[sel].sum()))
        hi *= 2
    diverged = (
        len(blocks) >= 3
        and blocks[-1] > 0.0
        and blocks[-1] >= 0.75 * blocks[-2]
    )
    return MomentResult(total, diverged)


def spectral_difference_from_measure(
    measure: DiscreteMeasure, p: int, tol: float = 1e-9
) -> SpectralDifferencePeriodic:
    """Fold a measure modulo 4*pi into the per-class normalized difference.

    Points must sit on the grid 2*pi*(n + k/p) and every residue class must
    carry total mass 1/p within tol (the uniform-reduction constraint); the
    class difference is then p * (even-shift mass - odd-shift mass).
    """
    if p < 2:
        raise ValueError("period must be at least 2")
    step = 2.0 * np.pi / p
    grid = np.rint(measure.points / step)
    off = np.abs(measure.points - grid * step)
    if off.size and float(off.max()) > tol:
        j = int(off.argmax())
        raise ReductionError(
            f"point {measure.points[j]!r} is {off[j]:.3e} away from the 2*pi/{p} grid"
        )
    flat = grid.astype(int)
    classes = flat % p
    shifts = (flat - classes) // p

    even = np.zeros(p)
    odd = np.zeros(p)
    even_sel = shifts % 2 == 0
    np.add.at(even, classes[even_sel], measure.weights[even_sel])
    np.add.at(odd, classes[~even_sel], measure.weights[~even_sel])

    class_mass = even + odd
    dev = np.abs(class_mass - 1.0 / p)
    if float(dev.max()) > tol:
        k = int(dev.argmax())
        raise ReductionError(
            f"reduction modulo 2*pi is non-uniform: residue class {k} carries "
            f"mass {class_mass[k]!r}, expected {1.0 / p!r}"
        )
    # class masses were verified to tol, so any unit-band overshoot is fuzz
    yhat = np.clip(p * (even - odd), -1.0, 1.0)
    return SpectralDifferencePeriodic(yhat)
