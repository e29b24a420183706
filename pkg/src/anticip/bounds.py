"""Measure-level toolkit: absolute energy moment, median minimizer,
autocorrelation, and the frequency bounds obeyed by orthogonal evolutions.

Everything is in the standard scale (step size over hbar equal to one), where
one evolution step multiplies the spectral component at lambda by
exp(-i*lambda). A period-p orthogonal evolution folds to the uniform measure
on the p-th roots of unity; points then sit on the grid 2*pi*(n + k/p).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

GRID_T_MAX = 2.0
GRID_T_STEP = 1e-3
_TOL = 1e-9

ShiftLaw = Callable[[np.random.Generator], tuple[Sequence[int], Sequence[float]]]


class OrthogonalityError(ValueError):
    """Measure does not fold to the uniform distribution on {2*pi*k/p}."""


def _frozen(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class DiscreteMeasure:
    """Finite spectral measure: strictly ascending points, unit total mass."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = _frozen(self.points)
        wts = _frozen(self.weights)
        if pts.ndim != 1 or pts.shape != wts.shape or pts.size == 0:
            raise ValueError("points and weights must be matching 1-d sequences")
        if np.any(np.diff(pts) <= 0):
            raise ValueError("points must be strictly ascending and distinct")
        if np.any(wts < 0):
            raise ValueError("weights must be nonnegative")
        total = float(wts.sum())
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1 (got {total!r})")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", wts)


def abs_moment(measure: DiscreteMeasure, lambda0: float) -> float:
    """Mean absolute energy deviation around lambda0; convex in lambda0."""
    return float(np.sum(measure.weights * np.abs(measure.points - lambda0)))


def median_minimizer(measure: DiscreteMeasure) -> tuple[float, float]:
    """Location minimizing the absolute moment, and the minimum value.

    The minimizer set is the weighted-median interval; the whole interval is
    flat when the cumulative mass hits 1/2 exactly, in which case the midpoint
    is returned for determinism.
    """
    cum = np.cumsum(measure.weights)
    i = int(np.searchsorted(cum, 0.5 - 1e-15))
    if abs(float(cum[i]) - 0.5) <= 1e-12 and i + 1 < measure.points.size:
        lam = 0.5 * float(measure.points[i] + measure.points[i + 1])
    else:
        lam = float(measure.points[i])
    return lam, abs_moment(measure, lam)


def autocorrelation(measure: DiscreteMeasure, t):
    """Fourier transform of the measure at time(s) t: sum w_j exp(-i lambda_j t)."""
    t_arr = np.asarray(t, dtype=float)
    flat = np.exp(-1j * np.outer(t_arr.ravel(), measure.points)) @ measure.weights
    if t_arr.ndim == 0:
        return complex(flat[0])
    return flat.reshape(t_arr.shape)


def _check_uniform_reduction(measure: DiscreteMeasure, p: int, tol: float) -> None:
    step = 2.0 * np.pi / p
    grid = np.rint(measure.points / step)
    off = np.abs(measure.points - grid * step)
    if off.size and float(off.max()) > tol:
        j = int(off.argmax())
        raise OrthogonalityError(
            f"point {measure.points[j]!r} is {off[j]:.3e} away from the 2*pi/{p} grid"
        )
    classes = grid.astype(int) % p
    mass = np.bincount(classes, weights=measure.weights, minlength=p)
    dev = np.abs(mass - 1.0 / p)
    if float(dev.max()) > tol:
        k = int(dev.argmax())
        raise OrthogonalityError(
            f"residue class {k} carries mass {mass[k]!r}, expected {1.0 / p!r}"
        )


@dataclass(frozen=True)
class BoundReport:
    """Slacks of the step-size and frequency inequalities for one measure.

    All slacks are (measured - bound); nonnegative within tolerance means the
    inequality holds. `autocorr_slack_min` is the worst grid point of
    Re(exp(i*lambda0*t) * mu^(t)) - (1 - min_abs_moment * t), the short-time
    overlap bound applied to the recentered Hamiltonian.
    """

    period: int
    lambda0: float
    min_abs_moment: float
    corollary2_slack: float
    passage_slack: float
    autocorr_slack_min: float
    orthogonality_dev: float
    t_max: float
    t_step: float
    tol: float

    @property
    def ok(self) -> bool:
        return (
            self.autocorr_slack_min >= -self.tol
            and self.corollary2_slack >= -self.tol
            and self.passage_slack >= -self.tol
        )


def check_bounds(
    measure: DiscreteMeasure,
    p: int,
    *,
    t_max: float = GRID_T_MAX,
    t_step: float = GRID_T_STEP,
    tol: float = _TOL,
) -> BoundReport:
    """Verify the overlap inequality on a t-grid plus the frequency floors.

    Requires the measure to fold uniformly onto {2*pi*k/p} (orthogonal
    evolution at step 1); raises OrthogonalityError otherwise.
    """
    if p < 2:
        raise ValueError("period must be at least 2")
    _check_uniform_reduction(measure, p, tol)
    lam0, mam = median_minimizer(measure)

    t = np.arange(0.0, t_max + 0.5 * t_step, t_step)
    lhs = np.real(np.exp(1j * lam0 * t) * autocorrelation(measure, t))
    slack = lhs - (1.0 - mam * t)

    n = np.arange(0, 2 * p + 1, dtype=float)
    target = (np.arange(0, 2 * p + 1) % p == 0).astype(float)
    ortho_dev = float(np.max(np.abs(autocorrelation(measure, n) - target)))

    return BoundReport(
        period=p,
        lambda0=lam0,
        min_abs_moment=mam,
        corollary2_slack=mam - np.pi / 2.0,
        passage_slack=mam - 1.0,
        autocorr_slack_min=float(slack.min()),
        orthogonality_dev=ortho_dev,
        t_max=t_max,
        t_step=t_step,
        tol=tol,
    )


def point_shift_law(shift: int = 0) -> ShiftLaw:
    """Deterministic profile: all of a class's mass at one integer shift."""

    def law(rng: np.random.Generator):
        return (shift,), (1.0,)

    return law


def two_shift_law(dist) -> ShiftLaw:
    """Profile with mass (1+yhat)/2 at shift 0 and (1-yhat)/2 at shift 1.

    `dist` is any sampling distribution with a `.sample(rng, shape)` method on
    [-1, 1]; the induced normalized spectral difference of the class is
    exactly the drawn yhat.
    """

    def law(rng: np.random.Generator):
        yhat = float(dist.sample(rng, ()))
        return (0, 1), ((1.0 + yhat) / 2.0, (1.0 - yhat) / 2.0)

    return law


def build_orthogonal_measure(
    p: int, shift_law: ShiftLaw, rng: np.random.Generator
) -> DiscreteMeasure:
    """Random orthogonal-evolution measure from per-class shift profiles.

    For each residue class k the law yields a finite profile over integer
    shifts n (nonnegative, total 1); weight profile[n]/p is placed at
    lambda = 2*pi*(n + k/p). The folded measure is exactly uniform by
    construction, so autocorrelation(m, n) = delta_{n mod p} for integer n.
    """
    if p < 2:
        raise ValueError("period must be at least 2")
    pts, wts = [], []
    for k in range(p):
        shifts, masses = shift_law(rng)
        sh = np.asarray(shifts, dtype=float)
        ms = np.asarray(masses, dtype=float)
        if sh.shape != ms.shape or sh.ndim != 1:
            raise ValueError("shift profile must be matching 1-d sequences")
        if np.any(sh != np.rint(sh)):
            raise ValueError("shifts must be integers")
        if np.any(ms < 0) or abs(float(ms.sum()) - 1.0) > 1e-12:
            raise ValueError("profile masses must be nonnegative and sum to 1")
        if np.unique(sh).size != sh.size:
            raise ValueError("shifts within one profile must be distinct")
        keep = ms > 1e-15
        pts.append(2.0 * np.pi * (sh[keep] + k / p))
        wts.append(ms[keep] / p)
    points = np.concatenate(pts)
    weights = np.concatenate(wts)
    order = np.argsort(points)
    return DiscreteMeasure(points[order], weights[order])
