"""Closed-form anticipation statistics under i.i.d. spectral differences.

The component law lives on [-1, 1] with raw moments m1..m4. Means and
variances of the per-step probability p_n, the tail probability p_N, the
total p_tot and the folded-index observable are polynomial in the kernels

    S_n = p^-1 sum_k exp(-2*pi*i*(n-1/2)*k/p)   (geometric, never singular)
    T_n = p^-1 [n == 0 mod p]
    U_N = sum_{n=N+1}^{p-N} |S_n|^2             (window complement weight)
    pi_N = 1 - 2*N/p

The variance polynomials are transcribed as printed in their source and are
validated empirically against Monte Carlo rather than rederived; they vanish
identically for degenerate (point-mass) laws.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


@dataclass(frozen=True)
class MomentTuple:
    """Raw moments m1..m4 of a component law supported in [-1, 1]."""

    m1: float
    m2: float
    m3: float
    m4: float

    def __post_init__(self):
        if self.m2 < self.m1**2 - 1e-12:
            raise ValueError("m2 < m1^2: not a valid moment sequence")
        if self.m4 < self.m2**2 - 1e-12:
            raise ValueError("m4 < m2^2: not a valid moment sequence")

    @property
    def sigma2(self) -> float:
        return self.m2 - self.m1 * self.m1


class LeadingOrder(NamedTuple):
    """A leading-order value plus the order tag of its neglected error term."""

    value: float
    error_order: str


def abs_s_squared(p: int, n):
    """|S_n|^2 = 1/(p sin(pi(n-1/2)/p))^2; n may be an array.

    The denominator never vanishes for integer n (the argument is never a
    multiple of pi because n - 1/2 is half-odd), so no special casing.
    """
    n_arr = np.asarray(n, dtype=float)
    val = 1.0 / (p * np.sin(np.pi * (n_arr - 0.5) / p)) ** 2
    return float(val) if n_arr.ndim == 0 else val


def kernel_s(p: int, n: int) -> complex:
    """S_n itself, including phase; conjugation symmetry S_n* = S_{p+1-n}."""
    theta = np.pi * (n - 0.5) / p
    return complex(-1j * np.exp(1j * theta) / (p * np.sin(theta)))


def kernel_t(p: int, n: int) -> float:
    """T_n: 1/p when n is a multiple of p, else 0 (exact case analysis)."""
    return 1.0 / p if n % p == 0 else 0.0


def tilde(n: int, p: int | None = None) -> int:
    """Folded index distance within one period; |n| when p is infinite."""
    if p is None:
        return abs(n)
    m = abs(n) % p
    return m if 2 * m <= p + 1 else p + 1 - m


def _check_window(p: int, n: int | None, N: int | None) -> None:
    if n is not None and not 1 <= n <= p:
        raise ValueError(f"n must lie in 1..{p} (got {n})")
    if N is not None and not 0 <= N < p / 2:
        raise ValueError(f"N must lie in 0..{(p - 1) // 2} for period {p} (got {N})")


def kernel_u(p: int, N: int) -> float:
    """U_N over the tail window n = N+1 .. p-N; U_0 = 1 (unit kernel mass)."""
    _check_window(p, None, N)
    n = np.arange(N + 1, p - N + 1)
    return float(abs_s_squared(p, n).sum())


def pi_tail(p: int, N: int) -> float:
    """pi_N = 1 - 2*N/p (N already folded in the admitted range)."""
    _check_window(p, None, N)
    return 1.0 - 2.0 * N / p


def pi_prime(p: int, n: int) -> float:
    return 1.0 - n / p


@dataclass(frozen=True)
class KernelValues:
    s_n: complex
    t_n: float
    u_n: float
    pi_n: float
    pi_prime_n: float


def kernels(p: int, n: int, N: int) -> KernelValues:
    _check_window(p, n, N)
    return KernelValues(
        s_n=kernel_s(p, n),
        t_n=kernel_t(p, n),
        u_n=kernel_u(p, N),
        pi_n=pi_tail(p, N),
        pi_prime_n=pi_prime(p, n),
    )


def expected_pn(p: int, n: int, m: MomentTuple) -> float:
    """E(p_n) = sigma^2/p + m1^2 |S_n|^2; at least sigma^2/p for every n."""
    return m.sigma2 / p + m.m1**2 * abs_s_squared(p, n)


def expected_pn_sq(p: int, n: int, m: MomentTuple) -> float:
    """Second raw moment E(p_n^2), transcribed as printed."""
    S2 = abs_s_squared(p, n)
    T = kernel_t(p, 2 * n - 1)
    return (
        m.m4 / p**3
        + 4.0 / p**2 * (S2 - 1.0 / p) * m.m1 * m.m3
        + (T * T + 2.0 / p**2 - 3.0 / p**3) * m.m2**2
        + ((2 * T + 4.0 / p - 12.0 / p**2) * S2 + 12.0 / p**3 - 4.0 / p**2 - 2 * T * T)
        * m.m1**2
        * m.m2
        + (S2 * S2 + (8.0 / p**2 - 2 * T - 4.0 / p) * S2 + T * T - 6.0 / p**3 + 2.0 / p**2)
        * m.m1**4
    )


def var_pn(p: int, n: int, m: MomentTuple) -> float:
    """Var(p_n), transcribed as printed; identically 0 when m_k = m1^k."""
    S2 = abs_s_squared(p, n)
    T = kernel_t(p, 2 * n - 1)
    return (
        m.m4 / p**3
        + 4.0 / p**2 * (S2 - 1.0 / p) * m.m1 * m.m3
        + (T * T + 1.0 / p**2 - 3.0 / p**3) * m.m2**2
        + ((2 * T + 2.0 / p - 12.0 / p**2) * S2 + 12.0 / p**3 - 2.0 / p**2 - 2 * T * T)
        * m.m1**2
        * m.m2
        + ((8.0 / p**2 - 2 * T - 2.0 / p) * S2 + T * T - 6.0 / p**3 + 1.0 / p**2)
        * m.m1**4
    )


def expected_pN(p: int, N: int, m: MomentTuple) -> float:
    """E(p_N) = pi_N sigma^2 + m1^2 U_N; equals m2 at N = 0."""
    return pi_tail(p, N) * m.sigma2 + m.m1**2 * kernel_u(p, N)


def var_pN(p: int, N: int, m: MomentTuple) -> float:
    """Var(p_N), transcribed as printed; identically 0 when m_k = m1^k.

    At N = 0 it reduces to (m4 - m2^2)/p, the exact variance of the total
    probability p^-1 sum yhat_k^2.
    """
    piN = pi_tail(p, N)
    U = kernel_u(p, N)
    return (
        piN**2 * m.m4 / p
        + 4.0 / p * piN * (U - piN) * m.m1 * m.m3
        + piN * (2.0 - 3.0 * piN) / p * m.m2**2
        + 4.0 / p * (1.0 - 3.0 * piN) * (U - piN) * m.m1**2 * m.m2
        + 2.0 / p * (2.0 * U * (2.0 * piN - 1.0) + piN * (1.0 - 3.0 * piN)) * m.m1**4
    )


def expected_ptot(m: MomentTuple) -> float:
    """E(p_tot) = m2, every period."""
    return m.m2


def expected_moment_observable(p: int, r: float, m: MomentTuple) -> LeadingOrder:
    """Leading order of E<tilde(n)^r>: (p/2)^r m2/(r+1), error O(p^(r-1)).

    The order term is a tag, never added numerically.
    """
    if r < 0:
        raise ValueError("moment order must be nonnegative")
    value = (p / 2.0) ** r * m.m2 / (r + 1.0)
    return LeadingOrder(value, f"O(p^{r - 1:g})")


# -- continuous spectrum (p = infinity) ------------------------------------

def continuous_expected_pn(n: int, m: MomentTuple) -> float:
    """E(p_n) = m1^2 / (pi^2 (n-1/2)^2); the sigma^2/p floor has escaped."""
    return m.m1**2 / (np.pi * (n - 0.5)) ** 2


def continuous_expected_ptot(m: MomentTuple) -> float:
    return m.m2


def near_window_kernel(N: int) -> float:
    """sum over |n| <= N of 1/(pi^2 (n-1/2)^2); tends to 1 as N grows."""
    if N < 0:
        raise ValueError("N must be nonnegative")
    n = np.arange(-N, N + 1, dtype=float)
    return float((1.0 / (np.pi * (n - 0.5)) ** 2).sum())


def continuous_expected_pN(N: int, m: MomentTuple) -> float:
    """Exact p -> infinity limit: m2 - m1^2 * near-window kernel mass.

    The unfolded sum of continuous E(p_n) is only m1^2; the remaining
    m2 - m1^2 sits in the tail for every N (mass escape), so E(p_N) tends to
    sigma^2 from above as N grows.
    """
    return m.m2 - m.m1**2 * near_window_kernel(N)


def finite_cell_expected_pn(cells: int, n: int, m: MomentTuple) -> float:
    """Finite-M prediction with cells playing the role of residue classes."""
    return expected_pn(cells, ((n - 1) % cells) + 1, m)


def finite_cell_var_pn(cells: int, n: int, m: MomentTuple) -> float:
    return var_pn(cells, ((n - 1) % cells) + 1, m)


def finite_cell_expected_pN(cells: int, N: int, m: MomentTuple) -> float:
    return expected_pN(cells, N, m)


def finite_cell_var_pN(cells: int, N: int, m: MomentTuple) -> float:
    return var_pN(cells, N, m)


def continuous_expectations(
    m: MomentTuple,
    n: int | None = None,
    N: int | None = None,
    cells: int | None = None,
) -> dict:
    """Continuum expectations for one index, with the finite-cell prediction
    (cells as classes) alongside when a cell count is given."""
    if (n is None) == (N is None):
        raise ValueError("exactly one of n and N must be given")
    out: dict = {"p_tot": continuous_expected_ptot(m)}
    if n is not None:
        out["p_n"] = continuous_expected_pn(n, m)
        if cells is not None:
            out["p_n_cells"] = finite_cell_expected_pn(cells, n, m)
            out["var_p_n_cells"] = finite_cell_var_pn(cells, n, m)
    else:
        out["p_N"] = continuous_expected_pN(N, m)
        if cells is not None:
            out["p_N_cells"] = finite_cell_expected_pN(cells, N, m)
            out["var_p_N_cells"] = finite_cell_var_pN(cells, N, m)
    return out


def lemma_unit_sum(p: int) -> float:
    """sum over one period of |S_n|^2; equals 1 exactly."""
    n = np.arange(1, p + 1)
    return float(math.fsum(abs_s_squared(p, n)))
