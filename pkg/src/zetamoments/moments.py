"""Empirical moments of zeta on the critical line against the moment polynomials.

``Data_k(T)`` integrates ``Z(t)^(2k) = |zeta(1/2+it)|^(2k)`` gap by gap between
consecutive zeros; ``Conjecture_k(T)`` integrates ``P_k(log(t/2pi))`` in closed
form. Both start at the first zero ``T_0``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import gmpy2
import numpy as np
from gmpy2 import mpfr

from .critical_line import FIRST_ZERO, ZeroTable, hardy_Z
from .polynomial import MomentPolynomial
from .quadrature import tanh_sinh_batch

MAX_K = 13
_BATCH = 2048
_GAP_UMAX = 3.5
# Z is good to ~1e-9 absolute, so tighter gap tolerances only chase noise
GAP_RTOL = 1e-10
GAP_ATOL = 1e-12
CSV_HEADER = ("j", "T", "data", "conjecture", "rel_remainder", "running_avg")


@dataclass(frozen=True)
class MomentComparison:
    j: int
    T: float
    data: float
    conjecture: float
    rel_remainder: float
    running_avg: float


# ---------------------------------------------------------------------------
# data side


def _check_k(k: int) -> None:
    if not 1 <= k <= MAX_K:
        raise ValueError(f"k must be in 1..{MAX_K}, got {k}")


def _integrand(k: int):
    def f(t):
        return hardy_Z(t) ** (2 * k)

    return f


def gap_integrals(k: int, zeros: ZeroTable, rtol: float = GAP_RTOL) -> np.ndarray:
    """``int Z^(2k)`` over every gap ``[z_i, z_{i+1}]`` of the table."""
    _check_k(k)
    t = zeros.ordinates
    if len(t) < 2:
        return np.zeros(0)
    f = _integrand(k)
    out = np.empty(len(t) - 1)
    for s in range(0, len(t) - 1, _BATCH):
        e = min(s + _BATCH, len(t) - 1)
        out[s:e], _ = tanh_sinh_batch(f, t[s:e], t[s + 1 : e + 1], tol=GAP_ATOL, rtol=rtol, u_max=_GAP_UMAX)
    return out


def _partial(k: int, a: float, b: float, rtol: float) -> float:
    if b <= a:
        return 0.0
    val, _ = tanh_sinh_batch(_integrand(k), a, b, tol=GAP_ATOL, rtol=rtol, u_max=_GAP_UMAX)
    return float(val[0])


def data_moment(k: int, zeros: ZeroTable, T: float, rtol: float = GAP_RTOL, gaps: Optional[np.ndarray] = None) -> float:
    """``int_{T_0}^T |zeta(1/2+it)|^(2k) dt`` with ``T_0`` the table's first zero.

    ``gaps`` may carry precomputed :func:`gap_integrals` for repeated calls.
    """
    _check_k(k)
    if T > zeros.t_max:
        raise ValueError(f"T={T} lies beyond the zero table (t_max={zeros.t_max})")
    t = zeros.ordinates
    if not len(t) or T <= t[0]:
        return 0.0
    if gaps is None:
        gaps = gap_integrals(k, zeros, rtol)
    i = int(np.searchsorted(t, T, side="right")) - 1  # t[i] <= T
    return float(math.fsum(gaps[:i])) + _partial(k, float(t[i]), float(T), rtol)


# ---------------------------------------------------------------------------
# conjecture side


def _bits_for(n: int, L: float) -> int:
    # the closed form cancels down from n! * T to T * L^n
    return 128 + int(math.lgamma(n + 1) / math.log(2)) + int(n * math.log2(max(L, 2.0)))


def _antiderivative(n: int, t) -> mpfr:
    """``t * sum_j (-1)^(n-j) n!/j! L^j`` with ``L = log(t/2pi)``, so ``d/dt`` gives ``L^n``."""
    L = gmpy2.log(t / (2 * gmpy2.const_pi()))
    term = mpfr(1)  # n!/j! at j = n
    acc = mpfr(0)
    Lp = [mpfr(1)]
    for _ in range(n):
        Lp.append(Lp[-1] * L)
    for j in range(n, -1, -1):
        acc += term * Lp[j] if (n - j) % 2 == 0 else -term * Lp[j]
        term *= j if j else 1
    return t * acc


def log_integral(n: int, T, T0=FIRST_ZERO) -> mpfr:
    """``I_n(T) = int_{T_0}^T log(t/2pi)^n dt`` in closed form."""
    if n < 0:
        raise ValueError("n must be >= 0")
    bits = _bits_for(n, math.log(max(float(T), 7.0) / (2 * math.pi)))
    with gmpy2.context(gmpy2.get_context(), precision=max(bits, gmpy2.get_context().precision)):
        return _antiderivative(n, mpfr(T)) - _antiderivative(n, mpfr(T0))


def conjecture_terms(poly: MomentPolynomial, T, T0=FIRST_ZERO) -> List[mpfr]:
    """``c_r * I_{k^2-r}(T)`` for each available ``r``."""
    k2 = poly.degree
    return [mpfr(c) * log_integral(k2 - r, T, T0) for r, c in enumerate(poly.coefficients)]


def conjecture_moment(poly: MomentPolynomial, T, T0=FIRST_ZERO) -> mpfr:
    """``int_{T_0}^T P_k(log(t/2pi)) dt``; requires a complete polynomial."""
    if not poly.is_complete:
        raise ValueError(f"polynomial for k={poly.k} has {len(poly)} of {poly.degree + 1} coefficients")
    if float(T) <= float(T0):
        raise ValueError("T must exceed T_0")
    terms = conjecture_terms(poly, T, T0)
    with gmpy2.context(gmpy2.get_context(), precision=max(t.precision for t in terms)):
        return gmpy2.fsum(terms)


def dominant_term_index(poly: MomentPolynomial, T) -> int:
    """The ``r`` whose term ``c_r I_{k^2-r}(T)`` is largest in magnitude."""
    terms = conjecture_terms(poly, T)
    return max(range(len(terms)), key=lambda r: abs(terms[r]))


# ---------------------------------------------------------------------------
# comparison


def compare_moments(
    k: int,
    poly: MomentPolynomial,
    zeros: ZeroTable,
    grid_step: float,
    t_max: float,
    rtol: float = GAP_RTOL,
) -> List[MomentComparison]:
    """Relative remainders at ``T_j``, the first zero above ``j * grid_step``.

    The zero table must reach past ``T_J`` for the last grid point
    ``J = floor(t_max / grid_step)``.
    """
    _check_k(k)
    if poly.k != k:
        raise ValueError(f"polynomial is for k={poly.k}, not {k}")
    if grid_step <= 0:
        raise ValueError("grid_step must be positive")
    J = int(math.floor(t_max / grid_step))
    if J < 1:
        raise ValueError(f"grid has no points: t_max={t_max}, grid_step={grid_step}")
    if t_max > zeros.t_max:
        raise ValueError(f"t_max={t_max} exceeds zero table t_max={zeros.t_max}")
    t = zeros.ordinates
    idx = np.searchsorted(t, grid_step * np.arange(1, J + 1), side="right")
    if idx[-1] >= len(t):
        raise ValueError(
            f"zero table ends at {t[-1]:.3f}; it needs the first zero above {J * grid_step:g}, extend t_max slightly"
        )
    gaps = gap_integrals(k, zeros, rtol)
    # zeros are gap endpoints, so Data(T_j) is a prefix sum of whole gaps
    prefix = np.concatenate([[0.0], np.cumsum(gaps)])
    out = []
    sum_diff = 0.0
    sum_conj = 0.0
    for j, i in enumerate(idx, start=1):
        Tj = float(t[i])
        data = float(prefix[i])
        conj = float(conjecture_moment(poly, Tj, float(t[0])))
        sum_diff += data - conj
        sum_conj += conj
        out.append(MomentComparison(j, Tj, data, conj, (data - conj) / conj, sum_diff / sum_conj))
    return out


def deviation_stats(comparisons: Sequence[MomentComparison], burn_in: int) -> Tuple[float, float]:
    """Sample standard deviations of ``rel_remainder`` and ``running_avg`` for ``j > burn_in``."""
    if burn_in < 0:
        raise ValueError("burn_in must be >= 0")
    if len(comparisons) <= burn_in + 2:
        raise ValueError(f"need more than {burn_in + 2} grid points, got {len(comparisons)}")
    tail = [c for c in comparisons if c.j > burn_in]
    sharp = np.std([c.rel_remainder for c in tail], ddof=1)
    smooth = np.std([c.running_avg for c in tail], ddof=1)
    return float(sharp), float(smooth)


def write_comparison_csv(path, comparisons: Sequence[MomentComparison]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for c in comparisons:
            w.writerow([c.j] + [f"{x:.12g}" for x in (c.T, c.data, c.conjecture, c.rel_remainder, c.running_avg)])


def read_comparison_csv(path) -> List[MomentComparison]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise ValueError(f"{path}: expected header {','.join(CSV_HEADER)}")
    return [MomentComparison(int(r[0]), *map(float, r[1:])) for r in rows[1:]]
