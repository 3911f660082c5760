"""Hardy's Z-function in machine doubles and zero isolation on the critical line.

``Z(t) = exp(i theta(t)) zeta(1/2 + it)`` is real. Above ``RS_THRESHOLD`` it is
evaluated with the Riemann--Siegel main sum plus the correction terms
``C_0..C_4``; below, with Euler--Maclaurin summation of ``zeta(1/2 + it)``.

The correction terms are polynomials in ``q = p - 1/2`` (``p`` the fractional
part of ``sqrt(t/2pi)``) built from derivatives of

    Psi(q) = -cos(2 pi q^2 - 5 pi/8) / cos(2 pi q).

Their Taylor coefficients are obtained once by exact power-series division at
100 digits; ``Psi`` is entire, so the truncated series converges on
``|q| <= 1/2``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple

import mpmath
import numpy as np
from scipy.special import loggamma

log = logging.getLogger(__name__)

RS_THRESHOLD = 200.0
DEFAULT_CEILING = 1.0e6
FIRST_ZERO = 14.134725141734693790457251983562
TWO_PI = 2.0 * math.pi
_CHUNK = 1 << 15
_PSI_DEGREE = 64


# ---------------------------------------------------------------------------
# theta and the correction polynomials


def theta(t):
    """Riemann--Siegel theta. Stirling series above 10, complex log-gamma below."""
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    big = t >= 10.0
    tb = t[big]
    inv = 1.0 / tb
    inv2 = inv * inv
    out[big] = (
        0.5 * tb * np.log(tb / TWO_PI)
        - 0.5 * tb
        - math.pi / 8
        + inv * (1 / 48 + inv2 * (7 / 5760 + inv2 * (31 / 80640 + inv2 * (127 / 430080 + inv2 * 511 / 1216512))))
    )
    ts = t[~big]
    out[~big] = np.imag(loggamma(0.25 + 0.5j * ts)) - 0.5 * ts * math.log(math.pi)
    return out if out.ndim else float(out)


@lru_cache(maxsize=None)
def _correction_polys() -> Tuple[np.ndarray, ...]:
    """Coefficients (ascending powers of q) of ``C_0..C_4``."""
    n = _PSI_DEGREE + 14
    with mpmath.workdps(110):
        pi = mpmath.pi
        c, s = mpmath.cos(5 * pi / 8), mpmath.sin(5 * pi / 8)
        # cos(a - b) = cos a cos b + sin a sin b with a = 2 pi q^2, b = 5 pi / 8
        num = [mpmath.mpf(0)] * (n + 1)
        den = [mpmath.mpf(0)] * (n + 1)
        for j in range(0, n // 2 + 1):
            term = (2 * pi) ** j / mpmath.factorial(j)
            if 2 * j <= n:
                num[2 * j] += (c if j % 4 == 0 else (s if j % 4 == 1 else (-c if j % 4 == 2 else -s))) * term
        for j in range(0, n + 1, 2):
            den[j] = (-1) ** (j // 2) * (2 * pi) ** j / mpmath.factorial(j)
        psi = [mpmath.mpf(0)] * (n + 1)
        for m in range(n + 1):
            # den * psi = -num, solved term by term
            acc = num[m] + sum(den[j] * psi[m - j] for j in range(2, m + 1, 2))
            psi[m] = -acc / den[0]

        def deriv(series, order):
            out = list(series)
            for _ in range(order):
                out = [i * out[i] for i in range(1, len(out))]
            return out

        def combo(parts):
            size = _PSI_DEGREE + 1
            total = [mpmath.mpf(0)] * size
            for order, weight in parts:
                d = deriv(psi, order)
                for i in range(min(size, len(d))):
                    total[i] += weight * d[i]
            return np.array([float(x) for x in total])

        p2, p4, p6, p8 = pi**2, pi**4, pi**6, pi**8
        return (
            combo([(0, 1)]),
            combo([(3, -1 / (96 * p2))]),
            combo([(2, 1 / (64 * p2)), (6, 1 / (18432 * p4))]),
            combo([(1, -1 / (64 * p2)), (5, -1 / (3840 * p4)), (9, -1 / (5308416 * p6))]),
            combo([(0, 1 / (128 * p2)), (4, 19 / (24576 * p4)), (8, 11 / (5898240 * p6)), (12, 1 / (2038431744 * p8))]),
        )


def _polyval_ascending(coeffs: np.ndarray, x: np.ndarray) -> np.ndarray:
    acc = np.zeros_like(x)
    for c in coeffs[::-1]:
        acc = acc * x + c
    return acc


# ---------------------------------------------------------------------------
# Z(t)


def _rs_sorted(t: np.ndarray) -> np.ndarray:
    """Riemann--Siegel for ascending ``t >= RS_THRESHOLD``."""
    th = theta(t)
    a = np.sqrt(t / TWO_PI)
    N = np.floor(a).astype(np.int64)
    total = np.zeros_like(t)
    nmax = int(N[-1]) if len(N) else 0
    for n in range(1, nmax + 1):
        start = int(np.searchsorted(N, n, side="left"))
        seg = slice(start, None)
        total[seg] += np.cos(th[seg] - t[seg] * math.log(n)) / math.sqrt(n)
    total *= 2.0
    q = a - N - 0.5
    w = 1.0 / a  # (t / 2 pi)^(-1/2)
    polys = _correction_polys()
    corr = np.zeros_like(t)
    for j in range(len(polys) - 1, -1, -1):
        corr = corr * w + _polyval_ascending(polys[j], q)
    sign = np.where(N % 2 == 1, 1.0, -1.0)  # (-1)^(N-1)
    return total + sign * np.sqrt(w) * corr


def zeta_em_complex(s: complex, terms: Optional[int] = None) -> complex:
    """``zeta(s)`` for complex ``s`` by Euler--Maclaurin in double precision."""
    from .special import bernoulli_even

    t = abs(s.imag)
    N = terms if terms is not None else int(t / TWO_PI) + 24
    n = np.arange(1, N, dtype=float)
    total = np.sum(np.exp(-s * np.log(n)))
    Ns = complex(np.exp(-s * math.log(N)))
    total += Ns * N / (s - 1) + Ns / 2
    rising = s
    power = Ns / N
    fact = 2.0
    for j in range(1, 30):
        term = float(bernoulli_even(j)) / fact * rising * power
        total += term
        if abs(term) < 1e-17 * abs(total):
            break
        rising *= (s + 2 * j - 1) * (s + 2 * j)
        power /= N * N
        fact *= (2 * j + 1) * (2 * j + 2)
    return complex(total)


def hardy_Z_em(t: float) -> complex:
    """``exp(i theta(t)) zeta(1/2 + it)`` via Euler--Maclaurin (imaginary part ~ 0)."""
    return complex(np.exp(1j * theta(float(t))) * zeta_em_complex(complex(0.5, t)))


def hardy_Z(t):
    """Hardy's Z-function for scalar or array ``t >= 0``."""
    arr = np.asarray(t, dtype=float)
    scalar = arr.ndim == 0
    flat = np.atleast_1d(arr).ravel()
    if np.any(flat < 0):
        raise ValueError("t must be >= 0")
    out = np.empty_like(flat)
    small = flat < RS_THRESHOLD
    for i in np.flatnonzero(small):
        out[i] = hardy_Z_em(flat[i]).real
    idx = np.flatnonzero(~small)
    if len(idx):
        order = idx[np.argsort(flat[idx], kind="stable")]
        for a in range(0, len(order), _CHUNK):
            part = order[a : a + _CHUNK]
            out[part] = _rs_sorted(flat[part])
    return float(out[0]) if scalar else out.reshape(arr.shape)


# ---------------------------------------------------------------------------
# zero counting and isolation


def rvm_count(T):
    """Riemann--von Mangoldt smooth count ``(T/2pi)(log(T/2pi) - 1) + 7/8``."""
    x = np.asarray(T, dtype=float) / TWO_PI
    return x * (np.log(x) - 1.0) + 7.0 / 8.0


def zero_spacing(t):
    """Mean gap between zeros near ``t`` (capped at 2 for small ``t``)."""
    t = np.maximum(np.asarray(t, dtype=float), TWO_PI * math.e**0.5)
    return np.minimum(TWO_PI / np.log(t / TWO_PI), 2.0)


@dataclass(frozen=True)
class CriticalZero:
    ordinate: float
    index: int


@dataclass
class ZeroTable:
    ordinates: np.ndarray
    t_max: float
    density_ok: bool = True
    flagged: List[Tuple[float, float]] = field(default_factory=list)

    @property
    def count(self) -> int:
        return int(len(self.ordinates))

    def __len__(self) -> int:
        return self.count

    def zeros(self) -> List[CriticalZero]:
        return [CriticalZero(float(t), i + 1) for i, t in enumerate(self.ordinates)]

    def first_above(self, x: float) -> float:
        i = int(np.searchsorted(self.ordinates, x, side="right"))
        if i >= self.count:
            raise ValueError(f"no tabulated zero above {x}")
        return float(self.ordinates[i])

    def save(self, path) -> None:
        lines = [f"# zeros t_max={self.t_max:.9f} count={self.count}"]
        lines.extend(f"{t:.9f}" for t in self.ordinates)
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path) -> "ZeroTable":
        text = Path(path).read_text().splitlines()
        if not text or not text[0].startswith("# zeros"):
            raise ValueError(f"{path}: missing '# zeros' header")
        fields = dict(item.split("=", 1) for item in text[0][len("# zeros") :].split())
        try:
            t_max = float(fields["t_max"])
            count = int(fields["count"])
        except (KeyError, ValueError):
            raise ValueError(f"{path}: malformed header {text[0]!r}") from None
        values = []
        for lineno, line in enumerate(text[1:], start=2):
            line = line.strip()
            if not line:
                continue
            try:
                values.append(float(line))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: not a number: {line!r}") from None
        ords = np.array(values)
        if len(ords) != count:
            raise ValueError(f"{path}: header says {count} zeros, file has {len(ords)}")
        if np.any(np.diff(ords) <= 0):
            raise ValueError(f"{path}: ordinates must be strictly increasing")
        return cls(ords, t_max)


def _refine(f: Callable[[np.ndarray], np.ndarray], a: np.ndarray, b: np.ndarray, fa: np.ndarray, fb: np.ndarray, tol: float) -> np.ndarray:
    """Vectorised Illinois regula falsi on brackets with ``fa * fb < 0``."""
    a, b, fa, fb = a.copy(), b.copy(), fa.copy(), fb.copy()
    side = np.zeros(len(a), dtype=np.int8)
    active = np.ones(len(a), dtype=bool)
    for _ in range(100):
        idx = np.flatnonzero(active)
        if not len(idx):
            break
        ai, bi, fai, fbi = a[idx], b[idx], fa[idx], fb[idx]
        c = (ai * fbi - bi * fai) / (fbi - fai)
        bad = ~((c > np.minimum(ai, bi)) & (c < np.maximum(ai, bi)))
        c[bad] = 0.5 * (ai[bad] + bi[bad])
        fc = f(c)
        left = np.sign(fc) == np.sign(fai)
        # replace a when f(c) has the sign of f(a), otherwise b; halve the stale end
        na, nfa, nb, nfb = ai.copy(), fai.copy(), bi.copy(), fbi.copy()
        na[left], nfa[left] = c[left], fc[left]
        nb[~left], nfb[~left] = c[~left], fc[~left]
        s = side[idx]
        nfb[left & (s == 1)] *= 0.5
        nfa[~left & (s == -1)] *= 0.5
        side[idx] = np.where(left, 1, -1)
        a[idx], fa[idx], b[idx], fb[idx] = na, nfa, nb, nfb
        done = (np.abs(nb - na) < tol) | (fc == 0)
        a[idx[fc == 0]] = c[fc == 0]
        b[idx[fc == 0]] = c[fc == 0]
        active[idx[done]] = False
    return 0.5 * (a + b)


def _grid(t0: float, t1: float, grid_factor: float) -> np.ndarray:
    pts = [t0]
    t = t0
    # piecewise-constant spacing over short blocks keeps this vectorisable
    while t < t1:
        h = float(grid_factor * zero_spacing(t))
        n = max(1, int(min(t1 - t, 50.0) / h))
        block = t + h * np.arange(1, n + 1)
        pts.append(block)
        t = float(block[-1])
    out = np.concatenate([np.atleast_1d(p) for p in pts])
    return out[out <= t1 + 1e-12] if out[-1] > t1 else out


def _dip_brackets(t: np.ndarray, z: np.ndarray) -> List[Tuple[float, float]]:
    """Brackets hiding inside same-sign cells where ``|Z|`` has a local minimum."""
    out = []
    az = np.abs(z)
    same = np.sign(z[:-2]) == np.sign(z[1:-1])
    same &= np.sign(z[1:-1]) == np.sign(z[2:])
    dips = np.flatnonzero(same & (az[1:-1] < az[:-2]) & (az[1:-1] < az[2:])) + 1
    for i in dips:
        lo, hi = t[i - 1], t[i + 1]
        # golden-section search for the minimum of |Z|
        g = (math.sqrt(5) - 1) / 2
        x1, x2 = hi - g * (hi - lo), lo + g * (hi - lo)
        f1, f2 = abs(hardy_Z(x1)), abs(hardy_Z(x2))
        s0 = math.copysign(1.0, z[i])
        found = None
        for _ in range(40):
            for x in (x1, x2):
                zx = hardy_Z(x)
                if math.copysign(1.0, zx) != s0:
                    found = x
                    break
            if found is not None or hi - lo < 1e-10:
                break
            if f1 < f2:
                hi, x2, f2 = x2, x1, f1
                x1 = hi - g * (hi - lo)
                f1 = abs(hardy_Z(x1))
            else:
                lo, x1, f1 = x1, x2, f2
                x2 = lo + g * (hi - lo)
                f2 = abs(hardy_Z(x2))
        if found is not None:
            out.append((float(t[i - 1]), found))
            out.append((found, float(t[i + 1])))
    return out


def _zeros_between(t0: float, t1: float, grid_factor: float) -> np.ndarray:
    t = _grid(t0, t1, grid_factor)
    z = hardy_Z(t)
    change = np.flatnonzero(np.sign(z[:-1]) * np.sign(z[1:]) < 0)
    a, b = t[change], t[change + 1]
    fa, fb = z[change], z[change + 1]
    exact = t[1:-1][z[1:-1] == 0]
    extra = _dip_brackets(t, z)
    if extra:
        ea = np.array([x for x, _ in extra])
        eb = np.array([y for _, y in extra])
        a, b = np.concatenate([a, ea]), np.concatenate([b, eb])
        fa, fb = np.concatenate([fa, hardy_Z(ea)]), np.concatenate([fb, hardy_Z(eb)])
    roots = _refine(hardy_Z, a, b, fa, fb, 1e-10) if len(a) else np.zeros(0)
    return np.unique(np.concatenate([roots, exact]))


def _dedupe(x: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    x = np.sort(x)
    if len(x) < 2:
        return x
    keep = np.concatenate([[True], np.diff(x) > tol])
    return x[keep]


def _fine_roots(lo: float, hi: float, points: int = 256) -> np.ndarray:
    t = np.linspace(lo, hi, points)
    z = hardy_Z(t)
    change = np.flatnonzero(np.sign(z[:-1]) * np.sign(z[1:]) < 0)
    if not len(change):
        return np.zeros(0)
    return _refine(hardy_Z, t[change], t[change + 1], z[change], z[change + 1], 1e-10)


def _repair_alternation(ords: np.ndarray, rounds: int = 3) -> np.ndarray:
    """Recover close pairs missed by the grid.

    Between consecutive simple zeros the sign of Z alternates, so two adjacent
    gaps whose midpoints share a sign bracket a missed pair. Both gaps are
    rescanned on a fine uniform grid.
    """
    for _ in range(rounds):
        if len(ords) < 3:
            return ords
        mid = 0.5 * (ords[:-1] + ords[1:])
        s = np.sign(hardy_Z(mid))
        bad = np.flatnonzero(s[1:] == s[:-1]) + 1
        if not len(bad):
            return ords
        gaps = sorted({g for b in bad for g in (b - 1, b)})
        extra = [_fine_roots(ords[g], ords[g + 1]) for g in gaps]
        new = _dedupe(np.concatenate([ords] + extra))
        if len(new) == len(ords):
            return ords
        ords = new
    return ords


def find_zeros(
    t_max: float,
    grid_factor: float = 0.25,
    t_min: float = 10.0,
    ceiling: float = DEFAULT_CEILING,
    window: float = 1000.0,
    tolerance: float = 2.0,
) -> ZeroTable:
    """All zeros with ``t_min < t <= t_max`` by sign changes of Z.

    The range is split into windows; each window's count is compared against the
    Riemann--von Mangoldt increment and rescanned at a quarter of the spacing when
    they differ by more than ``tolerance``. Windows that still disagree are
    flagged and the scan continues.
    """
    if t_max > ceiling:
        raise ValueError(f"t_max={t_max} exceeds the configured ceiling {ceiling}")
    if t_max <= t_min:
        raise ValueError("t_max must exceed t_min")
    if grid_factor <= 0:
        raise ValueError("grid_factor must be positive")
    edges = np.arange(t_min, t_max, window).tolist() + [t_max]
    found = []
    flagged = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        roots = _zeros_between(lo, hi, grid_factor)
        expected = float(rvm_count(hi) - rvm_count(max(lo, TWO_PI)))
        if lo <= t_min:
            expected = float(rvm_count(hi))
        if abs(len(roots) - expected) > tolerance:
            log.info("rescanning [%g, %g]: %d zeros, expected %.1f", lo, hi, len(roots), expected)
            roots = _dedupe(np.concatenate([roots, _zeros_between(lo, hi, grid_factor / 4)]))
            if abs(len(roots) - expected) > tolerance:
                log.warning("zero count in [%g, %g] is %d, expected %.1f", lo, hi, len(roots), expected)
                flagged.append((lo, hi))
        found.append(roots[(roots > lo) & (roots <= hi)])
    ords = _dedupe(np.concatenate(found)) if found else np.zeros(0)
    ords = _repair_alternation(ords)
    total_ok = abs(len(ords) - float(rvm_count(t_max))) <= tolerance
    return ZeroTable(ords, float(t_max), total_ok and not flagged, flagged)


def zeros_in_window(t0: float, t1: float, grid_factor: float = 0.25) -> np.ndarray:
    """Zeros in a short window at any height (no density bookkeeping)."""
    if t1 <= t0:
        raise ValueError("empty window")
    return _zeros_between(t0, t1, grid_factor)


def midpoint_alternation(table: ZeroTable) -> Tuple[float, np.ndarray]:
    """Fraction of gaps whose midpoint sign alternates with the previous gap's, and the exceptions."""
    t = table.ordinates
    if len(t) < 3:
        return 1.0, np.zeros(0, dtype=int)
    mid = 0.5 * (t[:-1] + t[1:])
    s = np.sign(hardy_Z(mid))
    bad = np.flatnonzero(s[1:] == s[:-1]) + 1
    return 1.0 - len(bad) / (len(s) - 1), bad
