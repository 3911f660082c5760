"""Coefficients c_r(k) from the shifted combinatorial sum.

For each sigma in Xi the term

    H_r = S_sigma^(k^2 - r) * A_k(sigma shifts) * prod_{i,j} zeta(1 + m(i,j) delta)

has a pole of order ``r`` in ``delta``; the poles cancel across Xi and

    c_r = sum_sigma H_r / (2^(k^2 - r) (k^2 - r)!)

up to an ``O(delta)`` remainder that is dropped. Everything except the power
of ``S_sigma`` is shared across ``r``.

The Euler product is accumulated prime by prime into one running product per
sigma. Each accumulator is multiplied by its local factors in increasing
prime order no matter how sigma is split between workers, so the result is
bit-identical for any worker count. Sums over sigma use a fixed binary tree
in lexicographic order.
"""

from __future__ import annotations

import base64
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import gmpy2
from gmpy2 import mpfr

from .combinatorics import HalfPermutation, difference_table, enumerate_xi, xi_size
from .euler_product import (
    LocalFactorTables,
    PrimePowerTable,
    SigmaLayout,
    TauTable,
    build_accelerant_zetas,
    count_accelerant_multiplicities,
    local_factor_from_tables,
    tail_exponents,
)
from .mpcontext import RunConfig, bits_for_digits, precision
from .polynomial import MomentPolynomial
from .primes import iter_prime_segments, prev_prime_below
from .special import ZetaCache

log = logging.getLogger(__name__)

THREADS_ENV = "ZETAMOMENTS_THREADS"
DEFAULT_MEMORY_BUDGET = 2 * 1024**3
DEFAULT_CHUNK = 4096  # primes per work unit / checkpoint


class PrecisionAlarm(ArithmeticError):
    """Cancellation in the sum over Xi used up the working precision budget."""


class MemoryBudgetError(MemoryError):
    pass


def default_workers() -> int:
    value = os.environ.get(THREADS_ENV)
    if value:
        try:
            return max(1, int(value))
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be an integer, got {value!r}") from None
    return 1


def memory_estimate(config: RunConfig) -> int:
    """Bytes for the per-sigma accumulators and workspaces (order C(2k,k) k^2 Digits bits)."""
    per_value = config.bits // 8 + 64
    return xi_size(config.k) * (config.k**2 + 4) * per_value


def check_memory(config: RunConfig, budget: int = DEFAULT_MEMORY_BUDGET) -> None:
    need = memory_estimate(config)
    if need > budget:
        raise MemoryBudgetError(
            f"k={config.k} needs about {need / 2**30:.1f} GiB of working storage (budget {budget / 2**30:.1f} GiB)"
        )


def tree_sum(values: Sequence) -> object:
    """Pairwise sum with a fixed shape determined only by ``len(values)``."""
    if not values:
        return mpfr(0)
    level = list(values)
    while len(level) > 1:
        nxt = [level[i] + level[i + 1] for i in range(0, len(level) - 1, 2)]
        if len(level) % 2:
            nxt.append(level[-1])
        level = nxt
    return level[0]


# ---------------------------------------------------------------------------
# prime pass


def _advance(bits: int, k: int, digits: int, M: int, layouts: Sequence[SigmaLayout], accs: List, primes: Sequence[int]):
    with precision(bits):
        delta = mpfr(1) / mpfr(10) ** digits
        accs = list(accs)
        for p in primes:
            tables = LocalFactorTables.build(k, PrimePowerTable.build(int(p), delta, M))
            for i, layout in enumerate(layouts):
                accs[i] = accs[i] * local_factor_from_tables(layout, tables)
        return accs


def _iter_chunks(start_after: int, P: int, stops: Sequence[int], size: int) -> Iterator[List[int]]:
    """Prime chunks in ``(start_after, P]``; every value in ``stops`` ends a chunk."""
    stops = sorted(s for s in stops if start_after < s < P)
    buf: List[int] = []
    for seg in iter_prime_segments(start_after + 1, P):
        for p in seg.tolist():
            buf.append(p)
            if len(buf) >= size or (stops and p == stops[0]):
                yield buf
                buf = []
                while stops and stops[0] <= p:
                    stops.pop(0)
    if buf:
        yield buf


def _encode(x) -> str:
    return base64.b64encode(gmpy2.to_binary(x)).decode("ascii")


def _decode(s: str):
    return gmpy2.from_binary(base64.b64decode(s))


@dataclass
class ProductState:
    """Running per-sigma products and tau partials after ``last_prime``."""

    last_prime: int
    accs: List
    tau: TauTable
    snapshots: Dict[int, Tuple[List, Dict]]

    def to_json(self, config: RunConfig) -> str:
        return json.dumps(
            {
                "config": config.as_dict(),
                "last_prime": self.last_prime,
                "accs": [_encode(a) for a in self.accs],
                "tau_keys": [list(key) for key in self.tau.keys],
                "tau": [_encode(self.tau.partial[key]) for key in self.tau.keys],
                "snapshots": {
                    str(P): {
                        "accs": [_encode(a) for a in accs],
                        "tau": [_encode(tau[key]) for key in self.tau.keys],
                    }
                    for P, (accs, tau) in self.snapshots.items()
                },
            }
        )

    @classmethod
    def from_json(cls, text: str, config: RunConfig) -> "ProductState":
        data = json.loads(text)
        if data["config"] != config.as_dict():
            raise ValueError("checkpoint was written for a different run configuration")
        keys = tuple(tuple(key) for key in data["tau_keys"])
        tau = TauTable(keys, {key: _decode(v) for key, v in zip(keys, data["tau"])}, data["last_prime"])
        snaps = {}
        for P, snap in data["snapshots"].items():
            snaps[int(P)] = (
                [_decode(a) for a in snap["accs"]],
                {key: _decode(v) for key, v in zip(keys, snap["tau"])},
            )
        return cls(data["last_prime"], [_decode(a) for a in data["accs"]], tau, snaps)


def _write_atomic(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def run_prime_pass(
    config: RunConfig,
    sigmas: Sequence[HalfPermutation],
    tau_keys: Sequence[Tuple[int, int]],
    snapshot_at: Sequence[int] = (),
    workers: Optional[int] = None,
    checkpoint: Optional[Path] = None,
    resume: bool = False,
    chunk_size: int = DEFAULT_CHUNK,
    progress: Optional[Callable[[int], None]] = None,
) -> ProductState:
    """Multiply every sigma's local factors and every tau factor for ``p <= P``."""
    k, P = config.k, config.truncation_prime
    workers = default_workers() if workers is None else max(1, int(workers))
    layouts = [SigmaLayout.of(s) for s in sigmas]
    M = max([2 * k] + [abs(m) for _, m in tau_keys])
    with config.context():
        state = None
        if resume and checkpoint is not None and Path(checkpoint).exists():
            state = ProductState.from_json(Path(checkpoint).read_text(), config)
            log.info("resuming after p=%d", state.last_prime)
        if state is None:
            state = ProductState(1, [mpfr(1) for _ in sigmas], TauTable.start(tau_keys), {})
        for S in snapshot_at:
            if S < 2 and S not in state.snapshots:
                state.snapshots[S] = (list(state.accs), dict(state.tau.partial))
        blocks = _split(len(sigmas), workers)
        pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 and len(blocks) > 1 else None
        try:
            delta = config.delta
            for chunk in _iter_chunks(state.last_prime, P, snapshot_at, chunk_size):
                if pool is None:
                    state.accs = _advance(config.bits, k, config.digits, M, layouts, state.accs, chunk)
                else:
                    futures = [
                        pool.submit(_advance, config.bits, k, config.digits, M, layouts[a:b], state.accs[a:b], chunk)
                        for a, b in blocks
                    ]
                    state.accs = [x for f in futures for x in f.result()]
                if state.tau.keys:
                    for p in chunk:
                        state.tau.update(PrimePowerTable.build(p, delta, M))
                state.last_prime = chunk[-1]
                state.tau.last_prime = chunk[-1]
                if state.last_prime in snapshot_at:
                    state.snapshots[state.last_prime] = (list(state.accs), dict(state.tau.partial))
                if checkpoint is not None:
                    _write_atomic(Path(checkpoint), state.to_json(config))
                if progress is not None:
                    progress(state.last_prime)
        finally:
            if pool is not None:
                pool.shutdown()
    return state


def _split(n: int, parts: int) -> List[Tuple[int, int]]:
    parts = max(1, min(parts, n))
    base, extra = divmod(n, parts)
    out, start = [], 0
    for i in range(parts):
        stop = start + base + (1 if i < extra else 0)
        out.append((start, stop))
        start = stop
    return out


# ---------------------------------------------------------------------------
# terms and coefficients


@dataclass
class TermWorkspace:
    """Everything in H_r for one sigma except the power of ``S_sigma``."""

    sigma: HalfPermutation
    A: object
    zeta_product: object
    S: object

    @property
    def G(self):
        return self.A * self.zeta_product


def build_workspace(sigma: HalfPermutation, A, zetas: ZetaCache, delta) -> TermWorkspace:
    prod = mpfr(1)
    for m in difference_table(sigma).m.ravel().tolist():
        prod *= zetas[(int(m), 1)]
    return TermWorkspace(sigma, A, prod, sigma.s_index * delta)


def evaluate_H_r_term(sigma: HalfPermutation, r: int, ws: TermWorkspace):
    k2 = sigma.k**2
    if not 0 <= r <= k2:
        raise ValueError(f"r must lie in [0, {k2}]")
    if ws.sigma != sigma:
        raise ValueError("workspace belongs to a different sigma")
    return ws.S ** (k2 - r) * ws.G


def coefficient_zeta_cache(k: int, delta) -> ZetaCache:
    return ZetaCache.build(delta, [(m, 1) for m in range(-(2 * k - 1), 2 * k) if m])


@dataclass
class CoefficientRun:
    polynomial: MomentPolynomial
    cancellation_digits: List[float]
    snapshots: Dict[int, MomentPolynomial]


def _assemble(
    config: RunConfig,
    sigmas: Sequence[HalfPermutation],
    accs: Sequence,
    tau_partial: Dict,
    exps: Sequence[Dict],
    zeta1: ZetaCache,
    accel: ZetaCache,
    P: int,
    check_alarm: bool,
) -> Tuple[MomentPolynomial, List[float]]:
    k = config.k
    k2 = k * k
    delta = config.delta
    tau = {key: accel[(-key[1], key[0])] * v for key, v in tau_partial.items()}
    G = []
    S = []
    for sigma, acc, ex in zip(sigmas, accs, exps):
        A = acc
        for key, e in ex.items():
            A *= tau[key] ** e
        ws = build_workspace(sigma, A, zeta1, delta)
        G.append(ws.G)
        S.append(ws.S)
    coeffs, cancel = [], []
    for r in range(k2 + 1):
        n = k2 - r
        terms = [s**n * g for s, g in zip(S, G)]
        total = tree_sum(terms)
        biggest = max(abs(t) for t in terms)
        if total == 0:
            lost = math.inf
        else:
            lost = float(gmpy2.log10(biggest / abs(total)))
        cancel.append(lost)
        headroom = config.working_digits - config.digits - (k - 1) * config.digits
        if check_alarm and lost > headroom:
            raise PrecisionAlarm(
                f"r={r}: cancellation of {lost:.1f} digits exceeds the {headroom} digits available"
            )
        coeffs.append(total / (mpfr(2) ** n * math.factorial(n)))
    meta = dict(config.as_dict())
    meta["truncation_prime"] = P
    meta = {key: str(v) for key, v in meta.items()}
    return MomentPolynomial(k, coeffs, None, "computed", meta), cancel


def compute_coefficients(
    config: RunConfig,
    workers: Optional[int] = None,
    checkpoint: Optional[Path] = None,
    resume: bool = False,
    snapshot_at: Sequence[int] = (),
    memory_budget: int = DEFAULT_MEMORY_BUDGET,
    check_alarm: bool = True,
    chunk_size: int = DEFAULT_CHUNK,
    progress: Optional[Callable[[int], None]] = None,
) -> CoefficientRun:
    """All ``k^2 + 1`` coefficients for one configuration.

    ``snapshot_at`` lists smaller truncation primes whose coefficients are
    produced from the same pass (their products are prefixes of the full one).
    """
    check_memory(config, memory_budget)
    k = config.k
    sigmas = enumerate_xi(k)
    multisets = [count_accelerant_multiplicities(s) for s in sigmas] if k > 1 else []
    exps = [tail_exponents(ms, config.accelerant_degree) for ms in multisets] if k > 1 else [{} for _ in sigmas]
    keys = sorted({key for ex in exps for key in ex})
    state = run_prime_pass(
        config, sigmas, keys, snapshot_at, workers, checkpoint, resume, chunk_size, progress
    )
    with config.context():
        delta = config.delta
        zeta1 = coefficient_zeta_cache(k, delta)
        accel = build_accelerant_zetas(keys, delta)
        poly, cancel = _assemble(
            config, sigmas, state.accs, state.tau.partial, exps, zeta1, accel, config.truncation_prime, check_alarm
        )
        snaps = {}
        for S, (accs, tau_partial) in sorted(state.snapshots.items()):
            snaps[S], _ = _assemble(config, sigmas, accs, tau_partial, exps, zeta1, accel, S, False)
    return CoefficientRun(poly, cancel, snaps)


def matched_digits(a, b, cap: int) -> int:
    """Leading significant digits on which ``a`` and ``b`` agree, clipped to ``[0, cap]``."""
    a, b = mpfr(a), mpfr(b)
    if a == b:
        return cap
    if a == 0:
        return 0
    rel = abs((a - b) / a)
    return int(max(0, min(cap, math.floor(-float(gmpy2.log10(rel))))))


def companion_prime(P: int) -> int:
    """Largest prime below ``P/3``, or 1 (empty product) when there is none."""
    try:
        return prev_prime_below(P / 3)
    except ValueError:
        return 1


def stability_check(config: RunConfig, workers: Optional[int] = None, **kwargs) -> MomentPolynomial:
    """Coefficients at ``P`` with stable digits from a comparison against ``P' < P/3``."""
    P2 = companion_prime(config.truncation_prime)
    run = compute_coefficients(config, workers=workers, snapshot_at=(P2,), **kwargs)
    poly = run.polynomial
    other = run.snapshots[P2]
    with config.context():
        digits = [matched_digits(a, b, config.digits) for a, b in zip(poly.coefficients, other.coefficients)]
    out = poly.with_stable_digits(digits)
    out.metadata["companion_prime"] = str(P2)
    return out
