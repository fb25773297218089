"""Balls-into-bins oracles and batch statistics.

The exact maximum-load distribution is computed in rational arithmetic
from truncated exponential polynomials: the number of ways to place n
labeled balls into k labeled bins with every load <= t is
n! * [x^n] (sum_{j<=t} x^j/j!)^k.  Beyond the exact range a seeded
Monte Carlo estimate takes over.
"""

from __future__ import annotations

import math
import random
import statistics
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .scheduler import TrialRecord

EXACT_MAX_N = 12
EXACT_MAX_K = 128


class TooLarge(ValueError):
    """Parameters outside the exact oracle's feasibility bounds."""


class AllTimedOut(ValueError):
    """Every record of the batch timed out; nothing to estimate."""


@dataclass(frozen=True)
class MaxLoadDistribution:
    n: int
    k: int
    pmf: Dict[int, Fraction]

    def p_max_at_most(self, t: int) -> Fraction:
        return sum((p for v, p in self.pmf.items() if v <= t), Fraction(0))

    def p_max_greater_than(self, t: int) -> Fraction:
        return 1 - self.p_max_at_most(t)


def _poly_mul(a: List[Fraction], b: List[Fraction], limit: int) -> List[Fraction]:
    out = [Fraction(0)] * (limit + 1)
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            if i + j > limit:
                break
            out[i + j] += ai * bj
    return out


def _ways_max_load_at_most(n: int, k: int, t: int) -> int:
    """Placements of n labeled balls into k labeled bins, all loads <= t."""
    base = [Fraction(1, math.factorial(j)) for j in range(min(t, n) + 1)]
    power = [Fraction(1)]
    for _ in range(k):
        power = _poly_mul(power, base, n)
    coeff = power[n] if n < len(power) else Fraction(0)
    ways = coeff * math.factorial(n)
    assert ways.denominator == 1
    return ways.numerator


def exact_max_load(n: int, k: int) -> MaxLoadDistribution:
    """Exact pmf of the maximum load of n balls dropped uniformly into k bins."""
    if n < 1 or k < 1:
        raise ValueError("n and k must be >= 1")
    if n > EXACT_MAX_N or k > EXACT_MAX_K:
        raise TooLarge(f"exact oracle supports n <= {EXACT_MAX_N}, k <= {EXACT_MAX_K}")
    total = k ** n
    pmf: Dict[int, Fraction] = {}
    prev = 0
    for t in range(math.ceil(n / k), n + 1):
        ways = _ways_max_load_at_most(n, k, t)
        if ways != prev:
            pmf[t] = Fraction(ways - prev, total)
        prev = ways
    assert sum(pmf.values(), Fraction(0)) == 1
    return MaxLoadDistribution(n, k, pmf)


def monte_carlo_max_load(n: int, k: int, samples: int,
                         seed: int = 0) -> Dict[int, float]:
    """Empirical max-load pmf over `samples` independent placements."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = random.Random(seed)
    hist: Dict[int, int] = {}
    for _ in range(samples):
        loads: Dict[int, int] = {}
        worst = 0
        for _ in range(n):
            b = rng.randrange(k)
            loads[b] = loads.get(b, 0) + 1
            if loads[b] > worst:
                worst = loads[b]
        hist[worst] = hist.get(worst, 0) + 1
    return {v: c / samples for v, c in sorted(hist.items())}


# ---------------------------------------------------------------------------
# lemma regime checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LemmaCheck:
    lemma: str
    applicable: bool
    method: str                 # "exact", "monte-carlo" or "skipped"
    probability: Optional[float]
    bound: Optional[float]
    passed: Optional[bool]
    detail: str = ""


def _p_max_gt(n: int, k: int, t: int, samples: int, seed: int,
              ) -> Tuple[float, str, Optional[Fraction]]:
    if n <= EXACT_MAX_N and k <= EXACT_MAX_K:
        p = exact_max_load(n, k).p_max_greater_than(t)
        return float(p), "exact", p
    pmf = monte_carlo_max_load(n, k, samples, seed)
    return sum(p for v, p in pmf.items() if v > t), "monte-carlo", None


def check_lemma_bounds(n: int, k: int, samples: int = 100_000,
                       seed: int = 0) -> List[LemmaCheck]:
    """Check the balls-into-bins regimes applicable to (n, k).

    Three regimes: max load 1 with probability >= 1/2 when k >= 2n^2;
    max load 1 with probability >= 1 - 1/(2 k^(1/3)) when k > 8n^3; and
    the multiplicity-division regime, max load 1 or below n/x with
    probability >= 1/2 where x is the largest integer with 16 x^4 <= k.
    """
    if n < 1 or k < 1:
        raise ValueError("n and k must be >= 1")
    checks: List[LemmaCheck] = []

    if k >= 2 * n * n:
        p, method, _ = _p_max_gt(n, k, 1, samples, seed)
        checks.append(LemmaCheck("max-load-1-if-k>=2n^2", True, method,
                                 p, 0.5, p <= 0.5))
    else:
        checks.append(LemmaCheck("max-load-1-if-k>=2n^2", False, "skipped",
                                 None, None, None, f"needs k >= {2 * n * n}"))

    if k > 8 * n ** 3:
        bound = 1 / (2 * k ** (1 / 3))
        p, method, _ = _p_max_gt(n, k, 1, samples, seed + 1)
        checks.append(LemmaCheck("max-load-1-if-k>8n^3", True, method,
                                 p, bound, p <= bound))
    else:
        checks.append(LemmaCheck("max-load-1-if-k>8n^3", False, "skipped",
                                 None, None, None, f"needs k > {8 * n ** 3}"))

    x = int((k / 16) ** 0.25)
    while 16 * (x + 1) ** 4 <= k:
        x += 1
    if x >= 2:
        # success: max load is 1, or strictly below n / x
        threshold = max(1, math.ceil(n / x) - 1)
        p, method, _ = _p_max_gt(n, k, threshold, samples, seed + 2)
        checks.append(LemmaCheck("division-by-x-if-k>=16x^4", True, method,
                                 p, 0.5, p <= 0.5, f"x={x}"))
    else:
        checks.append(LemmaCheck("division-by-x-if-k>=16x^4", False, "skipped",
                                 None, None, None, "needs 16*2^4 <= k"))
    return checks


def chernoff_tail_bound(mean: float, delta: float) -> float:
    """Multiplicative Chernoff bound on P(X > mean*(1+delta)), X binomial."""
    if mean < 0 or delta <= 0:
        raise ValueError("need mean >= 0 and delta > 0")
    return math.exp(-(delta * delta * mean) / (2 + delta))


def chernoff_reference(n: int, k: int, xi: float) -> float:
    """Upper bound on P(Binomial(n, 1/k) > (n/k)(1 + k^xi)), with delta = k^xi."""
    if n < 1 or k < 2:
        raise ValueError("need n >= 1 and k >= 2")
    if not 0 < xi < 1:
        raise ValueError("xi must be in (0, 1)")
    return chernoff_tail_bound(n / k, k ** xi)


# ---------------------------------------------------------------------------
# batch estimation and scaling fits
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BatchEstimate:
    trials: int
    timed_out: int
    mean_rounds: float
    mean_bits: float
    ci95_rounds: Tuple[float, float]
    ci95_bits: Tuple[float, float]
    max_per_robot_bits: int


def _ci95(values: Sequence[float]) -> Tuple[float, float]:
    mean = statistics.fmean(values)
    if len(values) < 2:
        return (mean, mean)
    half = 1.96 * statistics.stdev(values) / math.sqrt(len(values))
    return (mean - half, mean + half)


def estimate(records: Sequence[TrialRecord]) -> BatchEstimate:
    """Sample means with normal-approximation 95% confidence intervals.

    Timed-out records are excluded from the averages and reported as a
    count.  The normal approximation is coarse below ~30 trials.
    """
    good = [r for r in records if not r.timed_out]
    timed_out = len(records) - len(good)
    if not good:
        raise AllTimedOut(f"all {len(records)} records timed out")
    rounds = [float(r.rounds_used) for r in good]
    bits = [float(r.total_bits) for r in good]
    return BatchEstimate(
        trials=len(records),
        timed_out=timed_out,
        mean_rounds=statistics.fmean(rounds),
        mean_bits=statistics.fmean(bits),
        ci95_rounds=_ci95(rounds),
        ci95_bits=_ci95(bits),
        max_per_robot_bits=max(r.per_robot_max_bits for r in good),
    )


def _log2(x: float) -> float:
    return math.log2(max(x, 2.0))


def _log_star(n: float) -> float:
    count = 0
    while n > 1:
        n = math.log2(n)
        count += 1
    return float(max(count, 1))


SCALING_MODELS: Dict[str, Callable[[float], float]] = {
    "constant": lambda n: 1.0,
    "loglog": lambda n: max(_log2(_log2(n)), 1.0),
    "logstar": _log_star,
    "log-loglog": lambda n: _log2(n) * max(_log2(_log2(n)), 1.0),
    "nlogn": lambda n: n * _log2(n),
}


@dataclass(frozen=True)
class ScalingFit:
    constants: Dict[str, float]
    residuals: Dict[str, float]
    best_model: str


def scaling_fit(series: Sequence[Tuple[int, float]]) -> ScalingFit:
    """Least-squares constant per model c*g(n), with relative residuals.

    Report-only: asymptotics at desk scale are indicative, never a hard
    assertion.
    """
    if len({n for n, _ in series}) < 4:
        raise ValueError("need at least 4 distinct n values")
    norm = math.sqrt(sum(y * y for _, y in series))
    constants: Dict[str, float] = {}
    residuals: Dict[str, float] = {}
    for name, g in SCALING_MODELS.items():
        gs = [g(float(n)) for n, _ in series]
        ys = [y for _, y in series]
        denom = sum(v * v for v in gs)
        c = sum(v * y for v, y in zip(gs, ys)) / denom if denom else 0.0
        resid = math.sqrt(sum((y - c * v) ** 2 for v, y in zip(gs, ys)))
        constants[name] = c
        residuals[name] = resid / norm if norm else resid
    best = min(residuals, key=residuals.get)
    return ScalingFit(constants=constants, residuals=residuals, best_model=best)
