"""Exact representation counts and the order-of-magnitude prediction.

r(n) counts ordered solutions of n = p + x_1^k + ... + x_s^k in primes p and
natural numbers x_j >= 1; the conjugate count R(N) totals solutions of
p = x_1^k + ... + x_s^k with p <= N prime.  Two independent routes:

  * count_direct enumerates the s-fold power sums outright and looks up the
    prime complement (no convolution algorithm involved);
  * count_range raises the power-indicator polynomial to the s-th power by
    repeated convolution and convolves with the prime indicator; every entry
    is an exact integer (verified float FFT with an integer-safe fallback).

The prediction compared against is

    series(n) * Gamma(1 + 1/k)^s / Gamma(s/k + 1) * n^(s/k) / log n,

whose Gamma factor is the standard circle-method heuristic; only the order of
magnitude is backed by theory, and reports label the constant as heuristic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .arith import sieve_primes
from .convolve import ConvStats, convolve_exact
from .errors import DomainError, ResourceError
from .series import singular_series_many

_DIRECT_BUDGET = 80_000_000  # tuple budget for the brute-force route


@dataclass(frozen=True)
class CountRow:
    n: int
    r: int
    prediction: float
    ratio: float
    series_value: float


@dataclass
class ConvolutionPlan:
    n_max: int
    k: int
    s: int
    method: str = "float_fft_verified"  # or "integer_safe", "direct"
    fft_size: int = 0
    stats: ConvStats = field(default_factory=ConvStats)

    def __post_init__(self) -> None:
        if self.fft_size == 0:
            need = (self.s + 1) * self.n_max + 1
            self.fft_size = 1 << (need - 1).bit_length()

    def conv_method(self) -> str:
        return {"float_fft_verified": "auto", "integer_safe": "integer_safe", "direct": "direct"}[self.method]


def _bucket(limit: int) -> int:
    return 1 << max(4, (limit - 1).bit_length())


@lru_cache(maxsize=32)
def _power_sums(k: int, s: int, bucket: int) -> np.ndarray:
    """Sorted s-fold sums x_1^k + ... + x_s^k <= bucket (ordered tuples kept)."""
    top = int(bucket ** (1.0 / k)) + 1
    while top**k > bucket:
        top -= 1
    powers = (np.arange(1, top + 1, dtype=np.int64)) ** k
    sums = powers
    for _ in range(s - 1):
        if len(sums) * len(powers) > _DIRECT_BUDGET:
            raise ResourceError(f"direct enumeration would exceed {_DIRECT_BUDGET} tuples")
        sums = (sums[:, None] + powers[None, :]).ravel()
        sums = sums[sums <= bucket]
    out = np.sort(sums)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=16)
def _prime_mask_cached(bucket: int) -> np.ndarray:
    mask = sieve_primes(bucket).is_prime_mask()
    mask.setflags(write=False)
    return mask


def count_direct(k: int, s: int, n: int) -> int:
    """Exhaustive count of n = p + (s-fold k-th power sum), ordered tuples.

    Enumerates every power-sum value with multiplicity and tests the prime
    complement; independent of the convolution route.
    """
    if k < 1 or s < 1:
        raise DomainError(f"need k >= 1 and s >= 1, got k={k}, s={s}")
    if n < s + 2:  # smallest representable value is 2 + s
        return 0
    bucket = _bucket(n)
    sums = _power_sums(k, s, bucket)
    sums = sums[: int(np.searchsorted(sums, n - 2, side="right"))]
    if len(sums) == 0:
        return 0
    mask = _prime_mask_cached(bucket)
    return int(mask[n - sums].sum())


def count_direct_weighted(k: int, s: int, n: int, log_weights: np.ndarray) -> float:
    """Like count_direct but summing log p over solutions (quadrature oracle)."""
    if n < s + 2:
        return 0.0
    bucket = _bucket(n)
    sums = _power_sums(k, s, bucket)
    sums = sums[: int(np.searchsorted(sums, n - 2, side="right"))]
    if len(sums) == 0:
        return 0.0
    return float(log_weights[n - sums].sum())


def _power_indicator(k: int, n_max: int) -> np.ndarray:
    top = int(n_max ** (1.0 / k)) + 1
    while top**k > n_max:
        top -= 1
    ind = np.zeros(n_max + 1, dtype=np.int64)
    ind[(np.arange(1, top + 1, dtype=np.int64)) ** k] = 1
    return ind


def _indicator_power(ind: np.ndarray, s: int, n_max: int, plan: ConvolutionPlan) -> np.ndarray:
    """ind^s as a generating function, truncated at n_max (exact: summands are >= 1)."""
    result: np.ndarray | None = None
    square = ind
    e = s
    method = plan.conv_method()
    while e > 0:
        if e & 1:
            result = square if result is None else convolve_exact(result, square, n_max + 1, method, plan.stats)
        e >>= 1
        if e:
            square = convolve_exact(square, square, n_max + 1, method, plan.stats)
    assert result is not None
    return result


def count_range(k: int, s: int, n_max: int, plan: ConvolutionPlan | None = None) -> np.ndarray:
    """Exact r(n) for all n <= n_max, via generating-function convolution."""
    if k < 1 or s < 1 or n_max < 2:
        raise DomainError(f"need k, s >= 1 and n_max >= 2, got k={k}, s={s}, n_max={n_max}")
    plan = plan or ConvolutionPlan(n_max=n_max, k=k, s=s)
    power_part = _indicator_power(_power_indicator(k, n_max), s, n_max, plan)
    prime_ind = sieve_primes(n_max).is_prime_mask().astype(np.int64)
    return convolve_exact(power_part, prime_ind, n_max + 1, plan.conv_method(), plan.stats)


def count_conjugate(k: int, s: int, N: int, plan: ConvolutionPlan | None = None) -> int:
    """Solutions of p = x_1^k + ... + x_s^k with p <= N prime (ordered tuples)."""
    if N < 2:
        return 0
    plan = plan or ConvolutionPlan(n_max=N, k=k, s=s)
    power_part = _indicator_power(_power_indicator(k, N), s, N, plan)
    mask = sieve_primes(N).is_prime_mask()
    return int(power_part[mask].sum())


def hl_prediction(k: int, s: int, n: int, series_value: float) -> float:
    """series(n) * Gamma(1+1/k)^s / Gamma(s/k+1) * n^(s/k) / log n.

    The Gamma factor is the standard heuristic constant (labelled as such in
    reports); only the order of magnitude is backed by theory.
    """
    if n < 3:
        raise DomainError(f"prediction needs n >= 3, got {n}")
    gamma_factor = math.gamma(1.0 + 1.0 / k) ** s / math.gamma(s / k + 1.0)
    return series_value * gamma_factor * n ** (s / k) / math.log(n)


@dataclass(frozen=True)
class CompareReport:
    k: int
    s: int
    n_lo: int
    n_hi: int
    stride: int
    prime_cutoff: int
    rows: tuple[CountRow, ...]
    min_ratio: float
    mean_ratio: float
    zero_count: int
    constant_note: str = "prediction constant is heuristic (circle-method shape); only the order is backed by theory"

    def to_csv_rows(self) -> list[list]:
        return [[row.n, row.r, row.prediction, row.ratio, row.series_value] for row in self.rows]


def compare_report(
    k: int,
    s: int,
    n_lo: int,
    n_hi: int,
    stride: int = 1,
    prime_cutoff: int = 1000,
    plan: ConvolutionPlan | None = None,
) -> CompareReport:
    """Exact counts against the prediction over a range, with aggregates."""
    if not 3 <= n_lo <= n_hi:
        raise DomainError(f"need 3 <= n_lo <= n_hi, got [{n_lo}, {n_hi}]")
    if stride < 1:
        raise DomainError(f"stride must be >= 1, got {stride}")
    counts = count_range(k, s, n_hi, plan)
    ns = np.arange(n_lo, n_hi + 1, stride, dtype=np.int64)
    series_vals = singular_series_many(ns, k, s, prime_cutoff)
    gamma_factor = math.gamma(1.0 + 1.0 / k) ** s / math.gamma(s / k + 1.0)
    preds = series_vals * gamma_factor * ns ** (s / k) / np.log(ns)
    rows = []
    ratios = []
    zero_count = 0
    for n, series_val, pred in zip(ns.tolist(), series_vals.tolist(), preds.tolist()):
        r = int(counts[n])
        ratio = r / pred if pred > 0 else float("nan")
        rows.append(CountRow(n=n, r=r, prediction=pred, ratio=ratio, series_value=series_val))
        ratios.append(ratio)
        if r == 0:
            zero_count += 1
    arr = np.asarray(ratios)
    return CompareReport(
        k=k, s=s, n_lo=n_lo, n_hi=n_hi, stride=stride, prime_cutoff=prime_cutoff,
        rows=tuple(rows),
        min_ratio=float(arr.min()), mean_ratio=float(arr.mean()), zero_count=zero_count,
    )
