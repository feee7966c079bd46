"""Singular series: truncated q-sums, local factors, and the Euler product.

The truncated series is

    S(n, X) = sum_{q <= X} mu(q)/(q^s phi(q)) * sum_{(a,q)=1} S(q,a)^s e(-a n / q),

with S(q, a) the complete k-th power exponential sum.  The normalized inner
sum S_n(q) = q^{-s} sum_{(a,q)=1} S(q,a)^s e(-an/q) is multiplicative, so the
full series factors into local densities

    chi_p(n) = 1 - S_n(p)/(p - 1) = p^{1-s} M_p(n) / (p - 1),

where M_p(n) counts solutions of b + x_1^k + ... + x_s^k = n mod p with b
coprime to p.  chi_p always evaluates BOTH routes and insists they agree to
1e-9; this dual route is the module's central self-test.  The Euler product
over p <= cutoff is the primary evaluation (absolutely convergent for s >= 3,
sign-stable); the q-sum is the cross-check.  Factors are accumulated in
ascending p for bit-reproducibility.

For s in {1, 2} every result is computed but flagged: the convergence theory
backing the tail estimates starts at s = 3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .arith import ArithTables, arith_tables, gauss_sums_all, mp_count, sieve_primes
from .errors import DomainError, InternalConsistencyError

_DUAL_ROUTE_TOL = 1e-9


@dataclass(frozen=True)
class LocalFactorReport:
    """chi_p by two independent routes plus the raw ingredients."""

    p: int
    chi_via_snp: float
    chi_via_mp: float
    mp: int
    snp: complex  # imaginary part is a float-noise diagnostic

    def __post_init__(self) -> None:
        if abs(self.chi_via_snp - self.chi_via_mp) >= _DUAL_ROUTE_TOL:
            raise InternalConsistencyError(
                f"local factor routes disagree at p={self.p}: "
                f"{self.chi_via_snp!r} (sum route) vs {self.chi_via_mp!r} (count route)"
            )
        # at least one residue class always survives, so chi >= p^-s > 0
        if self.mp < 1:
            raise InternalConsistencyError(f"empty congruence count at p={self.p}")

    @property
    def chi(self) -> float:
        return self.chi_via_mp


@dataclass
class SeriesReport:
    n: int
    k: int
    s: int
    prime_cutoff: int
    product_value: float
    tail_bound: float
    tail_constant: float
    partials: list[tuple[int, float]] = field(default_factory=list)
    converges: bool = True  # False marks the no-guarantee regime s in {1, 2}
    min_factor: float = 1.0

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "s": self.s,
            "cutoff": self.prime_cutoff,
            "product": self.product_value,
            "tail_bound": self.tail_bound,
            "tail_constant": self.tail_constant,
            "convergence_guaranteed": self.converges,
            "partials": [[x, v] for x, v in self.partials],
        }


def s_n_q(q: int, n: int, k: int, s: int) -> complex:
    """Normalized complete sum q^{-s} sum_{(a,q)=1} S(q,a)^s e(-an/q)."""
    if q < 1:
        raise DomainError(f"modulus must be positive, got {q}")
    if s < 1:
        raise DomainError(f"need s >= 1, got {s}")
    if q == 1:
        return 1 + 0j
    sums = gauss_sums_all(q, k)
    a = np.arange(q)
    coprime = np.gcd(a, q) == 1
    phases = np.exp((-2j * np.pi * (n % q) / q) * a)
    value = np.sum(np.where(coprime, sums**s * phases, 0.0))
    return complex(value / q**s)


def chi_p(p: int, n: int, k: int, s: int) -> LocalFactorReport:
    """Local density by both routes; raises if they disagree beyond 1e-9."""
    snp = s_n_q(p, n, k, s)
    chi_analytic = 1.0 - snp.real / (p - 1)
    m = mp_count(p, n, k, s)
    # p^{1-s} M / (p-1) evaluated with an exact integer denominator
    chi_count = m / (p ** (s - 1) * (p - 1))
    return LocalFactorReport(p=int(p), chi_via_snp=chi_analytic, chi_via_mp=chi_count, mp=m, snp=snp)


@dataclass(frozen=True)
class SeriesPartial:
    n: int
    k: int
    s: int
    x: int
    value: float
    imag_residue: float
    converges: bool


def series_partial(n: int, k: int, s: int, X: int, tables: ArithTables | None = None) -> SeriesPartial:
    """Truncated q-sum over q <= X; square-full q vanish through mu(q)."""
    if X < 1:
        raise DomainError(f"need X >= 1, got {X}")
    if s < 1:
        raise DomainError(f"need s >= 1, got {s}")
    tables = arith_tables(X) if tables is None or tables.limit < X else tables
    total = 1 + 0j  # q = 1 term
    for q in range(2, X + 1):
        mu = int(tables.mobius[q])
        if mu == 0:
            continue
        total += mu / int(tables.phi[q]) * s_n_q(q, n, k, s)
    return SeriesPartial(
        n=int(n), k=int(k), s=int(s), x=int(X),
        value=float(total.real), imag_residue=abs(float(total.imag)),
        converges=s >= 3,
    )


def measured_tail_constant(k: int, s: int, n: int, p_max: int = 1000) -> float:
    """max over p <= p_max of |chi_p(n) - 1| * p^(3/2), the empirical constant
    in the local-factor decay; reported, never assumed."""
    best = 0.0
    for p in sieve_primes(p_max).primes:
        rep = chi_p(int(p), n, k, s)
        best = max(best, abs(rep.chi - 1.0) * float(p) ** 1.5)
    return best


def _product_tail_estimate(cutoff: int, tail_constant: float) -> float:
    """Estimate of sum_{p > cutoff} |log chi_p| from the measured p^(-3/2) decay.

    Primes thin out like 1/log p, so the sum is approximated by the integral
    C * int_cutoff^inf u^(-3/2)/log(u) du <= 2*C/(sqrt(cutoff)*log(cutoff)).
    An estimate, not a proof.
    """
    if cutoff < 3:
        return float("inf")
    return 2.0 * tail_constant / (math.sqrt(cutoff) * math.log(cutoff))


def euler_product(
    n: int,
    k: int,
    s: int,
    prime_cutoff: int,
    partial_xs: tuple[int, ...] = (),
    tail_probe: int = 1000,
) -> SeriesReport:
    """Product of chi_p over p <= prime_cutoff, dual-route checked per prime.

    partial_xs optionally attaches truncated q-sum values to the report.  The
    tail bound combines the measured decay constant over p <= tail_probe with
    the integral estimate beyond the cutoff.  Raises if any factor is
    nonpositive (only float catastrophe could cause that; the theory gives
    chi_p >= p^{-s} > 0).
    """
    if prime_cutoff < 2:
        raise DomainError(f"need prime_cutoff >= 2, got {prime_cutoff}")
    primes = sieve_primes(prime_cutoff).primes
    product = 1.0
    min_factor = math.inf
    tail_constant = 0.0
    for p in primes:  # ascending order: reproducible accumulation
        rep = chi_p(int(p), n, k, s)
        if rep.chi <= 0.0:
            raise InternalConsistencyError(f"nonpositive local factor {rep.chi!r} at p={p}")
        product *= rep.chi
        min_factor = min(min_factor, rep.chi)
        if p <= tail_probe:
            tail_constant = max(tail_constant, abs(rep.chi - 1.0) * float(p) ** 1.5)
    report = SeriesReport(
        n=int(n), k=int(k), s=int(s), prime_cutoff=int(prime_cutoff),
        product_value=product,
        tail_bound=_product_tail_estimate(prime_cutoff, tail_constant) * abs(product),
        tail_constant=tail_constant,
        converges=s >= 3,
        min_factor=float(min_factor),
    )
    if partial_xs:
        tables = arith_tables(max(partial_xs))
        for x in partial_xs:
            report.partials.append((int(x), series_partial(n, k, s, x, tables).value))
    return report


# ---------------------------------------------------------------------------
# Vectorized evaluation over many n (used by the counting comparisons)


def chi_residue_table(p: int, k: int, s: int) -> np.ndarray:
    """chi_p(r) for every residue r mod p, via one DFT of the masked sums.

    sum_{(a,p)=1} S(p,a)^s e(-ar/p) over all r at once is the forward FFT of
    the array W[a] = S(p,a)^s restricted to coprime a.
    """
    sums = gauss_sums_all(p, k)
    w = sums**s
    w[0] = 0.0  # a = p is the only non-coprime residue for prime p
    inner = np.fft.fft(w)  # index r: sum_a w[a] e(-2 pi i a r / p)
    return 1.0 - inner.real / (p ** s * (p - 1))


def singular_series_many(n_values: np.ndarray, k: int, s: int, prime_cutoff: int) -> np.ndarray:
    """Euler products for an array of n, via per-prime residue tables.

    Uses the analytic route only (the dual route is exercised by chi_p and its
    tests); intended for sweeps where per-n products would be wasteful.
    """
    n_values = np.asarray(n_values, dtype=np.int64)
    out = np.ones(len(n_values), dtype=np.float64)
    for p in sieve_primes(prime_cutoff).primes:  # ascending: reproducible
        table = chi_residue_table(int(p), k, s)
        out *= table[n_values % int(p)]
    return out


def smallest_good_prime(n_values: np.ndarray, k: int, s: int, prime_cutoff: int = 200) -> int | None:
    """Empirical p0: the least p such that chi_q(n) >= 1 - q^(-5/4) holds for
    all sampled n and all primes q in [p, cutoff].  None if no such p exists
    within the cutoff."""
    primes = [int(p) for p in sieve_primes(prime_cutoff).primes]
    ok_from = None
    for p in reversed(primes):
        table = chi_residue_table(p, k, s)
        chis = table[np.asarray(n_values, dtype=np.int64) % p]
        if np.all(chis >= 1.0 - p ** (-1.25)):
            ok_from = p
        else:
            break
    return ok_from
