"""Exponential sums on grids, Farey arc unions, arc integrals, level sets.

The two generating functions share one representation: an integer-frequency
spectrum with real weights.  The smooth-power sum places weight 1 at the
frequencies x^k for x in A(P, R); the prime sum places weight log p at each
prime p <= n.  Values at the uniform grid alpha_j = j/M come from one inverse
FFT, and a Riemann sum over the grid integrates g * f^s * e(-alpha n) exactly
on the full circle whenever M exceeds the bandwidth (trig-polynomial
orthogonality); on arc subsets the endpoint error is reported, never hidden.

Arc unions are kept as sorted disjoint intervals with Fraction endpoints
(floats are dyadic rationals, so the disjointness checks are exact).  The
major arcs of height Q collect |q*alpha - a| <= Q/denom for q <= Q; the core
arcs use the fixed width Qcal/n instead.  The weight

    upsilon(alpha) = 1/(q + n*|q*alpha - a|)

is attached to the unique covering arc of height sqrt(n)/2, located through
continued-fraction convergents rather than a linear scan.

Grid evaluation and classification are data-parallel over grid indices;
reductions use numpy's fixed-order pairwise sums, so results are reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

from .arith import SmoothSet, gauss_sum, sieve_primes, smooth_set
from .errors import AliasingError, DomainError, ensure_memory
from .specialfn import eta_value

#: Exponent of the core-arc height (log n)^CORE_HEIGHT_EXPONENT; configurable,
#: tiny by design: at desk scale only q = 1 arcs survive.
CORE_HEIGHT_EXPONENT = 1.0 / 99.0

#: Exponent e in the pruned-arc height P^e; any small power works.
PRUNED_HEIGHT_EXPONENT = 1.0 / 5.0


def kth_root_floor(n: int, k: int) -> int:
    """Largest integer P with P^k <= n (float guess fixed up exactly)."""
    if n < 1 or k < 1:
        raise DomainError(f"need n >= 1 and k >= 1, got n={n}, k={k}")
    p = int(round(n ** (1.0 / k)))
    while p > 1 and p**k > n:
        p -= 1
    while (p + 1) ** k <= n:
        p += 1
    return p


def big_l(n: int) -> float:
    return math.log(n)


# ---------------------------------------------------------------------------
# Spectra and grids


@dataclass(frozen=True)
class ExponentialSumSpectrum:
    """Real weights on integer frequencies 0..max_freq."""

    coeffs: np.ndarray  # float64
    label: str = ""

    @property
    def max_freq(self) -> int:
        return len(self.coeffs) - 1

    def value_at_zero(self) -> float:
        return float(self.coeffs.sum())


def build_f_spectrum(n: int, k: int, R: int) -> tuple[ExponentialSumSpectrum, SmoothSet]:
    """Indicator spectrum of the smooth k-th powers x^k <= n, x in A(P, R)."""
    if n < 2:
        raise DomainError(f"need n >= 2, got {n}")
    P = kth_root_floor(n, k)
    members = smooth_set(P, R)
    ensure_memory(8 * (n + 1), "smooth-power spectrum")
    coeffs = np.zeros(n + 1, dtype=np.float64)
    coeffs[members.members**k] = 1.0
    return ExponentialSumSpectrum(coeffs=coeffs, label=f"f(P={P},R={R},k={k})"), members


def build_g_spectrum(n: int) -> ExponentialSumSpectrum:
    """log p at each prime frequency p <= n."""
    if n < 2:
        raise DomainError(f"need n >= 2, got {n}")
    table = sieve_primes(n)
    ensure_memory(8 * (n + 1), "prime spectrum")
    coeffs = np.zeros(n + 1, dtype=np.float64)
    coeffs[table.primes] = table.log_weights
    return ExponentialSumSpectrum(coeffs=coeffs, label=f"g(n={n})")


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid alpha_j = j/size, size a power of two."""

    size: int
    oversample: int = 1

    def __post_init__(self) -> None:
        if self.size < 2 or self.size & (self.size - 1):
            raise DomainError(f"grid size must be a power of two >= 2, got {self.size}")
        if self.oversample < 1:
            raise DomainError(f"oversample must be >= 1, got {self.oversample}")

    @classmethod
    def alias_free(cls, n: int, s: int, oversample: int = 1) -> "GridSpec":
        """Smallest power-of-two grid exceeding the bandwidth (s+1)*n, scaled."""
        need = (s + 1) * n + 1
        size = 1 << (need - 1).bit_length()
        if oversample > 1:
            size <<= (oversample - 1).bit_length()
        return cls(size=size, oversample=oversample)

    def alphas(self) -> np.ndarray:
        return np.arange(self.size) / self.size


def evaluate_on_grid(
    spectrum: ExponentialSumSpectrum, grid: GridSpec, allow_alias: bool = False
) -> np.ndarray:
    """Values sum_m c_m e(alpha_j m) at all grid points, by inverse FFT."""
    if grid.size <= spectrum.max_freq and not allow_alias:
        raise AliasingError(
            f"grid size {grid.size} <= max frequency {spectrum.max_freq}; "
            "pass allow_alias=True only if aliasing is intended"
        )
    ensure_memory(16 * grid.size, "grid evaluation")
    return np.fft.ifft(spectrum.coeffs, n=grid.size) * grid.size


# ---------------------------------------------------------------------------
# Farey arcs


@dataclass(frozen=True)
class FareyArc:
    """The interval |q*alpha - a| <= q*half_width around a/q, clipped to [0,1]."""

    q: int
    a: int
    half_width: Fraction  # in alpha units

    @property
    def center(self) -> Fraction:
        return Fraction(self.a, self.q)

    @property
    def lo(self) -> Fraction:
        return max(Fraction(0), self.center - self.half_width)

    @property
    def hi(self) -> Fraction:
        return min(Fraction(1), self.center + self.half_width)


@dataclass(frozen=True)
class Piece:
    """One subinterval with explicit endpoint closure.

    Closure matters only at seams: set differences and complements exclude
    boundary points their generator owns, so point membership and grid masks
    stay exact, not just measure-exact.  Iterates as (lo, hi, arc) for the
    common case that only the geometry is needed.
    """

    lo: Fraction
    hi: Fraction
    arc: "FareyArc | None" = None
    lo_closed: bool = True
    hi_closed: bool = True

    def __iter__(self):
        return iter((self.lo, self.hi, self.arc))

    def is_empty(self) -> bool:
        if self.lo > self.hi:
            return True
        return self.lo == self.hi and not (self.lo_closed and self.hi_closed)

    def contains(self, x: Fraction) -> bool:
        if self.lo < x < self.hi:
            return True
        if x == self.lo and self.lo_closed:
            return True
        return x == self.hi and self.hi_closed


def _closed(lo: Fraction, hi: Fraction, arc: "FareyArc | None" = None) -> Piece:
    return Piece(lo=lo, hi=hi, arc=arc)


@dataclass(frozen=True)
class ArcUnion:
    """Sorted, pairwise-disjoint subintervals of [0, 1]."""

    label: str
    intervals: tuple[Piece, ...]
    params: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        prev: Piece | None = None
        for piece in self.intervals:
            if piece.lo > piece.hi:
                raise DomainError(f"{self.label}: interval with lo > hi")
            if prev is not None:
                if piece.lo < prev.hi or (
                    piece.lo == prev.hi and piece.lo_closed and prev.hi_closed
                ):
                    raise DomainError(f"{self.label}: overlapping intervals at {float(piece.lo):.6g}")
            prev = piece

    @property
    def arcs(self) -> list[FareyArc]:
        return [p.arc for p in self.intervals if p.arc is not None]

    def measure_exact(self) -> Fraction:
        return sum((p.hi - p.lo for p in self.intervals), Fraction(0))

    def measure(self) -> float:
        return float(self.measure_exact())

    def contains(self, alpha: float | Fraction) -> bool:
        x = Fraction(alpha)
        for piece in self.intervals:
            if piece.contains(x):
                return True
            if piece.lo > x:
                return False
        return False

    def complement(self, label: str | None = None) -> "ArcUnion":
        out: list[Piece] = []
        cursor = Fraction(0)
        cursor_closed = True  # does the cursor point itself belong to the complement
        for piece in self.intervals:
            gap = Piece(cursor, piece.lo, None, cursor_closed, not piece.lo_closed)
            if not gap.is_empty():
                out.append(gap)
            cursor, cursor_closed = piece.hi, not piece.hi_closed
        tail = Piece(cursor, Fraction(1), None, cursor_closed, True)
        if not tail.is_empty():
            out.append(tail)
        return ArcUnion(label=label or f"complement({self.label})", intervals=tuple(out), params=dict(self.params))

    def difference(self, other: "ArcUnion", label: str | None = None) -> "ArcUnion":
        out: list[Piece] = []
        for piece in self.intervals:
            pieces = [piece]
            for cut in other.intervals:
                nxt: list[Piece] = []
                for p in pieces:
                    # no point in common
                    if cut.hi < p.lo or (cut.hi == p.lo and not (cut.hi_closed and p.lo_closed)):
                        nxt.append(p)
                        continue
                    if cut.lo > p.hi or (cut.lo == p.hi and not (cut.lo_closed and p.hi_closed)):
                        nxt.append(p)
                        continue
                    left = Piece(p.lo, cut.lo, p.arc, p.lo_closed, not cut.lo_closed)
                    if not left.is_empty():
                        nxt.append(left)
                    right = Piece(cut.hi, p.hi, p.arc, not cut.hi_closed, p.hi_closed)
                    if not right.is_empty():
                        nxt.append(right)
                pieces = nxt
            out.extend(pieces)
        return ArcUnion(label=label or f"{self.label} minus {other.label}", intervals=tuple(out), params=dict(self.params))

    def union(self, other: "ArcUnion", label: str | None = None) -> "ArcUnion":
        merged = sorted(
            list(self.intervals) + list(other.intervals),
            key=lambda p: (p.lo, not p.lo_closed),
        )
        out: list[Piece] = []
        for piece in merged:
            if out:
                prev = out[-1]
                touches = piece.lo < prev.hi or (
                    piece.lo == prev.hi and (piece.lo_closed or prev.hi_closed)
                )
                if touches:
                    if (piece.hi, piece.hi_closed) > (prev.hi, prev.hi_closed):
                        out[-1] = Piece(prev.lo, piece.hi, prev.arc or piece.arc,
                                        prev.lo_closed, piece.hi_closed)
                    continue
            out.append(piece)
        return ArcUnion(label=label or f"{self.label} union {other.label}", intervals=tuple(out), params=dict(self.params))

    def same_point_set(self, other: "ArcUnion") -> bool:
        """Exact equality as subsets of [0, 1] (zero-length pieces ignored)."""
        def canonical(u: "ArcUnion"):
            return [
                (p.lo, p.hi, p.lo_closed, p.hi_closed)
                for p in u.union(u).intervals
                if not p.is_empty()
            ]

        return canonical(self) == canonical(other)

    def grid_mask(self, m: int) -> np.ndarray:
        """Boolean membership of the grid points j/m, j in [0, m).

        The point alpha = 1 is the grid point 0 by periodicity, so intervals
        reaching 1 stop at j = m - 1 (the wrap arcs around 0 and 1 cover it).
        Open endpoints that land exactly on a grid point are excluded.
        """
        mask = np.zeros(m, dtype=bool)
        for piece in self.intervals:
            lo_scaled = piece.lo * m
            j0 = int(math.ceil(lo_scaled))
            if not piece.lo_closed and lo_scaled.denominator == 1:
                j0 += 1
            hi_scaled = piece.hi * m
            j1 = int(math.floor(hi_scaled))
            if not piece.hi_closed and hi_scaled.denominator == 1:
                j1 -= 1
            j1 = min(j1, m - 1)
            if j0 <= j1:
                mask[j0 : j1 + 1] = True
        return mask

    def grid_indices(self, m: int) -> np.ndarray:
        return np.nonzero(self.grid_mask(m))[0]

    def endpoint_count(self) -> int:
        return 2 * len(self.intervals)

    def to_json_arcs(self) -> list[dict]:
        return [
            {"q": arc.q, "a": arc.a, "center": float(arc.center), "half_width": float(arc.half_width)}
            for arc in self.arcs
        ]


def major_arcs(Q: float, denom: int, label: str | None = None, params: dict | None = None) -> ArcUnion:
    """Union of |q*alpha - a| <= Q/denom over q <= Q, 0 <= a <= q, (a, q) = 1.

    Disjoint when Q <= sqrt(denom)/2 (enforced); endpoints exact Fractions.
    """
    if Q < 1:
        raise DomainError(f"height must be >= 1, got {Q}")
    # 1e-9 slack: callers pass Q = sqrt(denom)/2 as a float, which may round a
    # hair above the irrational bound; disjointness genuinely needs only
    # 2*Q^2 < denom, so the slack is harmless and overlap is still asserted
    # exactly at construction.
    if Q > 0.5 * math.sqrt(denom) * (1.0 + 1e-9):
        raise DomainError(f"height {Q} above the disjointness bound sqrt({denom})/2")
    q_top = int(math.floor(Q))
    width = Fraction(Q) / denom
    intervals: list[Piece] = []
    for q in range(1, q_top + 1):
        hw = width / q
        for a in range(0, q + 1):
            if math.gcd(a, q) != 1:
                continue
            arc = FareyArc(q=q, a=a, half_width=hw)
            lo, hi = arc.lo, arc.hi
            if hi > lo:
                intervals.append(_closed(lo, hi, arc))
    intervals.sort(key=lambda piece: piece.lo)
    return ArcUnion(
        label=label or f"M({Q:g})",
        intervals=tuple(intervals),
        params={"Q": Q, "denom": denom, **(params or {})},
    )


def core_arcs(n: int, height: float | None = None, label: str = "N") -> ArcUnion:
    """Fixed-width arcs |alpha - a/q| <= Qcal/n for q <= Qcal.

    Default Qcal = (log n)^(1/99): at n <= 1e6 only q = 1 survives.
    """
    q_cal = (math.log(n)) ** CORE_HEIGHT_EXPONENT if height is None else height
    if q_cal < 1:
        raise DomainError(f"core height must be >= 1, got {q_cal}")
    width = Fraction(q_cal) / n
    intervals: list[Piece] = []
    for q in range(1, int(math.floor(q_cal)) + 1):
        for a in range(0, q + 1):
            if math.gcd(a, q) != 1:
                continue
            arc = FareyArc(q=q, a=a, half_width=width)
            lo, hi = arc.lo, arc.hi
            if hi > lo:
                intervals.append(_closed(lo, hi, arc))
    intervals.sort(key=lambda piece: piece.lo)
    return ArcUnion(label=label, intervals=tuple(intervals), params={"Q": q_cal, "denom": n})


def build_arc_union(label: str, n: int, k: int, **params) -> ArcUnion:
    """Named dissections: M(Q), N, L, K, Kprime, P_slice(Y), all at scale n."""
    P = kth_root_floor(n, k)
    if label == "M":
        return major_arcs(params["Q"], n, label=f"M({params['Q']:g})")
    if label == "N":
        return core_arcs(n, params.get("height"))
    if label == "L":
        e = params.get("height_exponent", PRUNED_HEIGHT_EXPONENT)
        return major_arcs(max(1.0, P**e), n, label="L")
    if label == "K":
        return major_arcs(n**0.4, n, label="K")
    if label == "Kprime":
        return major_arcs(0.5 * math.sqrt(n), n, label="Kprime")
    if label == "P_slice":
        y = params["Y"]
        if not 0.5 <= y <= 0.25 * math.sqrt(n):
            raise DomainError(f"slice height must lie in [1/2, sqrt(n)/4], got {y}")
        outer = major_arcs(2 * y, n, label=f"M({2*y:g})")
        inner = major_arcs(max(1.0, y), n, label=f"M({y:g})")
        return outer.difference(inner, label=f"P({y:g})")
    raise DomainError(f"unknown arc-union label {label!r}")


# ---------------------------------------------------------------------------
# The covering-arc weight


def _convergents(alpha: float, q_cap: int):
    """Continued-fraction convergents a/q of alpha with q <= q_cap."""
    a0 = math.floor(alpha)
    p_prev, q_prev = 1, 0
    p_cur, q_cur = a0, 1
    yield p_cur, q_cur
    frac = alpha - a0
    for _ in range(64):
        if frac <= 1e-18:
            return
        x = 1.0 / frac
        digit = math.floor(x)
        frac = x - digit
        p_prev, q_prev, p_cur, q_cur = p_cur, q_cur, digit * p_cur + p_prev, digit * q_cur + q_prev
        if q_cur > q_cap:
            return
        yield p_cur, q_cur


def locate_farey_arc(alpha: float, Q: float, denom: int) -> tuple[int, int] | None:
    """The (q, a) with q <= Q and |q*alpha - a| <= Q/denom covering alpha, or None.

    Any covering center is a continued-fraction convergent of alpha (the arcs
    are narrower than the Legendre threshold for q <= Q <= sqrt(denom)/2), so
    only convergents need checking; disjointness makes the hit unique.
    """
    if not 0.0 <= alpha <= 1.0:
        raise DomainError(f"alpha must lie in [0, 1], got {alpha}")
    bound = Q / denom
    for a, q in _convergents(alpha, int(math.floor(Q))):
        if abs(q * alpha - a) <= bound:
            return q, a
    return None


def upsilon(alpha: float, n: int) -> float:
    """1/(q + n*|q*alpha - a|) on the covering arc of height sqrt(n)/2, else 0."""
    q0 = 0.5 * math.sqrt(n)
    hit = locate_farey_arc(alpha, q0, n)
    if hit is None:
        return 0.0
    q, a = hit
    return 1.0 / (q + n * abs(q * alpha - a))


# ---------------------------------------------------------------------------
# Arc integrals


@dataclass(frozen=True)
class IntegralResult:
    value: complex
    boundary_error: float  # endpoint-count * sup|integrand| / M; 0 on the full circle
    points: int
    measure: float


def integrate_over_set(
    spectra: list[ExponentialSumSpectrum],
    conjugate_flags: list[bool],
    twist: int | None,
    region: ArcUnion | None,
    grid: GridSpec,
    allow_alias: bool = False,
    values: list[np.ndarray] | None = None,
) -> IntegralResult:
    """Riemann sum of prod spectra * e(-alpha*twist) over the region's grid points.

    On the full circle (region None) with an alias-free grid this equals the
    true integral exactly; on subsets the reported boundary error bounds the
    endpoint effect.  Precomputed grid values can be passed to avoid repeated
    FFTs.
    """
    if len(spectra) != len(conjugate_flags):
        raise DomainError("one conjugate flag per spectrum required")
    m = grid.size
    if values is None:
        values = [evaluate_on_grid(sp, grid, allow_alias) for sp in spectra]
    prod = np.ones(m, dtype=np.complex128)
    for vals, conj in zip(values, conjugate_flags):
        prod = prod * (np.conj(vals) if conj else vals)
    if twist:
        prod = prod * np.exp((-2j * np.pi * twist / m) * np.arange(m))
    if region is None:
        return IntegralResult(value=complex(prod.mean()), boundary_error=0.0, points=m, measure=1.0)
    mask = region.grid_mask(m)
    pts = int(mask.sum())
    value = complex(prod[mask].sum() / m)
    sup = float(np.abs(prod).max()) if m else 0.0
    return IntegralResult(
        value=value,
        boundary_error=region.endpoint_count() * sup / m,
        points=pts,
        measure=pts / m,
    )


@lru_cache(maxsize=64)
def _v_weights(n: int, k: int) -> np.ndarray:
    m = np.arange(1, n + 1, dtype=np.float64)
    return m ** (-1.0 + 1.0 / k) / k


def v_poly(beta: float, n: int, k: int) -> complex:
    """(1/k) sum_{m<=n} m^(1/k - 1) e(beta m), by direct summation."""
    if k < 1:
        raise DomainError(f"need k >= 1, got {k}")
    w = _v_weights(n, k)
    phases = np.exp(2j * np.pi * beta * np.arange(1, n + 1))
    return complex(np.dot(w, phases))


def singular_integral(n: int, k: int, s: int, X: float) -> float:
    """Adaptive quadrature of v_1(b) * v_k(b)^s * e(-b n) over |b| <= X/n.

    The integrand has conjugate symmetry, so the value is twice the real part
    of the half-range integral.
    """
    if not 1 <= X <= n / 2:
        raise DomainError(f"need 1 <= X <= n/2, got X={X}")
    def integrand(beta: float) -> float:
        return (v_poly(beta, n, 1) * v_poly(beta, n, k) ** s * np.exp(-2j * np.pi * beta * n)).real
    value, _err = quad(integrand, 0.0, X / n, limit=300)
    return 2.0 * value


# ---------------------------------------------------------------------------
# Major-arc model and moments


@dataclass(frozen=True)
class ModelErrorReport:
    n: int
    k: int
    R: int
    rho_hat: float
    sup_abs_error: float
    normalized: float  # sup / n^(1/k)
    points: int
    arcs: int


def major_arc_model_error(
    n: int,
    k: int,
    R: int,
    grid: GridSpec | None = None,
    height: float | None = None,
) -> ModelErrorReport:
    """Sup over core-arc grid points of |f(alpha) - rho * S(q,a)/q * v_k(alpha - a/q)|.

    rho is the empirical smooth density |A(P, R)| / P.  The sup is also
    returned normalized by n^(1/k).
    """
    spectrum, members = build_f_spectrum(n, k, R)
    P = kth_root_floor(n, k)
    rho_hat = len(members) / P
    grid = grid or GridSpec.alias_free(n, 1)
    f_vals = evaluate_on_grid(spectrum, grid)
    arcs_union = core_arcs(n, height)
    m = grid.size
    sup_err = 0.0
    points = 0
    for lo, hi, arc in arcs_union.intervals:
        if arc is None:
            continue
        j0 = int(math.ceil(lo * m))
        j1 = min(int(math.floor(hi * m)), m - 1)
        center = float(arc.center)
        for j in range(j0, j1 + 1):
            alpha = j / m
            model = rho_hat * gauss_sum(arc.q, arc.a, k) / arc.q * v_poly(alpha - center, n, k)
            sup_err = max(sup_err, abs(f_vals[j] - model))
            points += 1
    return ModelErrorReport(
        n=int(n), k=int(k), R=int(R), rho_hat=rho_hat,
        sup_abs_error=sup_err, normalized=sup_err / n ** (1.0 / k),
        points=points, arcs=len(arcs_union.arcs),
    )


@dataclass(frozen=True)
class MomentResult:
    P: int
    R: int
    Q: float
    t: float
    k: int
    value: float
    boundary_error: float
    measure: float
    points: int
    below_guaranteed_range: bool  # t < k + 1: outside the guaranteed regime


def moment_v(
    P: int,
    R: int,
    Q: float,
    t: float,
    k: int,
    grid: GridSpec | None = None,
    f_values: np.ndarray | None = None,
) -> MomentResult:
    """Restricted Riemann sum of |f|^t over the major arcs of height Q.

    Arc geometry lives at denominator P^k here.  Fractional t is fine.
    Precomputed f values (from the matching grid) avoid repeated FFTs in
    dyadic sweeps.
    """
    denom = P**k
    if not 1 <= Q <= 0.5 * math.sqrt(denom) * (1.0 + 1e-9):
        raise DomainError(f"need 1 <= Q <= P^(k/2)/2, got Q={Q}")
    spectrum = None
    if f_values is None:
        ncap = denom
        spectrum, _ = build_f_spectrum(ncap, k, R)
        grid = grid or GridSpec.alias_free(ncap, 0, oversample=2)
        f_values = evaluate_on_grid(spectrum, grid)
    if grid is None:
        raise DomainError("grid must accompany precomputed f values")
    union = major_arcs(Q, denom)
    mask = union.grid_mask(grid.size)
    amps = np.abs(f_values[mask]) ** t
    value = float(amps.sum() / grid.size)
    sup = float((np.abs(f_values).max()) ** t)
    return MomentResult(
        P=int(P), R=int(R), Q=float(Q), t=float(t), k=int(k),
        value=value,
        boundary_error=union.endpoint_count() * sup / grid.size,
        measure=float(mask.sum()) / grid.size,
        points=int(mask.sum()),
        below_guaranteed_range=t < k + 1,
    )


def moment_doubling_report(P: int, R: int, k: int, t: float, q_values: list[float] | None = None) -> dict:
    """V(Q) over a dyadic ladder with log2 slopes and the reference 2*Delta_t/k."""
    denom = P**k
    if q_values is None:
        q_values, q = [], 1.0
        while q <= 0.5 * math.sqrt(denom):
            q_values.append(q)
            q *= 2.0
    ncap = denom
    spectrum, _ = build_f_spectrum(ncap, k, R)
    grid = GridSpec.alias_free(ncap, 0, oversample=2)
    f_vals = evaluate_on_grid(spectrum, grid)
    rows = []
    prev = None
    for q in q_values:
        res = moment_v(P, R, q, t, k, grid=grid, f_values=f_vals)
        slope = math.log2(res.value / prev) if prev and prev > 0 and res.value > 0 else None
        rows.append({"Q": q, "V": res.value, "measure": res.measure,
                     "boundary_error": res.boundary_error, "log2_ratio": slope})
        prev = res.value
    reference = 2.0 * eta_value(t / k)
    return {
        "P": P, "R": R, "k": k, "t": t,
        "reference_slope": reference,  # 2*Delta_t/k with Delta_t = k*eta(t/k)
        "rows": rows,
        "below_guaranteed_range": t < k + 1,
    }


# ---------------------------------------------------------------------------
# Level sets


@dataclass(frozen=True)
class LevelClass:
    label: str
    points: int
    measure: float
    sup_g: float
    sup_f: float
    contribution_abs: float


@dataclass(frozen=True)
class LevelSetPartition:
    family: str  # "minor" (tiny/band over the minor arcs) or "slice" (per height slice)
    base_label: str
    thresholds: dict
    classes: tuple[LevelClass, ...]
    warnings: tuple[str, ...] = ()

    def measures_sum(self) -> float:
        return float(sum(c.measure for c in self.classes))

    def to_csv_rows(self) -> list[list]:
        return [
            [c.label, c.measure, c.sup_g, c.sup_f, c.contribution_abs]
            for c in self.classes
        ]


def _class_from_mask(label: str, mask: np.ndarray, g_abs, f_abs, weight, m: int) -> LevelClass:
    pts = int(mask.sum())
    return LevelClass(
        label=label,
        points=pts,
        measure=pts / m,
        sup_g=float(g_abs[mask].max()) if pts else 0.0,
        sup_f=float(f_abs[mask].max()) if pts else 0.0,
        contribution_abs=float(weight[mask].sum() / m) if pts else 0.0,
    )


def level_partition(
    n: int,
    k: int,
    s: int,
    theta: int,
    base: ArcUnion,
    g_values: np.ndarray,
    f_values: np.ndarray,
    *,
    family: str,
    U: float | None = None,
    V: float | None = None,
    Q: float | None = None,
) -> LevelSetPartition:
    """Classify the base set's grid points by the size of |g| (and then |f|).

    family="minor": tiny_g is |g| <= sqrt(n); the band is n/U <= |g| <= 2n/U,
    split at |f|^s = P^s/(U * L^3).  family="slice": small_g is |g| <= n/Q on a
    height slice, band n/V <= |g| <= 2n/V split at |f|^s = P^s/(V * L^4).
    Points of the base in neither class land in "unbanded", so the classes
    partition the base exactly.  Thresholds outside the ranges the theory
    covers produce warnings, not errors.
    """
    m = len(g_values)
    if len(f_values) != m:
        raise DomainError("g and f grids differ")
    P = kth_root_floor(n, k)
    L = big_l(n)
    base_mask = base.grid_mask(m)
    g_abs = np.abs(g_values)
    f_abs = np.abs(f_values)
    weight = g_abs * f_abs**s
    warnings: list[str] = []

    if family == "minor":
        if U is None:
            raise DomainError("minor-family partition needs U")
        u_lo, u_hi = n ** (1.0 / theta) / L**5, math.sqrt(n)
        if not u_lo <= U <= u_hi:
            warnings.append(f"U={U:g} outside the covered range [{u_lo:g}, {u_hi:g}]")
        first = base_mask & (g_abs <= math.sqrt(n))
        band = base_mask & ~first & (g_abs >= n / U) & (g_abs <= 2 * n / U)
        split = P**s / (U * L**3)
        thresholds = {"U": U, "theta": theta, "f_split": split}
        labels = ("tiny_g", "band_small_f", "band_large_f", "unbanded")
    elif family == "slice":
        if V is None or Q is None:
            raise DomainError("slice-family partition needs V and Q")
        v_lo, v_hi = math.sqrt(Q) / L**5, Q
        if not v_lo <= V <= v_hi:
            warnings.append(f"V={V:g} outside the covered range [{v_lo:g}, {v_hi:g}]")
        first = base_mask & (g_abs <= n / Q)
        band = base_mask & ~first & (g_abs >= n / V) & (g_abs <= 2 * n / V)
        split = P**s / (V * L**4)
        thresholds = {"V": V, "Q": Q, "theta": theta, "f_split": split}
        labels = ("small_g", "band_small_f", "band_large_f", "unbanded")
    else:
        raise DomainError(f"unknown level-set family {family!r}")

    band_small = band & (f_abs**s <= split)
    band_large = band & ~band_small
    rest = base_mask & ~first & ~band
    classes = (
        _class_from_mask(labels[0], first, g_abs, f_abs, weight, m),
        _class_from_mask(labels[1], band_small, g_abs, f_abs, weight, m),
        _class_from_mask(labels[2], band_large, g_abs, f_abs, weight, m),
        _class_from_mask(labels[3], rest, g_abs, f_abs, weight, m),
    )
    return LevelSetPartition(
        family=family, base_label=base.label, thresholds=thresholds,
        classes=classes, warnings=tuple(warnings),
    )


def dyadic_band_cover(n: int, theta: int, g_values: np.ndarray, base_mask: np.ndarray) -> dict:
    """Check that O(log n) dyadic bands cover the base points with |g| > sqrt(n).

    Bands are n/U <= |g| <= 2n/U for U halving from sqrt(n) down to
    n^(1/theta)/L^5; consecutive bands share an endpoint, so coverage can fail
    only above the top band (a point would contradict the prime-sum envelope
    at scale; at desk scale it simply reports).
    """
    L = big_l(n)
    u_min = n ** (1.0 / theta) / L**5
    g_abs = np.abs(g_values)
    over = base_mask & (g_abs > math.sqrt(n))
    covered = np.zeros_like(over)
    bands = 0
    u = math.sqrt(n)
    while u >= u_min and bands < 200:
        covered |= over & (g_abs >= n / u) & (g_abs <= 2 * n / u)
        u /= 2.0
        bands += 1
    uncovered = int((over & ~covered).sum())
    return {"bands": bands, "points_above_tiny": int(over.sum()), "uncovered": uncovered}


def g_envelope_constant(n: int, g_values: np.ndarray, base_mask: np.ndarray) -> dict:
    """Empirical C with sup |g| on the base <= C * n^(4/5) * L^4 (reported, not asserted)."""
    g_abs = np.abs(g_values)
    sup = float(g_abs[base_mask].max()) if base_mask.any() else 0.0
    scale = n**0.8 * big_l(n) ** 4
    return {"sup_g": sup, "scale": scale, "constant": sup / scale}


def dissection_ledger(
    n: int,
    k: int,
    s: int,
    theta: int,
    R: int,
    oversample: int = 1,
    U: float | None = None,
    V: float | None = None,
    Q_slice: float | None = None,
) -> dict:
    """Full arc dissection at scale n with both level-set families.

    Builds the named arc unions, evaluates both generating functions on an
    alias-free grid, partitions the minor arcs and one height slice by the
    size of |g|, runs the dyadic covering check, and reports the empirical
    envelope constants.  Thresholds default to values that keep the bands
    populated at desk scale; all of them are recorded in the output.
    """
    grid = GridSpec.alias_free(n, s, oversample=oversample)
    m = grid.size
    f_spec, members = build_f_spectrum(n, k, R)
    g_spec = build_g_spectrum(n)
    f_vals = evaluate_on_grid(f_spec, grid)
    g_vals = evaluate_on_grid(g_spec, grid)

    height_label = "Kprime" if theta == 4 else "K"
    wide = build_arc_union(height_label, n, k)
    minor = wide.complement("k" if theta == 5 else "kprime")
    pruned = build_arc_union("L", n, k)
    core = build_arc_union("N", n, k)

    minor_mask = minor.grid_mask(m)
    g_abs = np.abs(g_vals)
    sup_g_minor = float(g_abs[minor_mask].max()) if minor_mask.any() else 0.0
    if U is None:
        U = min(math.sqrt(n), max(1.0, 2.0 * n / sup_g_minor if sup_g_minor else math.sqrt(n)))
    part_minor = level_partition(n, k, s, theta, minor, g_vals, f_vals, family="minor", U=U)

    if Q_slice is None:
        q_hi = 0.5 * n ** (2.0 / theta)
        Q_slice = max(kth_root_floor(n, k) ** PRUNED_HEIGHT_EXPONENT, min(16.0, q_hi))
    slice_union = build_arc_union("P_slice", n, k, Y=Q_slice)
    slice_mask = slice_union.grid_mask(m)
    sup_g_slice = float(g_abs[slice_mask].max()) if slice_mask.any() else 0.0
    if V is None:
        V = min(Q_slice, max(math.sqrt(Q_slice), 2.0 * n / sup_g_slice if sup_g_slice else Q_slice))
    part_slice = level_partition(
        n, k, s, theta, slice_union, g_vals, f_vals, family="slice", V=V, Q=Q_slice
    )

    cover = dyadic_band_cover(n, theta, g_vals, minor_mask)
    g_env = g_envelope_constant(n, g_vals, minor_mask)
    f_env = f_envelope_constant(n, k, f_vals, pruned)

    csv_rows = [["minor/" + row[0], *row[1:]] for row in part_minor.to_csv_rows()]
    csv_rows += [["slice/" + row[0], *row[1:]] for row in part_slice.to_csv_rows()]
    return {
        "n": n, "k": k, "s": s, "theta": theta, "R": R,
        "grid_size": m,
        "smooth_count": len(members),
        "arc_unions": {
            wide.label: {"measure": wide.measure(), "arcs": len(wide.arcs)},
            minor.label: {"measure": minor.measure()},
            pruned.label: {"measure": pruned.measure(), "arcs": len(pruned.arcs)},
            core.label: {"measure": core.measure(), "arcs": len(core.arcs)},
            slice_union.label: {"measure": slice_union.measure()},
        },
        "arcs_json": {
            wide.label: wide.to_json_arcs(),
            pruned.label: pruned.to_json_arcs(),
            core.label: core.to_json_arcs(),
        },
        "minor_partition": {
            "thresholds": part_minor.thresholds,
            "warnings": list(part_minor.warnings),
            "measure_sum": part_minor.measures_sum(),
            "base_measure": float(minor_mask.sum()) / m,
            "classes": part_minor.to_csv_rows(),
        },
        "slice_partition": {
            "thresholds": part_slice.thresholds,
            "warnings": list(part_slice.warnings),
            "measure_sum": part_slice.measures_sum(),
            "base_measure": float(slice_mask.sum()) / m,
            "classes": part_slice.to_csv_rows(),
        },
        "covering": cover,
        "g_envelope": g_env,
        "f_envelope": f_env,
        "csv_rows": csv_rows,
    }


def f_envelope_constant(
    n: int, k: int, f_values: np.ndarray, pruned: ArcUnion
) -> dict:
    """Empirical C with |f| <= C * P * L^3 * upsilon^(1/2k) on the pruned arcs."""
    m = len(f_values)
    P = kth_root_floor(n, k)
    scale = P * big_l(n) ** 3
    best = 0.0
    for lo, hi, arc in pruned.intervals:
        if arc is None:
            continue
        j0 = int(math.ceil(lo * m))
        j1 = min(int(math.floor(hi * m)), m - 1)
        if j1 < j0:
            continue
        js = np.arange(j0, j1 + 1)
        alphas = js / m
        ups = 1.0 / (arc.q + n * np.abs(arc.q * alphas - arc.a))
        ratio = np.abs(f_values[js]) / (scale * ups ** (1.0 / (2 * k)))
        best = max(best, float(ratio.max()))
    return {"scale": scale, "constant": best}
