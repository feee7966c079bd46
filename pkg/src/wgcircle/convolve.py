"""Exact integer convolution with a verified float-FFT fast path.

Counting by generating functions needs convolutions whose entries are exact
integers.  Three routes:

  * float_fft: real FFT product, then round.  Accepted only when every entry
    rounds with residue < 0.25 and the largest value stays below 2^52, i.e.
    when exactness is certain; otherwise the caller falls back.
  * kronecker: pack each sequence into one big integer with slots wide enough
    that no carries cross, multiply, unpack.  Exact for any magnitudes
    (Python integers), and fast thanks to big-int multiplication.
  * direct: numpy's O(n*m) convolution, for small inputs and as a test oracle.

All inputs are nonnegative integer sequences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InternalConsistencyError

_FLOAT_EXACT_MAX = 2.0**52
_RESIDUE_LIMIT = 0.25

METHODS = ("auto", "float_fft_verified", "integer_safe", "direct")


@dataclass
class ConvStats:
    """Counts of which route actually ran (auto mode records fallbacks)."""

    float_ok: int = 0
    float_rejected: int = 0
    kronecker: int = 0
    direct: int = 0


def _next_pow2(n: int) -> int:
    return 1 << max(0, (n - 1).bit_length())


def fft_convolve_checked(a: np.ndarray, b: np.ndarray, out_len: int) -> np.ndarray | None:
    """Float-FFT convolution, returned only when provably exact, else None."""
    n = len(a) + len(b) - 1
    size = _next_pow2(n)
    fa = np.fft.rfft(a.astype(np.float64), size)
    fb = np.fft.rfft(b.astype(np.float64), size)
    conv = np.fft.irfft(fa * fb, size)[:out_len]
    rounded = np.rint(conv)
    if rounded.size and float(rounded.max()) >= _FLOAT_EXACT_MAX:
        return None
    if conv.size and float(np.abs(conv - rounded).max()) >= _RESIDUE_LIMIT:
        return None
    return rounded.astype(np.int64)


def _pack(arr, nbytes: int) -> int:
    if nbytes <= 8:
        buf = np.asarray(arr, dtype=np.uint64).astype("<u8").tobytes()
        if nbytes != 8:
            # repack into tight slots
            tight = bytearray()
            for i in range(0, len(buf), 8):
                tight += buf[i : i + nbytes]
            buf = bytes(tight)
    else:
        buf = b"".join(int(v).to_bytes(nbytes, "little") for v in arr)
    return int.from_bytes(buf, "little")


def kronecker_convolve(a, b, out_len: int | None = None) -> list[int]:
    """Exact linear convolution of nonnegative integer sequences.

    Slot width is chosen from the worst-case entry bound, so no carry can
    cross slot boundaries and unpacking recovers the exact coefficients.
    """
    la, lb = len(a), len(b)
    if la == 0 or lb == 0:
        return []
    amax = max(int(v) for v in a)
    bmax = max(int(v) for v in b)
    if amax < 0 or bmax < 0 or min(int(v) for v in a) < 0 or min(int(v) for v in b) < 0:
        raise DomainError("kronecker convolution requires nonnegative entries")
    bound = amax * bmax * min(la, lb) + 1
    nbytes = max(1, (bound.bit_length() + 7) // 8)
    product = _pack(a, nbytes) * _pack(b, nbytes)
    n_out = la + lb - 1
    raw = product.to_bytes(n_out * nbytes + nbytes, "little")
    out = [int.from_bytes(raw[i * nbytes : (i + 1) * nbytes], "little") for i in range(n_out)]
    if out_len is not None:
        out = out[:out_len]
    return out


def convolve_exact(
    a: np.ndarray,
    b: np.ndarray,
    out_len: int | None = None,
    method: str = "auto",
    stats: ConvStats | None = None,
) -> np.ndarray:
    """Exact convolution as int64; raises if the result cannot fit int64."""
    if method not in METHODS:
        raise DomainError(f"unknown convolution method {method!r}")
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    n_out = len(a) + len(b) - 1 if len(a) and len(b) else 0
    out_len = n_out if out_len is None else min(out_len, n_out)
    if method == "direct":
        if stats:
            stats.direct += 1
        return np.convolve(a, b)[:out_len]
    if method in ("auto", "float_fft_verified"):
        result = fft_convolve_checked(a, b, out_len)
        if result is not None:
            if stats:
                stats.float_ok += 1
            return result
        if stats:
            stats.float_rejected += 1
    # integer-safe path
    if stats:
        stats.kronecker += 1
    out = kronecker_convolve(a, b, out_len)
    arr = np.empty(len(out), dtype=np.int64)
    for i, v in enumerate(out):
        if v >= 2**63:
            raise InternalConsistencyError("convolution entry exceeds int64; use the big-integer API")
        arr[i] = v
    return arr


def cyclic_convolve_big(a: list[int], b: list[int], modulus_len: int) -> list[int]:
    """Exact cyclic convolution over Z_m as Python integers (no overflow)."""
    lin = kronecker_convolve(a, b)
    out = [0] * modulus_len
    for i, v in enumerate(lin):
        out[i % modulus_len] += v
    return out


def cyclic_power(hist: np.ndarray, s: int, modulus_len: int) -> np.ndarray | list[int]:
    """s-fold cyclic self-convolution of a nonnegative histogram, exact.

    Returns int64 when the entries provably fit (total mass^s below 2^63),
    otherwise a list of Python integers.
    """
    if s < 1:
        raise DomainError(f"power must be >= 1, got {s}")
    base = [int(v) for v in hist]
    if len(base) != modulus_len:
        raise DomainError("histogram length must equal the modulus")
    total = sum(base)
    fits = total**s < 2**63  # every entry is at most the total mass
    result: list[int] | None = None
    square = base
    e = s
    while e > 0:
        if e & 1:
            result = square if result is None else cyclic_convolve_big(result, square, modulus_len)
        e >>= 1
        if e:
            square = cyclic_convolve_big(square, square, modulus_len)
    assert result is not None
    if fits:
        return np.asarray(result, dtype=np.int64)
    return result
