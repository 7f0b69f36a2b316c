"""Exact integer and multiplicative arithmetic.

Provides the classical exponential sums and divisor-type functions:

    phi(c)        Euler totient, #{1 <= a <= c : gcd(a, c) = 1}
    d(n)          number of positive divisors
    sigma_e(r)    sum of d^e over positive divisors d of |r| (complex e)
    C_c(r)        Ramanujan sum, sum of e(a r / c) over units a mod c
    K(a, b; c)    Kloosterman sum, sum of e((a m + b m*) / c) over units m

All residue sums run over 1 <= m <= c with gcd(m, c) = 1, so c = 1
contributes the single term m = 1.  This is the convention under which
the Dirichlet series  sum_c C_c(r)/c^s = sigma_{1-s}(r)/zeta(s)  holds.

Ramanujan and Kloosterman sums are evaluated by direct exponential
summation (O(c) per sum with a per-modulus inverse table); integer-valued
results are asserted to be within 1e-9 of an integer before rounding.
"""

from __future__ import annotations

import functools
import math

import numpy as np

from .errors import NotInvertible, PrecisionLoss
from .types import KloostermanParams

_INT_TOL = 1e-9


def gcd(a: int, b: int) -> int:
    return math.gcd(a, b)


def euler_phi(c: int) -> int:
    """Euler totient phi(c) by trial-division factorization."""
    if c < 1:
        raise ValueError(f"c must be >= 1, got {c}")
    result = c
    n = c
    p = 2
    while p * p <= n:
        if n % p == 0:
            while n % p == 0:
                n //= p
            result -= result // p
        p += 1 if p == 2 else 2
    if n > 1:
        result -= result // n
    return result


def divisor_count(n: int) -> int:
    """d(n): number of positive divisors."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    count = 0
    i = 1
    while i * i <= n:
        if n % i == 0:
            count += 1 if i * i == n else 2
        i += 1
    return count


def divisors(n: int) -> list[int]:
    """Sorted positive divisors of n >= 1."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    small, large = [], []
    i = 1
    while i * i <= n:
        if n % i == 0:
            small.append(i)
            if i * i != n:
                large.append(n // i)
        i += 1
    return small + large[::-1]


def divisor_sigma(exponent: complex, r: int) -> complex:
    """sigma_exponent(r) = sum_{d | |r|} d^exponent, r != 0.

    The exponent may be complex; real integer exponents give exact-ish
    integer results (plain float powers of ints).
    """
    if r == 0:
        raise ValueError("r must be nonzero")
    e = complex(exponent)
    total = 0j
    for d in divisors(abs(r)):
        if e == 0:
            total += 1
        else:
            total += complex(d) ** e
    if abs(total.imag) == 0.0:
        return complex(total.real, 0.0)
    return total


def mod_inverse(m: int, c: int) -> int:
    """Inverse of m modulo c, represented in 1..c.

    Raises NotInvertible when gcd(m, c) != 1.  For c = 1 every integer is
    congruent to 0, and 1 is returned as the canonical representative.
    """
    if c < 1:
        raise ValueError(f"c must be >= 1, got {c}")
    if c == 1:
        return 1
    if math.gcd(m, c) != 1:
        raise NotInvertible(f"{m} is not invertible mod {c}")
    inv = pow(m % c, -1, c)
    return inv if inv != 0 else c


@functools.lru_cache(maxsize=8192)
def unit_inverse_table(c: int) -> tuple[np.ndarray, np.ndarray]:
    """Arrays (units, inverses) of residues 1..c coprime to c.

    Inverses are computed as m^(phi(c)-1) mod c with vectorised
    square-and-multiply; both arrays use the 1..c representatives.
    """
    if c == 1:
        return np.array([1], dtype=np.int64), np.array([1], dtype=np.int64)
    m = np.arange(1, c + 1, dtype=np.int64)
    units = m[np.gcd(m, c) == 1]
    exp = euler_phi(c) - 1
    result = np.ones_like(units)
    base = units % c
    e = exp
    while e > 0:
        if e & 1:
            result = (result * base) % c
        base = (base * base) % c
        e >>= 1
    result[result == 0] = c
    return units, result


def ramanujan_sum(c: int, r: int) -> int:
    """Ramanujan sum C_c(r) by direct exponential summation."""
    if c < 1:
        raise ValueError(f"c must be >= 1, got {c}")
    units, _ = unit_inverse_table(c)
    phase = np.exp((2j * np.pi * (r % c) / c) * units)
    val = complex(np.sum(phase))
    nearest = round(val.real)
    if abs(val.imag) >= _INT_TOL or abs(val.real - nearest) >= _INT_TOL:
        raise PrecisionLoss(
            f"C_{c}({r}) = {val} deviates from an integer by >= {_INT_TOL}"
        )
    return int(nearest)


def kloosterman(p: KloostermanParams) -> complex:
    """Kloosterman sum K(a, b; c) = sum over units m of e((a m + b m*)/c)."""
    units, invs = unit_inverse_table(p.c)
    phase = np.exp((2j * np.pi / p.c) * (p.a * units + p.b * invs))
    return complex(np.sum(phase))


def kloosterman_abc(a: int, b: int, c: int) -> complex:
    return kloosterman(KloostermanParams(a, b, c))


def weil_bound(a: int, b: int, c: int) -> float:
    """Weil's estimate: |K(a,b;c)| <= sqrt(c) * min over the two arguments
    of sqrt(gcd) * d(c / gcd)."""
    ga = math.gcd(abs(a), c) if a != 0 else c
    gb = math.gcd(abs(b), c) if b != 0 else c
    bound_a = math.sqrt(ga) * divisor_count(c // ga)
    bound_b = math.sqrt(gb) * divisor_count(c // gb)
    return math.sqrt(c) * min(bound_a, bound_b)
