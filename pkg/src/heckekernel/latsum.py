"""Direct truncated evaluation of the determinant-m lattice series.

The bilinear form is

    mu(gamma, z1, w) = c z1 w + d w - a z1 - b,      gamma = (a, b; c, d),

so the two kernels entering every series are mu1 = mu(gamma, z1, z2) and
mu2 = mu(gamma, z1, conj(z2)).  For c != 0 it factors as

    mu = [(c z1 + d)(c w - a) + m] / c.

Sums over the height ball max(|a|,|b|,|c|,|d|) <= H are organised as one
chunk per |c| value; each chunk is evaluated with numpy and the chunk
values are combined along a fixed-shape tree, making results independent
of the worker count.  Every series here pairs gamma with -gamma at equal
term value (all integrands have even total degree), so only c >= 0 is
enumerated and c > 0 chunks carry weight 2.
"""

from __future__ import annotations

import math
from typing import Callable, Iterator

import numpy as np

from .accumulate import chunked_sum, tree_sum
from .arith import unit_inverse_table
from .errors import NotConverged
from .types import EvalResult, IntMatrix2, TruncationPolicy, nonzero_imag, upper_half

_MARGIN = 0.1
_BLOCK = 1 << 18  # max grid elements processed at once inside a chunk


def mu(gamma: IntMatrix2, z1: complex, w: complex) -> complex:
    """c z1 w + d w - a z1 - b (the kernel's bilinear form)."""
    return gamma.c * z1 * w + gamma.d * w - gamma.a * z1 - gamma.b


def mu_factorized(gamma: IntMatrix2, z1: complex, w: complex) -> complex:
    """Same value through the c != 0 factorization (testing aid)."""
    if gamma.c == 0:
        raise ValueError("factorized form needs c != 0")
    c = gamma.c
    return ((c * z1 + gamma.d) * (c * w - gamma.a) + gamma.det) / c


def enumerate_matrices(m: int, H: int) -> Iterator[IntMatrix2]:
    """Every integer matrix with det = m and max |entry| <= H, exactly once."""
    if m < 1 or H < 1:
        raise ValueError("need m >= 1 and H >= 1")
    # c = 0: ad = m, b free
    for a in range(-H, H + 1):
        if a == 0 or m % a:
            continue
        d = m // a
        if abs(d) <= H:
            for b in range(-H, H + 1):
                yield IntMatrix2(a, b, 0, d)
    for c in range(-H, H + 1):
        if c == 0:
            continue
        cc = abs(c)
        for a in range(-H, H + 1):
            g = math.gcd(abs(a), cc) if a else cc
            if m % g:
                continue
            cg = cc // g
            if cg == 1:
                d_iter = range(-H, H + 1)  # congruence trivial mod 1
            else:
                inv = pow((a // g) % cg, -1, cg)
                d0 = ((m // g) * inv) % cg
                first = d0 - cg * ((d0 + H) // cg)
                d_iter = range(first, H + 1, cg)
            for d in d_iter:
                b, rem = divmod(a * d - m, c)
                if rem == 0 and abs(b) <= H:
                    yield IntMatrix2(a, b, c, d)


TermFn = Callable[[np.ndarray, np.ndarray], np.ndarray]


def xi_term_fn(n: int, s: float) -> TermFn:
    def fn(mu1, mu2):
        a = (mu1.real**2 + mu1.imag**2) * (mu2.real**2 + mu2.imag**2)
        if n == 0:
            return a ** (-s)
        return (np.conj(mu1) * np.conj(mu2)) ** n * a ** (-s)

    return fn


def omega_term_fn(k: int) -> TermFn:
    def fn(mu1, mu2):
        return mu2 ** (-k)

    return fn


def omega_n_term_fn(n: int, s: float) -> TermFn:
    def fn(mu1, mu2):
        a1 = mu1.real**2 + mu1.imag**2
        a2 = mu2.real**2 + mu2.imag**2
        num = np.conj(mu1) ** (n - 1) * np.conj(mu2) ** (n + 1)
        return num * a1 ** (1.0 - s) * a2 ** (-1.0 - s)

    return fn


def psi_term_fn(which: int, s: float) -> TermFn:
    def fn(mu1, mu2):
        a1 = mu1.real**2 + mu1.imag**2
        a2 = mu2.real**2 + mu2.imag**2
        if which == 1:
            return a1 ** (-s) * a2 ** (1.0 - s)
        return a1 ** (1.0 - s) * a2 ** (-s)

    return fn


def _c_zero_value(z1: complex, z2: complex, m: int, H: int, term_fn: TermFn) -> complex:
    """Sum over c = 0 matrices in the ball (with their negations)."""
    b = np.arange(-H, H + 1, dtype=np.float64)
    total = 0j
    for a in range(1, H + 1):
        if m % a:
            continue
        d = m // a
        if d < 1 or d > H:
            continue
        # mu for (a, b; 0, d): d w - a z1 - b; the pair (-a, -b; 0, -d)
        # contributes equally, hence the factor 2
        mu1 = d * z2 - a * z1 - b
        mu2 = d * np.conj(z2) - a * z1 - b
        total += 2.0 * complex(np.sum(term_fn(mu1, mu2)))
    return total


def _coprime_chunk_value(z1: complex, z2: complex, c: int, H: int, term_fn: TermFn) -> complex:
    """Sum over det-1 matrices with this c > 0 (and their negations).

    Vectorized over the whole slice: every a in [-H, H] coprime to c,
    d = a^(-1) mod c + c t, masked to the height ball.
    """
    z2b = complex(np.conj(np.complex128(z2)))
    a_all = np.arange(-H, H + 1, dtype=np.int64)
    res = a_all % c
    keep = np.gcd(res, c) == 1
    a_all = a_all[keep]
    if a_all.size == 0:
        return 0j
    units, invs = unit_inverse_table(c)
    inv_of = np.zeros(c, dtype=np.int64)
    inv_of[units % c] = invs
    d0 = inv_of[a_all % c]  # representative in 1..c of a^(-1) mod c
    t_lo = -((H + c) // c)
    t_hi = (H - 1) // c
    t = np.arange(t_lo, t_hi + 1, dtype=np.int64)
    vals = []
    max_rows = max(1, _BLOCK // max(1, t.size))
    for start in range(0, a_all.size, max_rows):
        a = a_all[start : start + max_rows, None].astype(np.float64)
        d = (d0[start : start + max_rows, None] + c * t[None, :]).astype(np.float64)
        b = (a * d - 1.0) / c
        mask = (np.abs(d) <= H) & (np.abs(b) <= H)
        if not mask.any():
            continue
        a_m = np.broadcast_to(a, mask.shape)[mask]
        d_m = d[mask]
        b_m = b[mask]
        mu1 = c * z1 * z2 + d_m * z2 - a_m * z1 - b_m
        mu2 = c * z1 * z2b + d_m * z2b - a_m * z1 - b_m
        vals.append(2.0 * complex(np.sum(term_fn(mu1, mu2))))
    return tree_sum(vals)


def _general_chunk_value(z1: complex, z2: complex, m: int, c: int, H: int, term_fn: TermFn) -> complex:
    """Slice sum for general determinant m (slower residue-by-residue path)."""
    z2b = complex(np.conj(np.complex128(z2)))
    vals = []
    for rho in range(1, c + 1):
        g = math.gcd(rho, c)
        if m % g:
            continue
        cg = c // g
        a_vals = np.arange(rho - c * ((rho + H) // c), H + 1, c, dtype=np.float64)
        if cg == 1:
            d_vals = np.arange(-H, H + 1, dtype=np.float64)
        else:
            inv = pow((rho // g) % cg if g > 1 else rho % cg, -1, cg)
            d0 = ((m // g) * inv) % cg
            d_vals = np.arange(d0 - cg * ((d0 + H) // cg), H + 1, cg, dtype=np.float64)
        if a_vals.size == 0 or d_vals.size == 0:
            continue
        max_rows = max(1, _BLOCK // d_vals.size)
        for start in range(0, a_vals.size, max_rows):
            a = a_vals[start : start + max_rows, None]
            d = d_vals[None, :]
            b = (a * d - m) / c  # integral: rho d0 = m (mod c) by construction
            mask = np.abs(b) <= H
            if not mask.any():
                continue
            a_m = np.broadcast_to(a, mask.shape)[mask]
            d_m = np.broadcast_to(d, mask.shape)[mask]
            b_m = b[mask]
            mu1 = c * z1 * z2 + d_m * z2 - a_m * z1 - b_m
            mu2 = c * z1 * z2b + d_m * z2b - a_m * z1 - b_m
            vals.append(2.0 * complex(np.sum(term_fn(mu1, mu2))))
    return tree_sum(vals)


def _c_chunk_value(z1: complex, z2: complex, m: int, c: int, H: int, term_fn: TermFn) -> complex:
    if m == 1:
        return _coprime_chunk_value(z1, z2, c, H, term_fn)
    return _general_chunk_value(z1, z2, m, c, H, term_fn)


def ball_sum(z1: complex, z2: complex, m: int, H: int, term_fn: TermFn, workers: int = 1) -> complex:
    """Sum term_fn(mu1, mu2) over all det-m matrices with height <= H."""

    def chunk(c: int) -> complex:
        if c == 0:
            return _c_zero_value(z1, z2, m, H, term_fn)
        return _c_chunk_value(z1, z2, m, c, H, term_fn)

    return chunked_sum(H + 1, chunk, workers=workers)


def _refined_ball_value(z1, z2, m, policy: TruncationPolicy, term_fn, decay: float):
    """Ball sum with the policy's refinement.

    The signed truncation error of the height ball behaves like
    alpha H^(-decay) (1 + O(1/H)); for slowly decaying sums the value is
    extrapolated on the model  S(h) = S + alpha h^(-decay) + beta
    h^(-decay-1)  through three heights, which stays independent of the
    Fourier-side closed forms.
    """
    H = policy.H
    if policy.refine == "none" or decay >= 3.0:
        v_half = ball_sum(z1, z2, m, max(8, H // 2), term_fn, policy.workers)
        v_full = ball_sum(z1, z2, m, H, term_fn, policy.workers)
        err = abs(v_full - v_half)
        return v_full, err
    if policy.refine == "lsq":
        # least-squares fit over six geometric heights; averages out the
        # oscillatory subleading structure of the sharp height cut
        heights = [max(8, int(H * (1.0 / 2.5) ** (1 - i / 5.0))) for i in range(6)]
        vals = [ball_sum(z1, z2, m, h, term_fn, policy.workers) for h in heights]
        A = np.vstack(
            [np.ones(len(heights)),
             [h ** (-decay) for h in heights],
             [h ** (-decay - 1.0) for h in heights]]
        ).T
        sol, *_ = np.linalg.lstsq(A, np.array(vals, dtype=np.complex128), rcond=None)
        fit = complex(sol[0])
        drop, *_ = np.linalg.lstsq(A[:-1], np.array(vals[:-1], dtype=np.complex128), rcond=None)
        err = abs(fit - complex(drop[0])) + 1e-3 * abs(fit - vals[-1])
        return fit, err
    heights = [max(8, H // 2), max(10, int(H / 2**0.5)), H]
    vals = [ball_sum(z1, z2, m, h, term_fn, policy.workers) for h in heights]
    extr3 = _power_law_limit(heights, vals, decay, 2)
    extr2 = _power_law_limit(heights[1:], vals[1:], decay, 1)
    err = abs(extr3 - extr2) + 1e-3 * abs(extr3 - vals[-1])
    return extr3, err


def _power_law_limit(heights, vals, p: float, n_corrections: int):
    """Solve S(h) = S + sum_j alpha_j h^(-p-j) for S (exact linear solve)."""
    k = len(heights)
    A = np.empty((k, k), dtype=np.float64)
    A[:, 0] = 1.0
    for j in range(1, k):
        A[:, j] = [h ** (-(p + j - 1)) for h in heights]
    sol = np.linalg.solve(A, np.array(vals, dtype=np.complex128))
    return complex(sol[0])


def _normalize_pair(z1: complex, z2: complex) -> tuple[complex, complex]:
    """Joint integer translation (z1 - k, z2 - k) with k = round(Re z2).

    The full sums are invariant under simultaneous integer shifts (the
    enumeration reindexes), so truncated values are computed at the
    canonical representative; shifted inputs then give bitwise-identical
    results and the height ball is better centered.
    """
    k = math.floor(z2.real + 0.5)
    return z1 - k, z2 - k


def _converged_result(value, err, policy, tol, warnings=()) -> EvalResult:
    scale = max(1.0, abs(value))
    if not math.isfinite(err) or err > 1000.0 * max(tol, 1e-12) * scale:
        raise NotConverged(
            f"err estimate {err:.3e} far above tolerance {tol:.1e} (|value| ~ {abs(value):.3e})"
        )
    return EvalResult(value=value, err_estimate=err, method="direct", policy=policy, warnings=warnings)


def omega_direct(z1: complex, z2: complex, k: int, m: int = 1,
                 policy: TruncationPolicy | None = None) -> EvalResult:
    """omega_m(z1, conj(z2), k) = sum over det-m matrices of mu2^(-k)."""
    z1 = upper_half(z1, "z1")
    z2 = upper_half(z2, "z2")
    if k < 4 or k % 2:
        raise ValueError("k must be an even integer >= 4")
    z1, z2 = _normalize_pair(z1, z2)
    policy = policy or TruncationPolicy()
    value, err = _refined_ball_value(z1, z2, m, policy, omega_term_fn(k), decay=k - 2.0)
    return _converged_result(value, err, policy, policy.tol)


def xi_direct(z1: complex, z2: complex, n: int, s: float,
              policy: TruncationPolicy | None = None) -> EvalResult:
    """Direct truncated Xi_n(z1, z2, s) over the height ball."""
    z1 = upper_half(z1, "z1")
    z2 = upper_half(z2, "z2")
    if n < 0:
        raise ValueError("n must be a nonnegative integer")
    z1, z2 = _normalize_pair(z1, z2)
    policy = policy or TruncationPolicy()
    warnings = ()
    if s <= (n + 1) / 2.0 + _MARGIN:
        warnings = ("NotAbsolutelyConvergent",)
    decay = 4.0 * s - 2.0 * n - 2.0
    value, err = _refined_ball_value(z1, z2, 1, policy, xi_term_fn(n, s), decay=decay)
    return _converged_result(value, err, policy, policy.tol, warnings)


def omega_n_direct(z1: complex, z2: complex, n: int, s: float,
                   policy: TruncationPolicy | None = None) -> EvalResult:
    """Omega_n(z1, conj(z2), s), the weight-2 regularization family."""
    z1 = upper_half(z1, "z1")
    z2 = upper_half(z2, "z2")
    z1, z2 = _normalize_pair(z1, z2)
    policy = policy or TruncationPolicy()
    warnings = ()
    if s <= 1.0 + _MARGIN:
        warnings = ("NotAbsolutelyConvergent",)
    decay = 4.0 * s - 2.0 * n - 2.0
    value, err = _refined_ball_value(z1, z2, 1, policy, omega_n_term_fn(n, s), decay=decay)
    return _converged_result(value, err, policy, policy.tol, warnings)


def psi_direct(which: int, z1: complex, z2: complex, s: float,
               policy: TruncationPolicy | None = None) -> EvalResult:
    """Psi^1 or Psi^2, the positive auxiliary sums (simple pole at s = 1)."""
    if which not in (1, 2):
        raise ValueError("which must be 1 or 2")
    z1 = upper_half(z1, "z1")
    z2 = upper_half(z2, "z2")
    z1, z2 = _normalize_pair(z1, z2)
    policy = policy or TruncationPolicy()
    warnings = ()
    if s <= 1.0 + _MARGIN:
        warnings = ("NotAbsolutelyConvergent",)
    decay = 4.0 * s - 4.0
    value, err = _refined_ball_value(z1, z2, 1, policy, psi_term_fn(which, s), decay=decay)
    return _converged_result(value, err, policy, policy.tol, warnings)


# ---------------------------------------------------------------------------
# c = 0 series and the c-sliced (k, l) window sums


def _hurwitz_tail(p: float, a: float, terms: int = 4) -> float:
    """sum_{nu >= a} nu^(-p) by Euler-Maclaurin (real p > 1, large a)."""
    total = a ** (1.0 - p) / (p - 1.0) + 0.5 * a ** (-p)
    bern = (1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0)
    rising = p
    fact = 2.0
    power = a ** (-p - 1.0)
    for j in range(1, terms + 1):
        if j > 1:
            rising *= (p + 2 * j - 3) * (p + 2 * j - 2)
            fact *= (2 * j - 1) * (2 * j)
            power /= a * a
        total += bern[j - 1] / fact * rising * power
    return total


def _binom_general(alpha: complex, j: int) -> complex:
    out = 1.0 + 0j
    for i in range(j):
        out *= (alpha - i) / (i + 1)
    return out


def _s_series_tail(z: complex, n: int, s: float, B: int, orders: int = 8) -> tuple[complex, float]:
    """Analytic tail sum_{|nu| > B} of the S_n summand, via the 1/nu
    expansion and Hurwitz-zeta tails; returns (tail, error_bound)."""
    zb = np.conj(np.complex128(z)).item()
    coef_plus = []
    for mth in range(orders + 2):
        acc = 0j
        for j in range(mth + 1):
            acc += _binom_general(n - s, j) * _binom_general(-s, mth - j) * zb**j * z ** (mth - j)
        coef_plus.append(acc)
    tail = 0j
    a = float(B + 1)
    for mth in range(orders + 1):
        h = _hurwitz_tail(2.0 * s - n + mth, a)
        tail += coef_plus[mth] * h
        tail += (-1.0) ** (n + mth) * coef_plus[mth] * h
    err = 2.0 * abs(coef_plus[orders + 1]) * _hurwitz_tail(2.0 * s - n + orders + 1, a)
    return tail, err


def s_series_direct(z: complex, n: int, s: float,
                    policy: TruncationPolicy | None = None) -> EvalResult:
    """S_n(z, 0, s) = sum over nu in Z of (conj(z) + nu)^n / |z + nu|^(2s)."""
    z = nonzero_imag(z)
    policy = policy or TruncationPolicy()
    warnings = ()
    if s <= (n + 1) / 2.0 + _MARGIN:
        warnings = ("NotAbsolutelyConvergent",)
    B = policy.B
    nu = np.arange(-B, B + 1, dtype=np.float64)
    base = np.conj(np.complex128(z)) + nu
    abs2 = (z.real + nu) ** 2 + z.imag**2
    if n == 0:
        terms = abs2 ** (-s)
    else:
        terms = base**n * abs2 ** (-s)
    value = complex(np.sum(terms))
    tail, tail_err = _s_series_tail(z, n, s, B)
    value += tail
    err = tail_err + 2e-16 * float(np.sum(np.abs(terms)))
    return _converged_result(value, err, policy, policy.tol, warnings)


def xi0_direct(z1: complex, z2: complex, n: int, s: float,
               policy: TruncationPolicy | None = None) -> EvalResult:
    """The c = 0 subsum: 2 sum over b in Z of the (1, b; 0, 1) term.

    The printed form of this subsum folds b with -b at equal value, which
    only holds on symmetric points; the exact subsum is kept (it is the
    one the full enumeration reproduces) and equals the printed one there.
    """
    z1 = upper_half(z1, "z1")
    z2 = upper_half(z2, "z2")
    policy = policy or TruncationPolicy()
    warnings = ()
    if s <= (2.0 * n + 1.0) / 4.0 + _MARGIN:
        warnings = ("NotAbsolutelyConvergent",)
    B = policy.B
    b = np.arange(-B, B + 1, dtype=np.float64)
    w1 = z2 - z1 - b
    w2 = np.conj(np.complex128(z2)) - z1 - b
    abs2 = (w1.real**2 + w1.imag**2) * (w2.real**2 + w2.imag**2)
    if n == 0:
        terms = abs2 ** (-s)
    else:
        terms = (np.conj(w1) * np.conj(w2)) ** n * abs2 ** (-s)
    value = 2.0 * complex(np.sum(terms))
    # both b tails behave like b^(2n - 4s): Euler-Maclaurin on the product form
    tail, tail_err = _xi0_tail(z1, z2, n, s, B)
    value += 2.0 * tail
    err = 2.0 * tail_err + 2e-16 * float(np.sum(np.abs(terms)))
    return _converged_result(value, err, policy, policy.tol, warnings)


def _xi0_tail(z1: complex, z2: complex, n: int, s: float, B: int) -> tuple[complex, float]:
    """Euler-Maclaurin tail of the b-sum beyond |b| = B: integral via a
    1/b substitution plus the endpoint and first-derivative corrections."""
    w = z2 - z1
    wt = np.conj(np.complex128(z2)).item() - z1

    def t(bv: float) -> complex:
        w1 = w - bv
        w2 = wt - bv
        a2 = (w1.real**2 + w1.imag**2) * (w2.real**2 + w2.imag**2)
        return (np.conj(w1) * np.conj(w2)) ** n * a2 ** (-s) if n else a2 ** (-s)

    def dt(bv: float, h: float = 1.0) -> complex:
        return (t(bv + h) - t(bv - h)) / (2.0 * h)

    tail = 0j
    err = 0.0
    for sign in (1.0, -1.0):
        a = float(B + 1)

        def f(x):
            return t(sign * x)

        # integral int_a^inf f via the 1/x substitution and Gauss-Legendre
        nodes, weights = np.polynomial.legendre.leggauss(48)
        u = 0.5 * (nodes + 1.0)
        du = 0.5 * weights
        x = a / u
        vals = np.array([f(xx) for xx in x])
        integral = complex(np.sum(vals * (a / u**2) * du))
        tail += integral + 0.5 * f(a) - dt(sign * a) * sign / 12.0
        err += abs(f(a)) / a  # conservative next-order bound
    return tail, err


def xic_direct(z1: complex, z2: complex, n: int, s: float,
               policy: TruncationPolicy | None = None, shifted: bool = False,
               ball_mask: bool | None = None) -> EvalResult:
    """The c > 0 part, c-sliced over (a0, k, l) windows.

    Unshifted sums the true kernel terms and defaults to the height-ball
    mask (so xi0 + 2 xic reproduces xi_direct at matched cutoffs);
    shifted drops the m/c offset of both kernels (the series whose Fourier
    expansion is assembled in closed form) on plain rectangular windows.
    """
    z1 = upper_half(z1, "z1")
    z2 = upper_half(z2, "z2")
    policy = policy or TruncationPolicy()
    if ball_mask is None:
        ball_mask = not shifted
    warnings = ()
    if s <= (n + 1) / 2.0 + _MARGIN:
        warnings = ("NotAbsolutelyConvergent",)
    term_fn = xi_term_fn(n, s)
    C = min(policy.C, policy.H) if ball_mask else policy.C

    def chunk(idx: int) -> complex:
        c = idx + 1
        return xic_slice(z1, z2, c, n, s, policy.H, term_fn, shifted=shifted, ball_mask=ball_mask)

    value = chunked_sum(C, chunk, workers=policy.workers)
    last = xic_slice(z1, z2, C, n, s, policy.H, term_fn, shifted=shifted, ball_mask=ball_mask)
    err = abs(last) * C / 2.0 + policy.tol * 1e-3
    return _converged_result(value, err, policy, policy.tol, warnings)


def xic_slice(z1: complex, z2: complex, c: int, n: int, s: float, K: int,
              term_fn: TermFn | None = None, shifted: bool = False,
              ball_mask: bool = False, m: int = 1) -> complex:
    """One c-slice of the c > 0 sum over the (a0, k, l) parametrization:
    a = -a0 + c k, d = d0 + c l with a0 d0 = -m (mod c)."""
    term_fn = term_fn or xi_term_fn(n, s)
    units, invs = unit_inverse_table(c)
    # d0 is the 1..c representative of -m a0^(-1) (mod c)
    d0 = (-m * invs) % c
    d0[d0 == 0] = c
    if ball_mask:
        # |a| = |-a0 + c k| <= K already bounds |k| by (K + c) / c
        kw = (K + c) // c + 1
    else:
        kw = K
    kk = np.arange(-kw, kw + 1, dtype=np.float64)
    z2b = complex(np.conj(np.complex128(z2)))
    total = []
    max_rows = max(1, _BLOCK // max(1, kk.size**2))
    for start in range(0, units.size, max_rows):
        a0 = units[start : start + max_rows].astype(np.float64)[:, None]
        dd = d0[start : start + max_rows].astype(np.float64)[:, None]
        if ball_mask:
            k_off = np.zeros_like(a0)
            l_off = np.zeros_like(dd)
        else:
            # center the windows on the points so integer shifts of z1, z2
            # are exact reindexings of the truncated sum
            k_off = np.round(z2.real + a0 / c)
            l_off = np.round(-z1.real - dd / c)
        u = (z1 + dd / c + l_off) + kk[None, :]  # z1 + d/c, axis 1 = l
        v = (z2 + a0 / c - k_off) - kk[None, :]  # z2 - a/c, axis 1 = k
        vb = (z2b + a0 / c - k_off) - kk[None, :]
        mu1 = c * u[:, :, None] * v[:, None, :]
        mu2 = c * u[:, :, None] * vb[:, None, :]
        if not shifted:
            mu1 = mu1 + m / c
            mu2 = mu2 + m / c
        vals = term_fn(mu1, mu2)
        if ball_mask:
            a = -a0 + c * kk[None, :]  # axis 1 = k
            d = dd + c * kk[None, :]  # axis 1 = l
            b = (d[:, :, None] * a[:, None, :] - m) / c
            mask = (
                (np.abs(d) <= K)[:, :, None]
                & (np.abs(a) <= K)[:, None, :]
                & (np.abs(b) <= K)
            )
            vals = np.where(mask, vals, 0.0)
        total.append(complex(np.sum(vals)))
    return tree_sum(total)
