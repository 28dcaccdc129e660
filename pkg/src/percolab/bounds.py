"""Closed-form bound evaluators and constant-existence sweeps.

Combinatorial quantities (multiset orderings, multinomials, dyadic power
products) are computed exactly with big integers / rationals; floating point
enters only through exp/log.  "Existence of a constant" claims are turned
into fitted suprema over finite sweeps, reported rather than asserted against
invented targets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from fractions import Fraction
from typing import Callable

ONE_ARM_EXPONENT = Fraction(5, 48)
TAIL_SHAPE_EXPONENT = Fraction(96, 5)  # == 2 / ONE_ARM_EXPONENT
assert TAIL_SHAPE_EXPONENT == 2 / ONE_ARM_EXPONENT


@dataclass(frozen=True)
class BoundParams:
    """Named constants feeding the bound evaluators.

    All constants are optional; evaluators raise ``ValueError`` naming any
    missing ones.  ``provenance`` records, per constant, whether the value was
    fitted from data or supplied externally.
    """

    d: int = 2
    alpha: float | None = None
    c1: float | None = None
    c2: float | None = None
    c3: float | None = None
    c4: float | None = None
    C1: float | None = None
    C2: float | None = None
    C3: float | None = None
    C4: float | None = None
    C5: float | None = None
    C6: float | None = None
    C7: float | None = None
    C8: float | None = None
    C9: float | None = None
    C10: float | None = None
    C11: float | None = None
    C12: float | None = None
    C13: float | None = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.d < 2:
            raise ValueError("d must be >= 2")
        if self.alpha is not None and not 0 < self.alpha < self.d:
            raise ValueError("alpha must satisfy 0 < alpha < d")
        for f in fields(self):
            if f.name in ("d", "alpha", "provenance"):
                continue
            v = getattr(self, f.name)
            if v is not None and v < 0:
                raise ValueError(f"constant {f.name} must be nonnegative")

    def require(self, *names: str) -> list[float]:
        out = []
        for name in names:
            v = getattr(self, name)
            if v is None:
                raise ValueError(f"missing constant {name}")
            out.append(v)
        return out


def _pi_callable(pi) -> Callable[[int], float]:
    if pi is None:
        raise ValueError("missing arm-probability table or function")
    if callable(pi):
        return pi
    return lambda s: pi.pi(s)


def int_root_ceil(k: int, d: int) -> int:
    """Smallest integer s with s**d >= k."""
    if k < 1:
        raise ValueError("k must be >= 1")
    s = max(1, int(round(k ** (1.0 / d))))
    while s**d >= k:
        s -= 1
    while s**d < k:
        s += 1
    return s


def scale_floor(n: int, u: float) -> int:
    """Discretized scale n/u: floor, clamped to >= 1."""
    return max(1, int(n / u))


# ---------------------------------------------------------------------------
# Tail-bound evaluators


def bcks_bound(x: float, params: BoundParams) -> float:
    """Exponential tail bound c1 * exp(-c2 * x)."""
    if x < 0:
        raise ValueError("x must be >= 0")
    c1, c2 = params.require("c1", "c2")
    return c1 * math.exp(-c2 * x)


def main_bounds(u: float, params: BoundParams, lower: bool = True) -> tuple[float, float | None]:
    """Stretched-exponential pair (upper, lower) at argument u.

    The lower bound is two-dimensional only; requesting it with d != 2 is an
    error.  Pass ``lower=False`` to evaluate just the upper bound.
    """
    if u < 1:
        raise ValueError("u must be >= 1")
    c1, c2 = params.require("c1", "c2")
    up = c1 * math.exp(-c2 * u**params.d)
    if not lower:
        return up, None
    if params.d != 2:
        raise ValueError("lower bound is defined for d = 2 only")
    c3, c4 = params.require("c3", "c4")
    return up, c3 * math.exp(-c4 * u**2)


def moment_bound(n: int, k: int, pi, params: BoundParams) -> float:
    """Binomial-moment bound (c1 * n^d * pi(n / ceil(k^(1/d))) / k)^k."""
    if k < 1:
        raise ValueError("k must be >= 1")
    (c1,) = params.require("c1")
    f = _pi_callable(pi)
    scale = scale_floor(n, int_root_ceil(k, params.d))
    return (c1 * n**params.d * f(scale) / k) ** k


def sum_pi_bound(pi, n: int, d: int) -> float:
    """Empirical constant sum_{k<=n} k^(d-1) pi(k) / (n^d pi(n))."""
    f = _pi_callable(pi)
    total = sum(k ** (d - 1) * f(k) for k in range(1, n + 1))
    denom = n**d * f(n)
    if denom <= 0:
        raise ValueError("pi(n) must be positive")
    return total / denom


def triangular_tail(x: float, params: BoundParams) -> tuple[float, float]:
    """Tail-shape pair with the 96/5 exponent (2 over the one-arm 5/48)."""
    if x <= 0:
        raise ValueError("x must be > 0")
    c1, c2, c3, c4 = params.require("c1", "c2", "c3", "c4")
    e = float(TAIL_SHAPE_EXPONENT)
    return c1 * math.exp(-c2 * x**e), c3 * math.exp(-c4 * x**e)


# ---------------------------------------------------------------------------
# Generating-function step


def _gen_fn_series(u: float, params: BoundParams) -> float:
    """Two-piece series bound on E t^{|V_n|} after the substitution for t."""
    (c2v,) = params.require("C2")
    if params.alpha is None:
        raise ValueError("missing constant alpha")
    a_over_d = params.alpha / params.d
    if not a_over_d < 1:
        raise AssertionError("series requires alpha < d")
    ud = u**params.d
    cut = int(ud / c2v)
    total = 1.0  # k = 0 term
    for k in range(1, cut + 1):
        total += (ud / (c2v * k)) ** k
    k = cut + 1
    while True:
        term = (ud / k) ** ((1 - a_over_d) * k)
        total += term
        # terms may grow until k ~ u^d; only trust the cutoff past that point
        if k > ud and term < 1e-16 * total:
            break
        if term == 0.0:
            break
        k += 1
        if k > 10_000_000:
            raise RuntimeError("series truncation failed to converge")
    return total


def fit_c9(params: BoundParams, n: int, grid: list[float] | None = None) -> float:
    """Max ratio of the series to exp(u^d / C2) over a u-grid in [1, n]."""
    (c2v,) = params.require("C2")
    if grid is None:
        grid = [1.0 + i * (min(n, 6.0) - 1.0) / 24.0 for i in range(25)]
    best = 0.0
    for u in grid:
        ratio = _gen_fn_series(u, params) / math.exp(u**params.d / c2v)
        best = max(best, ratio)
    return best


def generating_fn_bound(u: float, n: int, params: BoundParams, pi=None) -> tuple[float, float]:
    """(series value, closed-form comparator C9 * exp(u^d / C2)).

    C9 is fitted as the max series/exponential ratio on a documented u-grid;
    the ``pi`` argument is accepted for interface symmetry (the series itself
    is pi-free after the substitution).
    """
    if not 1 <= u <= n:
        raise ValueError("u must lie in [1, n]")
    (c2v,) = params.require("C2")
    c9 = params.C9 if params.C9 is not None else fit_c9(params, n)
    return _gen_fn_series(u, params), c9 * math.exp(u**params.d / c2v)


def fit_c10(params: BoundParams) -> float:
    """Exponent constant from the decreasing map x -> (1+x)^(1/x).

    x = u^d / (C2 C8 n^d pi(n/u)) is at most xmax = 1/(C2^2 C8); the fitted
    constant is log(1+xmax)/xmax / (C2 C8).
    """
    c2v, c8 = params.require("C2", "C8")
    xmax = 1.0 / (c2v**2 * c8)
    return math.log1p(xmax) / xmax / (c2v * c8)


def markov_threshold_bound(u: float, n: int, K: float, params: BoundParams, pi) -> float:
    """Ratio of t^{K n^d pi(n/u)} to exp(C10 K u^d); >= 1 for the fitted C10."""
    if not 1 <= u <= n:
        raise ValueError("u must lie in [1, n]")
    c2v, c8 = params.require("C2", "C8")
    f = _pi_callable(pi)
    pin_u = f(scale_floor(n, u))
    base = n**params.d * pin_u
    x = u**params.d / (c2v * c8 * base)
    c10 = params.C10 if params.C10 is not None else fit_c10(params)
    log_lhs = K * base * math.log1p(x)
    log_rhs = c10 * K * u**params.d
    return math.exp(log_lhs - log_rhs)


# ---------------------------------------------------------------------------
# Exact combinatorial constants


def _dyadic_level(k: int, d: int) -> int:
    """Largest j with 2^(d j) <= k."""
    j = 0
    while 2 ** (d * (j + 1)) <= k:
        j += 1
    return j


def _partition(k: int, d: int) -> tuple[list[int], int, int]:
    """Multinomial parts: (2^d - 1) 2^(d i) for i < j, plus remainder m.

    The remainder is m = k - 2^(d j), which makes the parts sum to k - 1.
    """
    j = _dyadic_level(k, d)
    parts = [(2**d - 1) * 2 ** (d * i) for i in range(j)]
    m = k - 2 ** (d * j)
    if m < 0 or sum(parts) + m != k - 1:
        raise AssertionError("invalid partition")
    return parts, m, j


def multinomial_constant(k: int, d: int) -> tuple[int, float]:
    """Exact dyadic-block multinomial and the implied per-merge constant.

    Returns (value, value^(1/(k-1))): value = (k-1)! / (prod parts! * m!).
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    parts, m, _ = _partition(k, d)
    value = math.factorial(k - 1)
    for p in parts:
        value //= math.factorial(p)
    value //= math.factorial(m)
    fit = math.exp(math.log(value) / (k - 1)) if value > 1 else 1.0
    return value, fit


def multinomial_sweep(kmax: int, d: int) -> tuple[float, int]:
    """Sup of the fitted constant over 2 <= k <= kmax (exact incremental)."""
    best, best_k = 0.0, 2
    value = None
    for k in range(2, kmax + 1):
        parts, m, j = _partition(k, d)
        if value is None or m == 0:
            value = math.factorial(k - 1)
            for p in parts:
                value //= math.factorial(p)
            value //= math.factorial(m)
        else:
            # same dyadic level: only the remainder grew by one
            value = value * (k - 1) // m
        fit = math.exp(math.log(value) / (k - 1)) if value > 1 else 1.0
        if fit > best:
            best, best_k = fit, k
    return best, best_k


def _power_product_exponent(k: int, d: int) -> tuple[int, int, int]:
    parts, m, j = _partition(k, d)
    e = m * (j - 1) * d
    for i in range(1, j):
        e += d * i * (2**d - 1) * 2 ** (i * d)
    return e, m, j


def power_product_constant(k: int, d: int) -> tuple[Fraction, float]:
    """Exact dyadic power product and the implied per-point constant.

    Value is 2^(-m (j-1) d) * prod_{i<j} 2^(-d i (2^d - 1) 2^(i d)); the
    second component is (value * k^k)^(1/k).
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    e, _, _ = _power_product_exponent(k, d)
    value = Fraction(1, 2**e) if e >= 0 else Fraction(2**-e)
    log_ratio = k * math.log(k) - e * math.log(2)
    return value, math.exp(log_ratio / k)


def power_product_sweep(kmax: int, d: int) -> tuple[float, int]:
    """Sup of (value * k^k)^(1/k) over 2 <= k <= kmax (log-exact)."""
    best, best_k = 0.0, 2
    for k in range(2, kmax + 1):
        e, _, _ = _power_product_exponent(k, d)
        fit = math.exp(math.log(k) - e * math.log(2) / k)
        if fit > best:
            best, best_k = fit, k
    return best, best_k
