"""Scalar special functions behind the audit's p-values.

Self-contained double-precision implementations so the p-value path has
no dependency beyond the standard library:

- regularized incomplete beta I_x(a, b) via the modified-Lentz continued
  fraction, switching expansions at x = (a+1)/(a+b+2) for convergence;
- the Student-t tail probabilities it induces,
  P(|T| >= t) = I_{nu/(nu+t^2)}(nu/2, 1/2);
- the Kolmogorov survival function Q(x) = 2 sum_j (-1)^(j-1) exp(-2 j^2 x^2).
"""

from __future__ import annotations

import math

# Continued fraction stops when the last multiplicative delta is within
# this relative tolerance of 1.
_CF_RTOL = 1e-12
_CF_MAX_ITER = 500
_CF_TINY = 1e-300


def log_beta(a: float, b: float) -> float:
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def _beta_cont_fraction(a: float, b: float, x: float) -> float:
    """Continued fraction for I_x(a, b), evaluated by the modified Lentz scheme.

    Valid and fast for x < (a+1)/(a+b+2); the caller handles the symmetric
    regime through I_x(a, b) = 1 - I_{1-x}(b, a).
    """
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        # even step
        coef = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + coef * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + coef / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        h *= d * c
        # odd step
        coef = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + coef * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + coef / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_RTOL:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) = B(x; a, b) / B(a, b) for a, b > 0 and x in [0, 1]."""
    if a <= 0.0 or b <= 0.0:
        raise ValueError("shape parameters must be positive")
    if x < 0.0 or x > 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = a * math.log(x) + b * math.log1p(-x) - log_beta(a, b)
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cont_fraction(a, b, x) / a
    return 1.0 - front * _beta_cont_fraction(b, a, 1.0 - x) / b


def student_t_two_sided_p(t: float, df: float) -> float:
    """P(|T| >= |t|) for Student's t with df degrees of freedom.

    Exactly 1.0 at t = 0, since I_1(a, b) = 1.
    """
    if df <= 0:
        raise ValueError("degrees of freedom must be positive")
    if t == 0.0:
        return 1.0
    if not math.isfinite(t):
        return 0.0
    p = regularized_incomplete_beta(0.5 * df, 0.5, df / (df + t * t))
    return min(1.0, max(0.0, p))


def student_t_cdf(t: float, df: float) -> float:
    """P(T <= t) for Student's t with df degrees of freedom."""
    if df <= 0:
        raise ValueError("degrees of freedom must be positive")
    if t == 0.0:
        return 0.5
    tail = 0.5 * student_t_two_sided_p(t, df)
    return 1.0 - tail if t > 0 else tail


def kolmogorov_sf(x: float) -> float:
    """Survival function of the Kolmogorov distribution.

    Q(x) = 2 * sum_{j>=1} (-1)^(j-1) * exp(-2 j^2 x^2), summed until the
    next term is below double noise; Q(x) = 1 for x <= 0.
    """
    if x <= 0.0:
        return 1.0
    total = 0.0
    sign = 1.0
    for j in range(1, 400):
        term = 2.0 * math.exp(-2.0 * j * j * x * x)
        total += sign * term
        if term < 1e-17:
            break
        sign = -sign
    return min(1.0, max(0.0, total))
