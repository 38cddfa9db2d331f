"""Upper incomplete gamma functions at the two orders the closed form needs.

Gamma(0, x) is the exponential integral E1(x); Gamma(-1, x) follows from the
recurrence Gamma(s+1, x) = s Gamma(s, x) + x^s e^{-x} at s = -1.  Both are
strictly positive and strictly decreasing on x > 0.

Algorithm split: alternating series for x < 1, modified Lentz continued
fraction for x >= 1.  The recurrence for Gamma(-1, x) loses roughly one digit
per factor of x to cancellation, so beyond x = 30 the continued fraction is
evaluated directly at order -1 instead.
"""

import math

EULER_GAMMA = 0.5772156649015328606

_SERIES_MAX_TERMS = 200
_LENTZ_MAX_ITER = 400
_LENTZ_EPS = 1e-16
_LENTZ_TINY = 1e-300
# recurrence cancellation grows ~linearly in x; switch well before it bites
_RECURRENCE_LIMIT = 30.0


def _check_arg(x):
    if not isinstance(x, (int, float)) or isinstance(x, bool):
        x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise ValueError(f"argument must be a finite positive real, got {x!r}")
    return float(x)


def _e1_series(x):
    # E1(x) = -euler_gamma - ln x + sum_{n>=1} (-1)^{n+1} x^n / (n n!)
    total = -EULER_GAMMA - math.log(x)
    term = 1.0
    for n in range(1, _SERIES_MAX_TERMS + 1):
        term *= -x / n
        delta = -term / n
        total += delta
        if abs(delta) < _LENTZ_EPS * abs(total):
            return total
    raise ArithmeticError(f"series for Gamma(0, {x}) did not converge")


def _lentz_cf(a, x):
    # Gamma(a, x) = e^{-x} x^a * CF, CF per modified Lentz:
    # b_0 = x + 1 - a, a_i = -i (i - a), b_i = b_{i-1} + 2
    b = x + 1.0 - a
    c = 1.0 / _LENTZ_TINY
    d = 1.0 / b
    h = d
    for i in range(1, _LENTZ_MAX_ITER + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _LENTZ_TINY:
            d = _LENTZ_TINY
        c = b + an / c
        if abs(c) < _LENTZ_TINY:
            c = _LENTZ_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _LENTZ_EPS:
            prefactor = math.exp(-x + a * math.log(x))
            return prefactor * h
    raise ArithmeticError(f"continued fraction for Gamma({a}, {x}) did not converge")


def _lentz_cf_scaled(a, x):
    # same continued fraction, returning e^{x} Gamma(a, x) = x^a * CF
    b = x + 1.0 - a
    c = 1.0 / _LENTZ_TINY
    d = 1.0 / b
    h = d
    for i in range(1, _LENTZ_MAX_ITER + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _LENTZ_TINY:
            d = _LENTZ_TINY
        c = b + an / c
        if abs(c) < _LENTZ_TINY:
            c = _LENTZ_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _LENTZ_EPS:
            return math.exp(a * math.log(x)) * h
    raise ArithmeticError(f"continued fraction for Gamma({a}, {x}) did not converge")


def upper_gamma_zero(x):
    """Gamma(0, x) = integral_x^inf t^{-1} e^{-t} dt for x > 0.

    Returns exact 0.0 when e^{-x} underflows to zero.
    """
    x = _check_arg(x)
    if math.exp(-x) == 0.0:
        return 0.0
    if x < 1.0:
        return _e1_series(x)
    return _lentz_cf(0.0, x)


def upper_gamma_neg1(x):
    """Gamma(-1, x) = x^{-1} e^{-x} - Gamma(0, x) for x > 0.

    Evaluated through the recurrence for x <= 30 and by the continued
    fraction at order -1 beyond that, where the recurrence terms agree to
    ~1/x and would cancel catastrophically.  Returns exact 0.0 on underflow.
    """
    x = _check_arg(x)
    if math.exp(-x) == 0.0:
        return 0.0
    if x <= _RECURRENCE_LIMIT:
        return math.exp(-x) / x - upper_gamma_zero(x)
    return _lentz_cf(-1.0, x)


def upper_gamma_zero_scaled(x):
    """e^{x} Gamma(0, x), stable for all x > 0 (no underflow at large x)."""
    x = _check_arg(x)
    if x < 1.0:
        return math.exp(x) * _e1_series(x)
    return _lentz_cf_scaled(0.0, x)


def upper_gamma_neg1_scaled(x):
    """e^{x} Gamma(-1, x) = 1/x - e^{x} Gamma(0, x), same split as unscaled."""
    x = _check_arg(x)
    if x <= _RECURRENCE_LIMIT:
        return 1.0 / x - upper_gamma_zero_scaled(x)
    return _lentz_cf_scaled(-1.0, x)
