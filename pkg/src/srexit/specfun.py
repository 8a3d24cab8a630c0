"""Special functions behind the exit-time formulas.

Everything is evaluated in double precision. Confluent hypergeometric
functions accept complex parameters because the second Whittaker index turns
purely imaginary once an eigenvalue candidate drops below ``-mu**2/8``.

Routing for Tricomi's ``U(a, b, z)``:

* ``a`` or ``a - b + 1`` a nonpositive integer: terminating polynomial;
* large ``z``: the asymptotic series, when it converges to machine precision;
* small ``z``: the two-term connection formula in Kummer's ``M``, with
  Richardson extrapolation over ``b +- eps`` when ``b`` sits on an integer;
* otherwise: the Laplace-type integral, shifted with the three-term
  recurrence in ``a`` so the integral always has ``Re(a) >= 1``.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import chebyshev as cheb
from scipy import integrate, special

from .errors import ConvergenceError, DegenerateParameterError, DomainError, SymmetryError

__all__ = [
    "EvalAccuracy",
    "DEFAULT_ACCURACY",
    "exp_integral_e1",
    "scaled_e1",
    "kummer_m",
    "tricomi_u",
    "tricomi_u_scaled",
    "whittaker_w",
    "whittaker_m",
    "meijer_g3123",
    "meijer_g3123_alt",
    "l_func",
]


@dataclass(frozen=True)
class EvalAccuracy:
    """Tolerances for series truncation and adaptive quadrature.

    ``quad_max_depth`` caps the number of bisections the adaptive integrator
    may perform (QUADPACK's subinterval limit).
    """

    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_terms: int = 500
    quad_max_depth: int = 40

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("tolerances must be strictly positive")
        if self.max_terms < 1 or self.quad_max_depth < 1:
            raise DomainError("max_terms and quad_max_depth must be >= 1")


DEFAULT_ACCURACY = EvalAccuracy()

# Past this point e**x * E1(x) is summed from its asymptotic series.
_E1_ASYMPTOTIC_FROM = 50.0
# Split point between adaptive quadrature and the analytic tail of G.
_G_SPLIT = 50.0

_EPS = 2.0**-52
_SERIES_STOP = 1e-17
_HALF_PRECISION_LOSS = 1e8

# U(a, b, z) routing thresholds in z.
_U_CONNECTION_MAX_Z = 3.0
_U_ASYMPTOTIC_MIN_Z = 15.0

# Integer-b guard for the connection formula. The two terms cancel to about
# dist(b, n) relative near an integer n, so inside the guard U is sampled at
# Chebyshev nodes on [n - 2g, n + 2g] (none closer to n than ~0.2 g) and
# interpolated back to b. Both widths shrink like 1/|log z| because
# z**(1-b) sets the scale on which U varies with b.
_B_GUARD = 0.1
_B_NODES_HALF_WIDTH = 0.5
_CHEB_NODES = 16
_EXTRAPOLATION_AGREEMENT = 1e-7


def _positive(x, name="x"):
    x = float(x)
    if not x > 0 or not math.isfinite(x):
        raise DomainError(f"{name} must be a finite positive number, got {x!r}")
    return x


def _nonpositive_integer(v):
    """Return ``-n`` if ``v`` is exactly a nonpositive integer, else None."""
    v = complex(v)
    if v.imag != 0.0:
        return None
    r = v.real
    if r <= 0 and r == math.floor(r):
        return int(r)
    return None


# ---------------------------------------------------------------------------
# Exponential integral
# ---------------------------------------------------------------------------

def exp_integral_e1(x):
    """E1(x) = integral of exp(-y)/y over [x, inf)."""
    x = _positive(x)
    return float(special.exp1(x))


def scaled_e1(x):
    """``exp(x) * E1(x)`` without overflow for large ``x``."""
    x = _positive(x)
    if x < _E1_ASYMPTOTIC_FROM:
        return math.exp(x) * float(special.exp1(x))
    # sum (-1)^k k! / x^(k+1); terms shrink until k ~ x, far past the cutoff
    term = 1.0 / x
    total = term
    k = 1
    while abs(term) > _SERIES_STOP * total:
        term *= -k / x
        total += term
        k += 1
    return total


# ---------------------------------------------------------------------------
# Kummer M
# ---------------------------------------------------------------------------

def _check_kummer_b(b):
    b = complex(b)
    n = round(b.real)
    if n <= 0 and abs(b - n) < 1e-9:
        raise DomainError(f"Kummer M undefined for b near nonpositive integer {n}")


def _m_series(a, b, z, max_terms):
    """Direct power series; returns (value, loss factor, converged)."""
    s = t = 1.0 + 0j
    peak = 1.0
    for k in range(max_terms):
        t *= (a + k) / (b + k) * z / (k + 1)
        s += t
        at = abs(t)
        if at > peak:
            peak = at
        if at == 0.0:
            return s, peak / max(abs(s), 1e-300), True
        if at <= _SERIES_STOP * abs(s):
            nxt = abs((a + k + 1) * z) / abs((b + k + 1) * (k + 2))
            if nxt < 0.5:
                return s, peak / abs(s), True
    return s, peak / max(abs(s), 1e-300), False


def _asymptotic_sum(p, q, w, max_terms):
    """Sum of (p)_s (q)_s / s! * w**s until the terms hit machine precision.

    Returns None if the terms start growing first.
    """
    total = term = 1.0 + 0j
    prev = 1.0
    for s in range(max_terms):
        term *= (p + s) * (q + s) / (s + 1) * w
        if term == 0:
            return total
        total += term
        at = abs(term)
        if at <= _SERIES_STOP * abs(total):
            return total
        if at > prev and s > 2:
            return None
        prev = at
    return None


def _m_asymptotic_scaled(a, b, z, max_terms):
    """``exp(-z) * M(a, b, z)`` from the large-z expansion, or None."""
    s1 = _asymptotic_sum(1 - a, b - a, 1.0 / z, max_terms)
    s2 = _asymptotic_sum(a, a - b + 1, -1.0 / z, max_terms)
    if s1 is None or s2 is None:
        return None
    lz = math.log(z)
    gb = special.gamma(b)
    dominant = cmath.exp((a - b) * lz) * special.rgamma(a) * s1
    # recessive part; cos(pi a) is the real-axis average of the two Stokes branches
    recessive = cmath.cos(math.pi * a) * cmath.exp(-z - a * lz) * special.rgamma(b - a) * s2
    return gb * (dominant + recessive)


def _kummer_scaled(a, b, z, acc):
    """Return ``exp(-z) * M(a, b, z)`` choosing series or asymptotics."""
    if z < 700.0:
        val, loss, ok = _m_series(a, b, z, acc.max_terms)
        if ok and loss < _HALF_PRECISION_LOSS:
            return val * math.exp(-z)
    else:
        val, ok = None, False
    if z > 0:
        asym = _m_asymptotic_scaled(a, b, z, acc.max_terms)
        if asym is not None:
            return asym
    if not ok:
        raise ConvergenceError(
            f"Kummer M({a}, {b}, {z}) did not converge in {acc.max_terms} terms")
    return val * math.exp(-z)


def kummer_m(a, b, z, acc=DEFAULT_ACCURACY):
    """Confluent hypergeometric function 1F1(a; b; z) for real ``z``.

    The power series is used unless it fails to converge or cancels away more
    than half the working digits, in which case the large-z expansion takes
    over.
    """
    _check_kummer_b(b)
    a = complex(a)
    b = complex(b)
    z = float(z)
    if not math.isfinite(z):
        raise DomainError("z must be finite")
    if z <= 0:
        val, loss, ok = _m_series(a, b, z, acc.max_terms)
        if not ok or loss > 1e3:
            # Kummer's transformation moves the argument to the positive axis
            return cmath.exp(z) * kummer_m(b - a, b, -z, acc)
        return val
    if z > 709.0:
        raise ConvergenceError(f"Kummer M overflows double precision at z={z}")
    return _kummer_scaled(a, b, z, acc) * math.exp(z)


# ---------------------------------------------------------------------------
# Tricomi U
# ---------------------------------------------------------------------------

def _u_polynomial(m, b, z):
    """U(-m, b, z) = (-1)^m sum_s C(m, s) (b+s)_(m-s) (-z)^s."""
    total = 0j
    for s in range(m + 1):
        poch = 1.0 + 0j
        for j in range(m - s):
            poch *= b + s + j
        total += math.comb(m, s) * poch * (-z) ** s
    return (-1) ** m * total


def _u_connection(a, b, z, acc):
    a, b = complex(a), complex(b)
    lz = math.log(z)
    first = special.gamma(1 - b) * special.rgamma(a - b + 1) * kummer_m(a, b, z, acc)
    second = (cmath.exp(special.loggamma(b - 1) + (1 - b) * lz) * special.rgamma(a)
              * kummer_m(a - b + 1, 2 - b, z, acc))
    return first + second


def _u_connection_guarded(a, b, z, acc):
    n = round(b.real)
    scale = max(1.0, abs(math.log(z)))
    if abs(b - n) >= _B_GUARD / scale:
        return _u_connection(a, b, z, acc)
    g = 0.5 * _B_NODES_HALF_WIDTH / scale
    t = np.cos(np.pi * (np.arange(_CHEB_NODES) + 0.5) / _CHEB_NODES)
    vals = np.array([_u_connection(a, n + 2.0 * g * tj, z, acc) for tj in t])
    coef = cheb.chebfit(t, vals, _CHEB_NODES - 1)
    # U is entire in b, so the coefficients decay fast; the tail bounds the error
    tail = abs(coef[-1]) + abs(coef[-2])
    if tail > _EXTRAPOLATION_AGREEMENT * np.max(np.abs(vals)):
        raise DegenerateParameterError(
            f"U({a}, {b}, {z}): integer-b interpolation did not settle")
    return complex(cheb.chebval((b - n) / (2.0 * g), coef))


def _u_asymptotic(a, b, z, acc):
    s = _asymptotic_sum(a, a - b + 1, -1.0 / z, acc.max_terms)
    if s is None:
        return None
    return cmath.exp(-a * math.log(z)) * s


def _u_integral_re_a_ge_1(a, b, z, acc):
    """U via exp(-z t) t^(a-1) (1+t)^(b-a-1) / Gamma(a), in log-time t = e^u."""
    c = b - a - 1

    def log_f(u):
        return a * u - z * math.exp(u) + c * math.log1p(math.exp(u))

    ar = a.real
    u0 = math.log(ar / z)
    peak = log_f(u0).real
    lo = u0 - (45.0 + abs(c)) / ar - 2.0
    hi = math.log((ar + 45.0 + 2.0 * abs(c)) / z) + 1.0

    def f(u):
        return cmath.exp(log_f(u) - peak)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(f, lo, hi, points=[u0], complex_func=True,
                                  epsabs=0.0, epsrel=1e-13,
                                  limit=max(200, 5 * acc.quad_max_depth))
    # quad's estimate is pessimistic near 1e-13; only reject gross failures,
    # which happen when the integrand oscillates (large imaginary a)
    err = abs(complex(err))
    if not err <= math.sqrt(acc.rel_tol) * abs(val):
        raise ConvergenceError(
            f"U({a}, {b}, {z}): quadrature error {err:.2e} too large for |U|={abs(val):.2e}")
    return val * cmath.exp(peak - special.loggamma(a))


def _u_integral(a, b, z, acc):
    shift = max(0, math.ceil(1.0 - a.real))
    if shift == 0:
        return _u_integral_re_a_ge_1(a, b, z, acc)
    # U is minimal as a -> +inf, so recurring downward in a is stable
    u2 = _u_integral_re_a_ge_1(a + shift + 1, b, z, acc)
    u1 = _u_integral_re_a_ge_1(a + shift, b, z, acc)
    for k in range(shift, 0, -1):
        c = a + k - 1
        u0 = -(b - 2 * c - 2 - z) * u1 - (c + 1) * (c - b + 2) * u2
        u2, u1 = u1, u0
    return u1


def tricomi_u(a, b, z, acc=DEFAULT_ACCURACY):
    """Tricomi's confluent hypergeometric function U(a, b, z) for ``z > 0``."""
    z = _positive(z, "z")
    a = complex(a)
    b = complex(b)
    m = _nonpositive_integer(a)
    if m is not None:
        return _u_polynomial(-m, b, z)
    m = _nonpositive_integer(a - b + 1)
    if m is not None:
        return cmath.exp((1 - b) * math.log(z)) * _u_polynomial(-m, 2 - b, z)
    if z >= _U_ASYMPTOTIC_MIN_Z:
        val = _u_asymptotic(a, b, z, acc)
        if val is not None:
            return val
    if z <= _U_CONNECTION_MAX_Z:
        return _u_connection_guarded(a, b, z, acc)
    return _u_integral(a, b, z, acc)


def tricomi_u_scaled(a, b, z, acc=DEFAULT_ACCURACY):
    """``z**a * U(a, b, z)``, which tends to 1 as z grows and never overflows there."""
    z = _positive(z, "z")
    a = complex(a)
    b = complex(b)
    if z >= _U_ASYMPTOTIC_MIN_Z and _nonpositive_integer(a) is None:
        s = _asymptotic_sum(a, a - b + 1, -1.0 / z, acc.max_terms)
        if s is not None:
            return s
    return cmath.exp(a * math.log(z)) * tricomi_u(a, b, z, acc)


# ---------------------------------------------------------------------------
# Whittaker functions
# ---------------------------------------------------------------------------

def _second_index(b):
    b = complex(b)
    if b.real != 0.0 and b.imag != 0.0:
        raise DomainError("second Whittaker index must be real or purely imaginary")
    if b.real < 0.0 or (b.real == 0.0 and b.imag < 0.0):
        b = -b  # W_{a,b} = W_{a,-b}
    return b


def _real_result(val, what):
    if abs(val.imag) > 1e-8 * abs(val.real) + 1e-12:
        raise SymmetryError(f"{what} should be real but has imaginary part {val.imag:.3e}")
    return float(val.real)


def whittaker_w(a, b, z, acc=DEFAULT_ACCURACY):
    """Whittaker W_{a,b}(z) for real ``a``, real or purely imaginary ``b``."""
    z = _positive(z, "z")
    b = _second_index(b)
    u = tricomi_u(b - a + 0.5, 1 + 2 * b, z, acc)
    val = cmath.exp(-0.5 * z + (b + 0.5) * math.log(z)) * u
    return _real_result(val, "W")


def whittaker_m(a, b, z, acc=DEFAULT_ACCURACY):
    """Whittaker M_{a,b}(z) = exp(-z/2) z^(b+1/2) M(b-a+1/2, 1+2b, z)."""
    z = _positive(z, "z")
    b = float(b)
    aa, bb = complex(b - a + 0.5), complex(1 + 2 * b)
    _check_kummer_b(bb)
    scaled = _kummer_scaled(aa, bb, z, acc)
    val = cmath.exp(0.5 * z + (b + 0.5) * math.log(z)) * scaled
    return _real_result(val, "M")


# ---------------------------------------------------------------------------
# Meijer G^{3,1}_{2,3}(x | 0,1; 0,0,0) and L(x)
# ---------------------------------------------------------------------------

def _g_tail(x, acc):
    """Integral of exp(y) E1(y) / y over [x, inf) for x >= 50.

    Integrates the asymptotic series of exp(y) E1(y) termwise; the error is
    bounded by the first omitted term.
    """
    total = 0.0
    term = 1.0 / x  # k = 0: 0! / (1 * x)
    k = 0
    while True:
        total += term
        nxt = -term * (k + 1) ** 2 / ((k + 2) * x)
        k += 1
        if abs(nxt) <= min(acc.abs_tol, _SERIES_STOP * abs(total)):
            return total
        if abs(nxt) > abs(term):
            raise ConvergenceError(f"G tail series diverged at x={x}")
        term = nxt


def meijer_g3123(x, acc=DEFAULT_ACCURACY):
    """G^{3,1}_{2,3}(x | 0,1; 0,0,0) as the integral of e^y E1(y) dy / y over [x, inf).

    Adaptive quadrature in log y on [x, max(x, 50)] plus the analytic tail.
    """
    x = _positive(x)
    split = max(x, _G_SPLIT)
    tail = _g_tail(split, acc)
    if x >= split:
        return tail
    head, _err = integrate.quad(lambda s: scaled_e1(math.exp(s)), math.log(x), math.log(split),
                                epsabs=0.1 * acc.abs_tol, epsrel=1e-13,
                                limit=max(50, acc.quad_max_depth))
    return head + tail


def meijer_g3123_alt(x, acc=DEFAULT_ACCURACY):
    """Same function from exchanging the order of integration.

    G(x) = integral over t > 0 of exp(-t) log(1 + t/x) / t; no exponential
    integral is involved, so it serves as an independent check.
    """
    x = _positive(x)
    lx = math.log(x)

    def f(s):
        t = math.exp(s)
        return math.exp(-t) * math.log1p(t / x)

    lo = min(lx, 0.0) - 45.0
    hi = math.log(50.0)
    val, _err = integrate.quad(f, lo, hi, points=sorted({lx, 0.0}) if lo < lx < hi else [0.0],
                               epsabs=0.1 * acc.abs_tol, epsrel=1e-13,
                               limit=max(100, acc.quad_max_depth))
    return val


def l_func(x, acc=DEFAULT_ACCURACY):
    """L(x) = e^x E1(x) - 1 + x G^{3,1}_{2,3}(x)."""
    x = _positive(x)
    return scaled_e1(x) - 1.0 + x * meijer_g3123(x, acc)
