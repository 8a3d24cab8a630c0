"""Spectral parameter map and the principal Dirichlet eigenvalue on [0, A]."""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import optimize

from . import specfun
from .errors import ConvergenceError, DomainError, NoSignChangeError, SymmetryError

__all__ = [
    "ModelParams",
    "SpectralPoint",
    "EigenResult",
    "xi_of_lambda",
    "lambda_of_xi",
    "spectral_point",
    "eigenvalue_bracket",
    "dirichlet_function",
    "solve_lambda_a",
]

RESIDUAL_TOL = 1e-10
# Downward bracket expansion is linear in the bracket width so that the
# largest root cannot be stepped over.
_MAX_EXPANSIONS = 2000


@dataclass(frozen=True)
class ModelParams:
    """Noise coefficient ``mu`` of dR = dt + mu R dB."""

    mu: float

    def __post_init__(self):
        mu = float(self.mu)
        if mu == 0.0 or not math.isfinite(mu):
            raise DomainError(f"mu must be finite and nonzero, got {self.mu!r}")
        object.__setattr__(self, "mu", mu)

    @property
    def mu2(self):
        return self.mu * self.mu


@dataclass(frozen=True)
class SpectralPoint:
    lam: float
    xi: complex


@dataclass(frozen=True)
class EigenResult:
    lambda_A: float
    bracket_lo: float
    bracket_hi: float
    residual: float
    iterations: int


def _radicand(lam, params):
    return 1.0 + 8.0 * lam / params.mu2


def xi_of_lambda(lam, params):
    """Principal root of 1 + 8 lam / mu**2.

    Real and nonnegative for ``lam >= -mu**2/8``, otherwise on the positive
    imaginary axis (returned as a complex number).
    """
    q = _radicand(float(lam), params)
    if q >= 0.0:
        return math.sqrt(q)
    return complex(0.0, math.sqrt(-q))


def lambda_of_xi(xi, params):
    """Inverse map lam = mu**2 (xi**2 - 1) / 8 for real or imaginary ``xi``."""
    xi = complex(xi)
    if xi.real != 0.0 and xi.imag != 0.0:
        raise DomainError("xi must be real or purely imaginary")
    sq = (xi * xi).real
    return params.mu2 * (sq - 1.0) / 8.0


def spectral_point(lam, params):
    return SpectralPoint(float(lam), complex(xi_of_lambda(lam, params)))


def _xi_minus_one(lam, params):
    """xi(lam) - 1 without cancellation when lam is small."""
    t = 8.0 * lam / params.mu2
    q = 1.0 + t
    if q >= 0.0:
        return complex(t / (1.0 + math.sqrt(q)))
    return complex(-1.0, math.sqrt(-q))


def dirichlet_function(x, lam, params, acc=specfun.DEFAULT_ACCURACY):
    """(mu**2 x / 2) exp(1/(mu**2 x)) W_{1, xi(lam)/2}(2/(mu**2 x)).

    Equivalently z**(d/2) U(d/2, 2 + d, z) with z = 2/(mu**2 x) and
    d = xi - 1, which needs no exponential scaling at all. The value at
    ``x = 0`` is the limit 1.
    """
    x = float(x)
    if x < 0 or not math.isfinite(x):
        raise DomainError(f"x must be finite and nonnegative, got {x!r}")
    z = 2.0 / (params.mu2 * x) if x > 0.0 else math.inf
    if math.isinf(z):
        return 1.0
    d = _xi_minus_one(float(lam), params)
    val = specfun.tricomi_u_scaled(0.5 * d, 2.0 + d, z, acc)
    if abs(val.imag) > 1e-8 * abs(val.real) + 1e-12:
        raise SymmetryError(f"eigenfunction value has imaginary part {val.imag:.3e}")
    return float(val.real)


def eigenvalue_bracket(A, params):
    """Closed-form enclosure (lo, hi) of the principal eigenvalue, hi = -1/A."""
    A = float(A)
    if not A > 0 or not math.isfinite(A):
        raise DomainError(f"A must be finite and positive, got {A!r}")
    m2a = params.mu2 * A
    width = (math.sqrt(4.0 * m2a + 1.0) - 1.0) / (2.0 * m2a * A)
    e1 = -1.0 / A - width
    e2 = -1.0 / A
    return min(e1, e2), max(e1, e2)


def solve_lambda_a(A, params, tol=1e-12, acc=specfun.DEFAULT_ACCURACY):
    """Largest nonpositive root of lam -> W_{1, xi(lam)/2}(2/(mu**2 A)).

    The search starts from the closed-form bracket. The sign test uses the
    scaled eigenfunction, which has the same sign as W but is O(1). When the
    bracket does not straddle a sign change its upper end is moved toward 0
    geometrically, and its lower end downward in steps of the bracket width.
    """
    lo, hi = eigenvalue_bracket(A, params)
    if not tol > 0:
        raise DomainError("tol must be positive")

    def f(lam):
        return dirichlet_function(A, lam, params, acc)

    f_hi = f(hi)
    moves = 0
    while f_hi <= 0.0:
        hi *= 0.5
        moves += 1
        if moves > 60:
            raise NoSignChangeError(f"no positive eigenfunction value found near 0 for A={A}")
        f_hi = f(hi)

    width = hi - lo
    f_lo = f(lo)
    steps = 0
    while f_lo > 0.0:
        hi, f_hi = lo, f_lo
        lo = hi - width
        steps += 1
        if steps > _MAX_EXPANSIONS:
            raise NoSignChangeError(
                f"no sign change down to lambda={lo:.6g} for A={A}, mu={params.mu}")
        f_lo = f(lo)

    if f_lo == 0.0:
        root, iterations = lo, 0
    else:
        root, info = optimize.brentq(f, lo, hi, xtol=tol * abs(hi), rtol=max(tol, 4 * 2.0**-52),
                                     maxiter=200, full_output=True)
        if not info.converged:
            raise ConvergenceError(f"eigenvalue iteration failed: {info.flag}")
        iterations = info.iterations

    xi = xi_of_lambda(root, params)
    residual = abs(specfun.whittaker_w(1.0, 0.5 * complex(xi), 2.0 / (params.mu2 * A), acc))
    if residual > RESIDUAL_TOL:
        raise ConvergenceError(f"residual {residual:.3e} at lambda={root!r} exceeds {RESIDUAL_TOL}")
    return EigenResult(lambda_A=float(root), bracket_lo=float(lo), bracket_hi=float(hi),
                       residual=float(residual), iterations=int(iterations))
