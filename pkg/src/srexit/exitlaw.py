"""Laplace transform, moments and small-lambda expansion of the exit time S_A^r."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from . import specfun
from .errors import DomainError
from .spectral import ModelParams, dirichlet_function, solve_lambda_a

__all__ = [
    "ExitProblem",
    "MgfQuery",
    "MomentSet",
    "principal_eigenvalue",
    "eigenfunction_numerator",
    "mgf",
    "scaled_mgf",
    "taylor_w_expansion",
    "moments",
    "mgf_derivative_moments",
]


@dataclass(frozen=True)
class ExitProblem:
    """Threshold ``A`` and headstart ``r``, with 0 <= r <= A."""

    A: float
    r: float = 0.0

    def __post_init__(self):
        A, r = float(self.A), float(self.r)
        if not (A > 0 and math.isfinite(A)):
            raise DomainError(f"A must be finite and positive, got {self.A!r}")
        if not 0.0 <= r <= A:
            raise DomainError(f"headstart r must lie in [0, A], got r={self.r!r}, A={A!r}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "r", r)


@dataclass(frozen=True)
class MgfQuery:
    alpha: float
    problem: ExitProblem
    params: ModelParams


@dataclass(frozen=True)
class MomentSet:
    m1: float
    m2: float
    m3: float


@lru_cache(maxsize=256)
def _lambda_a_cached(A, mu2, tol):
    return solve_lambda_a(A, ModelParams(math.sqrt(mu2)), tol).lambda_A


def principal_eigenvalue(A, params, tol=1e-12):
    """lambda_A, memoized per (A, mu**2)."""
    return _lambda_a_cached(float(A), params.mu2, float(tol))


def eigenfunction_numerator(x, lam, params, acc=specfun.DEFAULT_ACCURACY):
    """(mu**2 x/2) exp(1/(mu**2 x)) W_{1, xi(lam)/2}(2/(mu**2 x)); 1 at x = 0."""
    return dirichlet_function(x, lam, params, acc)


def mgf(q, acc=specfun.DEFAULT_ACCURACY):
    """E[exp(-alpha S_A^r)] for alpha > lambda_A."""
    alpha = float(q.alpha)
    A, r = q.problem.A, q.problem.r
    if not math.isfinite(alpha):
        raise DomainError("alpha must be finite")
    if alpha < 0.0:
        lam_a = principal_eigenvalue(A, q.params)
        if alpha <= lam_a:
            raise DomainError(f"alpha={alpha!r} must exceed lambda_A={lam_a!r}")
    if r == A:
        return 1.0
    den = eigenfunction_numerator(A, alpha, q.params, acc)
    num = eigenfunction_numerator(r, alpha, q.params, acc)
    return num / den


def scaled_mgf(alpha, problem, params, acc=specfun.DEFAULT_ACCURACY):
    """E[exp(alpha lambda_A S_A^r)], which tends to 1/(1 + alpha) as A grows."""
    alpha = float(alpha)
    if not alpha > -1.0:
        raise DomainError(f"alpha must exceed -1, got {alpha!r}")
    lam_a = principal_eigenvalue(problem.A, params)
    return mgf(MgfQuery(-alpha * lam_a, problem, params), acc)


def taylor_w_expansion(lam, x, params, acc=specfun.DEFAULT_ACCURACY):
    """Third-order expansion in lam of W_{1, xi(lam)/2}(2/(mu**2 x)), remainder dropped."""
    x = float(x)
    if not x > 0:
        raise DomainError(f"x must be positive, got {x!r}")
    lam = float(lam)
    k = 2.0 / params.mu2
    y = k / x
    ell = specfun.l_func(y, acc)
    g = specfun.meijer_g3123(y, acc)
    poly = 1.0 / x + lam + k * ell * lam**2 + k * k * (g - 2.0 * ell) * lam**3
    return k * math.exp(-0.5 * y) * poly


def _xl_xg(x, k, acc):
    """(x L(k/x), x G(k/x)) with the x -> 0 limits (0, 0)."""
    y = k / x if x > 0.0 else math.inf
    if y > 1e300:
        # L(y) ~ 1/(2y), G(y) ~ 1/y, so both products are O(x**2)
        return 0.5 * x * x / k, x * x / k
    return x * specfun.l_func(y, acc), x * specfun.meijer_g3123(y, acc)


def moments(problem, params, acc=specfun.DEFAULT_ACCURACY):
    """First three moments of S_A^r in closed form."""
    A, r = problem.A, problem.r
    k = 2.0 / params.mu2
    rl_r, rg_r = _xl_xg(r, k, acc)
    al_a, ag_a = _xl_xg(A, k, acc)
    rl_a = r * al_a / A

    m1 = A - r
    m2 = 2.0 * k * (rl_r - al_a) - 2.0 * A * (r - A)
    m3 = (-6.0 * k * k * ((rg_r - 2.0 * rl_r) - (ag_a - 2.0 * al_a))
          + 6.0 * A * k * (rl_r - 2.0 * al_a + rl_a)
          + 6.0 * A * A * (A - r))
    return MomentSet(m1, m2, m3)


def mgf_derivative_moments(problem, params, h=None, acc=specfun.DEFAULT_ACCURACY):
    """Moments from central differences of the mgf at 0, Richardson-combined over h and h/2."""
    A, r = problem.A, problem.r
    if h is None:
        h = 0.005 / (A - r + 1.0)
    h = float(h)
    if not h > 0:
        raise DomainError("h must be positive")
    if r == A:
        return MomentSet(0.0, 0.0, 0.0)
    lam_a = principal_eigenvalue(A, params)
    if -2.0 * h <= lam_a:
        raise DomainError(f"stencil reaches alpha={-2.0 * h!r} <= lambda_A={lam_a!r}; reduce h")

    def m(a):
        return mgf(MgfQuery(a, problem, params), acc)

    def stencil(s):
        mp1, mm1, mp2, mm2 = m(s), m(-s), m(2 * s), m(-2 * s)
        m0 = 1.0
        d1 = (mp1 - mm1) / (2 * s)
        d2 = (mp1 - 2 * m0 + mm1) / s**2
        d3 = (mp2 - 2 * mp1 + 2 * mm1 - mm2) / (2 * s**3)
        return d1, d2, d3

    coarse = stencil(h)
    fine = stencil(0.5 * h)
    d1, d2, d3 = (f + (f - c) / 3.0 for f, c in zip(fine, coarse))
    return MomentSet(-d1, d2, -d3)
