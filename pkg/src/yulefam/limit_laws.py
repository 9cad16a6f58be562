"""Closed-form predictions and limit laws.

Conventions: ``X`` is the positive stable law with Laplace transform
``E exp(-lam X) = exp(-lam**alpha)``, and the Mittag-Leffler law of
parameter ``alpha`` is the law of ``M = X**(-alpha)``.  For the
duplication model ``alpha = 1 - r``.

The Mittag-Leffler density is evaluated by its power series where that is
numerically safe, and otherwise by Kanter's integral representation

    g(x) = x**(a/(1-a)) / (pi (1-a)) * int_0^pi A(t) exp(-x**(1/(1-a)) A(t)) dt,
    A(t) = (sin(a t) / sin t)**(1/(1-a)) * sin((1-a) t) / sin(a t),

whose integrand is positive, so it suffers no cancellation.  The same
function ``A`` drives the stable sampler.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, interpolate
from scipy.special import gammaln

from .seeding import make_rng

SERIES_MAX_TERMS = 400
# series results whose largest term exceeds the sum by more than this are
# handed to the integral representation (keeps >= ~9 significant digits)
SERIES_ROUTING_RATIO = 1e7
# hard failure threshold for the bare series evaluator
SERIES_FAILURE_RATIO = 1e12
# beyond A2 * x**(1/(1-a)) > TAIL_SWITCH the density is below ~1e-13
TAIL_SWITCH = 30.0


class SeriesEvaluationError(ArithmeticError):
    """The power series could not be evaluated to useful accuracy."""

    def __init__(self, x, n_terms, reason):
        super().__init__(f"density series failed at x={x!r} after {n_terms} terms: {reason}")
        self.x = x
        self.n_terms = n_terms
        self.reason = reason


class QuadratureError(ArithmeticError):
    pass


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")


def _as_rng(seed):
    return seed if isinstance(seed, np.random.Generator) else make_rng(seed)


# --------------------------------------------------------------------------
# closed forms

def g_of_S(r: float, N: float, S):
    """Predicted number of families of size >= S: ``r Gamma((2-r)/(1-r)) N S^(-1/(1-r))``."""
    if not 0.0 < r < 1.0:
        raise ValueError("r must lie in (0, 1)")
    S = np.asarray(S, dtype=float)
    if np.any(S < 1):
        raise ValueError("S must be >= 1")
    out = np.exp(math.log(r) + gammaln((2.0 - r) / (1.0 - r)) + math.log(N) - np.log(S) / (1.0 - r))
    return float(out) if out.ndim == 0 else out


def ml_moment(alpha: float, m):
    """``E[M^m] = Gamma(m + 1) / Gamma(m alpha + 1)``."""
    _check_alpha(alpha)
    m = np.asarray(m, dtype=float)
    out = np.exp(gammaln(m + 1.0) - gammaln(m * alpha + 1.0))
    return float(out) if out.ndim == 0 else out


def z_moment(r: float, k: int, m):
    """``E[Z_k^m] = r Gamma(m+1) Gamma(k) / Gamma(m(1-r) + k)`` for ``k >= 2``."""
    if k < 2:
        raise ValueError("k must be >= 2")
    m = np.asarray(m, dtype=float)
    out = r * np.exp(gammaln(m + 1.0) + gammaln(k) - gammaln(m * (1.0 - r) + k))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class TailConstants:
    A1: float
    A2: float


def tail_constants(alpha: float, normalization: str = "characteristic") -> TailConstants:
    """Constants of the small-x asymptotics of the positive stable density.

    ``f(x) ~ A1 x^(-1 - a/(2(1-a))) exp(-A2 x^(-a/(1-a)))`` as ``x -> 0``.

    ``"characteristic"`` gives the constants with the ``cos(pi a / 2)``
    factors, which belong to the stable law normalized through its
    characteristic function ``exp(-|t|^a (1 - i tan(pi a/2) sgn t))``,
    i.e. Laplace transform ``exp(-lam^a / cos(pi a/2))``.  ``"laplace"``
    drops those factors and matches ``exp(-lam^a)``, the law whose
    ``X^(-a)`` is Mittag-Leffler; :func:`ml_density_asymptotic` uses it.
    """
    _check_alpha(alpha)
    if normalization == "characteristic":
        c = math.cos(math.pi * alpha / 2.0)
    elif normalization == "laplace":
        c = 1.0
    else:
        raise ValueError(f"unknown normalization {normalization!r}")
    b = 1.0 - alpha
    A1 = alpha ** (1.0 / (2.0 * b)) * c ** (-1.0 / (2.0 * b)) * (2.0 * math.pi * b) ** -0.5
    A2 = b * alpha ** (alpha / b) * c ** (-1.0 / b)
    return TailConstants(A1, A2)


# --------------------------------------------------------------------------
# Mittag-Leffler density

def _series_terms(alpha, x, n_terms):
    k = np.arange(1, n_terms + 1, dtype=float)
    logx = np.log(x)[..., None]
    logmag = gammaln(alpha * k + 1.0) - gammaln(k + 1.0) + (k - 1.0) * logx
    mag = np.exp(logmag)
    sign = np.where(k % 2 == 1, 1.0, -1.0) * np.sin(np.pi * alpha * k)
    return mag, sign * mag


def _series_eval(alpha, x, n_terms):
    """Vectorized series; returns (value, largest-term ratio, converged mask, terms used)."""
    mag, terms = _series_terms(alpha, x, n_terms)
    total = terms.sum(axis=-1)
    scale = np.abs(total)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = mag.max(axis=-1) / scale
        tail_ok = mag[..., -1] < 1e-15 * scale
        small = mag < 1e-15 * scale[..., None]
    # first index past the peak where terms are negligible
    peak = mag.argmax(axis=-1)
    after = small & (np.arange(n_terms) >= peak[..., None])
    used = np.where(after.any(axis=-1), after.argmax(axis=-1) + 1, n_terms)
    return total / (math.pi * alpha), ratio, tail_ok & np.isfinite(total), used


def ml_density_series(alpha: float, x: float, max_terms: int = SERIES_MAX_TERMS,
                      max_ratio: float = SERIES_FAILURE_RATIO) -> float:
    """Mittag-Leffler density by its power series in ``x``.

    Raises :class:`SeriesEvaluationError` if the series has not converged
    within ``max_terms`` or its largest term exceeds the result by more
    than ``max_ratio`` (cancellation).
    """
    _check_alpha(alpha)
    if x <= 0:
        return _density_at_zero(alpha) if x == 0 else 0.0
    val, ratio, ok, used = _series_eval(alpha, np.float64(x), max_terms)
    val, ratio, used = float(val), float(ratio), int(used)
    if not ok:
        raise SeriesEvaluationError(x, used, "no convergence")
    if not ratio <= max_ratio:
        raise SeriesEvaluationError(x, used, f"cancellation (largest term / result = {ratio:.3g})")
    return val


def _density_at_zero(alpha):
    return math.exp(-math.lgamma(1.0 - alpha))


def kanter_A(alpha, t):
    """Kanter's function ``A(t)`` on ``(0, pi)``, computed in log space."""
    t = np.asarray(t, dtype=float)
    b = 1.0 - alpha
    logA = (np.log(np.sin(alpha * t)) - np.log(np.sin(t))) / b + np.log(np.sin(b * t)) - np.log(np.sin(alpha * t))
    return np.exp(logA)


def _kanter_peak(alpha, z):
    """Location of the maximum of ``A(t) exp(-z A(t))`` (where ``z A(t) = 1``)."""
    lo, hi = 0.0, math.pi
    target = -math.log(z)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if math.log(kanter_A(alpha, mid)) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _kanter_integral(alpha, x):
    """Kanter's integral for an array of ``x > 0``.

    ``exp(-z A2)`` (with ``A2 = A(0+)``) is factored out so that the
    remaining integrals are O(1) and can share one vectorized adaptive
    quadrature when the integrand peaks at ``t = 0`` (``z A2 >= 1``).
    Small ``z`` puts the peak near ``t = pi``; those points are integrated
    one at a time with a breakpoint at the peak.
    """
    b = 1.0 - alpha
    A2 = tail_constants(alpha, "laplace").A2
    x = np.asarray(x, dtype=float)
    z = x ** (1.0 / b)
    acc = np.zeros(x.shape)
    big = z * A2 >= 1.0
    if np.any(big):
        zb = z[big]

        def f(t):
            a = kanter_A(alpha, t)
            return a * np.exp(-zb * (a - A2))

        acc[big], _ = integrate.quad_vec(f, 0.0, math.pi, epsabs=1e-14, epsrel=1e-11, limit=2000)
    for i in np.flatnonzero(~big):
        zi = z[i]
        tp = _kanter_peak(alpha, zi)

        def g(t):
            a = kanter_A(alpha, t)
            return a * math.exp(-zi * (a - A2))

        pts = sorted({0.5 * tp, tp, 0.5 * (tp + math.pi)})
        acc[i], _ = integrate.quad(g, 0.0, math.pi, points=pts, epsabs=0.0, epsrel=1e-12, limit=400)
    return x ** (alpha / b) / (math.pi * b) * np.exp(-z * A2) * acc


def ml_density_integral(alpha: float, x):
    """Mittag-Leffler density by Kanter's integral (exact, slower)."""
    _check_alpha(alpha)
    xa = np.asarray(x, dtype=float)
    out = np.zeros(xa.shape)
    out[xa == 0] = _density_at_zero(alpha)
    pos = xa > 0
    if np.any(pos):
        out[pos] = _kanter_integral(alpha, xa[pos])
    return float(out) if out.ndim == 0 else out


def ml_density_asymptotic(alpha: float, x):
    """Leading large-x behaviour ``(A1/a) x^(1/(2(1-a)) - 1) exp(-A2 x^(1/(1-a)))``."""
    tc = tail_constants(alpha, "laplace")
    b = 1.0 - alpha
    x = np.asarray(x, dtype=float)
    out = tc.A1 / alpha * x ** (1.0 / (2.0 * b) - 1.0) * np.exp(-tc.A2 * x ** (1.0 / b))
    return float(out) if out.ndim == 0 else out


def _tail_z(alpha, x):
    return tail_constants(alpha, "laplace").A2 * np.asarray(x, dtype=float) ** (1.0 / (1.0 - alpha))


def ml_density(alpha: float, x):
    """Mittag-Leffler(alpha) density; scalar or array ``x``.

    The series is used for moderate ``x``; points where it cancels badly,
    fails to converge, or that lie in the far tail go to the integral form.
    """
    _check_alpha(alpha)
    xa = np.asarray(x, dtype=float)
    flat = xa.ravel()
    out = np.zeros(flat.shape)
    pos = flat > 0
    out[flat == 0] = _density_at_zero(alpha)
    idx = np.flatnonzero(pos & (_tail_z(alpha, np.where(pos, flat, 1.0)) <= TAIL_SWITCH))
    for chunk in np.array_split(idx, max(1, idx.size // 2048)):
        if chunk.size == 0:
            continue
        val, ratio, ok, _ = _series_eval(alpha, flat[chunk], SERIES_MAX_TERMS)
        good = ok & (ratio <= SERIES_ROUTING_RATIO)
        out[chunk[good]] = val[good]
        pos[chunk[good]] = False
    out[flat == 0] = _density_at_zero(alpha)
    rest = np.flatnonzero(pos)
    if rest.size:
        out[rest] = _kanter_integral(alpha, flat[rest])
    out = out.reshape(xa.shape)
    return float(out) if out.ndim == 0 else out


# --------------------------------------------------------------------------
# Mittag-Leffler CDF

def _tail_edge(alpha):
    return (TAIL_SWITCH / tail_constants(alpha, "laplace").A2) ** (1.0 - alpha)


def _quad_density(alpha, a, b):
    val, err = integrate.quad(lambda t: ml_density(alpha, t), a, b, epsabs=1e-11, epsrel=1e-10, limit=200)
    if not np.isfinite(val) or err > 1e-7:
        raise QuadratureError(f"density quadrature on [{a}, {b}] did not converge (err={err:.2g})")
    return val


@lru_cache(maxsize=None)
def _upper_mass(alpha):
    edge = _tail_edge(alpha)
    val, err = integrate.quad(lambda t: ml_density(alpha, t), edge, np.inf, epsabs=1e-16, limit=200)
    return val


def _ml_cdf_scalar(alpha, x):
    if x <= 0:
        return 0.0
    edge = _tail_edge(alpha)
    if x >= edge:
        val, _ = integrate.quad(lambda t: ml_density(alpha, t), x, np.inf, epsabs=1e-16, limit=200)
        return 1.0 - val
    mid = min(edge, ml_moment(alpha, 1.0))
    if x <= mid:
        return _quad_density(alpha, 0.0, x)
    return 1.0 - _quad_density(alpha, x, edge) - _upper_mass(alpha)


@lru_cache(maxsize=32)
def _cdf_table(alpha, n_nodes=1025, gl_order=10):
    edge = _tail_edge(alpha)
    nodes = np.linspace(0.0, edge, n_nodes)
    gx, gw = np.polynomial.legendre.leggauss(gl_order)
    h = np.diff(nodes)
    mids = 0.5 * (nodes[:-1] + nodes[1:])
    pts = mids[:, None] + 0.5 * h[:, None] * gx[None, :]
    dens = ml_density(alpha, pts)
    pieces = 0.5 * h * (dens @ gw)
    cdf = np.concatenate([[0.0], np.cumsum(pieces)])
    # tie the top of the table to the separately integrated upper tail
    cdf *= (1.0 - _upper_mass(alpha)) / cdf[-1]
    slopes = ml_density(alpha, nodes)
    return edge, interpolate.CubicHermiteSpline(nodes, cdf, slopes)


def ml_cdf(alpha: float, x):
    """``P(M <= x)`` by quadrature of :func:`ml_density`.

    Scalars use adaptive Gauss-Kronrod quadrature.  Arrays are served by a
    cached per-alpha table (Gauss-Legendre panels of the density, joined by
    cubic Hermite interpolation with the density as exact slope).
    """
    _check_alpha(alpha)
    xa = np.asarray(x, dtype=float)
    if xa.ndim == 0:
        return _ml_cdf_scalar(alpha, float(xa))
    edge, spline = _cdf_table(float(alpha))
    out = np.empty(xa.shape)
    lo = xa <= 0
    hi = xa >= edge
    mid = ~(lo | hi)
    out[lo] = 0.0
    out[mid] = spline(xa[mid])
    out[hi] = [_ml_cdf_scalar(alpha, v) for v in xa[hi]]
    return np.clip(out, 0.0, 1.0)


def ml_cdf_integral(alpha: float, x):
    """``P(M <= x) = 1 - (1/pi) int_0^pi exp(-x^(1/(1-a)) A(t)) dt`` (Kanter form)."""
    _check_alpha(alpha)
    xa = np.asarray(x, dtype=float)
    flat = xa.ravel()
    out = np.zeros(flat.shape)
    pos = flat > 0
    if np.any(pos):
        z = flat[pos] ** (1.0 / (1.0 - alpha))
        val, _ = integrate.quad_vec(lambda t: np.exp(-z * kanter_A(alpha, t)), 0.0, math.pi,
                                    epsabs=1e-14, epsrel=1e-12, limit=4000)
        out[pos] = 1.0 - val / math.pi
    out = out.reshape(xa.shape)
    return float(out) if out.ndim == 0 else out


# --------------------------------------------------------------------------
# samplers

def _log_stable(alpha, rng, size):
    u = rng.random(size)
    e = rng.standard_exponential(size)
    t = np.pi * (1.0 - u)  # (0, pi]
    t = np.where(t >= np.pi, np.nextafter(np.pi, 0), t)
    b = 1.0 - alpha
    logA = (np.log(np.sin(alpha * t)) - np.log(np.sin(t))) / b + np.log(np.sin(b * t)) - np.log(np.sin(alpha * t))
    return (b / alpha) * (logA - np.log(e))


def sample_stable(alpha: float, seed, size=None):
    """Positive stable variates with Laplace transform ``exp(-lam^alpha)``.

    Kanter's representation: ``X = (A(pi U) / E)^((1-alpha)/alpha)`` with
    ``U`` uniform and ``E`` standard exponential.
    """
    _check_alpha(alpha)
    out = np.exp(_log_stable(alpha, _as_rng(seed), size))
    return float(out) if size is None else out


def sample_ml(alpha: float, seed, size=None):
    """Mittag-Leffler variates ``X^(-alpha)``."""
    _check_alpha(alpha)
    out = np.exp(-alpha * _log_stable(alpha, _as_rng(seed), size))
    return float(out) if size is None else out
