"""Band-limited smoothing kernel and Fourier-inversion tail probabilities for
smoothed Bernoulli sums, plus the Gaussian-tail utilities they are compared to.

The kernel G is the symmetric random variable whose characteristic function g
is the 8-fold self-convolution of the indicator of [-1/8, 1/8], normalized to
g(0) = 1.  That makes g a degree-7 spline supported exactly on [-1, 1], so
inversion integrals truncate at |xi| = 1/sigma with zero truncation error; the
density is kappa1 * sin^8(kappa2 x)/x^8 with kappa2 = 1/8 and kappa1 fixed by
normalization.  All spline coefficients are constructed in exact rational
arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Callable, NamedTuple

import numpy as np
from scipy.integrate import quad
from scipy.special import erfc, sici

__all__ = [
    "SmoothingKernel", "GaussTail", "build_kernel", "sample_kernel",
    "bernoulli_gamma_tail_fourier", "bernoulli_gamma_tail_bruteforce",
    "lemma700_report", "gauss_tail_bounds_check", "lemma1034_check",
    "smoothing_comparison", "normal_density", "normal_upper_tail", "normal_cdf",
]

_CDF_CLAMP = 150.0  # P(|G| > 150) < 1.2e-10, below every tolerance used here


# -- Gaussian utilities -------------------------------------------------------

def normal_density(t):
    t = np.asarray(t, dtype=float)
    return np.exp(-0.5 * t * t) / math.sqrt(2.0 * math.pi)


def normal_upper_tail(t):
    """Upper tail integral of the standard normal density, via erfc."""
    return 0.5 * erfc(np.asarray(t, dtype=float) / math.sqrt(2.0))


def normal_cdf(t):
    return 0.5 * erfc(-np.asarray(t, dtype=float) / math.sqrt(2.0))


@dataclass(frozen=True)
class GaussTail:
    phi: Callable = normal_density
    Phi: Callable = normal_upper_tail  # upper tail, Phi(0) = 1/2


# -- exact spline construction -------------------------------------------------

def _shift_poly(coeffs: list[Fraction], s: Fraction) -> list[Fraction]:
    """Coefficients of p(u + s) given those of p(u)."""
    out = [Fraction(0)] * len(coeffs)
    for k, c in enumerate(coeffs):
        for j in range(k + 1):
            out[j] += c * comb(k, j) * s ** (k - j)
    return out


def _sliding_convolution(pieces):
    """Convolve a piecewise polynomial with the indicator of [-1/2, 1/2].

    (f * 1)(x) = F(x + 1/2) - F(x - 1/2) for F an antiderivative of f; knots
    shift by half-integers.  Pieces are (left, right, coeffs in u = x - left).
    """
    anti = []
    acc = Fraction(0)
    for left, right, coeffs in pieces:
        anti.append((left, right, [acc] + [c / (k + 1) for k, c in enumerate(coeffs)]))
        acc = sum(c * (right - left) ** k for k, c in enumerate(anti[-1][2]))
    total = acc

    def anti_coeffs_at(x0: Fraction) -> list[Fraction]:
        if x0 < anti[0][0]:
            return [Fraction(0)]
        if x0 >= anti[-1][1]:
            return [total]
        for left, right, coeffs in anti:
            if left <= x0 < right:
                return _shift_poly(coeffs, x0 - left)
        return [total]

    half = Fraction(1, 2)
    lo, hi = pieces[0][0] - half, pieces[-1][1] + half
    knots = sorted({k for p in pieces for k in (p[0] - half, p[0] + half)} | {lo, hi, pieces[-1][1] - half})
    knots = [k for k in knots if lo <= k <= hi]
    out = []
    for a, b in zip(knots[:-1], knots[1:]):
        cp = anti_coeffs_at(a + half)
        cm = anti_coeffs_at(a - half)
        n = max(len(cp), len(cm))
        cp += [Fraction(0)] * (n - len(cp))
        cm += [Fraction(0)] * (n - len(cm))
        out.append((a, b, [x - y for x, y in zip(cp, cm)]))
    return out


def _build_bspline8():
    """Degree-7 pieces of the 8-fold self-convolution of 1_[-1/2,1/2], on [-4, 4]."""
    pieces = [(Fraction(-1, 2), Fraction(1, 2), [Fraction(1)])]
    for _ in range(7):
        pieces = _sliding_convolution(pieces)
    return pieces


class _CharFnSpline:
    """gamma(xi) = B8(4 xi)/B8(0): even, supported on [-1, 1], knots at k/4."""

    def __init__(self):
        pieces = _build_bspline8()
        self.center_value = next(c[0] for l, r, c in pieces if l == 0)  # B8(0), exact
        # pieces on [0, 4] in local coordinates u = x - left
        self.pos_pieces = [(l, r, c) for l, r, c in pieces if l >= 0]
        self.knots = np.array([float(l) for l, _, _ in self.pos_pieces] + [4.0])
        self.coeffs = [np.array([float(x) for x in c]) for _, _, c in self.pos_pieces]
        # derivatives of gamma at 0 (exact): gamma^{(k)}(0) = 4^k B8^{(k)}(0)/B8(0)
        c0 = self.pos_pieces[0][2]
        self.derivs0 = [Fraction(4) ** k * math.factorial(k) * c0[k] / self.center_value
                        for k in range(8)]

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=float)
        x = 4.0 * np.abs(xi)
        out = np.zeros_like(x)
        inside = x < 4.0
        # outermost piece evaluated as (4-x)^7/7! to avoid cancellation at the edge
        edge = inside & (x >= 3.0)
        out[edge] = (4.0 - x[edge]) ** 7 / 5040.0
        body = inside & ~edge
        if np.any(body):
            idx = np.clip(np.searchsorted(self.knots, x[body], side="right") - 1, 0, 2)
            val = np.zeros(int(body.sum()))
            for j in range(3):
                m = idx == j
                if not m.any():
                    continue
                u = x[body][m] - self.knots[j]
                acc = np.zeros_like(u)
                for ck in self.coeffs[j][::-1]:
                    acc = acc * u + ck
                val[m] = acc
            out[body] = val
        return out / float(self.center_value)

    def exact_value(self, xi: Fraction) -> Fraction:
        x = 4 * abs(xi)
        if x >= 4:
            return Fraction(0)
        for l, r, c in self.pos_pieces:
            if l <= x < r:
                u = x - l
                return sum(ck * u ** k for k, ck in enumerate(c)) / self.center_value
        raise AssertionError


@dataclass(frozen=True)
class SmoothingKernel:
    char_fn: _CharFnSpline
    kappa1: float
    kappa2: float
    moments: tuple[float, float, float]          # (E G^2, E G^4, E G^6)
    moments_exact: tuple[Fraction, Fraction, Fraction]

    def density(self, x):
        x = np.asarray(x, dtype=float)
        y = x * self.kappa2
        small = np.abs(y) < 1e-4
        sinc = np.where(small, 1.0 - y * y / 6.0 + y ** 4 / 120.0,
                        np.sin(np.where(small, 1.0, y)) / np.where(small, 1.0, y))
        return self.kappa1 * self.kappa2 ** 8 * sinc ** 8

    def cdf(self, x: float, tol: float = 1e-12) -> float:
        """P(G <= x) by inversion: 1/2 + (1/pi) int_0^1 gamma(xi) sin(x xi)/xi dxi."""
        if x >= _CDF_CLAMP:
            return 1.0
        if x <= -_CDF_CLAMP:
            return 0.0
        g = self.char_fn

        def integrand(xi):
            if xi == 0.0:
                return x
            return float(g(xi)) * math.sin(x * xi) / xi

        val, _ = quad(integrand, 0.0, 1.0, epsabs=tol, epsrel=1e-12, limit=400)
        return 0.5 + val / math.pi

    def cdf_batch(self, x: np.ndarray) -> np.ndarray:
        """Vectorized CDF on a composite Gauss-Legendre rule (abs err < 1e-10)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty_like(x)
        hi = x >= _CDF_CLAMP
        lo = x <= -_CDF_CLAMP
        mid = ~(hi | lo)
        out[hi], out[lo] = 1.0, 0.0
        if np.any(mid):
            xm = x[mid]
            xi, w = _gl_panels(0.0, 1.0, max(32, int(np.ceil(np.max(np.abs(xm)) * 0.4)) + 8))
            gw = self.char_fn(xi) / xi * w
            vals = np.empty_like(xm)
            for i in range(0, xm.size, 4096):
                blk = xm[i:i + 4096]
                vals[i:i + 4096] = np.sin(np.multiply.outer(blk, xi)) @ gw
            out[mid] = 0.5 + vals / math.pi
        return out

    def upper_tail_batch(self, x: np.ndarray) -> np.ndarray:
        return 1.0 - self.cdf_batch(x)


@lru_cache(maxsize=1)
def build_kernel() -> SmoothingKernel:
    """Construct the kernel once; the spline pieces and moments are exact.

    kappa1 = 4^7 * 128 / (pi * B8(0)) makes the sin^8 density integrate to 1;
    moments come from the spline derivatives at 0 (E G^{2k} = (-1)^k g^{(2k)}(0)).
    """
    spline = _CharFnSpline()
    b0 = spline.center_value
    kappa1 = float(Fraction(4 ** 7 * 128) / b0) / math.pi
    m2 = -spline.derivs0[2]
    m4 = spline.derivs0[4]
    m6 = -spline.derivs0[6]
    return SmoothingKernel(spline, kappa1, 0.125,
                           (float(m2), float(m4), float(m6)), (m2, m4, m6))


def _gl_panels(a: float, b: float, n_panels: int, nodes: int = 16):
    """Composite Gauss-Legendre nodes/weights on [a, b]."""
    xg, wg = np.polynomial.legendre.leggauss(nodes)
    edges = np.linspace(a, b, n_panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
    half = 0.5 * (edges[1:] - edges[:-1])[:, None]
    return (mid + half * xg[None, :]).ravel(), (half * wg[None, :]).ravel()


def sample_kernel(kernel: SmoothingKernel, size: int, rng: np.random.Generator) -> np.ndarray:
    """Rejection sampler for G: uniform envelope on [-8, 8], x^-8 Pareto tails."""
    f0 = float(kernel.density(0.0))
    mass_center = 16.0 * f0
    mass_tail = 2.0 * kernel.kappa1 / (7.0 * 8.0 ** 7)
    p_center = mass_center / (mass_center + mass_tail)
    out = np.empty(size)
    filled = 0
    while filled < size:
        m = max(1024, int(1.8 * (size - filled)))
        u_region = rng.uniform(size=m)
        x = np.empty(m)
        center = u_region < p_center
        x[center] = rng.uniform(-8.0, 8.0, size=int(center.sum()))
        k = int((~center).sum())
        x[~center] = 8.0 * rng.uniform(size=k) ** (-1.0 / 7.0) * rng.choice([-1.0, 1.0], size=k)
        u = rng.uniform(size=m)
        fx = kernel.density(x)
        envelope = np.where(center, f0, kernel.kappa1 / x ** 8)
        acc = x[u * envelope <= fx]
        take = min(acc.size, size - filled)
        out[filled:filled + take] = acc[:take]
        filled += take
    return out


# -- smoothed Bernoulli tails ---------------------------------------------------

def _char_bernoulli(theta: np.ndarray, xi):
    """prod_i cos(theta_i xi), vectorized over xi."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    return np.prod(np.cos(np.multiply.outer(xi, theta)), axis=1)


def bernoulli_gamma_tail_fourier(theta, sigma: float, t: float, tol: float = 1e-9) -> float:
    """P(sigma G + sum_i theta_i D_i >= t) for symmetric Bernoulli D_i.

    Inversion with the Gaussian reference N(0, |theta|^2) subtracted: since the
    characteristic function gamma(sigma xi) prod cos(theta_i xi) vanishes for
    |xi| >= 1/sigma, the non-Gaussian part of the integral is supported there,
    and the Gaussian remainder beyond 1/sigma is integrated separately.
    """
    theta = np.asarray(theta, dtype=float)
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    nrm2 = float(theta @ theta)
    if nrm2 == 0:
        raise ValueError("theta must be nonzero")
    nrm = math.sqrt(nrm2)
    kernel = build_kernel()
    g = kernel.char_fn
    cut = 1.0 / sigma

    def sin_kernel(xi):
        # sin(t xi)/xi with the removable singularity expanded for small xi
        if abs(t * xi) < 1e-4:
            return t * (1.0 - (t * xi) ** 2 / 6.0)
        return math.sin(t * xi) / xi

    def integrand(xi):
        chi = float(g(sigma * xi)) * float(np.prod(np.cos(theta * xi)))
        return (chi - math.exp(-0.5 * xi * xi * nrm2)) * sin_kernel(xi)

    main, _ = quad(integrand, 0.0, cut, epsabs=tol / 4.0, epsrel=1e-12, limit=500)
    # Gaussian part beyond the spline support
    gauss_hi = math.sqrt(1420.0) / nrm  # integrand underflows past here
    g_tail = 0.0
    if gauss_hi > cut:
        g_tail, _ = quad(lambda xi: math.exp(-0.5 * xi * xi * nrm2) * sin_kernel(xi),
                         cut, gauss_hi, epsabs=tol / 4.0, epsrel=1e-12, limit=200)
    return float(normal_upper_tail(t / nrm)) - main / math.pi + g_tail / math.pi


def _all_sign_sums(theta: np.ndarray) -> np.ndarray:
    sums = np.zeros(1)
    for th in theta:
        sums = np.concatenate([sums - th, sums + th])
    return sums


def bernoulli_gamma_tail_bruteforce(theta, sigma: float, t: float) -> float:
    """Oracle by full enumeration: 2^-n sum over sign patterns of the G upper tail."""
    theta = np.asarray(theta, dtype=float)
    if theta.size > 24:
        raise ValueError("brute force limited to n <= 24")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    kernel = build_kernel()
    sums = _all_sign_sums(theta)
    tails = kernel.upper_tail_batch((t - sums) / sigma)
    return float(np.mean(tails))


def _tail_batch(theta: np.ndarray, sigma: float, ts: np.ndarray) -> np.ndarray:
    """Vectorized P(sigma G + sum theta_i D_i >= t) over a t-grid.

    Same integral as bernoulli_gamma_tail_fourier on composite Gauss-Legendre
    panels sized to the total oscillation frequency.
    """
    kernel = build_kernel()
    nrm2 = float(theta @ theta)
    nrm = math.sqrt(nrm2)
    cut = 1.0 / sigma
    omega = float(np.max(np.abs(ts))) + float(np.sum(np.abs(theta))) + 1.0
    n_pan = max(16, int(math.ceil(cut * omega / 5.0)))
    xi, w = _gl_panels(0.0, cut, n_pan)
    chi = kernel.char_fn(sigma * xi) * _char_bernoulli(theta, xi)
    diff_w = (chi - np.exp(-0.5 * xi * xi * nrm2)) / xi * w
    main = np.empty_like(ts)
    for i in range(0, ts.size, 2048):
        blk = ts[i:i + 2048]
        main[i:i + 2048] = np.sin(np.multiply.outer(blk, xi)) @ diff_w
    gauss_hi = math.sqrt(1420.0) / nrm
    g_tail = np.zeros_like(ts)
    if gauss_hi > cut:
        n_pan2 = max(8, int(math.ceil((gauss_hi - cut) * omega / 5.0)))
        xi2, w2 = _gl_panels(cut, gauss_hi, n_pan2)
        gw2 = np.exp(-0.5 * xi2 * xi2 * nrm2) / xi2 * w2
        for i in range(0, ts.size, 2048):
            blk = ts[i:i + 2048]
            g_tail[i:i + 2048] = np.sin(np.multiply.outer(blk, xi2)) @ gw2
    return normal_upper_tail(ts / nrm) - main / math.pi + g_tail / math.pi


class Lemma700Report(NamedTuple):
    sup_error: float
    bound_rhs: float
    argmax_t: float
    n_points: int


def lemma700_report(theta, sigma: float, n_grid: int = 4096) -> Lemma700Report:
    """Sup over a t-grid of |P(sigma G + sum theta_i D_i >= t) - Phi(t/|theta|)|.

    Requires the small-coefficient hypothesis sum_{|theta_i| >= sigma} theta_i^2
    <= |theta|^2/2.  bound_rhs = sigma^2/|theta|^2 + sum theta_i^4/|theta|^4 is
    the constant-free right side, reported for scaling comparison only.
    """
    theta = np.asarray(theta, dtype=float)
    nrm2 = float(theta @ theta)
    big = np.abs(theta) >= sigma
    if float(theta[big] @ theta[big]) > 0.5 * nrm2 + 1e-15:
        raise ValueError("hypothesis violated: sum over |theta_i| >= sigma of theta_i^2 "
                         "exceeds |theta|^2 / 2")
    nrm = math.sqrt(nrm2)
    ts = np.linspace(-8.0 * nrm, 8.0 * nrm, n_grid)
    if theta.size <= 12:
        atoms = _all_sign_sums(theta)
        ts = np.union1d(ts, atoms)
    probs = _tail_batch(theta, sigma, ts)
    errs = np.abs(probs - normal_upper_tail(ts / nrm))
    k = int(np.argmax(errs))
    bound = sigma ** 2 / nrm2 + float(np.sum(theta ** 4)) / nrm2 ** 2
    return Lemma700Report(float(errs[k]), bound, float(ts[k]), ts.size)


# -- Gaussian tail inequality checks --------------------------------------------

class GaussTailRow(NamedTuple):
    t: float
    ratio: float


def gauss_tail_bounds_check(t_grid, lo: float = 0.99, hi: float = 1.35):
    """Ratios r(t) = Phi(t)(t+1)/phi(t) on [0, 10]; sandwiched in [lo, hi]."""
    t = np.asarray(t_grid, dtype=float)
    if np.any(t < 0) or np.any(t > 10):
        raise ValueError("t_grid must lie in [0, 10]")
    r = normal_upper_tail(t) * (t + 1.0) / normal_density(t)
    rows = [GaussTailRow(float(a), float(b)) for a, b in zip(t, r)]
    passed = bool(np.all((r >= lo) & (r <= hi)))
    return rows, passed


class Lemma1034Report(NamedTuple):
    c1_part_i: float       # max over grid of delta / Phi(t0 + 2 delta^(1/4))
    c1_part_iii: float     # max over grid of 4 phi(t0)^2 / delta
    c2_max: float          # largest admissible c2 = min delta^(3/4) / (2 phi(t0))
    part_ii_min: float     # min of (1 - Phi(t0 - 2 delta^(1/4)))
    implication_ok: bool


def lemma1034_check(t0_grid) -> Lemma1034Report:
    """Measured constants for the shifted-tail lemma on a t0 >= 0 grid.

    (i) Phi(t0 + 2 delta^(1/4)) >= delta/C1 with delta = Phi(t0); (ii) the
    unconditional lower tail bound; (iii) whenever |1/x - 1/phi(t0)| <=
    c2 delta^(-3/4) then x^2 <= C1 delta, certified through x <= 2 phi(t0).
    """
    t0 = np.asarray(t0_grid, dtype=float)
    if np.any(t0 < 0):
        raise ValueError("t0 >= 0 required")
    delta = normal_upper_tail(t0)
    shift = 2.0 * delta ** 0.25
    c1_i = float(np.max(delta / normal_upper_tail(t0 + shift)))
    part_ii = float(np.min(1.0 - normal_upper_tail(t0 - shift)))
    phi0 = normal_density(t0)
    c2 = float(np.min(delta ** 0.75 / (2.0 * phi0)))
    c1_iii = float(np.max(4.0 * phi0 ** 2 / delta))
    # verify the implication with the measured c2: worst admissible x is
    # 1/(1/phi - c2 delta^(-3/4)) <= 2 phi, hence x^2 <= 4 phi^2 <= c1_iii delta
    lower_recip = 1.0 / phi0 - c2 * delta ** (-0.75)
    ok = bool(np.all(lower_recip >= 1.0 / (2.0 * phi0) - 1e-12))
    return Lemma1034Report(c1_i, c1_iii, c2, part_ii, ok)


# -- smoothing comparison on sampled marginals -----------------------------------

class SmoothingComparison(NamedTuple):
    smoothed_dist: float
    raw_dist: float
    epsilon: float
    dkw: float


def smoothing_comparison(marginal: np.ndarray, theta, kernel: SmoothingKernel,
                         rng: np.random.Generator) -> SmoothingComparison:
    """Kolmogorov distance against the normal CDF of a sampled marginal, with and
    without the additive eps*G smoothing, eps = 10 sqrt(sum theta_i^4)."""
    from .estimators import kolmogorov_distance

    theta = np.asarray(theta, dtype=float)
    eps = 10.0 * math.sqrt(float(np.sum(theta ** 4)))
    raw = kolmogorov_distance(marginal, normal_cdf)
    g = sample_kernel(kernel, marginal.size, rng)
    smooth = kolmogorov_distance(marginal + eps * g, normal_cdf)
    return SmoothingComparison(smooth.distance, raw.distance, eps, raw.dkw_band)


# -- closed-form oscillatory tails (used to cross-check kernel moments) -----------

def _tail_cos_over_xk(a: float, k: int, big_t: float) -> float:
    """int_T^inf cos(a x)/x^k dx by reduction to the sine/cosine integrals."""
    if k == 1:
        return -float(sici(a * big_t)[1])
    return (math.cos(a * big_t) * big_t ** (1 - k)) / (k - 1) \
        - a / (k - 1) * _tail_sin_over_xk(a, k - 1, big_t)


def _tail_sin_over_xk(a: float, k: int, big_t: float) -> float:
    if k == 1:
        return math.pi / 2.0 - float(sici(a * big_t)[0])
    return (math.sin(a * big_t) * big_t ** (1 - k)) / (k - 1) \
        + a / (k - 1) * _tail_cos_over_xk(a, k - 1, big_t)


def sinc8_tail_integral(k: int, big_t: float) -> float:
    """int_T^inf sin^8(x/8) / x^k dx, exact via the cosine expansion of sin^8."""
    if big_t <= 0 or k < 2:
        raise ValueError("need T > 0 and k >= 2")
    coefs = ((35.0, 0.0), (-56.0, 0.25), (28.0, 0.5), (-8.0, 0.75), (1.0, 1.0))
    total = coefs[0][0] / 128.0 * big_t ** (1 - k) / (k - 1)
    for c, a in coefs[1:]:
        total += c / 128.0 * _tail_cos_over_xk(a, k, big_t)
    return total


def kernel_moment_by_quadrature(kernel: SmoothingKernel, order: int,
                                big_t: float = 400.0) -> float:
    """E G^order for even order, by quadrature on [0, T] plus the exact tail."""
    if order % 2 or order < 0 or order > 6:
        raise ValueError("order must be one of 0, 2, 4, 6")
    val, _ = quad(lambda x: x ** order * kernel.density(x), 0.0, big_t,
                  epsabs=1e-13, epsrel=1e-13, limit=4000)
    tail = kernel.kappa1 * sinc8_tail_integral(8 - order, big_t)
    return 2.0 * (val + tail)
