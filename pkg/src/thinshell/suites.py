"""Named experiment suites.

Each suite returns a SuiteResult of CSV rows plus pass/fail assertions, with
every assertion carrying the anchor string of the inequality it instantiates.
The same functions back the command-line runner and the acceptance tests.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from typing import NamedTuple

import numpy as np

from . import bodies as bd
from . import clt
from . import estimators as est
from . import sampler as smp
from . import spectral as spec
from . import transport as tpt
from .reporting import Assertion, CsvRow, SuiteResult

DISC_LAMBDA1 = 3.3900304052  # (first positive root of J_1')^2


class BodyTemplate(NamedTuple):
    """Body family from a config block; instantiated per dimension.

    Without an explicit scale the instantiation is isotropically normalized
    (Monte Carlo moment pass for lp exponents without closed-form moments).
    ``spacing`` is the raster spacing used by grid-measure suites.
    """

    kind: str
    p: float | None = None
    half_widths: tuple[float, ...] | None = None
    scale: tuple[float, ...] | None = None
    dim: int | None = None
    spacing: float | None = None

    def label(self, n: int) -> str:
        return self.instantiate(n).label()

    def instantiate(self, n: int | None = None, seed: int = 0) -> bd.BodySpec:
        n = self.dim or n
        if n is None:
            raise ValueError("body template needs a dimension")
        if self.kind == "counterexample_cross":
            return bd.BodySpec.counterexample_cross(n)
        if self.kind == "product_of_intervals":
            body = bd.BodySpec.product_of_intervals(self.half_widths or (1.0,) * n)
        elif self.kind == "lp_ball":
            body = bd.BodySpec.lp_ball(n, p=self.p)
        else:
            body = bd.BodySpec(self.kind, n, (1.0,) * n)
        if self.scale is not None:
            scale = self.scale if len(self.scale) == n else tuple(self.scale) * n
            return bd.BodySpec(body.kind, n, scale, p=body.p, half_widths=body.half_widths)
        moments = bd.analytic_second_moments(body)
        if moments is None:
            moments = smp.estimate_second_moments(body, count=10 ** 6, seed=seed)
        return bd.isotropic_scale(body, moments)


CUBE = BodyTemplate("cube")
BALL = BodyTemplate("euclidean_ball")
L1_BALL = BodyTemplate("lp_ball", 1.0)

_SLOPE_WINDOW = (-1.15, -0.85)


def _within(value: float, target: float, half_width: float) -> bool:
    return abs(value - target) <= half_width


# -- thin-shell suite -----------------------------------------------------------

def _thinshell_task(args):
    template, n, samples, seed = args
    body = template.instantiate(n, seed)
    s = smp.sample_exact(body, samples, seed)
    stats = est.thin_shell_stats(s)
    return template, n, body.label(), stats


def thinshell_suite(templates: list[BodyTemplate], n_grid: list[int], samples: int,
                    seed: int, workers: int = 1,
                    shell_n: tuple[int, ...] = (16, 64),
                    shell_templates: tuple[BodyTemplate, ...] = (CUBE, L1_BALL, BALL),
                    dump_path=None) -> SuiteResult:
    """Thin-shell variance law, shell deviation and the weighted-square bound.

    Checks, per cube ensemble: Var(|X|^2/n) = 0.8/n within 3 MC sigma and the
    log-log slope in [-1.15, -0.85]; per body at the shell dimensions:
    E(|X| - sqrt n)^2 <= 16 and Var(sum a_i X_i^2) <= 16 sum a_i^2 for 20
    random nonnegative coefficient vectors.
    """
    out = SuiteResult("thinshell")
    tasks = [(t, n, samples, seed) for t in templates for n in sorted(n_grid)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_thinshell_task, tasks))
    else:
        results = [_thinshell_task(t) for t in tasks]

    by_template: dict[BodyTemplate, list[tuple[int, float]]] = {}
    first_dumped = False
    for template, n, label, stats in results:
        vr, sd = stats.var_ratio, stats.shell_dev
        out.rows.append(CsvRow(vr.estimator_id, label, n, samples, seed, vr.value,
                               vr.half_width, 16.0 / n))
        out.rows.append(CsvRow(sd.estimator_id, label, n, samples, seed, sd.value,
                               sd.half_width, 16.0))
        by_template.setdefault(template, []).append((n, vr.value))
        if template.kind == "cube":
            out.assertions.append(Assertion(
                f"thinshell.var_ratio.{label}", "eq (3)", vr.value,
                f"0.8/n +- {vr.half_width:.3g} (3 MC sigma)",
                _within(vr.value, 0.8 / n, vr.half_width)))
        if not first_dumped and dump_path is not None:
            s = smp.sample_exact(template.instantiate(n, seed), min(samples, 10 ** 4), seed)
            smp.dump_samples(s, dump_path)
            first_dumped = True

    for template, points in by_template.items():
        if len(points) >= 3:
            fit = est.scaling_fit(points)
            label = template.label(points[-1][0])
            out.rows.append(CsvRow("thin_shell.loglog_slope", template.kind, 0,
                                   samples, seed, fit.slope, 0.0, -1.0,
                                   {"intercept": fit.intercept, "r2": fit.r2}))
            out.assertions.append(Assertion(
                f"thinshell.slope.{template.kind}", "eq (3)", fit.slope,
                f"slope in [{_SLOPE_WINDOW[0]}, {_SLOPE_WINDOW[1]}]",
                _SLOPE_WINDOW[0] <= fit.slope <= _SLOPE_WINDOW[1]))

    # shell deviation and weighted-square bound at the shell dimensions
    rng = np.random.Generator(np.random.Philox(key=np.array([seed, 2 ** 32], dtype=np.uint64)))
    for template in shell_templates:
        for n in shell_n:
            body = template.instantiate(n, seed)
            s = smp.sample_exact(body, samples, seed)
            sd = est.thin_shell_stats(s).shell_dev
            out.rows.append(CsvRow(sd.estimator_id, body.label(), n, samples, seed,
                                   sd.value, sd.half_width, 16.0))
            out.assertions.append(Assertion(
                f"shell_dev.{body.label()}", "abstract, C <= 4", sd.value,
                f"<= 16 + {sd.half_width:.3g}", sd.value <= 16.0 + sd.half_width))
            if n == max(shell_n):
                worst = -math.inf
                ok = True
                for _ in range(20):
                    a = est.WeightVector.coefficients(rng.uniform(0.0, 2.0, size=n))
                    e, bound = est.weighted_square_variance(s, a)
                    margin = e.value - bound
                    worst = max(worst, margin + e.half_width * 0)
                    ok = ok and (e.value <= bound + e.half_width)
                out.rows.append(CsvRow("cor204i.worst_margin", body.label(), n, samples,
                                       seed, worst, 0.0, 0.0))
                out.assertions.append(Assertion(
                    f"weighted_square.{body.label()}", "Cor 204(i)", worst,
                    "Var(sum a X^2) <= 16 sum a^2 + 3 MC sigma, 20 random a", ok))
    return out


# -- identities suite --------------------------------------------------------------

def identities_suite() -> SuiteResult:
    """The two segment identities on the canonical 12-point (a, p, r) grid."""
    out = SuiteResult("identities")
    for a, p, r in est.IDENTITY_GRID:
        vals = est.verify_identities(a, p, r)
        label = f"a={a:g};p={p:g};r={r:g}"
        err217 = abs(vals.lhs217 - vals.rhs217)
        err333 = abs(vals.lhs333 - vals.rhs333)
        out.rows.append(CsvRow("identity.check", label, 0, 0, 0,
                               max(err217, err333), 0.0, 1e-10,
                               {"lhs217": vals.lhs217, "rhs217": vals.rhs217,
                                "lhs333": vals.lhs333, "rhs333": vals.rhs333}))
        out.assertions.append(Assertion(
            f"identity.{label}", "eq (217)/(333)", max(err217, err333),
            "|lhs - rhs| <= 1e-10 (1 + |rhs|)",
            err217 <= 1e-10 * (1 + abs(vals.rhs217))
            and err333 <= 1e-10 * (1 + abs(vals.rhs333))))
    return out


# -- smoothing kernel and smoothed-sum suite ------------------------------------------

def clt_suite(seed: int, oracle_instances: int = 100,
              scaling_ns: tuple[int, ...] = (8, 16, 32, 64),
              sigma_factor: float = 2.0) -> SuiteResult:
    """Kernel contract, inversion-vs-enumeration equivalence, sup-error scaling,
    and the Gaussian tail inequalities."""
    out = SuiteResult("clt")
    kernel = clt.build_kernel()

    # band-limit and bounds contract
    xi_out = np.linspace(1.0, 2.0, 10 ** 4)
    beyond = float(np.max(np.abs(kernel.char_fn(xi_out))))
    out.assertions.append(Assertion("kernel.support", "eq_1032", beyond,
                                    "gamma(xi) = 0 for |xi| >= 1 (exact)", beyond == 0.0))
    xi = np.linspace(-1.0, 1.0, 10 ** 5)
    g = kernel.char_fn(xi)
    margin = float(np.min(g - (1.0 - 1000.0 * xi ** 2)))
    out.assertions.append(Assertion("kernel.quadratic_bound", "eq_313", margin,
                                    "1 - 1000 xi^2 <= gamma <= 1 on a 1e5 grid",
                                    margin >= 0.0 and float(np.max(g)) <= 1.0
                                    and float(np.min(g)) >= 0.0))
    dens_min = float(np.min(kernel.density(np.linspace(-400, 400, 10 ** 5))))
    mass = clt.kernel_moment_by_quadrature(kernel, 0)
    out.assertions.append(Assertion("kernel.density", "sin^8 kernel", mass,
                                    "density >= 0 and integrates to 1 +- 1e-10",
                                    dens_min >= 0.0 and abs(mass - 1.0) <= 1e-10))
    m6 = clt.kernel_moment_by_quadrature(kernel, 6)
    m6_rel = abs(m6 - kernel.moments[2]) / kernel.moments[2]
    out.assertions.append(Assertion("kernel.sixth_moment", "E Gamma^6 < inf", m6,
                                    "quadrature converges to the spline value",
                                    m6_rel <= 1e-8))
    out.rows.append(CsvRow("kernel.moments", "kernel", 0, 0, 0, kernel.moments[0],
                           0.0, 24.0, {"m4": kernel.moments[1], "m6": kernel.moments[2]}))

    # Fourier inversion vs 2^n enumeration
    rng = np.random.Generator(np.random.Philox(key=np.array([seed, 1], dtype=np.uint64)))
    worst = 0.0
    for _ in range(oracle_instances):
        n = int(rng.integers(1, 17))
        theta = rng.uniform(-1.0, 1.0, size=n)
        if not np.any(theta):
            theta[0] = 0.5
        sigma = float(rng.uniform(0.05, 1.5))
        t = float(rng.uniform(-3.0, 3.0))
        diff = abs(clt.bernoulli_gamma_tail_fourier(theta, sigma, t)
                   - clt.bernoulli_gamma_tail_bruteforce(theta, sigma, t))
        worst = max(worst, diff)
    out.rows.append(CsvRow("lemma700.oracle_gap", "bernoulli", 0, oracle_instances,
                           seed, worst, 0.0, 1e-6))
    out.assertions.append(Assertion("lemma700.oracle_equivalence", "Lemma 700", worst,
                                    f"max |fourier - brute| <= 1e-6 over "
                                    f"{oracle_instances} instances", worst <= 1e-6))

    # sup-error scaling in n
    errs = []
    for n in scaling_ns:
        theta = np.full(n, 1.0 / math.sqrt(n))
        rep = clt.lemma700_report(theta, sigma=sigma_factor / math.sqrt(n))
        errs.append((n, rep.sup_error))
        out.rows.append(CsvRow("lemma700.sup_error", f"uniform_theta(n={n})", n, 0,
                               seed, rep.sup_error, 0.0, rep.bound_rhs,
                               {"theta_spec": "uniform", "n": n,
                                "sigma": sigma_factor / math.sqrt(n),
                                "sup_error": rep.sup_error, "bound_rhs": rep.bound_rhs,
                                "argmax_t": rep.argmax_t, "quadrature_tol": 1e-9}))
    fit = est.scaling_fit(errs)
    out.rows.append(CsvRow("lemma700.scaling_slope", "uniform_theta", 0, 0, seed,
                           fit.slope, 0.0, -1.0, {"r2": fit.r2}))
    out.assertions.append(Assertion(
        "lemma700.scaling", "Lemma 700 (O(sigma^2 + sum theta^4))", fit.slope,
        f"slope in [{_SLOPE_WINDOW[0]}, {_SLOPE_WINDOW[1]}] at sigma = "
        f"{sigma_factor:g}/sqrt(n)",
        _SLOPE_WINDOW[0] <= fit.slope <= _SLOPE_WINDOW[1]))
    if not (_SLOPE_WINDOW[0] <= fit.slope <= _SLOPE_WINDOW[1]) and sigma_factor >= 2.0:
        out.notes.append(
            f"lemma700.scaling measured slope {fit.slope:.3f}: with sigma = "
            f"{sigma_factor:g}/sqrt(n) the smoothing variance E(sigma Gamma)^2 = "
            f"{kernel.moments[0]:.1f} sigma^2 = {kernel.moments[0] * sigma_factor**2:.0f}/n "
            f"is not small over this n range, so the measured sup error sits in the "
            f"saturated regime; the 1/n law emerges for sigma factors near 1 "
            f"(see the clt test suite) or larger n.")

    # Gaussian tail sandwich and the shifted-tail constants
    rows, passed = clt.gauss_tail_bounds_check(np.linspace(0.0, 10.0, 201))
    ratios = [r.ratio for r in rows]
    out.rows.append(CsvRow("gauss_tail.ratio_range", "normal", 0, 0, 0,
                           float(min(ratios)), 0.0, float(max(ratios))))
    out.assertions.append(Assertion("gauss_tail.sandwich", "eq_640",
                                    float(max(ratios)),
                                    "Phi(t)(t+1)/phi(t) in [0.99, 1.35] on [0, 10]",
                                    passed))
    rep = clt.lemma1034_check(np.linspace(0.0, 6.0, 121))
    out.rows.append(CsvRow("lemma1034.constants", "normal", 0, 0, 0, rep.c1_part_i,
                           0.0, rep.c1_part_iii,
                           {"c2_max": rep.c2_max, "part_ii_min": rep.part_ii_min}))
    out.assertions.append(Assertion("lemma1034.implications", "Lemma 1034",
                                    rep.c1_part_i, "measured C1 finite, implication holds",
                                    rep.implication_ok and math.isfinite(rep.c1_part_i)))
    return out


# -- Berry-Esseen trend suite -----------------------------------------------------------

def _streamed_cube_marginal(n: int, count: int, seed: int) -> np.ndarray:
    body = bd.isotropic_body("cube", n)
    theta = est.WeightVector.uniform_direction(n).array
    out = np.empty(count)
    done = 0
    for block in smp.exact_blocks(body, count, seed):
        out[done:done + block.shape[0]] = block @ theta
        done += block.shape[0]
    return out


def berry_esseen_suite(seed: int, cube_ns: tuple[int, ...] = (16, 64, 256),
                       counter_ns: tuple[int, ...] = (16, 256),
                       samples: int = 10 ** 6) -> SuiteResult:
    """Kolmogorov distance of uniform-direction marginals: decay for the cube,
    a positive constant for the axis-segment counterexample density."""
    out = SuiteResult("berry_esseen")
    for n in sorted(cube_ns):
        vals = _streamed_cube_marginal(n, samples, seed)
        res = est.kolmogorov_distance(vals, clt.normal_cdf)
        bound = max(3.0 * res.dkw_band, 10.0 / n)
        floor_dominates = 3.0 * res.dkw_band >= 10.0 / n
        out.rows.append(CsvRow("berry_esseen.kolmogorov", f"cube(n={n})", n, samples,
                               seed, res.distance, res.dkw_band, bound,
                               {"mc_floor_dominates": floor_dominates}))
        out.assertions.append(Assertion(
            f"berry_esseen.cube.n{n}", "Thm 1.1 eq (2)", res.distance,
            f"<= max(3 DKW = {3*res.dkw_band:.2e}, 10/n = {10/n:.2e})",
            res.distance <= bound))
        if floor_dominates:
            out.notes.append(f"cube n={n}: the DKW Monte Carlo floor dominates the "
                             f"10/n reference; the distance is resolution-limited")
    for n in sorted(counter_ns):
        theta = est.WeightVector.uniform_direction(n).array
        # per-n seed offset: the marginal law is n-independent, so reusing the
        # stream verbatim would repeat the identical draw sequence
        vals = smp.counterexample_marginal(n, samples, theta, seed + n)
        res = est.kolmogorov_distance(vals, clt.normal_cdf)
        out.rows.append(CsvRow("berry_esseen.counterexample", f"counterexample(n={n})",
                               n, samples, seed, res.distance, res.dkw_band, 0.045))
        out.assertions.append(Assertion(
            f"berry_esseen.counterexample.n{n}", "no gaussian limit: axis-segment density",
            res.distance, ">= 0.045 and within 0.0572 +- 0.01",
            res.distance >= 0.045 and abs(res.distance - 0.0572) <= 0.01))
    # smoothing comparison, constants reported
    n = 64
    marg = _streamed_cube_marginal(n, min(samples, 10 ** 5), seed)
    rep = clt.smoothing_comparison(marg, est.WeightVector.uniform_direction(n).array,
                                   clt.build_kernel(), smp.substream(seed, 3))
    out.rows.append(CsvRow("smoothing.comparison", f"cube(n={n})", n, marg.size, seed,
                           rep.raw_dist, rep.dkw, 10.0 * rep.epsilon ** 2,
                           {"smoothed_dist": rep.smoothed_dist, "epsilon": rep.epsilon}))
    return out


# -- transport suite ------------------------------------------------------------------------

def _random_even_trig(rng: np.random.Generator, degree: int = 2):
    c = rng.uniform(-1.0, 1.0, size=(degree + 1, degree + 1))

    def f(x, y, c=c):
        out = np.zeros_like(x)
        for j in range(c.shape[0]):
            for k in range(c.shape[1]):
                out += c[j, k] * np.cos(j * math.pi * x) * np.cos(k * math.pi * y)
        return out

    return f


def transport_suite(seed: int, grid_nodes: int = 4096,
                    epsilons: tuple[float, ...] = (0.1, 0.05, 0.01),
                    raster_h: float = 1 / 32, n_trig: int = 5,
                    raster_bodies: list[tuple[bd.BodySpec, float]] | None = None) -> SuiteResult:
    """Transport duality on the linear 1D example, the fiberwise monotone map,
    and the variance-vs-dual-norm inequality on 2D rasters."""
    out = SuiteResult("transport")
    target = math.sqrt(16.0 / 15.0)

    mu = tpt.DiscreteMeasure.grid_1d(-1.0, 1.0, grid_nodes)
    h_fn = 2.0 * mu.support[:, 0]
    rep = tpt.verify_thm258(mu, h_fn, epsilons)
    for eps, ratio in rep.ratios:
        out.rows.append(CsvRow("thm258.ratio", "segment[-1,1]", grid_nodes, 0, seed,
                               ratio, 0.0, rep.norm, {"epsilon": eps}))
    out.rows.append(CsvRow("thm258.norm", "segment[-1,1]", grid_nodes, 0, seed,
                           rep.norm, 0.0, target))
    out.assertions.append(Assertion("thm258.norm_value", "Thm 258 example", rep.norm,
                                    f"= {target:.4f} +- 0.01",
                                    abs(rep.norm - target) <= 0.01))
    ratio_001 = dict((e, r) for e, r in rep.ratios)[0.01]
    out.assertions.append(Assertion("thm258.ratio_at_0.01", "Thm 258", ratio_001,
                                    "W2(mu, mu_eps)/eps within 2% of the dual norm",
                                    abs(ratio_001 - rep.norm) <= 0.02 * rep.norm))
    out.assertions.append(Assertion("thm258.duality", "Thm 258", rep.min_ratio,
                                    "norm <= min ratio + tolerance", rep.passed))

    tmap = tpt.monotone_transport_1d(lambda x: x ** 2, -1.0, 1.0, 0.1)
    defect = tmap.pushforward_defect(1000)
    out.rows.append(CsvRow("monotone_transport.defect", "segment[-1,1]", 1000, 0, seed,
                           defect, 0.0, 1e-10, {"epsilon": 0.1}))
    out.assertions.append(Assertion("monotone_transport.pushforward", "Lemma 3.2",
                                    defect, "<= 1e-10 at 1000 points", defect <= 1e-10))

    rng = np.random.Generator(np.random.Philox(key=np.array([seed, 7], dtype=np.uint64)))
    a, b = rng.normal(size=64), rng.normal(size=64)
    mu64 = tpt.DiscreteMeasure(a[:, None], np.full(64, 1 / 64))
    nu64 = tpt.DiscreteMeasure(b[:, None], np.full(64, 1 / 64))
    gap = abs(tpt.w2_assignment(mu64, nu64) - tpt.w2_1d(mu64, nu64))
    out.assertions.append(Assertion("w2.assignment_vs_quantile", "W2 definition", gap,
                                    "agree to 1e-10 in 1D", gap <= 1e-10))

    fns = [("x^2", lambda x, y: x ** 2), ("x^2+y^2", lambda x, y: x ** 2 + y ** 2)]
    fns += [(f"trig{i}", _random_even_trig(rng)) for i in range(n_trig)]
    if raster_bodies is None:
        raster_bodies = [(bd.BodySpec.cube(2), raster_h),
                         (bd.BodySpec.euclidean_ball(2), raster_h)]
    for body, h in raster_bodies:
        body_label = body.label()
        for fname, f in fns:
            vrep = tpt.verify_variance_bound(body, f, h)
            out.rows.append(CsvRow("lemma21.variance_bound", f"{body_label}:{fname}",
                                   2, 0, seed, vrep.var, 0.0, vrep.bound,
                                   {"tolerance": vrep.tolerance}))
            out.assertions.append(Assertion(
                f"lemma21.{body_label}.{fname}", "Lemma 2.1", vrep.var,
                f"Var <= dual-norm bound {vrep.bound:.4g} + O(h)", vrep.passed))
    return out


# -- spectral suite ----------------------------------------------------------------------------

def spectral_suite(seed: int, plot_dir=None) -> SuiteResult:
    """Neumann spectra on the square and disc: eigenvalues with Richardson
    extrapolation, multiplicity, gradient bias, flip antisymmetry, and the
    bounding-cube comparison."""
    out = SuiteResult("spectral")
    square = bd.BodySpec.cube(2)
    disc = bd.BodySpec.euclidean_ball(2)

    rich_sq = spec.richardson_lambda1(square, [1 / 16, 1 / 32, 1 / 64])
    target_sq = math.pi ** 2 / 4.0
    out.rows.append(CsvRow("spectral.lambda1", "square", 2, 0, seed,
                           rich_sq.extrapolated, 0.0, target_sq,
                           {"h_values": list(rich_sq.h_values),
                            "raw": list(rich_sq.lambda1_values),
                            "order": rich_sq.observed_order}))
    out.assertions.append(Assertion("spectral.square.lambda1", "interval oracle",
                                    rich_sq.extrapolated, f"= {target_sq:.4f} +- 1%",
                                    abs(rich_sq.extrapolated - target_sq) <= 0.01 * target_sq))

    rich_disc = spec.richardson_lambda1(disc, [1 / 32, 1 / 64, 1 / 128])
    out.rows.append(CsvRow("spectral.lambda1", "disc", 2, 0, seed,
                           rich_disc.extrapolated, 0.0, DISC_LAMBDA1,
                           {"h_values": list(rich_disc.h_values),
                            "raw": list(rich_disc.lambda1_values),
                            "order": rich_disc.observed_order}))
    out.assertions.append(Assertion("spectral.disc.lambda1", "Bessel-root oracle",
                                    rich_disc.extrapolated, f"= {DISC_LAMBDA1:.4f} +- 1%",
                                    abs(rich_disc.extrapolated - DISC_LAMBDA1)
                                    <= 0.01 * DISC_LAMBDA1))

    for body, label, h in [(square, "square", 1 / 32), (disc, "disc", 1 / 64)]:
        grid = spec.rasterize(body, h)
        pairs = spec.lowest_eigenpairs(grid, k=4)
        cluster = spec.lambda1_cluster(pairs)
        out.rows.append(CsvRow("spectral.eigen_report", label, 2, 0, seed,
                               pairs[1].value, 0.0, float("nan"), {
                                   "body": body.label(), "h": h,
                                   "lambda": [p.value for p in pairs],
                                   "residuals": [p.residual for p in pairs],
                                   "bias_vectors": [list(spec.gradient_bias(grid, p))
                                                    for p in cluster]}))
        out.rows.append(CsvRow("spectral.multiplicity", label, 2, 0, seed,
                               float(len(cluster)), 0.0, 2.0))
        out.assertions.append(Assertion(f"spectral.multiplicity.{label}", "Cor 4.1",
                                        float(len(cluster)), "= 2 (and never > 2)",
                                        len(cluster) == 2))
        rank = spec.gradient_bias_rank(grid, cluster)
        out.rows.append(CsvRow("spectral.bias_rank", label, 2, 0, seed,
                               float(rank.rank), 0.0, 2.0,
                               {"singular_values": list(rank.singular_values)}))
        out.assertions.append(Assertion(f"spectral.bias_rank.{label}", "Cor 4.1",
                                        float(rank.rank),
                                        "gradient-bias map injective on the eigenspace",
                                        rank.rank == len(cluster)))
        sym = spec.symmetry_detect(grid, cluster)
        out.rows.append(CsvRow("spectral.antisymmetry_defect", label, 2, 0, seed,
                               sym.defect, 0.0, 1e-6,
                               {"symmetry_report": {"axis": sym.axis, "defect": sym.defect,
                                                    "central_defect": sym.central_defect,
                                                    "passed": sym.passed}}))
        out.assertions.append(Assertion(f"spectral.antisymmetric_member.{label}",
                                        "Cor 4.2(i)", sym.defect, "defect <= 1e-6",
                                        sym.passed))
        if plot_dir is not None:
            from .svgplot import heatmap
            full = np.zeros(grid.mask.shape)
            full[grid.mask] = pairs[1].vector
            heatmap(f"{plot_dir}/eigenfunction_{label}.svg", grid.mask, full,
                    f"first nontrivial Neumann eigenfunction, {label}")

    comp = spec.cube_comparison([disc, bd.BodySpec.lp_ball(2, p=1.0)], R=1.0, h=1 / 32)
    for row in comp.rows:
        out.rows.append(CsvRow("spectral.cube_comparison", row.label, 2, 0, seed,
                               row.lambda1, 0.0, comp.lambda1_cube))
        out.assertions.append(Assertion(f"spectral.cube_comparison.{row.label}",
                                        "Cor 4.3", row.lambda1,
                                        f">= lambda1(cube) = {comp.lambda1_cube:.4f}",
                                        row.passed))
    out.notes.append(comp.note)

    witness = spec.domain_monotonicity_witness(h=1 / 48)
    out.rows.append(CsvRow("spectral.monotonicity_witness", witness.subdomain, 2, 0,
                           seed, witness.lambda1_subdomain, 0.0, witness.lambda1_disc))
    out.notes.append(
        f"domain monotonicity fails for the disc: {witness.subdomain} has lambda1 = "
        f"{witness.lambda1_subdomain:.4f} < {witness.lambda1_disc:.4f} (reported, "
        f"not asserted)")
    return out
