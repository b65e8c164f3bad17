"""Named acceptance suites binding simulations to analytic predictions.

Every suite is deterministic given its configuration (seeds included) and
returns a :class:`SuiteReport`.  Checks of kind ``"ks"`` also carry a
Bonferroni-adjusted verdict across the KS checks of the suite.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from scipy.integrate import cumulative_trapezoid
from scipy.stats import norm

from ..core_paths import RngStream, TimeGrid, brownian_batch, chunk_ranges, sample_brownian_path
from ..grsk import sum_residual, transform_array, verify_braid, verify_symmetry
from ..polymer import free_energy_check, ground_state_array, log_partition_array
from ..rmt import largest_eigenvalue_samples
from ..toda_sde import (
    EntranceSpec,
    KDrift,
    SdeConfig,
    matsumoto_yor_log_z,
    simulate_k_diffusion,
    simulate_triangular_z,
    simulate_whittaker_diffusion_n2,
    simulate_xy_pair_n2,
    symmetric_pair_from_bms,
)
from ..whittaker import (
    GibbsPatternLaw,
    asymptotic_checks,
    bump_stade_check,
    critical_point,
    entrance_first_coordinate_cdf,
    entrance_mass,
    gig_density,
    gt_volume_mc,
    hartman_watson_laplace,
    log_whittaker_psi,
    moment_transform,
    sample_sigma,
    verify_kernel_intertwining,
    verify_operator_intertwinings,
)
from .stats import KsResult, ks_critical_value, ks_one_sample, ks_two_sample


class UnknownSuite(KeyError):
    pass


@dataclass
class SuiteReport:
    suite: str
    passed: bool
    checks: list
    seed: int
    config: dict
    runtime_s: float = 0.0
    statistics: dict = field(default_factory=dict)
    passed_bonferroni: bool = True

    def as_dict(self, include_runtime: bool = True) -> dict:
        out = {
            "suite": self.suite,
            "passed": self.passed,
            "passed_bonferroni": self.passed_bonferroni,
            "checks": self.checks,
            "seed": self.seed,
            "config": self.config,
            "statistics": self.statistics,
        }
        if include_runtime:
            out["runtime_s"] = self.runtime_s
        return out

    def to_json(self, include_runtime: bool = True) -> str:
        return json.dumps(_plain(self.as_dict(include_runtime)), sort_keys=True, indent=2)

    def summary_lines(self) -> list:
        lines = []
        for c in self.checks:
            tag = "PASS" if c["passed"] else "FAIL"
            lines.append(f"  [{tag}] {c['name']}: {c['statistic']:.6g} (threshold {c['threshold']:.6g})")
        return lines


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    return obj


# ---------------------------------------------------------------------------
# Check constructors
# ---------------------------------------------------------------------------


def _ks(name: str, res: KsResult, alpha: float) -> dict:
    return {"name": name, "kind": "ks", "statistic": res.statistic, "threshold": res.threshold,
            "passed": bool(res.passed), "alpha": alpha}


def _bound(name: str, value: float, threshold: float) -> dict:
    return {"name": name, "kind": "bound", "statistic": float(value), "threshold": float(threshold),
            "passed": bool(value <= threshold)}


def _at_least(name: str, value: float, threshold: float) -> dict:
    return {"name": name, "kind": "lower-bound", "statistic": float(value),
            "threshold": float(threshold), "passed": bool(value >= threshold)}


def _flag(name: str, ok: bool) -> dict:
    return {"name": name, "kind": "flag", "statistic": float(bool(ok)), "threshold": 1.0,
            "passed": bool(ok)}


def _bonferroni(checks: list) -> bool:
    ks = [c for c in checks if c["kind"] == "ks"]
    m = max(len(ks), 1)
    ok = True
    for c in checks:
        if c["kind"] == "ks":
            scale = ks_critical_value(c["alpha"] / m) / ks_critical_value(c["alpha"])
            c["threshold_bonferroni"] = c["threshold"] * scale
            c["passed_bonferroni"] = bool(c["statistic"] <= c["threshold_bonferroni"])
        else:
            c["passed_bonferroni"] = c["passed"]
        ok &= c["passed_bonferroni"]
    return ok


def _floats(v) -> list:
    if isinstance(v, str):
        return [float(s) for s in v.split(",") if s.strip()]
    return [float(s) for s in np.atleast_1d(v)]


def _ints(v) -> list:
    return [int(round(s)) for s in _floats(v)]


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------


def _dp_check(sizes, reps, dt, t_min, seed, tol):
    grid = TimeGrid.from_dt(dt, 1.0)
    m0 = grid.index(t_min)
    checks, worst = [], {}
    for n in sizes:
        err = 0.0
        for a, b in chunk_ranges(reps, 25):
            B = brownian_batch(n, None, grid, seed, a, b - a)
            lz = log_partition_array(B, dt)[:, m0:, -1]
            tw = transform_array(B[..., ::-1], dt)[:, m0:, 0]
            err = max(err, float(np.max(np.abs(lz - tw))))
        worst[n] = err
        checks.append(_bound(f"dp_identity_N{n}", err, tol))
    return checks, worst


def suite_dp_identity(cfg):
    checks, worst = _dp_check(_ints(cfg["sizes"]), cfg["reps"], cfg["dt"], cfg["t_min"], cfg["seed"],
                              cfg["tol"])
    return checks, {"max_error": worst}


def _sum_and_braid(cfg):
    seed = cfg["seed"]
    checks, stats = [], {}
    grid = TimeGrid.from_dt(cfg["dt_fine"], 1.0)
    worst = 0.0
    for n in (2, 3, 4, 5):
        p = sample_brownian_path(n, None, grid.coarsen(10), RngStream(seed, n))
        worst = max(worst, sum_residual(p))
    checks.append(_bound("sum_conservation", worst, 1e-12))
    p = sample_brownian_path(3, None, grid, RngStream(seed, 100))
    br = verify_braid(p, 1, factors=(100, 10, 1))
    ok = br["exact_on_grid"] or (np.all(np.diff(br["residual"]) < 0) and br["slope"] >= 0.9)
    checks.append(_flag("braid_decreasing_or_exact", ok))
    trap = verify_braid(p, 1, factors=(100, 10, 1), scheme="trapezoid")
    stats.update({"braid": br, "braid_trapezoid": trap})
    return checks, stats, p


def suite_grsk_identities(cfg):
    checks, worst = _dp_check([2, 3, 4, 5], cfg["reps"], 1e-3, 0.1, cfg["seed"], 1e-6)
    c2, stats, _ = _sum_and_braid(cfg)
    stats["dp_max_error"] = worst
    return checks + c2, stats


def suite_structural(cfg):
    checks, stats, p = _sum_and_braid(cfg)
    sym = verify_symmetry(p.coarsen(10))
    checks.insert(1, _bound("symmetry_N3", sym["residual"], 1e-9))
    stats["symmetry_trapezoid_N3"] = verify_symmetry(p.coarsen(10), scheme="trapezoid")["residual"]
    return checks, stats


def _ground_states(n, reps, dt, seed, tag):
    grid = TimeGrid.from_dt(dt, 1.0)
    out = []
    for a, b in chunk_ranges(reps, 50):
        B = brownian_batch(n, None, grid, seed, a, b - a, tag=tag)
        out.append(ground_state_array(B)[:, -1])
    return np.concatenate(out)


def suite_zero_temperature(cfg):
    checks, stats = [], {}
    alpha = cfg["alpha"]
    for n in _ints(cfg["sizes"]):
        lam = largest_eigenvalue_samples(n, cfg["reps"], RngStream(cfg["seed"], 10_000 + n))
        dt = cfg["dt"]
        gs = _ground_states(n, cfg["reps"], dt, cfg["seed"], n)
        res = ks_two_sample(gs, lam, alpha)
        stats[f"N{n}"] = {"dt": dt, "ks": res.statistic, "mean_gs": float(gs.mean()),
                          "mean_lambda": float(lam.mean())}
        if not res.passed:
            dt = dt / 2.0
            gs = _ground_states(n, cfg["reps"], dt, cfg["seed"], n)
            res = ks_two_sample(gs, lam, alpha)
            stats[f"N{n}_refined"] = {"dt": dt, "ks": res.statistic, "mean_gs": float(gs.mean())}
        checks.append(_ks(f"ground_state_vs_gue_N{n}", res, alpha))
    return checks, stats


def suite_matsumoto_yor(cfg):
    checks, stats = [], {}
    alpha = cfg["alpha"]
    for j, mu in enumerate(_floats(cfg["mus"])):
        sde = SdeConfig(cfg["dt"], 1.0)
        direct = matsumoto_yor_log_z(mu, sde, RngStream(cfg["seed"], 10 * j), cfg["reps"])
        w = simulate_whittaker_diffusion_n2([mu, 0.0], [-np.inf, np.inf], SdeConfig(cfg["dt"], 2.0),
                                            RngStream(cfg["seed"], 10 * j + 1), reps=cfg["reps"])
        d = (w[:, 0] - w[:, 1]) / 2.0 - math.log(2.0)
        checks.append(_ks(f"log_z_vs_difference_mu{mu:g}", ks_two_sample(direct, d, alpha), alpha))
        stats[f"mu{mu:g}"] = {"mean_direct": float(direct.mean()), "mean_diffusion": float(d.mean())}
    return checks, stats


def suite_entrance_law(cfg):
    alpha = cfg["alpha"]
    grid = TimeGrid.from_dt(cfg["dt"], 1.0)
    first = []
    for a, b in chunk_ranges(cfg["reps"], 1000):
        W = brownian_batch(2, None, grid, cfg["seed"], a, b - a)
        first.append(transform_array(W, grid.dt)[:, -1, 0])
    first = np.concatenate(first)
    mass = entrance_mass(1.0)
    checks = [
        _ks("first_coordinate_vs_entrance_cdf",
            ks_one_sample(first, lambda a: entrance_first_coordinate_cdf(a, 1.0), alpha), alpha),
        _bound("entrance_mass_error", abs(mass - 1.0), 1e-3),
    ]
    stats = {"mass": mass}
    ladder = _floats(cfg["m_ladder"])
    if ladder:
        dist = []
        sde = SdeConfig(cfg["dt"], 1.0)
        for j, m in enumerate(ladder):
            z = simulate_triangular_z([0.0, 0.0], EntranceSpec(m), sde, RngStream(cfg["seed"], 500 + j),
                                      reps=cfg["ladder_reps"])
            r = ks_one_sample(z[:, 1], lambda a: entrance_first_coordinate_cdf(a, 1.0), alpha)
            dist.append(r.statistic)
        stats["entrance_ladder"] = {"M": ladder, "ks": dist,
                                    "monotone": bool(np.all(np.diff(dist) <= 0))}
    return checks, stats


def _laplace_mc(n, s_values, t, reps, dt, seed):
    grid = TimeGrid.from_dt(dt, t)
    acc = np.zeros(len(s_values))
    sq = np.zeros(len(s_values))
    for a, b in chunk_ranges(reps, 5000):
        B = brownian_batch(n, None, grid, seed, a, b - a, tag=7)
        z = np.exp(log_partition_array(B, dt)[:, -1, -1])
        for i, s in enumerate(s_values):
            v = np.exp(-s * z)
            acc[i] += v.sum()
            sq[i] += (v * v).sum()
    mean = acc / reps
    se = np.sqrt(np.maximum(sq / reps - mean**2, 0.0) / reps)
    return mean, se


def suite_moments(cfg):
    s_values = _floats(cfg["s"])
    t = cfg["t"]
    checks, stats = [], {}
    x, w = hermegauss(160)
    w = w / w.sum()
    mc1, se1 = _laplace_mc(1, s_values, t, cfg["reps"], cfg["dt"], cfg["seed"])
    mc2, se2 = _laplace_mc(2, s_values, t, cfg["reps"], cfg["dt"], cfg["seed"] + 1)
    for i, s in enumerate(s_values):
        c1 = moment_transform(s, t, 1)
        quad1 = float(np.sum(w * np.exp(-s * np.exp(math.sqrt(t) * x))))
        c2 = moment_transform(s, t, 2)
        checks.append(_bound(f"N1_s{s:g}_vs_quadrature", abs(c1 / quad1 - 1.0), 0.005))
        checks.append(_bound(f"N2_s{s:g}_vs_monte_carlo", abs(c2 / mc2[i] - 1.0), 0.02))
        stats[f"s{s:g}"] = {"contour_N1": c1, "quadrature_N1": quad1, "mc_N1": mc1[i], "mc_se_N1": se1[i],
                            "contour_N2": c2, "mc_N2": mc2[i], "mc_se_N2": se2[i]}
    return checks, stats


def _engine_points(n, count, seed):
    g = np.random.default_rng(seed)
    pts = []
    for _ in range(count):
        x = np.sort(g.uniform(-1.0, 1.0, n))[::-1]
        lam = g.uniform(-0.5, 0.5, n) + 1j * g.uniform(-1.0, 1.0, n)
        pts.append((x, lam))
    return pts


def _rel(a, b):
    return abs(np.expm1(a.log_value - b.log_value))


def suite_whittaker_engine(cfg):
    checks, stats = [], {}
    worst2 = 0.0
    for x, lam in _engine_points(2, cfg["points_n2"], cfg["seed"]):
        c = log_whittaker_psi(x, lam, "closed-form")
        g = log_whittaker_psi(x, lam, "givental")
        m = log_whittaker_psi(x, lam, "mellin-barnes")
        worst2 = max(worst2, _rel(c, g), _rel(c, m), _rel(g, m))
    checks.append(_bound("n2_three_methods", worst2, 1e-8))
    worst3 = 0.0
    for x, lam in _engine_points(3, cfg["points_n3"], cfg["seed"] + 1):
        g = log_whittaker_psi(x, lam, "givental")
        m = log_whittaker_psi(x, lam, "mellin-barnes")
        worst3 = max(worst3, _rel(g, m))
    checks.append(_bound("n3_givental_vs_mellin_barnes", worst3, 1e-6))
    stats.update({"n2_worst": worst2, "n3_worst": worst3})
    return checks, stats


BUMP_POINTS_N2 = [
    ((0.6, 0.2), (0.5, 0.3), 0.0),
    ((0.8 + 0.3j, 0.4 - 0.3j), (0.7, 0.2), 0.5),
    ((1.0, 0.5), (0.4 + 0.5j, 0.6 - 0.5j), -0.3),
    ((0.5 + 1.0j, 0.5 - 1.0j), (0.5 - 0.4j, 0.5 + 0.4j), 0.2),
    ((1.2, 0.3), (0.3, 0.9), 0.0),
]
BUMP_POINTS_N1 = [((0.5,), (0.7,), 0.0), ((1.0 + 0.5j,), (0.3,), 0.4), ((0.2,), (0.2,), -0.5)]


def suite_bump_stade(cfg):
    r2 = [bump_stade_check(l, v, z)["residual"] for l, v, z in BUMP_POINTS_N2]
    r1 = [bump_stade_check(l, v, z)["residual"] for l, v, z in BUMP_POINTS_N1]
    return ([_bound("n2_residual", max(r2), 1e-4), _bound("n1_residual", max(r1), 1e-10)],
            {"n2": r2, "n1": r1})


def suite_asymptotics(cfg):
    betas = _floats(cfg["betas"])
    res = asymptotic_checks(_floats(cfg["x"]), _floats(cfg["lam"]), betas)
    last = res["rows"][-1]
    checks = [
        _bound("asym0_ratio_at_max_beta", abs(last["ratio0"] - 1.0), 0.01),
        _bound("asym1_ratio_at_max_beta", abs(last["ratio1"] - 1.0), 0.01),
        _flag("asym0_monotone", res["monotone0"]),
        _flag("asym1_monotone", res["monotone1"]),
    ]
    return checks, res


def suite_critical_point(cfg):
    g = np.random.default_rng(cfg["seed"])
    checks, stats = [], {}
    for n in (2, 3, 4):
        worst_g, worst_m = 0.0, 0.0
        for _ in range(cfg["points"]):
            x = np.sort(g.uniform(-2.0, 2.0, n))[::-1]
            T, info = critical_point(x, return_info=True)
            worst_g = max(worst_g, info["grad_norm"])
            worst_m = max(worst_m, info["row_mean_error"])
            if n == 2:
                stats.setdefault("n2_closed_form", 0.0)
                stats["n2_closed_form"] = max(stats["n2_closed_form"], abs(T.get(1, 1) - x.mean()))
        checks.append(_bound(f"gradient_N{n}", worst_g, 1e-10))
        checks.append(_bound(f"row_mean_N{n}", worst_m, 1e-10))
    checks.append(_bound("n2_closed_form", stats["n2_closed_form"], 1e-12))
    return checks, stats


def _gig_cdf(mu, z):
    lo, hi = -60.0, 60.0
    u = np.linspace(lo, hi, 240_001)
    with np.errstate(over="ignore", under="ignore"):
        dens = gig_density(mu, z, u)
    cdf = cumulative_trapezoid(dens, u, initial=0.0)
    mass = cdf[-1]
    return (lambda a: np.interp(a, u, cdf / mass)), mass


def suite_gig_law(cfg):
    x = np.array(_floats(cfg["x"]))
    nu = np.array(_floats(cfg["nu"]))
    alpha = cfg["alpha"]
    sam = sample_sigma(GibbsPatternLaw(x, nu), RngStream(cfg["seed"], 0), cfg["reps"])
    u = sam.entry(1, 1) - x.mean()
    mu = float(nu[0] - nu[1])
    z = 0.5 * math.exp(0.5 * (x[0] - x[1]))
    cdf, mass = _gig_cdf(mu, z)
    res = ks_one_sample(u, cdf, alpha)
    return [_ks("sigma_n2_vs_gig", res, alpha), _bound("gig_mass_error", abs(mass - 1.0), 1e-8)], \
        {"mu": mu, "z": z}


def suite_hartman_watson(cfg):
    checks, stats = [], {}
    for r, nu in ((1.0, 0.0), (1.0, 1.0), (2.0, 1.0)):
        out = hartman_watson_laplace(r, nu, cfg["t_lo"], cfg["t_hi"])
        checks.append(_bound(f"laplace_r{r:g}_nu{nu:g}", out["abs_error"], 1e-3))
        stats[f"r{r:g}_nu{nu:g}"] = out
    return checks, stats


def suite_gt_volume(cfg):
    pts = {3: (1.3, 0.2, -0.9), 4: (1.5, 0.6, -0.2, -1.1)}
    checks, stats = [], {}
    for n, x in pts.items():
        out = gt_volume_mc(x, RngStream(cfg["seed"], n), samples=cfg["samples"])
        checks.append(_bound(f"volume_N{n}", out["relative_error"], 0.02))
        stats[f"N{n}"] = out
    return checks, stats


def suite_symmetric_corollary(cfg):
    alpha = cfg["alpha"]
    reps = cfg["reps"]
    sde = SdeConfig(cfg["dt"], 1.0)
    xs, ys = symmetric_pair_from_bms(sde, RngStream(cfg["seed"], 0), reps, times=(0.5, 1.0))
    s = (xs + ys) / math.sqrt(2.0)
    v1 = (xs[1] - ys[1]) / math.sqrt(2.0)
    inc = s[1] - s[0]
    corr = float(np.corrcoef(xs[1] + ys[1], xs[1] - ys[1])[0, 1])
    drift = KDrift(0.0)
    k1 = simulate_k_diffusion(0.0, -np.inf, sde, RngStream(cfg["seed"], 1), reps=reps, drift=drift)
    kh = simulate_k_diffusion(0.0, -np.inf, SdeConfig(cfg["dt"], 0.5), RngStream(cfg["seed"], 2),
                              reps=reps, drift=drift)
    resc = (xs[1] - ys[1]) / 2.0 - math.log(2.0)
    checks = [
        _ks("sum_endpoint_normal", ks_one_sample(s[1], norm.cdf, alpha), alpha),
        _ks("sum_increment_normal", ks_one_sample(inc, lambda a: norm.cdf(a / math.sqrt(0.5)), alpha), alpha),
        _bound("abs_corr_sum_difference", abs(corr), 0.03),
        _ks("difference_literal_vs_k0_diffusion", ks_two_sample(v1, k1, alpha), alpha),
        _ks("difference_rescaled_vs_k0_diffusion", ks_two_sample(resc, kh, alpha), alpha),
    ]
    return checks, {"corr": corr}


def suite_markov_functions(cfg):
    alpha = cfg["alpha"]
    x0 = np.array(_floats(cfg["x0"]))
    nu = np.array(_floats(cfg["nu"]))
    reps = cfg["reps"]
    sde = SdeConfig(cfg["dt"], 1.0)
    seed = cfg["seed"]
    xa, _ = simulate_xy_pair_n2(nu, x0, sde, RngStream(seed, 0), reps=reps)
    wb = simulate_whittaker_diffusion_n2(nu, x0, sde, RngStream(seed, 1), reps=reps)
    init = sample_sigma(GibbsPatternLaw(x0, nu), RngStream(seed, 2), reps).values
    zc = simulate_triangular_z(nu, init, sde, RngStream(seed, 3), reps=reps)[:, 1:]
    checks = []
    for j in range(2):
        checks.append(_ks(f"xy_x{j + 1}_vs_whittaker", ks_two_sample(xa[:, j], wb[:, j], alpha), alpha))
        checks.append(_ks(f"z_bottom{j + 1}_vs_whittaker", ks_two_sample(zc[:, j], wb[:, j], alpha), alpha))
    return checks, {}


def suite_free_energy(cfg, threads=1):
    n = int(cfg["n"])
    grid = TimeGrid(float(n), int(round(n / cfg["dt"])))
    out = free_energy_check(n, cfg["beta"], grid, cfg["seed"], reps=cfg["reps"], threads=threads)
    return [_bound("relative_gap", out["relative_gap"], 0.10)], out


def suite_intertwinings(cfg):
    g = np.random.default_rng(cfg["seed"])
    worst = {2: 0.0, 3: 0.0}
    for n in (2, 3):
        for _ in range(5):
            x = g.uniform(-1.0, 1.0, n)
            y = g.uniform(-1.0, 1.0, n - 1)
            theta = g.uniform(-0.8, 0.8)
            worst[n] = max(worst[n], verify_kernel_intertwining(x, y, theta, h=1e-3)["residual"])
    op0 = verify_operator_intertwinings(0.0)
    op1 = verify_operator_intertwinings(0.7)
    checks = [
        _bound("kernel_N2", worst[2], 1e-6),
        _bound("kernel_N3", worst[3], 1e-6),
        _bound("operator_U_theta0", op0["U_residual"], 1e-4),
        _bound("operator_V_theta0", op0["V_residual"], 1e-4),
        _bound("operator_U_theta0.7", op1["U_residual"], 1e-4),
        _bound("operator_V_theta0.7", op1["V_residual"], 1e-4),
    ]
    return checks, {"theta0": op0, "theta0.7": op1}


SUITES = {
    "dp-identity": (suite_dp_identity, {"sizes": "2,3,4,5", "reps": 100, "dt": 1e-3, "t_min": 0.1,
                                        "tol": 1e-6, "seed": 1}),
    "grsk-identities": (suite_grsk_identities, {"reps": 10, "dt_fine": 1e-4, "seed": 1}),
    "structural": (suite_structural, {"dt_fine": 1e-4, "seed": 2}),
    "zero-temperature": (suite_zero_temperature, {"sizes": "2,3,5", "reps": 5000, "dt": 5e-5,
                                                  "alpha": 0.01, "seed": 3}),
    "matsumoto-yor": (suite_matsumoto_yor, {"mus": "0,0.5", "reps": 10000, "dt": 1e-3,
                                            "alpha": 0.01, "seed": 4}),
    "entrance-law": (suite_entrance_law, {"reps": 10000, "dt": 1e-3, "alpha": 0.01, "seed": 5,
                                          "m_ladder": "2,4,6", "ladder_reps": 4000}),
    "moments-n2": (suite_moments, {"s": "0.5,1,2", "t": 1.0, "reps": 100000, "dt": 1e-3, "seed": 6}),
    "whittaker-engine": (suite_whittaker_engine, {"points_n2": 10, "points_n3": 20, "seed": 7}),
    "bump-stade": (suite_bump_stade, {"seed": 8}),
    "asymptotics": (suite_asymptotics, {"x": "1,-0.5", "lam": "0.6,-0.3", "betas": "8,16,24,32,40",
                                        "seed": 9}),
    "critical-point": (suite_critical_point, {"points": 10, "seed": 10}),
    "gig-law": (suite_gig_law, {"x": "0.7,-0.4", "nu": "0.3,-0.2", "reps": 10000, "alpha": 0.01,
                                "seed": 11}),
    "hartman-watson": (suite_hartman_watson, {"t_lo": 0.3, "t_hi": 40.0, "seed": 12}),
    "gt-volume": (suite_gt_volume, {"samples": 1_000_000, "seed": 13}),
    "symmetric-corollary": (suite_symmetric_corollary, {"reps": 10000, "dt": 1e-3, "alpha": 0.01,
                                                        "seed": 14}),
    "markov-functions": (suite_markov_functions, {"x0": "0.3,-0.2", "nu": "0.4,-0.1", "reps": 10000,
                                                  "dt": 1e-3, "alpha": 0.01, "seed": 15}),
    "free-energy": (suite_free_energy, {"n": 200, "beta": 1.0, "dt": 0.01, "reps": 8, "seed": 16}),
    "intertwinings": (suite_intertwinings, {"seed": 17}),
}


def suite_defaults(name: str) -> dict:
    if name not in SUITES:
        raise UnknownSuite(name)
    return dict(SUITES[name][1])


def _coerce(value, default):
    if isinstance(default, bool):
        return value if isinstance(value, bool) else str(value).lower() in ("1", "true", "yes")
    if isinstance(default, int) and not isinstance(default, bool):
        return int(float(value))
    if isinstance(default, float):
        return float(value)
    return str(value)


# suites whose replica loops accept a worker count (never changes the numbers)
_THREADED = {"free-energy"}


def run_suite(name: str, config: dict | None = None, threads: int = 1) -> SuiteReport:
    """Run a named suite; ``config`` overrides its defaults (strings are coerced)."""
    if name not in SUITES:
        raise UnknownSuite(f"unknown suite {name!r}; known: {', '.join(sorted(SUITES))}")
    fn, defaults = SUITES[name]
    cfg = dict(defaults)
    for k, v in (config or {}).items():
        if k not in defaults:
            raise ValueError(f"suite {name!r} has no option {k!r}")
        cfg[k] = _coerce(v, defaults[k])
    t0 = time.perf_counter()
    checks, stats = fn(cfg, threads) if name in _THREADED else fn(cfg)
    runtime = time.perf_counter() - t0
    passed = all(c["passed"] for c in checks)
    bonf = _bonferroni(checks)
    return SuiteReport(name, passed, checks, int(cfg.get("seed", 0)), cfg, runtime, _plain(stats), bonf)
