"""
Experimentos de escritorio: cada uno recibe una ExperimentConfig, escribe tablas CSV y
un resumen JSON, y devuelve el ExperimentReport. Todos son deterministas para una semilla.
"""
from __future__ import annotations
import logging
import math
import time
from typing import Any, Callable, Dict, List, Tuple

from sympy import primerange

from app.config import budgets
from app.models.algebra import WalkMeasure, WalkMode
from app.models.models import CompleteSumSpec, ExperimentConfig, ExperimentReport, SearchBudget
from app.modules.cayley.cayley import affine_span_trace, cayley_ball, check_thmC_hypothesis, elementary_presentation
from app.modules.cayley.unipotent import substituted_product, thmC_polynomialize
from app.modules.errors import HypothesisViolationError
from app.modules.experiments.families import (
    random_int_matrix,
    random_rational_vector,
    random_unipotent_presentation,
    trial_rngs,
)
from app.modules.expsum.expsum import bmv_lower_bound_holds, complete_rational_sum, hua_decay_check, lemma24_certificate, weyl_average
from app.modules.expsum.hq import hq_scaling_fit, hq_sum_scaling, torsion_histogram
from app.modules.exporter.report_exporter import ReportExporter
from app.modules.intlinalg.matrices import det, mat_mul, mat_vec, rank
from app.modules.intlinalg.snf import gcd_bound_factorize, gcd_bound_fuzz, smith_normal_form
from app.modules.polymat.polymat import check_set_hypothesis, diagonal_poly_matrix, eval_poly_matrix
from app.modules.search.search import find_group_dilation, find_poly_dilation, find_scalar_dilation
from app.modules.torus.samplers import (
    grid_family,
    injective_projection_set,
    random_far_points,
    random_rational_set,
    small_denominator_family,
)
from app.modules.walk.walk import decay_profile, fourier_coeff, plateau, rational_point
from app.utils.validators import ValidationError

logger = logging.getLogger(__name__)

ExperimentFn = Callable[[ExperimentConfig, ReportExporter], Tuple[Dict[str, Any], bool]]

DEFAULT_BUDGETS = {
    "n_max": budgets.DEFAULT_N_MAX,
    "ball_radius": budgets.DEFAULT_BALL_RADIUS,
    "element_budget": 10**5,
    "max_refinements": budgets.DEFAULT_MAX_REFINEMENTS,
}

# Parámetros a escala de aceptación
DEFAULT_PARAMS: Dict[str, Dict[str, Any]] = {
    "glasner1d": {"eps": 0.1, "k": 400, "trials": 40, "target": 0.95, "denominator": 1_000_003},
    "prop16": {"eps": 0.25, "k": 60, "trials": 20, "target": 0.9},
    "thmC": {"eps": 0.3, "k": 30, "trials": 20, "target": 0.8, "check_points": [1, 2, 3]},
    "walk-decay": {
        "q_list": [1, 2, 3, 5, 7, 11, 101], "v": [1, 1], "a": [1, 0], "n_max": 200, "tail": 50,
        "samples": 20_000, "compare_n": 6, "slack": budgets.PLATEAU_SLACK,
    },
    "bmv-fuzz": {"trials": 1000, "dims": [1, 2, 3], "eps_list": [0.05, 0.1, 0.2], "k_max": 200},
    "lemma24": {"trials": 500, "dims": [1, 2], "eps_list": [0.1, 0.2], "k_max": 12, "g_bound": 5},
    "snf-suite": {"trials": 500, "max_dim": 6, "entry_bound": 20, "samples": 100, "q_max": 1000},
    "span-stabilization": {"trials": 200, "max_dim": 4, "max_generators": 3, "identity_samples": 10},
    "gauss-hua": {"q_max": 499, "samples": 20, "hua_D": 3, "hua_trials": 20, "weyl_N": 100_000},
    "hq-scaling": {"ks": [32, 64, 128, 256], "r": 1.0, "dims": [1, 2], "families": ["grid", "small_denominator"]},
}


def _search_budget(config: ExperimentConfig) -> SearchBudget:
    b = config.budgets
    return SearchBudget(
        n_max=b["n_max"], ball_radius=b["ball_radius"],
        element_budget=b["element_budget"],
    )


def _success_summary(found: List[bool], target: float) -> Tuple[Dict[str, Any], bool]:
    rate = sum(found) / len(found) if found else 0.0
    return {"trials": len(found), "successes": sum(found), "success_rate": rate, "target": target}, rate >= target


# -----------------------
# Búsquedas
# -----------------------
def run_glasner1d(config: ExperimentConfig, exporter: ReportExporter) -> Tuple[Dict[str, Any], bool]:
    p = config.params
    rows, found = [], []
    for t, rng in enumerate(trial_rngs(config.seed, p["trials"])):
        Y = random_rational_set(p["k"], 1, rng, denominators=[p["denominator"]])
        out = find_scalar_dilation(
            Y, p["eps"], _search_budget(config), config.budgets["max_refinements"], config.threads, config.seed,
        )
        found.append(out.found)
        rows.append((t, out.found, out.dilator.n if out.found else "", out.scanned))
    exporter.write_table(("trial", "found", "n", "scanned"), rows)
    return _success_summary(found, p["target"])


def run_prop16(config: ExperimentConfig, exporter: ReportExporter) -> Tuple[Dict[str, Any], bool]:
    p = config.params
    A = diagonal_poly_matrix([[0, 1], [0, 0, 1]])
    rows, found = [], []
    for t, rng in enumerate(trial_rngs(config.seed, p["trials"])):
        Y = injective_projection_set(p["k"], 2, rng)
        hypothesis = check_set_hypothesis(A, Y)
        if not hypothesis.ok:
            raise HypothesisViolationError(f"ensayo {t}: par {hypothesis.bad_pair} incumple (1.1)")
        out = find_poly_dilation(
            Y, A, p["eps"], _search_budget(config), config.budgets["max_refinements"], config.threads, config.seed,
        )
        found.append(out.found)
        rows.append((t, out.found, out.dilator.n if out.found else "", out.scanned))
    exporter.write_table(("trial", "found", "n", "scanned"), rows)
    return _success_summary(found, p["target"])


def run_thmC(config: ExperimentConfig, exporter: ReportExporter) -> Tuple[Dict[str, Any], bool]:
    p = config.params
    S = elementary_presentation()
    poly = thmC_polynomialize(S)
    evaluations = {
        n0: eval_poly_matrix(poly.A, n0) == substituted_product(S, poly.R, n0) for n0 in p["check_points"]
    }
    rows, found = [], []
    for t, rng in enumerate(trial_rngs(config.seed, p["trials"])):
        Y = random_rational_set(p["k"], 2, rng)
        hypothesis = check_thmC_hypothesis(S, Y)
        if not hypothesis.ok:
            raise HypothesisViolationError(f"ensayo {t}: par {hypothesis.bad_pair} en un subespacio invariante")
        out = find_group_dilation(
            Y, S, p["eps"], _search_budget(config), config.budgets["max_refinements"], config.threads, config.seed,
        )
        found.append(out.found)
        rows.append((t, out.found, out.dilator.describe() if out.found else "", out.scanned))
    exporter.write_table(("trial", "found", "word", "scanned"), rows)
    summary, passed = _success_summary(found, p["target"])
    summary.update({"R": poly.R, "N": poly.N, "degree": poly.A.degree, "evaluations": {str(k): v for k, v in evaluations.items()}})
    return summary, passed and all(evaluations.values())


# -----------------------
# Paseos aleatorios
# -----------------------
def run_walk_decay(config: ExperimentConfig, exporter: ReportExporter) -> Tuple[Dict[str, Any], bool]:
    p = config.params
    mu = WalkMeasure.uniform(elementary_presentation().generators)
    profile_rows, rows = [], []
    plateaus, agreements = [], []
    for q in p["q_list"]:
        x = rational_point(p["v"], q)
        exact = decay_profile(mu, x, p["a"], p["n_max"], WalkMode.EXACT_TREE)
        level = plateau(exact, p["tail"])
        mc = fourier_coeff(mu, x, p["a"], p["compare_n"], WalkMode.MONTE_CARLO, p["samples"], config.seed, threads=config.threads)
        reference = exact[p["compare_n"]]
        gap = abs(mc.value - reference.value)
        agree = gap <= 4 * mc.se + 1e-12
        plateaus.append(level)
        agreements.append(agree)
        profile_rows.extend((q, est.n, est.modulus) for est in exact)
        rows.append((q, level, reference.modulus, mc.modulus, mc.se, agree))
    exporter.write_table(("q", "n", "modulus"), profile_rows, table="profile")
    exporter.write_table(("q", "plateau", "exact_at_n", "mc_at_n", "se", "agree"), rows)

    monotone = all(b <= a + p["slack"] for a, b in zip(plateaus, plateaus[1:]))
    unit = True
    if 1 in p["q_list"]:
        unit = abs(plateaus[p["q_list"].index(1)] - 1.0) <= 1e-12
    summary = {
        "plateaus": dict(zip(map(str, p["q_list"]), plateaus)),
        "monotone": monotone,
        "unit_at_q1": unit,
        "agreement": all(agreements),
    }
    return summary, monotone and unit and all(agreements)


# -----------------------
# Certificados de sumas exponenciales
# -----------------------
def run_bmv_fuzz(config: ExperimentConfig, exporter: ReportExporter) -> Tuple[Dict[str, Any], bool]:
    p = config.params
    rows, violations = [], 0
    for t, rng in enumerate(trial_rngs(config.seed, p["trials"])):
        d = int(rng.choice(p["dims"]))
        eps = float(rng.choice(p["eps_list"]))
        k = int(rng.integers(1, p["k_max"] + 1))
        check = bmv_lower_bound_holds(random_far_points(k, d, eps, rng), eps)
        violations += not check.verified
        rows.append((t, d, eps, k, check.M, check.lhs, check.rhs, check.verified))
    exporter.write_table(("trial", "d", "eps", "k", "M", "lhs", "rhs", "verified"), rows)
    return {"trials": len(rows), "violations": violations}, violations == 0


def run_lemma24(config: ExperimentConfig, exporter: ReportExporter) -> Tuple[Dict[str, Any], bool]:
    p = config.params
    rows, violations, attempts = [], 0, 0
    rng = trial_rngs(config.seed, 1)[0]
    while len(rows) < p["trials"]:
        attempts += 1
        if attempts > 20 * p["trials"]:
            raise ValidationError("demasiados intentos sin instancias NOT_DENSE")
        d = int(rng.choice(p["dims"]))
        eps = float(rng.choice(p["eps_list"]))
        Y = random_rational_set(int(rng.integers(1, p["k_max"] + 1)), d, rng, denominators=[97, 101, 103])
        g = random_int_matrix(rng, d, d, p["g_bound"])
        cert = lemma24_certificate(Y, g, eps, config.budgets["max_refinements"], config.threads)
        if not cert.applicable:
            continue
        violations += not cert.holds
        rows.append((len(rows), d, eps, Y.k, cert.M, cert.raw_lhs, cert.raw_rhs, cert.pair_sum, cert.holds))
    exporter.write_table(("instance", "d", "eps", "k", "M", "raw_lhs", "raw_rhs", "pair_sum", "holds"), rows)
    return {"instances": len(rows), "attempts": attempts, "violations": violations}, violations == 0


def run_gauss_hua(config: ExperimentConfig, exporter: ReportExporter) -> Tuple[Dict[str, Any], bool]:
    p = config.params
    rng = trial_rngs(config.seed, 1)[0]
    rows, failures = [], 0
    for q in primerange(3, p["q_max"] + 1):
        q = int(q)
        quad_err, lin_err = 0.0, 0.0
        for _ in range(p["samples"]):
            b1, b2 = int(rng.integers(0, q)), int(rng.integers(1, q))
            quad_err = max(quad_err, abs(abs(complete_rational_sum(CompleteSumSpec(q=q, coefficients=[b1, b2]))) - q ** -0.5))
            lin_err = max(lin_err, abs(complete_rational_sum(CompleteSumSpec(q=q, coefficients=[int(rng.integers(1, q))]))))
        ok = quad_err <= 1e-9 and lin_err <= 1e-10
        failures += not ok
        rows.append((q, quad_err, lin_err, ok))
    exporter.write_table(("q", "quadratic_error", "linear_max", "ok"), rows)

    hua_primes = [int(q) for q in primerange(5, p["q_max"] + 1)]
    table = hua_decay_check(p["hua_D"], hua_primes, p["hua_trials"], seed=config.seed)
    exporter.write_table(("q", "max_abs", "normalized"), [(r.q, r.max_abs, r.normalized) for r in table.rows], table="hua")

    weyl = abs(weyl_average([0.0, math.sqrt(2.0)], p["weyl_N"]))
    summary = {"primes": len(rows), "failures": failures, "hua_bounded": table.bounded, "weyl_quadratic_abs": weyl}
    return summary, failures == 0 and table.bounded and weyl < 0.05


def run_hq_scaling(config: ExperimentConfig, exporter: ReportExporter) -> Tuple[Dict[str, Any], bool]:
    p = config.params
    rows, fits = [], {}
    hist_rows = []
    for family in p["families"]:
        for d in p["dims"]:
            sums = []
            for idx, k in enumerate(p["ks"]):
                if family == "grid":
                    Y = grid_family(k, d)
                else:
                    Y = small_denominator_family(k, d, trial_rngs(config.seed + 7919 * d + idx, 1)[0])
                s = hq_sum_scaling(Y, p["r"]).weighted_sum
                sums.append(s)
                rows.append((family, d, k, s))
                if k == p["ks"][-1]:
                    hist_rows.extend((family, d, q, h) for q, h in torsion_histogram(Y).counts.items())
            fit = hq_scaling_fit(p["ks"], sums, d, p["r"])
            fits[f"{family}/d={d}"] = {"slope": fit.slope, "bound": fit.bound, "ok": fit.ok}
    exporter.write_table(("family", "d", "k", "sum"), rows)
    exporter.write_table(("family", "d", "q", "h_q"), hist_rows, table="histogram")
    return {"fits": fits}, all(f["ok"] for f in fits.values())


# -----------------------
# Álgebra exacta
# -----------------------
def run_snf_suite(config: ExperimentConfig, exporter: ReportExporter) -> Tuple[Dict[str, Any], bool]:
    p = config.params
    rows, failures = [], 0
    for t, rng in enumerate(trial_rngs(config.seed, p["trials"])):
        r, d = (int(v) for v in rng.integers(1, p["max_dim"] + 1, size=2))
        T0 = random_int_matrix(rng, r, d, p["entry_bound"])
        snf = smith_normal_form(T0)
        checks = {
            "reconstruction": mat_mul(mat_mul(snf.L, snf.D), snf.Rp) == T0,
            "unimodular": abs(det(snf.L)) == 1 and abs(det(snf.Rp)) == 1,
            "chain": all(b % a == 0 for a, b in zip(snf.divisors[: snf.k], snf.divisors[1: snf.k]))
            and all(v == 0 for v in snf.divisors[snf.k:]) and all(v > 0 for v in snf.divisors[: snf.k]),
        }
        Q = ""
        if snf.k:
            f = gcd_bound_factorize(T0)
            Q = f.Q
            checks["factorization"] = mat_mul(f.T, f.R) == T0
            checks["injective"] = rank(f.T) == f.d_prime
            checks["surjective"] = all(v == 1 for v in smith_normal_form(f.R).divisors)
            checks["gcd_bound"] = gcd_bound_fuzz(f, p["samples"], p["q_max"], seed=int(rng.integers(2**31)))
        ok = all(checks.values())
        failures += not ok
        rows.append((t, r, d, snf.k, Q, ok, ",".join(name for name, v in checks.items() if not v)))
    exporter.write_table(("trial", "r", "d", "k", "Q", "ok", "failed_checks"), rows)
    return {"trials": len(rows), "failures": failures}, failures == 0


def run_span_stabilization(config: ExperimentConfig, exporter: ReportExporter) -> Tuple[Dict[str, Any], bool]:
    p = config.params
    rows, failures = [], 0
    for t, rng in enumerate(trial_rngs(config.seed, p["trials"])):
        d = int(rng.integers(1, p["max_dim"] + 1))
        S = random_unipotent_presentation(rng, d, int(rng.integers(1, p["max_generators"] + 1)))
        a = random_rational_vector(rng, d)
        trace = affine_span_trace(S, a, 2 * d)
        N = trace.stabilization_radius
        stable = trace.dims[N:] == [trace.dims[N]] * (len(trace.dims) - N)

        ball = cayley_ball(S, 2)
        identity_ok = True
        for _ in range(p["identity_samples"]):
            g = ball.elements[int(rng.integers(ball.size))]
            u = S.generators[int(rng.integers(len(S.generators)))]
            ga_a = [x - y for x, y in zip(mat_vec(g, a), a)]
            uga_a = [x - y for x, y in zip(mat_vec(mat_mul(u, g), a), a)]
            ua_a = [x - y for x, y in zip(mat_vec(u, a), a)]
            lhs = mat_vec(u, ga_a)
            identity_ok &= all(l - (x - y) == 0 for l, x, y in zip(lhs, uga_a, ua_a))

        ok = N <= d and stable and identity_ok
        failures += not ok
        rows.append((t, d, len(S.generators), N, trace.dim, " ".join(map(str, trace.dims)), ok))
    exporter.write_table(("trial", "d", "generators", "N", "final_dim", "dims", "ok"), rows)
    return {"trials": len(rows), "failures": failures}, failures == 0


EXPERIMENTS: Dict[str, ExperimentFn] = {
    "glasner1d": run_glasner1d,
    "prop16": run_prop16,
    "thmC": run_thmC,
    "walk-decay": run_walk_decay,
    "bmv-fuzz": run_bmv_fuzz,
    "hq-scaling": run_hq_scaling,
    "lemma24": run_lemma24,
    "snf-suite": run_snf_suite,
    "span-stabilization": run_span_stabilization,
    "gauss-hua": run_gauss_hua,
}


def resolve_config(config: ExperimentConfig) -> ExperimentConfig:
    """Completa params y presupuestos con los valores por defecto del experimento."""
    if config.experiment not in EXPERIMENTS:
        raise ValidationError(f"experimento desconocido {config.experiment!r}; opciones: {', '.join(EXPERIMENTS)}")
    params = {**DEFAULT_PARAMS[config.experiment], **config.params}
    if config.eps is not None and "eps" in params:
        params["eps"] = config.eps
    return config.model_copy(update={
        "params": params,
        "budgets": {**DEFAULT_BUDGETS, **config.budgets},
        "eps": params.get("eps", config.eps),
    })


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    config = resolve_config(config)
    exporter = ReportExporter(config)
    logger.info(f"🚀 Experimento {config.experiment} (seed={config.seed})")
    started = time.monotonic()
    summary, passed = EXPERIMENTS[config.experiment](config, exporter)
    logger.info(f"⏱️ {config.experiment}: {time.monotonic() - started:.1f} s (passed={passed})")
    return exporter.write_summary(summary, passed=bool(passed))
