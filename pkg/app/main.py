import argparse
import json
import logging
import os
import sys
from typing import Any, Dict, List, Optional, Sequence

from app.config import budgets
from app.config.settings import settings
from app.models.algebra import WalkMode
from app.models.models import DensityStatus, DensityVerdict, ExperimentConfig, ExperimentReport, SearchBudget, SearchOutcome, TorusPoint
from app.modules.cayley.cayley import presentation_from_json
from app.modules.errors import (
    BudgetExceededError,
    DimensionMismatchError,
    GlasnerLabError,
    HypothesisViolationError,
    PrecisionError,
    SoundnessError,
)
from app.modules.experiments.experiments import EXPERIMENTS, run_experiment
from app.modules.exporter.report_exporter import write_rows_csv
from app.modules.expsum.expsum import box_partial_sums, freq_box, pair_sum
from app.modules.expsum.hq import hq_sum_scaling, torsion_histogram
from app.modules.intlinalg.matrices import matrix_from_json, matrix_to_json
from app.modules.intlinalg.snf import gcd_bound_factorize, smith_normal_form
from app.modules.polymat.polymat import poly_matrix_from_json
from app.modules.scheduler.processing_lock import EXPERIMENT_LOCK
from app.modules.search.engines import ScalarEngine
from app.modules.search.search import (
    find_group_dilation,
    find_poly_dilation,
    find_product_dilation,
    find_scalar_dilation,
    outcome_to_json,
)
from app.modules.torus.torus import is_eps_dense, point_set_from_json
from app.modules.walk.walk import decay_profile, measure_from_json
from app.utils.validators import ValidationError, parse_fraction, parse_int

logger = logging.getLogger(__name__)

# Códigos de salida estables
EXIT_DENSE = 0
EXIT_NOT_DENSE = 1
EXIT_UNDECIDED = 2
EXIT_INPUT_ERROR = 3
EXIT_BUDGET_ERROR = 4
EXIT_HYPOTHESIS_ERROR = 5
EXIT_INTERNAL_ERROR = 6

_STATUS_EXIT = {
    DensityStatus.DENSE: EXIT_DENSE,
    DensityStatus.NOT_DENSE: EXIT_NOT_DENSE,
    DensityStatus.UNDECIDED: EXIT_UNDECIDED,
}


def setup_logging() -> None:
    """Configura logging una sola vez (consola + archivo)."""
    root = logging.getLogger()
    if root.handlers:
        return
    logging.basicConfig(
        level=getattr(logging, settings.LOG_LEVEL.upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.StreamHandler(sys.stderr),
            logging.FileHandler(settings.LOG_FILE),
        ]
    )


def _load_json(path: str) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ValidationError(f"no existe el archivo {path}")
    except json.JSONDecodeError as e:
        raise ValidationError(f"JSON inválido en {path}: {e}")


def _parse_vector(text: str) -> List[Any]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _emit(payload: Dict[str, Any]) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True, default=str))


class GlasnerLab:
    """Fachada de la CLI: carga entradas, llama a la librería y arma la salida JSON."""

    def __init__(self, threads: Optional[int] = None, max_refinements: int = budgets.DEFAULT_MAX_REFINEMENTS):
        self.threads = threads
        self.max_refinements = max_refinements

    def check_density(self, input_path: str, eps: float) -> DensityVerdict:
        Y = point_set_from_json(_load_json(input_path))
        return is_eps_dense(Y, eps, self.max_refinements, self.threads)

    def find_dilation(self, input_path: str, eps: float, n_max: int, seed: Optional[int], d1: Optional[int] = None) -> SearchOutcome:
        Y = point_set_from_json(_load_json(input_path))
        budget = SearchBudget(n_max=n_max)
        if d1:
            engines = (ScalarEngine(d1), ScalarEngine(Y.dim - d1))
            return find_product_dilation(Y, engines, eps, budget, self.max_refinements, self.threads, seed)
        return find_scalar_dilation(Y, eps, budget, self.max_refinements, self.threads, seed)

    def find_poly(self, input_path: str, poly_path: str, eps: float, n_max: int, seed: Optional[int]) -> SearchOutcome:
        Y = point_set_from_json(_load_json(input_path))
        A = poly_matrix_from_json(_load_json(poly_path))
        return find_poly_dilation(Y, A, eps, SearchBudget(n_max=n_max), self.max_refinements, self.threads, seed)

    def find_group(self, input_path: str, presentation_path: str, eps: float, radius: int, element_budget: int, seed: Optional[int]) -> SearchOutcome:
        Y = point_set_from_json(_load_json(input_path))
        S = presentation_from_json(_load_json(presentation_path))
        budget = SearchBudget(ball_radius=radius, element_budget=element_budget)
        return find_group_dilation(Y, S, eps, budget, self.max_refinements, self.threads, seed)

    def diagnose(self, input_path: str, eps: float, out_dir: str, r: float = 1.0) -> Dict[str, Any]:
        """Histograma h_q, sumas parciales sobre B(M) y suma de pares de Y."""
        Y = point_set_from_json(_load_json(input_path))
        box = freq_box(Y.dim, eps)
        os.makedirs(out_dir, exist_ok=True)
        files = []
        report: Dict[str, Any] = {"k": Y.k, "dim": Y.dim, "M": box.M, "box_size": box.size}
        if Y.is_exact:
            hist = torsion_histogram(Y)
            files.append(write_rows_csv(os.path.join(out_dir, "hq_histogram.csv"), ("q", "h_q"), sorted(hist.counts.items())))
            report["hq_sum"] = hq_sum_scaling(Y, r).weighted_sum
            report["hq_total_pairs"] = hist.total
        rows = [(" ".join(map(str, m)), value) for m, value in box_partial_sums(Y.points, box.M)]
        files.append(write_rows_csv(os.path.join(out_dir, "partial_sums.csv"), ("m", "abs_sum"), rows))
        identity = [[1 if i == j else 0 for j in range(Y.dim)] for i in range(Y.dim)]
        report["pair_sum"] = pair_sum(Y, identity, box.M)
        report["files"] = files
        return report

    def snf(self, input_path: str) -> Dict[str, Any]:
        T0 = matrix_from_json(_load_json(input_path), "T0")
        snf = smith_normal_form(T0)
        payload: Dict[str, Any] = {"snf": snf.model_dump(mode="json")}
        if snf.k:
            payload["gcd_bound"] = gcd_bound_factorize(T0).model_dump(mode="json")
        return payload

    def walk(self, measure_path: str, point: str, freq: str, n_max: int, mode: str, samples: int,
             seed: Optional[int], out_path: Optional[str]) -> Dict[str, Any]:
        mu = measure_from_json(_load_json(measure_path))
        x = TorusPoint.exact([parse_fraction(c) for c in _parse_vector(point)])
        a = [parse_int(v, "freq") for v in _parse_vector(freq)]
        profile = decay_profile(mu, x, a, n_max, WalkMode(mode), samples, seed, threads=self.threads)
        rows = [(est.n, est.modulus, est.se) for est in profile]
        payload: Dict[str, Any] = {"mode": mode, "seed": seed, "profile": [list(r) for r in rows]}
        if out_path:
            payload["file"] = write_rows_csv(out_path, ("n", "modulus", "se"), rows)
        return payload

    def experiment(self, name: str, seed: int, eps: Optional[float], out_dir: str,
                   budget_overrides: Dict[str, int], params: Dict[str, Any]) -> ExperimentReport:
        config = ExperimentConfig(
            experiment=name, seed=seed, eps=eps, budgets=budget_overrides,
            params=params, output_dir=out_dir, threads=self.threads,
        )
        with EXPERIMENT_LOCK:
            return run_experiment(config)


def _parse_params(items: Sequence[str]) -> Dict[str, Any]:
    """--param clave=valor; el valor se interpreta como JSON si es posible."""
    params: Dict[str, Any] = {}
    for item in items or []:
        if "=" not in item:
            raise ValidationError(f"--param espera clave=valor, se recibió {item!r}")
        key, raw = item.split("=", 1)
        try:
            params[key] = json.loads(raw)
        except json.JSONDecodeError:
            params[key] = raw
    return params


class LabArgumentParser(argparse.ArgumentParser):
    """Los errores de uso se reportan como ValidationError (salida 3), nunca con el código 2 de argparse."""

    def error(self, message: str):
        raise ValidationError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = LabArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=None, help="Máximo de hilos (GLASNER_LAB_THREADS por defecto)")
    common.add_argument("--max-refinements", type=int, default=budgets.DEFAULT_MAX_REFINEMENTS, help="Refinamientos de malla")
    common.add_argument("--seed", type=int, default=None, help="Semilla del generador")

    parser = LabArgumentParser(prog="glasner-lab", description="Laboratorio de densidad tipo Glasner en el toro")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-density", parents=[common], help="Veredicto certificado de eps-densidad")
    p.add_argument("--input", required=True)
    p.add_argument("--eps", type=float, required=True)

    p = sub.add_parser("find-dilate", parents=[common], help="Búsqueda de n con nY eps-denso")
    p.add_argument("--input", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--budget", type=int, default=budgets.DEFAULT_N_MAX, help="n_max")
    p.add_argument("--d1", type=int, default=None, help="Búsqueda producto T^d1 x T^d2 con motores escalares")

    p = sub.add_parser("find-poly", parents=[common], help="Búsqueda de n con A(n)Y eps-denso")
    p.add_argument("--input", required=True)
    p.add_argument("--poly", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--budget", type=int, default=budgets.DEFAULT_N_MAX, help="n_max")

    p = sub.add_parser("find-group", parents=[common], help="Búsqueda en la bola de Cayley")
    p.add_argument("--input", required=True)
    p.add_argument("--presentation", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--radius", type=int, default=budgets.DEFAULT_BALL_RADIUS)
    p.add_argument("--budget", type=int, default=10**5, help="Presupuesto de elementos")

    p = sub.add_parser("diagnose", parents=[common], help="Histograma h_q y sumas sobre B(M)")
    p.add_argument("--input", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--out", default=settings.OUTPUT_DIR)
    p.add_argument("--r", type=float, default=1.0)

    p = sub.add_parser("snf", parents=[common], help="Forma normal de Smith y factorización T0 = T R")
    p.add_argument("--input", required=True)

    p = sub.add_parser("walk", parents=[common], help="Perfil de decaimiento de Fourier")
    p.add_argument("--input", required=True, help="Medida JSON")
    p.add_argument("--point", required=True, help="x como 'num/den,num/den'")
    p.add_argument("--freq", required=True, help="a como '1,0'")
    p.add_argument("--n-max", type=int, default=20)
    p.add_argument("--mode", choices=[m.value for m in WalkMode], default=WalkMode.EXACT_TREE.value)
    p.add_argument("--samples", type=int, default=10**4)
    p.add_argument("--out", default=None, help="CSV de salida (n, modulus, se)")

    p = sub.add_parser("experiment", parents=[common], help="Experimentos reproducibles")
    p.add_argument("name", choices=sorted(EXPERIMENTS))
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--out", default=settings.OUTPUT_DIR)
    p.add_argument("--budget", type=int, default=None, help="n_max / presupuesto de elementos")
    p.add_argument("--param", action="append", default=[], help="Parámetro clave=valor (JSON)")
    return parser


def run(args: argparse.Namespace) -> int:
    lab = GlasnerLab(threads=args.threads, max_refinements=args.max_refinements)

    if args.command == "check-density":
        verdict = lab.check_density(args.input, args.eps)
        _emit(verdict.model_dump(mode="json"))
        return _STATUS_EXIT[verdict.status]

    if args.command in ("find-dilate", "find-poly", "find-group"):
        if args.command == "find-dilate":
            outcome = lab.find_dilation(args.input, args.eps, args.budget, args.seed, args.d1)
        elif args.command == "find-poly":
            outcome = lab.find_poly(args.input, args.poly, args.eps, args.budget, args.seed)
        else:
            outcome = lab.find_group(args.input, args.presentation, args.eps, args.radius, args.budget, args.seed)
        _emit(outcome_to_json(outcome))
        return EXIT_DENSE if outcome.found else EXIT_NOT_DENSE

    if args.command == "diagnose":
        _emit(lab.diagnose(args.input, args.eps, args.out, args.r))
        return 0

    if args.command == "snf":
        _emit(lab.snf(args.input))
        return 0

    if args.command == "walk":
        seed = settings.DEFAULT_SEED if args.seed is None else args.seed
        _emit(lab.walk(args.input, args.point, args.freq, args.n_max, args.mode, args.samples, seed, args.out))
        return 0

    if args.command == "experiment":
        overrides = {}
        if args.budget is not None:
            overrides = {"n_max": args.budget, "element_budget": args.budget}
        overrides["max_refinements"] = args.max_refinements
        seed = settings.DEFAULT_SEED if args.seed is None else args.seed
        report = lab.experiment(args.name, seed, args.eps, args.out, overrides, _parse_params(args.param))
        _emit(report.model_dump(mode="json", by_alias=True))
        return 0 if report.passed else EXIT_NOT_DENSE

    raise ValidationError(f"subcomando desconocido {args.command}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Punto de entrada; devuelve el código de salida."""
    setup_logging()
    try:
        return run(build_parser().parse_args(argv))
    except (ValidationError, ValueError, DimensionMismatchError, PrecisionError) as e:
        logger.error(f"❌ Entrada inválida: {e}")
        return EXIT_INPUT_ERROR
    except BudgetExceededError as e:
        logger.error(f"❌ Presupuesto excedido: {e}")
        return EXIT_BUDGET_ERROR
    except (HypothesisViolationError, SoundnessError) as e:
        logger.error(f"❌ {type(e).__name__}: {e}")
        return EXIT_HYPOTHESIS_ERROR
    except GlasnerLabError as e:
        logger.error(f"❌ {type(e).__name__}: {e}")
        return EXIT_INTERNAL_ERROR


if __name__ == "__main__":
    sys.exit(main())
