#!/usr/bin/env python3
"""
Corre la batería de aceptación completa y resume pass/fail por experimento.

Cada experimento escribe sus CSV y su resumen JSON en --out; al final se imprime
una tabla y el código de salida es 0 solo si todos pasaron.

Ejemplos:
  python scripts/run_acceptance.py --seed 20240601 --out ./data/acceptance
  python scripts/run_acceptance.py --only bmv-fuzz snf-suite --threads 4
"""

import argparse
import json
import os
import sys
import time
from typing import List, Optional

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from app.config.settings import settings
from app.main import setup_logging
from app.models.models import ExperimentConfig
from app.modules.experiments.experiments import EXPERIMENTS, run_experiment

ACCEPTANCE_ORDER = [
    "bmv-fuzz",
    "lemma24",
    "snf-suite",
    "span-stabilization",
    "gauss-hua",
    "hq-scaling",
    "walk-decay",
    "glasner1d",
    "prop16",
    "thmC",
]


def main(argv: Optional[List[str]] = None) -> int:
    ap = argparse.ArgumentParser(description="Batería de aceptación")
    ap.add_argument("--seed", type=int, default=settings.DEFAULT_SEED)
    ap.add_argument("--out", default=os.path.join(settings.OUTPUT_DIR, "acceptance"))
    ap.add_argument("--threads", type=int, default=None)
    ap.add_argument("--only", nargs="*", choices=sorted(EXPERIMENTS), help="Subconjunto de experimentos")
    args = ap.parse_args(argv)

    setup_logging()
    names = args.only or ACCEPTANCE_ORDER
    rows = []
    for name in names:
        started = time.monotonic()
        config = ExperimentConfig(experiment=name, seed=args.seed, output_dir=args.out, threads=args.threads)
        report = run_experiment(config)
        rows.append({"experiment": name, "passed": report.passed, "seconds": round(time.monotonic() - started, 1)})
        print(f"{'PASS' if report.passed else 'FAIL'}  {name:<20} {rows[-1]['seconds']:>8.1f} s")

    print(json.dumps({"seed": args.seed, "results": rows}, indent=2))
    return 0 if all(r["passed"] for r in rows) else 1


if __name__ == "__main__":
    sys.exit(main())
