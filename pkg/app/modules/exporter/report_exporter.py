"""
Exportador de reportes - tablas CSV y resúmenes JSON versionados
Cada archivo lleva schema, versión del artefacto, semilla, presupuestos y hash de configuración
"""

import csv
import hashlib
import json
import logging
import os
import threading
from typing import Any, Dict, Iterable, List, Optional, Sequence

from app.config.settings import ARTIFACT_VERSION, REPORT_SCHEMA, settings
from app.models.models import ExperimentConfig, ExperimentReport

logger = logging.getLogger(__name__)
_WRITE_LOCK = threading.Lock()


def config_hash(config: ExperimentConfig) -> str:
    """SHA-256 de la configuración canónica (claves ordenadas, sin output_dir ni threads)."""
    payload = config.model_dump(mode="json", exclude={"output_dir", "threads"})
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class ReportExporter:
    """
    Escribe los resultados de un experimento en `output_dir`:
    - <experimento>[_<tabla>].csv con una cabecera de metadatos comentada
    - <experimento>.json con el resumen y la lista de archivos
    """

    def __init__(self, config: ExperimentConfig, output_dir: Optional[str] = None) -> None:
        self.config = config
        self.output_dir = output_dir or config.output_dir or settings.OUTPUT_DIR
        self.hash = config_hash(config)
        self.files: List[str] = []
        os.makedirs(self.output_dir, exist_ok=True)

    def _metadata(self) -> Dict[str, Any]:
        return {
            "schema": REPORT_SCHEMA,
            "artifact_version": ARTIFACT_VERSION,
            "experiment": self.config.experiment,
            "seed": self.config.seed,
            "budgets": self.config.budgets,
            "config_hash": self.hash,
        }

    def write_table(self, header: Sequence[str], rows: Iterable[Sequence[Any]], table: Optional[str] = None) -> str:
        name = self.config.experiment + (f"_{table}" if table else "")
        path = os.path.join(self.output_dir, f"{name}.csv")
        with _WRITE_LOCK, open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write("# " + json.dumps(self._metadata(), sort_keys=True) + "\n")
            writer = csv.writer(fh)
            writer.writerow(header)
            count = 0
            for row in rows:
                writer.writerow(row)
                count += 1
        self.files.append(path)
        logger.info(f"📄 Tabla {path} ({count} filas)")
        return path

    def write_summary(self, summary: Dict[str, Any], passed: Optional[bool] = None) -> ExperimentReport:
        path = os.path.join(self.output_dir, f"{self.config.experiment}.json")
        self.files.append(path)
        report = ExperimentReport(
            experiment=self.config.experiment,
            schema=REPORT_SCHEMA,
            artifact_version=ARTIFACT_VERSION,
            seed=self.config.seed,
            budgets=self.config.budgets,
            config_hash=self.hash,
            summary=summary,
            files=list(self.files),
            passed=passed,
        )
        document = report.model_dump(mode="json", by_alias=True)
        document["config"] = self.config.model_dump(mode="json")
        with _WRITE_LOCK, open(path, "w", encoding="utf-8") as fh:
            json.dump(document, fh, indent=2, sort_keys=True, default=str)
        logger.info(f"✅ Resumen {path} (passed={passed})")
        return report


def write_rows_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """CSV sin metadatos para los subcomandos de diagnóstico."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with _WRITE_LOCK, open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return path
