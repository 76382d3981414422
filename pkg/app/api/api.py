import logging
import time
from typing import Any, Dict, List, Optional

import psutil
from fastapi import FastAPI, HTTPException, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from app.config import budgets
from app.config.settings import ARTIFACT_VERSION, settings
from app.main import setup_logging
from app.models.models import DensityVerdict, ExperimentConfig, SearchBudget
from app.modules.errors import BudgetExceededError, DimensionMismatchError, GlasnerLabError, HypothesisViolationError, PrecisionError
from app.modules.experiments.experiments import EXPERIMENTS, run_experiment
from app.modules.intlinalg.snf import gcd_bound_factorize, smith_normal_form
from app.modules.scheduler.task_queue import task_queue
from app.modules.search.search import find_scalar_dilation, outcome_to_json
from app.modules.torus.torus import is_eps_dense, point_set_from_json
from app.utils.validators import InputValidators, ValidationError

setup_logging()
logger = logging.getLogger(__name__)

app = FastAPI(
    title="Glasner Lab API",
    description="Densidad certificada, búsqueda de dilataciones y experimentos reproducibles en el toro",
    version=ARTIFACT_VERSION,
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

_STARTED_AT = time.time()

# Payloads
class DensityPayload(BaseModel):
    points: Dict[str, Any]
    eps: float
    max_refinements: int = budgets.DEFAULT_MAX_REFINEMENTS

class ScalarSearchPayload(BaseModel):
    points: Dict[str, Any]
    eps: float
    n_max: int = Field(default=1000, gt=0)
    max_refinements: int = budgets.DEFAULT_MAX_REFINEMENTS
    seed: Optional[int] = None

class SnfPayload(BaseModel):
    matrix: List[List[Any]]

class ExperimentPayload(BaseModel):
    seed: Optional[int] = None
    eps: Optional[float] = None
    budgets: Dict[str, int] = Field(default_factory=dict)
    params: Dict[str, Any] = Field(default_factory=dict)


# Errores de dominio -> HTTP
@app.exception_handler(ValidationError)
async def _validation_handler(request: Request, exc: ValidationError):
    return JSONResponse(status_code=400, content={"error": "ValidationError", "detail": str(exc)})

@app.exception_handler(GlasnerLabError)
async def _lab_handler(request: Request, exc: GlasnerLabError):
    if isinstance(exc, BudgetExceededError):
        status = 413
    elif isinstance(exc, (HypothesisViolationError, DimensionMismatchError, PrecisionError)):
        status = 422
    else:
        logger.error(f"❌ {type(exc).__name__} en {request.url.path}: {exc}")
        status = 500
    return JSONResponse(status_code=status, content={"error": type(exc).__name__, "detail": str(exc)})


@app.get("/")
async def root():
    """Endpoint raíz para verificar que la API está funcionando."""
    return {"message": "Glasner Lab API está en funcionamiento", "version": ARTIFACT_VERSION}

@app.get("/health")
async def health_check():
    """Estado del proceso para los health checks del contenedor."""
    process = psutil.Process()
    memory_percent = process.memory_percent()
    return {
        "status": "healthy" if memory_percent < 80 else "warning",
        "uptime_s": round(time.time() - _STARTED_AT, 1),
        "process": {
            "rss_mb": round(process.memory_info().rss / (1024**2), 2),
            "memory_percent": round(memory_percent, 2),
            "threads": process.num_threads(),
        },
        "system": {
            "cpu_count": psutil.cpu_count(),
            "memory_available_mb": round(psutil.virtual_memory().available / (1024**2), 2),
        },
        "config": {"threads": settings.GLASNER_LAB_THREADS, "output_dir": settings.OUTPUT_DIR},
    }

@app.post("/density", response_model=DensityVerdict)
def check_density(payload: DensityPayload):
    """Veredicto certificado DENSE / NOT_DENSE / UNDECIDED."""
    Y = point_set_from_json(payload.points)
    return is_eps_dense(Y, payload.eps, payload.max_refinements)

@app.post("/search/scalar")
def search_scalar(payload: ScalarSearchPayload):
    """Primer n <= n_max con nY eps-denso."""
    Y = point_set_from_json(payload.points)
    outcome = find_scalar_dilation(
        Y, payload.eps, SearchBudget(n_max=payload.n_max), payload.max_refinements, seed=payload.seed,
    )
    return outcome_to_json(outcome)

@app.post("/snf")
def snf(payload: SnfPayload):
    """Forma normal de Smith y, si el rango es positivo, la factorización T0 = T R."""
    T0 = InputValidators.validate_int_matrix(payload.matrix, name="T0")
    result = smith_normal_form(T0)
    body: Dict[str, Any] = {"snf": result.model_dump(mode="json")}
    if result.k:
        body["gcd_bound"] = gcd_bound_factorize(T0).model_dump(mode="json")
    return body

@app.get("/experiments")
async def list_experiments():
    return {"experiments": sorted(EXPERIMENTS)}

@app.post("/experiments/{name}")
async def enqueue_experiment(name: str, payload: Optional[ExperimentPayload] = None):
    """Encola un experimento y retorna un job_id."""
    if name not in EXPERIMENTS:
        raise HTTPException(status_code=404, detail=f"Experimento {name!r} no existe")
    payload = payload or ExperimentPayload()
    config = ExperimentConfig(
        experiment=name,
        seed=settings.DEFAULT_SEED if payload.seed is None else payload.seed,
        eps=payload.eps,
        budgets=payload.budgets,
        params=payload.params,
        output_dir=settings.OUTPUT_DIR,
    )
    job_id = task_queue.enqueue(f"experiment:{name}", lambda: run_experiment(config))
    return {"job_id": job_id}

@app.get("/tasks/{job_id}")
async def get_task_status(job_id: str):
    """Consulta el estado de un job enviado a la cola."""
    job = task_queue.get(job_id)
    if not job:
        raise HTTPException(status_code=404, detail="Job no encontrado")
    return job
