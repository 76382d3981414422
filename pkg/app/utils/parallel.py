import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from app.config.settings import settings

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def resolve_threads(threads: Optional[int] = None) -> int:
    """--threads gana; si no, GLASNER_LAB_THREADS; mínimo 1."""
    if threads is None:
        threads = settings.GLASNER_LAB_THREADS
    try:
        return max(1, int(threads))
    except (TypeError, ValueError):
        return 1


def ordered_map(func: Callable[[T], R], items: Iterable[T], threads: Optional[int] = None) -> List[R]:
    """
    Aplica func a cada item y devuelve los resultados en el orden de entrada,
    sin importar el orden de finalización de los hilos.
    """
    items = list(items)
    workers = resolve_threads(threads)
    if workers == 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))
