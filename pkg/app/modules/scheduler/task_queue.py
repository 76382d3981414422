from __future__ import annotations

import logging
import threading
import time
import uuid
from collections import deque
from typing import Any, Callable, Deque, Dict, Optional

from pydantic import BaseModel, ConfigDict, PrivateAttr

from app.config import budgets
from app.modules.scheduler.processing_lock import EXPERIMENT_LOCK

logger = logging.getLogger(__name__)

LOCK_TIMEOUT_S = 30


class Job(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    job_id: str
    action: str
    status: str = "queued"
    created_at: float
    started_at: Optional[float] = None
    finished_at: Optional[float] = None
    message: Optional[str] = None
    result: Any = None

    _func: Callable[[], Any] = PrivateAttr()
    _done: threading.Event = PrivateAttr(default_factory=threading.Event)

    def snapshot(self) -> Dict[str, Any]:
        payload = self.model_dump(exclude={"result"})
        res = self.result
        payload["result"] = res.model_dump(mode="json", by_alias=True) if hasattr(res, "model_dump") else res
        return payload


class TaskQueue:
    """
    Cola FIFO de experimentos; un único worker los ejecuta bajo EXPERIMENT_LOCK.
    Solo se conservan los `max_finished` trabajos terminados más recientes.
    """

    def __init__(self, max_finished: int = budgets.TASK_QUEUE_MAX_FINISHED) -> None:
        self._max_finished = max_finished
        self._jobs: Dict[str, Job] = {}
        self._pending: Deque[str] = deque()
        self._finished: Deque[str] = deque()
        self._cv = threading.Condition()
        self._running = True
        self._worker = threading.Thread(target=self._loop, name="experiment-worker", daemon=True)
        self._worker.start()

    def enqueue(self, action: str, func: Callable[[], Any]) -> str:
        job = Job(job_id=uuid.uuid4().hex, action=action, created_at=time.time())
        job._func = func
        with self._cv:
            self._jobs[job.job_id] = job
            self._pending.append(job.job_id)
            self._cv.notify()
        logger.info(f"Trabajo {job.job_id} encolado ({action})")
        return job.job_id

    def get(self, job_id: str) -> Optional[Dict[str, Any]]:
        with self._cv:
            job = self._jobs.get(job_id)
            return job.snapshot() if job else None

    def wait(self, job_id: str, timeout: float = 60.0) -> Optional[Dict[str, Any]]:
        """Bloquea hasta que el trabajo termine (done/error) o venza el timeout."""
        with self._cv:
            job = self._jobs.get(job_id)
        if job is None:
            return None
        job._done.wait(timeout)
        return self.get(job_id)

    def stop(self) -> None:
        with self._cv:
            self._running = False
            self._cv.notify_all()

    def _finish(self, job: Job, status: str, message: str, result: Any = None) -> None:
        with self._cv:
            job.status = status
            job.message = message
            job.result = result
            job.finished_at = time.time()
            self._finished.append(job.job_id)
            while len(self._finished) > self._max_finished:
                self._jobs.pop(self._finished.popleft(), None)
        job._done.set()

    def _next(self) -> Optional[Job]:
        with self._cv:
            while not self._pending and self._running:
                self._cv.wait(timeout=1.0)
            if not self._running:
                return None
            job = self._jobs[self._pending.popleft()]
            job.status = "running"
            job.started_at = time.time()
            return job

    def _loop(self) -> None:
        while self._running:
            job = self._next()
            if job is None:
                break
            if not EXPERIMENT_LOCK.acquire(timeout=LOCK_TIMEOUT_S):
                logger.warning(f"⚠️ Timeout del lock para el trabajo {job.job_id}")
                self._finish(job, "error", f"Otro experimento sigue en curso tras {LOCK_TIMEOUT_S} s de espera")
                continue
            try:
                logger.debug(f"Ejecutando trabajo {job.job_id}")
                self._finish(job, "done", "Completado", job._func())
            except Exception as e:
                logger.exception(f"❌ Error en el trabajo {job.job_id}: {e}")
                self._finish(job, "error", str(e))
            finally:
                EXPERIMENT_LOCK.release()


task_queue = TaskQueue()
