"""Asynchronous job queue for long-running evaluations.

Jobs persist through the store so a restart re-queues anything that was
queued or running when the process died, while finished jobs keep their
results. Handlers run inside a worker pool with a wall-clock timeout; a
timed-out job is marked failed even though its thread may still unwind.
"""

from __future__ import annotations

import logging
import queue
import threading
import uuid
from concurrent.futures import Future, ThreadPoolExecutor
from concurrent.futures import TimeoutError as FutureTimeoutError
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Callable

from .store import JsonLogStore

log = logging.getLogger(__name__)

VALID_TRANSITIONS = {
    "queued": {"running"},
    "running": {"done", "failed"},
    "done": set(),
    "failed": set(),
}


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass
class Job:
    id: str
    kind: str
    status: str
    submitted_by: dict[str, Any]
    input_ref: str
    result_ref: str | None = None
    error: str | None = None
    webhook_url: str | None = None
    timestamps: dict[str, str | None] = field(
        default_factory=lambda: {"created": None, "started": None, "finished": None}
    )

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "kind": self.kind,
            "status": self.status,
            "submitted_by": self.submitted_by,
            "input_ref": self.input_ref,
            "result_ref": self.result_ref,
            "error": self.error,
            "webhook_url": self.webhook_url,
            "timestamps": dict(self.timestamps),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Job":
        return cls(
            id=data["id"],
            kind=data["kind"],
            status=data["status"],
            submitted_by=data.get("submitted_by", {}),
            input_ref=data["input_ref"],
            result_ref=data.get("result_ref"),
            error=data.get("error"),
            webhook_url=data.get("webhook_url"),
            timestamps=dict(data.get("timestamps", {})),
        )

    def transition(self, status: str) -> None:
        allowed = VALID_TRANSITIONS[self.status]
        if status not in allowed:
            raise ValueError(f"illegal job transition {self.status} -> {status}")
        self.status = status


JobHandler = Callable[[Job], str]


class JobQueue:
    """Worker pool draining persisted jobs; one handler per job kind."""

    def __init__(
        self,
        store: JsonLogStore,
        handlers: dict[str, JobHandler],
        workers: int = 2,
        timeout_seconds: float = 7200.0,
        notify: Callable[[Job], None] | None = None,
    ):
        self.store = store
        self.handlers = handlers
        self.timeout_seconds = timeout_seconds
        self.notify = notify
        self._queue: "queue.Queue[str | None]" = queue.Queue()
        self._workers = max(1, workers)
        self._threads: list[threading.Thread] = []
        self._handler_pool = ThreadPoolExecutor(
            max_workers=self._workers, thread_name_prefix="job-handler"
        )
        self._stopping = threading.Event()
        self._recover()

    # -- lifecycle ---------------------------------------------------------

    def _recover(self) -> None:
        """Re-queue anything that did not finish before the last shutdown."""
        for record in self.store.all("jobs"):
            job = Job.from_dict(record)
            if job.status == "running":
                job.status = "queued"
                self._save(job)
            if job.status == "queued":
                self._queue.put(job.id)

    def start(self) -> None:
        for index in range(self._workers):
            thread = threading.Thread(
                target=self._worker_loop, name=f"job-worker-{index}", daemon=True
            )
            thread.start()
            self._threads.append(thread)

    def stop(self, wait_seconds: float = 5.0) -> None:
        self._stopping.set()
        for _ in self._threads:
            self._queue.put(None)
        for thread in self._threads:
            thread.join(timeout=wait_seconds)
        self._handler_pool.shutdown(wait=False)

    # -- submission and lookup ----------------------------------------------

    def submit(
        self,
        kind: str,
        submitted_by: dict[str, Any],
        input_ref: str,
        webhook_url: str | None = None,
    ) -> Job:
        if kind not in self.handlers:
            raise ValueError(f"no handler for job kind {kind!r}")
        job = Job(
            id=uuid.uuid4().hex,
            kind=kind,
            status="queued",
            submitted_by=submitted_by,
            input_ref=input_ref,
            webhook_url=webhook_url,
        )
        job.timestamps["created"] = _now()
        self._save(job)
        self._queue.put(job.id)
        return job

    def get(self, job_id: str) -> Job | None:
        record = self.store.get("jobs", job_id)
        return Job.from_dict(record) if record else None

    def _save(self, job: Job) -> None:
        self.store.put("jobs", job.id, job.to_dict())

    # -- execution ----------------------------------------------------------

    def _worker_loop(self) -> None:
        while not self._stopping.is_set():
            job_id = self._queue.get()
            if job_id is None:
                return
            job = self.get(job_id)
            if job is None or job.status != "queued":
                continue
            self._run_job(job)

    def _run_job(self, job: Job) -> None:
        job.transition("running")
        job.timestamps["started"] = _now()
        self._save(job)
        handler = self.handlers[job.kind]
        future: Future = self._handler_pool.submit(handler, job)
        try:
            job.result_ref = future.result(timeout=self.timeout_seconds)
            job.transition("done")
        except FutureTimeoutError:
            future.cancel()
            job.transition("failed")
            job.error = f"timeout after {self.timeout_seconds}s"
        except Exception as exc:  # handler errors must never kill the worker
            job.transition("failed")
            job.error = str(exc)
        job.timestamps["finished"] = _now()
        self._save(job)
        if self.notify is not None and job.webhook_url:
            try:
                self.notify(job)
            except Exception:
                log.warning("webhook notification failed for job %s", job.id)
