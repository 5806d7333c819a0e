"""HTTP service: check, LLM-eval jobs, checker-eval submissions, leaderboard.

The service is a thin shell over the library evaluators. Long-running LLM
evaluations go through the persistent job queue and are fetched by polling;
checker evaluations are synchronous. All state lives under one data
directory so a single process (or its restart) owns everything.
"""

from __future__ import annotations

import hashlib
import json
import logging
import time
import uuid
from contextlib import asynccontextmanager
from dataclasses import dataclass, field as dataclass_field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

import httpx
from fastapi import FastAPI, File, Form, HTTPException, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles

from ..checker_eval import (
    CheckerMetrics,
    ClassMetrics,
    GoldRecord,
    LeaderboardEntry,
    Submitter,
    compute_metrics,
    ingest_verdicts,
    load_factbench,
    rank_leaderboard,
)
from ..errors import (
    ChainMismatchError,
    ConfigParseError,
    CsvFormatError,
    DuplicateRowError,
    NoBinaryGoldError,
    SolverFailure,
    UnknownClaimError,
    UnknownSolverError,
    VerdictFormatError,
)
from ..llm_eval import DatasetManifest, LLMEvaluator, load_manifest
from ..pipeline import (
    DEFAULT_REGISTRY,
    PipelineConfig,
    SolverRegistry,
    SolverSpec,
    Stage,
    load_pipeline_config_file,
)
from ..response import evaluate_response
from ..solvers.backends import TextGenerationBackend
from .jobs import Job, JobQueue
from .store import JsonLogStore

log = logging.getLogger(__name__)

MAX_UPLOAD_BYTES_DEFAULT = 50 * 1024 * 1024


@dataclass
class ServiceSettings:
    """Everything a service instance needs, resolved before startup."""

    data_dir: Path
    registry: SolverRegistry | None = None
    configs: dict[str, PipelineConfig] = dataclass_field(default_factory=dict)
    # Per-solver params used when a check request names solvers directly.
    solver_params: dict[str, dict[str, Any]] = dataclass_field(default_factory=dict)
    datasets: dict[str, Path] = dataclass_field(default_factory=dict)
    checker_config_name: str | None = None
    judge: TextGenerationBackend | None = None
    workers: int = 2
    job_timeout_seconds: float = 7200.0
    max_upload_bytes: int = MAX_UPLOAD_BYTES_DEFAULT
    eval_max_workers: int = 1
    deterministic_timing: bool = False
    cors_origins: list[str] = dataclass_field(default_factory=lambda: ["*"])
    static_dir: Path | None = None
    webhook_client: httpx.Client | None = None


def load_configs_dir(
    directory, registry: SolverRegistry | None = None
) -> dict[str, PipelineConfig]:
    """Load every ``*.yaml`` pipeline config in a directory, named by stem."""
    configs: dict[str, PipelineConfig] = {}
    directory = Path(directory)
    if directory.is_dir():
        for path in sorted(directory.glob("*.yaml")):
            configs[path.stem] = load_pipeline_config_file(path, registry)
    return configs


class ServiceState:
    """Mutable runtime state shared by the route handlers."""

    def __init__(self, settings: ServiceSettings):
        self.settings = settings
        self.registry = settings.registry or DEFAULT_REGISTRY
        self.data_dir = Path(settings.data_dir)
        self.uploads_dir = self.data_dir / "uploads"
        self.reports_dir = self.data_dir / "reports"
        self.uploads_dir.mkdir(parents=True, exist_ok=True)
        self.reports_dir.mkdir(parents=True, exist_ok=True)
        self.store = JsonLogStore(self.data_dir / "store")

        self.gold: list[GoldRecord] | None = None
        if "factbench" in settings.datasets:
            self.gold = load_factbench(settings.datasets["factbench"])
        self.manifest: DatasetManifest | None = None
        if "factqa" in settings.datasets:
            self.manifest = load_manifest(settings.datasets["factqa"])

        self.jobs = JobQueue(
            self.store,
            handlers={"llm_eval": self._run_llm_eval_job},
            workers=settings.workers,
            timeout_seconds=settings.job_timeout_seconds,
            notify=self._notify_webhook,
        )

    # -- job plumbing -------------------------------------------------------

    def save_upload(self, content: bytes) -> str:
        upload_id = uuid.uuid4().hex
        (self.uploads_dir / f"{upload_id}.csv").write_bytes(content)
        return upload_id

    def _run_llm_eval_job(self, job: Job) -> str:
        if self.manifest is None:
            raise RuntimeError("factqa manifest is not installed")
        checker_config = None
        if self.settings.checker_config_name:
            checker_config = self.settings.configs[self.settings.checker_config_name]
        evaluator = LLMEvaluator(
            self.manifest,
            checker_config=checker_config,
            judge=self.settings.judge,
            registry=self.registry,
            max_workers=self.settings.eval_max_workers,
            timer=None if self.settings.deterministic_timing else time.perf_counter,
        )
        model_name = job.submitted_by.get("model_name", "unknown-model")
        report = evaluator.evaluate(
            model_name, self.uploads_dir / f"{job.input_ref}.csv"
        )
        report_path = self.reports_dir / f"{job.id}.json"
        report_path.write_text(report.to_json(), encoding="utf-8")
        return job.id

    def _notify_webhook(self, job: Job) -> None:
        client = self.settings.webhook_client
        if client is None or not job.webhook_url:
            return
        client.post(
            job.webhook_url,
            json={"job_id": job.id, "status": job.status},
            timeout=5.0,
        )

    def load_report(self, job: Job) -> dict[str, Any] | None:
        if job.result_ref is None:
            return None
        path = self.reports_dir / f"{job.result_ref}.json"
        if not path.exists():
            return None
        return json.loads(path.read_text(encoding="utf-8"))

    # -- leaderboard ---------------------------------------------------------

    def add_leaderboard_entry(self, entry: LeaderboardEntry) -> None:
        self.store.put("leaderboard", entry.entry_id, entry.to_dict())

    def leaderboard_entries(self) -> list[LeaderboardEntry]:
        entries = []
        for record in self.store.all("leaderboard"):
            entries.append(_entry_from_dict(record))
        return entries


def _entry_from_dict(record: dict[str, Any]) -> LeaderboardEntry:
    metrics = record["metrics"]
    return LeaderboardEntry(
        entry_id=record["entry_id"],
        checker_name=record["checker_name"],
        submitter=Submitter(
            name=record["submitter"]["name"],
            email=record["submitter"].get("email", ""),
            opt_in=bool(record["submitter"]["opt_in"]),
        ),
        metrics=CheckerMetrics(
            n=metrics["n"],
            accuracy=metrics["accuracy"],
            true_class=ClassMetrics(**metrics["true"]),
            false_class=ClassMetrics(**metrics["false"]),
            confusion=metrics["confusion"]["matrix"],
            n_gold_unknown=metrics["n_gold_unknown"],
            total_time_seconds=metrics["total_time_seconds"],
            total_cost_usd=metrics["total_cost_usd"],
        ),
        submitted_at=record["submitted_at"],
    )


def _parse_opt_in(raw: str) -> bool:
    return raw.strip().lower() in ("true", "1", "yes", "on")


def create_app(settings: ServiceSettings) -> FastAPI:
    state = ServiceState(settings)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        state.jobs.start()
        try:
            yield
        finally:
            state.jobs.stop()
            state.store.snapshot()

    app = FastAPI(title="factlab service", lifespan=lifespan)
    app.state.service = state
    app.add_middleware(
        CORSMiddleware,
        allow_origins=settings.cors_origins,
        allow_methods=["*"],
        allow_headers=["*"],
    )

    # -- registry and configs ---------------------------------------------

    @app.get("/v1/solvers")
    def list_solvers() -> dict[str, list[str]]:
        return state.registry.by_stage()

    @app.get("/v1/configs")
    def list_configs() -> dict[str, list[str]]:
        return {"configs": sorted(settings.configs)}

    # -- response checking ---------------------------------------------------

    @app.post("/v1/check")
    def check(payload: dict[str, Any]) -> JSONResponse:
        text = payload.get("text") or ""
        if not text.strip():
            raise HTTPException(status_code=400, detail="text must be non-empty")
        config = _resolve_check_config(payload)
        try:
            report = evaluate_response(text, config, state.registry)
        except SolverFailure as exc:
            raise HTTPException(
                status_code=502,
                detail={
                    "error": exc.message,
                    "solver": exc.name,
                    "stage": exc.stage,
                },
            ) from exc
        except (ChainMismatchError, ConfigParseError, UnknownSolverError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return JSONResponse(report.to_dict())

    def _resolve_check_config(payload: dict[str, Any]) -> PipelineConfig:
        config_name = payload.get("config_name")
        chosen = payload.get("solvers")
        if config_name:
            config = settings.configs.get(config_name)
            if config is None:
                raise HTTPException(
                    status_code=404, detail=f"unknown config {config_name!r}"
                )
            return config
        if isinstance(chosen, dict):
            return _compose_config(chosen)
        raise HTTPException(
            status_code=400, detail="request needs config_name or solvers"
        )

    def _compose_config(chosen: dict[str, Any]) -> PipelineConfig:
        specs = []
        chain = (
            ("claim_processor", Stage.CLAIM_PROCESSOR, "document", "claims"),
            ("retriever", Stage.RETRIEVER, "claims", "evidence"),
            ("verifier", Stage.VERIFIER, "evidence", "verdicts"),
        )
        for key, stage, input_name, output_name in chain:
            name = chosen.get(key)
            if not name:
                raise HTTPException(
                    status_code=400, detail=f"solvers payload is missing {key!r}"
                )
            if name not in state.registry:
                raise HTTPException(
                    status_code=404, detail=f"unknown solver {name!r}"
                )
            descriptor = state.registry.get(name)
            if descriptor.stage is not stage:
                raise HTTPException(
                    status_code=400,
                    detail=f"solver {name!r} is not a {stage.value}",
                )
            specs.append(
                SolverSpec(
                    name=name,
                    stage=stage,
                    input_name=input_name,
                    output_name=output_name,
                    params=settings.solver_params.get(name, {}),
                )
            )
        return PipelineConfig(solvers=tuple(specs))

    # -- LLM evaluation jobs ---------------------------------------------------

    @app.post("/v1/llm-eval", status_code=202)
    async def submit_llm_eval(
        model_name: str = Form(...),
        user_name: str = Form(...),
        user_email: str = Form(...),
        opt_in: str = Form("true"),
        webhook_url: str = Form(None),
        file: UploadFile = File(...),
    ) -> dict[str, str]:
        content = await file.read()
        _check_upload_size(content)
        _check_csv_header(content, b"question_id,response")
        if state.manifest is None:
            raise HTTPException(
                status_code=503, detail="factqa manifest is not installed"
            )
        upload_id = state.save_upload(content)
        job = state.jobs.submit(
            kind="llm_eval",
            submitted_by={
                "name": user_name,
                "email": user_email,
                "opt_in": _parse_opt_in(opt_in),
                "model_name": model_name,
            },
            input_ref=upload_id,
            webhook_url=webhook_url,
        )
        return {"job_id": job.id}

    @app.get("/v1/llm-eval/{job_id}")
    def get_llm_eval(job_id: str) -> JSONResponse:
        job = state.jobs.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail=f"unknown job {job_id!r}")
        payload: dict[str, Any] = {"job": job.to_dict()}
        if job.status == "done":
            payload["report"] = state.load_report(job)
        return JSONResponse(payload)

    # -- checker evaluation and leaderboard -----------------------------------

    @app.post("/v1/checker-eval")
    async def submit_checker_eval(
        checker_name: str = Form(...),
        user_name: str = Form(...),
        user_email: str = Form(...),
        opt_in: str = Form("true"),
        file: UploadFile = File(...),
    ) -> JSONResponse:
        if state.gold is None:
            raise HTTPException(
                status_code=503, detail="factbench gold set is not installed"
            )
        content = await file.read()
        _check_upload_size(content)
        upload_id = state.save_upload(content)
        path = state.uploads_dir / f"{upload_id}.csv"
        try:
            ingest = ingest_verdicts(path, state.gold)
            metrics = compute_metrics(ingest.rows)
        except UnknownClaimError as exc:
            raise HTTPException(
                status_code=422,
                detail={"error": "unknown claim ids", "unknown_ids": exc.ids},
            ) from exc
        except (CsvFormatError, VerdictFormatError, DuplicateRowError,
                NoBinaryGoldError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc

        entry = LeaderboardEntry(
            entry_id=uuid.uuid4().hex,
            checker_name=checker_name,
            submitter=Submitter(
                name=user_name, email=user_email, opt_in=_parse_opt_in(opt_in)
            ),
            metrics=metrics,
            submitted_at=datetime.now(timezone.utc).isoformat(),
        )
        state.add_leaderboard_entry(entry)
        ranked = rank_leaderboard(state.leaderboard_entries(), best_per_checker=True)
        rank = next(
            (
                position
                for position, candidate in enumerate(ranked, start=1)
                if candidate.entry_id == entry.entry_id
            ),
            None,
        )
        return JSONResponse(
            {
                "entry_id": entry.entry_id,
                "metrics": metrics.to_dict(),
                "macro_f1": metrics.macro_f1,
                "rank": rank,
                "coverage": {"missing_ids": ingest.missing_ids},
            }
        )

    @app.get("/v1/checker-eval/{entry_id}")
    def get_checker_entry(entry_id: str) -> JSONResponse:
        record = state.store.get("leaderboard", entry_id)
        if record is None:
            raise HTTPException(
                status_code=404, detail=f"unknown entry {entry_id!r}"
            )
        return JSONResponse(record)

    @app.get("/v1/leaderboard")
    def get_leaderboard(all_entries: bool = False) -> JSONResponse:
        ranked = rank_leaderboard(
            state.leaderboard_entries(), best_per_checker=not all_entries
        )
        return JSONResponse(
            {
                "entries": [
                    {"rank": position, **entry.to_dict(public=True)}
                    for position, entry in enumerate(ranked, start=1)
                ]
            }
        )

    # -- dataset downloads -----------------------------------------------------

    @app.get("/v1/datasets/{name}")
    def download_dataset(name: str) -> Response:
        path = settings.datasets.get(name)
        if path is None or not Path(path).exists():
            raise HTTPException(
                status_code=404, detail=f"dataset {name!r} is not installed"
            )
        body = Path(path).read_bytes()
        digest = hashlib.sha256(body).hexdigest()
        return Response(
            content=body,
            media_type="application/jsonl",
            headers={
                "X-Content-Digest": f"sha256:{digest}",
                "Content-Disposition": f'attachment; filename="{name}.jsonl"',
            },
        )

    def _check_upload_size(content: bytes) -> None:
        if len(content) > settings.max_upload_bytes:
            raise HTTPException(status_code=413, detail="upload exceeds size cap")

    def _check_csv_header(content: bytes, expected: bytes) -> None:
        first_line = content.split(b"\n", 1)[0].strip().rstrip(b"\r")
        if first_line != expected:
            raise HTTPException(
                status_code=400,
                detail=f"malformed CSV: expected header {expected.decode()}",
            )

    if settings.static_dir and Path(settings.static_dir).is_dir():
        app.mount(
            "/",
            StaticFiles(directory=str(settings.static_dir), html=True),
            name="dashboard",
        )

    return app
