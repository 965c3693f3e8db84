"""HTTP backend for the labeling workbench.

Holds one immutable pipeline snapshot (corpus, LF set, matrix, fitted model,
labels, diagnostics) and swaps it atomically under a lock when LFs are
edited or a refit is requested, so readers never observe a half-updated
state. Endpoints are plain JSON under ``/api/``; a built frontend directory
can be mounted at the root.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse

from . import lf_dsl
from .corpus import Corpus, DevLabel
from .diagnostics import lf_report
from .end_model import roc_auc, roc_points
from .matrix import LabelMatrix, compute_stats, pairwise_independence_test
from .model import (
    DependencyStructure,
    FitConfig,
    GenerativeParams,
    emit_labels,
    fit,
    learn_structure,
)
from .prob_labels import ProbLabels


@dataclass(frozen=True)
class PipelineState:
    """One immutable snapshot of the whole pipeline."""

    corpus: Corpus
    dev: tuple[DevLabel, ...]
    lf_text: str
    lfset: lf_dsl.LFSet
    matrix: LabelMatrix
    warnings: dict
    params: GenerativeParams
    structure: Optional[DependencyStructure]
    labels: ProbLabels
    report: dict
    fit_settings: dict
    structure_settings: dict
    # directory that relative paths inside the LF text (term lists) resolve
    # against; kept in the snapshot so edited LF text keeps resolving
    lf_base_dir: Optional[Path] = None


class StateHolder:
    """Current snapshot plus a lock serializing mutations."""

    def __init__(self, state: PipelineState):
        self.state = state
        self.lock = threading.Lock()


def _fit_config(settings: dict, dev_rate: Optional[float] = None) -> FitConfig:
    init_beta = settings.get("init_beta")
    if init_beta is None:
        init_beta = 0.5 if dev_rate is None else dev_rate
    return FitConfig(
        max_iter=int(settings.get("max_iter", 500)),
        tol=float(settings.get("tol", 1e-7)),
        step=float(settings.get("step", 0.1)),
        init_accuracy=float(settings.get("init_accuracy", 0.7)),
        init_beta=float(init_beta),
        pin_beta=None
        if settings.get("pin_beta") is None
        else float(settings["pin_beta"]),
        seed=int(settings.get("seed", 0)),
    )


def _run_pipeline(
    corpus: Corpus,
    dev: tuple[DevLabel, ...],
    lf_text: str,
    fit_settings: dict,
    structure_settings: dict,
    lf_base_dir: Optional[Path] = None,
) -> PipelineState:
    """Parse, apply, fit, label, report -- the full recompute."""
    lfset = lf_dsl.parse_lf_file(lf_text, base_dir=lf_base_dir)
    warnings = lf_dsl.EvalWarnings()
    matrix = lf_dsl.apply_all(lfset, corpus, warnings)
    dev_rate = sum(1 for d in dev if d.y > 0) / len(dev) if dev else None
    cfg = _fit_config(fit_settings, dev_rate)
    structure: Optional[DependencyStructure] = None
    if structure_settings.get("mode") == "learned":
        structure = learn_structure(
            matrix, threshold=float(structure_settings.get("threshold", 0.05)), config=cfg
        )
    params = fit(matrix, structure, cfg)
    labels = emit_labels(matrix, params, dev)
    report = lf_report(matrix, dev, params)
    return PipelineState(
        corpus=corpus,
        dev=dev,
        lf_text=lf_text,
        lfset=lfset,
        matrix=matrix,
        warnings=warnings.to_dict(),
        params=params,
        structure=structure,
        labels=labels,
        report=report,
        fit_settings=dict(fit_settings),
        structure_settings=dict(structure_settings),
        lf_base_dir=lf_base_dir,
    )


def build_state(cfg) -> StateHolder:
    """Assemble the initial snapshot from a CLI RunConfig."""
    from .cli import _load_pipeline_corpus

    corpus, dev = _load_pipeline_corpus(cfg)
    lf_path = cfg.path("lfs")
    if not lf_path.exists():
        from .cli import CLIError

        raise CLIError(f"LF file not found: {lf_path}")
    lf_text = lf_path.read_text(encoding="utf-8")
    state = _run_pipeline(
        corpus,
        tuple(dev),
        lf_text,
        fit_settings={**cfg.values["fit"], "seed": cfg.values["seed"]},
        structure_settings=dict(cfg.values["structure"]),
        lf_base_dir=lf_path.parent,
    )
    return StateHolder(state)


def _model_payload(state: PipelineState) -> dict:
    payload = state.params.to_dict()
    payload["model_version"] = state.params.version()
    payload["lfset_version"] = state.lfset.version
    payload["structure"] = {
        "mode": state.structure_settings.get("mode", "independent"),
        "edges": [
            {
                "j": j,
                "k": k,
                "names": [state.matrix.col_names[j], state.matrix.col_names[k]],
            }
            for j, k in (state.structure.edges if state.structure else ())
        ],
    }
    return payload


def _stats_payload(state: PipelineState) -> dict:
    stats = compute_stats(state.matrix, state.dev)
    payload = stats.to_dict()
    payload["lfset_version"] = state.lfset.version
    payload["warnings"] = state.warnings
    if state.matrix.n >= 2:
        payload["independence"] = pairwise_independence_test(state.matrix).to_dict()
    return payload


def _dev_metrics_payload(state: PipelineState) -> dict:
    if not state.dev:
        return {"available": False, "reason": "no dev labels loaded"}
    index = state.matrix.row_index()
    rows = [index[d.doc_id] for d in state.dev]
    y = [d.y for d in state.dev]
    p = state.labels.p[rows]
    payload: dict = {
        "available": True,
        "n_dev": len(rows),
        "lfs": [
            {
                "name": lf["name"],
                "dev_accuracy": lf["dev_accuracy"],
                "dev_votes": lf["dev_votes"],
                "learned_accuracy": lf["learned_accuracy"],
                "accuracy_gap": lf["accuracy_gap"],
            }
            for lf in state.report["lfs"]
        ],
    }
    import numpy as np

    y_arr = np.asarray(y)
    if len(set(y)) == 2:
        payload["posterior_auc"] = roc_auc(p, y_arr)
        payload["roc"] = roc_points(p, y_arr)
    else:
        payload["posterior_auc"] = None
        payload["roc"] = []
    return payload


def create_app(holder: StateHolder, static_dir: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="labelforge workbench", docs_url=None, redoc_url=None)

    @app.get("/api/health")
    def health():
        state = holder.state
        return {
            "status": "ok",
            "documents": len(state.corpus),
            "lfs": len(state.lfset),
            "lfset_version": state.lfset.version,
        }

    @app.get("/api/corpus/summary")
    def corpus_summary():
        state = holder.state
        lengths = [doc.token_count for doc in state.corpus]
        sections = sorted({s.name for doc in state.corpus for s in doc.sections})
        return {
            "n_documents": len(state.corpus),
            "n_dev": len(state.dev),
            "mean_tokens": sum(lengths) / len(lengths) if lengths else 0.0,
            "min_tokens": min(lengths) if lengths else 0,
            "max_tokens": max(lengths) if lengths else 0,
            "sections": sections,
        }

    @app.get("/api/lfs")
    def get_lfs():
        state = holder.state
        return {
            "version": state.lfset.version,
            "text": state.lf_text,
            "lfs": [lf.canonical() for lf in state.lfset.lfs],
        }

    @app.put("/api/lfs")
    async def put_lfs(request: Request):
        body = await request.body()
        text = body.decode("utf-8")
        with holder.lock:
            current = holder.state
            try:
                new_state = _run_pipeline(
                    current.corpus,
                    current.dev,
                    text,
                    current.fit_settings,
                    current.structure_settings,
                    lf_base_dir=current.lf_base_dir,
                )
            except lf_dsl.LFParseError as exc:
                return JSONResponse(status_code=422, content={"error": str(exc)})
            holder.state = new_state
        return {
            "version": new_state.lfset.version,
            "model_version": new_state.params.version(),
            "report": new_state.report,
        }

    @app.post("/api/fit")
    async def refit(request: Request):
        body = await request.body()
        overrides = {}
        if body.strip():
            import json as _json

            try:
                overrides = _json.loads(body)
            except _json.JSONDecodeError as exc:
                return JSONResponse(
                    status_code=422, content={"error": f"invalid JSON body: {exc}"}
                )
            if not isinstance(overrides, dict):
                return JSONResponse(
                    status_code=422, content={"error": "fit overrides must be an object"}
                )
        with holder.lock:
            current = holder.state
            fit_settings = dict(current.fit_settings)
            structure_settings = dict(current.structure_settings)
            for key in ("max_iter", "tol", "step", "init_accuracy", "init_beta",
                        "pin_beta", "seed"):
                if key in overrides:
                    fit_settings[key] = overrides[key]
            if "structure_mode" in overrides:
                structure_settings["mode"] = overrides["structure_mode"]
            if "structure_threshold" in overrides:
                structure_settings["threshold"] = overrides["structure_threshold"]
            try:
                new_state = _run_pipeline(
                    current.corpus,
                    current.dev,
                    current.lf_text,
                    fit_settings,
                    structure_settings,
                    lf_base_dir=current.lf_base_dir,
                )
            except (ValueError, lf_dsl.LFParseError) as exc:
                return JSONResponse(status_code=422, content={"error": str(exc)})
            holder.state = new_state
        return _model_payload(new_state)

    @app.get("/api/matrix/stats")
    def matrix_stats():
        return _stats_payload(holder.state)

    @app.get("/api/dev/metrics")
    def dev_metrics():
        return _dev_metrics_payload(holder.state)

    @app.get("/api/labels")
    def labels(format: str = "json"):
        state = holder.state
        if format == "jsonl":
            return PlainTextResponse(
                state.labels.to_jsonl(), media_type="application/x-ndjson"
            )
        return {
            "model_version": state.labels.model_version,
            "labels": [
                {
                    "doc_id": doc_id,
                    "p": float(p),
                    "excluded": doc_id in state.labels.excluded_ids,
                }
                for doc_id, p in zip(state.labels.doc_ids, state.labels.p)
            ],
        }

    @app.get("/api/model")
    def model_payload():
        return _model_payload(holder.state)

    @app.get("/api/report")
    def report():
        return holder.state.report

    if static_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="frontend")

    return app
