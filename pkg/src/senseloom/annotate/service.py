"""HTTP JSON API over ProjectStore, plus static hosting for the browser UI.

Errors are serialized as {"code", "message", "detail"} with 400 for
validation problems, 404 for unknown entities, and 409 when a projection
has to be recomputed first.
"""

from __future__ import annotations

import json
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import FileResponse, JSONResponse, PlainTextResponse
from pydantic import BaseModel, Field

from ..corpus import LemmaSpec
from ..errors import ConflictError, DataError, NotFoundError, SenseloomError, ValidationError
from .store import ProjectStore, SenseAnnotation, SenseDef

_STATUS = [
    (NotFoundError, 404, "not_found"),
    (ConflictError, 409, "conflict"),
    (ValidationError, 400, "validation_error"),
    (DataError, 400, "data_error"),
]


def _error_response(exc: SenseloomError) -> JSONResponse:
    for klass, status, code in _STATUS:
        if isinstance(exc, klass):
            return JSONResponse(
                status_code=status,
                content={"code": code, "message": str(exc), "detail": type(exc).__name__},
            )
    return JSONResponse(
        status_code=500,
        content={"code": "internal", "message": str(exc), "detail": type(exc).__name__},
    )


class LemmaSpecBody(BaseModel):
    lemma: str
    forms: list[str]
    lang: str | None = None
    gloss_hints: list[str] = Field(default_factory=list)


class SenseBody(BaseModel):
    sense_id: str
    gloss: str = ""
    gloss_en: str | None = None


class ProjectBody(BaseModel):
    id: str
    lang: str
    lemmas: list[LemmaSpecBody] = Field(default_factory=list)
    senses: dict[str, list[SenseBody]] = Field(default_factory=dict)


class RecomputeBody(BaseModel):
    k: int | None = None
    method: str = "mds"
    seed: int = 42
    cluster: str = "kmeans"


class AnnotationBody(BaseModel):
    sentence_id: str
    lemma: str
    sense_id: str
    annotator: str
    provenance: str = "manual"


def create_app(data_root: str | Path, static_dir: str | Path | None = None) -> FastAPI:
    data_root = Path(data_root)
    data_root.mkdir(parents=True, exist_ok=True)
    app = FastAPI(title="senseloom annotation service")
    stores: dict[str, ProjectStore] = {}

    def store_for(project_id: str) -> ProjectStore:
        if project_id not in stores:
            root = data_root / project_id
            if not (root / "project.json").exists():
                raise NotFoundError(f"unknown project {project_id!r}")
            stores[project_id] = ProjectStore(root)
        return stores[project_id]

    @app.exception_handler(SenseloomError)
    async def on_senseloom_error(request: Request, exc: SenseloomError):
        return _error_response(exc)

    @app.exception_handler(RequestValidationError)
    async def on_request_error(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={"code": "validation_error", "message": "malformed request", "detail": str(exc)},
        )

    @app.get("/api/projects")
    def list_projects():
        found = []
        for meta_path in sorted(data_root.glob("*/project.json")):
            meta = json.loads(meta_path.read_text(encoding="utf-8"))
            found.append({"id": meta["id"], "lang": meta["lang"], "n_lemmas": len(meta.get("lemmas", []))})
        return {"projects": found}

    @app.post("/api/projects")
    def create_project(body: ProjectBody):
        lemmas = [
            LemmaSpec(
                lemma=spec.lemma,
                forms=tuple(spec.forms),
                lang=spec.lang or body.lang,
                gloss_hints=tuple(spec.gloss_hints),
            )
            for spec in body.lemmas
        ]
        senses = {
            lemma: [SenseDef(sense_id=s.sense_id, gloss=s.gloss, gloss_en=s.gloss_en) for s in defs]
            for lemma, defs in body.senses.items()
        }
        store = ProjectStore.create(data_root / body.id, body.id, body.lang, lemmas, senses)
        stores[body.id] = store
        return {"id": store.project_id, "revision": store.revision}

    @app.get("/api/projects/{project_id}/lemmas")
    def list_lemmas(project_id: str):
        store = store_for(project_id)
        out = []
        for lemma in store.lemmas():
            spec = store.lemma_specs.get(lemma)
            out.append(
                {
                    "lemma": lemma,
                    "forms": list(spec.forms) if spec else [lemma],
                    "n_sentences": len(store.sentences_for(lemma)),
                    "senses": [
                        {"sense_id": sd.sense_id, "gloss": sd.gloss, "gloss_en": sd.gloss_en}
                        for sd in store.senses_for(lemma)
                    ],
                    "has_projection": store.projection_path(lemma).exists(),
                }
            )
        return {"lemmas": out}

    @app.post("/api/projects/{project_id}/lemmas/{lemma}/senses")
    def add_sense(project_id: str, lemma: str, body: SenseBody):
        store = store_for(project_id)
        revision = store.add_sense(lemma, SenseDef(sense_id=body.sense_id, gloss=body.gloss, gloss_en=body.gloss_en))
        return {"revision": revision}

    @app.get("/api/projects/{project_id}/lemmas/{lemma}/view")
    def view(project_id: str, lemma: str, annotator: str | None = None):
        return store_for(project_id).view(lemma, annotator=annotator)

    @app.post("/api/projects/{project_id}/lemmas/{lemma}/recompute")
    def recompute(project_id: str, lemma: str, body: RecomputeBody):
        store = store_for(project_id)
        export = store.recompute(lemma, k=body.k, method=body.method, seed=body.seed, cluster=body.cluster)
        return export

    @app.post("/api/projects/{project_id}/annotations")
    def assign(project_id: str, body: AnnotationBody):
        store = store_for(project_id)
        revision = store.assign(
            SenseAnnotation(
                sentence_id=body.sentence_id,
                lemma=body.lemma,
                sense_id=body.sense_id,
                annotator=body.annotator,
                provenance=body.provenance,
            )
        )
        return {"revision": revision}

    @app.delete("/api/projects/{project_id}/annotations/{sentence_id}/{lemma}/{annotator}")
    def unassign(project_id: str, sentence_id: str, lemma: str, annotator: str):
        result = store_for(project_id).unassign(sentence_id, lemma, annotator)
        return {"status": result.status, "revision": result.revision}

    @app.get("/api/projects/{project_id}/export")
    def export(project_id: str, min_per_sense: int = 30, annotator: str | None = None):
        records = store_for(project_id).export_gold(min_per_sense=min_per_sense, annotator=annotator)
        body = "".join(json.dumps(rec.to_json(), ensure_ascii=False) + "\n" for rec in records)
        return PlainTextResponse(body, media_type="application/x-ndjson")

    if static_dir is not None:
        static_dir = Path(static_dir)

        @app.get("/")
        def index():
            return FileResponse(static_dir / "index.html")

        @app.get("/static/{path:path}")
        def static_files(path: str):
            target = (static_dir / path).resolve()
            if not str(target).startswith(str(static_dir.resolve())) or not target.is_file():
                raise NotFoundError(f"no such asset: {path}")
            return FileResponse(target)

    return app
