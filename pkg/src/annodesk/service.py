"""The centralized server: HTTP endpoints over the event-sourced project.

Every mutation is appended (flushed and fsynced) to the event log before the
state transition, so an acknowledged response implies durability. Writes are
serialized by one project-wide lock, which trivially satisfies per-entity
write serialization; reads run under the same lock and therefore see
consistent snapshots, including the caller's own writes.

Error responses share one envelope:
``{"error": {"code", "message", "entity", "details"}}``.
"""

from __future__ import annotations

import base64
import os
import threading
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Callable

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse

from . import adaptation, translation
from .admin import Project, ProjectConfig, Role
from .corpus import DomainLabel, LanguageCode, Tagset
from .errors import (
    BindFailure,
    DomainError,
    NotAuthenticated,
    UnknownEntity,
    ValidationFailed,
)
from .formats import parse_annotated_file, serialize_annotated_file
from .store import EventLog, ProjectStore, export_archive, open_project

_STATUS_BY_CODE = {
    "NotAuthenticated": 401,
    "BadCredential": 401,
    "NotAuthorized": 403,
    "LanguageMismatch": 403,
    "InactiveAccount": 403,
    "UnknownEntity": 404,
    "UnknownLanguage": 404,
    "IncompleteFile": 409,
    "CapExceeded": 409,
    "AlreadyAssigned": 409,
    "NoActiveAssignment": 409,
    "ConflictingText": 409,
    "TextMismatch": 409,
    "NoChange": 409,
    "DuplicateUser": 409,
    "StoreUnavailable": 503,
}


def status_for(error: DomainError) -> int:
    return _STATUS_BY_CODE.get(error.code, 400)


DEFAULT_TAGS = ("N", "V", "PRP", "PSP", "CC", "QT", "JJ", "RB")


@dataclass
class ServiceConfig:
    """Environment-style service configuration."""

    bind_host: str = "127.0.0.1"
    bind_port: int = 8400
    store_path: str = "./annodesk-store"
    max_active_assignments: int = 3
    open_registration: bool = False
    languages: tuple[str, ...] = ("hin", "eng")
    tagset_name: str = "default"
    tagset_labels: tuple[str, ...] = DEFAULT_TAGS
    root_user: str = "root"
    root_credential: str = "root-credential"
    snapshot_every: int = 500

    @classmethod
    def from_env(cls, env: dict[str, str] | None = None) -> "ServiceConfig":
        env = dict(os.environ if env is None else env)
        bind = env.get("ANNODESK_BIND", "127.0.0.1:8400")
        host, _, port = bind.rpartition(":")
        return cls(
            bind_host=host or "127.0.0.1",
            bind_port=int(port),
            store_path=env.get("ANNODESK_STORE", "./annodesk-store"),
            max_active_assignments=int(env.get("ANNODESK_MAX_ACTIVE", "3")),
            open_registration=env.get("ANNODESK_OPEN_REGISTRATION", "").lower() in ("1", "true", "yes"),
            languages=tuple(
                lang.strip() for lang in env.get("ANNODESK_LANGUAGES", "hin,eng").split(",") if lang.strip()
            ),
            tagset_name=env.get("ANNODESK_TAGSET_NAME", "default"),
            tagset_labels=tuple(
                t.strip() for t in env.get("ANNODESK_TAGSET", ",".join(DEFAULT_TAGS)).split(",") if t.strip()
            ),
            root_user=env.get("ANNODESK_ROOT_USER", "root"),
            root_credential=env.get("ANNODESK_ROOT_CREDENTIAL", "root-credential"),
            snapshot_every=int(env.get("ANNODESK_SNAPSHOT_EVERY", "500")),
        )

    def project_config(self) -> ProjectConfig:
        return ProjectConfig(
            languages=tuple(LanguageCode(lang) for lang in self.languages),
            tagset=Tagset(self.tagset_name, tuple(self.tagset_labels)),
            max_active_assignments=self.max_active_assignments,
            open_registration=self.open_registration,
        )


class ServiceCore:
    """Project + store + dictionaries behind one write lock.

    This is the single implementation both the HTTP layer and the CLI's local
    mode drive, so the two surfaces cannot diverge.
    """

    def __init__(
        self,
        project: Project,
        log: EventLog | None = None,
        store: ProjectStore | None = None,
        snapshot_every: int = 0,
    ):
        self.project = project
        self.log = log
        self.store = store
        self.snapshot_every = snapshot_every
        self.dictionaries = store.load_dictionaries() if store else {}
        self._lock = threading.RLock()

    @classmethod
    def open(cls, config: ServiceConfig, clock: Callable[[], datetime] | None = None) -> "ServiceCore":
        project, log, store = open_project(
            Path(config.store_path),
            config.project_config(),
            clock,
            bootstrap_master=(config.root_user, config.root_credential),
        )
        return cls(project, log, store, snapshot_every=config.snapshot_every)

    def _maybe_snapshot(self) -> None:
        if (
            self.store is not None
            and self.snapshot_every
            and self.project.seq % self.snapshot_every == 0
        ):
            self.store.save_snapshot(self.project)

    def mutate(self, fn: Callable[[Project], dict]) -> dict:
        with self._lock:
            result = fn(self.project)
            self._maybe_snapshot()
            return result

    def query(self, fn: Callable[[Project], object]) -> object:
        with self._lock:
            return fn(self.project)

    # convenience passthroughs -------------------------------------------------

    def resolve(self, token: str | None) -> str:
        with self._lock:
            return self.project.resolve_token(token).user_id

    def translate_file(self, actor_id: str | None, file_id: str, pair: str) -> dict:
        with self._lock:
            project = self.project
            file = project._file(file_id)
            src, _, tgt = pair.partition("-")
            if not src or not tgt:
                raise ValidationFailed([f"bad language pair {pair!r}, want '<src>-<tgt>'"])
            project.authorize(actor_id, "translate_file", language=file.language)
            dictionary = self.dictionaries.get((src, tgt))
            if dictionary is None:
                raise UnknownEntity(f"no dictionary for pair {pair!r}", entity=f"dictionary:{pair}")
            gloss = translation.translate_file(file, dictionary)
            return {
                "file_id": file_id,
                "pair": pair,
                "sentences": [
                    {
                        "id": sid,
                        "gloss": [
                            {"source": g.source, "output": g.output, "translated": g.translated}
                            for g in tokens
                        ],
                    }
                    for sid, tokens in gloss
                ],
            }

    def adapt(self, actor_id: str | None, payload: dict) -> dict:
        with self._lock:
            self.project.authorize(actor_id, "adapt")
        mode = payload.get("mode", "text")
        if mode == "text":
            return self._adapt_text(payload)
        if mode == "annotated":
            return self._adapt_annotated(payload)
        raise ValidationFailed([f"unknown adapt mode {mode!r}"])

    def _adapt_text(self, payload: dict) -> dict:
        if "text_base64" in payload:
            data = base64.b64decode(payload["text_base64"])
        elif "text" in payload:
            data = str(payload["text"]).encode("utf-8")
        else:
            raise ValidationFailed(["adapt text mode needs 'text' or 'text_base64'"])
        try:
            language = LanguageCode(payload.get("language", ""))
            domain = DomainLabel(payload.get("domain", ""))
        except ValueError as exc:
            raise ValidationFailed([str(exc)]) from None
        start_serial = int(payload.get("start_serial", 1))
        normalized, report = adaptation.normalize_text(data)
        sentences = adaptation.segment_sentences(normalized, language)
        fragment = adaptation.assign_ids(sentences, domain, start_serial, language)
        from .formats import serialize_raw_file

        return {
            "raw_file": serialize_raw_file(fragment).decode("utf-8"),
            "sentence_count": len(fragment.sentences),
            "report": {
                "replacements": report.replacements,
                "controls_stripped": report.controls_stripped,
            },
        }

    def _adapt_annotated(self, payload: dict) -> dict:
        if "file" not in payload or "mapping" not in payload:
            raise ValidationFailed(["adapt annotated mode needs 'file' and 'mapping'"])
        mapping = adaptation.parse_tag_mapping(
            str(payload["mapping"]).encode("utf-8"), self.project.config.tagset
        )
        file = parse_annotated_file(str(payload["file"]).encode("utf-8"))
        converted = adaptation.map_foreign_tags(file, mapping)
        return {"file": serialize_annotated_file(converted).decode("utf-8")}

    def export(self, actor_id: str | None, fmt: str) -> bytes:
        with self._lock:
            self.project.authorize(actor_id, "export_project")
            if fmt not in ("native", "columnar"):
                raise ValidationFailed([f"unknown export format {fmt!r}"])
            return export_archive(self.project, fmt)


def create_app(core: ServiceCore) -> FastAPI:
    app = FastAPI(title="annodesk", docs_url=None, redoc_url=None)

    @app.exception_handler(DomainError)
    async def domain_error_handler(request: Request, exc: DomainError):
        return JSONResponse(status_code=status_for(exc), content={"error": exc.envelope()})

    def actor_of(request: Request) -> str:
        header = request.headers.get("authorization", "")
        token = header[7:] if header.lower().startswith("bearer ") else None
        return core.resolve(token)

    def optional_actor(request: Request) -> str | None:
        try:
            return actor_of(request)
        except NotAuthenticated:
            return None

    async def body_of(request: Request) -> dict:
        try:
            payload = await request.json()
        except Exception:
            raise ValidationFailed(["request body must be a JSON object"]) from None
        if not isinstance(payload, dict):
            raise ValidationFailed(["request body must be a JSON object"])
        return payload

    def need(payload: dict, *keys: str) -> list:
        missing = [k for k in keys if k not in payload]
        if missing:
            raise ValidationFailed([f"missing field(s): {', '.join(missing)}"])
        return [payload[k] for k in keys]

    # --- sessions -------------------------------------------------------------

    @app.post("/api/login")
    async def login(request: Request):
        payload = await body_of(request)
        user_id, credential = need(payload, "user_id", "credential")
        return core.mutate(lambda p: p.login(user_id, credential))

    @app.post("/api/logout")
    async def logout(request: Request):
        header = request.headers.get("authorization", "")
        token = header[7:] if header.lower().startswith("bearer ") else None
        return core.mutate(lambda p: p.logout(token or ""))

    # --- users ------------------------------------------------------------------

    @app.get("/api/users")
    async def list_users(request: Request):
        actor = actor_of(request)
        return {"users": core.query(lambda p: p.list_users(actor))}

    @app.post("/api/users")
    async def create_user(request: Request):
        actor = optional_actor(request)
        payload = await body_of(request)
        user_id, display_name, role_obj, credential = need(
            payload, "user_id", "display_name", "role", "credential"
        )
        try:
            role = Role.from_obj(role_obj)
        except (ValueError, KeyError, TypeError) as exc:
            raise ValidationFailed([f"bad role: {exc}"]) from None
        return core.mutate(
            lambda p: p.create_user(actor, user_id, display_name, role, credential)
        )

    @app.patch("/api/users/{user_id}")
    async def modify_user(user_id: str, request: Request):
        actor = actor_of(request)
        payload = await body_of(request)
        role = None
        if "role" in payload and payload["role"] is not None:
            try:
                role = Role.from_obj(payload["role"])
            except (ValueError, KeyError, TypeError) as exc:
                raise ValidationFailed([f"bad role: {exc}"]) from None
        return core.mutate(lambda p: p.modify_user(
            actor,
            user_id,
            display_name=payload.get("display_name"),
            credential=payload.get("credential"),
            role=role,
            active=payload.get("active"),
        ))

    @app.delete("/api/users/{user_id}")
    async def delete_user(user_id: str, request: Request):
        actor = actor_of(request)
        return core.mutate(lambda p: p.delete_user(actor, user_id))

    # --- files ------------------------------------------------------------------

    @app.post("/api/files")
    async def upload_file(request: Request):
        actor = actor_of(request)
        raw = await request.body()
        return core.mutate(lambda p: p.upload_file(actor, raw))

    @app.get("/api/files/{file_id}")
    async def view_file(file_id: str, request: Request):
        actor = actor_of(request)
        return core.query(lambda p: p.view_file(actor, file_id))

    @app.get("/api/files/{file_id}/download")
    async def download_file(file_id: str, request: Request):
        actor = actor_of(request)
        data = core.query(lambda p: p.download_file(actor, file_id))
        return Response(content=data, media_type="text/plain; charset=utf-8")

    # --- assignments --------------------------------------------------------------

    @app.post("/api/assignments")
    async def assign_file(request: Request):
        actor = actor_of(request)
        payload = await body_of(request)
        file_id, assignee = need(payload, "file_id", "assignee")
        return core.mutate(lambda p: p.assign_file(actor, file_id, assignee))

    def _assignment_file(project: Project, assignment_id: str, require_active: bool) -> str:
        assignment = project.assignments.get(assignment_id)
        if assignment is None:
            raise UnknownEntity(
                f"assignment {assignment_id!r} not found", entity=f"assignment:{assignment_id}"
            )
        if require_active and not assignment.active:
            from .errors import NoActiveAssignment

            raise NoActiveAssignment(
                f"assignment {assignment_id!r} is {assignment.state}",
                entity=f"assignment:{assignment_id}",
            )
        return assignment.file_id

    @app.post("/api/assignments/{assignment_id}/reassign")
    async def reassign(assignment_id: str, request: Request):
        actor = actor_of(request)
        payload = await body_of(request)
        (assignee,) = need(payload, "assignee")

        def run(project: Project) -> dict:
            file_id = _assignment_file(project, assignment_id, require_active=True)
            return project.reassign_file(actor, file_id, assignee)

        return core.mutate(run)

    @app.post("/api/assignments/{assignment_id}/complete")
    async def complete(assignment_id: str, request: Request):
        actor = actor_of(request)

        def run(project: Project) -> dict:
            file_id = _assignment_file(project, assignment_id, require_active=True)
            return project.mark_completed(actor, file_id)

        return core.mutate(run)

    # --- annotation ----------------------------------------------------------------

    @app.put("/api/files/{file_id}/sentences/{sid}/tokens/{index}/tag")
    async def tag_token(file_id: str, sid: str, index: int, request: Request):
        actor = actor_of(request)
        payload = await body_of(request)
        (tag,) = need(payload, "tag")
        return core.mutate(lambda p: p.tag_token(actor, file_id, sid, index, tag))

    @app.post("/api/files/{file_id}/sentences/{sid}/edit")
    async def edit_sentence(file_id: str, sid: str, request: Request):
        actor = actor_of(request)
        payload = await body_of(request)
        (text,) = need(payload, "text")
        return core.mutate(lambda p: p.edit_file_sentence(actor, file_id, sid, text))

    @app.post("/api/files/{file_id}/auto-tag")
    async def auto_tag(file_id: str, request: Request):
        actor = actor_of(request)
        return core.mutate(lambda p: p.auto_tag_file(actor, file_id))

    # --- lexicon ---------------------------------------------------------------------

    @app.get("/api/lexicon/{language}")
    async def lexicon_get(language: str, request: Request, since: int | None = None):
        actor = actor_of(request)
        return core.query(lambda p: p.lexicon_sync(actor, language, since))

    @app.put("/api/lexicon/{language}")
    async def lexicon_put(language: str, request: Request):
        actor = actor_of(request)
        payload = await body_of(request)
        (surface,) = need(payload, "surface")
        if payload.get("delete"):
            return core.mutate(lambda p: p.update_lexicon(actor, language, surface, None))
        (tag,) = need(payload, "tag")
        return core.mutate(lambda p: p.update_lexicon(actor, language, surface, tag))

    # --- monitoring ---------------------------------------------------------------------

    @app.get("/api/progress")
    async def progress(request: Request, scope: str = "project"):
        actor = actor_of(request)
        return core.query(lambda p: p.progress_report(actor, scope))

    @app.get("/api/notices")
    async def list_notices(request: Request):
        actor = actor_of(request)
        return {"notices": core.query(lambda p: p.list_notices(actor))}

    @app.post("/api/notices")
    async def post_notice(request: Request):
        actor = actor_of(request)
        payload = await body_of(request)
        audience, body = need(payload, "audience", "body")
        return core.mutate(lambda p: p.post_notice(actor, audience, body))

    @app.get("/api/iaa")
    async def iaa(request: Request, fileA: str = "", fileB: str = ""):
        actor = actor_of(request)
        if not fileA or not fileB:
            raise ValidationFailed(["query parameters fileA and fileB are required"])
        return core.query(lambda p: p.run_iaa(actor, fileA, fileB))

    # --- pipelines -----------------------------------------------------------------------

    @app.post("/api/adapt")
    async def adapt(request: Request):
        actor = actor_of(request)
        payload = await body_of(request)
        return core.adapt(actor, payload)

    @app.get("/api/translate/{file_id}")
    async def translate(file_id: str, request: Request, pair: str = ""):
        actor = actor_of(request)
        if not pair:
            raise ValidationFailed(["query parameter pair is required, e.g. pair=hin-eng"])
        return core.translate_file(actor, file_id, pair)

    @app.get("/api/export")
    async def export(request: Request, format: str = "native"):
        actor = actor_of(request)
        data = core.export(actor, format)
        return Response(content=data, media_type="application/zip")

    return app


def serve(config: ServiceConfig | None = None) -> None:
    """Boot the service with uvicorn; raises BindFailure on an unusable address."""
    import uvicorn

    config = config or ServiceConfig.from_env()
    core = ServiceCore.open(config)
    app = create_app(core)
    try:
        uvicorn.run(app, host=config.bind_host, port=config.bind_port, log_level="info")
    except OSError as exc:
        raise BindFailure(f"cannot bind {config.bind_host}:{config.bind_port}: {exc}") from exc
