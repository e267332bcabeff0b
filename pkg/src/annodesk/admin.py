"""Users, roles, sessions, uploads, the assignment state machine and monitoring.

``Project`` is an event-sourced aggregate: every command validates against
current state, then emits one event whose application is a deterministic,
total state transition. Replaying the journal reconstructs the aggregate
exactly, including all derived indexes. The ``on_event`` hook runs before the
state transition so a store can refuse (and the command fail cleanly) without
divergence; acknowledgment therefore always implies the event is durable.

Authorization is a single total matrix over (operation, role kind); the
qualified rules (``language``, ``assignee``) are resolved against the target
entity. Master admins hold a superset of every admin capability but, like
admins, do not annotate: tagging, editing and auto-tagging belong to the
file's active assignee alone.
"""

from __future__ import annotations

import hashlib
import hmac
import secrets
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Callable

from . import annotation
from .annotation import ClosedClassLexicon, completion_status
from .corpus import CorpusFile, LanguageCode, Tagset, corpus_stats, retag
from .errors import (
    AlreadyAssigned,
    BadCredential,
    CapExceeded,
    DomainError,
    DuplicateUser,
    InactiveAccount,
    IncompleteFile,
    LanguageMismatch,
    NoActiveAssignment,
    NotAuthenticated,
    NotAuthorized,
    UnknownEntity,
    UnknownLanguage,
    ValidationFailed,
)
from .formats import (
    file_from_obj,
    file_to_obj,
    parse_raw_file,
    sentence_from_obj,
    sentence_to_obj,
    serialize_annotated_file,
)

MASTER_ADMIN = "master_admin"
ADMIN = "admin"
ANNOTATOR = "annotator"
ROLE_KINDS = (MASTER_ADMIN, ADMIN, ANNOTATOR)

ASSIGNED = "assigned"
IN_PROGRESS = "in_progress"
COMPLETED = "completed"
REASSIGNED = "reassigned"
ACTIVE_STATES = (ASSIGNED, IN_PROGRESS)

# Total authorization matrix: operation -> {role kind -> rule}.
#   allow     unconditional for the role
#   deny      never for the role
#   language  only when the actor's role language equals the target language
#   assignee  only when the actor holds the file's active assignment
ALLOW, DENY, SAME_LANGUAGE, ACTIVE_ASSIGNEE = "allow", "deny", "language", "assignee"

AUTH_MATRIX: dict[str, dict[str, str]] = {
    "create_user":       {MASTER_ADMIN: ALLOW, ADMIN: DENY,          ANNOTATOR: DENY},
    "modify_user":       {MASTER_ADMIN: ALLOW, ADMIN: DENY,          ANNOTATOR: DENY},
    "delete_user":       {MASTER_ADMIN: ALLOW, ADMIN: DENY,          ANNOTATOR: DENY},
    "list_users":        {MASTER_ADMIN: ALLOW, ADMIN: ALLOW,         ANNOTATOR: DENY},
    "upload_file":       {MASTER_ADMIN: ALLOW, ADMIN: DENY,          ANNOTATOR: DENY},
    "view_file":         {MASTER_ADMIN: ALLOW, ADMIN: SAME_LANGUAGE, ANNOTATOR: SAME_LANGUAGE},
    "download_file":     {MASTER_ADMIN: ALLOW, ADMIN: SAME_LANGUAGE, ANNOTATOR: DENY},
    "assign_file":       {MASTER_ADMIN: ALLOW, ADMIN: SAME_LANGUAGE, ANNOTATOR: DENY},
    "reassign_file":     {MASTER_ADMIN: ALLOW, ADMIN: SAME_LANGUAGE, ANNOTATOR: DENY},
    "mark_completed":    {MASTER_ADMIN: ALLOW, ADMIN: SAME_LANGUAGE, ANNOTATOR: ACTIVE_ASSIGNEE},
    "tag_token":         {MASTER_ADMIN: DENY,  ADMIN: DENY,          ANNOTATOR: ACTIVE_ASSIGNEE},
    "edit_sentence":     {MASTER_ADMIN: DENY,  ADMIN: DENY,          ANNOTATOR: ACTIVE_ASSIGNEE},
    "auto_tag_file":     {MASTER_ADMIN: DENY,  ADMIN: DENY,          ANNOTATOR: ACTIVE_ASSIGNEE},
    "update_lexicon":    {MASTER_ADMIN: ALLOW, ADMIN: DENY,          ANNOTATOR: SAME_LANGUAGE},
    "read_lexicon":      {MASTER_ADMIN: ALLOW, ADMIN: SAME_LANGUAGE, ANNOTATOR: SAME_LANGUAGE},
    "progress_project":  {MASTER_ADMIN: ALLOW, ADMIN: ALLOW,         ANNOTATOR: ALLOW},
    "progress_language": {MASTER_ADMIN: ALLOW, ADMIN: ALLOW,         ANNOTATOR: ALLOW},
    "progress_user":     {MASTER_ADMIN: ALLOW, ADMIN: DENY,          ANNOTATOR: DENY},
    "post_notice":       {MASTER_ADMIN: ALLOW, ADMIN: DENY,          ANNOTATOR: DENY},
    "list_notices":      {MASTER_ADMIN: ALLOW, ADMIN: ALLOW,         ANNOTATOR: ALLOW},
    "run_iaa":           {MASTER_ADMIN: ALLOW, ADMIN: SAME_LANGUAGE, ANNOTATOR: DENY},
    "adapt":             {MASTER_ADMIN: ALLOW, ADMIN: DENY,          ANNOTATOR: DENY},
    "translate_file":    {MASTER_ADMIN: ALLOW, ADMIN: SAME_LANGUAGE, ANNOTATOR: SAME_LANGUAGE},
    "export_project":    {MASTER_ADMIN: ALLOW, ADMIN: DENY,          ANNOTATOR: DENY},
}


@dataclass(frozen=True)
class Role:
    kind: str
    language: LanguageCode | None = None

    def __post_init__(self):
        if self.kind not in ROLE_KINDS:
            raise ValueError(f"unknown role kind {self.kind!r}")
        if self.kind == MASTER_ADMIN:
            if self.language is not None:
                raise ValueError("master admin is not bound to a language")
        elif self.language is None:
            raise ValueError(f"{self.kind} must be bound to exactly one language")

    def to_obj(self) -> dict:
        return {"kind": self.kind, "language": str(self.language) if self.language else None}

    @classmethod
    def from_obj(cls, obj: dict) -> "Role":
        lang = obj.get("language")
        return cls(obj["kind"], LanguageCode(lang) if lang else None)


@dataclass(frozen=True)
class UserAccount:
    user_id: str
    display_name: str
    role: Role
    active: bool
    verifier: str


@dataclass
class SessionRecord:
    user_id: str
    token: str
    login_at: str
    logout_at: str | None = None


@dataclass
class FileAssignment:
    assignment_id: str
    file_id: str
    assignee: str
    state: str
    history: list[tuple[str, str, str]] = field(default_factory=list)  # (event, actor, at)

    @property
    def active(self) -> bool:
        return self.state in ACTIVE_STATES

    def to_obj(self) -> dict:
        return {
            "assignment_id": self.assignment_id,
            "file_id": self.file_id,
            "assignee": self.assignee,
            "state": self.state,
            "history": [list(h) for h in self.history],
        }


@dataclass(frozen=True)
class Notice:
    notice_id: str
    author: str
    audience: str  # "all" or a language code
    body: str
    posted_at: str

    def to_obj(self) -> dict:
        return {
            "notice_id": self.notice_id,
            "author": self.author,
            "audience": self.audience,
            "body": self.body,
            "posted_at": self.posted_at,
        }


@dataclass(frozen=True)
class ProjectConfig:
    languages: tuple[LanguageCode, ...]
    tagset: Tagset
    max_active_assignments: int = 3
    open_registration: bool = False

    def __post_init__(self):
        if self.max_active_assignments < 1:
            raise ValueError("max_active_assignments must be >= 1")
        if not self.languages:
            raise ValueError("project needs at least one language")

    def to_obj(self) -> dict:
        return {
            "languages": [str(l) for l in self.languages],
            "tagset": {"name": self.tagset.name, "labels": list(self.tagset.labels)},
            "max_active_assignments": self.max_active_assignments,
            "open_registration": self.open_registration,
        }

    @classmethod
    def from_obj(cls, obj: dict) -> "ProjectConfig":
        return cls(
            languages=tuple(LanguageCode(l) for l in obj["languages"]),
            tagset=Tagset(obj["tagset"]["name"], tuple(obj["tagset"]["labels"])),
            max_active_assignments=obj.get("max_active_assignments", 3),
            open_registration=obj.get("open_registration", False),
        )


def make_verifier(secret: str) -> str:
    salt = secrets.token_hex(8)
    digest = hashlib.sha256((salt + secret).encode("utf-8")).hexdigest()
    return f"{salt}${digest}"


def check_verifier(verifier: str, secret: str) -> bool:
    salt, _, digest = verifier.partition("$")
    candidate = hashlib.sha256((salt + secret).encode("utf-8")).hexdigest()
    return hmac.compare_digest(candidate, digest)


def utc_now() -> datetime:
    return datetime.now(timezone.utc)


def rfc3339(dt: datetime) -> str:
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).isoformat()


class Project:
    """The mutable project aggregate; all writes flow through emitted events."""

    def __init__(self, config: ProjectConfig, clock: Callable[[], datetime] | None = None):
        self.config = config
        self.clock = clock or utc_now
        self.on_event: Callable[[dict], None] | None = None

        self.users: dict[str, UserAccount] = {}
        self.sessions: list[SessionRecord] = []
        self.files: dict[str, CorpusFile] = {}
        self.file_meta: dict[str, dict] = {}
        self.assignments: dict[str, FileAssignment] = {}
        self.lexicons: dict[str, ClosedClassLexicon] = {}
        self.lexicon_log: dict[str, list[tuple[int, str, str | None]]] = {}
        self.notices: list[Notice] = []
        self.edits: list[dict] = []
        self.journal: list[dict] = []
        self.seq = 0

        self._counters = {"file": 0, "assignment": 0, "notice": 0}
        self._token_user: dict[str, str] = {}
        self._open_session: dict[str, int] = {}  # token -> index into sessions
        self._active_by_user: dict[str, set[str]] = {}
        self._active_by_file: dict[str, str] = {}
        self._assignments_by_file: dict[str, list[str]] = {}
        self._sentence_pos: dict[str, dict[str, int]] = {}

    # ------------------------------------------------------------------ events

    def _emit(self, action: str, entity: tuple[str, str], payload: dict, actor: str | None) -> dict:
        event = {
            "seq": self.seq + 1,
            "action": action,
            "entity": [entity[0], entity[1]],
            "payload": payload,
            "actor": actor,
            "at": rfc3339(self.clock()),
        }
        if self.on_event is not None:
            self.on_event(event)  # durable log before any state change
        self._apply_event(event)
        return event

    def _apply_event(self, event: dict) -> None:
        if event["seq"] != self.seq + 1:
            raise ValueError(f"event seq {event['seq']} breaks gapless order at {self.seq}")
        handler = getattr(self, "_apply_" + event["action"].replace(".", "_"))
        handler(event["payload"], event["actor"], event["at"])
        self.seq = event["seq"]
        self.journal.append(event)

    @classmethod
    def replay(
        cls,
        config: ProjectConfig,
        events: list[dict],
        clock: Callable[[], datetime] | None = None,
    ) -> "Project":
        project = cls(config, clock)
        for event in events:
            project._apply_event(event)
        return project

    # ----------------------------------------------------------- authorization

    def account(self, user_id: str | None) -> UserAccount:
        if user_id is None:
            raise NotAuthenticated("no authenticated user")
        account = self.users.get(user_id)
        if account is None or not account.active:
            raise NotAuthenticated(f"unknown or inactive account {user_id!r}")
        return account

    def resolve_token(self, token: str | None) -> UserAccount:
        if not token or token not in self._token_user:
            raise NotAuthenticated("missing or expired session token")
        return self.account(self._token_user[token])

    def authorize(
        self,
        actor_id: str | None,
        op: str,
        *,
        language: LanguageCode | None = None,
        file_id: str | None = None,
    ) -> UserAccount:
        account = self.account(actor_id)
        rule = AUTH_MATRIX[op][account.role.kind]
        if rule == ALLOW:
            return account
        if rule == DENY:
            raise NotAuthorized(f"{account.role.kind} may not {op}")
        if rule == SAME_LANGUAGE:
            if language is None or account.role.language != language:
                raise LanguageMismatch(
                    f"{account.role.kind} of {account.role.language} may not {op} for {language}"
                )
            return account
        # ACTIVE_ASSIGNEE
        assignment_id = self._active_by_file.get(file_id or "")
        if assignment_id is None or self.assignments[assignment_id].assignee != actor_id:
            raise NotAuthorized(f"only the active assignee may {op}", entity=f"file:{file_id}")
        return account

    # ------------------------------------------------------------------- users

    def create_user(
        self,
        actor_id: str | None,
        user_id: str,
        display_name: str,
        role: Role,
        credential: str,
    ) -> dict:
        if actor_id is None and self.config.open_registration:
            if role.kind != ANNOTATOR:
                raise NotAuthorized("open registration permits annotator accounts only")
        else:
            self.authorize(actor_id, "create_user")
        if user_id in self.users:
            raise DuplicateUser(f"user {user_id!r} already exists", entity=f"user:{user_id}")
        if not user_id or not display_name or not credential:
            raise ValidationFailed(["user_id, display_name and credential are required"])
        if role.language is not None and role.language not in self.config.languages:
            raise UnknownLanguage(f"language {role.language} not in project")
        self._emit(
            "user.created",
            ("user", user_id),
            {
                "user_id": user_id,
                "display_name": display_name,
                "role": role.to_obj(),
                "verifier": make_verifier(credential),
                "active": True,
            },
            actor_id,
        )
        return self.user_obj(self.users[user_id])

    def _apply_user_created(self, payload: dict, actor: str | None, at: str) -> None:
        self.users[payload["user_id"]] = UserAccount(
            user_id=payload["user_id"],
            display_name=payload["display_name"],
            role=Role.from_obj(payload["role"]),
            active=payload["active"],
            verifier=payload["verifier"],
        )

    def modify_user(
        self,
        actor_id: str | None,
        user_id: str,
        *,
        display_name: str | None = None,
        credential: str | None = None,
        role: Role | None = None,
        active: bool | None = None,
    ) -> dict:
        self.authorize(actor_id, "modify_user")
        if user_id not in self.users:
            raise UnknownEntity(f"user {user_id!r} not found", entity=f"user:{user_id}")
        if role is not None and role.language is not None and role.language not in self.config.languages:
            raise UnknownLanguage(f"language {role.language} not in project")
        changes: dict = {}
        if display_name is not None:
            changes["display_name"] = display_name
        if credential is not None:
            changes["verifier"] = make_verifier(credential)
        if role is not None:
            changes["role"] = role.to_obj()
        if active is not None:
            changes["active"] = active
        if not changes:
            raise ValidationFailed(["nothing to modify"])
        self._emit("user.modified", ("user", user_id), {"user_id": user_id, "changes": changes}, actor_id)
        return self.user_obj(self.users[user_id])

    def _apply_user_modified(self, payload: dict, actor: str | None, at: str) -> None:
        account = self.users[payload["user_id"]]
        changes = payload["changes"]
        self.users[payload["user_id"]] = UserAccount(
            user_id=account.user_id,
            display_name=changes.get("display_name", account.display_name),
            role=Role.from_obj(changes["role"]) if "role" in changes else account.role,
            active=changes.get("active", account.active),
            verifier=changes.get("verifier", account.verifier),
        )
        if not self.users[payload["user_id"]].active:
            self._close_user_sessions(payload["user_id"], at)

    def delete_user(self, actor_id: str | None, user_id: str) -> dict:
        """Deletion deactivates: session records and assignment history are retained."""
        self.authorize(actor_id, "delete_user")
        if user_id not in self.users:
            raise UnknownEntity(f"user {user_id!r} not found", entity=f"user:{user_id}")
        self._emit("user.deactivated", ("user", user_id), {"user_id": user_id}, actor_id)
        return self.user_obj(self.users[user_id])

    def _apply_user_deactivated(self, payload: dict, actor: str | None, at: str) -> None:
        account = self.users[payload["user_id"]]
        self.users[payload["user_id"]] = UserAccount(
            user_id=account.user_id,
            display_name=account.display_name,
            role=account.role,
            active=False,
            verifier=account.verifier,
        )
        self._close_user_sessions(payload["user_id"], at)

    def _close_user_sessions(self, user_id: str, at: str) -> None:
        for token, idx in list(self._open_session.items()):
            if self.sessions[idx].user_id == user_id:
                self.sessions[idx].logout_at = at
                del self._open_session[token]
                del self._token_user[token]

    def list_users(self, actor_id: str | None) -> list[dict]:
        account = self.authorize(actor_id, "list_users")
        users = sorted(self.users.values(), key=lambda u: u.user_id)
        if account.role.kind == ADMIN:
            users = [
                u for u in users
                if u.role.language == account.role.language or u.role.kind == MASTER_ADMIN
            ]
        return [self.user_obj(u) for u in users]

    @staticmethod
    def user_obj(account: UserAccount) -> dict:
        return {
            "user_id": account.user_id,
            "display_name": account.display_name,
            "role": account.role.to_obj(),
            "active": account.active,
        }

    # ---------------------------------------------------------------- sessions

    def login(self, user_id: str, credential: str) -> dict:
        account = self.users.get(user_id)
        if account is None or not check_verifier(account.verifier, credential):
            raise BadCredential("unknown user or wrong credential")
        if not account.active:
            raise InactiveAccount(f"account {user_id!r} is deactivated", entity=f"user:{user_id}")
        token = secrets.token_hex(16)
        self._emit("session.login", ("user", user_id), {"user_id": user_id, "token": token}, user_id)
        # clients need the tagset and languages to build their palette
        return {"token": token, "user": self.user_obj(account), "project": self.config.to_obj()}

    def _apply_session_login(self, payload: dict, actor: str | None, at: str) -> None:
        record = SessionRecord(user_id=payload["user_id"], token=payload["token"], login_at=at)
        self.sessions.append(record)
        self._token_user[payload["token"]] = payload["user_id"]
        self._open_session[payload["token"]] = len(self.sessions) - 1

    def logout(self, token: str) -> dict:
        account = self.resolve_token(token)
        self._emit("session.logout", ("user", account.user_id), {"token": token}, account.user_id)
        return {"ok": True}

    def _apply_session_logout(self, payload: dict, actor: str | None, at: str) -> None:
        idx = self._open_session.pop(payload["token"])
        self.sessions[idx].logout_at = at
        del self._token_user[payload["token"]]

    # ------------------------------------------------------------------- files

    def upload_file(self, actor_id: str | None, raw: bytes) -> dict:
        self.authorize(actor_id, "upload_file")
        try:
            file = parse_raw_file(raw)
        except DomainError as exc:
            raise ValidationFailed([f"{exc.code}: {exc.message}"]) from exc
        if file.language not in self.config.languages:
            raise ValidationFailed([f"language {file.language} not in project languages"])
        file_id = f"f{self._counters['file'] + 1:04d}"
        self._emit(
            "file.uploaded",
            ("file", file_id),
            {"file_id": file_id, "file": file_to_obj(file)},
            actor_id,
        )
        return self.file_obj(file_id)

    def _apply_file_uploaded(self, payload: dict, actor: str | None, at: str) -> None:
        file_id = payload["file_id"]
        file = file_from_obj(payload["file"])
        self.files[file_id] = file
        self.file_meta[file_id] = {"uploaded_by": actor, "uploaded_at": at}
        self._counters["file"] = max(self._counters["file"], int(file_id[1:]))
        self._sentence_pos[file_id] = file.sentence_index()
        self._assignments_by_file.setdefault(file_id, [])

    def _file(self, file_id: str) -> CorpusFile:
        file = self.files.get(file_id)
        if file is None:
            raise UnknownEntity(f"file {file_id!r} not found", entity=f"file:{file_id}")
        return file

    def file_obj(self, file_id: str, include_sentences: bool = False) -> dict:
        file = self._file(file_id)
        status = completion_status(file)
        stats = corpus_stats(file)
        assignment_id = self._active_by_file.get(file_id)
        obj = {
            "file_id": file_id,
            "language": str(file.language),
            "domain": str(file.domain),
            "uploaded_by": self.file_meta[file_id]["uploaded_by"],
            "uploaded_at": self.file_meta[file_id]["uploaded_at"],
            "completion": {
                "complete": status.complete,
                "total": status.total,
                "fraction": status.fraction,
            },
            "stats": {
                "sentence_count": stats.sentence_count,
                "token_count": stats.token_count,
                "mean_tokens_per_sentence": stats.mean_tokens_per_sentence,
            },
            "assignment": self.assignments[assignment_id].to_obj() if assignment_id else None,
        }
        if include_sentences:
            obj["sentences"] = [sentence_to_obj(s) for s in file.sentences]
        return obj

    def view_file(self, actor_id: str | None, file_id: str) -> dict:
        file = self._file(file_id)
        self.authorize(actor_id, "view_file", language=file.language)
        return self.file_obj(file_id, include_sentences=True)

    def download_file(self, actor_id: str | None, file_id: str) -> bytes:
        """Completion-gated export of one annotated file; annotators never download."""
        file = self._file(file_id)
        self.authorize(actor_id, "download_file", language=file.language)
        status = completion_status(file)
        if status.fraction < 1.0:
            raise IncompleteFile(status.total - status.complete, entity=f"file:{file_id}")
        return serialize_annotated_file(file)

    # -------------------------------------------------------------- assignment

    def _active_count(self, user_id: str) -> int:
        return len(self._active_by_user.get(user_id, ()))

    def _check_assignee(self, assignee: str, language: LanguageCode) -> None:
        account = self.users.get(assignee)
        if account is None:
            raise UnknownEntity(f"user {assignee!r} not found", entity=f"user:{assignee}")
        if not account.active:
            raise ValidationFailed([f"assignee {assignee!r} is deactivated"])
        if account.role.kind != ANNOTATOR:
            raise ValidationFailed([f"assignee {assignee!r} is not an annotator"])
        if account.role.language != language:
            raise LanguageMismatch(
                f"annotator {assignee!r} works on {account.role.language}, file is {language}"
            )
        if self._active_count(assignee) >= self.config.max_active_assignments:
            raise CapExceeded(
                f"{assignee!r} already holds {self._active_count(assignee)} active files "
                f"(cap {self.config.max_active_assignments})",
                entity=f"user:{assignee}",
            )

    def assign_file(self, actor_id: str | None, file_id: str, assignee: str) -> dict:
        file = self._file(file_id)
        self.authorize(actor_id, "assign_file", language=file.language)
        if file_id in self._active_by_file:
            raise AlreadyAssigned(
                f"file {file_id!r} already has an active assignment", entity=f"file:{file_id}"
            )
        self._check_assignee(assignee, file.language)
        assignment_id = f"a{self._counters['assignment'] + 1:04d}"
        self._emit(
            "assignment.created",
            ("assignment", assignment_id),
            {"assignment_id": assignment_id, "file_id": file_id, "assignee": assignee},
            actor_id,
        )
        return self.assignments[assignment_id].to_obj()

    def _apply_assignment_created(self, payload: dict, actor: str | None, at: str) -> None:
        assignment = FileAssignment(
            assignment_id=payload["assignment_id"],
            file_id=payload["file_id"],
            assignee=payload["assignee"],
            state=ASSIGNED,
            history=[("assigned", actor or "", at)],
        )
        self.assignments[assignment.assignment_id] = assignment
        self._counters["assignment"] = max(
            self._counters["assignment"], int(assignment.assignment_id[1:])
        )
        self._active_by_file[assignment.file_id] = assignment.assignment_id
        self._active_by_user.setdefault(assignment.assignee, set()).add(assignment.assignment_id)
        self._assignments_by_file.setdefault(assignment.file_id, []).append(assignment.assignment_id)

    def _active_assignment(self, file_id: str) -> FileAssignment:
        assignment_id = self._active_by_file.get(file_id)
        if assignment_id is None:
            raise NoActiveAssignment(f"file {file_id!r} has no active assignment", entity=f"file:{file_id}")
        return self.assignments[assignment_id]

    def reassign_file(self, actor_id: str | None, file_id: str, new_assignee: str) -> dict:
        """Move the active assignment; existing annotations on the file are retained."""
        file = self._file(file_id)
        self.authorize(actor_id, "reassign_file", language=file.language)
        old = self._active_assignment(file_id)
        if old.assignee == new_assignee:
            raise AlreadyAssigned(
                f"file {file_id!r} is already assigned to {new_assignee!r}", entity=f"file:{file_id}"
            )
        self._check_assignee(new_assignee, file.language)
        new_id = f"a{self._counters['assignment'] + 1:04d}"
        self._emit(
            "assignment.reassigned",
            ("assignment", old.assignment_id),
            {
                "old_assignment_id": old.assignment_id,
                "new_assignment_id": new_id,
                "file_id": file_id,
                "assignee": new_assignee,
            },
            actor_id,
        )
        return {"old": self.assignments[old.assignment_id].to_obj(), "new": self.assignments[new_id].to_obj()}

    def _apply_assignment_reassigned(self, payload: dict, actor: str | None, at: str) -> None:
        old = self.assignments[payload["old_assignment_id"]]
        old.state = REASSIGNED
        old.history.append(("reassigned", actor or "", at))
        self._active_by_user[old.assignee].discard(old.assignment_id)
        del self._active_by_file[old.file_id]
        self._apply_assignment_created(
            {
                "assignment_id": payload["new_assignment_id"],
                "file_id": payload["file_id"],
                "assignee": payload["assignee"],
            },
            actor,
            at,
        )

    def mark_completed(self, actor_id: str | None, file_id: str) -> dict:
        file = self._file(file_id)
        self.authorize(actor_id, "mark_completed", language=file.language, file_id=file_id)
        assignment = self._active_assignment(file_id)
        status = completion_status(file)
        if status.fraction < 1.0:
            raise IncompleteFile(status.total - status.complete, entity=f"file:{file_id}")
        self._emit(
            "assignment.completed",
            ("assignment", assignment.assignment_id),
            {"assignment_id": assignment.assignment_id},
            actor_id,
        )
        return self.assignments[assignment.assignment_id].to_obj()

    def _apply_assignment_completed(self, payload: dict, actor: str | None, at: str) -> None:
        assignment = self.assignments[payload["assignment_id"]]
        assignment.state = COMPLETED
        assignment.history.append(("completed", actor or "", at))
        self._active_by_user[assignment.assignee].discard(assignment.assignment_id)
        del self._active_by_file[assignment.file_id]

    def _start_if_assigned(self, file_id: str, actor: str | None, at: str) -> None:
        assignment_id = self._active_by_file.get(file_id)
        if assignment_id is not None:
            assignment = self.assignments[assignment_id]
            if assignment.state == ASSIGNED:
                assignment.state = IN_PROGRESS
                assignment.history.append(("started", actor or "", at))

    # -------------------------------------------------------------- annotation

    def _sentence_at(self, file_id: str, sid: str) -> int:
        pos = self._sentence_pos.get(file_id, {}).get(sid)
        if pos is None:
            raise UnknownEntity(f"sentence {sid!r} not in file {file_id!r}", entity=f"sentence:{sid}")
        return pos

    def tag_token(self, actor_id: str | None, file_id: str, sid: str, index: int, tag: str) -> dict:
        file = self._file(file_id)
        self.authorize(actor_id, "tag_token", file_id=file_id)
        pos = self._sentence_at(file_id, sid)
        annotation.assign_tag(file.sentences[pos], index, tag, self.config.tagset)
        self._emit(
            "token.tagged",
            ("file", file_id),
            {"file_id": file_id, "sid": sid, "index": index, "tag": tag},
            actor_id,
        )
        return sentence_to_obj(self.files[file_id].sentences[pos])

    def _apply_token_tagged(self, payload: dict, actor: str | None, at: str) -> None:
        file_id = payload["file_id"]
        file = self.files[file_id]
        pos = self._sentence_pos[file_id][payload["sid"]]
        sentences = list(file.sentences)
        sentences[pos] = retag(sentences[pos], payload["index"], payload["tag"])
        self.files[file_id] = CorpusFile(
            language=file.language, domain=file.domain, sentences=tuple(sentences)
        )
        self._start_if_assigned(file_id, actor, at)

    def edit_file_sentence(self, actor_id: str | None, file_id: str, sid: str, new_text: str) -> dict:
        file = self._file(file_id)
        self.authorize(actor_id, "edit_sentence", file_id=file_id)
        pos = self._sentence_at(file_id, sid)
        edited, record = annotation.edit_sentence(
            file.sentences[pos], new_text, actor_id or "", self.clock()
        )
        self._emit(
            "sentence.edited",
            ("file", file_id),
            {
                "file_id": file_id,
                "sid": sid,
                "tokens": list(edited.surfaces),
                "tags": list(edited.tags),
                "old_text": record.old_text,
                "new_text": record.new_text,
            },
            actor_id,
        )
        return {
            "sentence": sentence_to_obj(self.files[file_id].sentences[pos]),
            "edit": self.edits[-1],
        }

    def _apply_sentence_edited(self, payload: dict, actor: str | None, at: str) -> None:
        file_id = payload["file_id"]
        file = self.files[file_id]
        pos = self._sentence_pos[file_id][payload["sid"]]
        sentences = list(file.sentences)
        sentences[pos] = sentence_from_obj(
            {"id": payload["sid"], "tokens": payload["tokens"], "tags": payload["tags"]}
        )
        self.files[file_id] = CorpusFile(
            language=file.language, domain=file.domain, sentences=tuple(sentences)
        )
        self.edits.append({
            "id": payload["sid"],
            "old_text": payload["old_text"],
            "new_text": payload["new_text"],
            "editor": actor,
            "at": at,
        })
        self._start_if_assigned(file_id, actor, at)

    def auto_tag_file(self, actor_id: str | None, file_id: str) -> dict:
        file = self._file(file_id)
        self.authorize(actor_id, "auto_tag_file", file_id=file_id)
        lexicon = self.lexicons.get(str(file.language))
        applied: list[list] = []
        if lexicon is not None:
            tagged, _count = annotation.auto_tag_file(file, lexicon)
            for old_s, new_s in zip(file.sentences, tagged.sentences):
                for i, (old_tag, new_tag) in enumerate(zip(old_s.tags, new_s.tags)):
                    if old_tag is None and new_tag is not None:
                        applied.append([str(old_s.id), i, new_tag])
        self._emit(
            "file.autotagged",
            ("file", file_id),
            {"file_id": file_id, "applied": applied},
            actor_id,
        )
        return {
            "count": len(applied),
            "applied": [{"sid": sid, "index": i, "tag": tag} for sid, i, tag in applied],
        }

    def _apply_file_autotagged(self, payload: dict, actor: str | None, at: str) -> None:
        file_id = payload["file_id"]
        file = self.files[file_id]
        sentences = list(file.sentences)
        for sid, index, tag in payload["applied"]:
            pos = self._sentence_pos[file_id][sid]
            sentences[pos] = retag(sentences[pos], index, tag)
        self.files[file_id] = CorpusFile(
            language=file.language, domain=file.domain, sentences=tuple(sentences)
        )
        self._start_if_assigned(file_id, actor, at)

    # ----------------------------------------------------------------- lexicon

    def _check_language(self, language: str) -> LanguageCode:
        try:
            lang = LanguageCode(language)
        except ValueError:
            raise UnknownLanguage(f"invalid language code {language!r}") from None
        if lang not in self.config.languages:
            raise UnknownLanguage(f"language {language!r} not in project")
        return lang

    def _lexicon_for(self, language: str) -> ClosedClassLexicon:
        lang = self._check_language(language)
        return self.lexicons.get(language) or ClosedClassLexicon(lang, {}, 0)

    def update_lexicon(self, actor_id: str | None, language: str, surface: str, tag: str | None) -> dict:
        self.authorize(actor_id, "update_lexicon", language=language)
        lexicon = self._lexicon_for(language)
        try:
            if tag is None:
                annotation.remove_lexicon_entry(lexicon, surface)
            else:
                annotation.update_lexicon(lexicon, surface, tag, self.config.tagset)
        except ValueError as exc:
            raise ValidationFailed([str(exc)]) from None
        # The event carries the NFC surface so replay needs no re-normalization.
        self._emit(
            "lexicon.updated",
            ("lexicon", language),
            {"language": language, "surface": unicodedata.normalize("NFC", surface), "tag": tag},
            actor_id,
        )
        return {"language": language, "version": self.lexicons[language].version}

    def _apply_lexicon_updated(self, payload: dict, actor: str | None, at: str) -> None:
        language = payload["language"]
        lexicon = self.lexicons.get(language) or ClosedClassLexicon(LanguageCode(language), {}, 0)
        entries = dict(lexicon.entries)
        if payload["tag"] is None:
            entries.pop(payload["surface"], None)
        else:
            entries[payload["surface"]] = payload["tag"]
        updated = ClosedClassLexicon(lexicon.language, entries, lexicon.version + 1)
        self.lexicons[language] = updated
        self.lexicon_log.setdefault(language, []).append(
            (updated.version, payload["surface"], payload["tag"])
        )

    def lexicon_sync(self, actor_id: str | None, language: str, since: int | None = None) -> dict:
        self.authorize(actor_id, "read_lexicon", language=language)
        lexicon = self._lexicon_for(language)
        if since is None:
            return {
                "language": language,
                "version": lexicon.version,
                "entries": dict(sorted(lexicon.entries.items())),
            }
        delta = [
            {"surface": surface, "tag": tag, "version": version}
            for version, surface, tag in self.lexicon_log.get(language, [])
            if version > since
        ]
        return {"language": language, "version": lexicon.version, "delta": delta}

    # ----------------------------------------------------------------- notices

    def post_notice(self, actor_id: str | None, audience: str, body: str) -> dict:
        self.authorize(actor_id, "post_notice")
        if audience != "all":
            self._check_language(audience)
        if not body.strip():
            raise ValidationFailed(["notice body must be non-empty"])
        notice_id = f"n{self._counters['notice'] + 1:04d}"
        self._emit(
            "notice.posted",
            ("notice", notice_id),
            {"notice_id": notice_id, "audience": audience, "body": body},
            actor_id,
        )
        return self.notices[-1].to_obj()

    def _apply_notice_posted(self, payload: dict, actor: str | None, at: str) -> None:
        notice = Notice(
            notice_id=payload["notice_id"],
            author=actor or "",
            audience=payload["audience"],
            body=payload["body"],
            posted_at=at,
        )
        self.notices.append(notice)
        self._counters["notice"] = max(self._counters["notice"], int(notice.notice_id[1:]))

    def list_notices(self, actor_id: str | None) -> list[dict]:
        account = self.authorize(actor_id, "list_notices")
        visible = []
        for notice in reversed(self.notices):  # reverse-chronological
            if (
                account.role.kind == MASTER_ADMIN
                or notice.audience == "all"
                or notice.audience == account.role.language
            ):
                visible.append(notice.to_obj())
        return visible

    # ---------------------------------------------------------------- progress

    def progress_report(self, actor_id: str | None, scope: str) -> dict:
        if scope not in ("project", "language", "user"):
            raise ValidationFailed([f"unknown scope {scope!r}"])
        self.authorize(actor_id, f"progress_{scope}")
        if scope == "project":
            units = [self._progress_unit("project", list(self.files))]
        elif scope == "language":
            units = [
                self._progress_unit(
                    str(lang),
                    [fid for fid, f in self.files.items() if f.language == lang],
                )
                for lang in self.config.languages
            ]
        else:
            units = [self._user_unit(u) for u in sorted(self.users.values(), key=lambda u: u.user_id)]
        return {"scope": scope, "units": units}

    def _progress_unit(self, key: str, file_ids: list[str]) -> dict:
        file_ids = sorted(file_ids)
        completed_by: Counter = Counter()
        files_completed = 0
        sentences_total = 0
        sentences_complete = 0
        rows = []
        for file_id in file_ids:
            file = self.files[file_id]
            status = completion_status(file)
            sentences_total += status.total
            sentences_complete += status.complete
            has_completed = any(
                self.assignments[aid].state == COMPLETED
                for aid in self._assignments_by_file.get(file_id, [])
            )
            if has_completed:
                files_completed += 1
            active_id = self._active_by_file.get(file_id)
            active = self.assignments[active_id] if active_id else None
            rows.append({
                "file_id": file_id,
                "language": str(file.language),
                "domain": str(file.domain),
                "sentences": status.total,
                "complete_sentences": status.complete,
                "fraction": status.fraction,
                "assignee": active.assignee if active else None,
                "state": active.state if active else (COMPLETED if has_completed else None),
            })
        for assignment in self.assignments.values():
            if assignment.state == COMPLETED and assignment.file_id in set(file_ids):
                completed_by[assignment.assignee] += 1
        return {
            "key": key,
            "files": {
                "total": len(file_ids),
                "assigned": sum(1 for fid in file_ids if fid in self._active_by_file),
                "completed": files_completed,
            },
            "sentences": {"total": sentences_total, "complete": sentences_complete},
            "completed_by_annotator": dict(sorted(completed_by.items())),
            "file_rows": rows,
        }

    def _user_unit(self, account: UserAccount) -> dict:
        active = sorted(self._active_by_user.get(account.user_id, ()))
        completed = sum(
            1 for a in self.assignments.values()
            if a.assignee == account.user_id and a.state == COMPLETED
        )
        return {
            "key": account.user_id,
            "display_name": account.display_name,
            "role": account.role.to_obj(),
            "active": account.active,
            "active_assignments": [self.assignments[aid].to_obj() for aid in active],
            "completed_count": completed,
            "sessions": [
                {"login_at": s.login_at, "logout_at": s.logout_at}
                for s in self.sessions
                if s.user_id == account.user_id
            ],
        }

    # --------------------------------------------------------------------- iaa

    def latest_assignee(self, file_id: str) -> str:
        history = self._assignments_by_file.get(file_id, [])
        if not history:
            return f"unassigned:{file_id}"
        return self.assignments[history[-1]].assignee

    def run_iaa(self, actor_id: str | None, file_a: str, file_b: str) -> dict:
        from . import agreement

        fa, fb = self._file(file_a), self._file(file_b)
        if fa.language != fb.language:
            raise LanguageMismatch(f"files are in different languages: {fa.language} vs {fb.language}")
        self.authorize(actor_id, "run_iaa", language=fa.language)
        pair_id = f"{file_a}|{file_b}"
        version_a = agreement.AnnotationVersion(pair_id, self.latest_assignee(file_a), fa)
        version_b = agreement.AnnotationVersion(pair_id, self.latest_assignee(file_b), fb)
        disagreements = agreement.diff_annotations(version_a, version_b)
        kappa = agreement.cohen_kappa(version_a, version_b)
        report = agreement.format_agreement_report(
            [(pair_id, version_a.annotator, version_b.annotator, kappa)]
        )
        return {
            "file_a": file_a,
            "file_b": file_b,
            "annotator_a": version_a.annotator,
            "annotator_b": version_b.annotator,
            "joint_positions": kappa.joint_positions,
            "p_o": kappa.p_o,
            "p_e": kappa.p_e,
            "kappa": kappa.kappa,
            "disagreements": len(disagreements),
            "report": report,
        }

    # ---------------------------------------------------------------- snapshot

    def to_snapshot(self) -> dict:
        return {
            "seq": self.seq,
            "config": self.config.to_obj(),
            "counters": dict(self._counters),
            "users": {
                uid: {
                    "display_name": u.display_name,
                    "role": u.role.to_obj(),
                    "active": u.active,
                    "verifier": u.verifier,
                }
                for uid, u in sorted(self.users.items())
            },
            "sessions": [
                {
                    "user_id": s.user_id,
                    "token": s.token,
                    "login_at": s.login_at,
                    "logout_at": s.logout_at,
                }
                for s in self.sessions
            ],
            "files": {fid: file_to_obj(f) for fid, f in sorted(self.files.items())},
            "file_meta": {fid: dict(meta) for fid, meta in sorted(self.file_meta.items())},
            "assignments": {aid: a.to_obj() for aid, a in sorted(self.assignments.items())},
            "assignment_order": {
                fid: list(aids) for fid, aids in sorted(self._assignments_by_file.items())
            },
            "lexicons": {
                lang: {"entries": dict(sorted(lex.entries.items())), "version": lex.version}
                for lang, lex in sorted(self.lexicons.items())
            },
            "lexicon_log": {
                lang: [list(entry) for entry in log]
                for lang, log in sorted(self.lexicon_log.items())
            },
            "notices": [n.to_obj() for n in self.notices],
            "edits": [dict(e) for e in self.edits],
        }

    @classmethod
    def from_snapshot(
        cls, snapshot: dict, clock: Callable[[], datetime] | None = None
    ) -> "Project":
        project = cls(ProjectConfig.from_obj(snapshot["config"]), clock)
        project.seq = snapshot["seq"]
        project._counters.update(snapshot["counters"])
        for uid, u in snapshot["users"].items():
            project.users[uid] = UserAccount(
                user_id=uid,
                display_name=u["display_name"],
                role=Role.from_obj(u["role"]),
                active=u["active"],
                verifier=u["verifier"],
            )
        for s in snapshot["sessions"]:
            record = SessionRecord(
                user_id=s["user_id"], token=s["token"],
                login_at=s["login_at"], logout_at=s["logout_at"],
            )
            project.sessions.append(record)
            if record.logout_at is None and project.users[record.user_id].active:
                project._token_user[record.token] = record.user_id
                project._open_session[record.token] = len(project.sessions) - 1
        for fid, obj in snapshot["files"].items():
            project.files[fid] = file_from_obj(obj)
            project._sentence_pos[fid] = project.files[fid].sentence_index()
        project.file_meta = {fid: dict(m) for fid, m in snapshot["file_meta"].items()}
        for aid, obj in snapshot["assignments"].items():
            assignment = FileAssignment(
                assignment_id=aid,
                file_id=obj["file_id"],
                assignee=obj["assignee"],
                state=obj["state"],
                history=[tuple(h) for h in obj["history"]],
            )
            project.assignments[aid] = assignment
            if assignment.active:
                project._active_by_file[assignment.file_id] = aid
                project._active_by_user.setdefault(assignment.assignee, set()).add(aid)
        project._assignments_by_file = {
            fid: list(aids) for fid, aids in snapshot["assignment_order"].items()
        }
        for fid in project.files:
            project._assignments_by_file.setdefault(fid, [])
        for lang, obj in snapshot["lexicons"].items():
            project.lexicons[lang] = ClosedClassLexicon(
                LanguageCode(lang), dict(obj["entries"]), obj["version"]
            )
        project.lexicon_log = {
            lang: [tuple(e) for e in log] for lang, log in snapshot["lexicon_log"].items()
        }
        for n in snapshot["notices"]:
            project.notices.append(Notice(
                notice_id=n["notice_id"], author=n["author"], audience=n["audience"],
                body=n["body"], posted_at=n["posted_at"],
            ))
            project._counters["notice"] = max(
                project._counters["notice"], int(n["notice_id"][1:])
            )
        project.edits = [dict(e) for e in snapshot["edits"]]
        return project
