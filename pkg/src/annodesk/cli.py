"""Operator command line: uploads, downloads, exports, users, assignments,
progress, statistics, agreement reports, adaptation and lexicon management.

The CLI authenticates as a configured user and travels through exactly the
same authorization matrix as the HTTP API; there is no back door. With
``--server`` it drives a running service; with ``--store`` it opens the store
locally and drives the identical service core in-process.

Exit codes: 0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import base64
import getpass
import json
import os
import sys
from pathlib import Path

import httpx

from .errors import DomainError, ValidationFailed
from .service import ServiceConfig, ServiceCore

CREDENTIAL_ENV = "ANNODESK_CREDENTIAL"


class RemoteError(DomainError):
    """A domain error reported by the server, re-raised client-side."""

    def __init__(self, code: str, message: str, entity: str | None, details: dict):
        super().__init__(message, entity=entity, **details)
        self._code = code

    @property
    def code(self) -> str:
        return self._code


class HttpClient:
    def __init__(self, base_url: str, http: httpx.Client | None = None):
        self.http = http or httpx.Client(base_url=base_url, timeout=30.0)
        self.token: str | None = None

    def _headers(self) -> dict:
        return {"Authorization": f"Bearer {self.token}"} if self.token else {}

    def _unwrap(self, response: httpx.Response):
        if response.status_code >= 400:
            try:
                envelope = response.json()["error"]
            except Exception:
                raise RemoteError("HttpError", response.text, None, {}) from None
            raise RemoteError(
                envelope.get("code", "HttpError"),
                envelope.get("message", ""),
                envelope.get("entity"),
                envelope.get("details") or {},
            )
        content_type = response.headers.get("content-type", "")
        if content_type.startswith("application/json"):
            return response.json()
        return response.content

    def _call(self, method: str, path: str, **kwargs):
        return self._unwrap(self.http.request(method, path, headers=self._headers(), **kwargs))

    def login(self, user_id: str, credential: str) -> None:
        result = self._call("POST", "/api/login", json={"user_id": user_id, "credential": credential})
        self.token = result["token"]

    def upload(self, raw: bytes) -> dict:
        return self._call("POST", "/api/files", content=raw)

    def file_info(self, file_id: str) -> dict:
        return self._call("GET", f"/api/files/{file_id}")

    def download(self, file_id: str) -> bytes:
        return self._call("GET", f"/api/files/{file_id}/download")

    def export(self, fmt: str) -> bytes:
        return self._call("GET", "/api/export", params={"format": fmt})

    def users_list(self) -> list[dict]:
        return self._call("GET", "/api/users")["users"]

    def users_create(self, user_id: str, display_name: str, role: dict, credential: str) -> dict:
        return self._call("POST", "/api/users", json={
            "user_id": user_id, "display_name": display_name,
            "role": role, "credential": credential,
        })

    def users_modify(self, user_id: str, changes: dict) -> dict:
        return self._call("PATCH", f"/api/users/{user_id}", json=changes)

    def users_delete(self, user_id: str) -> dict:
        return self._call("DELETE", f"/api/users/{user_id}")

    def assign(self, file_id: str, assignee: str) -> dict:
        return self._call("POST", "/api/assignments", json={"file_id": file_id, "assignee": assignee})

    def _active_assignment_id(self, file_id: str) -> str:
        info = self.file_info(file_id)
        assignment = info.get("assignment")
        if not assignment:
            raise RemoteError("NoActiveAssignment", f"file {file_id!r} has no active assignment", None, {})
        return assignment["assignment_id"]

    def reassign(self, file_id: str, assignee: str) -> dict:
        assignment_id = self._active_assignment_id(file_id)
        return self._call(
            "POST", f"/api/assignments/{assignment_id}/reassign", json={"assignee": assignee}
        )

    def complete(self, file_id: str) -> dict:
        assignment_id = self._active_assignment_id(file_id)
        return self._call("POST", f"/api/assignments/{assignment_id}/complete")

    def progress(self, scope: str) -> dict:
        return self._call("GET", "/api/progress", params={"scope": scope})

    def iaa(self, file_a: str, file_b: str) -> dict:
        return self._call("GET", "/api/iaa", params={"fileA": file_a, "fileB": file_b})

    def adapt(self, payload: dict) -> dict:
        return self._call("POST", "/api/adapt", json=payload)

    def lexicon_get(self, language: str, since: int | None) -> dict:
        params = {"since": since} if since is not None else {}
        return self._call("GET", f"/api/lexicon/{language}", params=params)

    def lexicon_set(self, language: str, surface: str, tag: str) -> dict:
        return self._call("PUT", f"/api/lexicon/{language}", json={"surface": surface, "tag": tag})

    def lexicon_delete(self, language: str, surface: str) -> dict:
        return self._call("PUT", f"/api/lexicon/{language}", json={"surface": surface, "delete": True})


class LocalClient:
    """Drives the same service core as the HTTP app, against a local store."""

    def __init__(self, store_path: str):
        config = ServiceConfig.from_env()
        config.store_path = store_path
        self.core = ServiceCore.open(config)
        self.actor: str | None = None

    def login(self, user_id: str, credential: str) -> None:
        self.core.mutate(lambda p: p.login(user_id, credential))
        self.actor = user_id

    def upload(self, raw: bytes) -> dict:
        return self.core.mutate(lambda p: p.upload_file(self.actor, raw))

    def file_info(self, file_id: str) -> dict:
        return self.core.query(lambda p: p.view_file(self.actor, file_id))

    def download(self, file_id: str) -> bytes:
        return self.core.query(lambda p: p.download_file(self.actor, file_id))

    def export(self, fmt: str) -> bytes:
        return self.core.export(self.actor, fmt)

    def users_list(self) -> list[dict]:
        return self.core.query(lambda p: p.list_users(self.actor))

    def users_create(self, user_id: str, display_name: str, role: dict, credential: str) -> dict:
        from .admin import Role

        return self.core.mutate(
            lambda p: p.create_user(self.actor, user_id, display_name, Role.from_obj(role), credential)
        )

    def users_modify(self, user_id: str, changes: dict) -> dict:
        from .admin import Role

        role = Role.from_obj(changes["role"]) if changes.get("role") else None
        return self.core.mutate(lambda p: p.modify_user(
            self.actor, user_id,
            display_name=changes.get("display_name"),
            credential=changes.get("credential"),
            role=role,
            active=changes.get("active"),
        ))

    def users_delete(self, user_id: str) -> dict:
        return self.core.mutate(lambda p: p.delete_user(self.actor, user_id))

    def assign(self, file_id: str, assignee: str) -> dict:
        return self.core.mutate(lambda p: p.assign_file(self.actor, file_id, assignee))

    def reassign(self, file_id: str, assignee: str) -> dict:
        return self.core.mutate(lambda p: p.reassign_file(self.actor, file_id, assignee))

    def complete(self, file_id: str) -> dict:
        return self.core.mutate(lambda p: p.mark_completed(self.actor, file_id))

    def progress(self, scope: str) -> dict:
        return self.core.query(lambda p: p.progress_report(self.actor, scope))

    def iaa(self, file_a: str, file_b: str) -> dict:
        return self.core.query(lambda p: p.run_iaa(self.actor, file_a, file_b))

    def adapt(self, payload: dict) -> dict:
        return self.core.adapt(self.actor, payload)

    def lexicon_get(self, language: str, since: int | None) -> dict:
        return self.core.query(lambda p: p.lexicon_sync(self.actor, language, since))

    def lexicon_set(self, language: str, surface: str, tag: str) -> dict:
        return self.core.mutate(lambda p: p.update_lexicon(self.actor, language, surface, tag))

    def lexicon_delete(self, language: str, surface: str) -> dict:
        return self.core.mutate(lambda p: p.update_lexicon(self.actor, language, surface, None))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="annodesk",
        description="Operate an annotation project against a server or a local store.",
    )
    target = parser.add_mutually_exclusive_group(required=True)
    target.add_argument("--server", help="base URL of a running service")
    target.add_argument("--store", help="path of a local project store")
    parser.add_argument("--as", dest="as_user", required=True, help="act as this user id")
    parser.add_argument(
        "--format", choices=("human", "tsv"), default="human", help="output format"
    )

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("upload", help="upload a raw corpus file")
    p.add_argument("--file", required=True, help="path of the raw file")

    p = sub.add_parser("download", help="download a fully annotated file")
    p.add_argument("--file", required=True, help="file id")
    p.add_argument("-o", "--out", help="write to this path instead of stdout")

    p = sub.add_parser("export", help="export the whole project as an archive")
    p.add_argument("archive_format", choices=("native", "columnar"))
    p.add_argument("-o", "--out", required=True, help="archive output path")

    p = sub.add_parser("users", help="manage user accounts")
    usub = p.add_subparsers(dest="users_command", required=True)
    usub.add_parser("list")
    c = usub.add_parser("create")
    c.add_argument("--id", required=True)
    c.add_argument("--name", required=True)
    c.add_argument("--role", required=True, help="master_admin, admin:<lang> or annotator:<lang>")
    c.add_argument("--credential", help="defaults to $" + CREDENTIAL_ENV + " or prompt")
    m = usub.add_parser("modify")
    m.add_argument("--id", required=True)
    m.add_argument("--name")
    m.add_argument("--role")
    m.add_argument("--credential")
    m.add_argument("--active", choices=("true", "false"))
    d = usub.add_parser("delete")
    d.add_argument("--id", required=True)

    p = sub.add_parser("assign", help="manage file assignments")
    asub = p.add_subparsers(dest="assign_command", required=True)
    c = asub.add_parser("create")
    c.add_argument("--file", required=True)
    c.add_argument("--to", required=True)
    r = asub.add_parser("reassign")
    r.add_argument("--file", required=True)
    r.add_argument("--to", required=True)
    f = asub.add_parser("complete")
    f.add_argument("--file", required=True)

    p = sub.add_parser("progress", help="progress report")
    p.add_argument("--scope", choices=("project", "language", "user"), default="project")

    p = sub.add_parser("stats", help="sentence/token statistics of one file")
    p.add_argument("--file", required=True)

    p = sub.add_parser("iaa", help="inter-annotator agreement between two files")
    p.add_argument("--file-a", required=True)
    p.add_argument("--file-b", required=True)

    p = sub.add_parser("adapt", help="normalize/segment/convert external data")
    p.add_argument("--in", dest="infile", help="raw text input path (text mode)")
    p.add_argument("--language")
    p.add_argument("--domain")
    p.add_argument("--start", type=int, default=1)
    p.add_argument("--annotated", help="foreign annotated file path (annotated mode)")
    p.add_argument("--mapping", help="tag mapping file path (annotated mode)")
    p.add_argument("-o", "--out", help="write result to this path instead of stdout")

    p = sub.add_parser("lexicon", help="read or edit a closed-class lexicon")
    lsub = p.add_subparsers(dest="lexicon_command", required=True)
    g = lsub.add_parser("get")
    g.add_argument("--language", required=True)
    g.add_argument("--since", type=int)
    s = lsub.add_parser("set")
    s.add_argument("--language", required=True)
    s.add_argument("--surface", required=True)
    s.add_argument("--tag", required=True)
    x = lsub.add_parser("delete")
    x.add_argument("--language", required=True)
    x.add_argument("--surface", required=True)

    return parser


def _credential(args_credential: str | None = None) -> str:
    if args_credential:
        return args_credential
    if CREDENTIAL_ENV in os.environ:
        return os.environ[CREDENTIAL_ENV]
    return getpass.getpass("credential: ")


def _parse_role(text: str) -> dict:
    kind, _, language = text.partition(":")
    return {"kind": kind, "language": language or None}


def _emit(out, args, rows: list[list], human: list[str]):
    if args.format == "tsv":
        for row in rows:
            print("\t".join(str(cell) for cell in row), file=out)
    else:
        for line in human:
            print(line, file=out)


def run(args: argparse.Namespace, out, err) -> int:
    client = HttpClient(args.server) if args.server else LocalClient(args.store)
    client.login(args.as_user, _credential())

    if args.command == "upload":
        result = client.upload(Path(args.file).read_bytes())
        _emit(out, args, [[result["file_id"]]], [f"uploaded: {result['file_id']}"])

    elif args.command == "download":
        data = client.download(args.file)
        if args.out:
            Path(args.out).write_bytes(data)
            _emit(out, args, [[args.file, args.out]], [f"wrote {args.out}"])
        else:
            out.write(data.decode("utf-8"))

    elif args.command == "export":
        data = client.export(args.archive_format)
        Path(args.out).write_bytes(data)
        _emit(out, args, [[args.archive_format, args.out, len(data)]],
              [f"exported {args.archive_format} archive to {args.out} ({len(data)} bytes)"])

    elif args.command == "users":
        result = _run_users(client, args)
        if args.users_command == "list":
            rows = [
                [u["user_id"], u["role"]["kind"], u["role"]["language"] or "-",
                 "active" if u["active"] else "inactive", u["display_name"]]
                for u in result
            ]
            _emit(out, args, rows, ["\t".join(str(c) for c in row) for row in rows])
        else:
            _emit(out, args, [[result["user_id"]]], [f"{args.users_command}: {result['user_id']}"])

    elif args.command == "assign":
        if args.assign_command == "create":
            result = client.assign(args.file, args.to)
            _emit(out, args, [[result["assignment_id"], result["state"]]],
                  [f"assigned {args.file} to {args.to} ({result['assignment_id']})"])
        elif args.assign_command == "reassign":
            result = client.reassign(args.file, args.to)
            _emit(out, args, [[result["new"]["assignment_id"], result["new"]["state"]]],
                  [f"reassigned {args.file} to {args.to} ({result['new']['assignment_id']})"])
        else:
            result = client.complete(args.file)
            _emit(out, args, [[result["assignment_id"], result["state"]]],
                  [f"completed {args.file}"])

    elif args.command == "progress":
        report = client.progress(args.scope)
        rows = []
        human = []
        for unit in report["units"]:
            if args.scope == "user":
                rows.append([unit["key"], len(unit["active_assignments"]), unit["completed_count"]])
                human.append(
                    f"{unit['key']}: {len(unit['active_assignments'])} active, "
                    f"{unit['completed_count']} completed"
                )
            else:
                rows.append([
                    unit["key"],
                    unit["files"]["total"], unit["files"]["assigned"], unit["files"]["completed"],
                    unit["sentences"]["total"], unit["sentences"]["complete"],
                ])
                human.append(
                    f"{unit['key']}: files {unit['files']['completed']}/{unit['files']['total']} done "
                    f"({unit['files']['assigned']} assigned), sentences "
                    f"{unit['sentences']['complete']}/{unit['sentences']['total']} complete"
                )
        _emit(out, args, rows, human)

    elif args.command == "stats":
        info = client.file_info(args.file)
        stats = info["stats"]
        mean = stats["mean_tokens_per_sentence"]
        _emit(out, args,
              [[stats["sentence_count"], stats["token_count"], mean]],
              [f"{stats['sentence_count']}, {stats['token_count']}, {mean}"])

    elif args.command == "iaa":
        result = client.iaa(args.file_a, args.file_b)
        _emit(out, args,
              [[result["file_a"], result["file_b"], result["annotator_a"], result["annotator_b"],
                result["joint_positions"],
                f"{result['p_o']:.4f}", f"{result['p_e']:.4f}", f"{result['kappa']:.4f}"]],
              [result["report"].rstrip("\n")])

    elif args.command == "adapt":
        result = _run_adapt(client, args)
        text = result.get("raw_file") or result.get("file") or ""
        if args.out:
            Path(args.out).write_text(text, "utf-8")
            _emit(out, args, [[args.out]], [f"wrote {args.out}"])
        else:
            out.write(text)

    elif args.command == "lexicon":
        result = _run_lexicon(client, args)
        if args.lexicon_command == "get":
            if "entries" in result:
                rows = [[s, t] for s, t in result["entries"].items()]
                rows.append(["#version", result["version"]])
            else:
                rows = [[d["surface"], d["tag"] if d["tag"] is not None else "-", d["version"]]
                        for d in result["delta"]]
                rows.append(["#version", result["version"]])
            _emit(out, args, rows, ["\t".join(str(c) for c in row) for row in rows])
        else:
            _emit(out, args, [[result["language"], result["version"]]],
                  [f"lexicon {result['language']} now at version {result['version']}"])

    return 0


def _run_users(client, args):
    if args.users_command == "list":
        return client.users_list()
    if args.users_command == "create":
        return client.users_create(
            args.id, args.name, _parse_role(args.role), _credential(args.credential)
        )
    if args.users_command == "modify":
        changes = {}
        if args.name:
            changes["display_name"] = args.name
        if args.role:
            changes["role"] = _parse_role(args.role)
        if args.credential:
            changes["credential"] = args.credential
        if args.active:
            changes["active"] = args.active == "true"
        return client.users_modify(args.id, changes)
    return client.users_delete(args.id)


def _run_adapt(client, args):
    if args.annotated:
        if not args.mapping:
            raise ValidationFailed(["--annotated requires --mapping"])
        return client.adapt({
            "mode": "annotated",
            "file": Path(args.annotated).read_text("utf-8"),
            "mapping": Path(args.mapping).read_text("utf-8"),
        })
    if not args.infile or not args.language or not args.domain:
        raise ValidationFailed(["text mode requires --in, --language and --domain"])
    raw = Path(args.infile).read_bytes()
    return client.adapt({
        "mode": "text",
        "text_base64": base64.b64encode(raw).decode("ascii"),
        "language": args.language,
        "domain": args.domain,
        "start_serial": args.start,
    })


def _run_lexicon(client, args):
    if args.lexicon_command == "get":
        return client.lexicon_get(args.language, args.since)
    if args.lexicon_command == "set":
        return client.lexicon_set(args.language, args.surface, args.tag)
    return client.lexicon_delete(args.language, args.surface)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return run(args, sys.stdout, sys.stderr)
    except DomainError as exc:
        print(f"error: {exc.code}: {exc.message}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
