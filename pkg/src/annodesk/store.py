"""Durable storage: append-only event log, snapshots, and project archives.

Crash recovery is replay: load the newest snapshot (if any), then apply every
logged event with a higher sequence number. ``EventLog.append`` flushes and
fsyncs before returning, so an acknowledged mutation survives a crash.
"""

from __future__ import annotations

import io
import json
import os
import zipfile
from datetime import datetime
from pathlib import Path
from typing import Callable

from .admin import Project, ProjectConfig
from .annotation import serialize_lexicon
from .errors import StoreUnavailable
from .formats import serialize_annotated_file
from .translation import BilingualDictionary, load_dictionary

CONFIG_FILE = "config.json"
EVENTS_FILE = "events.jsonl"
SNAPSHOT_DIR = "snapshots"
DICTIONARY_DIR = "dictionaries"

# Fixed zip metadata keeps export bytes identical across runs on equal state.
_ZIP_DATE = (1980, 1, 1, 0, 0, 0)


class EventLog:
    """Append-only JSONL event journal with write-through durability."""

    def __init__(self, path: Path):
        self.path = Path(path)
        self._fh = open(self.path, "ab")

    def append(self, event: dict) -> None:
        try:
            line = json.dumps(event, ensure_ascii=False, sort_keys=True) + "\n"
            self._fh.write(line.encode("utf-8"))
            self._fh.flush()
            os.fsync(self._fh.fileno())
        except OSError as exc:
            raise StoreUnavailable(f"cannot append to event log: {exc}") from exc

    def close(self) -> None:
        self._fh.close()

    @staticmethod
    def read_all(path: Path) -> list[dict]:
        """Read the journal; a torn final line (crash mid-append, never
        acknowledged) is dropped, corruption anywhere else refuses recovery."""
        if not Path(path).exists():
            return []
        raw_lines = [line for line in Path(path).read_bytes().split(b"\n") if line.strip()]
        events = []
        for index, line in enumerate(raw_lines):
            try:
                events.append(json.loads(line.decode("utf-8")))
            except (json.JSONDecodeError, UnicodeDecodeError) as exc:
                if index == len(raw_lines) - 1:
                    break
                raise StoreUnavailable(f"corrupt event log record {index + 1}: {exc}") from exc
        return events


class ProjectStore:
    """One project's on-disk home: config, event log, snapshots, dictionaries."""

    def __init__(self, root: Path):
        self.root = Path(root)

    @property
    def events_path(self) -> Path:
        return self.root / EVENTS_FILE

    @property
    def config_path(self) -> Path:
        return self.root / CONFIG_FILE

    def load_config(self) -> ProjectConfig | None:
        if not self.config_path.exists():
            return None
        return ProjectConfig.from_obj(json.loads(self.config_path.read_text("utf-8")))

    def write_config(self, config: ProjectConfig) -> None:
        self.root.mkdir(parents=True, exist_ok=True)
        self.config_path.write_text(
            json.dumps(config.to_obj(), indent=2, sort_keys=True) + "\n", "utf-8"
        )

    def save_snapshot(self, project: Project) -> Path:
        snap_dir = self.root / SNAPSHOT_DIR
        snap_dir.mkdir(parents=True, exist_ok=True)
        path = snap_dir / f"snap-{project.seq:08d}.json"
        path.write_text(
            json.dumps(project.to_snapshot(), ensure_ascii=False, sort_keys=True), "utf-8"
        )
        return path

    def latest_snapshot(self) -> dict | None:
        snap_dir = self.root / SNAPSHOT_DIR
        if not snap_dir.exists():
            return None
        candidates = sorted(snap_dir.glob("snap-*.json"))
        if not candidates:
            return None
        return json.loads(candidates[-1].read_text("utf-8"))

    def load_dictionaries(self) -> dict[tuple[str, str], BilingualDictionary]:
        dict_dir = self.root / DICTIONARY_DIR
        out: dict[tuple[str, str], BilingualDictionary] = {}
        if dict_dir.exists():
            for path in sorted(dict_dir.glob("*.dict")):
                dictionary = load_dictionary(path.read_bytes())
                out[(str(dictionary.pair[0]), str(dictionary.pair[1]))] = dictionary
        return out


def open_project(
    root: Path,
    config: ProjectConfig | None = None,
    clock: Callable[[], datetime] | None = None,
    bootstrap_master: tuple[str, str] | None = None,
) -> tuple[Project, EventLog, ProjectStore]:
    """Open (or initialize) a store directory and recover the project state.

    A brand-new store gets the provided config written to disk and, when
    ``bootstrap_master`` is given, a first master-admin account so the project
    is administrable at all.
    """
    store = ProjectStore(root)
    store.root.mkdir(parents=True, exist_ok=True)
    on_disk = store.load_config()
    if on_disk is None:
        if config is None:
            raise StoreUnavailable(f"store {root} has no config.json and none was provided")
        store.write_config(config)
        on_disk = config

    snapshot = store.latest_snapshot()
    events = EventLog.read_all(store.events_path)
    if snapshot is not None:
        project = Project.from_snapshot(snapshot, clock)
        for event in events:
            if event["seq"] > project.seq:
                project._apply_event(event)
    else:
        project = Project.replay(on_disk, events, clock)

    log = EventLog(store.events_path)
    project.on_event = log.append

    if bootstrap_master is not None and not project.users:
        user_id, secret = bootstrap_master
        _bootstrap_master_admin(project, user_id, secret)
    return project, log, store


def _bootstrap_master_admin(project: Project, user_id: str, secret: str) -> None:
    from .admin import MASTER_ADMIN, Role, make_verifier

    project._emit(
        "user.created",
        ("user", user_id),
        {
            "user_id": user_id,
            "display_name": "Master Admin",
            "role": Role(MASTER_ADMIN).to_obj(),
            "verifier": make_verifier(secret),
            "active": True,
        },
        None,
    )


# --- export / import ----------------------------------------------------------

def export_archive(project: Project, fmt: str = "native") -> bytes:
    """Deterministic zip of the project's files plus the parallel-unit index.

    ``native`` additionally embeds the full state snapshot (making re-import
    exact); ``columnar`` is the data-only interchange form. Both use the same
    per-sentence token/tag block format.
    """
    if fmt not in ("native", "columnar"):
        raise ValueError(f"unknown export format {fmt!r}")
    buffer = io.BytesIO()
    with zipfile.ZipFile(buffer, "w", compression=zipfile.ZIP_DEFLATED) as archive:
        def add(name: str, data: bytes):
            info = zipfile.ZipInfo(name, date_time=_ZIP_DATE)
            info.compress_type = zipfile.ZIP_DEFLATED
            archive.writestr(info, data)

        for file_id in sorted(project.files):
            add(f"files/{file_id}.ann", serialize_annotated_file(project.files[file_id]))
        add("units.tsv", _units_index(project))
        for language in sorted(project.lexicons):
            add(f"lexicons/{language}.lex", serialize_lexicon(project.lexicons[language]))
        if fmt == "native":
            add(
                "project.json",
                json.dumps(project.to_snapshot(), ensure_ascii=False, sort_keys=True).encode("utf-8"),
            )
    return buffer.getvalue()


def _units_index(project: Project) -> bytes:
    """id -> languages present / languages missing, across every stored file."""
    languages = sorted(str(lang) for lang in project.config.languages)
    by_id: dict[str, set[str]] = {}
    for file in project.files.values():
        for sentence in file.sentences:
            by_id.setdefault(str(sentence.id), set()).add(str(file.language))
    lines = ["id\tpresent\tmissing"]
    for sid in sorted(by_id):
        present = sorted(by_id[sid])
        missing = [lang for lang in languages if lang not in by_id[sid]]
        lines.append(f"{sid}\t{','.join(present)}\t{','.join(missing)}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def import_archive(
    data: bytes, clock: Callable[[], datetime] | None = None
) -> Project:
    """Rebuild a project from a native export archive."""
    with zipfile.ZipFile(io.BytesIO(data)) as archive:
        names = set(archive.namelist())
        if "project.json" not in names:
            raise ValueError("archive has no project.json; only native exports are importable")
        snapshot = json.loads(archive.read("project.json").decode("utf-8"))
    return Project.from_snapshot(snapshot, clock)
