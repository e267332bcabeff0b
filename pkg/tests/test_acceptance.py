"""Acceptance suite: one test per release criterion, at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one PASS line per
criterion.
"""

from __future__ import annotations

import random
import time
from collections import Counter

from fastapi.testclient import TestClient

from annodesk.admin import ACTIVE_STATES, Project
from annodesk.agreement import AnnotationVersion, cohen_kappa, merge_gold
from annodesk.annotation import auto_tag
from annodesk.corpus import Tagset, build_parallel_units, corpus_stats
from annodesk.errors import (
    AlreadyAssigned,
    CapExceeded,
    NoActiveAssignment,
)
from annodesk.formats import parse_annotated_file, serialize_annotated_file
from annodesk.service import ServiceConfig, ServiceCore, create_app
from annodesk.synth import make_parallel_corpus, random_file, random_lexicon
from conftest import (
    TAGS,
    TickingClock,
    add_user,
    corpus_file,
    make_project,
    raw_file_bytes,
    seed_master,
    sentence,
)

CAP = 3


def _report(name: str) -> None:
    print(f"ACCEPTANCE PASS: {name}")


# ---------------------------------------------------------------------------
# 1. Assignment-cap model check
# ---------------------------------------------------------------------------

class _CapOracle:
    """Independent reference counters for the assignment state machine."""

    def __init__(self, annotators: list[str], cap: int):
        self.cap = cap
        self.active: dict[str, set[str]] = {a: set() for a in annotators}
        self.holder: dict[str, str] = {}  # file -> assignee

    def predict_assign(self, file_id: str, assignee: str) -> str:
        if file_id in self.holder:
            return "AlreadyAssigned"
        if len(self.active[assignee]) >= self.cap:
            return "CapExceeded"
        return "ok"

    def apply_assign(self, file_id: str, assignee: str) -> None:
        self.holder[file_id] = assignee
        self.active[assignee].add(file_id)

    def predict_reassign(self, file_id: str, assignee: str) -> str:
        if file_id not in self.holder:
            return "NoActiveAssignment"
        if self.holder[file_id] == assignee:
            return "AlreadyAssigned"
        if len(self.active[assignee]) >= self.cap:
            return "CapExceeded"
        return "ok"

    def apply_reassign(self, file_id: str, assignee: str) -> None:
        old = self.holder[file_id]
        self.active[old].discard(file_id)
        self.holder[file_id] = assignee
        self.active[assignee].add(file_id)

    def predict_complete(self, file_id: str) -> str:
        return "ok" if file_id in self.holder else "NoActiveAssignment"

    def apply_complete(self, file_id: str) -> None:
        assignee = self.holder.pop(file_id)
        self.active[assignee].discard(file_id)

    def check_invariants(self) -> None:
        for assignee, files in self.active.items():
            assert len(files) <= self.cap, f"{assignee} holds {len(files)} files"


def _fresh_cap_project(annotators: list[str], n_files: int) -> tuple[Project, list[str]]:
    project = make_project(languages=("hin",), max_active=CAP, clock=TickingClock())
    seed_master(project, "root", "pw")
    add_user(project, "root", "admin1", kind="admin", language="hin")
    for annotator in annotators:
        add_user(project, "root", annotator, language="hin")
    file_ids = []
    for i in range(n_files):
        raw = raw_file_bytes(texts=(f"word{i}",))
        file_ids.append(project.upload_file("root", raw)["file_id"])
    return project, file_ids


def _module_recount(project: Project) -> tuple[dict[str, set[str]], dict[str, str]]:
    """Recount active assignments from raw assignment records, not indexes."""
    active: dict[str, set[str]] = {}
    holder: dict[str, str] = {}
    for assignment in project.assignments.values():
        if assignment.state in ACTIVE_STATES:
            active.setdefault(assignment.assignee, set()).add(assignment.file_id)
            assert assignment.file_id not in holder, "two active assignments on one file"
            holder[assignment.file_id] = assignment.assignee
    return active, holder


def test_assignment_cap_model_check():
    started = time.monotonic()
    rng = random.Random(0xC0FFEE)
    annotators = [f"anno{i}" for i in range(5)]
    n_files = 40
    sequences = 10_000
    ops_per_sequence = 25
    reset_every = 500

    project, files = _fresh_cap_project(annotators, n_files)
    oracle = _CapOracle(annotators, CAP)

    for sequence in range(sequences):
        if sequence and sequence % reset_every == 0:
            project, files = _fresh_cap_project(annotators, n_files)
            oracle = _CapOracle(annotators, CAP)
        for _ in range(ops_per_sequence):
            op = rng.choice(("assign", "assign", "reassign", "complete"))
            file_id = rng.choice(files)
            assignee = rng.choice(annotators)
            if op == "assign":
                expected = oracle.predict_assign(file_id, assignee)
                try:
                    project.assign_file("admin1", file_id, assignee)
                    outcome = "ok"
                except AlreadyAssigned:
                    outcome = "AlreadyAssigned"
                except CapExceeded:
                    outcome = "CapExceeded"
                if outcome == "ok":
                    oracle.apply_assign(file_id, assignee)
            elif op == "reassign":
                expected = oracle.predict_reassign(file_id, assignee)
                try:
                    project.reassign_file("admin1", file_id, assignee)
                    outcome = "ok"
                except NoActiveAssignment:
                    outcome = "NoActiveAssignment"
                except AlreadyAssigned:
                    outcome = "AlreadyAssigned"
                except CapExceeded:
                    outcome = "CapExceeded"
                if outcome == "ok":
                    oracle.apply_reassign(file_id, assignee)
            else:
                expected = oracle.predict_complete(file_id)
                try:
                    holder = project.assignments[project._active_by_file[file_id]].assignee \
                        if file_id in project._active_by_file else None
                    assert (holder is not None) == (file_id in oracle.holder)
                    if holder is not None:
                        project.tag_token(holder, file_id, f"health-000001", 0, "N")
                        project.mark_completed(holder, file_id)
                        outcome = "ok"
                    else:
                        project.mark_completed("admin1", file_id)
                        outcome = "ok"  # unreachable: no active assignment
                except NoActiveAssignment:
                    outcome = "NoActiveAssignment"
                if outcome == "ok":
                    oracle.apply_complete(file_id)
            assert outcome == expected, f"op {op} on {file_id}/{assignee}: {outcome} != {expected}"
            oracle.check_invariants()
        # per-sequence: module agrees with the reference counters
        for annotator in annotators:
            assert project._active_count(annotator) == len(oracle.active[annotator])
        if sequence % 200 == 0:
            active, holder = _module_recount(project)
            assert holder == oracle.holder
            for annotator in annotators:
                assert active.get(annotator, set()) == oracle.active[annotator]

    elapsed = time.monotonic() - started
    assert elapsed < 30.0, f"model check took {elapsed:.1f}s"
    _report(f"assignment-cap model check (10,000 sequences, {elapsed:.1f}s)")


# ---------------------------------------------------------------------------
# 2. Download gate
# ---------------------------------------------------------------------------

def _service(tmp_path, **overrides):
    config = ServiceConfig(
        store_path=str(tmp_path),
        root_user="root",
        root_credential="rootpw",
        snapshot_every=0,
        **overrides,
    )
    core = ServiceCore.open(config, clock=TickingClock())
    return TestClient(create_app(core)), core


def _login(client, user, credential):
    response = client.post("/api/login", json={"user_id": user, "credential": credential})
    assert response.status_code == 200
    return {"Authorization": f"Bearer {response.json()['token']}"}


def _create_user(client, root, user_id, kind="annotator", language="hin", credential="pw"):
    role = {"kind": kind, "language": None if kind == "master_admin" else language}
    response = client.post("/api/users", headers=root, json={
        "user_id": user_id, "display_name": user_id, "role": role, "credential": credential,
    })
    assert response.status_code == 200
    return _login(client, user_id, credential)


def test_download_gate_exhaustive(tmp_path):
    # six permanently incomplete files would trip the 3-file cap, which is
    # not what this criterion tests
    client, _ = _service(tmp_path / "store", max_active_assignments=10)
    root = _login(client, "root", "rootpw")
    admin = _create_user(client, root, "admin1", kind="admin")
    anno = _create_user(client, root, "anno1")

    n_sentences, tokens_per_sentence = 20, 3
    texts = tuple(" ".join(f"w{s}x{t}" for t in range(tokens_per_sentence)) for s in range(n_sentences))
    for untagged in range(6):  # 0..k untagged tokens, k = 5
        response = client.post("/api/files", headers=root, content=raw_file_bytes(texts=texts))
        fid = response.json()["file_id"]
        response = client.post(
            "/api/assignments", headers=root, json={"file_id": fid, "assignee": "anno1"}
        )
        assert response.status_code == 200, response.text
        skip = untagged
        for s in range(n_sentences):
            for t in range(tokens_per_sentence):
                if skip > 0:
                    skip -= 1
                    continue
                response = client.put(
                    f"/api/files/{fid}/sentences/health-{s + 1:06d}/tokens/{t}/tag",
                    headers=anno, json={"tag": "N"},
                )
                assert response.status_code == 200
        response = client.get(f"/api/files/{fid}/download", headers=admin)
        if untagged == 0:
            assert response.status_code == 200, f"untagged={untagged}: {response.text}"
            assert response.text.startswith("#LANG hin")
        else:
            assert response.status_code == 409, f"untagged={untagged}"
            assert response.json()["error"]["code"] == "IncompleteFile"
        # annotators are always denied, complete or not
        response = client.get(f"/api/files/{fid}/download", headers=anno)
        assert response.status_code == 403
    _report("download gate (0..5 untagged tokens, annotator always denied)")


# ---------------------------------------------------------------------------
# 3. Format round-trip
# ---------------------------------------------------------------------------

def test_format_round_trip_1000_files():
    started = time.monotonic()
    rng = random.Random(0x5EED)
    tagset = Tagset("acc", TAGS)
    for i in range(1000):
        file = random_file(
            rng,
            language=rng.choice(("hin", "eng", "ben")),
            min_sentences=1,
            max_sentences=50,
            tagset=tagset,
            tag_probability=rng.random(),
        )
        data = serialize_annotated_file(file)
        parsed = parse_annotated_file(data, tagset)
        assert parsed == file, f"file {i} not equal after round-trip"
        assert serialize_annotated_file(parsed) == data, f"file {i} bytes differ"
    elapsed = time.monotonic() - started
    assert elapsed < 20.0, f"round-trip took {elapsed:.1f}s"
    _report(f"format round-trip (1,000 mixed-script files, {elapsed:.1f}s)")


# ---------------------------------------------------------------------------
# 4. Auto-tag properties + lexicon propagation
# ---------------------------------------------------------------------------

def test_auto_tag_properties_1000_pairs(tmp_path):
    rng = random.Random(0xA07A6)
    tagset = Tagset("acc", TAGS)
    for i in range(1000):
        script = rng.choice(("latin", "devanagari", "bengali"))
        file = random_file(
            rng, min_sentences=1, max_sentences=1, script=script,
            tagset=tagset, tag_probability=0.4,
        )
        s = file.sentences[0]
        lexicon = random_lexicon(rng, "hin", tagset, n_entries=rng.randint(0, 15), script=script)
        once, applied = auto_tag(s, lexicon)
        twice, applied_again = auto_tag(once, lexicon)
        assert twice == once and applied_again == 0, f"pair {i}: not idempotent"
        for before, after in zip(s.tags, once.tags):
            if before is not None:
                assert after == before, f"pair {i}: overwrote a human tag"
        assert sum(t is not None for t in once.tags) == sum(t is not None for t in s.tags) + applied

    # propagation through the service: every trial's update shows up in the
    # other user's delta with the incremented version
    client, _ = _service(tmp_path / "store")
    root = _login(client, "root", "rootpw")
    a = _create_user(client, root, "userA")
    b = _create_user(client, root, "userB")
    version = 0
    for trial in range(25):
        surface = f"word{trial}"
        response = client.put("/api/lexicon/hin", headers=a, json={"surface": surface, "tag": "CC"})
        assert response.status_code == 200
        assert response.json()["version"] == version + 1
        sync = client.get("/api/lexicon/hin", headers=b, params={"since": version}).json()
        assert sync["version"] == version + 1
        assert {"surface": surface, "tag": "CC", "version": version + 1} in sync["delta"]
        version += 1
    _report("auto-tag properties (1,000 pairs) and lexicon propagation (25 trials)")


# ---------------------------------------------------------------------------
# 5. Kappa oracle
# ---------------------------------------------------------------------------

def _version_from_tags(annotator, tag_rows, file_id="f1"):
    sentences = [
        sentence(i + 1, [f"w{i}_{j}" for j in range(len(tags))], tags)
        for i, tags in enumerate(tag_rows)
    ]
    return AnnotationVersion(file_id, annotator, corpus_file(sentences))


def test_kappa_oracle():
    # worked example: 10 joint tokens, 8 agreements, balanced marginals
    a = _version_from_tags("u1", [["N"] * 5 + ["V"] * 5])
    b = _version_from_tags("u2", [["N"] * 4 + ["V"] * 5 + ["N"]])
    result = cohen_kappa(a, b)
    assert abs(result.kappa - 0.6) <= 1e-9

    identical = _version_from_tags("u2", [["N", "V", "PRP", "N"]])
    same = _version_from_tags("u1", [["N", "V", "PRP", "N"]])
    assert cohen_kappa(same, identical).kappa == 1.0

    rng = random.Random(0x7A99)
    for _ in range(200):
        n = rng.randint(1, 30)
        tags_a = [rng.choice(TAGS + (None,)) for _ in range(n)]
        tags_b = [rng.choice(TAGS + (None,)) for _ in range(n)]
        if not any(x is not None and y is not None for x, y in zip(tags_a, tags_b)):
            tags_a[0] = tags_b[0] = "N"
        va = _version_from_tags("u1", [tags_a])
        vb = _version_from_tags("u2", [tags_b])
        assert abs(cohen_kappa(va, vb).kappa - cohen_kappa(vb, va).kappa) <= 1e-12
    _report("kappa oracle (worked example 0.6, identity, symmetry on 200 pairs)")


# ---------------------------------------------------------------------------
# 6. Merge oracle
# ---------------------------------------------------------------------------

def test_merge_oracle_200_instances():
    rng = random.Random(0x6018)
    for instance in range(200):
        n_sentences = rng.randint(1, 4)
        shape = [rng.randint(1, 6) for _ in range(n_sentences)]
        rows = [
            [[rng.choice(TAGS[:3] + (None, None)) for _ in range(shape[si])]
             for si in range(n_sentences)]
            for _ in range(3)
        ]
        versions = [_version_from_tags(f"u{ai}", rows[ai]) for ai in range(3)]
        gold, queue = merge_gold(versions)

        queued = {(d.id, d.index) for d in queue}
        for si in range(n_sentences):
            for pos in range(shape[si]):
                votes = [rows[ai][si][pos] for ai in range(3)]
                counts = Counter(v for v in votes if v is not None)
                winner = None
                for tag, count in counts.most_common():
                    if count * 2 > 3:
                        winner = tag
                        break
                assert gold.sentences[si].tags[pos] == winner, f"instance {instance}"
                sid = str(gold.sentences[si].id)
                is_tie = winner is None and len(set(votes)) > 1
                assert ((sid, pos) in queued) == is_tie, f"instance {instance}"
    _report("merge oracle (brute-force recount on 200 instances, ties queued)")


# ---------------------------------------------------------------------------
# 7. Corpus statistics reproduction at desk scale
# ---------------------------------------------------------------------------

def test_corpus_statistics_desk_scale():
    started = time.monotonic()
    rng = random.Random(0x57A7)
    files = make_parallel_corpus(rng, 1000, ["hin", "eng"], mean_tokens=16)
    for file in files:
        stats = corpus_stats(file)
        assert stats.sentence_count == 1000
        assert abs(stats.mean_tokens_per_sentence - 16) <= 0.05 * 16, stats
    units, gaps = build_parallel_units(files)
    assert len(units) == 1000
    assert gaps == []
    elapsed = time.monotonic() - started
    assert elapsed < 10.0, f"statistics run took {elapsed:.1f}s"
    _report(f"corpus statistics (1,000 sentences x 2 languages, mean within 5%, {elapsed:.1f}s)")


# ---------------------------------------------------------------------------
# 8. Crash durability
# ---------------------------------------------------------------------------

class _ShadowModel:
    """Independent state tracker fed only acknowledged operations."""

    def __init__(self):
        self.users: dict[str, str] = {}
        self.tags: dict[tuple[str, str, int], str] = {}
        self.assignments: dict[str, tuple[str, str]] = {}  # aid -> (fid, state)
        self.lexicon: dict[str, str] = {}
        self.lexicon_version = 0
        self.notices: list[str] = []

    def projection_of(self, project: Project) -> dict:
        tags = {}
        for fid, file in project.files.items():
            for s in file.sentences:
                for i, tag in enumerate(s.tags):
                    if tag is not None:
                        tags[(fid, str(s.id), i)] = tag
        return {
            "users": {uid: u.role.kind for uid, u in project.users.items()},
            "tags": tags,
            "assignments": {
                aid: (a.file_id, a.state) for aid, a in project.assignments.items()
            },
            "lexicon": dict(project.lexicons.get("hin").entries) if "hin" in project.lexicons else {},
            "lexicon_version": project.lexicons["hin"].version if "hin" in project.lexicons else 0,
            "notices": [n.body for n in project.notices],
        }

    def as_dict(self) -> dict:
        return {
            "users": dict(self.users),
            "tags": dict(self.tags),
            "assignments": dict(self.assignments),
            "lexicon": dict(self.lexicon),
            "lexicon_version": self.lexicon_version,
            "notices": list(self.notices),
        }


def test_crash_durability_500_mutations(tmp_path):
    store_path = tmp_path / "store"
    config = ServiceConfig(
        store_path=str(store_path), root_user="root", root_credential="rootpw",
        snapshot_every=100,
    )
    core = ServiceCore.open(config, clock=TickingClock())
    client = TestClient(create_app(core))
    root = _login(client, "root", "rootpw")
    shadow = _ShadowModel()
    shadow.users["root"] = "master_admin"
    rng = random.Random(0xD0DE)

    acknowledged = 0
    anno_headers = {}

    def ack():
        nonlocal acknowledged
        acknowledged += 1

    # a seed population of users and files
    for i in range(3):
        uid = f"anno{i}"
        _create_user(client, root, uid)
        shadow.users[uid] = "annotator"
        ack()
        anno_headers[uid] = _login(client, uid, "pw")
    file_ids = []
    for i in range(6):
        texts = tuple(f"w{i}s{s} x y" for s in range(3))
        response = client.post("/api/files", headers=root, content=raw_file_bytes(texts=texts))
        assert response.status_code == 200
        file_ids.append(response.json()["file_id"])
        ack()

    assigned: dict[str, str] = {}
    while acknowledged < 500:
        roll = rng.random()
        if roll < 0.15 and len(assigned) < len(file_ids):
            fid = rng.choice([f for f in file_ids if f not in assigned])
            uid = rng.choice(list(anno_headers))
            response = client.post(
                "/api/assignments", headers=root, json={"file_id": fid, "assignee": uid}
            )
            if response.status_code == 200:
                payload = response.json()
                assigned[fid] = uid
                shadow.assignments[payload["assignment_id"]] = (fid, "assigned")
                ack()
        elif roll < 0.75 and assigned:
            fid = rng.choice(list(assigned))
            uid = assigned[fid]
            sid = f"health-{rng.randint(1, 3):06d}"
            index = rng.randint(0, 2)
            tag = rng.choice(TAGS)
            response = client.put(
                f"/api/files/{fid}/sentences/{sid}/tokens/{index}/tag",
                headers=anno_headers[uid], json={"tag": tag},
            )
            if response.status_code == 200:
                shadow.tags[(fid, sid, index)] = tag
                aid = [a for a, (f, _) in shadow.assignments.items() if f == fid][-1]
                shadow.assignments[aid] = (fid, "in_progress")
                ack()
        elif roll < 0.9:
            surface = f"w{rng.randint(0, 40)}"
            uid = rng.choice(list(anno_headers))
            if rng.random() < 0.8:
                tag = rng.choice(TAGS)
                response = client.put(
                    "/api/lexicon/hin", headers=anno_headers[uid],
                    json={"surface": surface, "tag": tag},
                )
                assert response.status_code == 200
                shadow.lexicon[surface] = tag
            else:
                response = client.put(
                    "/api/lexicon/hin", headers=anno_headers[uid],
                    json={"surface": surface, "delete": True},
                )
                assert response.status_code == 200
                shadow.lexicon.pop(surface, None)
            shadow.lexicon_version += 1
            ack()
        else:
            body = f"notice {acknowledged}"
            response = client.post(
                "/api/notices", headers=root, json={"audience": "all", "body": body}
            )
            assert response.status_code == 200
            shadow.notices.append(body)
            ack()

    assert acknowledged == 500
    pre_crash = core.project.to_snapshot()
    core.log.close()  # the process dies here; in-memory state is discarded

    recovered = ServiceCore.open(config, clock=TickingClock())
    assert recovered.project.to_snapshot() == pre_crash
    assert shadow.projection_of(recovered.project) == shadow.as_dict()
    recovered.log.close()
    _report("crash durability (500 acknowledged mutations, replay == shadow model)")


# ---------------------------------------------------------------------------
# 9. Authorization matrix
# ---------------------------------------------------------------------------

ALLOW, DENY = "allow", "deny"

# The documented allow/deny table for the sweep scenario: a hin file actively
# assigned to anno_hin. Columns: master_admin, admin(hin), annotator(hin, assignee).
EXPECTED_MATRIX = {
    "create_user":       (ALLOW, DENY, DENY),
    "modify_user":       (ALLOW, DENY, DENY),
    "delete_user":       (ALLOW, DENY, DENY),
    "list_users":        (ALLOW, ALLOW, DENY),
    "upload_file":       (ALLOW, DENY, DENY),
    "view_file":         (ALLOW, ALLOW, ALLOW),
    "download_file":     (ALLOW, ALLOW, DENY),
    "assign_file":       (ALLOW, ALLOW, DENY),
    "reassign_file":     (ALLOW, ALLOW, DENY),
    "tag_token":         (DENY, DENY, ALLOW),
    "edit_sentence":     (DENY, DENY, ALLOW),
    "auto_tag_file":     (DENY, DENY, ALLOW),
    "mark_completed":    (ALLOW, ALLOW, ALLOW),
    "update_lexicon":    (ALLOW, DENY, ALLOW),
    "read_lexicon":      (ALLOW, ALLOW, ALLOW),
    "progress_project":  (ALLOW, ALLOW, ALLOW),
    "progress_language": (ALLOW, ALLOW, ALLOW),
    "progress_user":     (ALLOW, DENY, DENY),
    "post_notice":       (ALLOW, DENY, DENY),
    "list_notices":      (ALLOW, ALLOW, ALLOW),
    "run_iaa":           (ALLOW, ALLOW, DENY),
    "adapt":             (ALLOW, DENY, DENY),
    "translate_file":    (ALLOW, ALLOW, ALLOW),
    "export_project":    (ALLOW, DENY, DENY),
}


def _sweep_scenario(tmp_path, name):
    client, core = _service(tmp_path / name)
    from annodesk.corpus import LanguageCode
    from annodesk.translation import BilingualDictionary

    core.dictionaries[("hin", "eng")] = BilingualDictionary(
        (LanguageCode("hin"), LanguageCode("eng")), {"एक": ("one",)}
    )
    root = _login(client, "root", "rootpw")
    headers = {
        "master_admin": root,
        "admin": _create_user(client, root, "admin_hin", kind="admin"),
        "annotator": _create_user(client, root, "anno_hin"),
    }
    _create_user(client, root, "anno_hin2")
    _create_user(client, root, "anno_del")

    fid = client.post("/api/files", headers=root, content=raw_file_bytes(texts=("एक दो",))).json()["file_id"]
    fid_b = client.post("/api/files", headers=root, content=raw_file_bytes(texts=("एक दो",))).json()["file_id"]
    fid_free = client.post("/api/files", headers=root, content=raw_file_bytes(texts=("तीन",))).json()["file_id"]
    aid = client.post(
        "/api/assignments", headers=root, json={"file_id": fid, "assignee": "anno_hin"}
    ).json()["assignment_id"]
    client.post("/api/assignments", headers=root, json={"file_id": fid_b, "assignee": "anno_hin2"})
    anno2 = _login(client, "anno_hin2", "pw")
    for target, h in ((fid, headers["annotator"]), (fid_b, anno2)):
        assert client.put(
            f"/api/files/{target}/sentences/health-000001/tokens/0/tag", headers=h, json={"tag": "N"}
        ).status_code == 200
    return client, headers, {"fid": fid, "fid_b": fid_b, "fid_free": fid_free, "aid": aid}


def _sweep_calls(client, h, ctx, marker: str):
    """(op name -> callable returning the HTTP status)."""
    fid, fid_b, fid_free, aid = ctx["fid"], ctx["fid_b"], ctx["fid_free"], ctx["aid"]
    return {
        "create_user": lambda: client.post("/api/users", headers=h, json={
            "user_id": f"new_{marker}", "display_name": "x",
            "role": {"kind": "annotator", "language": "hin"}, "credential": "pw",
        }).status_code,
        "modify_user": lambda: client.patch(
            f"/api/users/anno_del", headers=h, json={"display_name": f"renamed {marker}"}
        ).status_code,
        "delete_user": lambda: client.delete("/api/users/anno_del", headers=h).status_code,
        "list_users": lambda: client.get("/api/users", headers=h).status_code,
        "upload_file": lambda: client.post(
            "/api/files", headers=h,
            content=raw_file_bytes(domain="tourism", texts=(f"up {marker}",)),
        ).status_code,
        "view_file": lambda: client.get(f"/api/files/{fid}", headers=h).status_code,
        "download_file": lambda: client.get(f"/api/files/{fid}/download", headers=h).status_code,
        "assign_file": lambda: client.post("/api/assignments", headers=h, json={
            "file_id": fid_free, "assignee": "anno_hin2",
        }).status_code,
        "reassign_file": lambda: client.post(
            f"/api/assignments/{aid}/reassign", headers=h, json={"assignee": "anno_hin2"}
        ).status_code,
        "tag_token": lambda: client.put(
            f"/api/files/{fid}/sentences/health-000001/tokens/1/tag", headers=h, json={"tag": "V"}
        ).status_code,
        "edit_sentence": lambda: client.post(
            f"/api/files/{fid}/sentences/health-000001/edit",
            headers=h, json={"text": f"एक दो {marker}"},
        ).status_code,
        "auto_tag_file": lambda: client.post(f"/api/files/{fid}/auto-tag", headers=h).status_code,
        "mark_completed": lambda: client.post(
            f"/api/assignments/{aid}/complete", headers=h
        ).status_code,
        "update_lexicon": lambda: client.put(
            "/api/lexicon/hin", headers=h, json={"surface": f"lex{marker}", "tag": "CC"}
        ).status_code,
        "read_lexicon": lambda: client.get("/api/lexicon/hin", headers=h).status_code,
        "progress_project": lambda: client.get(
            "/api/progress", headers=h, params={"scope": "project"}
        ).status_code,
        "progress_language": lambda: client.get(
            "/api/progress", headers=h, params={"scope": "language"}
        ).status_code,
        "progress_user": lambda: client.get(
            "/api/progress", headers=h, params={"scope": "user"}
        ).status_code,
        "post_notice": lambda: client.post(
            "/api/notices", headers=h, json={"audience": "all", "body": f"note {marker}"}
        ).status_code,
        "list_notices": lambda: client.get("/api/notices", headers=h).status_code,
        "run_iaa": lambda: client.get(
            "/api/iaa", headers=h, params={"fileA": fid, "fileB": fid_b}
        ).status_code,
        "adapt": lambda: client.post("/api/adapt", headers=h, json={
            "mode": "text", "text": "एक। दो।", "language": "hin", "domain": "health",
        }).status_code,
        "translate_file": lambda: client.get(
            f"/api/translate/{fid}", headers=h, params={"pair": "hin-eng"}
        ).status_code,
        "export_project": lambda: client.get("/api/export", headers=h).status_code,
    }


# Op order matters: assignee-gated annotation ops run before mark_completed so
# the active assignment survives until the final row.
SWEEP_ORDER = [
    "list_users", "view_file", "download_file", "read_lexicon", "progress_project",
    "progress_language", "progress_user", "list_notices", "run_iaa", "translate_file",
    "export_project", "adapt", "create_user", "modify_user", "upload_file",
    "assign_file", "tag_token", "edit_sentence", "auto_tag_file", "update_lexicon",
    "post_notice", "reassign_file", "mark_completed", "delete_user",
]


def test_authorization_matrix_exhaustive(tmp_path):
    assert set(SWEEP_ORDER) == set(EXPECTED_MATRIX)
    role_order = ("master_admin", "admin", "annotator")
    for role_index, role in enumerate(role_order):
        client, headers, ctx = _sweep_scenario(tmp_path, f"sweep-{role}")
        calls = _sweep_calls(client, headers[role], ctx, marker=role)
        for op in SWEEP_ORDER:
            status = calls[op]()
            expected = EXPECTED_MATRIX[op][role_index]
            if expected == ALLOW:
                assert status not in (401, 403), f"{role} should be allowed {op}, got {status}"
            else:
                assert status in (401, 403), f"{role} should be denied {op}, got {status}"

    # cross-language roles are denied every language-scoped operation
    client, headers, ctx = _sweep_scenario(tmp_path, "sweep-cross")
    root = headers["master_admin"]
    eng_admin = _create_user(client, root, "admin_eng", kind="admin", language="eng")
    eng_anno = _create_user(client, root, "anno_eng", language="eng")
    for h in (eng_admin, eng_anno):
        for op in ("view_file", "download_file", "tag_token", "read_lexicon",
                   "update_lexicon", "run_iaa", "translate_file", "assign_file",
                   "reassign_file", "mark_completed"):
            status = _sweep_calls(client, h, ctx, marker="x")[op]()
            assert status in (401, 403), f"cross-language {op} gave {status}"

    # unauthenticated requests are rejected everywhere
    client, _, ctx = _sweep_scenario(tmp_path, "sweep-anon")
    calls = _sweep_calls(client, {}, ctx, marker="anon")
    for op in SWEEP_ORDER:
        assert calls[op]() == 401, f"anonymous {op} was not rejected"
    _report("authorization matrix (3 roles x 24 ops + cross-language + anonymous)")
