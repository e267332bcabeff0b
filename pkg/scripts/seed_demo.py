#!/usr/bin/env python3
"""Seed a store with a small demo project: users, files, one assignment,
a starter lexicon and a bilingual dictionary. Handy for driving the web UI
or the CLI against realistic state.

Usage: seed_demo.py [store_path]

Accounts created (credential in parentheses): root (root-credential),
admin_hin (adminpw), admin_eng (adminpw), anno_hin (annopw),
anno_hin2 (annopw), anno_eng (annopw).
"""

import sys
from pathlib import Path

from annodesk.service import ServiceConfig, ServiceCore


RAW_HIN = """#LANG hin
#DOMAIN health
health-000001\tयह एक घर है।
health-000002\tवह कल बाजार गया।
health-000003\tमें और तुम साथ चलेंगे।
"""

RAW_ENG = """#LANG eng
#DOMAIN health
health-000001\tthis is a house.
health-000002\the went to the market yesterday.
health-000003\tyou and I will walk together.
"""

DICT_HIN_ENG = """#PAIR hin eng
यह\tthis
एक\tone|a
घर\thouse|home
है\tis
वह\the|that
कल\tyesterday|tomorrow
बाजार\tmarket
गया\twent
और\tand
तुम\tyou
साथ\ttogether
"""


def main() -> int:
    store = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("./annodesk-store")
    config = ServiceConfig.from_env()
    config.store_path = str(store)
    dict_dir = store / "dictionaries"
    dict_dir.mkdir(parents=True, exist_ok=True)
    (dict_dir / "hin-eng.dict").write_text(DICT_HIN_ENG, "utf-8")

    core = ServiceCore.open(config)
    project = core.project
    if len(project.users) > 1:
        print(f"store {store} already seeded ({len(project.users)} users)")
        return 0

    from annodesk.admin import ADMIN, ANNOTATOR, Role
    from annodesk.corpus import LanguageCode

    root = config.root_user
    for user_id, kind, lang, credential in (
        ("admin_hin", ADMIN, "hin", "adminpw"),
        ("admin_eng", ADMIN, "eng", "adminpw"),
        ("anno_hin", ANNOTATOR, "hin", "annopw"),
        ("anno_hin2", ANNOTATOR, "hin", "annopw"),
        ("anno_eng", ANNOTATOR, "eng", "annopw"),
    ):
        project.create_user(root, user_id, user_id.replace("_", " ").title(),
                            Role(kind, LanguageCode(lang)), credential)

    fid_hin = project.upload_file(root, RAW_HIN.encode("utf-8"))["file_id"]
    fid_eng = project.upload_file(root, RAW_ENG.encode("utf-8"))["file_id"]
    project.assign_file("admin_hin", fid_hin, "anno_hin")
    project.assign_file("admin_eng", fid_eng, "anno_eng")

    for surface, tag in (("और", "CC"), ("में", "PSP"), ("यह", "PRP"), ("वह", "PRP"), ("एक", "QT")):
        project.update_lexicon("anno_hin", "hin", surface, tag)
    project.post_notice(root, "all", "Welcome! Files are assigned; tagging may begin.")

    print(f"seeded store at {store}")
    print(f"files: {fid_hin} (hin, assigned to anno_hin), {fid_eng} (eng, assigned to anno_eng)")
    print("users: root, admin_hin, admin_eng, anno_hin, anno_hin2, anno_eng")
    core.log.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
