#!/usr/bin/env python3
"""Boot the annotation service from environment configuration.

Honored keys: ANNODESK_BIND (host:port), ANNODESK_STORE, ANNODESK_MAX_ACTIVE,
ANNODESK_OPEN_REGISTRATION, ANNODESK_LANGUAGES, ANNODESK_TAGSET,
ANNODESK_TAGSET_NAME, ANNODESK_ROOT_USER, ANNODESK_ROOT_CREDENTIAL,
ANNODESK_SNAPSHOT_EVERY.
"""

import sys

from annodesk.errors import BindFailure
from annodesk.service import ServiceConfig, serve


def main() -> int:
    config = ServiceConfig.from_env()
    print(f"store: {config.store_path}")
    print(f"languages: {', '.join(config.languages)}; tagset: {', '.join(config.tagset_labels)}")
    print(f"listening on http://{config.bind_host}:{config.bind_port}")
    try:
        serve(config)
    except BindFailure as exc:
        print(f"error: {exc.message}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
