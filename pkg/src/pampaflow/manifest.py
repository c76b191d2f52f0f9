"""JSON-lines pipeline manifest: one record per CLI step with content digests.

Re-running a pipeline on unchanged inputs reproduces identical digests, so
the manifest doubles as a determinism check for the whole workflow.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path


def file_digest(path) -> str:
    hasher = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            hasher.update(chunk)
    return hasher.hexdigest()


def append_step(manifest_path, command: str, parameters: dict,
                inputs: list, outputs: list) -> dict:
    """Append one step record and return it."""
    record = {
        "command": command,
        "parameters": {k: v for k, v in sorted(parameters.items())},
        "inputs": {str(p): file_digest(p) for p in inputs},
        "outputs": {str(p): file_digest(p) for p in outputs},
    }
    path = Path(manifest_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(record, sort_keys=True) + "\n")
    return record


def read_manifest(manifest_path) -> list[dict]:
    records = []
    with open(manifest_path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records
