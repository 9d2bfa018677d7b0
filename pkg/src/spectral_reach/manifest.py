"""Run manifests and atomic file output.

Every command writes outputs via write-to-temporary-then-rename, plus a
manifest recording the command line, resolved configuration, seeds,
input digests, tool version, and output names.  Manifests contain no
timestamps, so a re-run with identical inputs is byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path


@dataclass
class RunManifest:
    command: list[str]
    config: dict
    seeds: list[int]
    tool_version: str
    input_digests: dict[str, str] = field(default_factory=dict)
    outputs: list[str] = field(default_factory=list)

    def add_input(self, path: str | Path) -> None:
        self.input_digests[str(path)] = sha256_file(path)

    def to_json(self) -> str:
        body = {
            "command": self.command,
            "config": self.config,
            "seeds": self.seeds,
            "tool_version": self.tool_version,
            "input_digests": self.input_digests,
            "outputs": self.outputs,
        }
        return json.dumps(body, indent=2, sort_keys=True) + "\n"


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def atomic_write_text(path: str | Path, text: str) -> None:
    """Write text so the destination is never seen half-written."""
    atomic_write_bytes(path, text.encode("utf-8"))


def atomic_write_bytes(path: str | Path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
