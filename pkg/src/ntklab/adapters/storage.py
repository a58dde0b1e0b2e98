"""Artifact storage.

Artifacts are written atomically (temporary file in the target directory, then rename), so a crashed run never
leaves a half-written CSV behind. Every store keeps track of what it wrote and closes with a manifest.
"""

import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Sequence, TypeVar

from pydantic import BaseModel

from ntklab.domain.errors import ConfigError
from ntklab.domain.schemas.report import Manifest
from ntklab.utils.formatting import config_hash
from ntklab.version import __version__

log = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"

ModelT = TypeVar("ModelT", bound=BaseModel)


def atomic_write(path: Path, data: bytes) -> None:
    """Writes ``data`` to ``path`` through a temporary sibling file and ``os.replace``."""
    path.parent.mkdir(parents=True, exist_ok=True)
    handle, temporary = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(handle, "wb") as stream:
            stream.write(data)
        os.replace(temporary, path)
    except BaseException:
        if os.path.exists(temporary):
            os.unlink(temporary)
        raise


def dump_json(model: BaseModel) -> str:
    return model.model_dump_json(indent=2, by_alias=True) + "\n"


class ArtifactStore:
    """Output directory of one command invocation."""

    def __init__(self, out_dir: Path, overwrite: bool = False):
        """Initialize the store; nothing is created until the first write."""
        self.out_dir = Path(out_dir)
        self.overwrite = overwrite
        self.artifacts: list[str] = []

    def path(self, name: str) -> Path:
        return self.out_dir / name

    def write_bytes(self, name: str, data: bytes) -> Path:
        target = self.path(name)
        if target.exists() and not self.overwrite:
            raise ConfigError(f"{target} already exists; set io.overwrite or pass --overwrite")
        atomic_write(target, data)
        if name not in self.artifacts:
            self.artifacts.append(name)
        log.info("Wrote %s", target)
        return target

    def write_text(self, name: str, text: str) -> Path:
        return self.write_bytes(name, text.encode("utf-8"))

    def write_model(self, name: str, model: BaseModel) -> Path:
        return self.write_text(name, dump_json(model))

    def write_manifest(self, command: str, config: Any, seeds: Sequence[int]) -> Manifest:
        """Records the command, the hash of its effective config, the seeds and every artifact written so far."""
        manifest = Manifest(
            command=command,
            config_hash=config_hash(config),
            seeds=list(seeds),
            version=__version__,
            artifacts=sorted(self.artifacts),
        )
        target = self.path(MANIFEST_NAME)
        if target.exists() and not self.overwrite:
            raise ConfigError(f"{target} already exists; set io.overwrite or pass --overwrite")
        atomic_write(target, dump_json(manifest).encode("utf-8"))
        return manifest


def read_config(path: Path, schema: type[ModelT]) -> ModelT:
    """Parses a JSON config file strictly into ``schema``."""
    return schema.model_validate_json(Path(path).read_text(encoding="utf-8"))
