# utils/io_utils.py
"""
Artifact input/output: schema-checked input documents and atomic writes of
JSON, CSV and image files, each with a sidecar holding the run config.
"""

import json
import logging
import os
import shutil
import tempfile
from contextlib import contextmanager
from functools import lru_cache
from pathlib import Path

import jsonschema

from config.run_config import read_document
from utils.errors import ConfigSchemaError

logger = logging.getLogger(__name__)

STATIC_DIR = Path(__file__).resolve().parent.parent / "static"


@lru_cache(maxsize=None)
def load_schema(name):
    with open(STATIC_DIR / f"{name}.schema.json", encoding="utf-8") as f:
        return json.load(f)


def validate_document(data, schema_name):
    try:
        jsonschema.validate(data, load_schema(schema_name))
    except jsonschema.ValidationError as e:
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise ConfigSchemaError(f"{schema_name} document invalid at {where}: {e.message}", schema=schema_name)
    return data


def read_input(path, schema_name=None):
    """Read a JSON/TOML input file, validating it when a schema is named."""
    data = read_document(path)
    return validate_document(data, schema_name) if schema_name else data


def atomic_write_bytes(path, payload):
    """Write through a temporary file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    logger.debug("wrote %s (%d bytes)", path, len(payload))
    return path


def atomic_write_text(path, text):
    return atomic_write_bytes(path, text.encode("utf-8"))


@contextmanager
def staged_directory(target):
    """Yield a scratch directory whose files land in ``target`` only if the block succeeds.

    The scratch directory is a sibling of ``target``. A missing ``target`` is
    created by renaming the scratch directory; otherwise files are moved in
    one by one after every write has finished. On failure nothing is moved.
    """
    target = Path(target)
    target.parent.mkdir(parents=True, exist_ok=True)
    stage = Path(tempfile.mkdtemp(dir=target.parent, prefix=f".{target.name or 'out'}.", suffix=".tmp"))
    try:
        yield stage
    except BaseException:
        shutil.rmtree(stage, ignore_errors=True)
        raise
    if not target.exists():
        os.replace(stage, target)
    else:
        for item in sorted(stage.iterdir()):
            os.replace(item, target / item.name)
        stage.rmdir()
    logger.debug("committed staged outputs into %s", target)


def dumps(data):
    return json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def sidecar_path(path):
    path = Path(path)
    return path.with_name(f"{path.stem}.config.json")


def write_sidecar(path, config):
    if config is None:
        return None
    payload = config.sidecar() if hasattr(config, "sidecar") else config
    return atomic_write_text(sidecar_path(path), dumps(payload))


def write_json(path, data, config=None):
    written = atomic_write_text(path, dumps(data))
    write_sidecar(path, config)
    return written


def write_csv(path, frame, config=None):
    written = atomic_write_text(path, frame.to_csv(index=False, float_format="%.17g"))
    write_sidecar(path, config)
    return written


def write_image(path, payload, config=None):
    written = atomic_write_bytes(path, payload)
    write_sidecar(path, config)
    return written


def read_sidecar(path):
    """Run config stored next to an artifact (or the sidecar file itself)."""
    path = Path(path)
    target = path if path.name.endswith(".config.json") else sidecar_path(path)
    return read_document(target)
