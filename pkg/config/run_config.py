# config/run_config.py
"""
Run configuration for the CLI. Loads JSON or TOML files, validates them with
pydantic and fills unset values from the environment (local .env optional).
"""

import json
import os
from pathlib import Path
from typing import Dict, Literal, Optional, Tuple

import toml
from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from config.constants import (
    CLUSTER_EPS,
    CLUSTER_K,
    DEFAULT_BACKGROUND,
    DEFAULT_CHART,
    DEFAULT_FOREGROUND,
    DEFAULT_HEIGHT,
    DEFAULT_SEED,
    DEFAULT_VIEWPORT,
    DEFAULT_WIDTH,
    ENV_PREFIX,
    LAYER_COLORS,
)
from utils.errors import ConfigSchemaError

COMMANDS = ("classify", "tile", "schottky", "kulkarni", "cg-limit", "pappus", "render")

Color = Tuple[int, int, int]


class RasterSpec(BaseModel):
    width: int = Field(DEFAULT_WIDTH, gt=0, le=16384)
    height: int = Field(DEFAULT_HEIGHT, gt=0, le=16384)
    viewport: Tuple[float, float, float, float] = DEFAULT_VIEWPORT
    background: Color = DEFAULT_BACKGROUND
    foreground: Color = DEFAULT_FOREGROUND
    layer_colors: Dict[str, Color] = Field(default_factory=lambda: dict(LAYER_COLORS))
    png: bool = False

    @field_validator("viewport")
    @classmethod
    def viewport_nondegenerate(cls, v):
        xmin, ymin, xmax, ymax = v
        if not (xmin < xmax and ymin < ymax):
            raise ValueError("viewport must satisfy xmin < xmax and ymin < ymax")
        return v

    @field_validator("background", "foreground")
    @classmethod
    def color_range(cls, v):
        if any(not 0 <= c <= 255 for c in v):
            raise ValueError("color channels must lie in 0..255")
        return v


class RunConfig(BaseModel):
    command: Literal[COMMANDS]
    input: Optional[str] = None
    output: str = "out"
    depth: int = Field(6, ge=0, le=200)
    grid: int = Field(2000, ge=1, le=1_000_000)
    eps: float = Field(CLUSTER_EPS, gt=0, lt=1)
    k: int = Field(CLUSTER_K, ge=1)
    seed: int = DEFAULT_SEED
    chart: int = Field(DEFAULT_CHART, ge=0, le=3)
    params: dict = Field(default_factory=dict)
    raster: Optional[RasterSpec] = None
    progress: bool = False

    @field_validator("output")
    @classmethod
    def output_nonempty(cls, v):
        if not v.strip():
            raise ValueError("output path must be nonempty")
        return v

    @model_validator(mode="after")
    def input_required(self):
        if self.command in ("kulkarni", "cg-limit", "render", "classify") and not self.input and not self.params:
            raise ValueError(f"command {self.command} needs an input file or inline params")
        return self

    def sidecar(self):
        """Exact config as written next to every artifact."""
        return self.model_dump(mode="json")


def apply_env_defaults(data):
    """Fill seed and output directory from KLEINIAN_SEED / KLEINIAN_OUT_DIR when unset."""
    load_dotenv()
    data = dict(data)
    seed = os.getenv(f"{ENV_PREFIX}SEED")
    if "seed" not in data and seed is not None:
        try:
            data["seed"] = int(seed)
        except ValueError:
            raise ConfigSchemaError(f"{ENV_PREFIX}SEED must be an integer, got {seed!r}")
    out_dir = os.getenv(f"{ENV_PREFIX}OUT_DIR")
    if "output" not in data and out_dir:
        data["output"] = out_dir
    return data


def build_run_config(data):
    try:
        return RunConfig(**apply_env_defaults(data))
    except ValidationError as e:
        raise ConfigSchemaError("Invalid run config", errors=_errors(e))


def _errors(e):
    return [f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()]


def read_document(path):
    """Parse a JSON or TOML file; malformed content is a schema error."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        if path.suffix.lower() == ".toml":
            return toml.loads(text)
        return json.loads(text)
    except (json.JSONDecodeError, toml.TomlDecodeError) as e:
        raise ConfigSchemaError(f"Cannot parse {path.name}: {e}", path=str(path))


def load_run_config(path):
    data = read_document(path)
    if not isinstance(data, dict):
        raise ConfigSchemaError("A run config must be an object", path=str(path))
    return build_run_config(data)