# app.py
"""
Kleinian Group Toolkit command line.

Every subcommand builds a RunConfig, computes all artifacts in memory and only
then writes them (atomically, each with a sidecar holding the exact config).
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import click
import numpy as np
import pandas as pd

from components.raster_components import rasterize_cloud, rasterize_tiles
from components.report_components import echo_artifacts, echo_error, echo_summary
from config.constants import APP_NAME, APP_VERSION, L0_ORDER_PROBE
from config.logging_config import setup_logging
from config.run_config import RasterSpec, build_run_config, read_document
from utils.cluster_utils import PointCloud
from utils.errors import ConfigSchemaError, DimensionMismatchError, UnsupportedCaseError, exit_code_for
from utils.exact_utils import format_vector
from utils.hyperbolic_utils import cg_limit, kulkarni_from_cg, tangency_residual
from utils.io_utils import read_input, read_sidecar, staged_directory, validate_document, write_csv, write_image, write_json
from utils.kulkarni_utils import (
    KulkarniParams,
    approx_kulkarni,
    closed_form_cyclic_diag,
    closed_form_toral,
    closed_form_translation,
    cross_check,
    cyclic_regions,
)
from utils.moebius_utils import Moebius, classify, moebius_fixed_points, multiplier
from utils.pappus_utils import (
    PappusConfig,
    complex_pappus_experiment,
    config_from_affine,
    dual_points_to_float,
    incidence_certificate,
    iterate_configs,
    pappus_line,
    schwartz_generators,
)
from utils.projective_utils import fixed_points, point_from_json
from utils.schottky_utils import (
    SchottkyConfigP1,
    build_mirror_group,
    limit_points_p1,
    orbit_cloud_p3,
    ping_pong_check,
    standard_config,
    standard_mirror_lines,
    validate_schottky_p1,
)
from utils.tiling_utils import (
    GeodesicTriangle,
    Geometry,
    TriangleSpec,
    build_triangle,
    classify_spec,
    enumerate_tiles,
    triangle_area,
)
from utils.word_utils import GeneratorSet, order_probe

logger = logging.getLogger(__name__)

UNIT_DISC = [-1.05, -1.05, 1.05, 1.05]
WORKED_PAPPUS = {"p": (0, 0), "b": (1, 0), "q": (3, 0), "r": (0, 1), "t": (2, 1), "s": (5, 1)}

# ------------------------
# Run outcome
# ------------------------


@dataclass
class Outcome:
    """Summary plus named artifacts, all computed before anything is written."""

    title: str
    summary: dict = field(default_factory=dict)
    json: dict = field(default_factory=dict)
    csv: dict = field(default_factory=dict)
    images: dict = field(default_factory=dict)


def raster_spec(cfg, viewport=None):
    if cfg.raster is not None:
        return cfg.raster
    return RasterSpec(viewport=tuple(viewport)) if viewport else RasterSpec()


def add_image(outcome, name, result, spec):
    outcome.images[f"{name}.ppm"] = result.to_ppm()
    if spec.png:
        outcome.images[f"{name}.png"] = result.to_png()
    outcome.summary["raster"] = result.summary()


def load_generators(cfg):
    """Generator set from the input file or from inline params."""
    if cfg.input:
        doc = read_input(cfg.input, "generator_set")
    else:
        doc = validate_document({k: cfg.params[k] for k in ("dim", "generators", "labels") if k in cfg.params}, "generator_set")
    return GeneratorSet.from_json(doc)


# ------------------------
# Commands
# ------------------------


def describe_element(label, g):
    """Conjugacy type of one generator: trace test on P¹, eigen-structure above."""
    if g.dim == 1:
        m = Moebius.from_matrix(g)
        points = [str(z) for z in moebius_fixed_points(m)]
        k = multiplier(m)
        return {"label": label, "kind": classify(m).value, "multiplier": [k.real, k.imag], "fixed_points": points}
    fp = fixed_points(g)
    mods = np.abs(fp.eigenvalues)
    order, _ = order_probe(g, L0_ORDER_PROBE)
    if order is not None:
        kind = "identity" if order == 1 else f"finite order {order}"
    elif mods.max() > mods.min() * (1 + 1e-9):
        kind = "loxodromic"
    elif fp.defective:
        kind = "parabolic"
    else:
        kind = "elliptic"
    return {
        "label": label,
        "kind": kind,
        "eigenvalue_moduli": sorted(float(x) for x in mods),
        "fixed_points": [p.to_json() for p in fp.points + fp.generalized],
        "defective": bool(fp.defective),
    }


def run_classify(cfg):
    gens = load_generators(cfg)
    rows = [describe_element(label, g) for label, g in zip(gens.labels, gens.generators)]
    outcome = Outcome("classification")
    outcome.summary = {row["label"]: row["kind"] for row in rows}
    outcome.json["classify.json"] = {"dim": gens.dim, "elements": rows}
    return outcome


def run_tile(cfg):
    p, q, r = (int(cfg.params.get(name, default)) for name, default in (("p", 2), ("q", 3), ("r", 7)))
    spec = TriangleSpec(p, q, r)
    triangle = build_triangle(spec)
    tiles = enumerate_tiles(triangle, cfg.depth, progress=cfg.progress)
    geometry = classify_spec(spec)
    outcome = Outcome(f"triangle group {spec}")
    outcome.summary = {"geometry": geometry.value, "depth": cfg.depth, "tiles": len(tiles)}
    if geometry == Geometry.SPHERICAL:
        outcome.summary["total_area"] = float(sum(triangle_area(t) for t in tiles))
    outcome.json["tiles.json"] = {"spec": [p, q, r], "geometry": geometry.value, "tiles": [t.to_json() for t in tiles]}
    viewport = UNIT_DISC if geometry == Geometry.HYPERBOLIC else None
    spec_r = raster_spec(cfg, viewport)
    add_image(outcome, "tiles", rasterize_tiles(tiles, spec_r), spec_r)
    return outcome


def run_schottky(cfg):
    params = cfg.params
    rng = np.random.default_rng(cfg.seed)
    spec = raster_spec(cfg)
    if params.get("family") == "mirror":
        strengths = [float(x) for x in params.get("strengths", [2.0, 2.0])]
        pairs = standard_mirror_lines()
        if len(strengths) > len(pairs):
            raise ConfigSchemaError(f"At most {len(pairs)} mirror strengths are supported", strengths=strengths)
        mirror = build_mirror_group(pairs[: len(strengths)], strengths)
        cloud = orbit_cloud_p3(mirror, cfg.depth, cfg.grid, rng, k=cfg.k, eps=cfg.eps)
        outcome = Outcome("mirror Schottky group of P^3")
        outcome.summary = {"genus": mirror.genus, "cluster_points": len(cloud), "tube_excess": cloud.tolerance}
        outcome.json["mirror.json"] = {"config": mirror.to_json(), "cluster_points": len(cloud), "tube_excess": cloud.tolerance}
        outcome.csv["mirror_cloud.csv"] = cloud.to_frame()
        add_image(outcome, "mirror", rasterize_cloud(cloud, spec, cfg.chart), spec)
        return outcome

    if cfg.input:
        config = SchottkyConfigP1.from_json(read_input(cfg.input, "schottky_config"))
    else:
        config = standard_config(int(params.get("genus", 2)), float(params.get("radius", 0.25)))
    report = validate_schottky_p1(config)
    cloud = limit_points_p1(config, cfg.depth)
    ping_pong = ping_pong_check(config, cfg.grid, rng)
    outcome = Outcome(f"Schottky group of genus {config.genus}")
    outcome.summary = {"verdict": report.verdict, "limit_points": len(cloud), "ping_pong_failures": len(ping_pong)}
    outcome.json["schottky.json"] = {
        "config": config.to_json(),
        "verdict": report.verdict,
        "failures": report.failures,
        "ping_pong": ping_pong,
        "depth": cfg.depth,
    }
    outcome.csv["schottky_limit.csv"] = cloud.to_frame()
    add_image(outcome, "schottky", rasterize_cloud(cloud, spec, chart=1), spec)
    return outcome


def select_closed_form(gens, choice):
    """Closed form to compare against; "auto" picks the cyclic one when it applies."""
    if choice == "none":
        return None
    if choice == "translation":
        return closed_form_translation()
    if choice == "toral":
        return closed_form_toral()
    m = gens.generators[0].matrix
    diagonal = gens.rank == 1 and gens.dim == 2 and np.allclose(m, np.diag(np.diag(m)), atol=1e-12)
    if choice == "cyclic" and not diagonal:
        raise UnsupportedCaseError("The cyclic closed form needs a single diagonal generator of P^2")
    if not diagonal:
        return None
    try:
        return closed_form_cyclic_diag(np.diag(m))
    except UnsupportedCaseError:
        if choice == "cyclic":
            raise
        return None


def kulkarni_params(cfg):
    extra = cfg.params.get("kulkarni", {})
    try:
        return KulkarniParams(depth=cfg.depth, grid=cfg.grid, eps=cfg.eps, k=cfg.k, seed=cfg.seed, **extra)
    except TypeError as e:
        raise ConfigSchemaError(f"Unknown Kulkarni parameter: {e}", params=sorted(extra))


def run_kulkarni(cfg):
    gens = load_generators(cfg)
    choice = cfg.params.get("closed_form", "auto")
    if choice not in ("auto", "cyclic", "translation", "toral", "none"):
        raise ConfigSchemaError(f"Unknown closed form {choice!r}")
    params = kulkarni_params(cfg)
    closed = select_closed_form(gens, choice)
    if closed is not None:
        approx, distance = cross_check(gens, closed, params, progress=cfg.progress)
    else:
        approx, distance = approx_kulkarni(gens, params, progress=cfg.progress), None

    outcome = Outcome(f"Kulkarni limit set of {gens.rank} generator(s) in P^{gens.dim}")
    outcome.summary = {"layers": approx.counts(), "lines": len(approx.lines)}
    document = {"generators": gens.to_json(), "approximation": {k: v for k, v in approx.to_json().items() if k != "cloud"}}
    if closed is not None:
        closed_json = closed.to_json()
        outcome.summary.update(shape=closed_json["shape"], lin=closed_json["lin"], ling=closed_json["ling"], hausdorff=distance)
        document.update(closed_form=closed_json, hausdorff=distance)
        if closed.description.startswith("cyclic"):
            document["regions"] = {name: region.describe() for name, region in cyclic_regions(np.diag(gens.generators[0].matrix)).items()}
    outcome.json["kulkarni.json"] = document
    outcome.csv["kulkarni_cloud.csv"] = approx.cloud.to_frame()
    spec = raster_spec(cfg)
    if gens.dim >= 2:
        add_image(outcome, "kulkarni", rasterize_cloud(approx.cloud, spec, cfg.chart, approx.lines), spec)
    else:
        add_image(outcome, "kulkarni", rasterize_cloud(approx.cloud, spec, chart=1), spec)
    return outcome


def run_cg_limit(cfg):
    gens = load_generators(cfg)
    if gens.dim != 2:
        raise DimensionMismatchError(f"Chen-Greenberg limit sets live in P^2, got P^{gens.dim}")
    base = point_from_json(cfg.params.get("base", [[0, 0], [0, 0], [1, 0]]))
    approx = cg_limit(gens, base, cfg.depth, eps=cfg.eps, k=cfg.k)
    lines = kulkarni_from_cg(approx)
    residuals = [tangency_residual(line, z) for line, z in zip(lines, approx.points.points())]
    outcome = Outcome("complex hyperbolic limit set")
    outcome.summary = {"cluster_points": len(approx.points), "tangent_lines": len(lines)}
    if residuals:
        outcome.summary["max_tangency_residual"] = float(max(residuals))
    outcome.json["cg_limit.json"] = {
        **approx.to_json(),
        "tangent_lines": [line.to_json() for line in lines],
        "tangency_residuals": residuals,
    }
    outcome.csv["cg_limit.csv"] = approx.points.to_frame()
    spec = raster_spec(cfg, UNIT_DISC)
    add_image(outcome, "cg_limit", rasterize_cloud(approx.points, spec, chart=2), spec)
    return outcome


def load_pappus(cfg):
    if cfg.input:
        return PappusConfig.from_json(read_input(cfg.input, "pappus_config"))
    names = ("p", "b", "q", "r", "t", "s")
    if all(name in cfg.params for name in names):
        return PappusConfig.from_json(validate_document({n: cfg.params[n] for n in names}, "pappus_config"))
    return config_from_affine(*(WORKED_PAPPUS[n] for n in names))


def run_pappus(cfg):
    config = load_pappus(cfg)
    line, points = pappus_line(config)
    result = iterate_configs(config, cfg.depth, strict=cfg.params.get("strict", True), progress=cfg.progress)
    outcome = Outcome("Pappus iteration")
    outcome.summary = {"collinear": incidence_certificate(config), "depth": cfg.depth, "dual_points": len(result), "degenerate_nodes": len(result.failures)}
    document = {
        "config": config.to_json(),
        "pappus_line": format_vector(line),
        "points": [format_vector(x) for x in points],
        "collinear": outcome.summary["collinear"],
        "iteration": result.to_json(),
    }
    if config.is_real():
        generators = schwartz_generators(config)
        document["schwartz"] = generators.to_json()
        outcome.summary["relations_holding"] = sum(bool(v) for v in generators.report.values())
    outcome.json["pappus.json"] = document
    outcome.csv["pappus_dual.csv"] = result.to_frame()

    experiment = cfg.params.get("experiment")
    if experiment:
        rng = np.random.default_rng(cfg.seed)
        frame = complex_pappus_experiment(
            int(experiment.get("trials", 10)),
            int(experiment.get("depth", min(cfg.depth, 4))),
            rng,
            complex_entries=bool(experiment.get("complex", True)),
        )
        outcome.csv["pappus_experiment.csv"] = frame
        outcome.summary["experiment_all_collinear"] = bool(frame["collinear"].all()) if len(frame) else True

    cloud = PointCloud(dual_points_to_float(result.dual_points), 2)
    spec = raster_spec(cfg)
    add_image(outcome, "pappus_dual", rasterize_cloud(cloud, spec, cfg.chart), spec)
    return outcome


def tiles_from_json(doc):
    tiles = []
    for item in doc["tiles"]:
        geometry = Geometry(item["geometry"])
        verts = np.array(item["vertices"], dtype=float)
        if geometry != Geometry.SPHERICAL:
            verts = verts[:, 0] + 1j * verts[:, 1]
        tiles.append(GeodesicTriangle(geometry, verts, int(item.get("depth", 0))))
    return tiles


def run_render(cfg):
    if not cfg.input:
        raise ConfigSchemaError("render needs an input file (point cloud CSV or tiles JSON)")
    path = Path(cfg.input)
    spec = raster_spec(cfg)
    outcome = Outcome(f"render {path.name}")
    if path.suffix.lower() == ".csv":
        cloud = PointCloud.from_frame(pd.read_csv(path, keep_default_na=False))
        result = rasterize_cloud(cloud, spec, cfg.chart)
        outcome.summary["points"] = len(cloud)
    else:
        doc = read_document(path)
        if "tiles" not in doc:
            raise ConfigSchemaError("A JSON render input needs a 'tiles' list", path=str(path))
        try:
            tiles = tiles_from_json(doc)
        except (KeyError, ValueError, IndexError) as e:
            raise ConfigSchemaError(f"Malformed tiles document: {e}", path=str(path))
        result = rasterize_tiles(tiles, spec)
        outcome.summary["tiles"] = len(tiles)
    add_image(outcome, "render", result, spec)
    return outcome


HANDLERS = {
    "classify": run_classify,
    "tile": run_tile,
    "schottky": run_schottky,
    "kulkarni": run_kulkarni,
    "cg-limit": run_cg_limit,
    "pappus": run_pappus,
    "render": run_render,
}


# ------------------------
# Execution and artifacts
# ------------------------


def write_outcome(cfg, outcome):
    """Write every artifact into a staging directory, then move them into the output directory."""
    out = Path(cfg.output)
    names = []
    with staged_directory(out) as stage:
        for name, data in outcome.json.items():
            names.append(write_json(stage / name, data, cfg).name)
        for name, frame in outcome.csv.items():
            names.append(write_csv(stage / name, frame, cfg).name)
        for name, payload in outcome.images.items():
            names.append(write_image(stage / name, payload, cfg).name)
    return [out / name for name in names]


def execute(cfg):
    """Compute every artifact of a run, then write them."""
    logger.info("running %s into %s", cfg.command, cfg.output)
    outcome = HANDLERS[cfg.command](cfg)
    return outcome, write_outcome(cfg, outcome)


def fail(ctx, exc):
    """Report a known failure on stderr and exit with its code; re-raise anything else."""
    code = exit_code_for(exc)
    if code is None:
        raise exc
    echo_error(exc)
    ctx.exit(code)


def load_document(ctx, reader, path):
    try:
        data = reader(path)
        if not isinstance(data, dict):
            raise ConfigSchemaError("A run config must be an object", path=str(path))
        return data
    except Exception as e:
        fail(ctx, e)


def run_document(ctx, data):
    """Validate a raw run document, execute it and map failures to exit codes."""
    try:
        cfg = build_run_config(validate_document(data, "run_config"))
        outcome, written = execute(cfg)
    except Exception as e:
        fail(ctx, e)
    echo_summary(outcome.title, outcome.summary)
    echo_artifacts(written)


# ------------------------
# Command line
# ------------------------


def parse_viewport(ctx, param, value):
    if value is None:
        return None
    try:
        parts = [float(x) for x in value.split(",")]
    except ValueError:
        raise click.BadParameter("expected x0,y0,x1,y1")
    if len(parts) != 4:
        raise click.BadParameter("expected x0,y0,x1,y1")
    return parts


def parse_json_option(ctx, param, value):
    if value is None:
        return None
    try:
        return json.loads(value)
    except json.JSONDecodeError as e:
        raise click.BadParameter(f"invalid JSON: {e}")


def common_options(f):
    options = [
        click.option("--input", "input_path", type=click.Path(dir_okay=False), help="Input document (JSON/TOML/CSV)."),
        click.option("--out", "output", help="Output directory."),
        click.option("--depth", type=int),
        click.option("--grid", type=int, help="Sample count."),
        click.option("--eps", type=float, help="Cluster radius (fs)."),
        click.option("--k", type=int, help="Cluster neighbour count."),
        click.option("--seed", type=int),
        click.option("--chart", type=int, help="Affine chart index."),
        click.option("--width", type=int),
        click.option("--height", type=int),
        click.option("--viewport", callback=parse_viewport, help="x0,y0,x1,y1"),
        click.option("--png", is_flag=True, help="Also write a PNG."),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def build_document(ctx, command, options, params=None):
    """Run document from the given flags; unset flags keep their defaults."""
    data = {"command": command}
    keys = {"input_path": "input", "output": "output", "depth": "depth", "grid": "grid", "eps": "eps", "k": "k", "seed": "seed", "chart": "chart"}
    for option, key in keys.items():
        if options.get(option) is not None:
            data[key] = options[option]
    raster = {key: options[key] for key in ("width", "height", "viewport") if options.get(key) is not None}
    if options.get("png"):
        raster["png"] = True
    if raster:
        data["raster"] = raster
    if params:
        data["params"] = params
    if ctx.obj.get("progress"):
        data["progress"] = True
    return data


@click.group()
@click.version_option(APP_VERSION, prog_name=APP_NAME)
@click.option("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR.")
@click.option("--progress", is_flag=True, help="Show progress bars for long enumerations.")
@click.pass_context
def cli(ctx, log_level, progress):
    """Discrete groups of projective transformations: limit sets, tilings, Pappus iteration."""
    setup_logging(log_level)
    ctx.ensure_object(dict)
    ctx.obj["progress"] = progress


@cli.command("classify")
@common_options
@click.option("--matrix", callback=parse_json_option, help="One matrix as JSON, e.g. [[1,1],[0,1]].")
@click.pass_context
def classify_command(ctx, matrix, **options):
    """Conjugacy type of each generator."""
    params = {"generators": [matrix]} if matrix is not None else None
    run_document(ctx, build_document(ctx, "classify", options, params))


@cli.command("tile")
@common_options
@click.argument("p", type=int)
@click.argument("q", type=int)
@click.argument("r", type=int)
@click.pass_context
def tile_command(ctx, p, q, r, **options):
    """Tiling by the (p, q, r) reflection triangle group."""
    run_document(ctx, build_document(ctx, "tile", options, {"p": p, "q": q, "r": r}))


@cli.command("schottky")
@common_options
@click.option("--genus", type=int, default=2, show_default=True)
@click.option("--radius", type=float, default=0.25, show_default=True)
@click.option("--mirror", is_flag=True, help="Mirror-line Schottky group of P^3 instead.")
@click.option("--strength", "strengths", type=float, multiple=True, help="Mirror strength (repeatable).")
@click.pass_context
def schottky_command(ctx, genus, radius, mirror, strengths, **options):
    """Schottky limit points on P^1, or mirror-group cluster points in P^3."""
    params = {"genus": genus, "radius": radius}
    if mirror:
        params = {"family": "mirror", "strengths": list(strengths) or [2.0, 2.0]}
    run_document(ctx, build_document(ctx, "schottky", options, params))


@cli.command("kulkarni")
@common_options
@click.option(
    "--closed-form",
    type=click.Choice(["auto", "cyclic", "translation", "toral", "none"]),
    default="auto",
    show_default=True,
)
@click.pass_context
def kulkarni_command(ctx, closed_form, **options):
    """Kulkarni limit set layers, cross-checked against a closed form when one applies."""
    run_document(ctx, build_document(ctx, "kulkarni", options, {"closed_form": closed_form}))


@cli.command("cg-limit")
@common_options
@click.option("--base", callback=parse_json_option, help="Base point as [[re, im], ...].")
@click.pass_context
def cg_limit_command(ctx, base, **options):
    """Orbit cluster points of a PU(2,1) group and their tangent lines."""
    params = {"base": base} if base is not None else {}
    run_document(ctx, build_document(ctx, "cg-limit", options, params))


@cli.command("pappus")
@common_options
@click.option("--trials", type=int, default=0, help="Also run the random-config experiment.")
@click.option("--real-only", is_flag=True, help="Experiment with rational instead of Gaussian-rational entries.")
@click.option("--lenient", is_flag=True, help="Skip degenerate nodes instead of failing.")
@click.pass_context
def pappus_command(ctx, trials, real_only, lenient, **options):
    """Pappus line iteration from a configuration (default: the worked seed)."""
    params = {"strict": not lenient}
    if trials:
        params["experiment"] = {"trials": trials, "complex": not real_only}
    run_document(ctx, build_document(ctx, "pappus", options, params))


@cli.command("render")
@common_options
@click.pass_context
def render_command(ctx, **options):
    """Rasterize a point-cloud CSV or a tiles JSON."""
    run_document(ctx, build_document(ctx, "render", options))


@cli.command("run")
@click.option("--config", "config_path", required=True, type=click.Path(dir_okay=False))
@click.pass_context
def run_command(ctx, config_path):
    """Run from a JSON or TOML run config."""
    data = load_document(ctx, read_document, config_path)
    if ctx.obj.get("progress"):
        data["progress"] = True
    run_document(ctx, data)


@cli.command("regenerate")
@click.argument("sidecar", type=click.Path(dir_okay=False))
@click.option("--out", "output", help="Write into another directory.")
@click.pass_context
def regenerate_command(ctx, sidecar, output):
    """Re-run the config stored in an artifact's sidecar."""
    data = load_document(ctx, read_sidecar, sidecar)
    data = {k: v for k, v in data.items() if v is not None}
    if output:
        data["output"] = output
    run_document(ctx, data)


if __name__ == "__main__":
    cli(obj={})
