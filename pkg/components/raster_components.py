"""
Rasterization of point clouds and tilings into pixmaps (PPM, optional PNG).
"""

import io
import logging
from dataclasses import dataclass

import numpy as np
from PIL import Image, ImageDraw

from config.constants import CHART_DROP_TOL
from config.run_config import RasterSpec
from utils.projective_utils import line_grid, to_chart
from utils.tiling_utils import tiles_to_polygons

logger = logging.getLogger(__name__)


@dataclass
class RasterResult:
    image: np.ndarray
    plotted: int = 0
    dropped: int = 0
    clipped: int = 0

    def to_ppm(self):
        h, w, _ = self.image.shape
        return f"P6\n{w} {h}\n255\n".encode("ascii") + self.image.astype(np.uint8).tobytes()

    def to_png(self):
        buf = io.BytesIO()
        Image.fromarray(self.image.astype(np.uint8), "RGB").save(buf, format="PNG")
        return buf.getvalue()

    def summary(self):
        return {"plotted": self.plotted, "dropped_at_infinity": self.dropped, "clipped": self.clipped}


def blank(spec):
    image = np.empty((spec.height, spec.width, 3), dtype=np.uint8)
    image[:] = spec.background
    return image


def chart_plane(coords, chart):
    """Plane coordinates of homogeneous rows in the chart z_chart = 1.

    P¹ rows give (Re z, Im z); higher dimensions give the real parts of the
    first two affine coordinates. Returns (xy, kept mask, dropped count).
    """
    coords = np.atleast_2d(np.asarray(coords, dtype=complex))
    if coords.size == 0:
        return np.zeros((0, 2)), np.zeros(0, dtype=bool), 0
    chart = min(chart, coords.shape[1] - 1)
    affine, dropped = to_chart(coords, chart)
    unit = coords / np.linalg.norm(coords, axis=1, keepdims=True)
    kept = np.abs(unit[:, chart]) >= CHART_DROP_TOL
    if affine.shape[1] == 1:
        xy = np.column_stack([affine[:, 0].real, affine[:, 0].imag])
    else:
        xy = affine[:, :2].real
    return xy, kept, dropped


def to_pixels(xy, spec):
    xmin, ymin, xmax, ymax = spec.viewport
    col = np.round((xy[:, 0] - xmin) / (xmax - xmin) * (spec.width - 1)).astype(np.int64)
    row = np.round((ymax - xy[:, 1]) / (ymax - ymin) * (spec.height - 1)).astype(np.int64)
    inside = (col >= 0) & (col < spec.width) & (row >= 0) & (row < spec.height)
    return row, col, inside


def rasterize_cloud(cloud, spec=None, chart=2, lines=()):
    """Splat the points of a cloud as 1-px dots, colored by layer tag when present.

    Lines (null-space forms) are drawn from a fixed sample of their points in
    the L2 color.
    """
    spec = spec or RasterSpec()
    image = blank(spec)
    coords = cloud.coords
    tags = list(cloud.tags) if cloud.tags is not None else [""] * len(cloud)
    for line in lines:
        extra = line_grid(line, 4 * max(spec.width, spec.height))
        coords = np.vstack([coords, extra]) if len(coords) else extra
        tags.extend(["L2"] * len(extra))
    if len(coords) == 0:
        logger.warning("empty cloud: writing a blank image")
        return RasterResult(image)
    xy, kept, dropped = chart_plane(coords, chart)
    tags = np.array(tags, dtype=object)[kept]
    row, col, inside = to_pixels(xy, spec)
    for tag in sorted(set(tags.tolist())):
        mask = (tags == tag) & inside
        image[row[mask], col[mask]] = spec.layer_colors.get(tag, spec.foreground)
    if dropped:
        logger.info("%d points near the chart's line at infinity were dropped", dropped)
    return RasterResult(image, plotted=int(inside.sum()), dropped=dropped, clipped=int((~inside).sum()))


def rasterize_polygons(polygons, spec=None, fills=None):
    """Fill closed polylines given as complex arrays in viewport coordinates."""
    spec = spec or RasterSpec()
    img = Image.new("RGB", (spec.width, spec.height), tuple(spec.background))
    draw = ImageDraw.Draw(img)
    plotted = 0
    for k, poly in enumerate(polygons):
        xy = np.column_stack([poly.real, poly.imag])
        row, col, inside = to_pixels(xy, spec)
        if not inside.any():
            continue
        fill = tuple(fills[k]) if fills is not None else tuple(spec.foreground)
        draw.polygon(list(zip(col.tolist(), row.tolist())), fill=fill, outline=tuple(spec.foreground))
        plotted += 1
    if not polygons:
        logger.warning("no polygons: writing a blank image")
    return RasterResult(np.asarray(img, dtype=np.uint8).copy(), plotted=plotted, clipped=len(polygons) - plotted)


def rasterize_tiles(tiles, spec=None):
    """Tiles filled in two colors by reflection-word parity."""
    spec = spec or RasterSpec()
    palette = [spec.layer_colors.get("L1", spec.foreground), spec.background]
    polygons, fills = [], []
    for tile in tiles:
        for poly in tiles_to_polygons([tile]):
            polygons.append(poly)
            fills.append(palette[tile.depth % 2])
    return rasterize_polygons(polygons, spec, fills)
