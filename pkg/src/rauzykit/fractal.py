"""Broken lines, Rauzy fractal point clouds, grid estimates, and exports.

Point clouds carry per-point letter labels (the natural decomposition) and
source indices.  All grid estimates quantize at a caller-chosen cell size;
CSV and SVG output is deterministic byte for byte.
"""

from __future__ import annotations

import csv
import hashlib
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from .algebra import classify_pisot
from .errors import DimensionMismatch, NotPisot, NotPrimitive
from .spectral import ProjectionOperator
from .words import InfiniteWordStream, Substitution, stream_for

#: Fixed fill palette; letters are assigned colors in sorted label order.
PALETTE = (
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
    "#e377c2", "#17becf", "#bcbd22", "#7f7f7f", "#aec7e8", "#ffbb78",
)


@dataclass(frozen=True)
class CloudMeta:
    source_id: str
    chart_id: str
    n_points: int


@dataclass(frozen=True)
class LabeledPointCloud:
    """Projected broken-line points with letter labels and source indices."""

    coords: np.ndarray        # (n, d)
    labels: tuple[str, ...]   # length n
    indices: np.ndarray       # (n,), strictly increasing
    meta: CloudMeta

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float)
        indices = np.asarray(self.indices, dtype=np.int64)
        if coords.ndim != 2:
            raise ValueError("coords must be a 2-d array")
        n = coords.shape[0]
        if len(self.labels) != n or indices.shape != (n,):
            raise ValueError("coords, labels, and indices must agree in length")
        if n > 1 and not (np.diff(indices) > 0).all():
            raise ValueError("indices must be strictly increasing")
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "indices", indices)
        object.__setattr__(self, "labels", tuple(self.labels))

    def __len__(self):
        return self.coords.shape[0]

    @property
    def dimension(self) -> int:
        return self.coords.shape[1]

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        if len(self) == 0:
            z = np.zeros(self.dimension)
            return z, z
        return self.coords.min(axis=0), self.coords.max(axis=0)

    def diameter(self) -> float:
        """Length of the bounding-box diagonal; relative tolerances reference this."""
        lo, hi = self.bounding_box()
        return float(np.linalg.norm(hi - lo))

    def label_set(self) -> tuple[str, ...]:
        return tuple(sorted(set(self.labels)))


def chart_id_of(operator: ProjectionOperator) -> str:
    digest = hashlib.sha256(np.ascontiguousarray(operator.chart).tobytes()).hexdigest()
    return digest[:12]


def broken_line_prefix_sums(stream: InfiniteWordStream, n: int) -> np.ndarray:
    """Entry m is the exact integer vector sum of basis steps e_{u_0}..e_{u_m}."""
    if n < 1:
        raise ValueError("need at least one point")
    idx = stream.prefix_indices(n)
    k = stream.substitution.alphabet.size
    steps = np.zeros((n, k), dtype=np.int64)
    steps[np.arange(n), idx] = 1
    return np.cumsum(steps, axis=0)


def _project_chunked(op: ProjectionOperator, sums: np.ndarray, threads: int) -> np.ndarray:
    if threads <= 1 or sums.shape[0] < 2 * threads:
        return op.project_many(sums)
    chunks = np.array_split(np.arange(sums.shape[0]), threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda sl: op.project_many(sums[sl]), chunks))
    return np.vstack(parts)


def rauzy_cloud(
    substitution: Substitution,
    n: int,
    op: ProjectionOperator,
    *,
    threads: int = 1,
    stream: InfiniteWordStream | None = None,
) -> LabeledPointCloud:
    """First n projected broken-line points of the fixed point, labeled by the
    letter read at each step.

    Deterministic for fixed substitution, n, and chart (and any thread count).
    """
    report = classify_pisot(substitution)
    if not report.is_primitive:
        raise NotPrimitive("fractal generation needs a primitive substitution")
    if not (report.is_pisot and report.is_unimodular):
        raise NotPisot("fractal generation needs a unimodular Pisot substitution")
    if stream is None:
        stream = stream_for(substitution)
    sums = broken_line_prefix_sums(stream, n)
    coords = _project_chunked(op, sums, threads)
    letters = substitution.alphabet.letters
    idx = stream.prefix_indices(n)
    labels = tuple(letters[i] for i in idx)
    meta = CloudMeta(source_id=substitution.rule_text(), chart_id=chart_id_of(op), n_points=n)
    return LabeledPointCloud(coords, labels, np.arange(n, dtype=np.int64), meta)


def reflect_cloud(cloud: LabeledPointCloud) -> LabeledPointCloud:
    """Negate every coordinate; labels and indices are preserved."""
    return LabeledPointCloud(-cloud.coords, cloud.labels, cloud.indices, cloud.meta)


class GridIndex:
    """Occupied grid cells of a cloud at cell size eps, with per-label counts.

    The cell of a point is floor(coordinate / eps) componentwise.
    """

    def __init__(self, eps: float, cells: dict[tuple[int, ...], dict[str, int]]):
        if eps <= 0:
            raise ValueError("cell size must be positive")
        self.eps = eps
        self.cells = cells

    @classmethod
    def from_cloud(cls, cloud: LabeledPointCloud, eps: float) -> "GridIndex":
        if eps <= 0:
            raise ValueError("cell size must be positive")
        cells: dict[tuple[int, ...], dict[str, int]] = {}
        if len(cloud):
            keys = np.floor(cloud.coords / eps).astype(np.int64)
            for row, label in zip(keys, cloud.labels):
                cell = tuple(int(v) for v in row)
                per = cells.setdefault(cell, {})
                per[label] = per.get(label, 0) + 1
        return cls(eps, cells)

    def occupied_cells(self) -> frozenset[tuple[int, ...]]:
        return frozenset(self.cells)

    def total_points(self) -> int:
        return sum(sum(per.values()) for per in self.cells.values())

    def cells_for_label(self, label: str) -> frozenset[tuple[int, ...]]:
        return frozenset(c for c, per in self.cells.items() if label in per)


def _cell_array(cells: frozenset[tuple[int, ...]]) -> np.ndarray:
    return np.array(sorted(cells), dtype=float)


def hausdorff_distance(a: LabeledPointCloud, b: LabeledPointCloud, eps: float) -> float:
    """Symmetric grid Hausdorff estimate between occupied cell sets, quantized at eps.

    Zero exactly when the occupied cell sets coincide; infinite when exactly
    one cloud is empty.
    """
    if a.dimension != b.dimension:
        raise DimensionMismatch(f"dimensions {a.dimension} and {b.dimension} differ")
    cells_a = GridIndex.from_cloud(a, eps).occupied_cells()
    cells_b = GridIndex.from_cloud(b, eps).occupied_cells()
    if not cells_a and not cells_b:
        return 0.0
    if not cells_a or not cells_b:
        return math.inf
    if cells_a == cells_b:
        return 0.0
    arr_a, arr_b = _cell_array(cells_a), _cell_array(cells_b)
    d_ab, _ = cKDTree(arr_b).query(arr_a)
    d_ba, _ = cKDTree(arr_a).query(arr_b)
    return eps * float(max(d_ab.max(), d_ba.max()))


@dataclass(frozen=True)
class IntersectionEstimate:
    cells: frozenset[tuple[int, ...]]
    cell_count: int
    cell_size: float
    area: float


def grid_intersection_estimate(
    a: LabeledPointCloud, b: LabeledPointCloud, eps: float
) -> IntersectionEstimate:
    """Cells occupied by both clouds; area estimate is count * eps^d."""
    if a.dimension != b.dimension:
        raise DimensionMismatch(f"dimensions {a.dimension} and {b.dimension} differ")
    common = GridIndex.from_cloud(a, eps).occupied_cells() & GridIndex.from_cloud(b, eps).occupied_cells()
    return IntersectionEstimate(
        cells=common,
        cell_count=len(common),
        cell_size=eps,
        area=len(common) * eps ** max(a.dimension, 1),
    )


def negate_cells(cells: frozenset[tuple[int, ...]]) -> frozenset[tuple[int, ...]]:
    """Image of a cell set under point reflection: cell c maps to -c - 1."""
    return frozenset(tuple(-v - 1 for v in cell) for cell in cells)


# ---------------------------------------------------------------------------
# exports


def export_csv(cloud: LabeledPointCloud, path) -> None:
    """Columns n, letter, x1..xd with 9 significant digits; byte deterministic."""
    d = cloud.dimension
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["n", "letter"] + [f"x{i + 1}" for i in range(d)])
        for n, label, row in zip(cloud.indices, cloud.labels, cloud.coords):
            writer.writerow([int(n), label] + [format(v, ".9g") for v in row])


def load_csv(path) -> LabeledPointCloud:
    """Parse a cloud previously written by export_csv."""
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        d = len(header) - 2
        indices, labels, coords = [], [], []
        for row in reader:
            indices.append(int(row[0]))
            labels.append(row[1])
            coords.append([float(v) for v in row[2:]])
    arr = np.array(coords, dtype=float) if coords else np.zeros((0, d))
    return LabeledPointCloud(
        arr.reshape(len(labels), d),
        tuple(labels),
        np.array(indices, dtype=np.int64),
        CloudMeta(source_id="csv", chart_id="", n_points=len(labels)),
    )


def _fmt(v: float) -> str:
    return format(v, ".6g")


def render_svg(
    clouds: Sequence[LabeledPointCloud],
    path,
    palette: Sequence[str] = PALETTE,
    *,
    point_radius: float | None = None,
) -> None:
    """One circle per point, one group per cloud, deterministic palette per letter.

    Clouds of dimension 1 render on the horizontal axis; dimensions above 2
    are rejected.  The viewBox fits the data with a 5 percent margin.
    """
    planar: list[np.ndarray] = []
    for cloud in clouds:
        if cloud.dimension > 2:
            raise ValueError("svg rendering supports 1-d and 2-d clouds only")
        pts = cloud.coords
        if cloud.dimension < 2:
            pad = np.zeros((pts.shape[0], 2 - cloud.dimension))
            pts = np.hstack([pts.reshape(pts.shape[0], cloud.dimension), pad])
        planar.append(np.column_stack([pts[:, 0], -pts[:, 1]]))  # svg y grows downward

    occupied = [p for p in planar if p.shape[0]]
    if occupied:
        alldata = np.vstack(occupied)
        lo, hi = alldata.min(axis=0), alldata.max(axis=0)
        span = np.maximum(hi - lo, 1e-9)
        margin = 0.05 * span
        lo, hi = lo - margin, hi + margin
        diam = float(np.linalg.norm(hi - lo))
    else:
        lo, hi = np.zeros(2), np.ones(2)
        diam = math.sqrt(2.0)
    radius = point_radius if point_radius is not None else 0.01 * diam

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{_fmt(lo[0])} {_fmt(lo[1])} '
        f'{_fmt(hi[0] - lo[0])} {_fmt(hi[1] - lo[1])}">',
    ]
    color_cursor = 0
    for ci, (cloud, pts) in enumerate(zip(clouds, planar)):
        labels = cloud.label_set()
        colors = {
            label: palette[(color_cursor + rank) % len(palette)]
            for rank, label in enumerate(labels)
        }
        color_cursor += len(labels)
        lines.append(f'<g id="cloud{ci}">')
        for (x, y), label in zip(pts, cloud.labels):
            lines.append(
                f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="{_fmt(radius)}" '
                f'fill="{colors[label]}"/>'
            )
        lines.append("</g>")
    lines.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write("\n".join(lines) + "\n")
