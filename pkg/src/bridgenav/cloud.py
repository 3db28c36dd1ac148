"""Point cloud container and file formats (CSV, ASCII PLY)."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import CloudParseError


@dataclass
class PointCloud:
    """Planar points in meters with optional per-point intensity."""

    points: np.ndarray
    intensity: np.ndarray | None = None

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 2)
        if not np.all(np.isfinite(self.points)):
            raise CloudParseError("cloud contains non-finite coordinates")
        if self.intensity is not None:
            self.intensity = np.asarray(self.intensity, dtype=float).reshape(-1)
            if len(self.intensity) != len(self.points):
                raise CloudParseError("intensity length does not match point count")

    def __len__(self) -> int:
        return len(self.points)


def read_cloud(path: str | Path) -> PointCloud:
    path = Path(path)
    if path.suffix.lower() == ".ply":
        return read_ply(path)
    return read_csv(path)


def read_csv(path: str | Path) -> PointCloud:
    """CSV with header ``x,y`` (optionally ``x,y,intensity``), one point per line."""
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise CloudParseError("empty cloud file")
    header = [h.strip().lower() for h in lines[0].split(",")]
    if header[:2] != ["x", "y"]:
        raise CloudParseError(f"expected header starting with x,y got {lines[0]!r}", line=1)
    with_intensity = len(header) >= 3 and header[2] == "intensity"
    pts: list[tuple[float, float]] = []
    inten: list[float] = []
    for i, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        cells = raw.split(",")
        try:
            x, y = float(cells[0]), float(cells[1])
        except (ValueError, IndexError) as exc:
            raise CloudParseError(f"cannot parse point: {raw!r}", line=i) from exc
        pts.append((x, y))
        if with_intensity:
            try:
                inten.append(float(cells[2]))
            except (ValueError, IndexError) as exc:
                raise CloudParseError(f"cannot parse intensity: {raw!r}", line=i) from exc
    if not pts:
        raise CloudParseError("cloud file has no points")
    return PointCloud(np.array(pts), np.array(inten) if with_intensity else None)


def write_csv(cloud: PointCloud, path: str | Path) -> None:
    rows = ["x,y,intensity" if cloud.intensity is not None else "x,y"]
    for i, (x, y) in enumerate(cloud.points):
        if cloud.intensity is not None:
            rows.append(f"{float(x)!r},{float(y)!r},{float(cloud.intensity[i])!r}")
        else:
            rows.append(f"{float(x)!r},{float(y)!r}")
    Path(path).write_text("\n".join(rows) + "\n")


def read_ply(path: str | Path) -> PointCloud:
    """ASCII PLY; x and y properties are used, anything else is ignored."""
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0].strip() != "ply":
        raise CloudParseError("not a PLY file", line=1)
    n_vertices = None
    props: list[str] = []
    body_start = None
    in_vertex_element = False
    for i, raw in enumerate(lines[1:], start=2):
        token = raw.strip()
        if token.startswith("format"):
            if "ascii" not in token:
                raise CloudParseError("only ascii PLY is supported", line=i)
        elif token.startswith("element"):
            parts = token.split()
            in_vertex_element = parts[1] == "vertex"
            if in_vertex_element:
                n_vertices = int(parts[2])
        elif token.startswith("property") and in_vertex_element:
            props.append(token.split()[-1])
        elif token == "end_header":
            body_start = i
            break
    if n_vertices is None or body_start is None:
        raise CloudParseError("PLY header missing vertex element")
    try:
        ix, iy = props.index("x"), props.index("y")
    except ValueError as exc:
        raise CloudParseError("PLY vertex element lacks x/y properties") from exc
    pts = []
    for i, raw in enumerate(lines[body_start : body_start + n_vertices], start=body_start + 1):
        cells = raw.split()
        try:
            pts.append((float(cells[ix]), float(cells[iy])))
        except (ValueError, IndexError) as exc:
            raise CloudParseError(f"cannot parse vertex: {raw!r}", line=i) from exc
    if len(pts) != n_vertices:
        raise CloudParseError("PLY body shorter than declared vertex count")
    return PointCloud(np.array(pts))


def mean_nn_spacing(points: np.ndarray) -> float:
    """Mean nearest-neighbor distance of the cloud."""
    from scipy.spatial import cKDTree

    pts = np.asarray(points, dtype=float)
    if len(pts) < 2:
        return 0.0
    tree = cKDTree(pts)
    d, _ = tree.query(pts, k=2)
    return float(np.mean(d[:, 1]))
