"""File ingestion and diagnostic exports.

Every exporter has a matching parser so artifacts round-trip exactly; all
floats are written with full round-trip precision to keep manifests
hash-stable. Only ASCII PLY is accepted.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .construct import DegreeReport
from .core import NeighborList, PointCloud, SparseAdjacency

FORMATS = ("xyz", "csv", "ply-ascii")
EXPORT_FORMATS = ("json", "csv")


class ParseError(ValueError):
    """Input file could not be parsed; message carries the line number."""


def _fmt(x: float) -> str:
    return repr(float(x))


def _json_dump(obj, path: Path) -> None:
    Path(path).write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n")


# ---------------------------------------------------------------------------
# point cloud files

def parse_cloud(path, fmt: str) -> PointCloud:
    """Read a cloud from an xyz/csv/ply-ascii file.

    For xyz and csv the first three columns are coordinates and any extra
    columns become the feature matrix. Malformed content is reported with
    its line number.
    """
    path = Path(path)
    if fmt not in FORMATS:
        raise ParseError(f"unknown format {fmt!r} (choose from {FORMATS})")
    text = path.read_text()
    if fmt in ("xyz", "csv"):
        return _parse_columns(text, sep=None if fmt == "xyz" else ",")
    return _parse_ply(text)


def _parse_columns(text: str, sep) -> PointCloud:
    rows = []
    width = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        tokens = stripped.split(sep)
        try:
            values = [float(t) for t in tokens if t != ""]
        except ValueError as exc:
            raise ParseError(f"line {lineno}: {exc}") from None
        if len(values) < 3:
            raise ParseError(f"line {lineno}: expected at least 3 columns, got {len(values)}")
        if width is None:
            width = len(values)
        elif len(values) != width:
            raise ParseError(
                f"line {lineno}: expected {width} columns, got {len(values)}"
            )
        rows.append(values)
    if not rows:
        raise ParseError("file contains no points")
    arr = np.asarray(rows, dtype=np.float64)
    feats = arr[:, 3:] if arr.shape[1] > 3 else None
    return PointCloud(arr[:, :3], feats)


def _parse_ply(text: str) -> PointCloud:
    lines = text.splitlines()
    if not lines or lines[0].strip() != "ply":
        raise ParseError("line 1: not a PLY file (missing 'ply' magic)")
    n_vertex = None
    props: list[str] = []
    in_vertex_element = False
    body_start = None
    for lineno, line in enumerate(lines[1:], start=2):
        tokens = line.strip().split()
        if not tokens:
            continue
        if tokens[0] == "format":
            if len(tokens) < 2 or tokens[1] != "ascii":
                raise ParseError(
                    f"line {lineno}: only ascii PLY is supported, got {' '.join(tokens[1:])}"
                )
        elif tokens[0] == "element":
            if len(tokens) < 3:
                raise ParseError(f"line {lineno}: malformed element declaration")
            in_vertex_element = tokens[1] == "vertex"
            if in_vertex_element:
                try:
                    n_vertex = int(tokens[2])
                except ValueError:
                    raise ParseError(f"line {lineno}: malformed vertex element") from None
        elif tokens[0] == "property" and in_vertex_element:
            if len(tokens) < 3:
                raise ParseError(f"line {lineno}: malformed property declaration")
            if tokens[1] == "list":
                raise ParseError(f"line {lineno}: list properties are not supported")
            props.append(tokens[-1])
        elif tokens[0] == "end_header":
            body_start = lineno
            break
    if body_start is None:
        raise ParseError("missing end_header")
    if n_vertex is None:
        raise ParseError("header declares no vertex element")
    for axis in ("x", "y", "z"):
        if axis not in props:
            raise ParseError(f"vertex element lacks property {axis!r}")
    coord_pos = [props.index(a) for a in ("x", "y", "z")]
    extra_pos = [p for p in range(len(props)) if p not in coord_pos]
    pts = np.empty((n_vertex, 3))
    feats = np.empty((n_vertex, len(extra_pos))) if extra_pos else None
    for row in range(n_vertex):
        lineno = body_start + 1 + row
        if lineno > len(lines):
            raise ParseError(f"line {lineno}: expected {n_vertex} vertices, file ended early")
        tokens = lines[lineno - 1].split()
        if len(tokens) != len(props):
            raise ParseError(
                f"line {lineno}: expected {len(props)} values, got {len(tokens)}"
            )
        try:
            vals = [float(t) for t in tokens]
        except ValueError as exc:
            raise ParseError(f"line {lineno}: {exc}") from None
        pts[row] = [vals[p] for p in coord_pos]
        if feats is not None:
            feats[row] = [vals[p] for p in extra_pos]
    return PointCloud(pts, feats)


def write_cloud(cloud: PointCloud, path, fmt: str) -> None:
    path = Path(path)
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}")
    width = cloud.feature_width
    if fmt in ("xyz", "csv"):
        sep = " " if fmt == "xyz" else ","
        lines = []
        for i in range(cloud.n):
            vals = list(cloud.points[i])
            if width:
                vals += list(cloud.features[i])
            lines.append(sep.join(_fmt(v) for v in vals))
        path.write_text("\n".join(lines) + "\n")
        return
    header = ["ply", "format ascii 1.0", f"element vertex {cloud.n}"]
    header += [f"property double {a}" for a in ("x", "y", "z")]
    header += [f"property double f{j}" for j in range(width)]
    header.append("end_header")
    lines = []
    for i in range(cloud.n):
        vals = list(cloud.points[i])
        if width:
            vals += list(cloud.features[i])
        lines.append(" ".join(_fmt(v) for v in vals))
    path.write_text("\n".join(header + lines) + "\n")


# ---------------------------------------------------------------------------
# degree heatmap

def export_degree_heatmap(
    report: DegreeReport, cloud: PointCloud, path, export_format: str = "json"
) -> None:
    """Per-point (x, y, z, d_out, d_in) records plus a degree summary block."""
    if len(report.out_degree) != cloud.n:
        raise ValueError("degree report and cloud are misaligned")
    path = Path(path)
    if export_format == "json":
        records = [
            {
                "index": i,
                "x": float(cloud.points[i, 0]),
                "y": float(cloud.points[i, 1]),
                "z": float(cloud.points[i, 2]),
                "out_degree": int(report.out_degree[i]),
                "in_degree": int(report.in_degree[i]),
            }
            for i in range(cloud.n)
        ]
        _json_dump({"records": records, "summary": report.summary}, path)
        return
    if export_format != "csv":
        raise ValueError(f"unknown export format {export_format!r}")
    lines = []
    for side in ("out", "in"):
        s = report.summary[side]
        lines.append(
            f"# summary,{side},min={_fmt(s['min'])},max={_fmt(s['max'])},"
            f"mean={_fmt(s['mean'])},stddev={_fmt(s['stddev'])}"
        )
    lines.append("index,x,y,z,out_degree,in_degree")
    for i in range(cloud.n):
        lines.append(
            f"{i},{_fmt(cloud.points[i, 0])},{_fmt(cloud.points[i, 1])},"
            f"{_fmt(cloud.points[i, 2])},{report.out_degree[i]},{report.in_degree[i]}"
        )
    path.write_text("\n".join(lines) + "\n")


def parse_degree_heatmap(path) -> tuple[DegreeReport, np.ndarray]:
    """Rebuild (degree report, point coordinates) from an exported heatmap."""
    path = Path(path)
    text = path.read_text()
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        recs = doc["records"]
        out_deg = np.array([r["out_degree"] for r in recs], dtype=np.int64)
        in_deg = np.array([r["in_degree"] for r in recs], dtype=np.int64)
        pts = np.array([[r["x"], r["y"], r["z"]] for r in recs])
    else:
        out_rows, in_rows, pts_rows = [], [], []
        for line in text.splitlines():
            if not line or line.startswith("#") or line.startswith("index,"):
                continue
            parts = line.split(",")
            pts_rows.append([float(parts[1]), float(parts[2]), float(parts[3])])
            out_rows.append(int(parts[4]))
            in_rows.append(int(parts[5]))
        out_deg = np.array(out_rows, dtype=np.int64)
        in_deg = np.array(in_rows, dtype=np.int64)
        pts = np.array(pts_rows)
    report = _report_from_degrees(out_deg, in_deg)
    return report, pts


def _report_from_degrees(out_deg, in_deg) -> DegreeReport:
    from .construct import _histogram, _summary

    return DegreeReport(
        out_degree=out_deg,
        in_degree=in_deg,
        out_histogram=_histogram(out_deg),
        in_histogram=_histogram(in_deg),
        summary={"out": _summary(out_deg), "in": _summary(in_deg)},
    )


# ---------------------------------------------------------------------------
# neighborhood dumps

def export_neighborhoods(
    neighbors: NeighborList,
    cloud: PointCloud,
    query_indices,
    path,
    export_format: str = "json",
    labels: np.ndarray | None = None,
) -> None:
    """Per query point: its coordinates, neighbor indices and coordinates,
    and (when part labels exist) the fraction of foreign-label neighbors."""
    query_indices = np.asarray(query_indices, dtype=np.int64)
    if len(query_indices) and (
        query_indices.min() < 0 or query_indices.max() >= neighbors.n
    ):
        raise ValueError("query index out of range")
    path = Path(path)

    def cross(i) -> float | None:
        if labels is None:
            return None
        others = neighbors[i][neighbors[i] != i]
        if len(others) == 0:
            return 0.0
        return float(np.mean(labels[others] != labels[i]))

    if export_format == "json":
        queries = []
        for i in query_indices:
            i = int(i)
            queries.append(
                {
                    "index": i,
                    "point": [float(v) for v in cloud.points[i]],
                    "neighbors": [int(j) for j in neighbors[i]],
                    "neighbor_points": [
                        [float(v) for v in cloud.points[j]] for j in neighbors[i]
                    ],
                    "cross_label_fraction": cross(i),
                }
            )
        _json_dump({"max_size": neighbors.max_size, "queries": queries}, path)
        return
    if export_format != "csv":
        raise ValueError(f"unknown export format {export_format!r}")
    lines = [f"# max_size,{neighbors.max_size}"]
    lines.append(
        "query_index,rank,neighbor_index,qx,qy,qz,nx,ny,nz,cross_label_fraction"
    )
    for i in query_indices:
        i = int(i)
        c = cross(i)
        cs = "" if c is None else _fmt(c)
        q = cloud.points[i]
        for rank, j in enumerate(neighbors[i]):
            p = cloud.points[j]
            lines.append(
                f"{i},{rank},{j},{_fmt(q[0])},{_fmt(q[1])},{_fmt(q[2])},"
                f"{_fmt(p[0])},{_fmt(p[1])},{_fmt(p[2])},{cs}"
            )
    path.write_text("\n".join(lines) + "\n")


def parse_neighborhoods(path) -> tuple[dict[int, np.ndarray], int]:
    """Rebuild {query index: neighbor indices} plus max_size from an export."""
    path = Path(path)
    text = path.read_text()
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        lists = {
            int(q["index"]): np.array(q["neighbors"], dtype=np.int64)
            for q in doc["queries"]
        }
        return lists, int(doc["max_size"])
    max_size = None
    order: dict[int, list[int]] = {}
    for line in text.splitlines():
        if line.startswith("# max_size,"):
            max_size = int(line.split(",")[1])
            continue
        if not line or line.startswith("#") or line.startswith("query_index,"):
            continue
        parts = line.split(",")
        order.setdefault(int(parts[0]), []).append(int(parts[2]))
    if max_size is None:
        raise ParseError("missing max_size header")
    return {i: np.array(l, dtype=np.int64) for i, l in order.items()}, max_size


# ---------------------------------------------------------------------------
# adjacency dumps

def export_adjacency(adj: SparseAdjacency, path, export_format: str = "json") -> None:
    path = Path(path)
    rows = np.repeat(np.arange(adj.n, dtype=np.int64), adj.row_lengths())
    if export_format == "json":
        entries = [
            [int(i), int(j), float(w)]
            for i, j, w in zip(rows, adj.indices, adj.data)
        ]
        _json_dump(
            {"n": adj.n, "symmetric": bool(adj.symmetric), "entries": entries}, path
        )
        return
    if export_format != "csv":
        raise ValueError(f"unknown export format {export_format!r}")
    lines = [f"# n,{adj.n}", f"# symmetric,{int(adj.symmetric)}", "i,j,weight"]
    for i, j, w in zip(rows, adj.indices, adj.data):
        lines.append(f"{i},{j},{_fmt(w)}")
    path.write_text("\n".join(lines) + "\n")


def parse_adjacency(path) -> SparseAdjacency:
    path = Path(path)
    text = path.read_text()
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        n = int(doc["n"])
        sym = bool(doc["symmetric"])
        triplets = [(int(i), int(j), float(w)) for i, j, w in doc["entries"]]
    else:
        n = sym = None
        triplets = []
        for line in text.splitlines():
            if line.startswith("# n,"):
                n = int(line.split(",")[1])
                continue
            if line.startswith("# symmetric,"):
                sym = bool(int(line.split(",")[1]))
                continue
            if not line or line.startswith("#") or line.startswith("i,j,"):
                continue
            i, j, w = line.split(",")
            triplets.append((int(i), int(j), float(w)))
        if n is None or sym is None:
            raise ParseError("missing n/symmetric headers")
    rows = [[] for _ in range(n)]
    for i, j, w in triplets:
        rows[i].append((j, w))
    return SparseAdjacency.from_rows(n, rows, symmetric=sym)
