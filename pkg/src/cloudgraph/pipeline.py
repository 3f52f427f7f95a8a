"""End-to-end pipeline: construct -> refine -> smooth -> geometry -> aggregate.

Writes one artifact file per stage plus a manifest with content hashes.
Outputs are byte-identical for a fixed config and seed; wall-clock stage
timings therefore go to the diagnostic stream and enter the manifest only
when explicitly requested (``wall_times``), the same way reproducible-build
tools pin timestamps.
"""

from __future__ import annotations

import hashlib
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .aggregate import AggregationSpec, aggregate_enhanced
from .construct import (
    adjacency_from_neighbor_list,
    ball_query_all,
    build_index,
    degree_report,
)
from .core import InvariantViolation, PointCloud, SmoothingConfig, validate_cloud
from .fixtures import cross_label_fractions, make_fixture
from .geometry import (
    cylindrical_for_neighbors,
    frames_for_neighbors,
    shape_descriptors,
)
from .io import (
    export_adjacency,
    export_degree_heatmap,
    export_neighborhoods,
    parse_cloud,
)
from .smooth import reselect_neighborhoods, smooth, symmetric_normalize, symmetric_refine

PIPELINE_ORDER = ("construct", "refine", "smooth", "geometry", "aggregate")

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_INVARIANT = 2


@dataclass(frozen=True)
class PipelineConfig:
    """Everything a pipeline run depends on; a fixed config implies
    byte-identical outputs."""

    out_dir: str
    smoothing: SmoothingConfig
    input_path: str | None = None
    input_format: str = "xyz"
    fixture: str | None = None
    n: int = 2048
    seed: int = 0
    stages: tuple[str, ...] = PIPELINE_ORDER
    export_format: str = "json"
    wall_times: bool = False

    def __post_init__(self):
        stages = tuple(self.stages)
        if stages != PIPELINE_ORDER[: len(stages)] or not stages:
            raise ValueError(
                f"stages must be a nonempty prefix of {PIPELINE_ORDER}, got {stages}"
            )
        object.__setattr__(self, "stages", stages)
        if (self.input_path is None) == (self.fixture is None):
            raise ValueError("exactly one of input_path or fixture must be given")
        if self.export_format not in ("json", "csv"):
            raise ValueError(f"unknown export format {self.export_format!r}")

    def echo(self) -> dict:
        sm = self.smoothing
        return {
            "input_path": self.input_path,
            "input_format": self.input_format,
            "fixture": self.fixture,
            "n": self.n,
            "seed": self.seed,
            "radius": sm.radius,
            "k": sm.k,
            "alpha": sm.alpha,
            "t_order": sm.t_order,
            "k_out": sm.k_out,
            "eps": sm.eps,
            "stages": list(self.stages),
            "out_dir": self.out_dir,
            "export_format": self.export_format,
        }


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _extreme_thresholds(k: int) -> tuple[int, int]:
    # 20/35 at the reference k=32, scaled proportionally otherwise
    return int(round(20 * k / 32)), int(round(35 * k / 32))


class _Recorder:
    def __init__(self, cfg: PipelineConfig):
        self.cfg = cfg
        self.root = Path(cfg.out_dir)
        self.stages: list[dict] = []

    def stage(self, name: str):
        return _StageCtx(self, name)


class _StageCtx:
    def __init__(self, rec: _Recorder, name: str):
        self.rec = rec
        self.name = name
        self.outputs: list[Path] = []

    def path(self, stem: str) -> Path:
        ext = "json" if self.rec.cfg.export_format == "json" else "csv"
        p = self.rec.root / f"{stem}.{ext}"
        self.outputs.append(p)
        return p

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc_type is not None:
            return False
        elapsed_ms = (time.perf_counter() - self.t0) * 1000.0
        print(f"[cloudgraph] stage {self.name}: {elapsed_ms:.1f} ms", file=sys.stderr)
        self.rec.stages.append(
            {
                "name": self.name,
                "millis": int(round(elapsed_ms)) if self.rec.cfg.wall_times else 0,
                "outputs": [
                    {"path": p.name, "sha256": _sha256(p)} for p in self.outputs
                ],
            }
        )
        return False


def _load_cloud(cfg: PipelineConfig):
    if cfg.fixture is not None:
        fixture = make_fixture(cfg.fixture, cfg.n, cfg.seed)
        return fixture.cloud, fixture.labels, fixture.junction_distance
    cloud = parse_cloud(cfg.input_path, cfg.input_format)
    return cloud, None, None


def run_pipeline(cfg: PipelineConfig) -> int:
    """Run the selected stage prefix; returns the process exit status."""
    try:
        _run(cfg)
    except (ValueError, OSError) as exc:
        print(f"[cloudgraph] input error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except InvariantViolation as exc:
        print(f"[cloudgraph] invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


def _run(cfg: PipelineConfig) -> None:
    root = Path(cfg.out_dir)
    root.mkdir(parents=True, exist_ok=True)
    cloud, labels, junction_distance = _load_cloud(cfg)
    report = validate_cloud(cloud)
    if not report.ok:
        raise ValueError("invalid cloud: " + "; ".join(report.violations))
    sm = cfg.smoothing
    rec = _Recorder(cfg)
    metrics: dict[str, float | int | None] = {}
    lo, hi = _extreme_thresholds(sm.k)

    with rec.stage("construct") as st:
        index = build_index(cloud)
        raw_neighbors = ball_query_all(index, sm)
        adjacency = adjacency_from_neighbor_list(raw_neighbors)
        raw_report = degree_report(adjacency)
        export_adjacency(adjacency, st.path("adjacency_raw"), cfg.export_format)
        export_degree_heatmap(
            raw_report, cloud, st.path("degree_heatmap_raw"), cfg.export_format
        )
    metrics["raw_out_degree_stddev"] = raw_report.summary["out"]["stddev"]
    metrics["raw_extreme_degree_count"] = int(
        ((raw_report.out_degree < lo) | (raw_report.out_degree > hi)).sum()
    )
    metrics["extreme_degree_thresholds"] = [lo, hi]

    refined = smoothed_neighbors = None
    if "refine" in cfg.stages:
        with rec.stage("refine") as st:
            refined = symmetric_refine(adjacency)
            export_adjacency(refined, st.path("adjacency_refined"), cfg.export_format)

    if "smooth" in cfg.stages:
        with rec.stage("smooth") as st:
            normalized = symmetric_normalize(refined)
            smoothed = smooth(normalized, sm)
            smoothed_neighbors = reselect_neighborhoods(smoothed, cloud, sm.k_out)
            smoothed_report = degree_report(
                adjacency_from_neighbor_list(smoothed_neighbors)
            )
            export_neighborhoods(
                smoothed_neighbors,
                cloud,
                np.arange(cloud.n),
                st.path("neighborhoods_smoothed"),
                cfg.export_format,
                labels=labels,
            )
            export_degree_heatmap(
                smoothed_report,
                cloud,
                st.path("degree_heatmap_smoothed"),
                cfg.export_format,
            )
        in_counts = smoothed_neighbors.in_selection_counts()
        metrics["smoothed_in_selection_stddev"] = float(in_counts.std())
        metrics["smoothed_extreme_degree_count"] = int(
            ((in_counts < lo) | (in_counts > hi)).sum()
        )
        if labels is not None and junction_distance is not None:
            band = junction_distance <= sm.radius
            raw_frac = cross_label_fractions(raw_neighbors, labels)
            new_frac = cross_label_fractions(smoothed_neighbors, labels)
            metrics["junction_band_size"] = int(band.sum())
            metrics["junction_cross_fraction_raw"] = float(raw_frac[band].mean())
            metrics["junction_cross_fraction_smoothed"] = float(new_frac[band].mean())

    frames = cyl = None
    if "geometry" in cfg.stages:
        with rec.stage("geometry") as st:
            frames = frames_for_neighbors(cloud, smoothed_neighbors, sm.eps)
            cyl = cylindrical_for_neighbors(cloud, smoothed_neighbors, frames, sm.eps)
            _export_descriptors(frames, st.path("shape_descriptors"), cfg.export_format)

    if "aggregate" in cfg.stages:
        with rec.stage("aggregate") as st:
            feats = _aggregate_features(cloud, smoothed_neighbors, frames, cyl, cfg)
            _export_matrix(feats, st.path("features"), cfg.export_format)

    manifest = {
        "config": cfg.echo(),
        "metrics": metrics,
        "stages": rec.stages,
    }
    (root / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n"
    )
    print(f"[cloudgraph] wrote {root / 'manifest.json'}", file=sys.stderr)


def _export_descriptors(frames, path: Path, export_format: str) -> None:
    rows = []
    for i, f in enumerate(frames):
        d = shape_descriptors(f)
        rows.append(
            {
                "index": i,
                "eigenvalues": [float(v) for v in f.eigenvalues],
                "linearity": d.linearity,
                "planarity": d.planarity,
                "sphericity": d.sphericity,
                "degenerate_rank": f.degenerate_rank,
            }
        )
    if export_format == "json":
        path.write_text(json.dumps({"points": rows}, sort_keys=True, indent=2) + "\n")
        return
    lines = ["index,lambda1,lambda2,lambda3,linearity,planarity,sphericity,degenerate_rank"]
    for r in rows:
        lam = r["eigenvalues"]
        lines.append(
            f"{r['index']},{lam[0]!r},{lam[1]!r},{lam[2]!r},"
            f"{r['linearity']!r},{r['planarity']!r},{r['sphericity']!r},"
            f"{r['degenerate_rank']}"
        )
    path.write_text("\n".join(lines) + "\n")


def _aggregate_features(cloud, neighbors, frames, cyl, cfg: PipelineConfig):
    base = cloud if cloud.features is not None else PointCloud(
        cloud.points, cloud.points.copy()
    )  # coordinates stand in as features for geometry-only clouds
    eta = base.feature_width
    rng = np.random.default_rng(cfg.seed)
    spec = AggregationSpec(
        mode="enhanced",
        weight_psi=rng.standard_normal((eta + 6, 16)),
        bias=rng.standard_normal(16),
        weight_phi=rng.standard_normal((3, 8)),
        bias_phi=rng.standard_normal(8),
    )
    return aggregate_enhanced(base, neighbors, frames, cyl, spec)


def _export_matrix(matrix: np.ndarray, path: Path, export_format: str) -> None:
    if export_format == "json":
        path.write_text(
            json.dumps(
                {"rows": [[float(v) for v in row] for row in matrix]},
                sort_keys=True,
                indent=2,
            )
            + "\n"
        )
        return
    lines = [",".join(repr(float(v)) for v in row) for row in matrix]
    path.write_text("\n".join(lines) + "\n")
