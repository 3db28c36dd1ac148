import json
from pathlib import Path

import numpy as np
import pytest

from bridgenav.cli import main as cli_main
from bridgenav.cloud import PointCloud, read_csv, read_ply, write_csv
from bridgenav.errors import BridgenavError, CloudParseError, MissingLayer, TooFewPoints
from bridgenav.pipeline import PipelineConfig, RunArtifacts, run_pipeline
from bridgenav.render import render_svg
from bridgenav.synth import Shape, StructureSpec, export_fixture, generate


@pytest.fixture(scope="module")
def l_fixture(tmp_path_factory):
    out = tmp_path_factory.mktemp("fixtures")
    csv_path, truth_path = export_fixture(
        generate(StructureSpec(shape=Shape.L, seed=0)), out, "l"
    )
    return csv_path, truth_path


@pytest.fixture(scope="module")
def l_run(l_fixture, tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    artifacts = run_pipeline(l_fixture[0], PipelineConfig(), out_dir=out)
    return artifacts, out


# ---------------------------------------------------------------------------
# cloud I/O
# ---------------------------------------------------------------------------

def test_csv_round_trip(tmp_path):
    cloud = PointCloud(np.array([[0.125, -3.5], [1e-9, 2.25]]))
    write_csv(cloud, tmp_path / "c.csv")
    back = read_csv(tmp_path / "c.csv")
    assert np.array_equal(back.points, cloud.points)


def test_csv_parse_error_carries_line_number(tmp_path):
    (tmp_path / "bad.csv").write_text("x,y\n1.0,2.0\nnope,3.0\n")
    with pytest.raises(CloudParseError) as err:
        read_csv(tmp_path / "bad.csv")
    assert err.value.line == 3


def test_csv_requires_header(tmp_path):
    (tmp_path / "bad.csv").write_text("1.0,2.0\n")
    with pytest.raises(CloudParseError):
        read_csv(tmp_path / "bad.csv")


def test_ply_reader(tmp_path):
    (tmp_path / "c.ply").write_text(
        "ply\nformat ascii 1.0\nelement vertex 2\n"
        "property float x\nproperty float y\nproperty float z\n"
        "end_header\n0.5 1.5 9.0\n-1.0 0.25 3.0\n"
    )
    cloud = read_ply(tmp_path / "c.ply")
    assert np.allclose(cloud.points, [[0.5, 1.5], [-1.0, 0.25]])


# ---------------------------------------------------------------------------
# config
# ---------------------------------------------------------------------------

def test_config_defaults_from_empty_dict():
    cfg = PipelineConfig.from_dict({})
    assert cfg.n_min == 3 and cfg.n_max == 8


def test_config_rejects_unknown_keys():
    with pytest.raises(BridgenavError):
        PipelineConfig.from_dict({"not_a_key": 1})


def test_config_nested_override(tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps({"l_b": 0.2, "robot": {"half_length": 0.05, "half_width": 0.02}}))
    cfg = PipelineConfig.from_json(p)
    assert cfg.l_b == 0.2
    assert cfg.robot.half_length == 0.05
    assert cfg.planner.budget == 5000


# ---------------------------------------------------------------------------
# run_pipeline
# ---------------------------------------------------------------------------

def test_end_to_end_l_fixture(l_run):
    artifacts, out = l_run
    assert artifacts.n_o == 3
    assert artifacts.graph.is_connected()
    assert artifacts.route is not None
    assert artifacts.untraversable == []
    assert set(artifacts.route.traversed_edges) == set(artifacts.graph.edges)
    for name in (
        "cloud.csv", "clusters.json", "boundaries.json", "graph.json",
        "route.json", "paths.json", "diagnostics.json",
    ):
        assert (out / name).exists()


def test_too_few_points_for_requested_range(tmp_path):
    cloud = PointCloud(np.random.default_rng(0).uniform(size=(10, 2)))
    write_csv(cloud, tmp_path / "tiny.csv")
    with pytest.raises(TooFewPoints):
        run_pipeline(tmp_path / "tiny.csv", PipelineConfig(n_min=3, n_max=20))


def test_byte_identical_artifacts_across_runs(l_fixture, tmp_path):
    csv_path, _ = l_fixture
    a_dir, b_dir = tmp_path / "a", tmp_path / "b"
    run_pipeline(csv_path, PipelineConfig(), out_dir=a_dir, seed=7)
    run_pipeline(csv_path, PipelineConfig(), out_dir=b_dir, seed=7)
    for f in sorted(a_dir.iterdir()):
        assert (b_dir / f.name).read_bytes() == f.read_bytes(), f.name


def test_round_trip_reload_matches(l_run):
    artifacts, out = l_run
    loaded = RunArtifacts.load(out)
    assert np.array_equal(loaded.labels, artifacts.labels)
    assert loaded.n_o == artifacts.n_o
    assert loaded.graph.to_json_dict() == artifacts.graph.to_json_dict()
    assert loaded.route.walk == artifacts.route.walk
    assert loaded.route.total_cost == artifacts.route.total_cost
    assert [p.edge_id for p in loaded.paths] == [p.edge_id for p in artifacts.paths]
    assert all(
        lp.configs == ap.configs for lp, ap in zip(loaded.paths, artifacts.paths)
    )
    assert len(loaded.boundaries) == len(artifacts.boundaries)
    for lb, ab in zip(loaded.boundaries, artifacts.boundaries):
        assert np.array_equal(lb.polygon.vertices, ab.polygon.vertices)
        assert lb.center == ab.center


def test_start_target_selectors(l_run):
    artifacts, _ = l_run
    g = artifacts.graph
    from bridgenav.pipeline import resolve_vertex

    some = sorted(g.vertices)[1]
    assert resolve_vertex(g, some, "min") == some
    pos = g.vertices[some].position
    assert resolve_vertex(g, [pos.x + 0.001, pos.y], "min") == some
    auto_min = resolve_vertex(g, None, "min")
    auto_max = resolve_vertex(g, None, "max")
    assert auto_min != auto_max


# ---------------------------------------------------------------------------
# render
# ---------------------------------------------------------------------------

def test_route_layer_has_one_arrow_per_traversal(l_run):
    artifacts, _ = l_run
    svg = render_svg(artifacts, "route")
    assert svg.count('class="arrow"') == len(artifacts.route.traversed_edges)


def test_all_layers_render(l_run):
    artifacts, _ = l_run
    for layer in ("segmentation", "boundaries", "graph", "route", "path"):
        svg = render_svg(artifacts, layer)
        assert svg.startswith("<?xml") and svg.rstrip().endswith("</svg>")


def test_missing_layer_raises(l_run):
    artifacts, _ = l_run
    import dataclasses

    empty = dataclasses.replace(artifacts, route=None, paths=[])
    with pytest.raises(MissingLayer):
        render_svg(empty, "route")
    with pytest.raises(MissingLayer):
        render_svg(empty, "path")
    with pytest.raises(MissingLayer):
        render_svg(artifacts, "nonsense")


def test_svg_deterministic(l_fixture, tmp_path):
    csv_path, _ = l_fixture
    a = run_pipeline(csv_path, PipelineConfig(), seed=3)
    b = run_pipeline(csv_path, PipelineConfig(), seed=3)
    assert render_svg(a, "route") == render_svg(b, "route")


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------

def test_cli_synth_then_run_and_render(tmp_path, capsys):
    rc = cli_main([
        "synth", "--shape", "l", "--out", str(tmp_path), "--name", "l", "--seed", "0",
    ])
    assert rc == 0
    assert (tmp_path / "l.csv").exists() and (tmp_path / "l.truth.json").exists()

    run_dir = tmp_path / "run"
    rc = cli_main(["run", str(tmp_path / "l.csv"), "--out", str(run_dir)])
    assert rc == 0
    assert (run_dir / "route.json").exists()

    rc = cli_main([
        "render", str(run_dir), "--layer", "graph", "--out", str(tmp_path / "g.svg"),
    ])
    assert rc == 0
    assert (tmp_path / "g.svg").read_text().startswith("<?xml")


def test_cli_stage_subset(tmp_path):
    cli_main(["synth", "--shape", "l", "--out", str(tmp_path), "--name", "l"])
    seg_dir = tmp_path / "seg"
    rc = cli_main(["segment", str(tmp_path / "l.csv"), "--out", str(seg_dir)])
    assert rc == 0
    names = sorted(p.name for p in seg_dir.iterdir())
    assert names == ["boundaries.json", "cloud.csv", "clusters.json", "diagnostics.json"]


def test_cli_input_error_is_exit_2(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("x,y\noops\n")
    rc = cli_main(["run", str(bad), "--out", str(tmp_path / "o")])
    assert rc == 2
