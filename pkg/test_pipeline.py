#!/usr/bin/env python3
"""End-to-end tests of the curation pipeline, the stage commands, sweep-m and bench-selectors."""

import json
import sys
from pathlib import Path

import pytest

# Add the project root to Python path
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

from clustering.store import read_assignment
from common.config import dump_pipeline_config, load_pipeline_config, reload_settings, validate_config
from common.errors import InputError, StageError
from main import bench_selectors, main, run_pipeline, sweep_m
from packing.store import read_manifest
from selection.store import read_selection
from storage.artifacts import ArtifactStore, read_json

TOY_CORPUS = project_root / "data" / "toy_corpus.jsonl"
DEFAULT_CONFIG = project_root / "data" / "default_config.toml"


@pytest.fixture(autouse=True)
def quiet_settings(tmp_path):
    """Keep log files inside the test directory."""
    yield reload_settings(LOG_FILE=str(tmp_path / "logs" / "curator.log"), QUIET=True)
    reload_settings()


def toy_config(tmp_path, name="run", **sections):
    """The bundled config pointed at the toy corpus, writing under tmp_path."""
    data = load_pipeline_config(DEFAULT_CONFIG).model_dump(mode="json", by_alias=True)
    data["dataset"]["path"] = str(TOY_CORPUS)
    data["output_dir"] = str(tmp_path / name)
    for section, values in sections.items():
        data[section].update(values)
    config = validate_config(data)
    return config, dump_pipeline_config(config, tmp_path / f"{name}.toml")


def test_full_pipeline_on_toy_corpus(tmp_path):
    config, path = toy_config(tmp_path)
    assert main(["pipeline", "--config", str(path)]) == 0

    out = Path(config.output_dir)
    for name in (ArtifactStore.SAMPLES, ArtifactStore.EMBEDDINGS, ArtifactStore.CLUSTERS, ArtifactStore.SCORES,
                 ArtifactStore.SELECTION, ArtifactStore.MANIFEST, ArtifactStore.REPORT_JSON,
                 ArtifactStore.REPORT_TEXT, ArtifactStore.RESOLVED_CONFIG, ArtifactStore.METADATA):
        assert (out / name).exists(), name
    assert not ArtifactStore(out).is_failed()

    assert load_pipeline_config(out / ArtifactStore.RESOLVED_CONFIG).clustering.k == 10
    assert len(set(read_assignment(out / ArtifactStore.CLUSTERS).values())) <= 10

    selection = read_selection(out / ArtifactStore.SELECTION)
    assert len(selection) == 80
    assert selection.strategy == "cdas"

    manifest = read_manifest(out / ArtifactStore.MANIFEST)
    assert sorted(manifest.sample_ids()) == sorted(selection.selected_ids)

    report = read_json(out / ArtifactStore.REPORT_JSON)
    padding = report["padding"]["strategies"]
    assert set(padding) == {"traditional", "dynamic", "dynamic-pack"}
    assert padding["dynamic-pack"]["padding_tokens"] <= padding["dynamic"]["padding_tokens"]
    assert padding["dynamic"]["padding_tokens"] <= padding["traditional"]["padding_tokens"]
    assert report["selection"]["count"] == 80

    metadata = read_json(out / ArtifactStore.METADATA)
    assert set(metadata["stages"]) == {"ingest", "embed", "cluster", "score", "select", "pack", "report"}


def test_pipeline_is_reproducible(tmp_path):
    _, first = toy_config(tmp_path, "first")
    _, second = toy_config(tmp_path, "second")
    assert main(["pipeline", "--config", str(first)]) == 0
    assert main(["pipeline", "--config", str(second)]) == 0
    for name in (ArtifactStore.SELECTION, ArtifactStore.MANIFEST, ArtifactStore.SCORES, ArtifactStore.CLUSTERS,
                 ArtifactStore.REPORT_JSON, ArtifactStore.REPORT_TEXT):
        assert (tmp_path / "first" / name).read_bytes() == (tmp_path / "second" / name).read_bytes(), name


def test_thread_count_does_not_change_outputs(tmp_path):
    _, one = toy_config(tmp_path, "one")
    _, four = toy_config(tmp_path, "four")
    assert main(["pipeline", "--config", str(one)]) == 0
    assert main(["pipeline", "--config", str(four), "--threads", "4"]) == 0
    for name in (ArtifactStore.EMBEDDINGS, ArtifactStore.CLUSTERS, ArtifactStore.SCORES, ArtifactStore.SELECTION,
                 ArtifactStore.MANIFEST):
        assert (tmp_path / "one" / name).read_bytes() == (tmp_path / "four" / name).read_bytes(), name


def test_missing_dataset_exits_with_input_error(tmp_path):
    config, path = toy_config(tmp_path, dataset={"path": str(tmp_path / "nope.jsonl")})
    assert main(["pipeline", "--config", str(path)]) == 2
    failed = Path(config.output_dir) / ArtifactStore.FAILED
    assert failed.exists()
    assert "stage: ingest" in failed.read_text(encoding="utf-8")


def test_run_pipeline_returns_artifact_directory(tmp_path):
    config, _ = toy_config(tmp_path, "api", selection={"strategy": "random", "m_percent": 100})
    out = run_pipeline(config)
    assert out == Path(config.output_dir)
    assert read_selection(out / ArtifactStore.SELECTION).selected_ids == list(range(200))
    assert (out / ArtifactStore.REPORT_TEXT).exists()


def test_run_pipeline_raises_stage_error(tmp_path):
    missing = tmp_path / "nope.jsonl"
    config, _ = toy_config(tmp_path, "api", dataset={"path": str(missing)})
    with pytest.raises(StageError) as info:
        run_pipeline(config)
    assert info.value.stage == "ingest"
    assert info.value.exit_code == 2
    assert str(missing) in str(info.value)


def test_invalid_config_exits_with_input_error(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text('[selection]\nm_percent = 0\n', encoding="utf-8")
    assert main(["pipeline", "--config", str(path)]) == 2


def test_invalid_thread_count_exits_with_input_error(tmp_path):
    _, path = toy_config(tmp_path)
    assert main(["ingest", "--config", str(path), "--threads", "0"]) == 2


def test_stage_without_upstream_artifacts_fails(tmp_path):
    config, path = toy_config(tmp_path)
    assert main(["pack", "--config", str(path)]) == 2
    assert "stage: pack" in (Path(config.output_dir) / ArtifactStore.FAILED).read_text(encoding="utf-8")


def test_stages_can_be_rerun_individually(tmp_path):
    config, path = toy_config(tmp_path)
    out = Path(config.output_dir)
    assert main(["pipeline", "--config", str(path)]) == 0

    assert main(["select", "--config", str(path), "--strategy", "random", "--m-percent", "100"]) == 0
    selection = read_selection(out / ArtifactStore.SELECTION)
    assert selection.strategy == "random"
    assert selection.selected_ids == list(range(200))

    assert main(["pack", "--config", str(path), "--pack-strategy", "traditional", "--max-len-preset", "13b"]) == 0
    manifest = read_manifest(out / ArtifactStore.MANIFEST)
    assert manifest.strategy == "traditional"
    assert manifest.max_len == 2048
    assert manifest.total_sequences == 200

    # a failed re-run leaves the marker; the next good run clears it
    assert main(["pack", "--config", str(path), "--max-len", "8"]) == 2
    assert ArtifactStore(out).is_failed()
    assert main(["pack", "--config", str(path)]) == 0
    assert not ArtifactStore(out).is_failed()


def test_drop_unparsable_code_shrinks_the_pool(tmp_path):
    config, path = toy_config(tmp_path)
    assert main(["pipeline", "--config", str(path), "--drop-unparsable-code"]) == 0
    out = Path(config.output_dir)
    selection = read_selection(out / ArtifactStore.SELECTION)
    assert selection.pool_size == 197
    assert len(selection) == 79
    assert not {37, 121, 188} & set(selection.selected_ids)
    assert read_json(out / ArtifactStore.CODE_AUDIT)["unparsable_ids"] == [37, 121, 188]


def test_sweep_m_selections_are_nested(tmp_path):
    config, _ = toy_config(tmp_path)
    summary = sweep_m(config, [60, 10, 30, 20, 50, 40])
    out = Path(config.output_dir)
    assert [run["m_percent"] for run in summary["runs"]] == [10.0, 20.0, 30.0, 40.0, 50.0, 60.0]
    assert [run["count"] for run in summary["runs"]] == [20, 40, 60, 80, 100, 120]
    assert all(run["count"] == run["expected_count"] for run in summary["runs"])
    assert (out / "m_10" / ArtifactStore.REPORT_JSON).exists()
    assert (out / "m_40" / ArtifactStore.MANIFEST).exists()
    assert read_json(out / "sweep_summary.json") == summary

    assert summary["nesting_violations"] == 0
    assert summary["violations"] == []
    selections = [read_selection(out / f"m_{m}" / ArtifactStore.SELECTION) for m in (10, 20, 30, 40, 50, 60)]
    for smaller, larger in zip(selections, selections[1:]):
        assert smaller.id_set <= larger.id_set


def test_sweep_m_rejects_bad_rates(tmp_path):
    config, _ = toy_config(tmp_path)
    with pytest.raises(InputError):
        sweep_m(config, [])
    with pytest.raises(InputError):
        sweep_m(config, [10, 120])


def test_bench_selectors_on_synthetic_points(tmp_path):
    config, _ = toy_config(tmp_path)
    table = bench_selectors(config, ["kmeans-cdas", "random", "random", "kcenter"], repeats=1,
                            synthetic_points=600, dim=16)
    assert list(table.columns) == ["strategy", "count", "jaccard_vs_cdas", "median_seconds", "repeats"]
    assert table.attrs["points"] == 600
    assert table["count"].tolist() == [240] * 4
    assert table.loc[0, "jaccard_vs_cdas"] == 1.0
    assert table.loc[1, "jaccard_vs_cdas"] == table.loc[2, "jaccard_vs_cdas"]
    assert (table["median_seconds"] >= 0.0).all()

    with pytest.raises(InputError, match="unknown strategies"):
        bench_selectors(config, ["magic"], repeats=1, synthetic_points=50)
    with pytest.raises(InputError):
        bench_selectors(config, ["random"], repeats=0, synthetic_points=50)


def test_kmeans_cdas_is_faster_than_kcenter_on_5000_points(tmp_path):
    config, _ = toy_config(tmp_path)
    table = bench_selectors(config, ["kmeans-cdas", "kcenter", "graph-density"], repeats=5,
                            synthetic_points=5000, dim=64).set_index("strategy")
    assert (table["count"] == 2000).all()
    assert table.loc["kmeans-cdas", "median_seconds"] < table.loc["kcenter", "median_seconds"]


def test_bench_selectors_command_writes_tables(tmp_path):
    config, path = toy_config(tmp_path)
    assert main(["bench-selectors", "--config", str(path), "--strategies", "kmeans-cdas", "complexity",
                 "--repeats", "1"]) == 0
    rows = json.loads((Path(config.output_dir) / "bench_selectors.json").read_text(encoding="utf-8"))
    assert [row["strategy"] for row in rows] == ["kmeans-cdas", "complexity"]
    assert all(row["count"] == 80 for row in rows)
    assert (Path(config.output_dir) / "bench_selectors.csv").exists()


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
