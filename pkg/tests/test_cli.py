import json
import shutil
from pathlib import Path

import pytest

from segforms.cli import main

from conftest import FIXTURES


@pytest.fixture()
def workdir(tmp_path):
    corpus = tmp_path / "export.csv"
    shutil.copy(FIXTURES / "corpus20.csv", corpus)
    return tmp_path


def run(args):
    return main([str(a) for a in args])


def pipeline_through_code(workdir):
    out = workdir / "out"
    assert run(["--out-dir", out, "ingest", "--in", workdir / "export.csv"]) == 0
    assert run(["--out-dir", out, "extract"]) == 0
    assert run(["--out-dir", out, "code", "--approve-all", "--coder", "ops",
                "--export-validated"]) == 0
    return out


def test_ingest_writes_store_and_manifest(workdir):
    out = workdir / "out"
    assert run(["--out-dir", out, "ingest", "--in", workdir / "export.csv"]) == 0
    assert (out / "corpus.jsonl").exists()
    manifest = json.loads((out / "manifest_ingest.json").read_text())
    assert manifest["subcommand"] == "ingest"
    assert len(manifest["inputs"]) == 1
    stats = json.loads((out / "corpus_stats.json").read_text())
    assert stats["n_records"] == 20


def test_extract_matches_golden_csv(workdir):
    out = workdir / "out"
    run(["--out-dir", out, "ingest", "--in", workdir / "export.csv"])
    assert run(["--out-dir", out, "extract"]) == 0
    got = (out / "candidates.csv").read_bytes()
    assert got == (FIXTURES / "golden_candidates.csv").read_bytes()


def test_extract_without_ingest_names_prior_subcommand(workdir, capsys):
    assert run(["--out-dir", workdir / "out", "extract"]) == 3
    err = capsys.readouterr().err
    assert "ingest" in err


def test_metrics_without_code_names_prior_subcommand(workdir, capsys):
    out = workdir / "out"
    run(["--out-dir", out, "ingest", "--in", workdir / "export.csv"])
    run(["--out-dir", out, "extract"])
    assert run(["--out-dir", out, "metrics"]) == 3
    assert "code" in capsys.readouterr().err


def test_full_pipeline_artifacts(workdir):
    out = pipeline_through_code(workdir)
    assert run(["--out-dir", out, "metrics"]) == 0
    assert run(["--out-dir", out, "conet"]) == 0
    assert run(["--out-dir", out, "schol", "--min-cocitations", "2", "--coupling-min", "2",
                "--country-min-docs", "1"]) == 0
    assert run(["--out-dir", out, "ontology"]) == 0
    for name in [
        "validated.csv",
        "diversity.csv",
        "growth_fit.json",
        "multidisciplinarity.csv",
        "transdisciplinarity.csv",
        "intersectionality.csv",
        "precedence.json",
        "conet.json",
        "conet.graphml",
        "conet_centrality.csv",
        "conet_path_dependence.json",
        "cocitation.json",
        "coupling.json",
        "coauthorship.json",
        "dendrogram.json",
        "clusters.csv",
    ]:
        assert (out / name).exists(), name


def test_precedence_json_values(workdir):
    out = pipeline_through_code(workdir)
    run(["--out-dir", out, "conet"])
    run(["--out-dir", out, "metrics"])
    precedence = json.loads((out / "precedence.json").read_text())
    assert precedence["n_qualifying"] == 3
    assert precedence["n_after_bigrams"] == 2
    assert abs(precedence["frac_after_bigrams"] - 2 / 3) < 1e-9
    assert precedence["n_after_cooccurrence"] == 1


def test_subcommand_idempotent_outputs(workdir):
    out = pipeline_through_code(workdir)
    first = (out / "candidates.csv").read_bytes()
    manifest_first = (out / "manifest_extract.json").read_bytes()
    assert run(["--out-dir", out, "extract"]) == 0
    assert (out / "candidates.csv").read_bytes() == first
    assert (out / "manifest_extract.json").read_bytes() == manifest_first


def test_conet_manifest_hashes_outputs(workdir):
    out = pipeline_through_code(workdir)
    run(["--out-dir", out, "conet", "--seed", "7"])
    manifest = json.loads((out / "manifest_conet.json").read_text())
    assert manifest["seeds"] == {"louvain": 7}
    for path, digest in manifest["outputs"].items():
        assert len(digest) == 64
        assert Path(path).exists()


def test_invalid_config_names_key(workdir, capsys):
    cfg = workdir / "config.toml"
    cfg.write_text("[thresholds]\nmin_cocitations = -4\n")
    assert run(["--config", cfg, "--out-dir", workdir / "out", "ingest",
                "--in", workdir / "export.csv"]) == 2
    assert "thresholds.min_cocitations" in capsys.readouterr().err


def test_unknown_config_key_rejected(workdir, capsys):
    cfg = workdir / "config.toml"
    cfg.write_text("[thresholds]\nbogus = 1\n")
    assert run(["--config", cfg, "--out-dir", workdir / "out", "ingest",
                "--in", workdir / "export.csv"]) == 2
    assert "thresholds.bogus" in capsys.readouterr().err


def test_config_file_with_flag_override(workdir):
    out = workdir / "out"
    cfg = workdir / "config.toml"
    cfg.write_text(f'anchor = "segregation"\n[paths]\ncorpus = "{workdir}/export.csv"\n')
    assert run(["--config", cfg, "--out-dir", out, "ingest"]) == 0
    assert (out / "corpus.jsonl").exists()


def test_ontology_with_labels(workdir):
    out = pipeline_through_code(workdir)
    cluster_labels = workdir / "cluster_labels.csv"
    n_clusters = 4
    cluster_labels.write_text(
        "cluster,label\n" + "\n".join(f"{i},type{i}" for i in range(n_clusters)) + "\n"
    )
    overrides = workdir / "overrides.csv"
    overrides.write_text(
        "form,label1,label2\nracial segregation,type0,type1\n"
    )
    assert run(["--out-dir", out, "ontology", "--n-clusters", str(n_clusters),
                "--cluster-labels", cluster_labels, "--labels", overrides]) == 0
    payload = json.loads((out / "ontology.json").read_text())
    racial = [f for f in payload["forms"] if f["term"] == "racial segregation"]
    assert racial[0]["labels"] == ["type0", "type1"]
    assert any(e["a"] == "type0" and e["b"] == "type1" for e in payload["type_edges"])


def test_export_series_plot_and_graphml(workdir):
    out = pipeline_through_code(workdir)
    run(["--out-dir", out, "metrics"])
    plot = out / "diversity.png"
    assert run(["--out-dir", out, "export", "--series", out / "diversity.csv",
                "--plot", plot]) == 0
    assert plot.stat().st_size > 0
    run(["--out-dir", out, "conet"])
    graphml = out / "conet_copy.graphml"
    assert run(["--out-dir", out, "export", "--graph-json", out / "conet.json",
                "--graphml", graphml]) == 0
    assert graphml.stat().st_size > 0


def test_export_svg_plot(workdir):
    out = pipeline_through_code(workdir)
    run(["--out-dir", out, "metrics"])
    svg = out / "diversity.svg"
    assert run(["--out-dir", out, "export", "--series", out / "diversity.csv",
                "--plot", svg]) == 0
    assert b"<svg" in svg.read_bytes()[:500]


def test_forms_by_country_table(workdir):
    out = pipeline_through_code(workdir)
    run(["--out-dir", out, "metrics"])
    lines = (out / "forms_by_country.csv").read_text().splitlines()
    assert lines[0] == "country,form,n_publications"
    rows = {tuple(l.split(",")[:2]): int(l.split(",")[2]) for l in lines[1:]}
    assert rows[("United States", "racial segregation")] == 3  # d01, d03, d19
    assert rows[("Australia", "age segregation")] == 1
    assert rows[("Brazil", "vertical residential segregation")] == 1


def test_code_progress_and_discrepancies(workdir, capsys):
    out = pipeline_through_code(workdir)
    capsys.readouterr()  # drain pipeline chatter
    assert run(["--out-dir", out, "code", "--progress"]) == 0
    progress = json.loads(capsys.readouterr().out)
    assert progress["per_status"]["valid"] == 17
