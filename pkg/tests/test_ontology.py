import itertools
import json
import math
import random

import numpy as np
import pytest

from segforms.ontology import (
    EmbeddingTable,
    agglomerative_complete,
    apply_labeling,
    cosine_distance_matrix,
    cut_dendrogram,
    lexical_fallback_similarity,
    load_embeddings,
    load_labeling_csv,
    type_network,
    write_embeddings,
    TypeLabeling,
)

from oracles import oracle_complete_linkage


# -- embeddings -------------------------------------------------------------------


def test_load_embeddings_roundtrip(tmp_path):
    path = tmp_path / "emb.jsonl"
    write_embeddings(path, ["a", "b", "c"], np.eye(3) @ np.diag([1.0, 2.0, 3.0]), "test-model-v1")
    table = load_embeddings(path)
    assert len(table) == 3
    assert table.dimension == 3
    assert table.model_tag == "test-model-v1"
    assert table.warnings == []


def test_load_embeddings_dim_mismatch(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text(
        json.dumps({"dimension": 2, "model_tag": "m"}) + "\n"
        + json.dumps({"term": "a", "vector": [1.0, 2.0]}) + "\n"
        + json.dumps({"term": "b", "vector": [1.0, 2.0, 3.0]}) + "\n"
    )
    with pytest.raises(ValueError, match="dim"):
        load_embeddings(path)


def test_load_embeddings_nonfinite(tmp_path):
    path = tmp_path / "nan.jsonl"
    path.write_text(
        json.dumps({"dimension": 2, "model_tag": "m"}) + "\n"
        + json.dumps({"term": "a", "vector": [1.0, float("nan")]}) + "\n"
    )
    with pytest.raises(ValueError, match="non-finite"):
        load_embeddings(path)


def test_load_embeddings_duplicate_term(tmp_path):
    path = tmp_path / "dup.jsonl"
    path.write_text(
        json.dumps({"dimension": 1, "model_tag": "m"}) + "\n"
        + json.dumps({"term": "a", "vector": [1.0]}) + "\n"
        + json.dumps({"term": "a", "vector": [2.0]}) + "\n"
    )
    with pytest.raises(ValueError, match="duplicate"):
        load_embeddings(path)


def test_load_embeddings_missing_terms_warn(tmp_path):
    path = tmp_path / "emb.jsonl"
    write_embeddings(path, ["a"], [[1.0, 0.0]], "m")
    table = load_embeddings(path, expected_terms={"a", "b", "c"})
    assert len(table.warnings) == 1
    assert "2 terms" in table.warnings[0]


# -- cosine distances ---------------------------------------------------------------


def test_cosine_identical_vectors_zero():
    table = EmbeddingTable(["a", "b"], np.array([[1.0, 2.0], [2.0, 4.0]]), "m")
    d = cosine_distance_matrix(table)
    assert d[0, 1] == pytest.approx(0.0, abs=1e-12)


def test_cosine_orthogonal_one():
    table = EmbeddingTable(["a", "b"], np.array([[1.0, 0.0], [0.0, 5.0]]), "m")
    assert cosine_distance_matrix(table)[0, 1] == pytest.approx(1.0, abs=1e-12)


def test_cosine_45_degrees():
    table = EmbeddingTable(["a", "b"], np.array([[1.0, 0.0], [1.0, 1.0]]), "m")
    assert cosine_distance_matrix(table)[0, 1] == pytest.approx(1 - 1 / math.sqrt(2), abs=1e-12)


def test_cosine_zero_vector_errors():
    table = EmbeddingTable(["a", "b"], np.array([[0.0, 0.0], [1.0, 1.0]]), "m")
    with pytest.raises(ValueError, match="zero vector"):
        cosine_distance_matrix(table)


def test_cosine_matrix_properties():
    rng = np.random.default_rng(3)
    table = EmbeddingTable([f"t{i}" for i in range(8)], rng.normal(size=(8, 5)), "m")
    d = cosine_distance_matrix(table)
    assert np.allclose(d, d.T)
    assert np.allclose(np.diag(d), 0.0)
    assert ((d >= -1e-12) & (d <= 2 + 1e-12)).all()


# -- agglomeration --------------------------------------------------------------------


def test_two_points_single_merge():
    d = np.array([[0.0, 0.7], [0.7, 0.0]])
    dg = agglomerative_complete(d, ["a", "b"])
    assert dg.merges == [(0, 1, 0.7, 2)]


def test_four_point_hand_sequence():
    # points on a line at 0, 1, 10, 12 with absolute-difference distances:
    # merge (0,1)@1, then (2,3)@2, then everything @12
    pts = [0.0, 1.0, 10.0, 12.0]
    d = np.abs(np.subtract.outer(pts, pts))
    dg = agglomerative_complete(d)
    assert dg.merges == [(0, 1, 1.0, 4), (2, 3, 2.0, 5), (4, 5, 12.0, 6)]


def test_identical_points_merge_at_zero():
    d = np.zeros((4, 4))
    dg = agglomerative_complete(d)
    assert all(m[2] == 0.0 for m in dg.merges)
    # ties resolve by smallest id pair
    assert dg.merges[0][:2] == (0, 1)
    assert dg.merges[1][:2] == (2, 3)  # pair (2,3) beats (4,2)/(4,3) orderings


def test_merge_distances_nondecreasing_random():
    rng = np.random.default_rng(11)
    for _ in range(20):
        n = rng.integers(2, 12)
        pts = rng.normal(size=(n, 3))
        d = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
        dg = agglomerative_complete(d)
        dists = [m[2] for m in dg.merges]
        assert all(b >= a for a, b in zip(dists, dists[1:]))


def test_linkage_matches_bruteforce_oracle_small():
    rng = np.random.default_rng(23)
    for trial in range(50):
        n = int(rng.integers(2, 7))
        pts = rng.normal(size=(n, 2))
        d = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
        dg = agglomerative_complete(d)
        expected = oracle_complete_linkage(d.tolist())
        assert dg.merges == [(a, b, pytest.approx(dist), nid) for a, b, dist, nid in expected], trial


def test_asymmetric_matrix_rejected():
    d = np.array([[0.0, 1.0], [2.0, 0.0]])
    with pytest.raises(ValueError, match="symmetric"):
        agglomerative_complete(d)


# -- cutting ------------------------------------------------------------------------


def _line_dendrogram():
    pts = [0.0, 1.0, 10.0, 12.0]
    d = np.abs(np.subtract.outer(pts, pts))
    return agglomerative_complete(d, ["p0", "p1", "p2", "p3"])


def test_cut_k_equals_n_singletons():
    dg = _line_dendrogram()
    flat = cut_dendrogram(dg, n_clusters=4)
    assert len(set(flat.values())) == 4


def test_cut_k_one_single_cluster():
    dg = _line_dendrogram()
    flat = cut_dendrogram(dg, n_clusters=1)
    assert set(flat.values()) == {0}


def test_cut_k_two_hand_partition():
    dg = _line_dendrogram()
    flat = cut_dendrogram(dg, n_clusters=2)
    assert flat["p0"] == flat["p1"]
    assert flat["p2"] == flat["p3"]
    assert flat["p0"] != flat["p2"]


def test_cut_by_distance():
    dg = _line_dendrogram()
    flat = cut_dendrogram(dg, distance=2.0)
    assert flat["p0"] == flat["p1"] and flat["p2"] == flat["p3"] and flat["p0"] != flat["p2"]
    all_one = cut_dendrogram(dg, distance=12.0)
    assert set(all_one.values()) == {0}


def test_cut_criterion_validation():
    dg = _line_dendrogram()
    with pytest.raises(ValueError):
        cut_dendrogram(dg)
    with pytest.raises(ValueError):
        cut_dendrogram(dg, n_clusters=2, distance=1.0)
    with pytest.raises(ValueError):
        cut_dendrogram(dg, n_clusters=0)
    with pytest.raises(ValueError):
        cut_dendrogram(dg, n_clusters=5)


def test_cut_equals_component_reconstruction():
    rng = np.random.default_rng(7)
    for _ in range(20):
        n = int(rng.integers(2, 7))
        pts = rng.normal(size=(n, 2))
        d = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
        dg = agglomerative_complete(d)
        for k in range(1, n + 1):
            flat = cut_dendrogram(dg, n_clusters=k)
            assert len(set(flat.values())) == k
            # reconstruct: union-find over the first n-k merges
            groups = {i: {i} for i in range(n)}
            alias = {i: i for i in range(n)}
            for a, b, _, nid in dg.merges[: n - k]:
                merged = groups.pop(alias[a]) | groups.pop(alias[b])
                groups[nid] = merged
                for x in merged:
                    alias[x] = nid
                alias[nid] = nid
            expected_sets = {frozenset(dg.labels[i] for i in s) for s in groups.values()}
            got_sets = {}
            for label, cid in flat.items():
                got_sets.setdefault(cid, set()).add(label)
            assert {frozenset(s) for s in got_sets.values()} == expected_sets


# -- lexical fallback ------------------------------------------------------------------


def test_jaccard_identical_forms_zero():
    labels, d = lexical_fallback_similarity(["racial segregation", "racial segregation x"])
    # same qualifier set ({racial} vs {racial, x}) -> d = 1 - 1/2
    assert d[0, 1] == pytest.approx(0.5)


def test_jaccard_disjoint_qualifiers_one():
    labels, d = lexical_fallback_similarity(["racial segregation", "gender segregation"])
    assert d[0, 1] == pytest.approx(1.0)


def test_jaccard_half_overlap():
    labels, d = lexical_fallback_similarity(
        ["racial residential segregation", "residential segregation"]
    )
    assert d[0, 1] == pytest.approx(0.5)


def test_jaccard_self_zero():
    labels, d = lexical_fallback_similarity(["racial segregation", "racial segregation"])
    assert d[0, 1] == pytest.approx(0.0)


# -- labeling ---------------------------------------------------------------------------


def test_apply_labeling_defaults_and_overrides():
    clustering = {"racial segregation": 0, "gender segregation": 1, "mixed segregation": 0}
    cluster_labels = {0: "racial", 1: "gender"}
    overrides = {"mixed segregation": ("racial", "social", "legal")}
    labeling = apply_labeling(clustering, cluster_labels, overrides)
    assert labeling.labels["racial segregation"] == ("racial",)
    assert labeling.labels["mixed segregation"] == ("racial", "social", "legal")
    assert set(labeling.universe) == {"racial", "gender", "social", "legal"}


def test_apply_labeling_eight_label_maximum():
    clustering = {"involuntary spatial segregation": 0}
    labels = tuple(f"type{i}" for i in range(8))
    labeling = apply_labeling(clustering, {0: "spatial"}, {"involuntary spatial segregation": labels})
    assert len(labeling.labels["involuntary spatial segregation"]) == 8
    with pytest.raises(ValueError, match="1..8"):
        apply_labeling(
            clustering,
            {0: "spatial"},
            {"involuntary spatial segregation": tuple(f"type{i}" for i in range(9))},
        )


def test_apply_labeling_unknown_form_or_type():
    clustering = {"racial segregation": 0}
    with pytest.raises(ValueError, match="unknown forms"):
        apply_labeling(clustering, {0: "racial"}, {"ghost segregation": ("racial",)})
    with pytest.raises(ValueError, match="unknown types"):
        apply_labeling(clustering, {0: "racial"}, {"racial segregation": ("mystery",)}, universe=["racial"])


def test_apply_labeling_missing_cluster_label():
    with pytest.raises(ValueError, match="no label"):
        apply_labeling({"racial segregation": 3}, {0: "racial"})


def test_labeling_csv_loader(tmp_path):
    path = tmp_path / "labels.csv"
    path.write_text(
        "form,label1,label2,label3,label4,label5,label6,label7,label8\n"
        "metropolitan hispanic segregation,ethnic,geographic,urban,spatial,,,,\n"
        "urban segregation,urban,,,,,,,\n"
        ",,,,,,,,\n"
    )
    overrides = load_labeling_csv(path)
    assert overrides["metropolitan hispanic segregation"] == ("ethnic", "geographic", "urban", "spatial")
    assert overrides["urban segregation"] == ("urban",)
    assert len(overrides) == 2


# -- type network ----------------------------------------------------------------------


def test_type_network_fixture_counts():
    labeling = TypeLabeling(
        labels={"f1": ("A", "B"), "f2": ("A", "B"), "f3": ("A", "C")},
        universe=("A", "B", "C"),
    )
    net = type_network(labeling)
    assert net.type_edges[("A", "B")] == 2
    assert net.type_edges[("A", "C")] == 1
    assert ("B", "C") not in net.type_edges
    assert net.type_freq == {"A": 3, "B": 2, "C": 1}


def test_type_network_no_multilabel_no_edges():
    labeling = TypeLabeling(labels={"f1": ("A",), "f2": ("B",)}, universe=("A", "B"))
    assert type_network(labeling).type_edges == {}


def test_type_freq_sum_equals_label_multiset():
    labeling = TypeLabeling(
        labels={"f1": ("A", "B", "C"), "f2": ("B",), "f3": ("A", "C")},
        universe=("A", "B", "C"),
    )
    net = type_network(labeling)
    assert sum(net.type_freq.values()) == sum(len(v) for v in labeling.labels.values())


def test_type_edge_bounded_by_min_freq_random():
    rng = random.Random(17)
    universe = [f"T{i}" for i in range(6)]
    for _ in range(50):
        labels = {}
        for i in range(rng.randint(2, 25)):
            k = rng.randint(1, min(8, len(universe)))
            labels[f"form{i}"] = tuple(sorted(rng.sample(universe, k)))
        net = type_network(TypeLabeling(labels=labels, universe=tuple(universe)))
        for (a, b), w in net.type_edges.items():
            assert w <= min(net.type_freq[a], net.type_freq[b])


def test_ontology_exports(tmp_path):
    labeling = TypeLabeling(
        labels={"f1": ("A", "B"), "f2": ("A",)},
        universe=("A", "B"),
    )
    net = type_network(labeling)
    jpath = tmp_path / "ontology.json"
    net.to_json(jpath)
    payload = json.loads(jpath.read_text())
    assert payload["types"] == [
        {"id": 0, "label": "A", "freq": 2},
        {"id": 1, "label": "B", "freq": 1},
    ]
    assert payload["type_edges"] == [{"a": "A", "b": "B", "weight": 1}]
    gpath = tmp_path / "ontology.graphml"
    net.to_graphml(gpath)
    assert gpath.stat().st_size > 0


# -- end-to-end over the fixture candidates ---------------------------------------------


def test_cluster_fixture_forms_with_fallback(candidates20):
    labels, d = lexical_fallback_similarity(candidates20)
    dg = agglomerative_complete(d, labels)
    flat = cut_dendrogram(dg, n_clusters=5)
    assert len(set(flat.values())) == 5
    # forms sharing a qualifier token land together before disjoint ones
    assert flat["racial segregation"] == flat["racial residential segregation"]
