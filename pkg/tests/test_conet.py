import itertools
import math
import random

import pytest

from segforms.conet import (
    CommunityPartition,
    build_cooccurrence,
    centralities,
    cooccurrence_first_years,
    louvain,
    modularity,
    path_dependence,
    temporal_slice,
)
from segforms.corpus import CorpusStore, DocumentRecord, IngestManifest
from segforms.extract import NGramCandidate
from segforms.graphs import WeightedGraph

from oracles import oracle_betweenness, oracle_pair_counts


def make_store(docs):
    records = [DocumentRecord(**d) for d in docs]
    return CorpusStore(records, IngestManifest(accepted=len(records)))


def make_form(terms, docs):
    cand = NGramCandidate(terms=terms)
    cand.docs = dict(docs)
    cand.first_year = min(docs.values()) if docs else None
    return cand


def forms_store_from_memberships(doc_forms: dict[str, tuple[int, list[str]]]):
    """doc_forms: doc_id -> (year, [form names]); forms named like 'a'."""
    forms = {}
    records = []
    for doc_id, (year, names) in doc_forms.items():
        records.append(dict(doc_id=doc_id, title="t", year=year))
        for name in names:
            key = (name, "segregation")
            if key not in forms:
                forms[key] = make_form(key, {})
            forms[key].docs[doc_id] = year
    for cand in forms.values():
        cand.first_year = min(cand.docs.values())
    return forms, make_store(records)


# -- build_cooccurrence ---------------------------------------------------------


def test_triangle_from_single_document():
    forms, store = forms_store_from_memberships({"d1": (2000, ["a", "b", "c"])})
    g = build_cooccurrence(forms, store)
    assert g.n_edges == 3
    for u, v in itertools.combinations(["a segregation", "b segregation", "c segregation"], 2):
        assert g.weight(u, v) == 1
        assert g.edge(u, v)["first_co_year"] == 2000


def test_repeated_pair_weight_two():
    forms, store = forms_store_from_memberships(
        {"d1": (2000, ["a", "b"]), "d2": (2001, ["a", "b"])}
    )
    g = build_cooccurrence(forms, store)
    assert g.weight("a segregation", "b segregation") == 2
    assert g.edge("a segregation", "b segregation")["first_co_year"] == 2000


def test_edge_weight_is_doc_intersection(candidates20, corpus20):
    g = build_cooccurrence(candidates20, corpus20)
    for (u, v), data in g.edges.items():
        docs_u = {d for t, c in candidates20.items() if " ".join(t) == u for d in c.docs}
        docs_v = {d for t, c in candidates20.items() if " ".join(t) == v for d in c.docs}
        assert data["weight"] == len(docs_u & docs_v)


def test_cooccurrence_matches_bruteforce_oracle(candidates20, corpus20):
    g = build_cooccurrence(candidates20, corpus20)
    doc_members: dict[str, set] = {}
    for terms, cand in candidates20.items():
        for doc in cand.docs:
            doc_members.setdefault(doc, set()).add(" ".join(terms))
    expected = oracle_pair_counts(doc_members)
    got = {key: data["weight"] for key, data in g.edges.items()}
    assert got == {pair: n for pair, n in expected.items() if n >= 1}


def test_min_weight_filter():
    forms, store = forms_store_from_memberships(
        {"d1": (2000, ["a", "b"]), "d2": (2001, ["a", "b"]), "d3": (2002, ["a", "c"])}
    )
    g = build_cooccurrence(forms, store, min_weight=2)
    assert g.has_edge("a segregation", "b segregation")
    assert not g.has_edge("a segregation", "c segregation")


# -- temporal_slice ---------------------------------------------------------------


def _sliced_fixture():
    return forms_store_from_memberships(
        {
            "d1": (1990, ["a", "b"]),
            "d2": (1995, ["a", "b"]),
            "d3": (2000, ["b", "c"]),
            "d4": (2005, ["a", "c", "d"]),
        }
    )


def test_slice_before_everything_is_empty():
    forms, store = _sliced_fixture()
    g = build_cooccurrence(forms, store)
    sliced = temporal_slice(g, 1980)
    assert len(sliced) == 0 and sliced.n_edges == 0


def test_slice_at_max_year_is_identity():
    forms, store = _sliced_fixture()
    g = build_cooccurrence(forms, store)
    sliced = temporal_slice(g, 2005)
    assert set(sliced.nodes) == set(g.nodes)
    assert {k: d["weight"] for k, d in sliced.edges.items()} == {
        k: d["weight"] for k, d in g.edges.items()
    }


def test_slice_recomputes_weights_from_contributing_docs():
    forms, store = _sliced_fixture()
    g = build_cooccurrence(forms, store)
    sliced = temporal_slice(g, 1992)
    assert sliced.weight("a segregation", "b segregation") == 1  # d2 not yet
    assert not sliced.has_edge("b segregation", "c segregation")


def test_slice_matches_restricted_corpus_oracle():
    forms, store = _sliced_fixture()
    g = build_cooccurrence(forms, store)
    for cut in (1990, 1995, 2000, 2005):
        sliced = temporal_slice(g, cut)
        doc_members: dict[str, set] = {}
        for terms, cand in forms.items():
            for doc, year in cand.docs.items():
                if year <= cut:
                    doc_members.setdefault(doc, set()).add(" ".join(terms))
        expected = oracle_pair_counts(doc_members)
        got = {k: d["weight"] for k, d in sliced.edges.items()}
        assert got == dict(expected)


def test_slice_monotone_growth():
    forms, store = _sliced_fixture()
    g = build_cooccurrence(forms, store)
    for y1, y2 in [(1990, 1995), (1995, 2000), (2000, 2005)]:
        g1, g2 = temporal_slice(g, y1), temporal_slice(g, y2)
        assert set(g1.nodes) <= set(g2.nodes)
        for key, data in g1.edges.items():
            assert key in g2.edges
            assert data["weight"] <= g2.edges[key]["weight"]


def test_slice_keeps_published_isolated_nodes():
    forms, store = forms_store_from_memberships(
        {"d1": (1990, ["a"]), "d2": (2000, ["a", "b"])}
    )
    g = build_cooccurrence(forms, store)
    sliced = temporal_slice(g, 1995)
    assert set(sliced.nodes) == {"a segregation"}  # published, no edges yet


# -- centralities --------------------------------------------------------------


def path_graph(labels):
    g = WeightedGraph()
    for a, b in zip(labels, labels[1:]):
        g.add_edge(a, b, weight=1)
    return g


def test_path_graph_betweenness():
    g = path_graph(["a", "b", "c"])
    table = centralities(g)
    assert table["b"] == (2, 2.0, 1.0)
    assert table["a"][2] == 0.0 and table["c"][2] == 0.0


def test_star_betweenness():
    g = WeightedGraph()
    for leaf in ["l1", "l2", "l3"]:
        g.add_edge("center", leaf, weight=1)
    table = centralities(g)
    assert table["center"][2] == pytest.approx(3.0)  # C(3,2) pairs
    assert table["center"][0] == 3


def test_degree_vs_weighted_degree():
    g = WeightedGraph()
    g.add_edge("a", "b", weight=5)
    g.add_edge("a", "c", weight=2)
    table = centralities(g)
    assert table["a"][0] == 2
    assert table["a"][1] == 7.0


def _random_graph(rng, n):
    g = WeightedGraph()
    for i in range(n):
        g.add_node(f"n{i:02d}")
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < 0.35:
                g.add_edge(f"n{i:02d}", f"n{j:02d}", weight=1)
    return g


def test_brandes_equals_bruteforce_on_random_graphs():
    for seed in range(60):
        rng = random.Random(seed)
        n = rng.randint(2, 12)
        g = _random_graph(rng, n)
        table = centralities(g)
        expected = oracle_betweenness(g.adjacency())
        for node_id in g.nodes:
            assert table[node_id][2] == pytest.approx(expected[node_id], abs=1e-9), (
                seed,
                node_id,
            )


def test_betweenness_total_matches_oracle_dependency_count():
    rng = random.Random(123)
    g = _random_graph(rng, 10)
    table = centralities(g)
    expected = oracle_betweenness(g.adjacency())
    assert sum(v[2] for v in table.values()) == pytest.approx(
        sum(expected.values()), abs=1e-9
    )


# -- modularity / louvain ------------------------------------------------------


def two_triangles():
    g = WeightedGraph()
    for a, b in [("a", "b"), ("b", "c"), ("a", "c"), ("x", "y"), ("y", "z"), ("x", "z")]:
        g.add_edge(a, b, weight=1)
    return g


def test_modularity_two_triangles_optimum():
    g = two_triangles()
    part = {"a": 0, "b": 0, "c": 0, "x": 1, "y": 1, "z": 1}
    assert modularity(g, part) == pytest.approx(0.5, abs=1e-12)


def test_modularity_all_in_one_is_zero():
    for seed in (1, 2, 3):
        g = _random_graph(random.Random(seed), 8)
        if g.n_edges == 0:
            continue
        part = {n: 0 for n in g.nodes}
        assert modularity(g, part) == pytest.approx(0.0, abs=1e-12)


def test_modularity_singleton_triangle():
    g = WeightedGraph()
    for a, b in [("a", "b"), ("b", "c"), ("a", "c")]:
        g.add_edge(a, b, weight=1)
    part = {"a": 0, "b": 1, "c": 2}
    assert modularity(g, part) == pytest.approx(-1.0 / 3.0, abs=1e-12)


def test_modularity_incomplete_partition_errors():
    g = two_triangles()
    with pytest.raises(ValueError):
        modularity(g, {"a": 0})


def test_louvain_two_triangles():
    g = two_triangles()
    part = louvain(g, seed=1)
    assert part.n_communities == 2
    assert part.modularity == pytest.approx(0.5, abs=1e-12)
    assert len({part.assignment[n] for n in "abc"}) == 1
    assert len({part.assignment[n] for n in "xyz"}) == 1


def test_louvain_complete_graph_single_community():
    g = WeightedGraph()
    for a, b in itertools.combinations("abcd", 2):
        g.add_edge(a, b, weight=1)
    part = louvain(g, seed=3)
    assert part.n_communities == 1


def planted_blocks(rng, n_blocks=4, per_block=10, p_in=0.9, p_out=0.05):
    g = WeightedGraph()
    labels = [f"b{b}_{i}" for b in range(n_blocks) for i in range(per_block)]
    for node_id in labels:
        g.add_node(node_id)
    for i, u in enumerate(labels):
        for v in labels[i + 1 :]:
            same = u.split("_")[0] == v.split("_")[0]
            p = p_in if same else p_out
            if rng.random() < p:
                g.add_edge(u, v, weight=1)
    return g, labels


def test_louvain_recovers_planted_blocks():
    rng = random.Random(2024)
    g, labels = planted_blocks(rng)
    part = louvain(g, seed=5)
    blocks = {}
    for node_id in labels:
        blocks.setdefault(node_id.split("_")[0], set()).add(part.assignment[node_id])
    assert all(len(cids) == 1 for cids in blocks.values())
    assert len({next(iter(c)) for c in blocks.values()}) == 4


def test_louvain_seed_determinism():
    rng = random.Random(77)
    g, _ = planted_blocks(rng)
    runs = [louvain(g, seed=9) for _ in range(10)]
    assert all(r.assignment == runs[0].assignment for r in runs)
    assert all(r.modularity == runs[0].modularity for r in runs)


def test_louvain_beats_singleton_partition():
    for seed in range(5):
        g = _random_graph(random.Random(seed + 50), 10)
        if g.n_edges == 0:
            continue
        part = louvain(g, seed=seed)
        singleton = {n: i for i, n in enumerate(sorted(g.nodes))}
        assert part.modularity >= modularity(g, singleton) - 1e-12


def test_louvain_empty_graph_errors():
    with pytest.raises(ValueError):
        louvain(WeightedGraph(), seed=0)


def test_louvain_respects_initial_partition():
    g = two_triangles()
    init = {n: (0 if n in "abc" else 1) for n in g.nodes}
    part = louvain(g, seed=0, initial_partition=init)
    assert part.modularity == pytest.approx(0.5, abs=1e-12)


# -- path dependence -----------------------------------------------------------


def age_hub_fixture(n=40, seed=0):
    """Preferential attachment by age: each node links into the older half,
    so early nodes accumulate descendants and mediate most shortest paths."""
    rng = random.Random(seed)
    g = WeightedGraph()
    for i in range(n):
        node_id = f"f{i:03d}"
        g.add_node(node_id, label=node_id, first_year=1950 + i)
        if i == 0:
            continue
        parent = rng.randint(0, max(0, i // 2 - 1)) if i > 1 else 0
        g.increment_edge(node_id, f"f{parent:03d}")
    return g


def test_path_dependence_age_hubs_positive():
    g = age_hub_fixture()
    rho, p = path_dependence(g)
    assert rho > 0.8
    assert p < 0.01


def test_path_dependence_shuffled_years_small():
    g = age_hub_fixture(n=100, seed=0)
    rng = random.Random(99)
    years = [g.nodes[n]["first_year"] for n in sorted(g.nodes)]
    rng.shuffle(years)
    for node_id, year in zip(sorted(g.nodes), years):
        g.nodes[node_id]["first_year"] = year
    rho, _ = path_dependence(g)
    assert abs(rho) < 0.2


def test_path_dependence_needs_three_nodes():
    g = WeightedGraph()
    g.add_node("a", first_year=1990)
    g.add_node("b", first_year=1991)
    with pytest.raises(ValueError):
        path_dependence(g)


# -- co-occurrence first years for precedence ------------------------------------


def test_cooccurrence_first_years_mapping(candidates20, corpus20):
    g = build_cooccurrence(candidates20, corpus20)
    co = cooccurrence_first_years(g)
    assert co[("racial segregation", "residential segregation")] == 1928


# -- exports -----------------------------------------------------------------------


def test_graph_json_roundtrip(tmp_path, candidates20, corpus20):
    g = build_cooccurrence(candidates20, corpus20)
    part = louvain(g, seed=0)
    table = centralities(g)
    for node_id in g.nodes:
        g.nodes[node_id]["community"] = part.assignment[node_id]
        g.nodes[node_id]["degree"] = table[node_id][0]
        g.nodes[node_id]["betweenness"] = float(table[node_id][2])
    out = tmp_path / "conet.json"
    g.to_json(out)
    loaded = WeightedGraph.from_json(out)
    assert set(loaded.nodes) == set(g.nodes)
    assert {k: d["weight"] for k, d in loaded.edges.items()} == {
        k: d["weight"] for k, d in g.edges.items()
    }
    assert loaded.nodes["racial segregation"]["first_year"] == 1913


def test_graphml_export_valid_xml(tmp_path, candidates20, corpus20):
    import xml.etree.ElementTree as ET

    g = build_cooccurrence(candidates20, corpus20)
    out = tmp_path / "conet.graphml"
    g.to_graphml(out)
    root = ET.parse(out).getroot()
    ns = "{http://graphml.graphdrawing.org/xmlns}"
    graph = root.find(f"{ns}graph")
    assert graph.get("edgedefault") == "undirected"
    nodes = graph.findall(f"{ns}node")
    edges = graph.findall(f"{ns}edge")
    assert len(nodes) == len(g)
    assert len(edges) == g.n_edges
