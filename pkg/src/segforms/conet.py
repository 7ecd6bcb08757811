"""Co-occurrence network of validated forms.

Construction from shared documents, temporal slices, degree/betweenness
centralities, Louvain community detection with weighted modularity, and
the path-dependence rank correlation between node age and betweenness.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .corpus import CorpusStore
from .extract import CandidateSet
from .graphs import WeightedGraph
from .kernels import betweenness_csr
from .metrics import spearman


def build_cooccurrence(forms: CandidateSet, store: CorpusStore, min_weight: int = 1) -> WeightedGraph:
    """One node per form with >= 1 document; each document adds 1 to every
    unordered pair of distinct forms it contains. Edge weight therefore
    equals |docs(A) & docs(B)|. Edges below min_weight are dropped.
    """
    g = WeightedGraph()
    doc_terms: dict[str, list[str]] = {}
    for terms, cand in forms.items():
        if not cand.docs:
            continue
        label = " ".join(terms)
        g.add_node(
            label,
            label=label,
            first_year=cand.first_year if cand.first_year is not None else 0,
            n_docs=cand.n_docs,
        )
        for doc_id in cand.docs:
            doc_terms.setdefault(doc_id, []).append(label)

    for doc_id, labels in doc_terms.items():
        year = store.by_id[doc_id].year
        labels = sorted(set(labels))
        for i in range(len(labels)):
            for j in range(i + 1, len(labels)):
                data = g.increment_edge(labels[i], labels[j])
                per_year = data.setdefault("_per_year", {})
                per_year[year] = per_year.get(year, 0) + 1
                data["first_co_year"] = min(data.get("first_co_year", year), year)

    for key in [k for k, d in g.edges.items() if d["weight"] < min_weight]:
        del g.edges[key]
    return g


def temporal_slice(g: WeightedGraph, up_to_year: int) -> WeightedGraph:
    """Subgraph of co-occurrences established by up_to_year.

    Edge weights are recomputed from the contributing documents up to that
    year; nodes with no incident edge and no publication by then are
    dropped.
    """
    sliced = WeightedGraph()
    for (u, v), data in g.edges.items():
        if data.get("first_co_year", 0) > up_to_year:
            continue
        per_year = data.get("_per_year", {})
        if per_year:
            weight = sum(n for year, n in per_year.items() if year <= up_to_year)
        else:
            weight = data["weight"]
        if weight <= 0:
            continue
        sliced.add_edge(u, v, weight=weight, first_co_year=data["first_co_year"])
        sliced.edges[(u, v) if u < v else (v, u)]["_per_year"] = {
            year: n for year, n in per_year.items() if year <= up_to_year
        }
    for node_id, attrs in g.nodes.items():
        if node_id in sliced.nodes:
            sliced.nodes[node_id].update(attrs)
        elif attrs.get("first_year", 0) and attrs["first_year"] <= up_to_year:
            sliced.add_node(node_id, **attrs)
    return sliced


def centralities(g: WeightedGraph) -> dict[str, tuple[int, float, float]]:
    """node -> (degree, weighted_degree, betweenness).

    Betweenness runs over unweighted shortest paths with the standard even
    split among equal-length paths and no normalization: values count the
    unordered node pairs a node mediates.
    """
    order, indptr, indices = g.csr()
    raw = betweenness_csr(indptr, indices)
    adj = g.adjacency()
    table: dict[str, tuple[int, float, float]] = {}
    for i, node_id in enumerate(order):
        neigh = adj[node_id]
        table[node_id] = (len(neigh), float(sum(neigh.values())), raw[i] / 2.0)
    return table


@dataclass
class CommunityPartition:
    assignment: dict[str, int]
    modularity: float

    def communities(self) -> dict[int, list[str]]:
        out: dict[int, list[str]] = {}
        for node_id, cid in self.assignment.items():
            out.setdefault(cid, []).append(node_id)
        return {cid: sorted(members) for cid, members in sorted(out.items())}

    @property
    def n_communities(self) -> int:
        return len(set(self.assignment.values()))


def modularity(g: WeightedGraph, assignment: dict[str, int], resolution: float = 1.0) -> float:
    """Weighted Newman modularity Q of a complete node partition."""
    missing = set(g.nodes) - set(assignment)
    if missing:
        raise ValueError(f"partition does not cover nodes: {sorted(missing)[:5]}")
    adj = g.adjacency()
    m = sum(d["weight"] for d in g.edges.values())
    if m == 0:
        return 0.0
    intra: dict[int, float] = {}
    ktot: dict[int, float] = {}
    for (u, v), data in g.edges.items():
        if assignment[u] == assignment[v]:
            intra[assignment[u]] = intra.get(assignment[u], 0.0) + data["weight"]
    for node_id in g.nodes:
        cid = assignment[node_id]
        ktot[cid] = ktot.get(cid, 0.0) + sum(adj[node_id].values())
    q = 0.0
    for cid in set(assignment[n] for n in g.nodes):
        q += intra.get(cid, 0.0) / m - resolution * (ktot.get(cid, 0.0) / (2.0 * m)) ** 2
    return q


def _local_moving(
    adj: dict[str, dict[str, float]],
    degrees: dict[str, float],
    self_loops: dict[str, float],
    m: float,
    assignment: dict[str, int],
    sigma_tot: dict[int, float],
    rng: random.Random,
    resolution: float,
) -> bool:
    """Repeated single-node moves to the best-gain community. Returns True if any move happened."""
    nodes = sorted(adj)
    improved = False
    moved = True
    while moved:
        moved = False
        order = nodes[:]
        rng.shuffle(order)
        for u in order:
            cu = assignment[u]
            ku = degrees[u]
            sigma_tot[cu] -= ku
            # weight from u to each neighboring community (self excluded)
            k_u_comm: dict[int, float] = {}
            for v, w in adj[u].items():
                if v == u:
                    continue
                k_u_comm[assignment[v]] = k_u_comm.get(assignment[v], 0.0) + w
            best_c = cu
            best_gain = k_u_comm.get(cu, 0.0) / m - resolution * sigma_tot.get(cu, 0.0) * ku / (
                2.0 * m * m
            )
            for cid in sorted(k_u_comm):
                if cid == cu:
                    continue
                gain = k_u_comm[cid] / m - resolution * sigma_tot.get(cid, 0.0) * ku / (2.0 * m * m)
                if gain > best_gain:
                    best_gain = gain
                    best_c = cid
            sigma_tot[best_c] = sigma_tot.get(best_c, 0.0) + ku
            assignment[u] = best_c
            if best_c != cu:
                moved = True
                improved = True
    return improved


def _aggregate(
    adj: dict[str, dict[str, float]],
    self_loops: dict[str, float],
    assignment: dict[str, int],
) -> tuple[dict[str, dict[str, float]], dict[str, float], dict[str, list[str]]]:
    """Collapse communities into supernodes, accumulating intra weight as self-loops."""
    members: dict[int, list[str]] = {}
    for node_id, cid in assignment.items():
        members.setdefault(cid, []).append(node_id)
    label_of = {cid: f"c{idx}" for idx, cid in enumerate(sorted(members))}
    new_adj: dict[str, dict[str, float]] = {label_of[cid]: {} for cid in members}
    new_loops: dict[str, float] = {label_of[cid]: 0.0 for cid in members}
    for u, neigh in adj.items():
        cu = label_of[assignment[u]]
        for v, w in neigh.items():
            if v == u:
                continue
            cv = label_of[assignment[v]]
            if cu == cv:
                new_loops[cu] += w / 2.0  # each undirected edge visited twice
            else:
                new_adj[cu][cv] = new_adj[cu].get(cv, 0.0) + w
    for u, w in self_loops.items():
        new_loops[label_of[assignment[u]]] += w
    groups = {label_of[cid]: sorted(m) for cid, m in members.items()}
    return new_adj, new_loops, groups


def _louvain_core(
    adj: dict[str, dict[str, float]],
    self_loops: dict[str, float],
    m: float,
    rng: random.Random,
    resolution: float,
    assignment: dict[str, int],
    membership: dict[str, list[str]],
) -> dict[str, int]:
    """Alternate local moving and aggregation until stable; return flat node->cid."""
    while True:
        degrees = {
            u: sum(w for v, w in adj[u].items() if v != u) + 2.0 * self_loops.get(u, 0.0)
            for u in adj
        }
        sigma_tot: dict[int, float] = {}
        for u, cid in assignment.items():
            sigma_tot[cid] = sigma_tot.get(cid, 0.0) + degrees[u]
        improved = _local_moving(adj, degrees, self_loops, m, assignment, sigma_tot, rng, resolution)
        n_comms = len(set(assignment.values()))
        if not improved or n_comms == len(adj):
            break
        adj, self_loops, groups = _aggregate(adj, self_loops, assignment)
        membership = {
            label: sorted(x for member in members for x in membership[member])
            for label, members in groups.items()
        }
        assignment = {label: i for i, label in enumerate(sorted(adj))}

    flat: dict[str, int] = {}
    for label, cid in assignment.items():
        for original in membership[label]:
            flat[original] = cid
    relabel: dict[int, int] = {}
    for node_id in sorted(flat):
        cid = flat[node_id]
        if cid not in relabel:
            relabel[cid] = len(relabel)
        flat[node_id] = relabel[cid]
    return flat


def louvain(
    g: WeightedGraph,
    resolution: float = 1.0,
    seed: int = 0,
    initial_partition: dict[str, int] | None = None,
) -> CommunityPartition:
    """Two-phase Louvain on weighted modularity.

    Node visit order is shuffled by the given seed, so runs are
    reproducible. Ties in gain keep the first-encountered community under
    that order. An initial partition, when given, seeds the first
    local-moving phase instead of singletons.
    """
    if len(g) == 0:
        raise ValueError("empty graph")
    rng = random.Random(seed)
    adj = g.adjacency()
    self_loops: dict[str, float] = {n: 0.0 for n in g.nodes}
    m = sum(d["weight"] for d in g.edges.values())
    if m == 0:
        assignment = {n: i for i, n in enumerate(sorted(g.nodes))}
        return CommunityPartition(assignment, 0.0)

    membership: dict[str, list[str]] = {n: [n] for n in g.nodes}
    if initial_partition is None:
        assignment = {n: i for i, n in enumerate(sorted(adj))}
    else:
        missing = set(adj) - set(initial_partition)
        if missing:
            raise ValueError(f"initial partition does not cover nodes: {sorted(missing)[:5]}")
        assignment = dict(initial_partition)

    flat = _louvain_core(adj, self_loops, m, rng, resolution, assignment, membership)
    return CommunityPartition(flat, modularity(g, flat, resolution))


def path_dependence(
    g: WeightedGraph,
    reference_year: int | None = None,
    centrality_table: dict[str, tuple[int, float, float]] | None = None,
) -> tuple[float, float]:
    """Spearman correlation between node age and betweenness centrality.

    Age is years since first publication relative to reference_year
    (default: the latest first_year in the graph), so a positive rho means
    earlier forms sit in more central positions.
    """
    table = centrality_table if centrality_table is not None else centralities(g)
    nodes = [n for n in sorted(g.nodes) if g.nodes[n].get("first_year")]
    if len(nodes) < 3:
        raise ValueError("need at least 3 nodes with first_year")
    ref = reference_year
    if ref is None:
        ref = max(g.nodes[n]["first_year"] for n in nodes)
    ages = [float(ref - g.nodes[n]["first_year"]) for n in nodes]
    bets = [table[n][2] for n in nodes]
    return spearman(ages, bets)


def cooccurrence_first_years(g: WeightedGraph) -> dict[tuple[str, str], int]:
    """Sorted term-pair -> first year the pair co-occurred (for precedence stats)."""
    out = {}
    for (u, v), data in g.edges.items():
        if "first_co_year" in data:
            out[(u, v) if u < v else (v, u)] = data["first_co_year"]
    return out
