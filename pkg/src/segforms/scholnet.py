"""Knowledge-production networks: co-citation, coupling, co-authorship.

Reference strings are collapsed to normalized keys (surname | year | first
title tokens) so the same work cited with formatting differences counts as
one node. Threshold order matters and is fixed: minimum-weight filtering
first, then top-k truncation by total link strength.
"""

from __future__ import annotations

import csv
import random
import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from .conet import CommunityPartition, _aggregate, _louvain_core, louvain, modularity
from .corpus import CorpusStore
from .graphs import WeightedGraph
from .textutil import fold_diacritics, tokenize_text

_YEAR_RE = re.compile(r"\b(1[5-9]\d{2}|20\d{2})\b")
_TITLE_TOKENS = 5


@dataclass(frozen=True)
class ReferenceKey:
    key: str
    surname: str | None = None
    year: int | None = None
    title_prefix: tuple[str, ...] = ()

    @property
    def parsed(self) -> bool:
        return self.surname is not None and self.year is not None


def _normalize_raw(raw: str) -> str:
    text = fold_diacritics(raw).lower()
    text = re.sub(r"[^\w\s]", " ", text)
    return re.sub(r"\s+", " ", text).strip()


def normalize_reference(raw: str) -> ReferenceKey:
    """Collapse a raw reference string to a matching key.

    Parseable references yield surname|year|<first 5 title tokens>; the
    title is taken from the text after the year when present (author-year
    styles), else from the comma segment with the most words (database
    styles with trailing years). Unparseable references fall back to the
    full normalized string.
    """
    raw = raw.strip()
    normalized = _normalize_raw(raw)
    match = _YEAR_RE.search(raw)
    tokens = normalized.split()
    surname = next((t for t in tokens if len(t) >= 2 and t.isalpha()), None)
    if not match or surname is None:
        return ReferenceKey(key=normalized)
    year = int(match.group(0))

    after = raw[match.end():]
    after = after.lstrip(" )].,:;-")
    title_source = after.split(".")[0] if after else ""
    title_tokens = tokenize_text(title_source)
    if len([t for t in title_tokens if len(t) >= 2]) < 2:
        segments = [s for s in raw.split(",") if _YEAR_RE.search(s) is None]
        best = max(
            segments,
            key=lambda s: len([t for t in tokenize_text(s) if len(t) >= 2]),
            default="",
        )
        title_tokens = tokenize_text(best)
    prefix = tuple(title_tokens[:_TITLE_TOKENS])
    key = "|".join([surname, str(year), *prefix])
    return ReferenceKey(key=key, surname=surname, year=year, title_prefix=prefix)


def _apply_top_k(g: WeightedGraph, top_k: int) -> WeightedGraph:
    strength = g.total_link_strength()
    ranked = sorted(g.nodes, key=lambda n: (-strength[n], n))
    keep = set(ranked[:top_k])
    return g.subgraph(keep)


def build_cocitation(
    store: CorpusStore,
    min_cocitations: int = 10,
    top_k: int = 1000,
    exclude_keys: set[str] | None = None,
) -> WeightedGraph:
    """Reference co-citation network.

    Two references are linked once per corpus document citing both; edges
    under min_cocitations are dropped, then the top_k nodes by total link
    strength are kept (ties broken by node id). citation_count on each node
    is the number of corpus documents citing that reference.
    """
    exclude = exclude_keys or set()
    g = WeightedGraph()
    citation_count: Counter = Counter()
    for record in store:
        keys = sorted(
            {
                rk.key
                for ref in record.references
                if (rk := normalize_reference(ref)).key and rk.key not in exclude
            }
        )
        for key in keys:
            citation_count[key] += 1
        for i in range(len(keys)):
            for j in range(i + 1, len(keys)):
                g.increment_edge(keys[i], keys[j])
    for key, count in citation_count.items():
        g.add_node(key, label=key, citation_count=count)

    for edge_key in [k for k, d in g.edges.items() if d["weight"] < min_cocitations]:
        del g.edges[edge_key]
    return _apply_top_k(g, top_k)


def _normalize_journal(source_title: str) -> str:
    return re.sub(r"\s+", " ", fold_diacritics(source_title).lower()).strip()


def build_coupling(store: CorpusStore, min_citations: int = 5, top_k: int = 1000) -> WeightedGraph:
    """Journal bibliographic-coupling network.

    Journals are coupled by the references they share: edge weight is the
    size of the intersection of their cited-reference key sets. Journals
    whose corpus documents carry fewer than min_citations reference entries
    are dropped before pairing; then the top_k journals by total link
    strength are kept.
    """
    refs_of: dict[str, set[str]] = {}
    n_citations: Counter = Counter()
    doc_count: Counter = Counter()
    label_of: dict[str, str] = {}
    for record in store:
        if not record.source_title:
            continue
        journal = _normalize_journal(record.source_title)
        label_of.setdefault(journal, record.source_title.strip())
        doc_count[journal] += 1
        n_citations[journal] += len(record.references)
        bucket = refs_of.setdefault(journal, set())
        for ref in record.references:
            key = normalize_reference(ref).key
            if key:
                bucket.add(key)

    kept = sorted(j for j in refs_of if n_citations[j] >= min_citations)
    g = WeightedGraph()
    for journal in kept:
        g.add_node(journal, label=label_of[journal], doc_count=doc_count[journal])
    for i in range(len(kept)):
        for j in range(i + 1, len(kept)):
            shared = len(refs_of[kept[i]] & refs_of[kept[j]])
            if shared > 0:
                g.add_edge(kept[i], kept[j], weight=shared)
    return _apply_top_k(g, top_k)


def build_coauthorship_countries(store: CorpusStore, min_docs: int = 5) -> WeightedGraph:
    """Country co-authorship network over countries with >= min_docs documents."""
    doc_count: Counter = Counter()
    for record in store:
        for country in record.countries:
            doc_count[country] += 1
    kept = {c for c, n in doc_count.items() if n >= min_docs}
    g = WeightedGraph()
    for country in sorted(kept):
        g.add_node(country, label=country, doc_count=doc_count[country])
    for record in store:
        countries = sorted(c for c in record.countries if c in kept)
        for i in range(len(countries)):
            for j in range(i + 1, len(countries)):
                g.increment_edge(countries[i], countries[j])
    return g


def slm_cluster(g: WeightedGraph, seed: int = 0, resolution: float = 1.0) -> CommunityPartition:
    """Louvain plus a smart-local-moving style refinement.

    Each Louvain community is split by local moving inside its own
    subgraph; the split parts then re-enter the phase loop as units,
    starting from the original community grouping. Since that start
    reproduces the Louvain partition and moves only ever improve it, the
    result's modularity is >= plain Louvain's for the same seed.
    """
    base = louvain(g, resolution=resolution, seed=seed)
    communities = base.communities()

    refined: dict[str, int] = {}
    next_cid = 0
    for cid in sorted(communities):
        members = communities[cid]
        if len(members) == 1:
            refined[members[0]] = next_cid
            next_cid += 1
            continue
        sub = g.subgraph(set(members))
        if sub.n_edges == 0:
            for node_id in members:
                refined[node_id] = next_cid
                next_cid += 1
            continue
        sub_part = louvain(sub, resolution=resolution, seed=seed)
        offsets: dict[int, int] = {}
        for node_id in members:
            sub_cid = sub_part.assignment[node_id]
            if sub_cid not in offsets:
                offsets[sub_cid] = next_cid
                next_cid += 1
            refined[node_id] = offsets[sub_cid]

    adj = g.adjacency()
    self_loops = {n: 0.0 for n in g.nodes}
    m = sum(d["weight"] for d in g.edges.values())
    if m == 0:
        return base
    agg_adj, agg_loops, groups = _aggregate(adj, self_loops, refined)
    parent_of: dict[str, int] = {}
    membership: dict[str, list[str]] = {}
    for label, members in groups.items():
        parent_of[label] = base.assignment[members[0]]
        membership[label] = sorted(members)

    rng = random.Random(seed)
    flat = _louvain_core(agg_adj, agg_loops, m, rng, resolution, parent_of, membership)
    q = modularity(g, flat, resolution)
    if q < base.modularity:
        return base
    relabel: dict[int, int] = {}
    for node_id in sorted(flat):
        if flat[node_id] not in relabel:
            relabel[flat[node_id]] = len(relabel)
        flat[node_id] = relabel[flat[node_id]]
    return CommunityPartition(flat, q)


def node_table_csv(
    g: WeightedGraph,
    partition: CommunityPartition | None,
    path: str | Path,
    count_attr: str = "citation_count",
) -> None:
    """CSV of (node, count attribute, total link strength, community)."""
    strength = g.total_link_strength()
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["node", count_attr, "total_link_strength", "community"])
        for node_id in sorted(g.nodes, key=lambda n: (-strength[n], n)):
            writer.writerow(
                [
                    node_id,
                    g.nodes[node_id].get(count_attr, ""),
                    strength[node_id],
                    partition.assignment[node_id] if partition else "",
                ]
            )
