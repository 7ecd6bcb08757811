"""Bottom-up ontology assembly.

Embeddings come in through a file contract (no model is ever loaded here);
forms are grouped by cosine-distance complete-linkage agglomeration, the
dendrogram is cut into starting clusters for human labeling, multi-label
type assignments are validated, and the type-type network is derived from
forms that carry several labels.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .extract import CandidateSet
from .graphs import WeightedGraph
from .kernels import complete_linkage

MAX_LABELS_PER_FORM = 8


@dataclass
class EmbeddingTable:
    terms: list[str]
    vectors: np.ndarray  # (n_terms, dimension)
    model_tag: str
    warnings: list[str] = field(default_factory=list)

    @property
    def dimension(self) -> int:
        return int(self.vectors.shape[1])

    def __len__(self) -> int:
        return len(self.terms)


def load_embeddings(path: str | Path, expected_terms: set[str] | None = None) -> EmbeddingTable:
    """Read a JSON-lines embedding file: header {dimension, model_tag}, then {term, vector} rows.

    Structural problems (dimension mismatch, non-finite values, duplicate
    terms) raise; terms expected but absent are reported as warnings.
    """
    path = Path(path)
    terms: list[str] = []
    rows: list[list[float]] = []
    header: dict | None = None
    with path.open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            if header is None:
                if "dimension" not in obj:
                    raise ValueError(f"{path}: first line must be a header with 'dimension'")
                header = obj
                continue
            term, vector = obj["term"], obj["vector"]
            if len(vector) != header["dimension"]:
                raise ValueError(
                    f"{path}:{line_no}: vector of dim {len(vector)} != header dim {header['dimension']}"
                )
            if any(not math.isfinite(x) for x in vector):
                raise ValueError(f"{path}:{line_no}: non-finite component in {term!r}")
            if term in terms:
                raise ValueError(f"{path}:{line_no}: duplicate term {term!r}")
            terms.append(term)
            rows.append([float(x) for x in vector])
    if header is None:
        raise ValueError(f"{path}: empty file")
    vectors = np.array(rows, dtype=np.float64) if rows else np.zeros((0, header["dimension"]))
    table = EmbeddingTable(terms=terms, vectors=vectors, model_tag=header.get("model_tag", ""))
    if expected_terms:
        missing = sorted(expected_terms - set(terms))
        if missing:
            table.warnings.append(f"missing embeddings for {len(missing)} terms: {', '.join(missing[:10])}")
    return table


def write_embeddings(path: str | Path, terms: list[str], vectors, model_tag: str) -> None:
    vectors = np.asarray(vectors, dtype=np.float64)
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(json.dumps({"dimension": int(vectors.shape[1]) if len(terms) else 0, "model_tag": model_tag}) + "\n")
        for term, vec in zip(terms, vectors):
            fh.write(json.dumps({"term": term, "vector": [float(x) for x in vec]}) + "\n")


def cosine_distance_matrix(table: EmbeddingTable) -> np.ndarray:
    """d(i, j) = 1 - cos(v_i, v_j); zero diagonal; zero vectors are an error."""
    if len(table) < 2:
        raise ValueError("need at least 2 terms")
    norms = np.linalg.norm(table.vectors, axis=1)
    if np.any(norms == 0):
        bad = [table.terms[i] for i in np.flatnonzero(norms == 0)]
        raise ValueError(f"zero vector for terms: {bad}")
    unit = table.vectors / norms[:, None]
    sim = unit @ unit.T
    dist = 1.0 - sim
    np.fill_diagonal(dist, 0.0)
    return dist


@dataclass
class Dendrogram:
    labels: list[str]  # leaf index -> term
    merges: list[tuple[int, int, float, int]]  # (cluster_a, cluster_b, distance, new_id)

    def __post_init__(self):
        dists = [m[2] for m in self.merges]
        if any(b < a - 1e-12 for a, b in zip(dists, dists[1:])):
            raise AssertionError("complete-linkage merge distances must be nondecreasing")
        if self.merges and len(self.merges) != len(self.labels) - 1:
            raise ValueError("merge list does not unify all leaves")

    @property
    def n_leaves(self) -> int:
        return len(self.labels)


def agglomerative_complete(dmatrix, labels: list[str] | None = None) -> Dendrogram:
    """Repeatedly merge the pair of clusters at minimal complete-linkage
    distance (maximum pairwise member distance); ties break on the smallest
    (cluster_a, cluster_b) id pair."""
    dmatrix = np.asarray(dmatrix, dtype=np.float64)
    n = dmatrix.shape[0]
    if dmatrix.ndim != 2 or dmatrix.shape[1] != n:
        raise ValueError("distance matrix must be square")
    if not np.allclose(dmatrix, dmatrix.T, atol=1e-12):
        raise ValueError("distance matrix must be symmetric")
    if labels is None:
        labels = [str(i) for i in range(n)]
    if len(labels) != n:
        raise ValueError("labels length mismatch")
    merges = complete_linkage(dmatrix)
    return Dendrogram(labels=list(labels), merges=merges)


def cut_dendrogram(
    dg: Dendrogram,
    n_clusters: int | None = None,
    distance: float | None = None,
) -> dict[str, int]:
    """Flat clustering from the dendrogram.

    Exactly one criterion: n_clusters=k applies the first n-k merges;
    distance=t applies every merge at distance <= t. Returns label ->
    cluster id, ids numbered by each cluster's smallest leaf index.
    """
    if (n_clusters is None) == (distance is None):
        raise ValueError("give exactly one of n_clusters or distance")
    n = dg.n_leaves
    if n_clusters is not None:
        if not (1 <= n_clusters <= n):
            raise ValueError(f"n_clusters must be in [1, {n}]")
        selected = dg.merges[: n - n_clusters]
    else:
        selected = [m for m in dg.merges if m[2] <= distance]

    parent = list(range(n + len(dg.merges)))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b, _, new_id in selected:
        ra, rb = find(a), find(b)
        parent[ra] = new_id
        parent[rb] = new_id

    roots: dict[int, list[int]] = {}
    for leaf in range(n):
        roots.setdefault(find(leaf), []).append(leaf)
    clusters = sorted(roots.values(), key=lambda leaves: leaves[0])
    out: dict[str, int] = {}
    for cid, leaves in enumerate(clusters):
        for leaf in leaves:
            out[dg.labels[leaf]] = cid
    return out


def lexical_fallback_similarity(forms: CandidateSet | list[str]) -> tuple[list[str], np.ndarray]:
    """Deterministic stand-in distances when no embedding file is supplied.

    d = 1 - Jaccard(qualifier token sets); the anchor (last) token is
    excluded so it does not make everything similar to everything.
    """
    if isinstance(forms, dict):
        term_tuples = sorted(forms)
    else:
        term_tuples = [tuple(t.split()) for t in forms]
    labels = [" ".join(t) for t in term_tuples]
    qualifier_sets = [frozenset(t[:-1]) for t in term_tuples]
    n = len(labels)
    dist = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        for j in range(i + 1, n):
            a, b = qualifier_sets[i], qualifier_sets[j]
            union = a | b
            jac = (len(a & b) / len(union)) if union else 1.0
            dist[i, j] = dist[j, i] = 1.0 - jac
    return labels, dist


@dataclass
class TypeLabeling:
    labels: dict[str, tuple[str, ...]]  # form -> 1..8 type labels
    universe: tuple[str, ...]

    def __post_init__(self):
        allowed = set(self.universe)
        for form, types in self.labels.items():
            if not (1 <= len(types) <= MAX_LABELS_PER_FORM):
                raise ValueError(
                    f"{form!r}: {len(types)} labels; each form carries 1..{MAX_LABELS_PER_FORM}"
                )
            unknown = [t for t in types if t not in allowed]
            if unknown:
                raise ValueError(f"{form!r}: unknown types {unknown}")

    def freq(self) -> dict[str, int]:
        out = {t: 0 for t in self.universe}
        for types in self.labels.values():
            for t in types:
                out[t] += 1
        return out


def load_labeling_csv(path: str | Path) -> dict[str, tuple[str, ...]]:
    """Per-form override file: form, label1..label8 (blanks allowed)."""
    overrides: dict[str, tuple[str, ...]] = {}
    with Path(path).open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return overrides
        for row in reader:
            if not row or not row[0].strip():
                continue
            form = row[0].strip()
            labels = tuple(cell.strip() for cell in row[1:] if cell.strip())
            if labels:
                overrides[form] = labels
    return overrides


def apply_labeling(
    clustering: dict[str, int],
    cluster_labels: dict[int, str],
    overrides: dict[str, tuple[str, ...]] | None = None,
    universe: list[str] | None = None,
) -> TypeLabeling:
    """Merge cluster-default labels with explicit per-form multi-label overrides.

    Every form in the clustering gets its cluster's label unless an
    override row replaces it; overrides may only reference known forms and
    types and must respect the 1..8 bound.
    """
    overrides = overrides or {}
    unknown_forms = sorted(set(overrides) - set(clustering))
    if unknown_forms:
        raise ValueError(f"overrides reference unknown forms: {unknown_forms[:5]}")
    if universe is None:
        seen = set(cluster_labels.values())
        for types in overrides.values():
            seen.update(types)
        universe = sorted(seen)
    labels: dict[str, tuple[str, ...]] = {}
    for form, cluster in clustering.items():
        if form in overrides:
            labels[form] = overrides[form]
        else:
            if cluster not in cluster_labels:
                raise ValueError(f"cluster {cluster} of form {form!r} has no label")
            labels[form] = (cluster_labels[cluster],)
    return TypeLabeling(labels=labels, universe=tuple(universe))


@dataclass
class OntologyGraph:
    labeling: TypeLabeling
    type_freq: dict[str, int]
    type_edges: dict[tuple[str, str], int]  # sorted (a, b) -> shared-form count

    def to_json(self, path: str | Path) -> None:
        types = sorted(self.type_freq)
        payload = {
            "types": [{"id": i, "label": t, "freq": self.type_freq[t]} for i, t in enumerate(types)],
            "forms": [
                {"term": form, "labels": list(labels)}
                for form, labels in sorted(self.labeling.labels.items())
            ],
            "type_edges": [
                {"a": a, "b": b, "weight": w} for (a, b), w in sorted(self.type_edges.items())
            ],
        }
        Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    def to_graphml(self, path: str | Path) -> None:
        g = WeightedGraph()
        for t in sorted(self.type_freq):
            g.add_node(f"type:{t}", kind="type", label=t, freq=self.type_freq[t])
        for form, labels in sorted(self.labeling.labels.items()):
            g.add_node(f"form:{form}", kind="form", label=form)
            for t in labels:
                g.add_edge(f"form:{form}", f"type:{t}", weight=1, kind="membership")
        for (a, b), w in sorted(self.type_edges.items()):
            g.add_edge(f"type:{a}", f"type:{b}", weight=w, kind="type_type")
        g.to_graphml(path)


def type_network(labeling: TypeLabeling) -> OntologyGraph:
    """Type-type edges weighted by the number of forms carrying both labels."""
    freq = labeling.freq()
    edges: dict[tuple[str, str], int] = {}
    for form, labels in labeling.labels.items():
        distinct = sorted(set(labels))
        for i in range(len(distinct)):
            for j in range(i + 1, len(distinct)):
                key = (distinct[i], distinct[j])
                edges[key] = edges.get(key, 0) + 1
    return OntologyGraph(labeling=labeling, type_freq=freq, type_edges=edges)
