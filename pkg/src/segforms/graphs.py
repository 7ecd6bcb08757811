"""Undirected weighted graph container and its serializations.

Shared by the co-occurrence and knowledge-production network builders.
Edges are stored once per unordered pair; exports are deterministic
(nodes and edges emitted in sorted order).
"""

from __future__ import annotations

import csv
import json
import xml.etree.ElementTree as ET
from pathlib import Path


class WeightedGraph:
    """Simple undirected graph: no self-loops, one edge per unordered pair."""

    def __init__(self):
        self.nodes: dict[str, dict] = {}
        self.edges: dict[tuple[str, str], dict] = {}

    # -- construction ---------------------------------------------------------

    def add_node(self, node_id: str, **attrs) -> None:
        self.nodes.setdefault(node_id, {}).update(attrs)

    @staticmethod
    def _key(u: str, v: str) -> tuple[str, str]:
        if u == v:
            raise ValueError(f"self-loop not allowed: {u!r}")
        return (u, v) if u < v else (v, u)

    def add_edge(self, u: str, v: str, weight: float = 1, **attrs) -> None:
        """Set edge weight/attributes (replacing any previous values)."""
        if weight <= 0:
            raise ValueError("edge weight must be positive")
        self.add_node(u)
        self.add_node(v)
        data = self.edges.setdefault(self._key(u, v), {"weight": 0})
        data["weight"] = weight
        data.update(attrs)

    def increment_edge(self, u: str, v: str, amount: float = 1) -> dict:
        self.add_node(u)
        self.add_node(v)
        data = self.edges.setdefault(self._key(u, v), {"weight": 0})
        data["weight"] += amount
        return data

    def remove_node(self, node_id: str) -> None:
        self.nodes.pop(node_id, None)
        for key in [k for k in self.edges if node_id in k]:
            del self.edges[key]

    # -- queries ----------------------------------------------------------------

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def has_edge(self, u: str, v: str) -> bool:
        return self._key(u, v) in self.edges

    def edge(self, u: str, v: str) -> dict:
        return self.edges[self._key(u, v)]

    def weight(self, u: str, v: str) -> float:
        return self.edges[self._key(u, v)]["weight"]

    def neighbors(self, node_id: str) -> list[str]:
        out = []
        for (a, b) in self.edges:
            if a == node_id:
                out.append(b)
            elif b == node_id:
                out.append(a)
        return sorted(out)

    def adjacency(self) -> dict[str, dict[str, float]]:
        adj: dict[str, dict[str, float]] = {n: {} for n in self.nodes}
        for (u, v), data in self.edges.items():
            adj[u][v] = data["weight"]
            adj[v][u] = data["weight"]
        return adj

    def degree(self, node_id: str) -> int:
        return len(self.adjacency()[node_id])

    def total_link_strength(self) -> dict[str, float]:
        strength = {n: 0.0 for n in self.nodes}
        for (u, v), data in self.edges.items():
            strength[u] += data["weight"]
            strength[v] += data["weight"]
        return strength

    def subgraph(self, keep: set[str]) -> "WeightedGraph":
        sub = WeightedGraph()
        for node_id in sorted(keep):
            if node_id in self.nodes:
                sub.add_node(node_id, **self.nodes[node_id])
        for (u, v), data in self.edges.items():
            if u in keep and v in keep:
                sub.edges[(u, v)] = dict(data)
        return sub

    def csr(self) -> tuple[list[str], list[int], list[int]]:
        """Node list plus CSR adjacency (indptr, indices) over sorted node ids."""
        order = sorted(self.nodes)
        index = {n: i for i, n in enumerate(order)}
        neigh: list[list[int]] = [[] for _ in order]
        for (u, v) in self.edges:
            neigh[index[u]].append(index[v])
            neigh[index[v]].append(index[u])
        indptr = [0]
        indices: list[int] = []
        for lst in neigh:
            indices.extend(sorted(lst))
            indptr.append(len(indices))
        return order, indptr, indices

    # -- serialization ---------------------------------------------------------

    _GRAPHML_TYPES = {int: "long", float: "double", bool: "boolean", str: "string"}

    def to_graphml(self, path: str | Path) -> None:
        """GraphML with typed keys for every node/edge attribute in use."""
        node_keys: dict[str, str] = {}
        edge_keys: dict[str, str] = {}
        for attrs in self.nodes.values():
            for k, v in attrs.items():
                if isinstance(v, (int, float, bool, str)):
                    node_keys.setdefault(k, self._GRAPHML_TYPES[type(v)])
        for data in self.edges.values():
            for k, v in data.items():
                if isinstance(v, (int, float, bool, str)):
                    edge_keys.setdefault(k, self._GRAPHML_TYPES[type(v)])

        root = ET.Element("graphml", xmlns="http://graphml.graphdrawing.org/xmlns")
        for name, gtype in sorted(node_keys.items()):
            ET.SubElement(root, "key", id=f"n_{name}", **{"for": "node", "attr.name": name, "attr.type": gtype})
        for name, gtype in sorted(edge_keys.items()):
            ET.SubElement(root, "key", id=f"e_{name}", **{"for": "edge", "attr.name": name, "attr.type": gtype})
        graph = ET.SubElement(root, "graph", id="G", edgedefault="undirected")
        for node_id in sorted(self.nodes):
            el = ET.SubElement(graph, "node", id=node_id)
            for k in sorted(node_keys):
                if k in self.nodes[node_id]:
                    v = self.nodes[node_id][k]
                    data = ET.SubElement(el, "data", key=f"n_{k}")
                    data.text = str(v).lower() if isinstance(v, bool) else str(v)
        for (u, v) in sorted(self.edges):
            el = ET.SubElement(graph, "edge", source=u, target=v)
            for k in sorted(edge_keys):
                if k in self.edges[(u, v)]:
                    val = self.edges[(u, v)][k]
                    data = ET.SubElement(el, "data", key=f"e_{k}")
                    data.text = str(val).lower() if isinstance(val, bool) else str(val)
        ET.indent(root)
        tree = ET.ElementTree(root)
        tree.write(path, encoding="utf-8", xml_declaration=True)

    def to_json(self, path: str | Path) -> None:
        """Edge-list JSON: {nodes: [{id, ...attrs}], edges: [{source, target, ...attrs}]}."""
        payload = {
            "nodes": [
                {"id": node_id, **{k: v for k, v in sorted(self.nodes[node_id].items()) if not k.startswith("_")}}
                for node_id in sorted(self.nodes)
            ],
            "edges": [
                {
                    "source": u,
                    "target": v,
                    **{k: v2 for k, v2 in sorted(self.edges[(u, v)].items()) if not k.startswith("_")},
                }
                for (u, v) in sorted(self.edges)
            ],
        }
        Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    @classmethod
    def from_json(cls, path: str | Path) -> "WeightedGraph":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        g = cls()
        for node in payload["nodes"]:
            attrs = {k: v for k, v in node.items() if k != "id"}
            g.add_node(node["id"], **attrs)
        for edge in payload["edges"]:
            attrs = {k: v for k, v in edge.items() if k not in ("source", "target")}
            weight = attrs.pop("weight", 1)
            g.add_edge(edge["source"], edge["target"], weight=weight, **attrs)
        return g


def centrality_csv(
    table: dict[str, tuple[int, float, float]],
    graph: WeightedGraph,
    path: str | Path,
) -> None:
    """Centrality table sorted by betweenness (desc), then node id."""
    rows = sorted(table.items(), key=lambda kv: (-kv[1][2], kv[0]))
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["node", "first_year", "degree", "weighted_degree", "betweenness"])
        for node_id, (degree, wdegree, betweenness) in rows:
            first_year = graph.nodes[node_id].get("first_year", "")
            writer.writerow([node_id, first_year, degree, wdegree, f"{betweenness:.2f}"])
