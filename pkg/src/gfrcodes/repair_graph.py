"""Inner-code graph: packet placement as solid and dashed edges.

Every edge is one coded packet.  Solid edges join nodes of different
families (never the incomplete family to the never-helping part of the
last family) and their packet is replicated at both endpoints.  Dashed
edges join each incomplete-family node to each never-helping node and the
packet lives only at the never-helping endpoint.  Edge classes:

  class 1  solid, both endpoints in complete families
  class 2  solid, complete-family node to incomplete-family node
  class 3  dashed, incomplete-family node to never-helping node

Edges are enumerated class-major and lexicographically within a class so
edge ids, coefficient rows, and serializations are reproducible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .family import FamilyPartition, GroupPlan, partition_node_group

SOLID = "solid"
DASHED = "dashed"

__all__ = [
    "SOLID",
    "DASHED",
    "Edge",
    "RepairGraph",
    "build_repair_graph",
    "build_group_graphs",
    "merge_graphs",
    "incident_edges",
    "export_dot",
    "graph_to_json",
    "edges_from_json",
]


@dataclass(frozen=True)
class Edge:
    u: int
    v: int
    kind: str
    ij_class: int
    edge_id: int

    def endpoints(self):
        return (self.u, self.v)

    def to_json(self):
        return {"u": self.u, "v": self.v, "kind": self.kind, "ij_class": self.ij_class}


@dataclass(frozen=True, eq=False)
class RepairGraph:
    """Edge list plus per-node storage and helper assignments.

    ``partition`` is set for single-group graphs and None for merged
    family-plus graphs; ``n0_nodes`` (ordered) and ``neg_nodes`` are
    always populated and drive tallies and repair classification.
    ``incidence`` is a (max_node+1, n_edges) boolean matrix.
    """

    n: int
    d: int
    nodes: tuple[int, ...]
    edges: tuple[Edge, ...]
    storage_map: Mapping[int, tuple[int, ...]]
    helper_sets: Mapping[int, tuple[int, ...]]
    n0_nodes: tuple[int, ...]
    neg_nodes: tuple[int, ...]
    partition: FamilyPartition | None
    incidence: np.ndarray
    n0_bucket: np.ndarray

    @property
    def n_edges(self):
        return len(self.edges)

    def solid_edges(self):
        return tuple(e for e in self.edges if e.kind == SOLID)

    def dashed_edges(self):
        return tuple(e for e in self.edges if e.kind == DASHED)


def _assemble(nodes, d, edges, n0_nodes, neg_nodes, helper_sets, partition):
    edges = tuple(
        Edge(u=e.u, v=e.v, kind=e.kind, ij_class=e.ij_class, edge_id=i)
        for i, e in enumerate(edges)
    )
    storage: dict[int, list[int]] = {v: [] for v in nodes}
    for e in edges:
        if e.kind == SOLID:
            storage[e.u].append(e.edge_id)
            storage[e.v].append(e.edge_id)
        else:
            storage[e.v].append(e.edge_id)
    top = max(nodes)
    incidence = np.zeros((top + 1, len(edges)), dtype=bool)
    for e in edges:
        incidence[e.u, e.edge_id] = True
        incidence[e.v, e.edge_id] = True
    bucket = np.full(len(edges), -1, dtype=np.int64)
    pos = {u: i for i, u in enumerate(n0_nodes)}
    for e in edges:
        if e.u in pos:
            bucket[e.edge_id] = pos[e.u]
        elif e.v in pos:
            bucket[e.edge_id] = pos[e.v]
    return RepairGraph(
        n=len(nodes),
        d=d,
        nodes=tuple(nodes),
        edges=edges,
        storage_map={v: tuple(sorted(ids)) for v, ids in storage.items()},
        helper_sets=dict(helper_sets),
        n0_nodes=tuple(n0_nodes),
        neg_nodes=tuple(neg_nodes),
        partition=partition,
        incidence=incidence,
        n0_bucket=bucket,
    )


def build_repair_graph(partition):
    """Enumerate the inner-code edges of one family partition."""
    fi = partition.family_index
    c = partition.c
    nodes = partition.nodes
    n0 = partition.node_sets.get(0, ())
    neg = partition.node_sets.get(-c, ())

    complete = [v for v in nodes if fi[v] != 0]
    class1 = [
        Edge(u, v, SOLID, 1, -1)
        for u in complete
        for v in complete
        if u < v and abs(fi[u]) < abs(fi[v])
    ]
    # a pair with |fi(u)| > |fi(v)| but u < v cannot occur: ids follow family order
    class2 = [
        Edge(u, v, SOLID, 2, -1)
        for u in complete
        if fi[u] > 0
        for v in n0
    ]
    class3 = [Edge(u, w, DASHED, 3, -1) for u in n0 for w in neg]

    class1.sort(key=lambda e: (e.u, e.v))
    class2.sort(key=lambda e: (e.u, e.v))
    class3.sort(key=lambda e: (e.u, e.v))
    return _assemble(
        nodes=nodes,
        d=partition.params.d,
        edges=class1 + class2 + class3,
        n0_nodes=n0,
        neg_nodes=neg,
        helper_sets=partition.helper_sets,
        partition=partition,
    )


def build_group_graphs(plan: GroupPlan, d):
    """One repair graph per family-plus group, with global node ids."""
    return [build_repair_graph(partition_node_group(group, d)) for group in plan.groups()]


def merge_graphs(graphs):
    """Fuse per-group graphs into one graph with reassigned dense edge ids."""
    graphs = list(graphs)
    if len(graphs) == 1:
        return graphs[0]
    nodes: list[int] = []
    edges: list[Edge] = []
    helper_sets: dict[int, tuple[int, ...]] = {}
    n0: list[int] = []
    neg: list[int] = []
    for g in graphs:
        nodes.extend(g.nodes)
        edges.extend(g.edges)
        helper_sets.update(g.helper_sets)
        n0.extend(g.n0_nodes)
        neg.extend(g.neg_nodes)
    nodes.sort()
    return _assemble(
        nodes=tuple(nodes),
        d=graphs[0].d,
        edges=edges,
        n0_nodes=tuple(n0),
        neg_nodes=tuple(neg),
        helper_sets=helper_sets,
        partition=None,
    )


def incident_edges(graph, nodes: Iterable[int]):
    """Ids of edges with at least one endpoint in ``nodes``."""
    wanted = set(nodes)
    return {e.edge_id for e in graph.edges if e.u in wanted or e.v in wanted}


def incidence_mask(graph, nodes: Iterable[int]):
    """Boolean edge mask of :func:`incident_edges`, for the rank kernels."""
    idx = list(nodes)
    if not idx:
        return np.zeros(graph.n_edges, dtype=bool)
    return graph.incidence[idx].any(axis=0)


def export_dot(graph, name="repair_graph"):
    """Graphviz source; dashed styling marks the asymmetric edges."""
    lines = [f"graph {name} {{"]
    for v in graph.nodes:
        lines.append(f"  {v};")
    for e in graph.edges:
        style = " [style=dashed]" if e.kind == DASHED else ""
        lines.append(f"  {e.u} -- {e.v}{style};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def graph_to_json(graph):
    return {
        "n": graph.n,
        "d": graph.d,
        "edges": [e.to_json() for e in graph.edges],
    }


def edges_from_json(doc):
    """Edge tuple from a serialized graph, ids assigned in listed order."""
    return tuple(
        Edge(u=int(e["u"]), v=int(e["v"]), kind=e["kind"], ij_class=int(e["ij_class"]), edge_id=i)
        for i, e in enumerate(doc["edges"])
    )


def dumps(graph, **kwargs):
    return json.dumps(graph_to_json(graph), **kwargs)
