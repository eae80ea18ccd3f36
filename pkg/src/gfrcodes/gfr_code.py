"""Outer code: random coefficient assignment and its verification.

Construction is two-phase.  Phase 1 draws one uniform coefficient row per
solid edge, then fills each dashed edge with a uniform random linear
combination of the rows stored at its incomplete-family endpoint, which
bakes in the span property the computed repairs rely on.  Phase 2 is
deterministic checking: either the exhaustive subset test (every edge
subset whose capped tally reaches the file size must have full rank) or
the reconstruction test over all k-node subsets.  Construction simply
redraws with consecutive seeds until a check passes.
"""

from __future__ import annotations

import itertools
import json
import os
from dataclasses import dataclass, field, replace

import numpy as np

from . import galois
from .family import (
    SystemParams,
    family_plus_partition,
    mbr_file_size_family_plus,
    mbr_file_size_fhs,
    partition_families,
)
from .repair_graph import (
    DASHED,
    SOLID,
    build_group_graphs,
    build_repair_graph,
    edges_from_json,
    graph_to_json,
    incidence_mask,
    merge_graphs,
)

ENV_EXHAUSTIVE_LIMIT = "GFR_MAX_EXHAUSTIVE_EDGES"
DEFAULT_EXHAUSTIVE_LIMIT = 20

__all__ = [
    "GfrCode",
    "EdgeSubsetTally",
    "CountTrace",
    "ConstructionError",
    "ExhaustiveLimitError",
    "a_count",
    "count_subroutine",
    "phase1_construct",
    "verify_property1",
    "verify_property2_exhaustive",
    "verify_reconstruction",
    "construct_with_retry",
    "construct_family_plus",
    "code_to_json",
    "code_from_json",
    "exhaustive_limit",
]


class ConstructionError(RuntimeError):
    """All construction attempts failed verification."""

    def __init__(self, message, attempts, witness):
        super().__init__(message)
        self.attempts = attempts
        self.witness = witness


class ExhaustiveLimitError(ValueError):
    """Edge count too large for the exhaustive subset check."""


def exhaustive_limit():
    raw = os.environ.get(ENV_EXHAUSTIVE_LIMIT, "").strip()
    return int(raw) if raw else DEFAULT_EXHAUSTIVE_LIMIT


@dataclass(eq=False)
class GfrCode:
    """A repair graph plus one coefficient row per edge."""

    graph: object
    field_spec: galois.FieldSpec
    file_size: int
    coeff_rows: np.ndarray  # (n_edges, file_size) int64
    seed: int
    params: SystemParams
    scheme: str = "fhs"
    attempts: int = 1


@dataclass(frozen=True)
class EdgeSubsetTally:
    """Capped packet tally of an edge subset.

    ``a`` holds, per incomplete-family node, the number of selected edges
    touching it; ``a0`` counts selected edges touching none of them.  The
    tally caps each per-node count at d because a node's edges can never
    span more than the d packets it stores.
    """

    a0: int
    a: tuple[int, ...]
    a_count: int


@dataclass(frozen=True)
class CountTrace:
    order: tuple[int, ...]
    increments: tuple[int, ...]
    total: int


def a_count(graph, subset):
    """Tally a set of edge ids against the incomplete-family capping rule."""
    d = graph.d
    per = [0] * len(graph.n0_nodes)
    a0 = 0
    for eid in subset:
        b = int(graph.n0_bucket[eid])
        if b < 0:
            a0 += 1
        else:
            per[b] += 1
    total = a0 + sum(min(x, d) for x in per)
    return EdgeSubsetTally(a0=a0, a=tuple(per), a_count=total)


def count_subroutine(graph, s_nodes):
    """Sequential edge count over a k-node set.

    Vertices are visited with the never-helping members last.  Each round
    counts the remaining solid edges at the vertex; for a never-helping
    vertex each remaining dashed edge (u, v) is counted only while u still
    has more remaining edges than there are never-helping nodes, i.e.
    while fewer than d of u's edges have been counted.  All edges at the
    vertex are then removed.
    """
    part = graph.partition
    if part is None:
        raise ValueError("count subroutine needs a single-group graph")
    k = part.params.k
    s_nodes = set(s_nodes)
    if len(s_nodes) != k:
        raise ValueError(f"expected {k} distinct nodes, got {len(s_nodes)}")
    if not s_nodes <= set(graph.nodes):
        raise ValueError("node set outside the graph")

    neg = set(graph.neg_nodes)
    order = sorted(s_nodes - neg) + sorted(s_nodes & neg)
    threshold = len(graph.neg_nodes)

    alive = set(range(graph.n_edges))
    by_node: dict[int, set[int]] = {v: set() for v in graph.nodes}
    for e in graph.edges:
        by_node[e.u].add(e.edge_id)
        by_node[e.v].add(e.edge_id)

    increments = []
    for v in order:
        live_here = by_node[v] & alive
        x = sum(1 for eid in live_here if graph.edges[eid].kind == SOLID)
        if v in neg:
            for eid in live_here:
                e = graph.edges[eid]
                if e.kind == DASHED and e.v == v:
                    u = e.u
                    if len(by_node[u] & alive) > threshold:
                        x += 1
        increments.append(x)
        alive -= live_here
    return CountTrace(order=tuple(order), increments=tuple(increments), total=sum(increments))


def phase1_construct(graph, file_size, field_spec, seed, params=None, scheme="fhs"):
    """Randomized coefficient assignment (deterministic given the seed)."""
    rng = np.random.default_rng(seed)
    q = field_spec.q
    rows = np.zeros((graph.n_edges, file_size), dtype=np.int64)
    solid_ids = [e.edge_id for e in graph.edges if e.kind == SOLID]
    if solid_ids:
        rows[solid_ids] = rng.integers(0, q, size=(len(solid_ids), file_size), dtype=np.int64)
    for e in graph.edges:
        if e.kind != DASHED:
            continue
        stored = graph.storage_map[e.u]  # the d solid rows held by the N_0 endpoint
        lam = rng.integers(0, q, size=len(stored), dtype=np.int64)
        mixed = galois.mul_vec(field_spec, lam[:, None], rows[list(stored)])
        rows[e.edge_id] = np.bitwise_xor.reduce(mixed, axis=0)
    return GfrCode(
        graph=graph,
        field_spec=field_spec,
        file_size=file_size,
        coeff_rows=rows,
        seed=seed,
        params=params,
        scheme=scheme,
    )


def verify_property1(code):
    """Exact span membership of every dashed row in its source node's rows."""
    for e in code.graph.edges:
        if e.kind != DASHED:
            continue
        try:
            dashed_combination(code, e.edge_id)
        except galois.InconsistentSystemError:
            return False
    return True


def dashed_combination(code, edge_id):
    """Coefficients expressing a dashed row over its source node's stored rows."""
    e = code.graph.edges[edge_id]
    if e.kind != DASHED:
        raise ValueError(f"edge {edge_id} is not dashed")
    stored = list(code.graph.storage_map[e.u])
    basis = code.coeff_rows[stored]  # (d, M)
    target = code.coeff_rows[edge_id]
    # lam @ basis = target, i.e. basis^T lam = target^T
    try:
        return galois.solve(code.field_spec, basis.T, target)
    except galois.UnsolvableError:
        # rank-deficient basis: augment-and-compare instead
        aug = np.vstack([basis, target[None, :]])
        if galois.rank(code.field_spec, aug) != galois.rank(code.field_spec, basis):
            raise galois.InconsistentSystemError("dashed row outside source node span")
        # pick any particular solution via pivoted elimination on the
        # consistent underdetermined system: zero the free coefficients
        r = galois.rank(code.field_spec, basis)
        for subset in itertools.combinations(range(len(stored)), r):
            sub = basis[list(subset)]
            if galois.rank(code.field_spec, sub) != r:
                continue
            try:
                lam_sub = galois.solve(code.field_spec, sub.T, target)
            except (galois.UnsolvableError, galois.InconsistentSystemError):
                continue
            lam = np.zeros(len(stored), dtype=np.int64)
            lam[list(subset)] = lam_sub
            return lam
        raise galois.InconsistentSystemError("dashed row outside source node span")


def verify_reconstruction(code, k=None):
    """Check rank over edges incident to every k-subset of nodes.

    Returns (True, None) or (False, first_failing_node_tuple).
    """
    graph = code.graph
    if k is None:
        k = code.params.k
    subsets = list(itertools.combinations(graph.nodes, k))
    masks = np.stack([incidence_mask(graph, s) for s in subsets])
    ranks = galois.subset_ranks(code.field_spec, code.coeff_rows, masks)
    bad = np.nonzero(ranks != code.file_size)[0]
    if bad.size:
        return False, subsets[int(bad[0])]
    return True, None


def verify_property2_exhaustive(code, max_edges=None):
    """Exhaustive subset check: tally >= file size must imply full rank.

    Returns (True, None) or (False, failing_edge_id_tuple).  Refuses to
    run past the configured edge limit; use :func:`verify_reconstruction`
    for larger codes.
    """
    graph = code.graph
    limit = exhaustive_limit() if max_edges is None else max_edges
    if graph.n_edges > limit:
        raise ExhaustiveLimitError(
            f"{graph.n_edges} edges exceed the exhaustive limit {limit}; "
            "use verify_reconstruction instead"
        )
    log, exp = galois._spec_tables(code.field_spec)
    from . import _kernels

    mask = _kernels.gf_property2_scan(
        np.ascontiguousarray(code.coeff_rows),
        graph.n0_bucket,
        len(graph.n0_nodes),
        graph.d,
        code.file_size,
        log,
        exp,
        code.field_spec.q,
    )
    mask = int(mask)
    if mask < 0:
        return True, None
    witness = tuple(e for e in range(graph.n_edges) if (mask >> e) & 1)
    return False, witness


def _passes(code, check):
    if check == "auto":
        check = "property2" if code.graph.n_edges <= exhaustive_limit() else "reconstruction"
    if check == "property2":
        return verify_property2_exhaustive(code)
    if check == "reconstruction":
        return verify_reconstruction(code)
    raise ValueError(f"unknown check {check!r}")


def construct_with_retry(params, field_spec, max_attempts=64, base_seed=0, check="auto"):
    """Draw Phase-1 codes with seeds base_seed, base_seed+1, ... until one
    passes the configured Phase-2 check."""
    if max_attempts < 1:
        raise ValueError("max_attempts must be >= 1")
    graph = build_repair_graph(partition_families(params))
    file_size = mbr_file_size_fhs(params)
    witness = None
    for attempt in range(max_attempts):
        seed = base_seed + attempt
        code = phase1_construct(graph, file_size, field_spec, seed, params=params, scheme="fhs")
        ok, witness = _passes(code, check)
        if ok:
            code.attempts = attempt + 1
            return code
    raise ConstructionError(
        f"no code found in {max_attempts} attempts from seed {base_seed}",
        attempts=max_attempts,
        witness=witness,
    )


def construct_family_plus(params, field_spec, base_seed=0, max_attempts=64):
    """Family-plus construction: per-group inner graphs, global file size,
    reconstruction check over every global k-subset."""
    if max_attempts < 1:
        raise ValueError("max_attempts must be >= 1")
    plan = family_plus_partition(params)
    graph = merge_graphs(build_group_graphs(plan, params.d))
    file_size = mbr_file_size_family_plus(params)
    witness = None
    for attempt in range(max_attempts):
        seed = base_seed + attempt
        code = phase1_construct(
            graph, file_size, field_spec, seed, params=params, scheme="family-plus"
        )
        ok, witness = verify_reconstruction(code)
        if ok:
            code.attempts = attempt + 1
            return code
    raise ConstructionError(
        f"no family-plus code found in {max_attempts} attempts from seed {base_seed}",
        attempts=max_attempts,
        witness=witness,
    )


def build_graph_for(params, scheme):
    if scheme == "fhs":
        return build_repair_graph(partition_families(params))
    if scheme == "family-plus":
        return merge_graphs(build_group_graphs(family_plus_partition(params), params.d))
    raise ValueError(f"unknown scheme {scheme!r}")


def code_to_json(code):
    spec = code.field_spec
    doc = {
        "params": {"n": code.params.n, "k": code.params.k, "d": code.params.d},
        "field": spec.to_json(),
        "M": code.file_size,
        "seed": code.seed,
        "scheme": code.scheme,
        "edges": [],
    }
    for e in code.graph.edges:
        entry = e.to_json()
        entry["coeffs"] = [spec.element_to_hex(v) for v in code.coeff_rows[e.edge_id]]
        doc["edges"].append(entry)
    return doc


def code_from_json(doc):
    params = SystemParams(**{k: int(v) for k, v in doc["params"].items()})
    spec = galois.FieldSpec.from_json(doc["field"])
    scheme = doc.get("scheme", "fhs")
    graph = build_graph_for(params, scheme)
    listed = edges_from_json(doc)
    built = tuple((e.u, e.v, e.kind, e.ij_class) for e in graph.edges)
    if built != tuple((e.u, e.v, e.kind, e.ij_class) for e in listed):
        raise ValueError("edge list does not match the graph for these parameters")
    file_size = int(doc["M"])
    rows = np.zeros((graph.n_edges, file_size), dtype=np.int64)
    for i, entry in enumerate(doc["edges"]):
        coeffs = entry["coeffs"]
        if len(coeffs) != file_size:
            raise ValueError(f"edge {i}: expected {file_size} coefficients")
        rows[i] = [spec.element_from_hex(h) for h in coeffs]
    return GfrCode(
        graph=graph,
        field_spec=spec,
        file_size=file_size,
        coeff_rows=rows,
        seed=int(doc["seed"]),
        params=params,
        scheme=scheme,
    )


def dumps(code, **kwargs):
    return json.dumps(code_to_json(code), **kwargs)


def loads(text):
    return code_from_json(json.loads(text))
