"""Operate a concrete storage system built from a constructed code.

Payloads are vectors of field symbols (length configurable, default 1);
the payload of an edge is its coefficient row times the file.  Solid-edge
packets are replicated at both endpoints, so those repairs are plain
copies; a never-helping node additionally receives its dashed packets
recomputed by the incomplete-family helpers from what they store.  The
model is single-failure: each repair completes before the next fault.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import galois
from .gfr_code import dashed_combination
from .repair_graph import DASHED, SOLID

__all__ = [
    "SimulationError",
    "ReconstructionError",
    "RepairReport",
    "TraceReport",
    "SystemState",
    "encode_file",
    "fail_and_repair",
    "reconstruct",
    "run_trace",
]


class SimulationError(RuntimeError):
    pass


class ReconstructionError(RuntimeError):
    pass


@dataclass(frozen=True)
class RepairReport:
    failed_node: int
    helpers: tuple[int, ...]
    transferred_packets: int
    computed_packets: int
    exact: bool

    def to_json(self):
        return {
            "failed_node": self.failed_node,
            "helpers": list(self.helpers),
            "transferred_packets": self.transferred_packets,
            "computed_packets": self.computed_packets,
            "exact": self.exact,
        }


@dataclass
class SystemState:
    code: object
    packet_len: int
    payloads: np.ndarray  # (n_edges, packet_len) reference encoding
    node_contents: dict[int, dict[int, np.ndarray]]
    history: list[RepairReport] = field(default_factory=list)

    @property
    def graph(self):
        return self.code.graph


def encode_file(code, file_packets):
    """Materialize node contents for a file of exactly M packets.

    ``file_packets`` is (M,) or (M, packet_len) field symbols.
    """
    file_mat = np.asarray(file_packets, dtype=np.int64)
    if file_mat.ndim == 1:
        file_mat = file_mat.reshape(-1, 1)
    if file_mat.shape[0] != code.file_size:
        raise ValueError(
            f"file has {file_mat.shape[0]} packets, code protects {code.file_size}"
        )
    payloads = galois.matmul(code.field_spec, code.coeff_rows, file_mat)
    contents = {
        v: {eid: payloads[eid].copy() for eid in stored}
        for v, stored in code.graph.storage_map.items()
    }
    return SystemState(
        code=code,
        packet_len=file_mat.shape[1],
        payloads=payloads,
        node_contents=contents,
    )


def fail_and_repair(state, node):
    """Erase one node and rebuild it from its helper set.

    Returns ``(state, report)``; the state is mutated in place.  Solid
    packets are copied verbatim from their other endpoint; dashed packets
    are recomputed by the incomplete-family helper as its stored
    combination, so the rebuilt contents are bit-identical.
    """
    graph = state.graph
    if node not in graph.storage_map:
        raise SimulationError(f"node {node} is not part of the system")
    helpers = graph.helper_sets[node]
    before = state.node_contents[node]
    state.node_contents[node] = {}

    rebuilt: dict[int, np.ndarray] = {}
    transferred = 0
    computed = 0
    for eid in graph.storage_map[node]:
        e = graph.edges[eid]
        if e.kind == SOLID:
            other = e.v if e.u == node else e.u
            if other not in helpers:
                raise SimulationError(
                    f"packet {eid} of node {node} lives on {other}, outside its helper set"
                )
            if eid not in state.node_contents[other]:
                raise SimulationError(f"helper {other} is missing packet {eid}")
            rebuilt[eid] = state.node_contents[other][eid].copy()
            transferred += 1
        else:
            helper = e.u  # the incomplete-family endpoint generates the packet
            if helper not in helpers:
                raise SimulationError(f"dashed helper {helper} outside helper set of {node}")
            lam = dashed_combination(state.code, eid)
            stored = list(graph.storage_map[helper])
            held = np.stack([state.node_contents[helper][s] for s in stored])
            mixed = galois.mul_vec(state.code.field_spec, lam[:, None], held)
            rebuilt[eid] = np.bitwise_xor.reduce(mixed, axis=0)
            computed += 1

    state.node_contents[node] = rebuilt
    exact = set(before) == set(rebuilt) and all(
        np.array_equal(before[eid], rebuilt[eid]) for eid in rebuilt
    )
    report = RepairReport(
        failed_node=node,
        helpers=tuple(helpers),
        transferred_packets=transferred,
        computed_packets=computed,
        exact=exact,
    )
    state.history.append(report)
    return state, report


def reconstruct(state, s_nodes):
    """Recover the file from the packets stored on a k-node subset."""
    s_nodes = set(s_nodes)
    if len(s_nodes) != state.code.params.k:
        raise ValueError(f"expected {state.code.params.k} nodes, got {len(s_nodes)}")
    edge_ids = sorted({eid for v in s_nodes for eid in state.graph.storage_map[v]})
    rows = state.code.coeff_rows[edge_ids]
    rhs = np.stack([_payload_from(state, s_nodes, eid) for eid in edge_ids])
    try:
        return galois.solve(state.code.field_spec, rows, rhs)
    except (galois.UnsolvableError, galois.InconsistentSystemError) as exc:
        raise ReconstructionError(
            f"cannot reconstruct from {sorted(s_nodes)}: {exc}"
        ) from exc


def _payload_from(state, s_nodes, eid):
    for v in s_nodes:
        if eid in state.node_contents[v]:
            return state.node_contents[v][eid]
    raise SimulationError(f"packet {eid} not held by {sorted(s_nodes)}")


@dataclass(frozen=True)
class TraceReport:
    repairs: int
    per_node: dict[int, int]
    bandwidth_packets: int
    transferred_packets: int
    computed_packets: int
    all_exact: bool
    reconstruction_checks: tuple[tuple[tuple[int, ...], bool], ...]

    @property
    def all_reconstructions_ok(self):
        return all(ok for _, ok in self.reconstruction_checks)

    def to_json(self):
        return {
            "repairs": self.repairs,
            "per_node": {str(v): c for v, c in sorted(self.per_node.items())},
            "bandwidth_packets": self.bandwidth_packets,
            "transferred_packets": self.transferred_packets,
            "computed_packets": self.computed_packets,
            "all_exact": self.all_exact,
            "reconstruction_checks": [
                {"nodes": list(nodes), "ok": ok} for nodes, ok in self.reconstruction_checks
            ],
        }


def run_trace(state, trace, check_subsets=None, max_checks=24):
    """Apply a failure sequence and spot-check reconstruction afterwards.

    ``check_subsets`` overrides the post-trace sample of k-subsets; by
    default all subsets are checked when few, otherwise an evenly spaced
    deterministic sample of ``max_checks``.
    """
    trace = list(trace)
    per_node: dict[int, int] = {}
    transferred = 0
    computed = 0
    all_exact = True
    for node in trace:
        _, report = fail_and_repair(state, node)
        per_node[node] = per_node.get(node, 0) + 1
        transferred += report.transferred_packets
        computed += report.computed_packets
        all_exact = all_exact and report.exact

    if check_subsets is None:
        everything = list(itertools.combinations(state.graph.nodes, state.code.params.k))
        if len(everything) <= max_checks:
            check_subsets = everything
        else:
            stride = len(everything) // max_checks
            check_subsets = everything[::stride][:max_checks]
    checks = []
    reference = _reference_file(state)
    for subset in check_subsets:
        try:
            got = reconstruct(state, subset)
            ok = bool(np.array_equal(got, reference))
        except ReconstructionError:
            ok = False
        checks.append((tuple(subset), ok))
    return TraceReport(
        repairs=len(trace),
        per_node=per_node,
        bandwidth_packets=state.graph.d * len(trace),
        transferred_packets=transferred,
        computed_packets=computed,
        all_exact=all_exact,
        reconstruction_checks=tuple(checks),
    )


def _reference_file(state):
    # the encoding is linear and verified full-rank, so the reference file
    # is recoverable from the pristine payload table
    return galois.solve(state.code.field_spec, state.code.coeff_rows, state.payloads)
