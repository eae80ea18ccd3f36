"""Family helper selection: partitions, index permutations, MBR file sizes.

Nodes 1..n are grouped into complete families of n-d consecutive nodes;
the n mod (n-d) leftover nodes form the incomplete family.  A node in a
complete family is helped by every node outside its family; an incomplete
family node is helped by nodes 1..d.  The last complete family splits
into the members that serve the incomplete family (label c) and those
that never do (label -c); incomplete family members carry label 0.

Everything here is at the minimum-bandwidth point with one packet per
helper (beta = 1) and d packets stored per node (alpha = d), so file
sizes are packet counts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

__all__ = [
    "ParameterError",
    "SystemParams",
    "FamilyPartition",
    "FamilyIndexPermutation",
    "GroupPlan",
    "partition_families",
    "partition_node_group",
    "family_index_vector",
    "rfip",
    "y_count",
    "z_count",
    "mbr_file_size_fhs",
    "mbr_file_size_bhs",
    "mbr_file_size_family_plus",
    "helper_selection_helps",
    "family_plus_partition",
    "valid_params",
]


class ParameterError(ValueError):
    """System parameters outside 2 <= n, 1 <= k <= n-1, 1 <= d <= n-1."""


@dataclass(frozen=True)
class SystemParams:
    n: int
    k: int
    d: int

    def __post_init__(self):
        if self.n < 2:
            raise ParameterError(f"need n >= 2, got n={self.n}")
        if not 1 <= self.k <= self.n - 1:
            raise ParameterError(f"need 1 <= k <= n-1, got k={self.k}, n={self.n}")
        if not 1 <= self.d <= self.n - 1:
            raise ParameterError(f"need 1 <= d <= n-1, got d={self.d}, n={self.n}")


def valid_params(n_max):
    """All valid (n, k, d) triples with n <= n_max, in lexicographic order."""
    for n in range(2, n_max + 1):
        for k in range(1, n):
            for d in range(1, n):
                yield SystemParams(n, k, d)


@dataclass(frozen=True)
class FamilyPartition:
    """Node-to-family assignment plus the per-node helper sets."""

    params: SystemParams
    c: int
    nodes: tuple[int, ...]
    node_sets: Mapping[int, tuple[int, ...]]
    helper_sets: Mapping[int, tuple[int, ...]]
    family_index: Mapping[int, int] = field(repr=False)

    @property
    def n0(self):
        return self.node_sets.get(0, ())

    @property
    def neg(self):
        return self.node_sets.get(-self.c, ())

    def to_json(self):
        return {
            "n": self.params.n,
            "d": self.params.d,
            "families": {str(label): list(members) for label, members in self.node_sets.items()},
            "helper_sets": {str(i): list(h) for i, h in self.helper_sets.items()},
        }


def _partition(node_ids, d, params):
    node_ids = tuple(node_ids)
    n = len(node_ids)
    size = n - d
    c = n // size
    r = n % size

    labels = []
    for x in range(1, c):
        labels.extend([x] * size)
    if r:
        labels.extend([c] * r)
        labels.extend([-c] * (size - r))
        labels.extend([0] * r)
    else:
        labels.extend([c] * size)

    node_sets: dict[int, list[int]] = {}
    family_index: dict[int, int] = {}
    for node, label in zip(node_ids, labels):
        node_sets.setdefault(label, []).append(node)
        family_index[node] = label

    helpers_of_n0 = node_ids[:d]
    helper_sets = {}
    for node, label in zip(node_ids, labels):
        if label == 0:
            helper_sets[node] = helpers_of_n0
        else:
            own = set(node_sets.get(abs(label), ())) | set(node_sets.get(-abs(label), ()))
            helper_sets[node] = tuple(v for v in node_ids if v not in own)
    return FamilyPartition(
        params=params,
        c=c,
        nodes=node_ids,
        node_sets={label: tuple(members) for label, members in node_sets.items()},
        helper_sets=helper_sets,
        family_index=family_index,
    )


def partition_families(params):
    """Partition nodes 1..n into families and assign helper sets."""
    return _partition(range(1, params.n + 1), params.d, params)


def partition_node_group(node_ids, d):
    """Apply the family partition to an explicit node-id group (family-plus)."""
    node_ids = tuple(node_ids)
    # k plays no role in partitioning; record a placeholder of 1.
    params = SystemParams(len(node_ids), 1, d)
    return _partition(node_ids, d, params)


@dataclass(frozen=True)
class FamilyIndexPermutation:
    entries: tuple[int, ...]

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, i):
        return self.entries[i]


def family_index_vector(params):
    """Canonical signed family labels of nodes 1..n, in node order."""
    part = partition_families(params)
    return FamilyIndexPermutation(tuple(part.family_index[i] for i in part.nodes))


def rfip(params):
    """Rotating family index permutation.

    The family index vector is written into an (n-d) x ceil(n/(n-d))
    table column by column and read back row by row; a short last column
    simply leaves its trailing cells empty.
    """
    vec = family_index_vector(params).entries
    n, d = params.n, params.d
    nrows = n - d
    ncols = -(-n // nrows)
    out = []
    for row in range(nrows):
        for col in range(ncols):
            pos = col * nrows + row
            if pos < n:
                out.append(vec[pos])
    return FamilyIndexPermutation(tuple(out))


def _entries(pi):
    return pi.entries if isinstance(pi, FamilyIndexPermutation) else tuple(pi)


def y_count(pi, i):
    """Number of earlier entries a newcomer at position i can draw from.

    For a zero entry this counts the strictly positive entries before it;
    otherwise it counts earlier entries of different absolute value.
    Positions are 1-based.
    """
    entries = _entries(pi)
    if not 1 <= i <= len(entries):
        raise IndexError(f"position {i} outside 1..{len(entries)}")
    e = entries[i - 1]
    prefix = entries[: i - 1]
    if e == 0:
        return sum(1 for v in prefix if v > 0)
    return sum(1 for v in prefix if abs(v) != abs(e))


def z_count(r, i, partition):
    """Distinct helpers of r_i that already appear among r_1..r_{i-1}."""
    r = tuple(r)
    if not 1 <= i <= len(r):
        raise IndexError(f"position {i} outside 1..{len(r)}")
    helpers = set(partition.helper_sets[r[i - 1]])
    return len(helpers & set(r[: i - 1]))


def mbr_file_size_fhs(params):
    """Packets protected at the MBR point under family helper selection."""
    pi = rfip(params)
    return sum(params.d - y_count(pi, i) for i in range(1, params.k + 1))


def mbr_file_size_bhs(params):
    """Packets protected at the MBR point with blind helper selection."""
    return sum(max(params.d - i, 0) for i in range(params.k))


def helper_selection_helps(params):
    """Whether any helper selection scheme can beat the blind baseline."""
    n, k, d = params.n, params.k, params.d
    if d == 1 and k == 3 and n % 2 == 1:
        return False
    if k <= -(-n // (n - d)):
        return False
    return True


@dataclass(frozen=True)
class GroupPlan:
    """Disjoint regular groups of 2d nodes plus at most one remaining group."""

    regular_groups: tuple[tuple[int, ...], ...]
    remaining_group: tuple[int, ...]

    def groups(self):
        if self.remaining_group:
            return self.regular_groups + (self.remaining_group,)
        return self.regular_groups

    def to_json(self):
        return {
            "regular_groups": [list(g) for g in self.regular_groups],
            "remaining_group": list(self.remaining_group),
        }


def family_plus_partition(params):
    """Split nodes into 2d-sized regular groups and one remaining group.

    When 2d does not divide n the remaining group absorbs one regular
    group so its size is the smallest value >= 2d+1; with n <= 4d that
    leaves a single group and the scheme degenerates to plain family
    helper selection.
    """
    n, d = params.n, params.d
    width = 2 * d
    if n % width == 0:
        n_regular = n // width
    else:
        n_regular = max(n // width - 1, 0)
    regular = tuple(
        tuple(range(g * width + 1, (g + 1) * width + 1)) for g in range(n_regular)
    )
    remaining = tuple(range(n_regular * width + 1, n + 1))
    return GroupPlan(regular_groups=regular, remaining_group=remaining)


def mbr_file_size_family_plus(params):
    """Packets protected at the MBR point under the family-plus scheme."""
    n, k, d = params.n, params.k, params.d
    width = 2 * d

    def step(i):
        return d - i + i // 2

    if n % width != 0:
        n_l = len(family_plus_partition(params).remaining_group)
        total = sum(step(i) for i in range(min(k, width - 1)))
    else:
        n_l = 0
        total = 0
    spill = max(k - n_l, 0)
    total += d * d * (spill // width)
    total += sum(step(i) for i in range(spill % width))
    return total
