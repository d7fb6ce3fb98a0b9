"""Problem data and feasibility machinery for multiway association.

Elements carry global indices: the p-th element of set i sits at
offset(i) + p where offset(i) = m_0 + ... + m_{i-1}.  An assignment is a
binary matrix with one row per element; rows that share a column belong to
one cluster and are claimed to be views of the same underlying object.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

# Score of a pair nobody measured: across sets we know nothing, within a
# set the elements are distinct objects by construction.
CROSS_SET_DEFAULT = 0.5
WITHIN_SET_DEFAULT = 0.0


class InvalidInstanceError(ValueError):
    """Instance data violates its invariants."""


class InfeasibleAssignmentError(ValueError):
    """An assignment breaks the one-to-one or distinctness constraints."""


def _pair_key(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class Instance:
    """A multiway association problem.

    ``scores`` maps unordered element pairs (a, b), a != b, to one score per
    modality, each in [0, 1]: 1 is maximal similarity, 0 maximal
    dissimilarity, 0.5 carries no information.  Pairs without a stored entry
    default to 0.5 across sets and 0 within a set; self-similarity is
    always 1.
    """

    set_sizes: tuple[int, ...]
    modality_count: int
    scores: Mapping[tuple[int, int], tuple[float, ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        sizes = tuple(int(s) for s in self.set_sizes)
        if not sizes or any(s < 1 for s in sizes):
            raise InvalidInstanceError("set_sizes must be a nonempty list of positive integers")
        count = int(self.modality_count)
        if count < 1:
            raise InvalidInstanceError("modality_count must be at least 1")
        m = sum(sizes)
        canon: dict[tuple[int, int], tuple[float, ...]] = {}
        for (a, b), raw in dict(self.scores).items():
            a, b = int(a), int(b)
            if a == b:
                raise InvalidInstanceError(f"pair ({a}, {b}): self-pairs may not carry stored scores")
            if not (0 <= a < m and 0 <= b < m):
                raise InvalidInstanceError(f"pair ({a}, {b}): index out of range for {m} elements")
            vec = tuple(float(x) for x in (raw if isinstance(raw, Iterable) else (raw,)))
            if len(vec) != count:
                raise InvalidInstanceError(
                    f"pair ({a}, {b}): expected {count} modality scores, got {len(vec)}")
            if any(not (0.0 <= x <= 1.0) for x in vec):
                raise InvalidInstanceError(f"pair ({a}, {b}): scores must lie in [0, 1]")
            key = _pair_key(a, b)
            if key in canon and canon[key] != vec:
                raise InvalidInstanceError(f"pair {key}: stored twice with conflicting scores")
            canon[key] = vec
        # canonical form: vectors equal to the applicable default carry no
        # information, so equal instances compare equal after dropping them
        set_of = np.repeat(np.arange(len(sizes)), sizes)
        canon = {
            (a, b): vec for (a, b), vec in canon.items()
            if vec != (WITHIN_SET_DEFAULT if set_of[a] == set_of[b]
                       else CROSS_SET_DEFAULT,) * count
        }
        object.__setattr__(self, "set_sizes", sizes)
        object.__setattr__(self, "modality_count", count)
        object.__setattr__(self, "scores", canon)

    @property
    def num_sets(self) -> int:
        return len(self.set_sizes)

    @property
    def num_elements(self) -> int:
        return sum(self.set_sizes)

    @cached_property
    def set_offsets(self) -> tuple[int, ...]:
        """Global index of the first element of each set."""
        offsets = [0]
        for size in self.set_sizes[:-1]:
            offsets.append(offsets[-1] + size)
        return tuple(offsets)

    @cached_property
    def set_index(self) -> np.ndarray:
        """Set membership of every element, as a length-m integer array."""
        idx = np.repeat(np.arange(self.num_sets), self.set_sizes)
        idx.setflags(write=False)
        return idx

    def set_of(self, a: int) -> int:
        return int(self.set_index[a])

    def score_vector(self, a: int, b: int) -> tuple[float, ...]:
        """Stored scores of a pair, or the defaults when nothing was stored."""
        m = self.num_elements
        if not (0 <= a < m and 0 <= b < m):
            raise InvalidInstanceError(f"pair ({a}, {b}): index out of range for {m} elements")
        if a == b:
            return (1.0,) * self.modality_count
        stored = self.scores.get(_pair_key(a, b))
        if stored is not None:
            return stored
        if self.set_of(a) == self.set_of(b):
            return (WITHIN_SET_DEFAULT,) * self.modality_count
        return (CROSS_SET_DEFAULT,) * self.modality_count


@dataclass(frozen=True)
class ModalityMatrices:
    """Dense symmetric score matrices, one m-by-m slice per modality."""

    mats: np.ndarray  # shape (modality_count, m, m)

    @property
    def modality_count(self) -> int:
        return self.mats.shape[0]

    @property
    def num_elements(self) -> int:
        return self.mats.shape[1]


def build_modality_matrices(instance: Instance) -> ModalityMatrices:
    """Expand the sparse score table into per-modality dense matrices.

    Every slice is symmetric with unit diagonal; absent pairs take the
    cross-set or within-set default.
    """
    m, count = instance.num_elements, instance.modality_count
    mats = np.full((count, m, m), CROSS_SET_DEFAULT)
    for offset, size in zip(instance.set_offsets, instance.set_sizes):
        mats[:, offset:offset + size, offset:offset + size] = WITHIN_SET_DEFAULT
    diag = np.arange(m)
    mats[:, diag, diag] = 1.0
    for (a, b), vec in instance.scores.items():
        clipped = np.clip(vec, 0.0, 1.0)
        mats[:, a, b] = clipped
        mats[:, b, a] = clipped
    mats.setflags(write=False)
    return ModalityMatrices(mats)


@dataclass(frozen=True)
class FeasibilityReport:
    """Constraint violations of a binary assignment matrix.

    ``row_violations`` lists rows whose sum is not exactly one;
    ``column_violations`` lists (set index, column) pairs where a set block
    puts more than one element into the same column.
    """

    row_violations: tuple[int, ...]
    column_violations: tuple[tuple[int, int], ...]

    @property
    def feasible(self) -> bool:
        return not self.row_violations and not self.column_violations


def feasibility_report(entries: np.ndarray, set_sizes: Sequence[int]) -> FeasibilityReport:
    """Check the one-to-one and distinctness constraints of a binary matrix."""
    U = np.asarray(entries)
    sizes = tuple(int(s) for s in set_sizes)
    m = sum(sizes)
    if U.ndim != 2 or U.shape[0] != m:
        raise ValueError(f"expected a matrix with {m} rows, got shape {U.shape}")
    if not np.isin(U, (0, 1)).all():
        raise ValueError("assignment entries must be binary")
    row_sums = U.sum(axis=1)
    rows = tuple(int(r) for r in np.flatnonzero(row_sums != 1))
    cols: list[tuple[int, int]] = []
    offset = 0
    for i, size in enumerate(sizes):
        block_sums = U[offset:offset + size].sum(axis=0)
        for c in np.flatnonzero(block_sums > 1):
            cols.append((i, int(c)))
        offset += size
    return FeasibilityReport(rows, tuple(cols))


def check_feasible(entries: np.ndarray, instance: Instance) -> FeasibilityReport:
    """Feasibility of an assignment-shaped binary matrix for an instance."""
    return feasibility_report(entries, instance.set_sizes)


@dataclass(frozen=True)
class Assignment:
    """Binary element-to-cluster matrix; construction enforces feasibility."""

    entries: np.ndarray  # shape (m, num_clusters), values in {0, 1}
    set_sizes: tuple[int, ...]

    def __post_init__(self) -> None:
        raw = np.asarray(self.entries)
        if raw.ndim == 2 and not np.isin(raw, (0, 1)).all():
            raise InfeasibleAssignmentError("assignment entries must be binary")
        U = raw.astype(np.int64)
        sizes = tuple(int(s) for s in self.set_sizes)
        report = feasibility_report(U, sizes)
        if not report.feasible:
            raise InfeasibleAssignmentError(
                f"rows with sum != 1: {list(report.row_violations)}; "
                f"same-set column collisions: {list(report.column_violations)}")
        if U.shape[1] and not U.any(axis=0).all():
            empty = [int(c) for c in np.flatnonzero(~U.any(axis=0))]
            raise InfeasibleAssignmentError(f"all-zero columns: {empty}")
        U.setflags(write=False)
        object.__setattr__(self, "entries", U)
        object.__setattr__(self, "set_sizes", sizes)

    @classmethod
    def from_full_matrix(cls, entries: np.ndarray, set_sizes: Sequence[int]) -> "Assignment":
        """Build an assignment from a square matrix, dropping unused columns."""
        raw = np.asarray(entries)
        if raw.ndim == 2 and not np.isin(raw, (0, 1)).all():
            raise InfeasibleAssignmentError("assignment entries must be binary")
        U = raw.astype(np.int64)
        used = U.any(axis=0)
        return cls(U[:, used], tuple(int(s) for s in set_sizes))

    @property
    def num_elements(self) -> int:
        return self.entries.shape[0]

    @property
    def num_clusters(self) -> int:
        return self.entries.shape[1]

    def pair_set(self) -> frozenset[tuple[int, int]]:
        """Unordered element pairs claimed to be the same object."""
        pairs = []
        for c in range(self.entries.shape[1]):
            members = np.flatnonzero(self.entries[:, c])
            pairs.extend(
                (int(members[i]), int(members[j]))
                for i in range(len(members))
                for j in range(i + 1, len(members)))
        return frozenset(pairs)


@dataclass(frozen=True)
class ClusterLabeling:
    """Cluster identifier per element; identifiers are contiguous from 0."""

    labels: tuple[int, ...]

    def __post_init__(self) -> None:
        labels = tuple(int(x) for x in self.labels)
        if not labels:
            raise ValueError("labels must be nonempty")
        seen = set(labels)
        if seen != set(range(len(seen))):
            raise ValueError("cluster identifiers must be contiguous from 0")
        object.__setattr__(self, "labels", labels)

    @property
    def num_clusters(self) -> int:
        return len(set(self.labels))


def canonical_labels(raw: Sequence) -> tuple[int, ...]:
    """Relabel arbitrary hashable labels to 0, 1, ... in first-appearance order."""
    mapping: dict = {}
    out = []
    for x in raw:
        if x not in mapping:
            mapping[x] = len(mapping)
        out.append(mapping[x])
    return tuple(out)


def clusters_from_assignment(assignment: Assignment) -> ClusterLabeling:
    """Column membership of every row, relabeled in first-appearance order."""
    cols = np.argmax(assignment.entries, axis=1)
    return ClusterLabeling(canonical_labels(cols.tolist()))


def assignment_from_clusters(labels: Sequence, set_sizes: Sequence[int]) -> Assignment:
    """One-hot assignment for a labeling; rejects same-set co-clustering.

    Accepts any hashable labels (a ClusterLabeling or a raw sequence) and
    canonicalizes them in first-appearance order, so the result is the
    inverse of clusters_from_assignment up to a column permutation.
    """
    seq = getattr(labels, "labels", labels)
    canon = canonical_labels(list(seq))
    sizes = tuple(int(s) for s in set_sizes)
    m = sum(sizes)
    if len(canon) != m:
        raise ValueError(f"expected {m} labels for set sizes {sizes}, got {len(canon)}")
    entries = np.zeros((m, max(canon) + 1), dtype=np.int64)
    entries[np.arange(m), canon] = 1
    return Assignment(entries, sizes)


@dataclass(frozen=True)
class PairwiseTable:
    """Binary cross-set match matrices, one block per unordered set pair.

    Blocks are stored under (i, j) with i < j; asking for (j, i) returns the
    transpose.  Construction accepts either orientation and rejects
    non-binary blocks, shape mismatches, and inconsistent transposes.
    """

    set_sizes: tuple[int, ...]
    blocks: Mapping[tuple[int, int], np.ndarray]

    def __post_init__(self) -> None:
        sizes = tuple(int(s) for s in self.set_sizes)
        if not sizes or any(s < 1 for s in sizes):
            raise ValueError("set_sizes must be positive")
        canon: dict[tuple[int, int], np.ndarray] = {}
        for (i, j), raw in dict(self.blocks).items():
            i, j = int(i), int(j)
            if i == j or not (0 <= i < len(sizes) and 0 <= j < len(sizes)):
                raise ValueError(f"block ({i}, {j}): invalid set pair")
            values = np.asarray(raw)
            if values.ndim != 2 or not np.isin(values, (0, 1)).all():
                raise ValueError(f"block ({i}, {j}): entries must be binary")
            block = values.astype(np.int64)
            if i > j:
                i, j, block = j, i, block.T
            if block.shape != (sizes[i], sizes[j]):
                raise ValueError(
                    f"block ({i}, {j}): expected shape {(sizes[i], sizes[j])}, got {block.shape}")
            if (i, j) in canon:
                if not np.array_equal(canon[(i, j)], block):
                    raise ValueError(f"block ({i}, {j}): asymmetric, transpose pair disagrees")
                continue
            block.setflags(write=False)
            canon[(i, j)] = block
        object.__setattr__(self, "set_sizes", sizes)
        object.__setattr__(self, "blocks", canon)

    @property
    def num_sets(self) -> int:
        return len(self.set_sizes)

    def has_block(self, i: int, j: int) -> bool:
        return _pair_key(i, j) in self.blocks

    def block(self, i: int, j: int) -> np.ndarray:
        if i < j:
            return self.blocks[(i, j)]
        return self.blocks[(j, i)].T


def pairwise_from_assignment(assignment: Assignment) -> PairwiseTable:
    """Cross-set match matrices P_ij = U_i U_j^T induced by an assignment."""
    sizes = assignment.set_sizes
    offsets = np.concatenate(([0], np.cumsum(sizes)))
    blocks = {}
    for i in range(len(sizes)):
        U_i = assignment.entries[offsets[i]:offsets[i + 1]]
        for j in range(i + 1, len(sizes)):
            U_j = assignment.entries[offsets[j]:offsets[j + 1]]
            blocks[(i, j)] = U_i @ U_j.T
    return PairwiseTable(sizes, blocks)


class _UnionFind:
    def __init__(self, n: int) -> None:
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, x: int, y: int) -> None:
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            self.parent[ry] = rx


def check_cycle_consistency(table: PairwiseTable) -> bool:
    """Whether pairwise matches compose transitively into a valid clustering.

    Takes the union-find closure of all asserted matches and demands that
    every component is a clique in the table with at most one element per
    set.  Raises on an incomplete table or on a block whose row or column
    sums exceed one.
    """
    sizes = table.set_sizes
    n = len(sizes)
    offsets = [0]
    for s in sizes[:-1]:
        offsets.append(offsets[-1] + s)
    for i in range(n):
        for j in range(i + 1, n):
            if not table.has_block(i, j):
                raise ValueError(f"block ({i}, {j}): missing from table")
            block = table.block(i, j)
            if (block.sum(axis=1) > 1).any() or (block.sum(axis=0) > 1).any():
                raise ValueError(
                    f"block ({i}, {j}): row or column asserts more than one match")
    m = sum(sizes)
    uf = _UnionFind(m)
    for (i, j), block in table.blocks.items():
        for p, q in zip(*np.nonzero(block)):
            uf.union(offsets[i] + int(p), offsets[j] + int(q))
    components: dict[int, list[int]] = {}
    for a in range(m):
        components.setdefault(uf.find(a), []).append(a)
    set_of = np.repeat(np.arange(n), sizes)
    for members in components.values():
        sets_seen = set()
        for a in members:
            s = int(set_of[a])
            if s in sets_seen:
                return False
            sets_seen.add(s)
        for x in range(len(members)):
            for y in range(x + 1, len(members)):
                a, b = members[x], members[y]
                i, j = int(set_of[a]), int(set_of[b])
                if table.block(i, j)[a - offsets[i], b - offsets[j]] != 1:
                    return False
    return True
