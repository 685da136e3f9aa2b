"""Graph and hypergraph value types shared by every other module.

All values are immutable after construction. Graph edges are kept as a sorted
array of pair codes ``u * n + v`` (``u < v``), which doubles as the canonical
edge list; for ``n <= 11`` a fixed-width bit-vector encoding over the
``C(n, 2)`` possible pairs is also available for exhaustive enumeration.
"""

from __future__ import annotations

from functools import cached_property
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

BITS_MAX_N = 11


class GraphError(ValueError):
    """Raised for structurally invalid graphs or incompatible operands."""


def pair_list(n: int) -> list[tuple[int, int]]:
    """All unordered pairs of ``{0..n-1}`` in lexicographic order (bit order)."""
    return list(combinations(range(n), 2))


def _pair_codes(n: int) -> np.ndarray:
    iu, iv = np.triu_indices(n, k=1)
    return iu.astype(np.int64) * n + iv


class LabeledGraph:
    """Simple undirected graph on vertices ``0..n-1``."""

    __slots__ = ("n", "_codes", "__dict__")

    def __init__(self, n: int, edges: Iterable[Sequence[int]] = ()):
        if n < 1:
            raise GraphError(f"vertex count must be positive, got {n}")
        pairs = [tuple(e) for e in edges]
        if pairs:
            arr = np.asarray(pairs, dtype=np.int64)
            if arr.ndim != 2 or arr.shape[1] != 2:
                raise GraphError("edges must be vertex pairs")
            u, v = arr[:, 0], arr[:, 1]
        else:
            u = v = np.empty(0, dtype=np.int64)
        self.n = n
        self._codes = _canonical_codes(n, u, v)

    @classmethod
    def from_arrays(cls, n: int, u: np.ndarray, v: np.ndarray) -> "LabeledGraph":
        """Build from endpoint arrays; duplicate pairs are collapsed."""
        g = cls.__new__(cls)
        g.n = n
        g._codes = _canonical_codes(n, np.asarray(u, dtype=np.int64), np.asarray(v, dtype=np.int64))
        return g

    @classmethod
    def _from_codes(cls, n: int, codes: np.ndarray) -> "LabeledGraph":
        g = cls.__new__(cls)
        g.n = n
        codes = np.array(codes, dtype=np.int64)
        codes.setflags(write=False)
        g._codes = codes
        return g

    @classmethod
    def empty(cls, n: int) -> "LabeledGraph":
        return cls(n)

    @classmethod
    def complete(cls, n: int) -> "LabeledGraph":
        return cls._from_codes(n, _pair_codes(n))

    # -- views -----------------------------------------------------------
    @property
    def codes(self) -> np.ndarray:
        return self._codes

    @property
    def num_edges(self) -> int:
        return int(self._codes.size)

    @cached_property
    def edge_array(self) -> np.ndarray:
        arr = np.stack(np.divmod(self._codes, self.n), axis=1) if self._codes.size else np.empty((0, 2), np.int64)
        arr.setflags(write=False)
        return arr

    @cached_property
    def edges(self) -> frozenset[tuple[int, int]]:
        return frozenset((int(a), int(b)) for a, b in self.edge_array)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return [(int(a), int(b)) for a, b in self.edge_array]

    def degrees(self) -> np.ndarray:
        return np.bincount(self.edge_array.ravel(), minlength=self.n)

    def adjacency(self) -> list[set[int]]:
        adj: list[set[int]] = [set() for _ in range(self.n)]
        for a, b in self.edge_array.tolist():
            adj[a].add(b)
            adj[b].add(a)
        return adj

    def has_edge(self, u: int, v: int) -> bool:
        if u > v:
            u, v = v, u
        code = u * self.n + v
        i = np.searchsorted(self._codes, code)
        return bool(i < self._codes.size and self._codes[i] == code)

    # -- bit-vector encoding ----------------------------------------------
    def to_bits(self) -> int:
        """Fixed-width encoding: bit ``i`` set iff the i-th pair of ``pair_list(n)`` is an edge."""
        if self.n > BITS_MAX_N:
            raise GraphError(f"bit encoding supports n <= {BITS_MAX_N}")
        index = _bit_index(self.n)
        bits = 0
        for c in self._codes.tolist():
            bits |= 1 << index[c]
        return bits

    @classmethod
    def from_bits(cls, n: int, bits: int) -> "LabeledGraph":
        if n > BITS_MAX_N:
            raise GraphError(f"bit encoding supports n <= {BITS_MAX_N}")
        pairs = pair_list(n)
        if bits < 0 or bits >> len(pairs):
            raise GraphError("bit pattern out of range")
        return cls(n, [pairs[i] for i in range(len(pairs)) if bits >> i & 1])

    # -- text format ------------------------------------------------------
    def to_text(self) -> str:
        lines = [f"n={self.n}"]
        lines += [f"{a} {b}" for a, b in self.sorted_edges()]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "LabeledGraph":
        lines = [ln.strip() for ln in text.splitlines()]
        lines = [ln for ln in lines if ln and not ln.startswith("#")]
        if not lines or not lines[0].startswith("n="):
            raise GraphError("missing 'n=<int>' header")
        n = int(lines[0][2:])
        return cls(n, [tuple(int(t) for t in ln.split()) for ln in lines[1:]])

    # -- value semantics --------------------------------------------------
    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LabeledGraph):
            return NotImplemented
        return self.n == other.n and np.array_equal(self._codes, other._codes)

    def __hash__(self) -> int:
        return hash((self.n, self._codes.tobytes()))

    def __repr__(self) -> str:
        return f"LabeledGraph(n={self.n}, edges={self.sorted_edges()})"


def _canonical_codes(n: int, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    if u.size:
        if (u == v).any():
            raise GraphError("self-loops are not allowed")
        if min(u.min(), v.min()) < 0 or max(u.max(), v.max()) >= n:
            raise GraphError(f"edge endpoint outside 0..{n - 1}")
        lo, hi = np.minimum(u, v), np.maximum(u, v)
        codes = np.unique(lo * n + hi)
    else:
        codes = np.empty(0, dtype=np.int64)
    codes.setflags(write=False)
    return codes


_BIT_INDEX: dict[int, dict[int, int]] = {}


def _bit_index(n: int) -> dict[int, int]:
    if n not in _BIT_INDEX:
        _BIT_INDEX[n] = {a * n + b: i for i, (a, b) in enumerate(pair_list(n))}
    return _BIT_INDEX[n]


class KUniformHypergraph:
    """Hypergraph on ``0..n-1`` whose edges are k-element vertex sets (stored sorted)."""

    __slots__ = ("n", "k", "edges")

    def __init__(self, n: int, k: int, edges: Iterable[Iterable[int]] = ()):
        if k < 2:
            raise GraphError(f"edge arity must be >= 2, got {k}")
        canon = set()
        for e in edges:
            t = tuple(sorted(int(x) for x in e))
            if len(t) != k or len(set(t)) != k:
                raise GraphError(f"hyperedge {t} does not have {k} distinct vertices")
            if t[0] < 0 or t[-1] >= n:
                raise GraphError(f"hyperedge {t} has a vertex outside 0..{n - 1}")
            canon.add(t)
        self.n = n
        self.k = k
        self.edges: frozenset[tuple[int, ...]] = frozenset(canon)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, KUniformHypergraph):
            return NotImplemented
        return (self.n, self.k, self.edges) == (other.n, other.k, other.edges)

    def __hash__(self) -> int:
        return hash((self.n, self.k, self.edges))

    def __len__(self) -> int:
        return len(self.edges)

    def __repr__(self) -> str:
        return f"KUniformHypergraph(n={self.n}, k={self.k}, edges={sorted(self.edges)})"


class PartiteHypergraph:
    """k-partite hypergraph with parts of size ``part_size``; edge coordinate i indexes part i."""

    __slots__ = ("k", "part_size", "edges")

    def __init__(self, k: int, part_size: int, edges: Iterable[Sequence[int]] = ()):
        canon = set()
        for e in edges:
            t = tuple(int(x) for x in e)
            if len(t) != k:
                raise GraphError(f"partite edge {t} does not have {k} coordinates")
            if min(t) < 0 or max(t) >= part_size:
                raise GraphError(f"partite edge {t} leaves its part's index range")
            canon.add(t)
        self.k = k
        self.part_size = part_size
        self.edges: frozenset[tuple[int, ...]] = frozenset(canon)

    def vertex(self, part: int, index: int) -> int:
        """Flat label of ``x_index`` in ``part`` inside the disjoint union of parts."""
        return part * self.part_size + index

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PartiteHypergraph):
            return NotImplemented
        return (self.k, self.part_size, self.edges) == (other.k, other.part_size, other.edges)

    def __hash__(self) -> int:
        return hash((self.k, self.part_size, self.edges))


class FeatureAssignment:
    """Vertex sets ``V(w)`` of all m features; empty and singleton sets are kept."""

    __slots__ = ("n", "memberships")

    def __init__(self, n: int, memberships: Iterable[Iterable[int]]):
        sets = []
        for s in memberships:
            fs = frozenset(int(x) for x in s)
            if fs and (min(fs) < 0 or max(fs) >= n):
                raise GraphError(f"feature member outside 0..{n - 1}")
            sets.append(fs)
        self.n = n
        self.memberships: tuple[frozenset[int], ...] = tuple(sets)

    @property
    def m(self) -> int:
        return len(self.memberships)

    def restrict(self, k: int) -> "FeatureAssignment":
        """Features whose vertex set has exactly k members (others become empty)."""
        return FeatureAssignment(self.n, [s if len(s) == k else () for s in self.memberships])


def _clique_arrays(sets: Iterable[Sequence[int]]) -> tuple[np.ndarray, np.ndarray]:
    us: list[int] = []
    vs: list[int] = []
    for s in sets:
        for a, b in combinations(sorted(s), 2):
            us.append(a)
            vs.append(b)
    return np.asarray(us, dtype=np.int64), np.asarray(vs, dtype=np.int64)


def project_to_graph(h: KUniformHypergraph | PartiteHypergraph | FeatureAssignment) -> LabeledGraph:
    """Graph whose edges are the pairs covered by at least one hyperedge / feature set.

    A partite hypergraph projects onto the disjoint union of its parts, with
    ``x_j`` of part ``i`` labelled ``i * part_size + j``.
    """
    if isinstance(h, KUniformHypergraph):
        return LabeledGraph.from_arrays(h.n, *_clique_arrays(h.edges))
    if isinstance(h, FeatureAssignment):
        return LabeledGraph.from_arrays(h.n, *_clique_arrays(s for s in h.memberships if len(s) > 1))
    if isinstance(h, PartiteHypergraph):
        flat = [[h.vertex(i, x) for i, x in enumerate(e)] for e in h.edges]
        return LabeledGraph.from_arrays(h.k * h.part_size, *_clique_arrays(flat))
    raise TypeError(f"cannot project {type(h).__name__}")


def merge_partite(h: PartiteHypergraph) -> KUniformHypergraph:
    """Identify ``x_j`` of every part with ``v_j``; edges that collapse below k vertices are dropped."""
    kept = [e for e in h.edges if len(set(e)) == h.k]
    return KUniformHypergraph(h.part_size, h.k, kept)


def merge_partite_graph(g: LabeledGraph, k: int, part_size: int) -> LabeledGraph:
    """Graph-level merge of a graph on the disjoint union of k parts; collapsed loops are dropped."""
    if g.n != k * part_size:
        raise GraphError(f"graph has {g.n} vertices, expected {k}*{part_size}")
    e = g.edge_array
    u, v = e[:, 0] % part_size, e[:, 1] % part_size
    keep = u != v
    return LabeledGraph.from_arrays(part_size, u[keep], v[keep])


def _check_same_n(gs: Sequence[LabeledGraph]) -> int:
    if not gs:
        raise GraphError("need at least one graph")
    n = gs[0].n
    if any(g.n != n for g in gs):
        raise GraphError("graphs have different vertex counts")
    return n


def union_graphs(gs: Sequence[LabeledGraph]) -> LabeledGraph:
    n = _check_same_n(gs)
    if len(gs) == 1:
        return gs[0]
    return LabeledGraph._from_codes(n, np.unique(np.concatenate([g.codes for g in gs])))


def is_subgraph(g1: LabeledGraph, g2: LabeledGraph) -> bool:
    """True iff every edge of ``g1`` is an edge of ``g2``."""
    _check_same_n([g1, g2])
    if g1.num_edges > g2.num_edges:
        return False
    return bool(np.isin(g1.codes, g2.codes, assume_unique=True).all())
