"""Random generators for G(n,p), G(n,m,p) and independent k-uniform hypergraphs."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .graph_core import FeatureAssignment, KUniformHypergraph, LabeledGraph
from .thresholds import feature_size_prob

log = logging.getLogger(__name__)

NAIVE_GUARD = 10**9
BERNOULLI_FALLBACK = 10**6
TRUNCATION_MASS = 1e-12


@dataclass(frozen=True)
class RngStream:
    """Reproducible stream identified by ``(seed, stream_id)``.

    Streams with different ids are spawned children of one ``SeedSequence``
    and are statistically independent.
    """

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(ss))

    def child(self, *keys: int) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id, *keys))
        return np.random.Generator(np.random.PCG64(ss))


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    return np.random.default_rng(rng)


@dataclass
class StratifiedFeatures:
    """Size-stratified G(n,m,p) features: counts per size and the k-sets for k >= 2."""

    n: int
    counts: dict[int, int]
    sets: dict[int, np.ndarray]
    warnings: list[str] = field(default_factory=list)

    @property
    def m(self) -> int:
        return sum(self.counts.values())


def sample_er(n: int, p: float, rng) -> LabeledGraph:
    """G(n, p): every pair is an edge independently with probability p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    gen = as_generator(rng)
    iu, iv = np.triu_indices(n, k=1)
    keep = gen.random(iu.size) < p
    return LabeledGraph.from_arrays(n, iu[keep], iv[keep])


def sample_rig_naive(n: int, m: int, p: float, rng) -> FeatureAssignment:
    """G(n,m,p) features from m*n independent Bernoulli(p) memberships."""
    if m * n > NAIVE_GUARD:
        raise ValueError(f"m*n = {m * n} exceeds the naive sampler guard {NAIVE_GUARD}")
    gen = as_generator(rng)
    member = gen.random((m, n)) < p
    return FeatureAssignment(n, [np.flatnonzero(row).tolist() for row in member])


def size_distribution(n: int, p: float) -> np.ndarray:
    """pi_k = P(|V(w)| = k) for k = 0..n."""
    return np.array([feature_size_prob(n, p, k)[1] for k in range(n + 1)])


def _size_cutoff(n: int, m: int, pi: np.ndarray) -> int:
    """Largest k worth sampling; sizes above it carry total expected count < TRUNCATION_MASS."""
    tail = 0.0
    for k in range(n, 1, -1):
        tail += pi[k]
        if m * tail >= TRUNCATION_MASS:
            return k
    return 1


def sample_size_counts(n: int, m: int, p: float, gen: np.random.Generator, k_max: int | None = None):
    """Exact multinomial(m; pi_0..pi_n) counts via sequential conditional binomials.

    Sizes ``k >= 2`` are drawn in increasing order, then sizes 1 and 0 split
    the remainder. Sizes above ``k_max`` are folded into size 0.
    """
    pi = size_distribution(n, p)
    warnings = []
    top = n
    if k_max is not None and k_max < n:
        dropped = float(pi[k_max + 1 :].sum())
        if m * dropped >= TRUNCATION_MASS:
            warnings.append(f"k_max={k_max} drops expected {m * dropped:.3g} features of larger size")
        top = k_max
    else:
        top = _size_cutoff(n, m, pi)
        if top < n:
            warnings.append(f"sizes > {top} truncated (expected count {m * float(pi[top + 1:].sum()):.3g})")
    counts = {k: 0 for k in range(n + 1)}
    remaining = m
    # remaining mass, computed from the small side: sizes 0, 1 plus sizes >= k
    small = float(pi[0] + pi[1])
    tail = np.cumsum(pi[::-1])[::-1]
    for k in range(2, top + 1):
        if remaining == 0:
            break
        mass = small + float(tail[k])
        frac = min(1.0, float(pi[k]) / mass) if mass > 0 else 0.0
        c = int(gen.binomial(remaining, frac))
        counts[k] = c
        remaining -= c
    if remaining:
        # truncated sizes above `top` stay in the denominator, so their mass lands on size 0
        mass = small + (float(tail[top + 1]) if top < n else 0.0)
        frac1 = min(1.0, float(pi[1]) / mass) if mass > 0 else 0.0
        counts[1] = int(gen.binomial(remaining, frac1))
        counts[0] = remaining - counts[1]
    return counts, warnings


def sequential_count_pmf(n: int, p: float, counts: dict[int, int]) -> float:
    """Probability that the sequential-binomial scheme (no truncation) produces ``counts``."""
    from scipy.stats import binom

    pi = size_distribution(n, p)
    remaining = sum(counts.values())
    prob = 1.0
    small = float(pi[0] + pi[1])
    tail = np.cumsum(pi[::-1])[::-1]
    for k in range(2, n + 1):
        mass = small + float(tail[k])
        frac = min(1.0, float(pi[k]) / mass) if mass > 0 else 0.0
        prob *= binom.pmf(counts.get(k, 0), remaining, frac)
        remaining -= counts.get(k, 0)
    frac1 = float(pi[1]) / small if small > 0 else 0.0
    prob *= binom.pmf(counts.get(1, 0), remaining, frac1)
    return float(prob)


def uniform_k_subsets(n: int, k: int, count: int, gen: np.random.Generator) -> np.ndarray:
    """``count`` independent uniform k-subsets of ``0..n-1`` as sorted rows."""
    if count == 0:
        return np.empty((0, k), dtype=np.int64)
    if k == 2:
        u = gen.integers(0, n, size=count)
        v = gen.integers(0, n - 1, size=count)
        v = v + (v >= u)
        return np.sort(np.stack([u, v], axis=1), axis=1)
    if 2 * k > n:
        return np.sort(np.array([gen.choice(n, k, replace=False) for _ in range(count)]), axis=1)
    out = np.empty((count, k), dtype=np.int64)
    todo = np.arange(count)
    while todo.size:
        rows = np.sort(gen.integers(0, n, size=(todo.size, k)), axis=1)
        ok = (np.diff(rows, axis=1) > 0).all(axis=1)
        out[todo[ok]] = rows[ok]
        todo = todo[~ok]
    return out


def sample_rig_stratified(n: int, m: int, p: float, rng, k_max: int | None = None) -> StratifiedFeatures:
    """G(n,m,p) features drawn by size class; handles m up to ~1e14."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    gen = as_generator(rng)
    counts, warnings = sample_size_counts(n, m, p, gen, k_max)
    for w in warnings:
        log.debug(w)
    sets = {k: uniform_k_subsets(n, k, c, gen) for k, c in counts.items() if k >= 2 and c > 0}
    return StratifiedFeatures(n, counts, sets, warnings)


def stratified_to_assignment(sf: StratifiedFeatures) -> FeatureAssignment:
    if sf.m * sf.n > NAIVE_GUARD:
        raise ValueError("too many features to materialize one record per feature")
    members: list = [()] * sf.counts.get(0, 0)
    members += [()] * sf.counts.get(1, 0)  # singleton identities do not affect the graph
    for k in sorted(sf.sets):
        members += sf.sets[k].tolist()
    return FeatureAssignment(sf.n, members)


def project_stratified(sf: StratifiedFeatures) -> LabeledGraph:
    """Projection of stratified features, computed with array operations."""
    us, vs = [], []
    for k, rows in sf.sets.items():
        if rows.size == 0:
            continue
        for i in range(k):
            for j in range(i + 1, k):
                us.append(rows[:, i])
                vs.append(rows[:, j])
    if not us:
        return LabeledGraph.empty(sf.n)
    return LabeledGraph.from_arrays(sf.n, np.concatenate(us), np.concatenate(vs))


def sample_rig_graph(n: int, m: int, p: float, rng) -> LabeledGraph:
    """Shortcut: projected G(n,m,p) graph through the stratified sampler."""
    return project_stratified(sample_rig_stratified(n, m, p, rng))


def _unrank_k_subsets(n: int, k: int, ranks: np.ndarray) -> np.ndarray:
    """Lexicographic unranking of k-subsets of ``0..n-1``."""
    out = np.empty((len(ranks), k), dtype=np.int64)
    for row, r in enumerate(ranks.tolist()):
        x = 0
        for i in range(k):
            while True:
                c = math.comb(n - x - 1, k - i - 1)
                if r < c:
                    break
                r -= c
                x += 1
            out[row, i] = x
            x += 1
    return out


def sample_iid_hypergraph(n: int, k: int, q: float, rng) -> KUniformHypergraph:
    """H^(k)(n, q): each k-subset is an edge independently with probability q."""
    if not 2 <= k <= n:
        raise ValueError(f"k must lie in 2..{n}, got {k}")
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must lie in [0, 1], got {q}")
    gen = as_generator(rng)
    total = math.comb(n, k)
    if total <= BERNOULLI_FALLBACK:
        ranks = np.flatnonzero(gen.random(total) < q)
        return KUniformHypergraph(n, k, _unrank_k_subsets(n, k, ranks).tolist())
    count = int(gen.binomial(total, q))
    chosen: set[tuple[int, ...]] = set()
    while len(chosen) < count:
        for row in uniform_k_subsets(n, k, count - len(chosen), gen).tolist():
            chosen.add(tuple(row))
            if len(chosen) == count:
                break
    return KUniformHypergraph(n, k, chosen)


def decompose_by_size(f: FeatureAssignment | StratifiedFeatures) -> dict[int, KUniformHypergraph]:
    """Map k -> hypergraph of distinct feature vertex sets of size k (k >= 2, non-empty only)."""
    out: dict[int, KUniformHypergraph] = {}
    if isinstance(f, StratifiedFeatures):
        for k, rows in sorted(f.sets.items()):
            if len(rows):
                out[k] = KUniformHypergraph(f.n, k, rows.tolist())
        return out
    by_k: dict[int, set] = {}
    for s in f.memberships:
        if len(s) >= 2:
            by_k.setdefault(len(s), set()).add(tuple(sorted(s)))
    return {k: KUniformHypergraph(f.n, k, sets) for k, sets in sorted(by_k.items())}
