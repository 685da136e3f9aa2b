"""Monotone graph properties and the statistical toolkit used by the harness."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import stats
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .graph_core import LabeledGraph

KINDS = (
    "connected",
    "largest_component_ge",
    "min_degree_ge",
    "triangle_count_ge",
    "contains_subgraph",
    "clique_ge",
)
PATTERN_MAX_VERTICES = 5


@dataclass(frozen=True)
class PropertySpec:
    """An increasing graph property; ``t`` is the threshold, ``pattern`` the subgraph to find."""

    kind: str
    t: int = 0
    pattern: LabeledGraph | None = None
    direction: str = "increasing"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown property kind {self.kind!r}")
        if self.kind == "contains_subgraph":
            if self.pattern is None:
                raise ValueError("contains_subgraph needs a pattern")
            if self.pattern.n > PATTERN_MAX_VERTICES:
                raise ValueError(f"pattern has more than {PATTERN_MAX_VERTICES} vertices")

    def __str__(self) -> str:
        if self.kind == "connected":
            return "connected"
        if self.kind == "contains_subgraph":
            return f"contains_subgraph({self.pattern.sorted_edges()})"
        return f"{self.kind}({self.t})"


def component_sizes(g: LabeledGraph) -> np.ndarray:
    e = g.edge_array
    adj = coo_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(g.n, g.n))
    _, labels = connected_components(adj, directed=False)
    return np.bincount(labels)


def is_connected(g: LabeledGraph) -> bool:
    if g.num_edges < g.n - 1:
        return False
    return component_sizes(g).size == 1


def count_triangles(g: LabeledGraph) -> int:
    """Exact triangle count via common neighbours of each edge (each triangle seen 3 times)."""
    if g.num_edges < 3:
        return 0
    adj = g.adjacency()
    total = sum(len(adj[a] & adj[b]) for a, b in g.edge_array.tolist())
    return total // 3


def max_clique_size(g: LabeledGraph) -> int:
    """Largest clique by branch and bound over a degeneracy-ordered candidate set."""
    if g.num_edges == 0:
        return 1 if g.n else 0
    adj = g.adjacency()
    best = 1

    def expand(size: int, cand: set[int]) -> None:
        nonlocal best
        if not cand:
            best = max(best, size)
            return
        if size + len(cand) <= best:
            return
        for v in sorted(cand, key=lambda x: -len(adj[x] & cand)):
            if size + len(cand) <= best:
                return
            expand(size + 1, cand & adj[v])
            cand = cand - {v}

    expand(0, set(range(g.n)))
    return best


def contains_subgraph(g: LabeledGraph, pattern: LabeledGraph) -> bool:
    """Backtracking search for an injective edge-preserving map pattern -> g."""
    if pattern.n > PATTERN_MAX_VERTICES:
        raise ValueError(f"pattern has more than {PATTERN_MAX_VERTICES} vertices")
    if pattern.num_edges > g.num_edges or pattern.n > g.n:
        return False
    if pattern.num_edges == 0:
        return True
    adj = g.adjacency()
    p_edges = pattern.sorted_edges()
    # only vertices touched by pattern edges need placing
    order = sorted({v for e in p_edges for v in e}, key=lambda v: -pattern.degrees()[v])
    p_adj = pattern.adjacency()
    image: dict[int, int] = {}

    def place(i: int) -> bool:
        if i == len(order):
            return True
        v = order[i]
        placed_nbrs = [image[w] for w in p_adj[v] if w in image]
        if placed_nbrs:
            cand = set.intersection(*(adj[x] for x in placed_nbrs))
        else:
            cand = set(range(g.n))
        used = set(image.values())
        for c in cand - used:
            if len(adj[c]) < len(p_adj[v]):
                continue
            image[v] = c
            if place(i + 1):
                return True
            del image[v]
        return False

    return place(0)


def evaluate_property(g: LabeledGraph, spec: PropertySpec) -> bool:
    kind, t = spec.kind, spec.t
    if kind == "connected":
        return is_connected(g)
    if kind == "largest_component_ge":
        return int(component_sizes(g).max()) >= t
    if kind == "min_degree_ge":
        return int(g.degrees().min()) >= t
    if kind == "triangle_count_ge":
        return count_triangles(g) >= t
    if kind == "contains_subgraph":
        return contains_subgraph(g, spec.pattern)
    return max_clique_size(g) >= t


# -- tail bounds -------------------------------------------------------------

POISSON_CAVEAT = "Poisson variant carries an additional o(n^-i) term with no explicit constant"


def chernoff_tail_bound(dist: str, mean: float, t: float, side: str) -> float:
    """Upper bound on P(X <= mean - t) (``side='lower'``) or P(X >= mean + t) (``side='upper'``).

    ``dist='poisson'`` returns the same expression; see ``POISSON_CAVEAT``.
    """
    if dist not in ("binomial", "poisson"):
        raise ValueError(f"unknown distribution {dist!r}")
    if t < 0:
        raise ValueError("t must be nonnegative")
    if mean <= 0:
        raise ValueError("mean must be positive")
    if side == "lower":
        return math.exp(-t * t / (2 * mean))
    if side == "upper":
        return math.exp(-3 * t * t / (2 * (3 * mean + t)))
    raise ValueError(f"unknown side {side!r}")


TAIL_CASE_LOW, TAIL_CASE_HIGH = 0.5, 2.0


def tail_threshold_regime(lam: float, n: int) -> str:
    ln_n = math.log(n)
    if lam < TAIL_CASE_LOW * ln_n:
        return "small-mean"
    if lam > TAIL_CASE_HIGH * ln_n:
        return "large-mean"
    return "log-mean(omega=lnln n)"


def tail_threshold_a(lam: float, t: float, epsilon: float, n: int) -> float:
    """Level a with P(Bin >= a) = o(n^-t), for a binomial with mean ``lam``.

    Mean below 0.5 ln n: (t+eps) ln n / (ln ln n - ln lam); above 2 ln n:
    (1+eps) lam; in between: ln ln n * lam.
    """
    if lam <= 0:
        raise ValueError("lambda must be positive")
    if n < 3 or epsilon <= 0:
        raise ValueError("need n >= 3 and epsilon > 0")
    ln_n = math.log(n)
    regime = tail_threshold_regime(lam, n)
    if regime == "small-mean":
        return (t + epsilon) * ln_n / (math.log(ln_n) - math.log(lam))
    if regime == "large-mean":
        return (1 + epsilon) * lam
    return math.log(ln_n) * lam


# -- confidence intervals and tests --------------------------------------

def wilson_ci(successes: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    if trials <= 0:
        raise ValueError("trials must be positive")
    if not 0 <= successes <= trials:
        raise ValueError("successes must lie in 0..trials")
    z = float(stats.norm.isf((1 - level) / 2))
    phat = successes / trials
    denom = 1 + z * z / trials
    centre = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == trials else min(1.0, centre + half)
    return lo, hi


def binned_chisquare(observed: np.ndarray, expected_probs: np.ndarray, min_expected: float = 5.0):
    """Chi-square GOF after merging adjacent cells until each expects >= ``min_expected``.

    The last cell of ``expected_probs`` must already carry the upper tail.
    Returns ``(statistic, p_value, dof)``.
    """
    total = observed.sum()
    exp = expected_probs * total
    obs_bins, exp_bins = [], []
    o_acc = e_acc = 0.0
    for o, e in zip(observed, exp):
        o_acc += o
        e_acc += e
        if e_acc >= min_expected:
            obs_bins.append(o_acc)
            exp_bins.append(e_acc)
            o_acc = e_acc = 0.0
    if e_acc > 0 or o_acc > 0:
        if exp_bins:
            obs_bins[-1] += o_acc
            exp_bins[-1] += e_acc
        else:
            obs_bins.append(o_acc)
            exp_bins.append(e_acc)
    obs_arr, exp_arr = np.array(obs_bins), np.array(exp_bins)
    if len(obs_arr) < 2:
        # a single bin carries no information
        return 0.0, 1.0, 0
    stat = float(((obs_arr - exp_arr) ** 2 / exp_arr).sum())
    dof = len(obs_arr) - 1
    return stat, float(stats.chi2.sf(stat, dof)), dof


def poisson_gof(counts: Sequence[int] | np.ndarray, lam: float, min_total: int = 100) -> float:
    """p-value of a chi-square fit of observed counts to Po(lam).

    ``counts[j]`` is the number of observations equal to j.
    """
    counts = np.asarray(counts, dtype=float)
    if counts.sum() < min_total:
        raise ValueError(f"need at least {min_total} observations")
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    top = max(len(counts), int(stats.poisson.isf(1e-12, lam)) + 2) if lam > 0 else len(counts)
    observed = np.zeros(top)
    observed[: len(counts)] = counts
    probs = stats.poisson.pmf(np.arange(top), lam)
    probs[-1] = stats.poisson.sf(top - 2, lam)
    return binned_chisquare(observed, probs)[1] if lam > 0 else float(counts[1:].sum() == 0)


def histogram(values: Sequence[int] | np.ndarray) -> np.ndarray:
    return np.bincount(np.asarray(values, dtype=np.int64))


def binomial_gof(values: Sequence[int] | np.ndarray, trials: int, prob: float) -> float:
    """Chi-square p-value for integer samples against Bin(trials, prob)."""
    observed = np.bincount(np.asarray(values, dtype=np.int64), minlength=trials + 1).astype(float)
    probs = stats.binom.pmf(np.arange(trials + 1), trials, prob)
    return binned_chisquare(observed, probs)[1]


def exact_pmf_gof(values: Sequence, pmf: dict) -> float:
    """Chi-square p-value for hashable samples against an exact finite pmf."""
    keys = sorted(pmf, key=lambda k: pmf[k])
    c = Counter(values)
    extra = set(c) - set(pmf)
    if extra:
        return 0.0
    observed = np.array([c[k] for k in keys], dtype=float)
    probs = np.array([pmf[k] for k in keys])
    return binned_chisquare(observed, probs)[1]


@dataclass
class DominanceReport:
    thresholds: list[float]
    p_a: list[float]
    p_b: list[float]
    violations: list[float] = field(default_factory=list)
    level: float = 0.95
    n_a: int = 0
    n_b: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations


def dominance_check(
    samples_a: Sequence,
    samples_b: Sequence,
    statistic: Callable = lambda x: x,
    level: float = 0.95,
) -> DominanceReport:
    """Check that statistic(A) is stochastically below statistic(B).

    For every threshold t in the pooled support, flags a violation when the
    Wilson lower bound of P(A >= t) exceeds the Wilson upper bound of
    P(B >= t); the confidence level is Bonferroni-corrected over thresholds.
    """
    if len(samples_a) == 0 or len(samples_b) == 0:
        raise ValueError("empty samples")
    a = np.array([statistic(x) for x in samples_a], dtype=float)
    b = np.array([statistic(x) for x in samples_b], dtype=float)
    ts = np.unique(np.concatenate([a, b]))
    ts = ts[ts > ts.min()] if ts.size > 1 else ts[:0]  # t = min is trivially 1 for both
    a_sorted, b_sorted = np.sort(a), np.sort(b)
    each = 1 - (1 - level) / max(1, len(ts))
    report = DominanceReport([], [], [], level=level, n_a=len(a), n_b=len(b))
    for t in ts.tolist():
        ka = int(len(a) - np.searchsorted(a_sorted, t, side="left"))
        kb = int(len(b) - np.searchsorted(b_sorted, t, side="left"))
        report.thresholds.append(t)
        report.p_a.append(ka / len(a))
        report.p_b.append(kb / len(b))
        lo_a, _ = wilson_ci(ka, len(a), each)
        _, hi_b = wilson_ci(kb, len(b), each)
        if lo_a > hi_b:
            report.violations.append(t)
    return report


def exact_binomial_upper_tail(trials: int, prob: float, at_least: float) -> float:
    return float(stats.binom.sf(math.ceil(at_least) - 1, trials, prob))


def exact_binomial_lower_tail(trials: int, prob: float, at_most: float) -> float:
    return float(stats.binom.cdf(math.floor(at_most), trials, prob))
