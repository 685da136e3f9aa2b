"""Constructive couplings and finite-support coupling combinators."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Callable, Hashable, Sequence

import numpy as np
from scipy import stats

from .graph_core import KUniformHypergraph, LabeledGraph, is_subgraph
from .samplers import _unrank_k_subsets, as_generator
from .tv_oracle import FinitePmf, OracleError, _check_spaces, coupon_occupancy_path, coupon_occupancy_pmf

Order = Callable[[Hashable, Hashable], bool]
MARGINAL_TOL = 1e-9


def _le(a, b) -> bool:
    return a <= b


def coordinatewise_le(a: Sequence, b: Sequence) -> bool:
    return all(x <= y for x, y in zip(a, b))


def bits_subset(a: int, b: int) -> bool:
    """Subgraph order on bit-encoded graphs."""
    return a & ~b == 0


class JointPmf:
    """Joint law of a pair (a, b) on a finite support, with a declared partial order."""

    __slots__ = ("mass", "leq")

    def __init__(self, mass: dict[tuple, float], leq: Order = _le, atol: float = 1e-12):
        if any(v < -atol for v in mass.values()):
            raise OracleError("negative joint mass")
        total = math.fsum(mass.values())
        if abs(total - 1.0) > atol:
            raise OracleError(f"joint masses sum to {total!r}")
        self.mass = {k: max(v, 0.0) for k, v in mass.items() if v != 0.0}
        self.leq = leq

    def order_flag(self, pair: tuple) -> bool:
        return bool(self.leq(*pair))

    def success(self) -> float:
        """Mass of the pairs with a below b in the declared order."""
        return math.fsum(v for pr, v in self.mass.items() if self.leq(*pr))

    def failure(self) -> float:
        return 1.0 - self.success()

    def prob_equal(self) -> float:
        return math.fsum(v for (a, b), v in self.mass.items() if a == b)

    def marginal(self, side: int) -> dict:
        out: dict = {}
        for pr, v in self.mass.items():
            out[pr[side]] = out.get(pr[side], 0.0) + v
        return out


def maximal_coupling(pmf_a: FinitePmf, pmf_b: FinitePmf, leq: Order = _le) -> JointPmf:
    """Coupling with diagonal mass min(pmf_a, pmf_b); residuals are paired independently."""
    _check_spaces(pmf_a, pmf_b)
    keys = sorted(set(pmf_a.mass) | set(pmf_b.mass), key=repr)
    overlap = {k: min(pmf_a[k], pmf_b[k]) for k in keys}
    omega = math.fsum(overlap.values())
    mass = {(k, k): v for k, v in overlap.items() if v > 0}
    if omega < 1.0:
        res_a = {k: pmf_a[k] - overlap[k] for k in keys if pmf_a[k] > overlap[k]}
        res_b = {k: pmf_b[k] - overlap[k] for k in keys if pmf_b[k] > overlap[k]}
        slack = 1.0 - omega
        for a, ra in res_a.items():
            for b, rb in res_b.items():
                mass[(a, b)] = mass.get((a, b), 0.0) + ra * rb / slack
    return JointPmf(mass, leq, atol=1e-9)


def compose_couplings(joint_xy: JointPmf, joint_yz: JointPmf, leq: Order | None = None) -> JointPmf:
    """Glue two couplings along their shared Y marginal; returns the (X, Z) law."""
    y_left = joint_xy.marginal(1)
    y_right = joint_yz.marginal(0)
    for y in set(y_left) | set(y_right):
        if abs(y_left.get(y, 0.0) - y_right.get(y, 0.0)) > MARGINAL_TOL:
            raise OracleError(f"Y marginals disagree at {y!r}")
    by_y: dict = {}
    for (y, z), v in joint_yz.mass.items():
        by_y.setdefault(y, []).append((z, v))
    mass: dict = {}
    for (x, y), v1 in joint_xy.mass.items():
        py = y_left[y]
        if py <= 0:
            continue
        for z, v2 in by_y.get(y, ()):
            mass[(x, z)] = mass.get((x, z), 0.0) + v1 * v2 / py
    return JointPmf(mass, leq or joint_xy.leq, atol=1e-9)


def product_coupling(joints: Sequence[JointPmf], reduce: str = "vector") -> JointPmf:
    """Independent product of couplings; ``reduce='sum'`` maps to coordinate sums."""
    if reduce not in ("vector", "sum"):
        raise ValueError("reduce must be 'vector' or 'sum'")
    if len(joints) == 1 and reduce == "vector":
        return joints[0]
    mass: dict = {}
    for combo in product(*[list(j.mass.items()) for j in joints]):
        v = math.prod(w for _, w in combo)
        xs = tuple(pr[0] for pr, _ in combo)
        ys = tuple(pr[1] for pr, _ in combo)
        key = (sum(xs), sum(ys)) if reduce == "sum" else (xs, ys)
        mass[key] = mass.get(key, 0.0) + v
    if reduce == "sum":
        return JointPmf(mass, _le)
    orders = [j.leq for j in joints]
    return JointPmf(mass, lambda a, b: all(o(x, y) for o, x, y in zip(orders, a, b)))


# -- constructive graph couplings ---------------------------------------

def couple_er_monotone(n: int, p_list: Sequence[float], rng) -> list[LabeledGraph]:
    """Nested G(n, p_1) <= G(n, p_2) <= ... from one shared uniform per pair."""
    if any(b < a for a, b in zip(p_list, p_list[1:])):
        raise ValueError("p_list must be sorted ascending")
    gen = as_generator(rng)
    iu, iv = np.triu_indices(n, k=1)
    u = gen.random(iu.size)
    return [LabeledGraph.from_arrays(n, iu[u < p], iv[u < p]) for p in p_list]


def union_er_coupling(n: int, p_list: Sequence[float], rng) -> tuple[LabeledGraph, LabeledGraph]:
    """(union of independent G(n, p_i), G(n, min(1, sum p_i))) coupled so the first is inside the second."""
    gen = as_generator(rng)
    p_union = -math.expm1(math.fsum(math.log1p(-p) if p < 1 else -math.inf for p in p_list))
    p_big = min(1.0, math.fsum(p_list))
    iu, iv = np.triu_indices(n, k=1)
    u = gen.random(iu.size)
    return (
        LabeledGraph.from_arrays(n, iu[u < p_union], iv[u < p_union]),
        LabeledGraph.from_arrays(n, iu[u < p_big], iv[u < p_big]),
    )


# -- coupon collector model ------------------------------------------------

@dataclass(frozen=True)
class CouponModel:
    """Coupons in classes 2..K (``n_bar[i]`` coupons of class i+2), each drawn w.p. ``P_bar[i]``."""

    n_bar: tuple[int, ...]
    P_bar: tuple[float, ...]

    def __post_init__(self):
        if len(self.n_bar) != len(self.P_bar):
            raise ValueError("n_bar and P_bar differ in length")
        if any(x < 0 for x in self.n_bar) or any(P < 0 for P in self.P_bar):
            raise ValueError("negative coupon counts or probabilities")
        if self.used_mass > 1 + 1e-12:
            raise ValueError(f"sum n_k P_k = {self.used_mass} exceeds 1")

    @property
    def K(self) -> int:
        return len(self.n_bar) + 1

    @property
    def used_mass(self) -> float:
        return math.fsum(n * P for n, P in zip(self.n_bar, self.P_bar))

    @property
    def blank_mass(self) -> float:
        return max(0.0, 1.0 - self.used_mass)

    def draw_probs(self) -> np.ndarray:
        """Per-draw probability of each coupon (class-major order) followed by the blank."""
        probs = [P for n, P in zip(self.n_bar, self.P_bar) for _ in range(n)]
        return np.array(probs + [self.blank_mass])

    def coupon_class(self) -> np.ndarray:
        return np.repeat(np.arange(len(self.n_bar)), self.n_bar)


def _hits_to_vector(model: CouponModel, hit: np.ndarray) -> tuple[int, ...]:
    cls = model.coupon_class()
    return tuple(int(x) for x in np.bincount(cls[hit], minlength=len(model.n_bar)))


def _draw_coupons(model: CouponModel, M: int, gen: np.random.Generator) -> np.ndarray:
    probs = model.draw_probs()
    return gen.choice(probs.size, size=M, p=probs / probs.sum())


def coupon_sample(model: CouponModel, M: int, rng) -> tuple[int, ...]:
    """X(M): distinct coupons of each class hit in M draws with replacement."""
    if M < 0:
        raise ValueError("M must be nonnegative")
    gen = as_generator(rng)
    total = sum(model.n_bar)
    draws = _draw_coupons(model, M, gen)
    hit = np.zeros(total, dtype=bool)
    hit[draws[draws < total]] = True
    return _hits_to_vector(model, hit)


def coupon_Y_sample(model: CouponModel, P_prime: Sequence[float], rng) -> tuple[int, ...]:
    """Y: independent Bin(n_k, P'_k) per class."""
    gen = as_generator(rng)
    return tuple(int(gen.binomial(n, P)) for n, P in zip(model.n_bar, P_prime))


def coupon_extend_coupling(model: CouponModel, M: int, M_prime: int, rng) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """(X(M), X(M')) sharing the first M draws, so X(M) <= X(M') coordinatewise."""
    if M > M_prime:
        raise ValueError("need M <= M_prime")
    gen = as_generator(rng)
    total = sum(model.n_bar)
    draws = _draw_coupons(model, M_prime, gen)
    hit = np.zeros(total, dtype=bool)
    first = draws[:M]
    hit[first[first < total]] = True
    x_m = _hits_to_vector(model, hit)
    rest = draws[M:]
    hit[rest[rest < total]] = True
    return x_m, _hits_to_vector(model, hit)


def _support_guard(model: CouponModel) -> None:
    if math.prod(n + 1 for n in model.n_bar) > 10**6:
        raise OracleError("coupon support too large")


def poissonized_coupon_pmf(model: CouponModel, lam: float) -> FinitePmf:
    """Law of X(M) for M ~ Po(lam): independent Bin(n_k, 1 - exp(-lam P_k)) per class."""
    _support_guard(model)
    marginals = [
        stats.binom.pmf(np.arange(n + 1), n, -math.expm1(-lam * P)) for n, P in zip(model.n_bar, model.P_bar)
    ]
    mass = {}
    for idx in product(*[range(n + 1) for n in model.n_bar]):
        v = math.prod(float(mg[i]) for mg, i in zip(marginals, idx))
        if v > 0:
            mass[idx] = v
    return FinitePmf(mass, ("coupons", model.n_bar))


def poissonized_coupon_pmf_direct(model: CouponModel, lam: float, tail: float = 1e-12) -> FinitePmf:
    """Same law computed by conditioning on M, with the Poisson tail beyond mass ``tail`` dropped."""
    _support_guard(model)
    shape = tuple(n + 1 for n in model.n_bar)
    acc = np.zeros(shape)
    M_max = int(stats.poisson.isf(tail, lam)) + 1 if lam > 0 else 0
    weights = stats.poisson.pmf(np.arange(M_max + 1), lam)
    for w, occ in zip(weights, coupon_occupancy_path(list(model.n_bar), list(model.P_bar), M_max)):
        acc += w * occ
    mass = {tuple(int(i) for i in idx): float(v) for idx, v in np.ndenumerate(acc) if v > 0}
    return FinitePmf(mass, ("coupons", model.n_bar), atol=1e-9)


def coupon_exact_pmf(model: CouponModel, M: int) -> FinitePmf:
    """Exact law of X(M) for a fixed number of draws."""
    arr = coupon_occupancy_pmf(list(model.n_bar), list(model.P_bar), M)
    return FinitePmf({tuple(int(i) for i in idx): float(v) for idx, v in np.ndenumerate(arr) if v > 0},
                     ("coupons", model.n_bar))


# -- counterexample and star construction -------------------------------

def counterexample_probs(n: int, q: float) -> tuple[float, float]:
    """(r, r'): per-bijection firing probability and resulting edge probability of G_3."""
    r = -math.expm1(math.log1p(-(q**3)) / 6)
    r_prime = -math.expm1(2 * (n - 2) * math.log1p(-r))
    return r, r_prime


# the 6 bijections {1,2,3} -> e, as positions of (label1, label2) inside the sorted triple
_BIJECTION_PAIRS = [(0, 1), (1, 0), (0, 2), (2, 0), (1, 2), (2, 1)]


@dataclass
class CounterexampleSample:
    hypergraph: KUniformHypergraph
    graph: LabeledGraph
    r_prime: float


def counterexample_batch(n: int, q: float, reps: int, rng) -> list[tuple[np.ndarray, np.ndarray]]:
    """Fired (3-set rank, bijection) slots for ``reps`` independent replicates.

    Every slot fires independently with probability r; the number of fired
    slots is drawn first and the fired set is then a uniform subset of that
    size, which has the same law.
    """
    if not 0 < q < 1 or n < 3:
        raise ValueError("need 0 < q < 1 and n >= 3")
    gen = as_generator(rng)
    r, _ = counterexample_probs(n, q)
    slots = 6 * math.comb(n, 3)
    fired = gen.binomial(slots, r, size=reps)
    out = []
    empty = np.empty(0, dtype=np.int64)
    for f in fired.tolist():
        if f == 0:
            out.append((empty, empty))
            continue
        chosen = gen.choice(slots, size=f, replace=False)
        out.append(np.divmod(chosen, 6))
    return out


def _counterexample_graphs(n: int, triple_rank: np.ndarray, bij: np.ndarray) -> tuple[KUniformHypergraph, LabeledGraph]:
    triples = _unrank_k_subsets(n, 3, np.unique(triple_rank))
    h3 = KUniformHypergraph(n, 3, triples.tolist())
    if triple_rank.size == 0:
        return h3, LabeledGraph.empty(n)
    rows = _unrank_k_subsets(n, 3, triple_rank)
    pos = np.array(_BIJECTION_PAIRS)[bij]
    u = rows[np.arange(len(rows)), pos[:, 0]]
    v = rows[np.arange(len(rows)), pos[:, 1]]
    return h3, LabeledGraph.from_arrays(n, u, v)


def counterexample_coupling(n: int, q: float, rng) -> CounterexampleSample:
    """(H3 ~ H^(3)(n, q^3), G3 ~ G(n, r'), r') with G3 inside the projection of H3."""
    _, r_prime = counterexample_probs(n, q)
    tr, bij = counterexample_batch(n, q, 1, rng)[0]
    h3, g3 = _counterexample_graphs(n, tr, bij)
    return CounterexampleSample(h3, g3, r_prime)


def counterexample_edge_counts(n: int, q: float, reps: int, rng) -> np.ndarray:
    """|E(G3)| for ``reps`` replicates, without materializing the hypergraphs."""
    counts = np.zeros(reps, dtype=np.int64)
    for i, (tr, bij) in enumerate(counterexample_batch(n, q, reps, rng)):
        if tr.size:
            counts[i] = _counterexample_graphs(n, tr, bij)[1].num_edges
    return counts


def star_split_sample(n: int, q: float, C: float, rng) -> tuple[LabeledGraph, LabeledGraph]:
    """Independent draws of H* and T* on X1 = 0..n-1, X2 = n..2n-1.

    H* keeps each cross pair with probability q^3. T* marks each vertex with
    probability C q and keeps each marked cross pair with probability q.
    """
    if C * q > 1:
        raise ValueError(f"C*q = {C * q} exceeds 1")
    gen = as_generator(rng)
    a, b = np.divmod(np.arange(n * n), n)
    h_keep = gen.random(n * n) < q**3
    marks = gen.random(2 * n) < C * q
    t_keep = marks[a] & marks[n + b] & (gen.random(n * n) < q)
    return (
        LabeledGraph.from_arrays(2 * n, a[h_keep], n + b[h_keep]),
        LabeledGraph.from_arrays(2 * n, a[t_keep], n + b[t_keep]),
    )


def check_containment(pairs) -> int:
    """Number of (small, big) graph pairs violating small <= big."""
    return sum(not is_subgraph(a, b) for a, b in pairs)
