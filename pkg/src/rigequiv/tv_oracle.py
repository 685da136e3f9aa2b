"""Exact finite distributions and total-variation distances.

Graph pmfs are keyed by the canonical bit encoding of ``LabeledGraph``
(``n <= 5``). The intersection-graph pmf uses ``P(RIG subset of G) = s(G)^m``
where ``s(G)`` is the probability that a single feature's clique fits inside
``G``, followed by Moebius inversion over the subgraph lattice.
"""

from __future__ import annotations

import math
from collections import Counter
from fractions import Fraction
from itertools import combinations, product
from typing import Hashable, Iterable, Mapping

import numpy as np
from scipy import special, stats

from .graph_core import LabeledGraph, pair_list

ORACLE_MAX_N = 5
COUNT_SUPPORT_MAX = 10**6
DENSE_STEP_MAX = 600


class OracleError(ValueError):
    pass


class FinitePmf:
    """Probability mass function over an enumerated finite space.

    ``space`` names the ambient space (e.g. ``("graphs", 4)``); two pmfs are
    comparable only when their spaces match. States missing from ``mass``
    have probability zero.
    """

    __slots__ = ("mass", "space")

    def __init__(self, mass: Mapping[Hashable, float], space: Hashable = None, atol: float = 1e-10):
        clean = {}
        for s, v in mass.items():
            v = float(v)
            if v < 0:
                if v < -atol:
                    raise OracleError(f"negative mass {v} at state {s!r}")
                v = 0.0
            clean[s] = v
        total = math.fsum(clean.values())
        if abs(total - 1.0) > atol:
            raise OracleError(f"masses sum to {total!r}, not 1")
        self.mass: dict[Hashable, float] = clean
        self.space = space

    def __getitem__(self, state) -> float:
        return self.mass.get(state, 0.0)

    def __len__(self) -> int:
        return len(self.mass)

    def states(self) -> list:
        return list(self.mass)

    def pushforward(self, fn, space: Hashable = None) -> "FinitePmf":
        out: dict = {}
        for s, v in self.mass.items():
            key = fn(s)
            out[key] = out.get(key, 0.0) + v
        return FinitePmf(out, space)

    def mean(self, fn=lambda s: s) -> float:
        return math.fsum(v * fn(s) for s, v in self.mass.items())


def _check_spaces(a: FinitePmf, b: FinitePmf) -> None:
    if a.space is not None and b.space is not None and a.space != b.space:
        raise OracleError(f"pmfs live on different spaces: {a.space!r} vs {b.space!r}")


def tv_exact(pmf_a: FinitePmf, pmf_b: FinitePmf) -> float:
    """Half the L1 distance between two pmfs on the same space."""
    _check_spaces(pmf_a, pmf_b)
    keys = set(pmf_a.mass) | set(pmf_b.mass)
    return min(1.0, 0.5 * math.fsum(abs(pmf_a[k] - pmf_b[k]) for k in keys))


def tv_empirical(samples_a: Iterable[Hashable], samples_b: Iterable[Hashable]) -> float:
    """Plug-in TV between empirical pmfs.

    Biased upwards: for a support of size S and N samples per side the bias
    is at most ``empirical_tv_bias_bound(S, N)``.
    """
    ca, cb = Counter(samples_a), Counter(samples_b)
    na, nb = sum(ca.values()), sum(cb.values())
    if na == 0 or nb == 0:
        raise ValueError("empty sample")
    keys = set(ca) | set(cb)
    return 0.5 * math.fsum(abs(ca[k] / na - cb[k] / nb) for k in keys)


def empirical_tv_bias_bound(support: int, n_samples: int) -> float:
    """Upper bound 0.5 * sqrt(2 S / N) on the expected plug-in TV of two equal samples."""
    return 0.5 * math.sqrt(2 * support / n_samples)


def empirical_pmf(samples: Iterable[Hashable], space: Hashable = None) -> FinitePmf:
    c = Counter(samples)
    total = sum(c.values())
    return FinitePmf({k: v / total for k, v in c.items()}, space)


# -- graph oracles ---------------------------------------------------------

def _clique_masks(n: int, sizes: Iterable[int] | None):
    """Bit mask of clique(S) for every vertex set S with |S| >= 2 (restricted to ``sizes``)."""
    index = {pr: i for i, pr in enumerate(pair_list(n))}
    allowed = set(range(2, n + 1)) if sizes is None else {k for k in sizes if k >= 2}
    out = []
    for k in range(2, n + 1):
        if k not in allowed:
            continue
        for S in combinations(range(n), k):
            mask = 0
            for pr in combinations(S, 2):
                mask |= 1 << index[pr]
            out.append((k, mask))
    return out


def _submasks(mask: int):
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def _moebius(containment: list, n_pairs: int) -> dict[int, object]:
    """pmf(G) = sum over H subset G of (-1)^{|G - H|} containment[H]."""
    out = {}
    for G in range(1 << n_pairs):
        bits_g = G.bit_count()
        terms = [containment[H] if (bits_g - H.bit_count()) % 2 == 0 else -containment[H] for H in _submasks(G)]
        out[G] = math.fsum(terms) if isinstance(terms[0], float) else sum(terms)
    return out


def _check_oracle_n(n: int) -> None:
    if not 1 <= n <= ORACLE_MAX_N:
        raise OracleError(f"exact graph oracle supports n <= {ORACLE_MAX_N}, got {n}")


def rig_exact_pmf(n: int, m: int, p: float, sizes: Iterable[int] | None = None) -> FinitePmf:
    """Exact pmf of the projected G(n,m,p) graph, keyed by bit encoding.

    ``sizes`` restricts which feature sizes contribute edges (all others act
    as blanks), which gives the exact law of the union of ``G^(k)`` for the
    selected k.
    """
    _check_oracle_n(n)
    n_pairs = n * (n - 1) // 2
    cliques = _clique_masks(n, sizes)
    weights = [(p**k) * (1 - p) ** (n - k) for k, _ in cliques]
    containment = []
    for G in range(1 << n_pairs):
        # t(G): probability that one feature's clique is not inside G
        t = math.fsum(w for (k, mask), w in zip(cliques, weights) if mask & ~G)
        containment.append(math.exp(m * math.log1p(-t)) if t < 1 else float(m == 0))
    return FinitePmf(_moebius(containment, n_pairs), ("graphs", n))


def rig_exact_pmf_rational(n: int, m: int, p: Fraction) -> dict[int, Fraction]:
    """Arbitrary-precision twin of ``rig_exact_pmf`` for rational p."""
    _check_oracle_n(n)
    p = Fraction(p)
    n_pairs = n * (n - 1) // 2
    cliques = _clique_masks(n, None)
    containment = []
    for G in range(1 << n_pairs):
        t = sum((p**k * (1 - p) ** (n - k) for k, mask in cliques if mask & ~G), Fraction(0))
        containment.append((1 - t) ** m)
    return _moebius(containment, n_pairs)


def er_exact_pmf(n: int, p_hat: float) -> FinitePmf:
    """Exact pmf of G(n, p_hat) keyed by bit encoding."""
    _check_oracle_n(n)
    n_pairs = n * (n - 1) // 2
    mass = {}
    for G in range(1 << n_pairs):
        e = G.bit_count()
        mass[G] = (p_hat**e) * (1 - p_hat) ** (n_pairs - e)
    return FinitePmf(mass, ("graphs", n))


def graph_key(g: LabeledGraph) -> int:
    return g.to_bits()


# -- count-vector oracles -----------------------------------------------

def _count_dims(n: int, K: int) -> list[int]:
    if K < 2 or K > n:
        raise OracleError(f"K must lie in 2..{n}, got {K}")
    dims = [math.comb(n, k) for k in range(2, K + 1)]
    if math.prod(d + 1 for d in dims) > COUNT_SUPPORT_MAX:
        raise OracleError("count-vector support too large")
    return dims


def _occupancy_operator(n_bar: list[int], P_bar: list[float]):
    if any(P < 0 for P in P_bar) or math.fsum(n * P for n, P in zip(n_bar, P_bar)) > 1 + 1e-12:
        raise OracleError("coupon probabilities must be nonnegative with total mass <= 1")
    shape = tuple(d + 1 for d in n_bar)
    grids = np.meshgrid(*[np.arange(s) for s in shape], indexing="ij")
    move = [(n_k - g) * P_k for n_k, g, P_k in zip(n_bar, grids, P_bar)]
    stay = 1.0 - sum(move)
    return shape, move, stay


def _occupancy_step(cur: np.ndarray, move, stay) -> np.ndarray:
    nxt = cur * stay
    ndim = cur.ndim
    for axis, mv in enumerate(move):
        moved = cur * mv
        src = [slice(None)] * ndim
        dst = [slice(None)] * ndim
        src[axis] = slice(0, cur.shape[axis] - 1)
        dst[axis] = slice(1, cur.shape[axis])
        nxt[tuple(dst)] += moved[tuple(src)]
    return nxt


def coupon_occupancy_path(n_bar: list[int], P_bar: list[float], max_draws: int):
    """Yield the occupancy law after 0, 1, ..., ``max_draws`` draws."""
    shape, move, stay = _occupancy_operator(n_bar, P_bar)
    cur = np.zeros(shape)
    cur[(0,) * len(shape)] = 1.0
    yield cur
    for _ in range(max_draws):
        cur = _occupancy_step(cur, move, stay)
        yield cur


def coupon_occupancy_pmf(n_bar: list[int], P_bar: list[float], draws: int) -> np.ndarray:
    """Exact law of distinct coupons hit per class after ``draws`` draws with a blank.

    Each draw picks a specific class-k coupon with probability ``P_bar[k]``
    and the blank otherwise. Returns an array of shape ``(n_2+1, ..., n_K+1)``.
    """
    shape, move, stay = _occupancy_operator(n_bar, P_bar)
    size = math.prod(shape)
    if draws == 0 or size > DENSE_STEP_MAX:
        *_, last = coupon_occupancy_path(n_bar, P_bar, draws)
        return last
    T = np.zeros((size, size))
    idx = np.arange(size).reshape(shape)
    T[idx.ravel(), idx.ravel()] = stay.ravel()
    for axis, mv in enumerate(move):
        src = np.take(idx, np.arange(shape[axis] - 1), axis=axis).ravel()
        dst = np.take(idx, np.arange(1, shape[axis]), axis=axis).ravel()
        T[src, dst] += np.take(mv, np.arange(shape[axis] - 1), axis=axis).ravel()
    out = np.linalg.matrix_power(T, draws)[0]
    return np.clip(out, 0.0, None).reshape(shape)


def _array_to_pmf(arr: np.ndarray, space) -> FinitePmf:
    return FinitePmf({tuple(int(i) for i in idx): float(v) for idx, v in np.ndenumerate(arr) if v > 0}, space)


def count_vector_pmfs(n: int, m: int, p: float, K: int) -> tuple[FinitePmf, FinitePmf]:
    """Exact laws of (X_2..X_K): distinct k-sets hit by G(n,m,p) features vs independent binomials."""
    dims = _count_dims(n, K)
    p_k = [p**k * (1 - p) ** (n - k) for k in range(2, K + 1)]
    space = ("counts", n, K)
    rig = coupon_occupancy_pmf(dims, p_k, m)
    indep = np.ones([d + 1 for d in dims])
    for axis, (d, pk) in enumerate(zip(dims, p_k)):
        q = -math.expm1(-m * pk)
        shape = [1] * len(dims)
        shape[axis] = d + 1
        indep = indep * stats.binom.pmf(np.arange(d + 1), d, q).reshape(shape)
    return _array_to_pmf(rig, space), _array_to_pmf(indep, space)


def dtv_binomial_poisson(n_hat: int, p_hat: float) -> tuple[float, float]:
    """Exact TV between Bin(n_hat, p_hat) and Po(n_hat p_hat), with the bound p_hat."""
    lam = n_hat * p_hat
    ks = np.arange(n_hat + 1)
    if p_hat in (0.0, 1.0):
        binom = (ks == (0 if p_hat == 0 else n_hat)).astype(float)
    else:
        # log space: scipy's binom.pmf overflows for p_hat near the smallest normal float
        log_binom = (special.gammaln(n_hat + 1) - special.gammaln(ks + 1) - special.gammaln(n_hat - ks + 1)
                     + ks * math.log(p_hat) + (n_hat - ks) * math.log1p(-p_hat))
        binom = np.exp(log_binom)
    diff = np.abs(binom - stats.poisson.pmf(ks, lam))
    tail = float(stats.poisson.sf(n_hat, lam))
    return 0.5 * (math.fsum(diff.tolist()) + tail), p_hat


def product_pmf(pmfs: list[FinitePmf], space=None) -> FinitePmf:
    mass = {}
    for combo in product(*[list(p.mass.items()) for p in pmfs]):
        mass[tuple(s for s, _ in combo)] = math.prod(v for _, v in combo)
    return FinitePmf(mass, space)
