"""Closed-form edge probabilities, amplifiers and sandwich bounds.

Every probability here is evaluated in log space so that ``m`` up to ~1e14
combined with tiny ``p`` stays finite and accurate.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

ALPHA_TOLERANCE = 1e-6
MODES = ("lemma9", "thm4", "thm313")

# Constants used for the per-k amplified terms of the lemma9 upper bound.
C3, C4, C5 = 3.5, 18.0, 44.0
CLIQUE_CONSTANTS = {3: C3, 4: C4, 5: C5}


def clique_constant_lower_bounds() -> dict[int, float]:
    """Strict lower bounds each per-k constant must exceed."""
    return {
        3: 2 * 3 / 6 ** (1 / 3),
        4: 15 ** (1 / 3) * 3 * 4 / 24 ** (1 / 6),
        5: (2**2 * 3 * 5**3) ** (1 / 6) * 4 * 5 / 120 ** (1 / 10),
    }


@dataclass(frozen=True)
class ModelParams:
    n: int
    m: int
    p: float
    alpha: float | None = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"n must be an integer >= 2, got {self.n}")
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f"m must be a positive integer, got {self.m}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "m", int(self.m))
        if self.alpha is not None:
            target = self.n ** self.alpha
            # m is an integer, so allow the half-unit rounding of n**alpha
            if abs(self.m - target) > max(0.5, ALPHA_TOLERANCE * target):
                raise ValueError(f"m={self.m} is not n**alpha={target:.6g}")

    @classmethod
    def from_alpha(cls, n: int, alpha: float, p: float) -> "ModelParams":
        return cls(n=n, m=round(n**alpha), p=p, alpha=alpha)

    @property
    def effective_alpha(self) -> float:
        return self.alpha if self.alpha is not None else math.log(self.m) / math.log(self.n)


def _log_feature_weight(n: int, p: float, k: int) -> float:
    """log(p^k (1-p)^(n-k)); -inf when the weight is zero."""
    if k > 0 and p == 0.0:
        return -math.inf
    if n - k > 0 and p == 1.0:
        return -math.inf
    lp = k * math.log(p) if k else 0.0
    lq = (n - k) * math.log1p(-p) if n - k else 0.0
    return lp + lq


def _one_minus_exp_neg(m: int, n: int, p: float, k: int) -> float:
    """1 - exp(-m p^k (1-p)^(n-k))."""
    lw = _log_feature_weight(n, p, k)
    if lw == -math.inf:
        return 0.0
    return -math.expm1(-math.exp(math.log(m) + lw))


def edge_prob_hat(params: ModelParams) -> float:
    """Edge probability of the matching independent-edge graph: 1 - exp(-m p^2 (1-p)^(n-2))."""
    return _one_minus_exp_neg(params.m, params.n, params.p, 2)


def feature_size_prob(n: int, p: float, k: int) -> tuple[float, float]:
    """Return ``(p_k, pi_k)``: the weight of one specific k-set and P(|V(w)| = k)."""
    if not 0 <= k <= n:
        raise ValueError(f"k must lie in 0..{n}, got {k}")
    lw = _log_feature_weight(n, p, k)
    if lw == -math.inf:
        return 0.0, 0.0
    log_binom = math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)
    return math.exp(lw), math.exp(lw + log_binom)


def q_k(params: ModelParams, k: int) -> float:
    """Clique-equivalent probability (1 - exp(-m p_k))^(1 / C(k, 2))."""
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    base = _one_minus_exp_neg(params.m, params.n, params.p, k)
    if k == 2:
        return base
    return base ** (1.0 / math.comb(k, 2))


def _check_unit_open(q: float) -> None:
    if not 0.0 < q < 1.0:
        raise ValueError(f"q must lie in (0, 1), got {q}")


def amplifier_regime(n: int, q: float) -> str:
    """Which branch of the amplifier table applies at this finite (n, q)."""
    x = n * q * q
    ln_n = math.log(n)
    if x <= n**-0.5:
        return "constant"
    if x < 0.5:
        return "sparse-log"
    if x <= 2.0:
        return "balanced"
    if x**3 < ln_n / 2:
        return "dense-log"
    if x**3 <= 2 * ln_n:
        return "cube-omega(lnln n)"
    return "cube"


def coupling_amplifier_a(n: int, q: float) -> float:
    """Monotone max-envelope of all amplifier branches at finite n.

    With ``x = n q^2`` the envelope is the maximum of 6, the sparse branch
    ``3 ln n / (ln ln n - ln x)`` (x <= 1), the balanced value
    ``3 ln n / ln ln n`` (x >= 0.5), the dense branch
    ``3 ln n / (ln ln n - 3 ln x)`` capped at ``x^3 = ln n / 2``, the
    omega branch ``ln ln n * x^3`` capped at ``x^3 = 2 ln n`` and ``1.1 x^3``.
    Capped branches keep their boundary value further right, so the result
    never decreases in q for fixed n.
    """
    _check_unit_open(q)
    if n < 3:
        raise ValueError("amplifier needs n >= 3 (ln ln n undefined)")
    x = n * q * q
    ln_n = math.log(n)
    lnln = math.log(ln_n)
    vals = [6.0]
    if x <= 1.0:
        vals.append(3 * ln_n / (lnln - math.log(x)))
    if x >= 0.5:
        vals.append(3 * ln_n / lnln)
    if x > 1.0:
        x_cap = min(x, (ln_n / 2) ** (1 / 3))
        d2 = lnln - 3 * math.log(x_cap)
        if x_cap > 1.0 and d2 > 0:
            vals.append(3 * ln_n / d2)
        x3 = x**3
        if x3 >= ln_n / 2:
            vals.append(lnln * min(x3, 2 * ln_n))
        vals.append(1.1 * x3)
    return max(vals)


def star_constant_C(n: int, q: float) -> float:
    """Envelope max{5.5, 1.1 n q^2, ln ln n on 0.1 <= n q^2 <= 10}."""
    _check_unit_open(q)
    x = n * q * q
    vals = [5.5, 1.1 * x]
    if 0.1 <= x <= 10 and n >= 3:
        vals.append(math.log(math.log(n)))
    return max(vals)


@dataclass
class DerivedThresholds:
    mode: str
    n: int
    m: int
    p: float
    p_hat: float
    p_k_list: dict[int, float]
    q_k_list: dict[int, float]
    a_value: dict[int, float]
    C_value: float | None
    p_minus: float
    p_plus: float
    regime: str
    warnings: list[str] = field(default_factory=list)

    def to_record(self) -> dict:
        """Flat JSON-ready record (per-k maps become ``name_k`` keys)."""
        rec = asdict(self)
        flat = {}
        for key, val in rec.items():
            if isinstance(val, dict):
                for k, v in sorted(val.items()):
                    flat[f"{key.removesuffix('_list')}_{k}"] = v
            else:
                flat[key] = val
        return flat


def _lemma9_K(params: ModelParams, warnings: list[str]) -> int:
    """Smallest K whose vanishing condition on size-(K+1) features holds numerically."""
    n, m, p = params.n, params.m, params.p
    for K in (3, 4, 5):
        bound = 1.0 / (n * m ** (1.0 / (K + 1)))
        ratio = p / bound
        if ratio < 1.0:
            if ratio > 0.5:
                warnings.append(
                    f"lemma9: p is within a factor 2 of n^-1 m^-1/{K + 1}; K={K} chosen, K={K + 1} also plausible"
                )
            return K
    warnings.append("lemma9: p exceeds n^-1 m^-1/6; features of size >= 6 are not negligible (K=5 used)")
    return 5


def _common_warnings(params: ModelParams, warnings: list[str]) -> None:
    n, m, p = params.n, params.m, params.p
    lower = 1.0 / (n * m ** (1 / 3))
    upper = math.sqrt(math.log(n) / m)
    if p < lower:
        warnings.append("p below n^-1 m^-1/3: G(n,m,p) and G(n,p_hat) are already close in total variation")
    if p > upper:
        warnings.append("p above sqrt(ln n / m): outside the studied range")
    tri = p * n * math.sqrt(m)
    if 0.1 <= tri <= 10:
        warnings.append(
            f"p = {tri:.3g}/(n sqrt m) sits on the triangle-appearance threshold where the equivalence fails"
        )


def p_bounds(params: ModelParams, mode: str = "lemma9") -> DerivedThresholds:
    """Lower/upper edge probabilities sandwiching G(n,m,p) under the chosen bound family."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    n, m, p = params.n, params.m, params.p
    warnings: list[str] = []
    p_hat = edge_prob_hat(params)
    p_minus = p_hat
    Ks = range(2, min(n, 5) + 1)
    p_k_list = {k: feature_size_prob(n, p, k)[0] for k in Ks}
    q_list = {k: q_k(params, k) for k in Ks}
    a_value: dict[int, float] = {}
    C_value = None
    alpha = params.effective_alpha

    if p == 0.0:
        return DerivedThresholds(mode, n, m, p, 0.0, p_k_list, q_list, a_value, None, 0.0, 0.0, "p=0", warnings)

    _common_warnings(params, warnings)
    cube = m ** (1 / 3) * p  # (m p^3)^(1/3)
    if mode == "thm4":
        if alpha <= 4:
            warnings.append(f"thm4 requires alpha > 4 (alpha={alpha:.4g})")
        p_plus = p_hat + 10 * cube
        regime = "thm4"
    elif mode == "thm313":
        if alpha <= 10 / 3:
            warnings.append(f"thm313 requires alpha > 10/3 (alpha={alpha:.4g})")
        p_plus = p_hat + 30 * cube
        regime = "thm313:K=3"
        if p >= 1.0 / (n * m**0.25):
            p_plus += 157 * (m * p**4) ** (1 / 6)
            regime = "thm313:K=4"
    else:
        K = _lemma9_K(params, warnings)
        regime = f"lemma9:K={K}"
        p_plus = q_list[2]
        for k in range(3, min(K, n) + 1):
            cq = CLIQUE_CONSTANTS[k] * q_list[k]
            if cq <= 0.0:
                continue
            if cq >= 1.0:
                warnings.append(f"lemma9: c_{k} q_{k} = {cq:.3g} >= 1; upper bound saturates at 1")
                p_plus = 1.0
                continue
            a = coupling_amplifier_a(n, cq)
            a_value[k] = a
            p_plus += a * cq
        x3 = n * (CLIQUE_CONSTANTS[3] * q_list[3]) ** 2 if n >= 3 else 0.0
        if n >= 3 and q_list[3] > 0 and CLIQUE_CONSTANTS[3] * q_list[3] < 1:
            C_value = star_constant_C(n, CLIQUE_CONSTANTS[3] * q_list[3])
            regime += f";amplifier={amplifier_regime(n, CLIQUE_CONSTANTS[3] * q_list[3])};nq^2={x3:.3g}"
    p_plus = min(1.0, p_plus)
    return DerivedThresholds(
        mode, n, m, p, p_hat, p_k_list, q_list, a_value, C_value, p_minus, p_plus, regime, warnings
    )
