"""Localized Rademacher norms and the iterated localization bound.

The bound works entirely from data: draw one sign vector, then iterate

    r_{k+1} = min(K1 * ||R_n||_{ball(2 r_k)} + K2 * sqrt(r_k eps) + K3 * eps, 1)

from r_0 = 1, where the ball is the empirical one {f: P_n f <= r} and
||R_n|| is the supremum of |n^{-1} sum_i eps_i f(X_i)| over it.  After N
iterations the last radius dominates the risk of every consistent
estimate, up to a tail probability of 2 N exp(-n eps / 2).
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .classes import (
    ConceptClass,
    FAST_PATH_RUNS,
    FAST_PATH_SYMDIFF,
    Sample,
    SampledRestriction,
    reduce_by_labels,
)

CONSTANTS_SAFE = "safe"
CONSTANTS_UNIT = "unit"
CONSTANTS_CUSTOM = "custom"

#: Iteration cap used when eps is chosen from a confidence level.  Eight
#: iterations cover every eps above ~1e-38, far below any usable value.
ITERATION_CAP = 8


def constants_from_gammas(gamma: float, gamma_prime: float) -> tuple[float, float, float]:
    """Conservative localization constants for parameters in (0, 1).

    K1 scales the local Rademacher norm, K2 the sqrt(r eps) term, K3 the
    eps term.  They are exactly the coefficients one gets by expanding the
    concentration chain empirical -> expected -> Rademacher with Massart's
    numerical constants, so the same triple reappears when the diagnostic
    phi-ladder is expanded at ball radius 2r.
    """
    if not (0.0 < gamma < 1.0) or not (0.0 < gamma_prime < 1.0):
        raise ValueError("gamma and gamma_prime must lie in (0, 1)")
    k1 = 2.0 * (1.0 + gamma) / (1.0 - gamma_prime)
    k2 = k1 * math.sqrt(5.4) + 2.0
    k3 = k1 * (1.75 + 21.6 / gamma_prime) + (1.75 + 16.0 / gamma)
    return k1, k2, k3


def default_iterations(eps: float) -> int:
    """Iteration count floor(log2 log2 (1/eps)) + 1, and 1 for eps >= 1/2."""
    if not (0.0 < eps < 1.0):
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    level = math.log2(1.0 / eps)
    if level <= 1.0:
        return 1
    return int(math.floor(math.log2(level))) + 1


@dataclass(frozen=True)
class RademacherDraw:
    """A vector of signs in {-1, +1}^n with seed provenance."""

    signs: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        signs = np.asarray(self.signs)
        if signs.ndim != 1 or not np.all(np.abs(signs) == 1):
            raise ValueError("signs must be a flat vector of +1/-1 entries")
        signs = signs.astype(np.int64)
        signs.flags.writeable = False
        object.__setattr__(self, "signs", signs)

    @classmethod
    def from_seed(cls, seed: int, n: int) -> "RademacherDraw":
        rng = np.random.default_rng(np.random.SeedSequence(seed))
        return cls(signs=rng.integers(0, 2, size=n) * 2 - 1, seed=seed)

    @property
    def n(self) -> int:
        return len(self.signs)


@dataclass(frozen=True)
class LocalizationConfig:
    """Parameters of one localization run.

    eps > 0 gives the tail guarantee; eps = 0 is accepted for degenerate
    closed-form checks but carries no guarantee.  constants_mode picks the
    (K1, K2, K3) triple: "safe" derives them from the gammas, "unit" is
    the exploratory (1, 1, 1), "custom" takes a user triple.
    """

    eps: float
    gamma: float = 0.5
    gamma_prime: float = 0.5
    constants_mode: str = CONSTANTS_SAFE
    custom_constants: tuple[float, float, float] | None = None
    iteration_override: int | None = None

    def __post_init__(self):
        if self.eps < 0.0 or not math.isfinite(self.eps):
            raise ValueError("eps must be a finite nonnegative real")
        if not (0.0 < self.gamma < 1.0) or not (0.0 < self.gamma_prime < 1.0):
            raise ValueError("gamma and gamma_prime must lie in (0, 1)")
        if self.constants_mode not in (CONSTANTS_SAFE, CONSTANTS_UNIT, CONSTANTS_CUSTOM):
            raise ValueError(f"unknown constants mode {self.constants_mode!r}")
        if self.constants_mode == CONSTANTS_CUSTOM:
            if self.custom_constants is None or len(self.custom_constants) != 3:
                raise ValueError("custom mode needs a (K1, K2, K3) triple")
            if any(k <= 0.0 for k in self.custom_constants):
                raise ValueError("custom constants must be positive")
        if self.iteration_override is not None and self.iteration_override < 1:
            raise ValueError("iteration override must be a positive integer")

    def resolve_constants(self) -> tuple[float, float, float]:
        if self.constants_mode == CONSTANTS_SAFE:
            return constants_from_gammas(self.gamma, self.gamma_prime)
        if self.constants_mode == CONSTANTS_UNIT:
            return 1.0, 1.0, 1.0
        return tuple(float(k) for k in self.custom_constants)

    def iterations(self) -> int:
        if self.iteration_override is not None:
            return self.iteration_override
        return default_iterations(self.eps)


@dataclass(frozen=True)
class BoundTrace:
    """The radii r_0, ..., r_N of one localization run.

    local_norms[k] is the Rademacher norm over the empirical ball of
    radius 2 * values[k] used in the k -> k+1 step.
    """

    values: tuple[float, ...]
    local_norms: tuple[float, ...]
    config: LocalizationConfig

    def __post_init__(self):
        if not self.values or self.values[0] != 1.0:
            raise ValueError("trace must start at r_0 = 1")
        if len(self.local_norms) != len(self.values) - 1:
            raise ValueError("one local norm per iteration step")

    @property
    def bound(self) -> float:
        return self.values[-1]

    @property
    def iterations(self) -> int:
        return len(self.values) - 1

    def rows(self) -> list[dict]:
        out = []
        for k, r in enumerate(self.values):
            norm = self.local_norms[k] if k < len(self.local_norms) else None
            out.append({"k": k, "r_bar": r, "local_norm": norm})
        return out


def _point_budget(radius: float, n: int) -> int:
    """Largest count c with c/n <= radius, exact under float comparison."""
    if radius < 0.0:
        raise ValueError("ball radius must be nonnegative")
    c = min(int(math.floor(radius * n)), n)
    while c + 1 <= n and (c + 1) / n <= radius:
        c += 1
    while c > 0 and c / n > radius:
        c -= 1
    return max(c, 0)


class LocalNormEvaluator:
    """Supremum of |n^{-1} sum_i eps_i v_i| over vectors with mean <= r.

    One instance is built per (restriction, draw) pair; repeated radius
    queries reuse the precomputed structure.  Three routes:

    - explicit vectors: one signed score per vector, linear scan;
    - interval runs (empty target): sliding window of at most floor(r n)
      points over the sorted sign prefix sums, monotone queues, O(n);
    - interval symmetric differences (general target): one O(n^2) scan
      over all run/target symmetric differences, folded into a table of
      running maxima indexed by point count, O(1) per radius after that.

    All intermediate sums are integers, so every route returns bit-equal
    results to exhaustive enumeration over the materialized vectors.
    """

    def __init__(self, restriction: SampledRestriction, draw: RademacherDraw):
        if draw.n != restriction.n:
            raise ValueError(
                f"draw of length {draw.n} against a restriction on "
                f"{restriction.n} points"
            )
        self.n = restriction.n
        self._mode = restriction.fast_path or "vectors"
        if restriction.vectors is not None:
            self._mode = "vectors"
            vec = restriction.vectors
            self._means = vec.mean(axis=1)
            self._scores = np.abs(vec @ draw.signs.astype(float)) / self.n
        elif restriction.fast_path == FAST_PATH_RUNS:
            sorted_signs = draw.signs[restriction.sort_order]
            prefix_all = np.concatenate(([0], np.cumsum(sorted_signs)))
            self._cum = restriction.group_cum.tolist()
            self._prefix = prefix_all[restriction.group_cum].tolist()
        elif restriction.fast_path == FAST_PATH_SYMDIFF:
            self._table = _symdiff_score_table(restriction, draw)
        else:
            raise ValueError(f"unknown fast path {restriction.fast_path!r}")

    def norm(self, radius: float) -> float:
        if radius < 0.0:
            raise ValueError("ball radius must be nonnegative")
        if self._mode == "vectors":
            mask = self._means <= radius
            if not mask.any():
                return 0.0  # empty ball: sup over the empty set is 0
            return float(self._scores[mask].max())
        budget = _point_budget(radius, self.n)
        if self._mode == FAST_PATH_SYMDIFF:
            best = self._table[min(budget, self.n)]
            return float(best) / self.n if best >= 0 else 0.0
        return _window_max_abs(self._prefix, self._cum, budget) / self.n


def _window_max_abs(prefix: list[int], cum: list[int], budget: int) -> int:
    """Max |prefix[b] - prefix[a]| over group windows of <= budget points."""
    if budget <= 0:
        return 0
    m = len(cum) - 1
    best = 0
    lo = 0
    max_q: deque[int] = deque()
    min_q: deque[int] = deque()
    for b in range(1, m + 1):
        a = b - 1
        pa = prefix[a]
        while max_q and prefix[max_q[-1]] <= pa:
            max_q.pop()
        max_q.append(a)
        while min_q and prefix[min_q[-1]] >= pa:
            min_q.pop()
        min_q.append(a)
        cb = cum[b]
        while cb - cum[lo] > budget:
            lo += 1
        if lo > a:
            continue  # even the single group at b exceeds the budget
        while max_q[0] < lo:
            max_q.popleft()
        while min_q[0] < lo:
            min_q.popleft()
        pb = prefix[b]
        gain = pb - prefix[min_q[0]]
        drop = prefix[max_q[0]] - pb
        if gain > best:
            best = gain
        if drop > best:
            best = drop
    return best


_SYMDIFF_BLOCK = 256


def _symdiff_score_table(restriction: SampledRestriction, draw: RademacherDraw) -> np.ndarray:
    """Running max of |signed sum| over symmetric differences, by count.

    table[c] = max over candidate vectors with at most c nonzero points of
    the absolute signed point sum (-1 where no candidate exists, which
    cannot happen at c >= count(zero vector) = 0).
    """
    n = restriction.n
    cum = restriction.group_cum.astype(np.int64)
    m = len(cum) - 1
    sorted_signs = draw.signs[restriction.sort_order]
    sign_prefix = np.concatenate(([0], np.cumsum(sorted_signs)))[cum]
    p, q = restriction.target_run if restriction.target_run is not None else (0, -1)
    count_t = int(cum[q + 1] - cum[p]) if q >= p else 0
    signed_t = int(sign_prefix[q + 1] - sign_prefix[p]) if q >= p else 0

    table = np.full(n + 1, -1, dtype=np.int64)
    table[count_t] = abs(signed_t)  # the empty run

    j_all = np.arange(m, dtype=np.int64)
    for i0 in range(0, m, _SYMDIFF_BLOCK):
        i1 = min(i0 + _SYMDIFF_BLOCK, m)
        i_block = np.arange(i0, i1, dtype=np.int64)
        reps = m - i_block
        i_idx = np.repeat(i_block, reps)
        offsets = np.concatenate([j_all[i:m] for i in i_block])
        j_idx = offsets
        cnt_run = cum[j_idx + 1] - cum[i_idx]
        sgn_run = sign_prefix[j_idx + 1] - sign_prefix[i_idx]
        lo = np.maximum(i_idx, p)
        hi = np.minimum(j_idx, q)
        overlap = lo <= hi
        cnt_int = np.where(overlap, cum[np.minimum(hi + 1, m)] - cum[np.minimum(lo, m)], 0)
        sgn_int = np.where(
            overlap, sign_prefix[np.minimum(hi + 1, m)] - sign_prefix[np.minimum(lo, m)], 0
        )
        cnt = cnt_run + count_t - 2 * cnt_int
        sgn = np.abs(sgn_run + signed_t - 2 * sgn_int)
        np.maximum.at(table, cnt, sgn)
    return np.maximum.accumulate(table)


def local_rademacher_norm(
    restriction: SampledRestriction, draw: RademacherDraw, radius: float
) -> float:
    """Sup of |n^{-1} sum_i signs_i v_i| over stored vectors with mean <= radius.

    The radius is the empirical ball radius itself; localization callers
    pass twice the localization radius.
    """
    return LocalNormEvaluator(restriction, draw).norm(radius)


def phi_bar(
    restriction: SampledRestriction,
    draw: RademacherDraw,
    config: LocalizationConfig,
    r: float,
    _evaluator: LocalNormEvaluator | None = None,
) -> float:
    """One localization step: K1 ||R_n||_{ball(2r)} + K2 sqrt(r eps) + K3 eps."""
    if not (0.0 <= r <= 1.0):
        raise ValueError(f"localization radius must lie in [0, 1], got {r}")
    k1, k2, k3 = config.resolve_constants()
    ev = _evaluator if _evaluator is not None else LocalNormEvaluator(restriction, draw)
    norm = ev.norm(2.0 * r)
    return k1 * norm + k2 * math.sqrt(r * config.eps) + k3 * config.eps


def localize(
    restriction: SampledRestriction, draw: RademacherDraw, config: LocalizationConfig
) -> BoundTrace:
    """Run the localization recursion r_{k+1} = min(phi_bar(r_k), 1) from r_0 = 1.

    One shared sign vector is used for all iterations; the output trace is
    nonincreasing because phi_bar is nondecreasing in r.
    """
    steps = config.iterations()
    k1, k2, k3 = config.resolve_constants()
    ev = LocalNormEvaluator(restriction, draw)
    values = [1.0]
    norms = []
    r = 1.0
    for _ in range(steps):
        norm = ev.norm(2.0 * r)
        norms.append(norm)
        r = min(k1 * norm + k2 * math.sqrt(r * config.eps) + k3 * config.eps, 1.0)
        values.append(r)
    return BoundTrace(values=tuple(values), local_norms=tuple(norms), config=config)


@dataclass(frozen=True)
class RiskBoundResult:
    """Data-dependent risk bound with its trace and tail certificate."""

    bound: float
    trace: BoundTrace
    certificate: float
    eps: float
    iterations: int


def risk_bound(
    concept_class: ConceptClass,
    labels,
    sample: Sample,
    delta_conf: float | None = None,
    *,
    eps: float | None = None,
    seed: int = 0,
    gamma: float = 0.5,
    gamma_prime: float = 0.5,
    constants_mode: str = CONSTANTS_SAFE,
    custom_constants: tuple[float, float, float] | None = None,
    iteration_override: int | None = None,
) -> RiskBoundResult:
    """Risk bound for any estimate consistent with the labels.

    Exactly one of delta_conf and eps must be given.  From a confidence
    level delta the recursion parameter is eps = 2 ln(2 * cap / delta) / n
    with cap = 8, which makes the tail certificate 2 N exp(-n eps / 2) at
    most delta for every N <= cap.  The iteration count is
    min(default_iterations(eps), cap) unless overridden.
    """
    if (delta_conf is None) == (eps is None):
        raise ValueError("provide exactly one of delta_conf and eps")
    n = sample.n
    if delta_conf is not None:
        if not (0.0 < delta_conf < 1.0):
            raise ValueError("delta_conf must lie in (0, 1)")
        eps = 2.0 * math.log(2.0 * ITERATION_CAP / delta_conf) / n
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    reduced = reduce_by_labels(concept_class, labels, sample)
    if iteration_override is not None:
        iterations = iteration_override
    elif eps >= 1.0:
        iterations = 1  # the recursion is already clamped after one step
    else:
        iterations = min(default_iterations(eps), ITERATION_CAP)
    draw = RademacherDraw.from_seed(seed, n)
    config = LocalizationConfig(
        eps=eps,
        gamma=gamma,
        gamma_prime=gamma_prime,
        constants_mode=constants_mode,
        custom_constants=custom_constants,
        iteration_override=iterations,
    )
    trace = localize(reduced, draw, config)
    certificate = 2.0 * iterations * math.exp(-n * eps / 2.0)
    return RiskBoundResult(
        bound=trace.bound,
        trace=trace,
        certificate=certificate,
        eps=eps,
        iterations=iterations,
    )
