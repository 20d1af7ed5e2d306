"""Covering entropy, entropy integrals, and rate fixed points.

The convergence rate delivered by the localization is characterized by
the solution of

    delta = n^{-1/2} * psi(sqrt(delta))

where psi dominates the local process norm, typically an entropy
integral: psi(r) = K * int_0^r H(u)^{1/2} du for random covering entropy,
or int_0^r (H(u) + 1)^{1/2} du for bracketing entropy.

Power-law curves H(u) = A u^{-g} integrate only for g < 2.  Curves with
g >= 2 arise from converting inclusion-scale entropy to the bracketing
scale (the radius maps through u -> u^2 / B); for those the integral is
replaced by its dominant local term r (H(r) + 1)^{1/2}, which leaves the
fixed-point exponent -2 / (2 + g) intact across the whole range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, optimize

VARIANT_RANDOM = "random"
VARIANT_BRACKETING = "bracketing"

#: Conservative chaining constant for the random entropy integral.  Rate
#: exponents do not depend on it; it only scales the fixed point.
DEFAULT_CHAINING_K = 12.0


class DivergentIntegralError(ValueError):
    """The requested entropy integral diverges at zero."""


class FixedPointError(RuntimeError):
    """The fixed-point iteration failed to converge (degenerate psi)."""


@dataclass(frozen=True)
class EntropyCurve:
    """A nonincreasing entropy curve u -> H(u) >= 0 on (0, u_max].

    Forms: "zero" (H = 0), "vc" (constant log shattering count), "power"
    (H = A u^{-g}), "tabulated" (interpolated knots, constant below the
    first knot).
    """

    form: str
    coefficient: float = 0.0       # power: A
    exponent: float = 0.0          # power: g
    log_count: float = 0.0         # vc: log of the covering/shattering count
    u_knots: np.ndarray | None = None
    h_knots: np.ndarray | None = None
    u_max: float = math.inf

    def __post_init__(self):
        if self.form not in ("zero", "vc", "power", "tabulated"):
            raise ValueError(f"unknown curve form {self.form!r}")
        if self.form == "power" and (self.coefficient <= 0.0 or self.exponent <= 0.0):
            raise ValueError("power curve needs positive coefficient and exponent")
        if self.form == "vc" and self.log_count < 0.0:
            raise ValueError("vc curve needs a nonnegative log count")
        if self.form == "tabulated":
            u = np.asarray(self.u_knots, dtype=float)
            h = np.asarray(self.h_knots, dtype=float)
            if u.ndim != 1 or u.shape != h.shape or len(u) < 1:
                raise ValueError("tabulated curve needs matching 1-d knot arrays")
            if np.any(u <= 0.0) or np.any(np.diff(u) <= 0.0):
                raise ValueError("knot radii must be positive and increasing")
            if np.any(h < 0.0) or np.any(np.diff(h) > 0.0):
                raise ValueError("entropy values must be nonnegative and nonincreasing")
            u.flags.writeable = False
            h.flags.writeable = False
            object.__setattr__(self, "u_knots", u)
            object.__setattr__(self, "h_knots", h)
            object.__setattr__(self, "u_max", float(u[-1]))

    @classmethod
    def zero(cls) -> "EntropyCurve":
        return cls(form="zero")

    @classmethod
    def vc(cls, log_count: float) -> "EntropyCurve":
        return cls(form="vc", log_count=log_count)

    @classmethod
    def vc_from_count(cls, count: int) -> "EntropyCurve":
        if count < 1:
            raise ValueError("shattering count must be >= 1")
        return cls(form="vc", log_count=math.log(count))

    @classmethod
    def power(cls, coefficient: float, exponent: float) -> "EntropyCurve":
        return cls(form="power", coefficient=coefficient, exponent=exponent)

    @classmethod
    def tabulated(cls, u_knots, h_knots) -> "EntropyCurve":
        return cls(form="tabulated", u_knots=np.asarray(u_knots, dtype=float),
                   h_knots=np.asarray(h_knots, dtype=float))

    def evaluate(self, u: float) -> float:
        if u <= 0.0:
            raise ValueError("entropy curve is defined for u > 0")
        if self.form == "zero":
            return 0.0
        if self.form == "vc":
            return self.log_count
        if self.form == "power":
            return self.coefficient * u ** (-self.exponent)
        u_arr = self.u_knots
        if u <= u_arr[0]:
            return float(self.h_knots[0])
        if u >= u_arr[-1]:
            return float(self.h_knots[-1])
        return float(np.interp(u, u_arr, self.h_knots))


def empirical_covering_entropy(restriction, radii) -> EntropyCurve:
    """Tabulated u -> log(covering count) under the empirical L2 metric.

    Greedy covering: repeatedly take the first uncovered vector as a
    center and absorb everything within distance u.  This is a valid
    cover, hence an upper bound on the covering number, which is the
    conservative direction for the entropy integral.  Counts are made
    nonincreasing across radii by reusing any smaller-radius cover, which
    is again a valid cover.
    """
    vectors = restriction.materialize()
    if vectors.shape[0] == 0:
        raise ValueError("empty restriction has no covering entropy")
    radii = np.asarray(radii, dtype=float)
    if radii.ndim != 1 or len(radii) == 0 or np.any(radii <= 0.0):
        raise ValueError("radii must be a nonempty list of positive reals")
    order = np.argsort(radii)
    n = vectors.shape[1]
    diff = vectors[:, None, :] - vectors[None, :, :]
    dist = np.sqrt((diff ** 2).sum(axis=2) / n)

    sorted_radii = radii[order]
    greedy = np.empty(len(radii), dtype=int)
    for pos, u in enumerate(sorted_radii):
        covered = np.zeros(vectors.shape[0], dtype=bool)
        centers = 0
        while not covered.all():
            center = int(np.argmin(covered))  # first uncovered index
            covered |= dist[center] <= u
            centers += 1
        greedy[pos] = centers
    # a cover at a smaller radius stays valid at a larger one, so the
    # running minimum going up in u is still a covering count and makes
    # the curve nonincreasing
    counts = np.minimum.accumulate(greedy)
    return EntropyCurve.tabulated(sorted_radii, np.log(counts))


def _power_bracketing_integral(a: float, g: float, r: float) -> float:
    """int_0^r sqrt(A u^-g + 1) du via the substitution u = t^beta.

    beta = 2 / (2 - g) flattens the u^{-g/2} singularity to a constant,
    so plain adaptive quadrature converges cleanly.
    """
    beta = 2.0 / (2.0 - g)

    def integrand(t):
        if t <= 0.0:
            return math.sqrt(a) * beta
        u = t ** beta
        return math.sqrt(a * u ** (-g) + 1.0) * beta * t ** (beta - 1.0)

    upper = r ** (1.0 / beta)
    value, _ = integrate.quad(integrand, 0.0, upper, limit=200)
    return value


def _tabulated_integral(curve: EntropyCurve, r: float, offset: float) -> float:
    """int_0^r sqrt(H(u) + offset) du, closed form on each linear piece."""

    def piece(u0, u1, h0, h1):
        if u1 <= u0:
            return 0.0
        s = (h1 - h0) / (u1 - u0)
        if abs(s) < 1e-300:
            return math.sqrt(h0 + offset) * (u1 - u0)
        f0 = (h0 + offset) ** 1.5
        f1 = (h1 + offset) ** 1.5
        return (f1 - f0) * 2.0 / (3.0 * s)

    u = curve.u_knots
    h = curve.h_knots
    total = math.sqrt(h[0] + offset) * min(r, u[0])  # constant below the first knot
    for i in range(len(u) - 1):
        if r <= u[i]:
            break
        hi = min(r, u[i + 1])
        h_end = curve.evaluate(hi)
        total += piece(u[i], hi, h[i], h_end)
    return total


def entropy_integral(
    curve: EntropyCurve, r: float, variant: str = VARIANT_RANDOM, K: float = 1.0
) -> float:
    """K * int_0^r H(u)^{1/2} du (random) or K * int_0^r (H(u)+1)^{1/2} du.

    Closed forms are used for zero, vc, and random-variant power curves;
    bracketing power curves go through adaptive quadrature with an exact
    substitution at the endpoint singularity.  Raises
    DivergentIntegralError for power exponents >= 2.
    """
    if r <= 0.0:
        raise ValueError("integral endpoint r must be positive")
    if K <= 0.0:
        raise ValueError("scale K must be positive")
    if variant not in (VARIANT_RANDOM, VARIANT_BRACKETING):
        raise ValueError(f"unknown integral variant {variant!r}")
    if curve.form == "tabulated" and r > curve.u_max * (1.0 + 1e-12):
        raise ValueError(f"r={r} beyond the tabulated range (0, {curve.u_max}]")
    offset = 1.0 if variant == VARIANT_BRACKETING else 0.0

    if curve.form == "zero":
        return K * math.sqrt(offset) * r
    if curve.form == "vc":
        return K * math.sqrt(curve.log_count + offset) * r
    if curve.form == "power":
        a, g = curve.coefficient, curve.exponent
        if g >= 2.0:
            raise DivergentIntegralError(
                f"power entropy with exponent {g} >= 2 has a divergent integral"
            )
        if variant == VARIANT_RANDOM:
            return K * math.sqrt(a) * r ** (1.0 - g / 2.0) / (1.0 - g / 2.0)
        return K * _power_bracketing_integral(a, g, r)
    return K * _tabulated_integral(curve, min(r, curve.u_max), offset)


@dataclass(frozen=True)
class FixedPointResult:
    """Solution of delta = n^{-1/2} psi(sqrt(delta)) with diagnostics."""

    delta: float
    residual: float
    iterations: int
    psi_at_sqrt_delta: float


def fixed_point(
    psi: Callable[[float], float],
    n: int,
    tol: float = 1e-10,
    max_iter: int = 500,
) -> FixedPointResult:
    """Unique positive solution of delta = n^{-1/2} psi(sqrt(delta)).

    psi must be nondecreasing and concave with psi(0) = 0 and psi not
    identically zero.  The plain iteration delta <- n^{-1/2} psi(sqrt(delta))
    from delta_0 = 1 is then monotone and contracts at rate <= 1/2 near
    the solution (concavity gives psi'(s) <= psi(s)/s).
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    if tol <= 0.0:
        raise ValueError("tolerance must be positive")
    root_n = math.sqrt(n)
    delta = 1.0
    for iteration in range(1, max_iter + 1):
        nxt = psi(math.sqrt(delta)) / root_n
        if not math.isfinite(nxt) or nxt < 0.0:
            raise FixedPointError(f"psi produced an invalid iterate {nxt}")
        if nxt == 0.0:
            raise FixedPointError("psi vanishes along the iteration (degenerate)")
        if abs(nxt - delta) <= 0.25 * tol * nxt:
            residual = abs(nxt - psi(math.sqrt(nxt)) / root_n)
            return FixedPointResult(
                delta=nxt,
                residual=residual,
                iterations=iteration,
                psi_at_sqrt_delta=psi(math.sqrt(nxt)),
            )
        delta = nxt
    raise FixedPointError(f"no convergence within {max_iter} iterations")


def _local_psi(curve: EntropyCurve, variant: str, K: float) -> Callable[[float], float]:
    offset = 1.0 if variant == VARIANT_BRACKETING else 0.0

    def psi(r: float) -> float:
        if r <= 0.0:
            return 0.0
        return K * r * math.sqrt(curve.evaluate(r) + offset)

    return psi


def curve_fixed_point(
    curve: EntropyCurve,
    n: int,
    variant: str = VARIANT_BRACKETING,
    K: float = 1.0,
    tol: float = 1e-10,
) -> FixedPointResult:
    """Fixed point of the entropy integral psi built from a curve.

    For integrable curves, psi(r) is the entropy integral and the generic
    monotone iteration applies.  Power curves with exponent >= 2 use the
    local one-term majorant K r (H(r) + offset)^{1/2}; the resulting map
    is no longer concave increasing, so the equation is solved by
    bracketing and bisection instead.
    """
    if curve.form == "power" and curve.exponent >= 2.0:
        psi = _local_psi(curve, variant, K)
        root_n = math.sqrt(n)

        def gap(delta: float) -> float:
            return delta - psi(math.sqrt(delta)) / root_n

        hi = 1.0
        grow = 0
        while gap(hi) < 0.0:
            hi *= 4.0
            grow += 1
            if grow > 200:
                raise FixedPointError("failed to bracket the local fixed point")
        lo = hi
        shrink = 0
        while gap(lo) > 0.0:
            lo /= 16.0
            shrink += 1
            if shrink > 300:
                raise FixedPointError("failed to bracket the local fixed point")
        delta, info = optimize.brentq(
            gap, lo, hi, xtol=1e-300, rtol=tol, maxiter=300, full_output=True
        )
        psi_val = psi(math.sqrt(delta))
        return FixedPointResult(
            delta=float(delta),
            residual=abs(delta - psi_val / root_n),
            iterations=int(info.iterations),
            psi_at_sqrt_delta=psi_val,
        )

    cap = curve.u_max if math.isfinite(curve.u_max) else None

    def psi(r: float) -> float:
        if r <= 0.0:
            return 0.0
        end = min(r, cap) if cap is not None else r
        return entropy_integral(curve, end, variant=variant, K=K)

    return fixed_point(psi, n, tol=tol)


def vc_delta_hat(shatter: int, n: int, K: float = 1.0) -> float:
    """Closed-form rate K^2 log(shatter) / n for a shattering coefficient.

    Matches the generic solver on the constant entropy curve: psi(r) =
    K sqrt(log shatter) r gives delta = K^2 log(shatter) / n exactly.
    """
    if shatter < 1:
        raise ValueError("shattering coefficient must be >= 1")
    if n < 1:
        raise ValueError("n must be a positive integer")
    return K * K * math.log(shatter) / n


def inclusion_to_bracketing(curve: EntropyCurve, density_bound: float = 1.0) -> EntropyCurve:
    """Convert inclusion-scale entropy to bracketing scale: H'(u) = H(u^2 / B).

    A set bracket of inclusion width lambda has L2 bracket width at most
    sqrt(B lambda) when the density is bounded by B, so an L2 radius u
    corresponds to inclusion radius u^2 / B.
    """
    if density_bound < 1.0:
        raise ValueError("density bound must be >= 1")
    b = density_bound
    if curve.form == "zero":
        return curve
    if curve.form == "vc":
        return curve
    if curve.form == "power":
        # A (u^2/B)^-g = A B^g u^-2g
        return EntropyCurve.power(
            coefficient=curve.coefficient * b ** curve.exponent,
            exponent=2.0 * curve.exponent,
        )
    u = np.sqrt(b * curve.u_knots)
    return EntropyCurve.tabulated(u, curve.h_knots)


def smooth_boundary_gamma(dim: int, alpha: float) -> float:
    """Inclusion entropy exponent (d-1)/alpha for alpha-smooth boundaries."""
    if dim < 2 or alpha <= 0.0:
        raise ValueError("need dim >= 2 and alpha > 0")
    return (dim - 1) / alpha


def convex_class_gamma(dim: int) -> float:
    """Inclusion entropy exponent (d-1)/2 for closed convex subsets."""
    if dim < 2:
        raise ValueError("need dim >= 2")
    return (dim - 1) / 2.0


def rate_exponent_fit(pairs) -> tuple[float, float]:
    """Least-squares slope of log(delta) against log(n), with r^2."""
    pairs = [(float(n), float(d)) for n, d in pairs]
    if len(pairs) < 3:
        raise ValueError("need at least 3 (n, delta) pairs")
    if any(n <= 0.0 or d <= 0.0 for n, d in pairs):
        raise ValueError("all pairs must be positive")
    x = np.log([n for n, _ in pairs])
    y = np.log([d for _, d in pairs])
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    ss_res = float(((y - fitted) ** 2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    if ss_tot == 0.0:
        r2 = 1.0 if ss_res < 1e-24 else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return float(slope), r2
