"""Concentration thresholds for empirical and Rademacher suprema.

Massart's form of Talagrand's inequality with explicit numerical
constants: for Z either sup|P_n - P| or the Rademacher norm over a class
bounded by b, with sigma^2 = n sup Var,

    P(Z >= (1+gamma) EZ + [sigma sqrt(2*4*x) + (3.5 + 32/gamma) b x]/n) <= e^-x
    P(Z <= (1-gamma) EZ - [sigma sqrt(2*5.4*x) + (3.5 + 43.2/gamma) b x]/n) <= e^-x

The second bracket is implemented with a plus sign between its terms;
some printed statements carry a minus there, but the rearranged form the
localization constants rely on corresponds to the plus sign, which is
also the conservative direction.

The phi-ladder evaluates the chain of comparison functions that sits
between the oracle deviation sup and the data-only localization step:
phi1 <= phi2 <= phi3 holds with probability at least 1 - 2 exp(-n eps/2),
and phi5/phi6 extend the chain to expected empirical deviations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

UPPER_K = 4.0
UPPER_K_GAMMA = (3.5, 32.0)
LOWER_K = 5.4
LOWER_K_GAMMA = (3.5, 43.2)


@dataclass(frozen=True)
class MassartParams:
    """Inputs of one threshold evaluation.

    ez is the expectation of the supremum, sigma2 = n * sup Var(f(X_1)),
    b the sup-norm envelope, x the tail parameter (the event probability
    is at most e^-x), gamma the slack parameter in (0, 1).
    """

    ez: float
    sigma2: float
    b: float
    n: int
    x: float
    gamma: float

    def __post_init__(self):
        if self.ez < 0.0:
            raise ValueError("ez must be nonnegative")
        if self.sigma2 < 0.0:
            raise ValueError("sigma2 must be nonnegative")
        if self.b <= 0.0:
            raise ValueError("envelope b must be positive")
        if self.n < 1:
            raise ValueError("n must be a positive integer")
        if self.x < 0.0:
            raise ValueError("tail parameter x must be nonnegative")
        if not (0.0 < self.gamma < 1.0):
            raise ValueError("gamma must lie in (0, 1)")


def massart_upper_threshold(p: MassartParams) -> float:
    """Level whose upward crossing has probability at most e^-x."""
    k_const, k_over = UPPER_K_GAMMA
    bracket = math.sqrt(p.sigma2) * math.sqrt(2.0 * UPPER_K * p.x)
    bracket += (k_const + k_over / p.gamma) * p.b * p.x
    return (1.0 + p.gamma) * p.ez + bracket / p.n


def massart_lower_threshold(p: MassartParams) -> float:
    """Level whose downward crossing has probability at most e^-x."""
    k_const, k_over = LOWER_K_GAMMA
    bracket = math.sqrt(p.sigma2) * math.sqrt(2.0 * LOWER_K * p.x)
    bracket += (k_const + k_over / p.gamma) * p.b * p.x
    return (1.0 - p.gamma) * p.ez - bracket / p.n


@dataclass(frozen=True)
class LadderConstants:
    """Coefficients of phi5 and phi6.

    Derived by chaining the two thresholds above at parameter
    gamma_double_prime: first bound the Rademacher norm by its
    expectation, then symmetrize (E||R_n|| <= 2 E sup|P_n - P| + sqrt(r eps),
    the last term folding the r/sqrt(n) remainder, valid for eps >= 1/n),
    then pass between the realized and expected empirical deviation.
    c1_prime > 1 always holds, as the downstream comparison needs.
    """

    c1_prime: float
    c2_prime: float
    c3_prime: float
    c1_tilde: float
    c2_tilde: float
    c3_tilde: float


def ladder_constants(
    gamma: float, gamma_prime: float, gamma_double_prime: float = 0.5
) -> LadderConstants:
    for name, g in (("gamma", gamma), ("gamma_prime", gamma_prime),
                    ("gamma_double_prime", gamma_double_prime)):
        if not (0.0 < g < 1.0):
            raise ValueError(f"{name} must lie in (0, 1)")
    a = 2.0 * (1.0 + gamma) / (1.0 - gamma_prime)
    g2 = gamma_double_prime
    a2 = 2.0 * (1.0 + g2) / (1.0 - g2)
    root = math.sqrt(LOWER_K)
    c1_prime = a * a2
    c2_prime = a * (a2 * root + (1.0 + g2) + 2.0 + root) + 2.0
    c3_prime = a * (
        a2 * (1.75 + 21.6 / g2) + (1.75 + 16.0 / g2) + (1.75 + 21.6 / gamma_prime)
    ) + (1.75 + 16.0 / gamma)
    c1_tilde = c1_prime * (1.0 + g2)
    c2_tilde = c2_prime + 2.0 * c1_prime
    c3_tilde = c3_prime + c1_prime * (1.75 + 16.0 / g2)
    return LadderConstants(c1_prime, c2_prime, c3_prime,
                           c1_tilde, c2_tilde, c3_tilde)


@dataclass(frozen=True)
class LadderInputs:
    """Process statistics feeding the phi-ladder at one radius.

    sup_dev and mean_sup_dev refer to sup|P_n - P| over the oracle ball
    {f: Pf <= r} (realized value and Monte Carlo expectation); these are
    simulation-only since they need true means.  rademacher_norm is a
    per-draw Rademacher supremum over the ball the caller chose;
    mean_rademacher_norm is the sign-average over the empirical 2r ball.
    """

    sup_dev: float | None = None
    mean_sup_dev: float | None = None
    rademacher_norm: float | None = None
    mean_rademacher_norm: float | None = None


@dataclass(frozen=True)
class PhiLadder:
    phi1: float | None
    phi2: float | None
    phi3: float | None
    phi4: float | None
    phi5: float | None
    phi6: float | None
    constants: LadderConstants

    def as_dict(self) -> dict:
        return {
            "phi1": self.phi1, "phi2": self.phi2, "phi3": self.phi3,
            "phi4": self.phi4, "phi5": self.phi5, "phi6": self.phi6,
        }


def phi_ladder(
    r: float,
    inputs: LadderInputs,
    eps: float,
    gamma: float = 0.5,
    gamma_prime: float = 0.5,
    gamma_double_prime: float = 0.5,
    require: tuple[str, ...] = (),
) -> PhiLadder:
    """Evaluate the comparison functions phi1..phi6 at radius r.

    Each phi whose inputs are present is computed; names listed in
    `require` must be computable or a ValueError is raised.
    """
    if not (0.0 <= r <= 1.0):
        raise ValueError("radius must lie in [0, 1]")
    if eps < 0.0:
        raise ValueError("eps must be nonnegative")
    a = 2.0 * (1.0 + gamma) / (1.0 - gamma_prime)
    g2 = gamma_double_prime
    sqrt_re = math.sqrt(r * eps)
    outer = 2.0 * sqrt_re + (1.75 + 16.0 / gamma) * eps
    inner_eps = (1.75 + 21.6 / gamma_prime) * eps
    consts = ladder_constants(gamma, gamma_prime, g2)

    phi1 = inputs.sup_dev
    phi2 = None
    if inputs.mean_sup_dev is not None:
        phi2 = (1.0 + gamma) * inputs.mean_sup_dev + outer
    phi3 = None
    if inputs.rademacher_norm is not None:
        phi3 = a * (inputs.rademacher_norm + math.sqrt(LOWER_K * r * eps) + inner_eps) + outer
    phi4 = None
    if inputs.mean_rademacher_norm is not None:
        phi4 = a * (
            (1.0 + 1.0 / g2) * inputs.mean_rademacher_norm
            + 2.0 * sqrt_re
            + (1.75 + 16.0 / g2) * eps
            + math.sqrt(LOWER_K * r * eps)
            + inner_eps
        ) + outer
    phi5 = None
    if inputs.sup_dev is not None:
        phi5 = consts.c1_prime * inputs.sup_dev + consts.c2_prime * sqrt_re + consts.c3_prime * eps
    phi6 = None
    if inputs.mean_sup_dev is not None:
        phi6 = consts.c1_tilde * inputs.mean_sup_dev + consts.c2_tilde * sqrt_re + consts.c3_tilde * eps

    ladder = PhiLadder(phi1, phi2, phi3, phi4, phi5, phi6, consts)
    for name in require:
        if getattr(ladder, name) is None:
            raise ValueError(f"{name} requested but its input is missing")
    return ladder
