"""Closed-form sufficient flatness conditions on the singular values of df.

Each checker returns a ``ConditionReport`` carrying a signed margin in the
natural units of its inequality: positive inside the good region, negative
outside.  Margins of different conditions are deliberately not normalized
against each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import star_omega

CONDITION_NAMES = ("TheoremA", "JostXin", "FC_HJW", "Hemisphere24", "OptimalB")


@dataclass(frozen=True)
class ConditionReport:
    """Outcome of one condition check.

    ``margin`` is the signed distance to the failure boundary; ``pass_``
    agrees with its sign (inclusive inequalities pass at margin exactly 0).
    """

    condition_name: str
    pass_: bool
    margin: float
    details: dict = field(default_factory=dict)

    def to_json(self):
        return {
            "condition": self.condition_name,
            "pass": bool(self.pass_),
            "margin": float(self.margin),
            "details": {k: float(v) for k, v in self.details.items()},
        }


def max_pairwise_product(lambdas):
    """max_{i != j} |lambda_i lambda_j| (0 when fewer than two values)."""
    lam = np.sort(np.abs(np.asarray(lambdas, dtype=float)))
    if lam.size < 2:
        return 0.0
    return float(lam[-1] * lam[-2])


def check_theorem_a(lambdas, delta, k_min) -> ConditionReport:
    """Product condition max |l_i l_j| <= 1 - delta plus projection bound.

    Passes when every pairwise product of singular values stays below
    1 - delta and the projection factor is at least k_min; both inequalities
    are inclusive, so the margin min(1 - delta - max product, omega - k_min)
    may be exactly zero on a passing boundary case.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if k_min <= 0.0:
        raise ValueError("k_min must be positive")
    prod = max_pairwise_product(lambdas)
    omega = float(star_omega(lambdas))
    margin = min(1.0 - delta - prod, omega - k_min)
    return ConditionReport(
        condition_name="TheoremA",
        pass_=margin >= 0.0,
        margin=margin,
        details={"max_product": prod, "star_omega": omega,
                 "delta": float(delta), "k_min": float(k_min)},
    )


def jost_xin_delta(lambdas) -> float:
    """The gradient quantity sqrt(prod(1 + l_i^2)) = 1 / star_omega."""
    lam = np.asarray(lambdas, dtype=float)
    return float(np.sqrt(np.prod(1.0 + lam * lam)))


def check_jost_xin(lambdas) -> ConditionReport:
    """Strict bound sqrt(prod(1 + l_i^2)) < 2."""
    value = jost_xin_delta(lambdas)
    margin = 2.0 - value
    return ConditionReport(
        condition_name="JostXin",
        pass_=margin > 0.0,
        margin=margin,
        details={"delta_f": value},
    )


def fc_hjw_threshold(n, m) -> float:
    """Projection-factor threshold cos^p(pi / (2 sqrt(2) p)), p = min(n, m)."""
    if n < 1 or m < 1:
        raise ValueError("n and m must be positive")
    p = min(int(n), int(m))
    return math.cos(math.pi / (2.0 * math.sqrt(2.0) * p)) ** p


def check_fc_hjw(lambdas, n, m) -> ConditionReport:
    """Strict bound star_omega > cos^p(pi/(2 sqrt(2) p))."""
    omega = float(star_omega(lambdas))
    threshold = fc_hjw_threshold(n, m)
    margin = omega - threshold
    return ConditionReport(
        condition_name="FC_HJW",
        pass_=margin > 0.0,
        margin=margin,
        details={"star_omega": omega, "threshold": threshold},
    )


@dataclass(frozen=True)
class ImplicationWitness:
    """Record of one sample of the implication prod(1+l^2) < 4 => max|l_i l_j| < 1."""

    hypothesis: bool
    conclusion: bool
    product_of_sums: float
    max_product: float

    @property
    def is_counterexample(self):
        return self.hypothesis and not self.conclusion


def implication_jx_to_a(lambdas) -> ImplicationWitness:
    """Test one lambda vector against the implication above.

    No counterexample can exist: (1+a^2)(1+b^2) >= (1+ab)^2 termwise.  The
    witness form makes the random-sweep property test explicit.
    """
    lam = np.abs(np.asarray(lambdas, dtype=float))
    pos = float(np.prod(1.0 + lam * lam))
    prod = max_pairwise_product(lam)
    return ImplicationWitness(
        hypothesis=pos < 4.0,
        conclusion=prod < 1.0,
        product_of_sums=pos,
        max_product=prod,
    )


def grassmannian_g24(lambda1, lambda2):
    """Height coordinates of the tangent 2-plane on the two-sphere factors.

    For n = m = 2 the Grassmannian of 2-planes in R^4 is a product of two
    round spheres and the tangent plane of the graph has heights

        (w1, w2) = ((1 - l1 l2) / D, (1 + l1 l2) / D),
        D = sqrt(2) sqrt((1+l1^2)(1+l2^2)).

    Signed inputs are allowed: the sign of the product l1 l2 is geometric
    (it equals the sign of det(jac) for the originating 2x2 matrix).  Both
    heights are positive exactly when |l1 l2| < 1.
    """
    l1 = float(lambda1)
    l2 = float(lambda2)
    d = math.sqrt(2.0) * math.sqrt((1.0 + l1 * l1) * (1.0 + l2 * l2))
    return (1.0 - l1 * l2) / d, (1.0 + l1 * l2) / d


def check_hemisphere24(lambda1, lambda2) -> ConditionReport:
    """Both sphere heights positive, i.e. |l1 l2| < 1 with the signed product."""
    w1, w2 = grassmannian_g24(lambda1, lambda2)
    margin = min(w1, w2)
    return ConditionReport(
        condition_name="Hemisphere24",
        pass_=margin > 0.0,
        margin=margin,
        details={"omega1": w1, "omega2": w2,
                 "signed_product": float(lambda1) * float(lambda2)},
    )
