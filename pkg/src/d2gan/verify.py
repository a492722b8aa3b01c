"""Numerical verification of every closed-form identity, with an error
report suitable for JSON output.

Each identity is checked on freshly sampled random instances; the report
records the worst observed error against the identity's tolerance. The
`fc_exponent_shift` argument perturbs the closed-form generator's leading
exponent and exists so the suite can prove it would catch a broken
formula (the canary must fail).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .divergences import DiscreteDistribution, kl_family
from .losses import LossPair, alpha_pair, d2_pair
from .theory import (
    GanTheorySetting,
    balanced_discriminator_root,
    divergence_objective,
    divergence_objective_generic,
    kl_limit_report,
    objective_min_value,
    optimal_discriminators,
    pointwise_bruteforce_opt,
    random_alpha_pair,
    random_setting,
    value_function,
)

TOLERANCES = {
    "pointwise_optimum": 1e-4,  # relative error of the brute-force maximizer
    "value_equals_divergence_objective": 1e-8,  # scaled by 1 + |value|
    "min_value_consistency": 1e-9,
    "generic_sup_matches_closed_form": 1e-6,
    "generic_sup_matches_kl_form": 1e-6,
    "kl_limit": 1e-3,
    "balance_root": 1e-9,
}


@dataclass(frozen=True)
class IdentityResult:
    name: str
    max_error: float
    tolerance: float
    trials: int

    @property
    def passed(self) -> bool:
        return bool(math.isfinite(self.max_error) and self.max_error < self.tolerance)

    def as_dict(self) -> dict:
        return {
            "max_error": float(self.max_error),
            "tolerance": float(self.tolerance),
            "trials": int(self.trials),
            "passed": self.passed,
        }


def check_pointwise_optimum(rng, trials: int) -> IdentityResult:
    """Brute-force maximizer of the per-point objective vs (a/b)^(a1 a2/(a2-a1))."""
    worst = 0.0
    for _ in range(trials):
        a1, a2 = random_alpha_pair(rng)
        ratio = math.exp(rng.uniform(-0.7, 0.7))
        scale = rng.uniform(0.5, 2.0)
        a, b = scale * ratio, scale
        t_star, _ = pointwise_bruteforce_opt(a, b, alpha_pair(a1, a2))
        expected = (a / b) ** (a1 * a2 / (a2 - a1))
        worst = max(worst, abs(t_star - expected) / expected)
    return IdentityResult("pointwise_optimum", worst, TOLERANCES["pointwise_optimum"], trials)


def check_value_identity(rng, trials: int, fc_exponent_shift: float = 0.0) -> IdentityResult:
    """Value at the optimal discriminators vs the closed-form divergence
    objective, on random discrete settings."""
    worst = 0.0
    for _ in range(trials):
        support = int(rng.integers(2, 17))
        s, a1, a2 = random_setting(rng, support=support)
        d1, d2 = optimal_discriminators(s, a1, a2)
        v = value_function(s, d1, d2)
        rhs = divergence_objective(s, a1, a2, exponent_shift=fc_exponent_shift)
        worst = max(worst, abs(v - rhs) / (1.0 + abs(v)))
    return IdentityResult(
        "value_equals_divergence_objective",
        worst,
        TOLERANCES["value_equals_divergence_objective"],
        trials,
    )


def check_min_value(rng, trials: int) -> IdentityResult:
    """Objective at matched distributions vs the closed-form minimum, plus
    the frozen special case (c1=c2=1, a1=0.5, a2=2) -> -4."""
    worst = abs(objective_min_value(1.0, 1.0, 0.5, 2.0) - (-4.0))
    for _ in range(trials):
        support = int(rng.integers(2, 17))
        p = DiscreteDistribution.random(rng, support)
        a1, a2 = random_alpha_pair(rng)
        c1 = float(rng.uniform(0.5, 2.0))
        c2 = float(rng.uniform(0.5, 2.0))
        s = GanTheorySetting(pd=p, pg=p, c1=c1, c2=c2, pair=alpha_pair(a1, a2))
        worst = max(
            worst,
            abs(divergence_objective(s, a1, a2) - objective_min_value(c1, c2, a1, a2)),
        )
    return IdentityResult("min_value_consistency", worst, TOLERANCES["min_value_consistency"], trials)


def _theorem2_setting(rng, pair: LossPair) -> GanTheorySetting:
    # higher floor keeps the numeric sup's maximizer inside the scan grid
    support = int(rng.integers(2, 9))
    return GanTheorySetting(
        pd=DiscreteDistribution.random(rng, support, floor=1e-2),
        pg=DiscreteDistribution.random(rng, support, floor=1e-2),
        c1=float(rng.uniform(0.5, 2.0)),
        c2=float(rng.uniform(0.5, 2.0)),
        pair=pair,
    )


def check_generic_sup_alpha(rng, trials: int) -> IdentityResult:
    """Numeric-sup objective vs the closed form, on alpha pairs."""
    worst = 0.0
    for _ in range(trials):
        a1, a2 = random_alpha_pair(rng)
        s = _theorem2_setting(rng, alpha_pair(a1, a2))
        gen = divergence_objective_generic(s)
        closed = divergence_objective(s, a1, a2)
        worst = max(worst, abs(gen - closed) / (1.0 + abs(closed)))
    return IdentityResult(
        "generic_sup_matches_closed_form", worst, TOLERANCES["generic_sup_matches_closed_form"], trials
    )


def check_generic_sup_kl(rng, trials: int) -> IdentityResult:
    """Numeric-sup objective on the log/linear pair vs
    c1 log c1 - c1 + c1 KL(Pd||Pg) plus the mirrored reverse term."""
    worst = 0.0
    for _ in range(trials):
        s = _theorem2_setting(rng, d2_pair())
        gen = divergence_objective_generic(s)
        expected = (
            s.c1 * math.log(s.c1)
            - s.c1
            + s.c1 * kl_family(s.pd, s.pg, "forward")
            + s.c2 * math.log(s.c2)
            - s.c2
            + s.c2 * kl_family(s.pd, s.pg, "reverse")
        )
        worst = max(worst, abs(gen - expected) / (1.0 + abs(expected)))
    return IdentityResult(
        "generic_sup_matches_kl_form", worst, TOLERANCES["generic_sup_matches_kl_form"], trials
    )


def check_kl_limit(rng, trials: int) -> IdentityResult:
    """Final gap of the alpha-ladder objective to its KL-form limit."""
    worst = 0.0
    for _ in range(trials):
        support = int(rng.integers(2, 9))
        s = GanTheorySetting(
            pd=DiscreteDistribution.random(rng, support, floor=1e-3),
            pg=DiscreteDistribution.random(rng, support, floor=1e-3),
            c1=float(rng.uniform(0.5, 2.0)),
            c2=float(rng.uniform(0.5, 2.0)),
            pair=d2_pair(),
        )
        worst = max(worst, kl_limit_report(s).final_gap)
    return IdentityResult("kl_limit", worst, TOLERANCES["kl_limit"], trials)


def check_balance_root(rng, trials: int) -> IdentityResult:
    """Bisection root properties: exact half at equal alphas, the frozen
    quadratic case, swap symmetry, and strict departure from 1/2."""
    worst = 0.0
    golden = (math.sqrt(5.0) - 1.0) / 2.0
    worst = max(worst, abs(balanced_discriminator_root(1.0, 2.0) - golden))
    for _ in range(trials):
        a = float(rng.uniform(0.2, 5.0))
        if abs(balanced_discriminator_root(a, a) - 0.5) > 1e-12:  # own, stricter bound
            worst = float("inf")
        b = a + float(rng.uniform(2e-6, 3.0))
        r_ab = balanced_discriminator_root(a, b)
        r_ba = balanced_discriminator_root(b, a)
        worst = max(worst, abs(r_ab + r_ba - 1.0))
        if r_ab == 0.5:
            worst = float("inf")
    return IdentityResult("balance_root", worst, TOLERANCES["balance_root"], trials)


def run_verification(seed: int = 0, trials: int = 100, fc_exponent_shift: float = 0.0) -> dict:
    """Run the full identity suite; returns the JSON-ready report."""
    rng = np.random.default_rng(seed)
    results = [
        check_pointwise_optimum(rng, max(trials, 100)),
        check_value_identity(rng, max(trials // 2, 50), fc_exponent_shift=fc_exponent_shift),
        check_min_value(rng, max(trials // 5, 20)),
        check_generic_sup_alpha(rng, max(trials // 12, 4)),
        check_generic_sup_kl(rng, max(trials // 12, 4)),
        check_kl_limit(rng, max(trials // 20, 3)),
        check_balance_root(rng, max(trials, 100)),
    ]
    return {
        "seed": seed,
        "trials": trials,
        "fc_exponent_shift": fc_exponent_shift,
        "identities": {r.name: r.as_dict() for r in results},
        "all_passed": all(r.passed for r in results),
    }


def report_to_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True)
