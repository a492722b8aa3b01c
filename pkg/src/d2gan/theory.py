"""Closed-form optima of the dual-discriminator game on finite supports,
with brute-force counterparts for every identity.

For a loss pair (l1, l2), weights c1, c2 > 0 and distributions Pd, Pg,
the game value is

    V = c1 E_Pd[-l1(D1)] + E_Pg[l2(D1) - k2]
      + E_Pd[l2(D2) - k2] + c2 E_Pg[-l1(D2)],

where k2 = l2.offset (a/(a-1) for an alpha loss, 1 for 1-t). With that
normalization the sup over positive discriminator fields equals
c1 D_{f_c1}(Pd||Pg) + c2 D_{f_c2}(Pg||Pd) exactly, with f_c the convex
generator from `fc_generic` (closed form available for alpha pairs).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .divergences import (
    SUP_GRID,
    SUP_TOL,
    DiscreteDistribution,
    alpha_closed_generator,
    f_divergence,
    kl_divergence,
)
from .losses import LossDomainError, LossPair, _check_alpha, alpha_pair
from .opt1d import scan_golden_max


@dataclass(frozen=True)
class GanTheorySetting:
    """A discrete two-distribution game instance."""

    pd: DiscreteDistribution
    pg: DiscreteDistribution
    c1: float
    c2: float
    pair: LossPair

    def __post_init__(self):
        if len(self.pd) != len(self.pg):
            raise ValueError("Pd and Pg must share one support")
        if self.c1 <= 0.0 or self.c2 <= 0.0:
            raise ValueError("c1 and c2 must be positive")


@dataclass(frozen=True)
class DiscriminatorField:
    """One positive value per support point; inf marks a division-by-zero
    point (vanishing opposing density)."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", v)
        if np.any(v <= 0.0) or np.any(np.isnan(v)):
            raise ValueError("discriminator values must be positive")


def _ratio_exponent(alpha1: float, alpha2: float) -> float:
    a1 = _check_alpha(alpha1)
    a2 = _check_alpha(alpha2)
    if a2 <= a1:
        raise LossDomainError(
            f"optimal discriminators need alpha2 > alpha1, got {alpha1!r} >= {alpha2!r}"
        )
    return a1 * a2 / (a2 - a1)


def optimal_discriminators(
    s: GanTheorySetting, alpha1: float, alpha2: float
) -> "tuple[DiscriminatorField, DiscriminatorField]":
    """Pointwise maximizers of the game value for a fixed generator:
    D1*(x) = (c1 Pd/Pg)^k and D2*(x) = (c2 Pg/Pd)^k, k = a1 a2/(a2 - a1)."""
    k = _ratio_exponent(alpha1, alpha2)
    with np.errstate(divide="ignore"):
        r1 = np.where(s.pg.probs > 0.0, s.c1 * s.pd.probs / s.pg.probs, np.inf)
        r2 = np.where(s.pd.probs > 0.0, s.c2 * s.pg.probs / s.pd.probs, np.inf)
    return DiscriminatorField(r1**k), DiscriminatorField(r2**k)


def pointwise_bruteforce_opt(a: float, b: float, pair: LossPair) -> "tuple[float, float]":
    """Maximize h(t) = a (-l1(t)) + b (l2(t) - l2.offset) over t > 0 by
    log-grid scan plus golden-section refinement; returns (t*, h(t*)).

    Raises UnboundedObjectiveError when the maximum sits on the scan
    boundary (e.g. reversed alpha ordering, where no interior maximum
    exists).
    """
    if a <= 0.0 or b <= 0.0:
        raise ValueError("both weights must be positive")
    l1, l2 = pair.l1, pair.l2

    def h(t):
        return a * -np.asarray(l1(t)) + b * (np.asarray(l2(t)) - l2.offset)

    return scan_golden_max(h, SUP_GRID, tol=SUP_TOL)


def value_function(s: GanTheorySetting, d1: DiscriminatorField, d2: DiscriminatorField) -> float:
    """Game value for explicit discriminator fields, as a finite sum."""
    l1, l2 = s.pair.l1, s.pair.l2
    v1, v2 = d1.values, d2.values
    pd, pg = s.pd.probs, s.pg.probs
    total = 0.0
    for weight, dens, f in (
        (s.c1, pd, lambda t: -np.asarray(l1(t))),
        (1.0, pg, lambda t: np.asarray(l2(t)) - l2.offset),
    ):
        mask = dens > 0.0
        total += weight * float(np.sum(dens[mask] * f(v1[mask])))
    for weight, dens, f in (
        (1.0, pd, lambda t: np.asarray(l2(t)) - l2.offset),
        (s.c2, pg, lambda t: -np.asarray(l1(t))),
    ):
        mask = dens > 0.0
        total += weight * float(np.sum(dens[mask] * f(v2[mask])))
    return total


def sup_value_bruteforce(s: GanTheorySetting) -> float:
    """Supremum of the game value over positive fields, computed pointwise
    by brute force; independent route to the divergence objective."""
    total = 0.0
    for x in range(len(s.pd)):
        pd, pg = s.pd.probs[x], s.pg.probs[x]
        if pd > 0.0 and pg > 0.0:
            total += pointwise_bruteforce_opt(s.c1 * pd, pg, s.pair)[1]
            total += pointwise_bruteforce_opt(s.c2 * pg, pd, s.pair)[1]
        else:
            raise ValueError("brute-force sup needs strictly positive densities")
    return total


def divergence_objective(
    s: GanTheorySetting, alpha1: float, alpha2: float, *, exponent_shift: float = 0.0
) -> float:
    """c1 D_{f_c1}(Pd||Pg) + c2 D_{f_c2}(Pg||Pd) with the closed-form
    alpha-pair generator; equals the value at the optimal discriminators."""
    g1 = alpha_closed_generator(alpha1, alpha2, s.c1, exponent_shift=exponent_shift)
    g2 = alpha_closed_generator(alpha1, alpha2, s.c2, exponent_shift=exponent_shift)
    return s.c1 * f_divergence(s.pd, s.pg, g1) + s.c2 * f_divergence(s.pg, s.pd, g2)


def objective_min_value(c1: float, c2: float, alpha1: float, alpha2: float) -> float:
    """Minimum of the divergence objective over generators, attained when
    the generated distribution matches the data distribution:

        -a1/(a1-1) (c1 + c2) + (a1/(a1-1) - a2/(a2-1)) (c1^e1 + c2^e1),

    e1 = (a1 a2 - a1)/(a2 - a1). Requires alpha2 > alpha1, both numeric.
    """
    a1 = _check_alpha(alpha1)
    a2 = _check_alpha(alpha2)
    if a2 <= a1:
        raise LossDomainError("objective_min_value needs alpha2 > alpha1")
    if c1 <= 0.0 or c2 <= 0.0:
        raise ValueError("c1 and c2 must be positive")
    e1 = (a1 * a2 - a1) / (a2 - a1)
    r1 = a1 / (a1 - 1.0)
    r2 = a2 / (a2 - 1.0)
    return -r1 * (c1 + c2) + (r1 - r2) * (c1**e1 + c2**e1)


def divergence_objective_generic(s: GanTheorySetting) -> float:
    """Generic-loss divergence objective via the numeric sup.

    Forward term: c1 sum_x Pg f_c1(Pd/Pg). The reverse term uses the
    swapped sup f'_c2(u) = u f_c2(1/u) = sup_t( u (l2(t)-k2)/c2 - l1(t) ),
    so it is also accumulated against Pg-weights:
    c2 sum_x Pg f'_c2(Pd/Pg) = c2 D_{f_c2}(Pg||Pd).
    """
    l1, l2 = s.pair.l1, s.pair.l2
    pd, pg = s.pd.probs, s.pg.probs
    if np.any(pd <= 0.0) or np.any(pg <= 0.0):
        raise ValueError("generic objective needs strictly positive densities")
    total = 0.0
    for x in range(len(s.pd)):
        u = pd[x] / pg[x]

        def fwd(t, u=u):
            return -u * np.asarray(l1(t)) + (np.asarray(l2(t)) - l2.offset) / s.c1

        def rev(t, u=u):
            return u * (np.asarray(l2(t)) - l2.offset) / s.c2 - np.asarray(l1(t))

        total += s.c1 * pg[x] * scan_golden_max(fwd, SUP_GRID, tol=SUP_TOL)[1]
        total += s.c2 * pg[x] * scan_golden_max(rev, SUP_GRID, tol=SUP_TOL)[1]
    return total


KL_LIMIT_SCHEDULE = ((1.1, 10.0), (1.01, 100.0), (1.001, 1e4), (1.0 + 1e-5, 1e6))


@dataclass(frozen=True)
class KlLimitReport:
    """Convergence record of the alpha-pair objective toward its log-loss
    (forward + reverse KL) limit."""

    schedule: "tuple[tuple[float, float], ...]"
    forward_gaps: "tuple[float, ...]"
    reverse_gaps: "tuple[float, ...]"
    forward_target: float
    reverse_target: float

    @property
    def final_gap(self) -> float:
        return max(self.forward_gaps[-1], self.reverse_gaps[-1])

    @property
    def monotone(self) -> bool:
        fds = self.forward_gaps
        rds = self.reverse_gaps
        return all(a >= b for a, b in zip(fds, fds[1:])) and all(
            a >= b for a, b in zip(rds, rds[1:])
        )


def kl_limit_report(s: GanTheorySetting, schedule=KL_LIMIT_SCHEDULE) -> KlLimitReport:
    """Evaluate the closed-form objective terms along an (alpha1, alpha2)
    ladder tending to (1, inf) and report the gap to the KL targets
    c1 log c1 - c1 + c1 KL(Pd||Pg) and its mirror."""
    fwd_target = s.c1 * np.log(s.c1) - s.c1 + s.c1 * kl_divergence(s.pd, s.pg)
    rev_target = s.c2 * np.log(s.c2) - s.c2 + s.c2 * kl_divergence(s.pg, s.pd)
    fwd_gaps = []
    rev_gaps = []
    for a1, a2 in schedule:
        g1 = alpha_closed_generator(a1, a2, s.c1)
        g2 = alpha_closed_generator(a1, a2, s.c2)
        fwd_gaps.append(abs(s.c1 * f_divergence(s.pd, s.pg, g1) - fwd_target))
        rev_gaps.append(abs(s.c2 * f_divergence(s.pg, s.pd, g2) - rev_target))
    return KlLimitReport(
        schedule=tuple(schedule),
        forward_gaps=tuple(fwd_gaps),
        reverse_gaps=tuple(rev_gaps),
        forward_target=float(fwd_target),
        reverse_target=float(rev_target),
    )


def balanced_discriminator_root(alpha1: float, alpha2: float) -> float:
    """Unique root in (0, 1) of D^a2 = (1 - D)^a1, by bisection to 1e-12.

    This is the output a single probability-valued discriminator settles
    on at matched distributions when real and fake terms use different
    alpha losses; it equals 1/2 only when alpha1 = alpha2, which is why a
    single discriminator cannot carry two distinct tuning parameters.
    """
    a1, a2 = float(alpha1), float(alpha2)
    if a1 <= 0.0 or a2 <= 0.0:
        raise LossDomainError("alphas must be positive")
    from .opt1d import bisect_root

    return bisect_root(lambda d: d**a2 - (1.0 - d) ** a1, 0.0, 1.0, tol=1e-12)


def random_alpha_pair(rng: np.random.Generator) -> "tuple[float, float]":
    """A well-conditioned (alpha1 < alpha2) draw.

    Two regimes (alpha2 above or below 1), both keeping the coefficients
    a/(a-1) bounded and the ratio exponent a1 a2/(a2 - a1) small enough
    that optimal discriminators stay far inside the loss clamp range for
    floored random distributions.
    """
    if rng.random() < 0.5:
        a1 = rng.uniform(0.25, 0.6)
        a2 = rng.uniform(1.15, 1.8)
    else:
        a1 = rng.uniform(0.2, 0.45)
        a2 = rng.uniform(0.7, 0.9)
    return float(a1), float(a2)


def random_setting(
    rng: np.random.Generator,
    support: int = 8,
    floor: float = 1e-4,
    alphas: "tuple[float, float] | None" = None,
    c_range: "tuple[float, float]" = (0.5, 2.0),
) -> "tuple[GanTheorySetting, float, float]":
    """Random game instance; returns (setting, alpha1, alpha2)."""
    if alphas is None:
        a1, a2 = random_alpha_pair(rng)
    else:
        a1, a2 = alphas
    return (
        GanTheorySetting(
            pd=DiscreteDistribution.random(rng, support, floor=floor),
            pg=DiscreteDistribution.random(rng, support, floor=floor),
            c1=float(rng.uniform(*c_range)),
            c2=float(rng.uniform(*c_range)),
            pair=alpha_pair(a1, a2),
        ),
        a1,
        a2,
    )
