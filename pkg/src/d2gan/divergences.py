"""f-divergences over finite supports and the convex generators used by
the dual-discriminator reductions.

Everything works on discrete distributions so the closed-form identities
become finite sums that can be checked exactly. Natural logarithms
throughout. Divergences that are genuinely infinite (failed absolute
continuity under a superlinear generator) come back as `inf`, not as an
exception, so metric time series stay well formed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .losses import (
    INFINITY,
    ONE,
    AlphaLimit,
    AlphaParam,
    LossDomainError,
    LossPair,
    alpha_loss,
    _check_alpha,
)
from .opt1d import UnboundedObjectiveError, golden_max, log_grid, scan_golden_max

SUP_GRID = log_grid(1e-6, 1e6, 2001)
SUP_TOL = 1e-10


class SupportMismatchError(ValueError):
    """Distributions must share one indexed support."""


@dataclass(frozen=True)
class DiscreteDistribution:
    """Probability vector over an indexed finite support."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=np.float64)
        object.__setattr__(self, "probs", p)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("probs must be a non-empty 1-D vector")
        if np.any(p < 0.0):
            raise ValueError("probabilities must be non-negative")
        if abs(float(p.sum()) - 1.0) > 1e-12:
            raise ValueError(f"probabilities must sum to 1, got {p.sum()!r}")

    def __len__(self) -> int:
        return self.probs.size

    @classmethod
    def uniform(cls, n: int) -> "DiscreteDistribution":
        return cls(np.full(n, 1.0 / n))

    @classmethod
    def random(cls, rng: np.random.Generator, n: int, floor: float = 1e-4) -> "DiscreteDistribution":
        """Dirichlet(1,..,1) draw with entries floored and renormalized, so
        likelihood ratios stay bounded away from 0 and infinity."""
        p = rng.dirichlet(np.ones(n))
        p = np.maximum(p, floor)
        return cls(p / p.sum())


def _check_pair(p: DiscreteDistribution, q: DiscreteDistribution):
    if len(p) != len(q):
        raise SupportMismatchError(f"support sizes differ: {len(p)} vs {len(q)}")
    return p.probs, q.probs


@dataclass(frozen=True)
class ConvexGenerator:
    """A convex function on the positive reals together with its provenance."""

    f: Callable
    tag: str  # closed-form-alpha | generic-sup | kl | reverse-kl | cpe-induced

    def __call__(self, u):
        return self.f(u)


def _tail_slope(f: Callable) -> float:
    """Asymptotic slope of f at large u; inf when growth is superlinear."""
    s1 = float(f(1e6)) / 1e6
    s2 = float(f(1e9)) / 1e9
    if not np.isfinite(s2) or s2 > s1 + 1e-12:
        return np.inf
    return s2


def f_divergence(p: DiscreteDistribution, q: DiscreteDistribution, gen) -> float:
    """Sum_x q(x) f(p(x)/q(x)).

    Points with p = q = 0 contribute nothing; points with q = 0 < p
    contribute p times the tail slope of f, which is infinite for
    superlinear generators.
    """
    pv, qv = _check_pair(p, q)
    f = gen.f if isinstance(gen, ConvexGenerator) else gen
    total = 0.0
    pos = qv > 0.0
    if np.any(pos):
        u = pv[pos] / qv[pos]
        total += float(np.sum(qv[pos] * np.asarray(f(u), dtype=np.float64)))
    escaping = (~pos) & (pv > 0.0)
    if np.any(escaping):
        slope = _tail_slope(f)
        if not np.isfinite(slope):
            return float("inf")
        total += float(np.sum(pv[escaping]) * slope)
    return total


def _fc_exponents(alpha1: float, alpha2: float) -> "tuple[float, float]":
    a1 = _check_alpha(alpha1)
    a2 = _check_alpha(alpha2)
    if a2 <= a1:
        raise LossDomainError(
            f"closed form requires alpha2 > alpha1, got {alpha1!r} >= {alpha2!r}"
        )
    e1 = (a1 * a2 - a1) / (a2 - a1)
    e2 = (a1 * a2 - a2) / (a2 - a1)
    return e1, e2


def fc_closed_form(u, alpha1: float, alpha2: float, c: float, *, exponent_shift: float = 0.0):
    """Closed-form convex generator of the alpha-pair reduction.

    f_c(u) = -a1/(a1-1) (u - c^e2 u^e1) - a2/(a2-1) c^e2 u^e1 with
    e1 = (a1 a2 - a1)/(a2 - a1) and e2 = (a1 a2 - a2)/(a2 - a1).
    Requires alpha2 > alpha1, both away from the symbolic limits.

    `exponent_shift` perturbs e1; it exists only as a fault-injection hook
    for the verification canary and must stay 0 for correct values.
    """
    e1, e2 = _fc_exponents(alpha1, alpha2)
    e1 += exponent_shift
    a1, a2 = float(alpha1), float(alpha2)
    u = np.asarray(u, dtype=np.float64)
    cu = c**e2 * u**e1
    out = -a1 / (a1 - 1.0) * (u - cu) - a2 / (a2 - 1.0) * cu
    return float(out) if out.ndim == 0 else out


def alpha_closed_generator(alpha1: float, alpha2: float, c: float, *, exponent_shift: float = 0.0) -> ConvexGenerator:
    _fc_exponents(alpha1, alpha2)  # validate eagerly
    return ConvexGenerator(
        f=lambda u: fc_closed_form(u, alpha1, alpha2, c, exponent_shift=exponent_shift),
        tag="closed-form-alpha",
    )


def fc_generic(u: float, pair: LossPair, c: float) -> float:
    """sup_t ( -u l1(t) + (l2(t) - l2.offset)/c ) by log-grid scan plus
    golden-section refinement.

    The l2 offset is the same normalizer the value function uses on
    opposing samples, so this sup agrees exactly with `fc_closed_form`
    on (alpha1, alpha2) pairs and with the log/linear reduction on the
    (neglog, oneminus) pair.

    Raises UnboundedObjectiveError when the scan maximum sits on the grid
    boundary (diverging objective, or maximizer outside the scan range).
    """
    u = float(u)
    c = float(c)
    if u <= 0.0 or c <= 0.0:
        raise LossDomainError("fc_generic needs u > 0 and c > 0")
    l1, l2 = pair.l1, pair.l2

    def objective(t):
        return -u * np.asarray(l1(t)) + (np.asarray(l2(t)) - l2.offset) / c

    _, val = scan_golden_max(objective, SUP_GRID, tol=SUP_TOL)
    return val


def generic_sup_generator(pair: LossPair, c: float) -> ConvexGenerator:
    return ConvexGenerator(f=np.vectorize(lambda u: fc_generic(u, pair, c)), tag="generic-sup")


def arimoto_divergence(p: DiscreteDistribution, q: DiscreteDistribution, alpha: float) -> float:
    """a/(a-1) * ( sum_x (p^a + q^a)^(1/a) - 2^(1/a) ), for a > 0, a != 1.

    The a = 1 value exists only as a limit and is deliberately not
    special-cased; probe it numerically with alpha near 1.
    """
    a = _check_alpha(alpha)
    pv, qv = _check_pair(p, q)
    s = float(np.sum((pv**a + qv**a) ** (1.0 / a)))
    return a / (a - 1.0) * (s - 2.0 ** (1.0 / a))


_CPE_GRID = np.linspace(0.0, 1.0, 1001)


def cpe_induced_f(u: float, alpha: AlphaParam) -> float:
    """-inf_{p in [0,1]} ( l_a(1-p) + u * l_a(p) ) by grid scan plus
    golden-section refinement.

    This is the convex generator induced by the probability-estimation
    form of the alpha loss; subtracting its value at u = 1 from the
    resulting divergence recovers the Arimoto divergence exactly.
    """
    u = float(u)
    if u <= 0.0:
        raise LossDomainError("cpe_induced_f needs u > 0")

    def objective(ps):
        ps = np.asarray(ps, dtype=np.float64)
        scalar = ps.ndim == 0
        ps = np.atleast_1d(ps)
        out = np.full(ps.shape, np.inf)
        inner = (ps > 0.0) & (ps < 1.0)
        if np.any(inner):
            pi = ps[inner]
            out[inner] = np.asarray(alpha_loss(alpha, 1.0 - pi)) + u * np.asarray(
                alpha_loss(alpha, pi)
            )
        # endpoint values are finite for alpha > 1; fill them exactly
        for idx, pv in ((ps == 0.0), 0.0), ((ps == 1.0), 1.0):
            if np.any(idx):
                ends = _cpe_endpoint(u, alpha, pv)
                out[idx] = ends
        return float(out[0]) if scalar else out

    vals = objective(_CPE_GRID)
    masked = np.where(np.isfinite(vals), vals, np.inf)
    i = int(np.argmin(masked))
    lo = _CPE_GRID[max(i - 1, 0)]
    hi = _CPE_GRID[min(i + 1, len(_CPE_GRID) - 1)]
    x, neg = golden_max(lambda pp: -objective(pp), lo, hi, tol=1e-10)
    best = min(float(masked[i]), -neg)
    return -best


def _cpe_endpoint(u: float, alpha: AlphaParam, p: float) -> float:
    """Objective value at p in {0, 1}, using the exact limit of l_a there."""
    if alpha is ONE or (not isinstance(alpha, AlphaLimit) and float(alpha) <= 1.0):
        return np.inf  # -log 0 (or the diverging power) makes either endpoint infinite
    if alpha is INFINITY:
        la0, la1 = 1.0, 0.0
    else:
        a = float(alpha)
        la0, la1 = a / (a - 1.0), 0.0
    if p == 0.0:
        return la1 + u * la0
    return la0 + u * la1


def cpe_generator(alpha: AlphaParam) -> ConvexGenerator:
    return ConvexGenerator(f=np.vectorize(lambda u: cpe_induced_f(u, alpha)), tag="cpe-induced")


def kl_generator() -> ConvexGenerator:
    def f(u):
        u = np.asarray(u, dtype=np.float64)
        return np.where(u > 0.0, u * np.log(np.where(u > 0.0, u, 1.0)), 0.0)

    return ConvexGenerator(f=f, tag="kl")


def reverse_kl_generator() -> ConvexGenerator:
    def f(u):
        u = np.asarray(u, dtype=np.float64)
        return np.where(u > 0.0, -np.log(np.where(u > 0.0, u, 1.0)), np.inf)

    return ConvexGenerator(f=f, tag="reverse-kl")


def kl_divergence(p: DiscreteDistribution, q: DiscreteDistribution) -> float:
    """Sum p log(p/q); infinite when q vanishes where p does not."""
    pv, qv = _check_pair(p, q)
    if np.any((qv == 0.0) & (pv > 0.0)):
        return float("inf")
    mask = pv > 0.0
    return float(np.sum(pv[mask] * np.log(pv[mask] / qv[mask])))


def kl_family(p: DiscreteDistribution, q: DiscreteDistribution, kind: str) -> float:
    if kind == "forward":
        return kl_divergence(p, q)
    if kind == "reverse":
        return kl_divergence(q, p)
    if kind == "symmetric":
        return kl_divergence(p, q) + kl_divergence(q, p)
    raise ValueError(f"unknown KL kind {kind!r}")
