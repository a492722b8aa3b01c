"""Tunable alpha-loss family on positive reals, plus generic loss pairs.

The alpha loss l_a(t) = a/(a-1) * (1 - t^((a-1)/a)) interpolates between
-log t (a -> 1) and 1 - t (a -> infinity).  The two limits are exact,
symbolic cases (`ONE`, `INFINITY`), never float approximations; numeric
alpha near 1 deliberately goes through the general formula so that limit
convergence can be measured.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

# Inputs are clamped to this range before powering so that exploding
# discriminator outputs cannot overflow the loss evaluation.
T_MIN = 1e-12
T_MAX = 1e12


class AlphaLimit(enum.Enum):
    """Exact symbolic limits of the alpha family."""

    ONE = "one"
    INFINITY = "infinity"


ONE = AlphaLimit.ONE
INFINITY = AlphaLimit.INFINITY

AlphaParam = Union[float, AlphaLimit]


class LossDomainError(ValueError):
    """Raised for non-positive loss inputs or invalid alpha."""


def _clamped(t) -> np.ndarray:
    t = np.asarray(t, dtype=np.float64)
    if np.any(t <= 0.0) or not np.all(np.isfinite(t)):
        raise LossDomainError("loss input must be positive and finite")
    return np.clip(t, T_MIN, T_MAX)


def _maybe_scalar(x: np.ndarray, like) -> "np.ndarray | float":
    if np.isscalar(like) or getattr(like, "ndim", 1) == 0:
        return float(x)
    return x


def _check_alpha(alpha: float) -> float:
    a = float(alpha)
    if not math.isfinite(a) or a <= 0.0:
        raise LossDomainError(f"alpha must be positive, got {alpha!r}")
    if a == 1.0:
        raise LossDomainError("alpha == 1.0 must be spelled as the symbolic limit ONE")
    return a


def alpha_loss(alpha: AlphaParam, t) -> "np.ndarray | float":
    """Evaluate the alpha loss at t > 0.

    `ONE` gives -log t, `INFINITY` gives 1 - t; any other positive alpha
    uses the general power form (via expm1 for stability near alpha = 1).
    """
    tc = _clamped(t)
    if alpha is AlphaLimit.ONE:
        out = -np.log(tc)
    elif alpha is AlphaLimit.INFINITY:
        out = 1.0 - tc
    else:
        a = _check_alpha(alpha)
        out = -a / (a - 1.0) * np.expm1((a - 1.0) / a * np.log(tc))
    return _maybe_scalar(out, t)


def alpha_loss_deriv(alpha: AlphaParam, t) -> "np.ndarray | float":
    """Derivative of `alpha_loss` in t: -t^(-1/alpha); -1/t and -1 at the limits."""
    tc = _clamped(t)
    if alpha is AlphaLimit.ONE:
        out = -1.0 / tc
    elif alpha is AlphaLimit.INFINITY:
        out = -np.ones_like(tc)
    else:
        a = _check_alpha(alpha)
        out = -(tc ** (-1.0 / a))
    return _maybe_scalar(out, t)


def alpha_sup_offset(alpha: AlphaParam) -> float:
    """Constant term of the alpha loss: a/(a-1), or its limits 0 and 1.

    Subtracting it leaves the pure power part -a/(a-1)*t^((a-1)/a); the
    dual-discriminator value function scores opposing samples with
    l2(D) - offset, which is what makes the closed-form divergence
    reductions exact identities instead of equalities up to a constant.
    """
    if alpha is AlphaLimit.ONE:
        return 0.0
    if alpha is AlphaLimit.INFINITY:
        return 1.0
    a = _check_alpha(alpha)
    return a / (a - 1.0)


@dataclass(frozen=True)
class LossFn:
    """A scalar loss on positive reals with its derivative.

    `offset` is the additive normalizer used when this loss scores the
    opposing distribution's samples in a dual-discriminator objective
    (see `alpha_sup_offset`).
    """

    kind: str  # "alpha" | "neglog" | "oneminus" | "custom"
    alpha: "float | None"
    offset: float
    _eval: Callable = field(repr=False)
    _deriv: Callable = field(repr=False)

    def __call__(self, t):
        return self._eval(t)

    def deriv(self, t):
        return self._deriv(t)

    def centered(self, t):
        """Loss minus its offset constant."""
        return self._eval(t) - self.offset

    def descriptor(self) -> dict:
        if self.kind == "alpha":
            return {"kind": "alpha", "alpha": self.alpha}
        if self.kind in ("neglog", "oneminus"):
            return {"kind": self.kind}
        raise ValueError("custom losses have no JSON descriptor")


def neglog_loss() -> LossFn:
    return LossFn(
        kind="neglog",
        alpha=None,
        offset=0.0,
        _eval=lambda t: alpha_loss(ONE, t),
        _deriv=lambda t: alpha_loss_deriv(ONE, t),
    )


def oneminus_loss() -> LossFn:
    return LossFn(
        kind="oneminus",
        alpha=None,
        offset=1.0,
        _eval=lambda t: alpha_loss(INFINITY, t),
        _deriv=lambda t: alpha_loss_deriv(INFINITY, t),
    )


def alpha_loss_fn(alpha: AlphaParam) -> LossFn:
    """LossFn for a given alpha; the symbolic limits canonicalize to the
    named neglog / oneminus kinds."""
    if alpha is AlphaLimit.ONE:
        return neglog_loss()
    if alpha is AlphaLimit.INFINITY:
        return oneminus_loss()
    a = _check_alpha(alpha)
    return LossFn(
        kind="alpha",
        alpha=a,
        offset=a / (a - 1.0),
        _eval=lambda t: alpha_loss(a, t),
        _deriv=lambda t: alpha_loss_deriv(a, t),
    )


def custom_loss(fn: Callable, deriv: Callable, offset: float = 0.0) -> LossFn:
    """Wrap user-supplied eval/deriv callables; the caller owns the math."""
    return LossFn(kind="custom", alpha=None, offset=float(offset), _eval=fn, _deriv=deriv)


def loss_from_descriptor(desc) -> LossFn:
    """Build a LossFn from a JSON-style descriptor.

    Accepted forms: {"kind": "alpha", "alpha": x}, {"kind": "neglog"},
    {"kind": "oneminus"}; a bare float is shorthand for the alpha kind.
    """
    if isinstance(desc, LossFn):
        return desc
    if isinstance(desc, (int, float)) and not isinstance(desc, bool):
        return alpha_loss_fn(float(desc))
    if isinstance(desc, AlphaLimit):
        return alpha_loss_fn(desc)
    if not isinstance(desc, dict) or "kind" not in desc:
        raise LossDomainError(f"malformed loss descriptor: {desc!r}")
    kind = desc["kind"]
    if kind == "alpha":
        if "alpha" not in desc:
            raise LossDomainError("alpha descriptor requires an 'alpha' value")
        return alpha_loss_fn(float(desc["alpha"]))
    if kind == "neglog":
        return neglog_loss()
    if kind == "oneminus":
        return oneminus_loss()
    raise LossDomainError(f"unknown loss kind {kind!r}")


@dataclass(frozen=True)
class LossPair:
    """The two losses of a dual-discriminator objective.

    l1 scores a discriminator on its own side's samples, l2 on the
    opposing side's.
    """

    l1: LossFn
    l2: LossFn

    def alphas(self) -> "tuple[float, float]":
        """The (alpha1, alpha2) parameters when both losses are alpha-kind.

        The closed-form reductions additionally require alpha2 > alpha1;
        violated orderings are reported where the closed form is used.
        """
        if self.l1.kind != "alpha" or self.l2.kind != "alpha":
            raise LossDomainError("closed forms need an (alpha, alpha) pair")
        return float(self.l1.alpha), float(self.l2.alpha)

    def descriptor(self) -> dict:
        return {"l1": self.l1.descriptor(), "l2": self.l2.descriptor()}


def make_loss_pair(spec1, spec2=None) -> LossPair:
    """Build a LossPair from two descriptors, or one {"l1":…, "l2":…} dict.

    (alpha1, alpha2) descriptors give the tunable dual-discriminator
    setting; ("neglog", "oneminus") gives the classic log / linear pair.
    """
    if spec2 is None:
        if not isinstance(spec1, dict) or "l1" not in spec1 or "l2" not in spec1:
            raise LossDomainError("pair descriptor must contain 'l1' and 'l2'")
        spec1, spec2 = spec1["l1"], spec1["l2"]
    return LossPair(l1=loss_from_descriptor(spec1), l2=loss_from_descriptor(spec2))


def alpha_pair(alpha1: float, alpha2: float) -> LossPair:
    return make_loss_pair({"kind": "alpha", "alpha": alpha1}, {"kind": "alpha", "alpha": alpha2})


def d2_pair() -> LossPair:
    """The log / linear pair recovered in the alpha1 -> 1, alpha2 -> inf limit."""
    return make_loss_pair({"kind": "neglog"}, {"kind": "oneminus"})


def loss_value_and_input_grad(loss: LossFn, raw) -> "tuple[np.ndarray, np.ndarray]":
    """Loss value and d(loss)/d(raw) through the [T_MIN, T_MAX] clamp.

    The clamp's gradient is zero where it is active, so saturated
    discriminator outputs stop producing updates instead of exploding.
    Non-finite inputs pass through as NaN values with zero gradient so a
    diverging run is detected by the caller rather than raised mid-step.
    """
    raw = np.asarray(raw, dtype=np.float64)
    finite = np.isfinite(raw)
    t = np.clip(np.where(finite, raw, 1.0), T_MIN, T_MAX)
    val = np.where(finite, loss(t), np.nan)
    grad = loss.deriv(t) * (finite & (raw > T_MIN) & (raw < T_MAX))
    return val, grad
