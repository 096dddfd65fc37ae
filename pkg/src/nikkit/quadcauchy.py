"""Endpoint-aware quadrature, moments and Cauchy transforms of measures.

A rule integrates ``g(x) * w(x)`` over an interval, where the weight
``w(x) = (x - lo)**b * (hi - x)**a`` absorbs the endpoint behaviour of the
measure (``b``, ``a`` are the exponents at ``lo`` and ``hi``).  A measure
is integrated by feeding the rule its *regular part* ``density / w``.

Two node placements are available.  ``"affine"`` is the usual Gauss rule
for the weight, mapped linearly.  ``"joukowski"`` is meant for intervals to
the right of 1 (the second cut): nodes are Gauss nodes in ``w = phi(x)``
and the weights are corrected by a smooth Jacobian, which keeps the
convergence rate geometric even when the interval nearly touches
``[-1, 1]``.

Anything passed as a measure needs ``support``, ``endpoint_exponents``,
``node_map`` and ``density(x)``; see :mod:`nikkit.measures`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

__all__ = [
    "Interval",
    "QuadratureRule",
    "EvalResult",
    "NearSingularityError",
    "RuleMismatchError",
    "SUPPORTED_EXPONENTS",
    "DEFAULT_NODES",
    "DEFAULT_DELTA_MIN",
    "build_rule",
    "rule_for",
    "integrate",
    "mass",
    "moment",
    "cauchy_transform",
    "reconstruct_from_jump",
]

SUPPORTED_EXPONENTS = (-0.5, 0.0, 0.5)
DEFAULT_NODES = 200
DEFAULT_DELTA_MIN = 1e-3


class NearSingularityError(ValueError):
    """Evaluation point too close to the support of the measure."""


class RuleMismatchError(ValueError):
    """Rule and measure disagree on interval or endpoint exponents."""


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not float(self.lo) < float(self.hi):
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def half(self) -> float:
        return 0.5 * (self.hi - self.lo)

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return (x >= self.lo) & (x <= self.hi)

    def distance(self, z) -> np.ndarray:
        """Euclidean distance from complex points to the segment."""
        z = np.asarray(z, dtype=complex)
        dx = np.maximum(np.maximum(self.lo - z.real, z.real - self.hi), 0.0)
        return np.hypot(dx, z.imag)

    def disjoint(self, other: "Interval") -> bool:
        return self.hi < other.lo or other.hi < self.lo

    def isclose(self, other: "Interval") -> bool:
        scale = max(1.0, abs(self.lo), abs(self.hi))
        return abs(self.lo - other.lo) <= 1e-12 * scale and abs(self.hi - other.hi) <= 1e-12 * scale


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes and positive weights for ``int g(x) w(x) dx`` on ``interval``."""

    interval: Interval
    nodes: np.ndarray
    weights: np.ndarray
    exponent_profile: tuple[float, float]
    node_map: str = "affine"
    reference_nodes: np.ndarray = field(default=None, repr=False)

    @property
    def order(self) -> int:
        return len(self.nodes)

    def weight_function(self, x) -> np.ndarray:
        b, a = self.exponent_profile
        x = np.asarray(x, dtype=float)
        lo, hi = self.interval.lo, self.interval.hi
        return np.power(x - lo, b) * np.power(hi - x, a)

    def half(self) -> "QuadratureRule":
        """The companion rule with half the nodes, for error estimates."""
        return build_rule(self.interval, self.exponent_profile, max(self.order // 2, 2),
                          node_map=self.node_map)


@dataclass(frozen=True)
class EvalResult:
    value: complex | np.ndarray
    error_estimate: float | np.ndarray

    def __post_init__(self):
        if np.any(np.asarray(self.error_estimate) < 0):
            raise ValueError("error estimate must be non-negative")


def _check_profile(profile):
    b, a = (float(v) for v in profile)
    if b not in SUPPORTED_EXPONENTS or a not in SUPPORTED_EXPONENTS:
        raise ValueError(f"unsupported exponent profile {profile!r}; "
                         f"exponents must be in {SUPPORTED_EXPONENTS}")
    return b, a


def _reference_rule(b: float, a: float, N: int):
    """Gauss rule on [-1, 1] for ``(1+t)**b * (1-t)**a``, nodes increasing."""
    k = np.arange(1, N + 1)
    if a == b == -0.5:
        t = -np.cos((2 * k - 1) * np.pi / (2 * N))
        w = np.full(N, np.pi / N)
    elif a == b == 0.5:
        theta = k * np.pi / (N + 1)
        t = -np.cos(theta)
        w = np.pi / (N + 1) * np.sin(theta) ** 2
    elif a == b == 0.0:
        t, w = special.roots_legendre(N)
    else:
        t, w = special.roots_jacobi(N, a, b)
    order = np.argsort(t)
    return np.asarray(t)[order], np.asarray(w)[order]


def build_rule(interval: Interval, exponent_profile=(0.0, 0.0), N: int = DEFAULT_NODES,
               node_map: str = "affine") -> QuadratureRule:
    """Gauss-type rule absorbing ``(x-lo)**b (hi-x)**a`` with ``(b, a) = exponent_profile``.

    Examples
    --------
    >>> r = build_rule(Interval(-1, 1), (0.5, 0.5), 16)
    >>> round(float(r.weights.sum()), 12) == round(math.pi / 2, 12)
    True
    """
    if N < 2:
        raise ValueError("a rule needs at least 2 nodes")
    b, a = _check_profile(exponent_profile)
    lo, hi = float(interval.lo), float(interval.hi)
    if node_map == "affine":
        t, w = _reference_rule(b, a, N)
        h = 0.5 * (hi - lo)
        nodes = 0.5 * (lo + hi) + h * t
        weights = w * h ** (1.0 + a + b)
        ref = t
    elif node_map == "joukowski":
        if lo <= 1.0:
            raise ValueError("the joukowski node map needs an interval right of 1")
        L, H = lo + math.sqrt(lo * lo - 1), hi + math.sqrt(hi * hi - 1)
        t, w = _reference_rule(b, a, N)
        hw = 0.5 * (H - L)
        wn = 0.5 * (L + H) + hw * t
        nodes = 0.5 * (wn + 1.0 / wn)
        # (x-lo) = (w-L)(1 - 1/(wL))/2, (hi-x) = (H-w)(1 - 1/(wH))/2, dx/dw = (1 - 1/w^2)/2
        jac = (np.power(0.5 * (1.0 - 1.0 / (wn * L)), b)
               * np.power(0.5 * (1.0 - 1.0 / (wn * H)), a)
               * 0.5 * (1.0 - 1.0 / wn ** 2))
        weights = w * hw ** (1.0 + a + b) * jac
        ref = t
    else:
        raise ValueError(f"unknown node map {node_map!r}")
    return QuadratureRule(interval, nodes, weights, (b, a), node_map, ref)


def rule_for(m, N: int = DEFAULT_NODES) -> QuadratureRule:
    """Build the rule a measure asks for through its metadata."""
    return build_rule(m.support, m.endpoint_exponents, N, node_map=m.node_map)


def _check_rule(m, rule: QuadratureRule):
    if not rule.interval.isclose(m.support):
        raise RuleMismatchError(f"rule on {rule.interval} does not match support {m.support}")
    if tuple(rule.exponent_profile) != tuple(float(v) for v in m.endpoint_exponents):
        raise RuleMismatchError(
            f"rule absorbs {rule.exponent_profile}, measure has {m.endpoint_exponents}")


def _regular_part(m, rule: QuadratureRule) -> np.ndarray:
    return m.density(rule.nodes) / rule.weight_function(rule.nodes)


def _apply(m, rule, kernel):
    g = _regular_part(m, rule)
    K = kernel(rule.nodes)
    return K @ (rule.weights * g) if K.ndim == 2 else np.sum(rule.weights * g * K)


def integrate(m, kernel=None, rule: QuadratureRule | None = None) -> EvalResult:
    """``int kernel(x) dm(x)`` with an N versus N/2 error estimate.

    ``kernel`` maps the node array to values (shape ``(N,)``) or to a
    matrix of shape ``(P, N)`` for ``P`` outputs at once.
    """
    rule = rule or rule_for(m)
    _check_rule(m, rule)
    kernel = kernel or (lambda x: np.ones_like(x))
    full = _apply(m, rule, kernel)
    coarse = _apply(m, rule.half(), kernel)
    return EvalResult(full, np.abs(full - coarse))


def mass(m, rule: QuadratureRule | None = None) -> float:
    return float(np.real(integrate(m, None, rule).value))


def moment(m, k: int, rule: QuadratureRule | None = None) -> float:
    """``int x**k dm(x)``; ``moment(m, 0) == mass(m)``."""
    if k < 0:
        raise ValueError("moment order must be non-negative")
    return float(np.real(integrate(m, lambda x: x ** k, rule).value))


def cauchy_transform(m, z, rule: QuadratureRule | None = None,
                     delta_min: float = DEFAULT_DELTA_MIN) -> EvalResult:
    """``int dm(x) / (z - x)`` for ``z`` at distance ``>= delta_min`` from the support.

    Composed measures are handled by their own ``density``, which evaluates
    the inner transform at this rule's nodes (one level of nesting each).
    """
    z_arr = np.asarray(z, dtype=complex)
    scalar = z_arr.ndim == 0
    z_flat = np.atleast_1d(z_arr).ravel()
    dist = m.support.distance(z_flat)
    if np.any(dist < delta_min):
        bad = z_flat[np.argmin(dist)]
        raise NearSingularityError(
            f"z={bad} is within {delta_min} of the support [{m.support.lo}, {m.support.hi}]")
    res = integrate(m, lambda x: 1.0 / (z_flat[:, None] - x[None, :]), rule)
    value = res.value.reshape(z_arr.shape)
    err = np.asarray(res.error_estimate).reshape(z_arr.shape)
    if scalar:
        return EvalResult(complex(value), float(err))
    return EvalResult(value, err)


def reconstruct_from_jump(density_measure, constant_at_inf: complex, x,
                          rule: QuadratureRule | None = None, sign: int = 1,
                          delta_min: float = DEFAULT_DELTA_MIN):
    """``constant + sign * cauchy_transform(density_measure, x)``.

    With ``mu = -(F+ - F-)/(2 pi i)`` (``sign=+1``) or
    ``mu = (F+ - F-)/(2 pi i)`` (``sign=-1``) this rebuilds a function that
    is holomorphic off the support and bounded at infinity.  A mismatch with
    the directly evaluated function reveals singularities the jump does not
    account for.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    res = cauchy_transform(density_measure, x, rule, delta_min)
    return constant_at_inf + sign * res.value
