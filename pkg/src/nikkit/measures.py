"""Densities of sigma, sigma_2, sigma_3 and of composed measures.

Composition
-----------
``compose(outer, inner)`` returns the measure ``K(x) d(outer)(x)`` with
``K`` a Cauchy-type integral of ``inner``.  Two kernel conventions exist:

``"positive"``
    ``K(x) = int d(inner)(t) / |t - x|`` oriented towards the inner support,
    i.e. ``1/(t - x)`` when the inner support lies to the right.  Positive
    inputs give a positive composition.
``"cauchy"``
    ``K(x) = int d(inner)(t) / (x - t)``, the value of the ordinary Cauchy
    transform of ``inner`` at ``x``.  This flips the sign whenever the inner
    support lies to the right.

The two differ by the ``sign`` stored on the composed measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.interpolate import BarycentricInterpolator

from .branchkit import DomainError, PROPOSITION, SystemParams, eval_f, eval_h, phi
from .quadcauchy import DEFAULT_NODES, Interval, QuadratureRule, build_rule

__all__ = [
    "Interval",
    "MeasureSpec",
    "NikishinChain",
    "ValidationError",
    "density_sigma",
    "density_sigma2",
    "density_sigma3",
    "sigma",
    "sigma2",
    "sigma3",
    "compose",
    "tabulated",
    "chain_validate",
    "proposition_measures",
]

KINDS = ("sigma_main", "sigma_two", "sigma_three", "composition", "tabulated")


class ValidationError(ValueError):
    """Invalid measure construction (overlapping supports, bad chain)."""


def _open(x, lo, hi, name):
    x = np.asarray(x, dtype=float)
    if np.any((x <= lo) | (x >= hi)):
        raise DomainError(f"{name} density is evaluated on the open interval ({lo}, {hi})")
    return x


def _ret(out):
    out = np.asarray(out)
    return out.item() if out.ndim == 0 else out


def density_sigma(p: SystemParams, x):
    """Density of sigma on (-1, 1), written through ``h1``, ``h2``.

    Equals ``-Im f+(x) / pi``.
    """
    x = _open(x, -1.0, 1.0, "sigma")
    h1, h2 = eval_h(p, 1, x), eval_h(p, 2, x)
    root = np.sqrt((p.a1 - x) * (p.a2 - x))
    out = (np.sqrt(1.0 - x * x) * (h2 / h1 + h1 / h2)
           / (4.0 * math.pi * math.sqrt(p.A1 * p.A2) * root))
    return _ret(out)


def density_sigma2(p: SystemParams, x):
    """``1 / (pi sqrt((phi(x) - A1)(A2 - phi(x))))`` on (a1, a2)."""
    x = _open(x, p.a1, p.a2, "sigma_2")
    w = np.real(phi(x.astype(complex)))
    return _ret(1.0 / (math.pi * np.sqrt((w - p.A1) * (p.A2 - w))))


def density_sigma3(p: SystemParams, x):
    """Density of sigma_3 on (a1, a2), evaluated from its four-factor form."""
    x = _open(x, p.a1, p.a2, "sigma_3")
    w = np.real(phi(x.astype(complex)))
    u = 1.0 / w
    prod = (p.A1 - u) * (p.A2 - u) * (w - p.A1) * (p.A2 - w)
    return _ret(1.0 / (math.pi * np.sqrt(prod)))


@dataclass(frozen=True, eq=False)
class MeasureSpec:
    """A signed measure on an interval with known endpoint behaviour.

    ``endpoint_exponents`` are the exponents at ``lo`` and ``hi`` of the
    density's algebraic behaviour; they select the quadrature weight.
    """

    support: Interval
    kind: str
    endpoint_exponents: tuple[float, float]
    sign: int = 1
    params: SystemParams | None = None
    outer: "MeasureSpec | None" = None
    inner: "MeasureSpec | None" = None
    inner_nodes: int = DEFAULT_NODES
    node_map: str = "affine"
    table: tuple | None = field(default=None, repr=False)
    label: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown measure kind {self.kind!r}")
        if self.sign not in (1, -1):
            raise ValidationError("sign must be +1 or -1")
        if self.kind == "composition":
            if self.outer is None or self.inner is None:
                raise ValidationError("a composition needs outer and inner measures")
            if not self.outer.support.disjoint(self.inner.support):
                raise ValidationError(
                    f"composition needs disjoint supports, got {self.outer.support} "
                    f"and {self.inner.support}")

    @cached_property
    def _inner_rule(self) -> QuadratureRule:
        m = self.inner
        return build_rule(m.support, m.endpoint_exponents, self.inner_nodes, m.node_map)

    @cached_property
    def _inner_weighted(self) -> np.ndarray:
        rule = self._inner_rule
        return rule.weights * self.inner.density(rule.nodes) / rule.weight_function(rule.nodes)

    def kernel(self, x) -> np.ndarray:
        """Inner Cauchy-type integral ``K(x)`` of a composition, without ``sign``.

        This is ``int d(inner)(t) / (x - t)``, the Cauchy transform of the
        inner measure at ``x``.
        """
        if self.kind != "composition":
            raise ValidationError("only compositions carry a kernel")
        x = np.asarray(x, dtype=float)
        t = self._inner_rule.nodes
        K = (1.0 / (x.reshape(-1, 1) - t[None, :])) @ self._inner_weighted
        return K.reshape(x.shape)

    def density(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "sigma_main":
            out = density_sigma(self.params, x)
        elif self.kind == "sigma_two":
            out = density_sigma2(self.params, x)
        elif self.kind == "sigma_three":
            out = density_sigma3(self.params, x)
        elif self.kind == "composition":
            out = self.kernel(x) * self.outer.density(x)
        else:
            out = self._interpolate(x)
        return _ret(self.sign * np.asarray(out))

    def _interpolate(self, x):
        nodes, values, ref, to_ref, weight = self.table
        if np.any((x <= self.support.lo) | (x >= self.support.hi)):
            raise DomainError("tabulated density is evaluated inside its support")
        interp = BarycentricInterpolator(ref, values / weight(nodes))
        return interp(to_ref(x)) * weight(x)


def sigma(p: SystemParams) -> MeasureSpec:
    """sigma on [-1, 1]; vanishes like a square root at both ends."""
    return MeasureSpec(Interval(-1.0, 1.0), "sigma_main", (0.5, 0.5), params=p, label="sigma")


def sigma2(p: SystemParams) -> MeasureSpec:
    """sigma_2 on [a1, a2]; inverse square root at both ends."""
    return MeasureSpec(Interval(p.a1, p.a2), "sigma_two", (-0.5, -0.5), params=p,
                       node_map="joukowski", label="sigma2")


def sigma3(p: SystemParams) -> MeasureSpec:
    return MeasureSpec(Interval(p.a1, p.a2), "sigma_three", (-0.5, -0.5), params=p,
                       node_map="joukowski", label="sigma3")


def compose(outer: MeasureSpec, inner: MeasureSpec, convention: str = "positive",
            inner_nodes: int = DEFAULT_NODES, label: str = "") -> MeasureSpec:
    """``<outer, inner>``: density ``K(x) * outer(x)``.

    Raises
    ------
    ValidationError
        If the supports overlap.
    """
    if not outer.support.disjoint(inner.support):
        raise ValidationError(
            f"composition needs disjoint supports, got {outer.support} and {inner.support}")
    if convention == "cauchy":
        sign = 1
    elif convention == "positive":
        sign = -1 if inner.support.lo > outer.support.hi else 1
    else:
        raise ValueError(f"unknown convention {convention!r}")
    return MeasureSpec(outer.support, "composition", outer.endpoint_exponents, sign=sign,
                       params=outer.params, outer=outer, inner=inner, inner_nodes=inner_nodes,
                       node_map=outer.node_map,
                       label=label or f"<{outer.label},{inner.label}>")


def tabulated(rule: QuadratureRule, values, label: str = "tabulated") -> MeasureSpec:
    """A measure known through its density values at the nodes of ``rule``.

    The density is interpolated as ``weight * g`` with ``g`` a polynomial
    in the rule's reference variable, which matches the endpoint behaviour
    the rule absorbs.
    """
    values = np.asarray(values, dtype=float)
    if values.shape != rule.nodes.shape:
        raise ValidationError("one density value per rule node is required")
    iv = rule.interval
    if rule.node_map == "affine":
        def to_ref(x):
            return (np.asarray(x, dtype=float) - iv.mid) / iv.half
    else:
        L, H = (v + math.sqrt(v * v - 1) for v in (iv.lo, iv.hi))

        def to_ref(x):
            x = np.asarray(x, dtype=float)
            w = x + np.sqrt(x * x - 1)
            return (w - 0.5 * (L + H)) / (0.5 * (H - L))
    table = (rule.nodes, values, rule.reference_nodes, to_ref, rule.weight_function)
    return MeasureSpec(iv, "tabulated", rule.exponent_profile, node_map=rule.node_map,
                       table=table, label=label)


@dataclass(frozen=True)
class NikishinChain:
    measures: tuple[MeasureSpec, ...] = ()


def chain_validate(chain: NikishinChain) -> bool:
    """Check that consecutive supports are disjoint.

    Raises
    ------
    ValidationError
        Naming the first offending pair.
    """
    ms = list(chain.measures)
    for i in range(len(ms) - 1):
        if not ms[i].support.disjoint(ms[i + 1].support):
            raise ValidationError(
                f"measures {i} ({ms[i].label or ms[i].kind}) and {i + 1} "
                f"({ms[i + 1].label or ms[i + 1].kind}) have overlapping supports "
                f"{ms[i].support} and {ms[i + 1].support}")
    return True


def proposition_measures(p: SystemParams, N: int = DEFAULT_NODES,
                         convention: str = "positive") -> dict[str, MeasureSpec]:
    """sigma, sigma2, sigma3, s = <sigma2, sigma>, s1 = <sigma, sigma2>, s2 = <sigma, s>."""
    sg, s2m, s3m = sigma(p), sigma2(p), sigma3(p)
    s = compose(s2m, sg, convention, N, label="s")
    s1 = compose(sg, s2m, convention, N, label="s1")
    s2 = compose(sg, s, convention, N, label="s2")
    return {"sigma": sg, "sigma2": s2m, "sigma3": s3m, "s": s, "s1": s1, "s2": s2}


def f_on_second_cut(p: SystemParams, x):
    """The proposition ``f`` at real points of (a1, a2) (real and positive)."""
    return np.real(eval_f(p, PROPOSITION, np.asarray(x, dtype=float).astype(complex)))
