"""Branch-correct evaluation of f, its second sheet and the symmetric ratios.

Conventions
-----------
``phi(z) = z + (z**2 - 1)**(1/2)`` with the root normalized so that
``(z**2 - 1)**(1/2) / z -> 1`` at infinity.  The root is realized as the
product of the principal roots of ``z - 1`` and ``z + 1``; the two cuts
cancel on ``(-inf, -1]`` and the remaining cut is exactly ``[-1, 1]``.

The function family is

    f(z) = (A1 - 1/phi(z))**alpha1 * (A2 - 1/phi(z))**alpha2

with per-factor principal powers.  ``alpha1 = alpha2 = -1/2`` is the
proposition case, ``(alpha, -alpha)`` the conjecture family.  The second
sheet replaces ``1/phi`` by ``phi``.

All evaluators accept Python scalars or numpy arrays.  ``eval_f``,
``phi``, ``phi_recip`` and ``sqrt_joukowski`` also accept mpmath scalars,
which is what the high-precision Laurent sampling relies on.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import mpmath
import numpy as np

__all__ = [
    "DomainError",
    "SystemParams",
    "FactorExponents",
    "SheetSide",
    "PROPOSITION",
    "conjecture_exponents",
    "sqrt_joukowski",
    "phi",
    "phi_recip",
    "boundary_phi",
    "value_at_infinity",
    "second_sheet_at_infinity",
    "eval_f",
    "boundary_f",
    "eval_h",
    "jump_f",
    "jump_f_closed_form",
    "second_sheet_f",
    "first_sheet_f",
    "ratio_R",
    "rho1_jump_closed_form",
    "rho2_explicit",
    "rho2_jump_closed_form",
    "rho3",
    "rho2_endpoint_residues",
]


class DomainError(ValueError):
    """Raised when an evaluator is called on a cut or outside its domain."""


@dataclass(frozen=True)
class SystemParams:
    """Parameters ``1 < A1 < A2`` of the two-factor system.

    The derived branch points ``a_j = (A_j + 1/A_j)/2`` bound the second
    cut ``[a1, a2]``.
    """

    A1: float
    A2: float

    def __post_init__(self):
        A1, A2 = float(self.A1), float(self.A2)
        if not (math.isfinite(A1) and math.isfinite(A2)):
            raise ValueError("A1 and A2 must be finite")
        if not 1.0 < A1 < A2:
            raise ValueError(f"need 1 < A1 < A2, got A1={A1!r}, A2={A2!r}")
        object.__setattr__(self, "A1", A1)
        object.__setattr__(self, "A2", A2)

    @property
    def a1(self) -> float:
        return 0.5 * (self.A1 + 1.0 / self.A1)

    @property
    def a2(self) -> float:
        return 0.5 * (self.A2 + 1.0 / self.A2)

    @property
    def c_inf(self) -> float:
        """Value of the proposition-case f at infinity, ``1/sqrt(A1*A2)``."""
        return 1.0 / math.sqrt(self.A1 * self.A2)

    @property
    def A(self) -> tuple[float, float]:
        return (self.A1, self.A2)


@dataclass(frozen=True)
class FactorExponents:
    alpha1: float
    alpha2: float

    @property
    def alphas(self) -> tuple[float, float]:
        return (float(self.alpha1), float(self.alpha2))

    @property
    def total(self) -> float:
        return float(self.alpha1) + float(self.alpha2)


PROPOSITION = FactorExponents(-0.5, -0.5)


def conjecture_exponents(alpha: float) -> FactorExponents:
    """Exponents ``(alpha, -alpha)`` of the ratio family."""
    return FactorExponents(alpha, -alpha)


class SheetSide(str, enum.Enum):
    ABOVE = "above"
    BELOW = "below"

    @property
    def sign(self) -> int:
        return 1 if self is SheetSide.ABOVE else -1

    @property
    def other(self) -> "SheetSide":
        return SheetSide.BELOW if self is SheetSide.ABOVE else SheetSide.ABOVE


def _side(side) -> SheetSide | None:
    if side is None or isinstance(side, SheetSide):
        return side
    return SheetSide(side)


# ---------------------------------------------------------------------------
# array plumbing

def _is_mp(z) -> bool:
    return isinstance(z, (mpmath.mpc, mpmath.mpf))


def _as_complex(z):
    arr = np.asarray(z, dtype=complex)
    # +0.0 clears negative-zero imaginary parts so principal branches stay put
    return arr + 0.0, arr.ndim == 0


def _out(arr, scalar):
    return complex(arr) if scalar else arr


def _ret(out):
    out = np.asarray(out)
    return out.item() if out.ndim == 0 else out


def _on_open_cut(arr) -> np.ndarray:
    return (arr.imag == 0) & (np.abs(arr.real) < 1)


def _on_closed_cut(arr) -> np.ndarray:
    return (arr.imag == 0) & (np.abs(arr.real) <= 1)


# ---------------------------------------------------------------------------
# Joukowski maps

def sqrt_joukowski(z):
    """Branch of ``(z**2 - 1)**(1/2)`` holomorphic off ``[-1, 1]``.

    Raises
    ------
    DomainError
        If ``z`` lies on the open cut ``(-1, 1)``.
    """
    if _is_mp(z):
        z = mpmath.mpc(z)
        if z.imag == 0 and abs(z.real) < 1:
            raise DomainError(f"{z} lies on the cut (-1, 1)")
        return mpmath.sqrt(z - 1) * mpmath.sqrt(z + 1)
    arr, scalar = _as_complex(z)
    if np.any(_on_open_cut(arr)):
        raise DomainError("point on the cut (-1, 1); use the boundary evaluators")
    return _out(np.sqrt(arr - 1.0) * np.sqrt(arr + 1.0), scalar)


def phi(z):
    """Inverse Zhukovskii map, ``|phi(z)| > 1`` off the cut."""
    if _is_mp(z):
        return z + sqrt_joukowski(z)
    arr, scalar = _as_complex(z)
    return _out(arr + sqrt_joukowski(arr), scalar)


def phi_recip(z):
    """``1/phi(z) = z - (z**2 - 1)**(1/2)``, computed without division."""
    if _is_mp(z):
        return z - sqrt_joukowski(z)
    arr, scalar = _as_complex(z)
    w = sqrt_joukowski(arr)
    # z - w cancels badly for large z on the same ray; 1/(z + w) does not
    return _out(1.0 / (arr + w), scalar)


def boundary_phi(x, side):
    """Limit of ``phi`` at ``x`` in ``[-1, 1]`` from the given side."""
    side = _side(side)
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1):
        raise DomainError("boundary values of phi exist only on [-1, 1]")
    s = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    out = x + 1j * side.sign * s
    return _ret(out)


# ---------------------------------------------------------------------------
# first sheet

def value_at_infinity(p: SystemParams, e: FactorExponents = PROPOSITION) -> float:
    """``A1**alpha1 * A2**alpha2``."""
    return p.A1 ** e.alpha1 * p.A2 ** e.alpha2


def second_sheet_at_infinity(p: SystemParams, e: FactorExponents = PROPOSITION) -> float:
    """Limit of the second-sheet function at infinity.

    Only defined when the exponents sum to a non-positive number; for a zero
    sum the per-factor phases cancel and the limit is 1.
    """
    total = e.total
    if abs(total) < 1e-14:
        return 1.0
    if total < 0:
        return 0.0
    raise DomainError("second sheet is unbounded at infinity for a positive exponent sum")


def _factor_product(p, e, u):
    out = np.ones_like(u)
    for A, a in zip(p.A, e.alphas):
        out = out * np.power(A - u, a)
    return out


def eval_f(p: SystemParams, e: FactorExponents, z):
    """Evaluate ``f`` on the first sheet, ``z`` off ``[-1, 1]``.

    Each factor ``A_j - 1/phi(z)`` has positive real part because
    ``|1/phi| < 1 < A_j``, so per-factor principal powers are single-valued.
    """
    if _is_mp(z):
        z = mpmath.mpc(z)
        if z.imag == 0 and abs(z.real) <= 1:
            raise DomainError(f"{z} lies on the cut [-1, 1]")
        u = phi_recip(z)
        out = mpmath.mpf(1)
        for A, a in zip(p.A, e.alphas):
            out *= mpmath.power(A - u, a)
        return out
    arr, scalar = _as_complex(z)
    if np.any(_on_closed_cut(arr)):
        raise DomainError("f is evaluated off [-1, 1]; use boundary_f on the cut")
    return _out(_factor_product(p, e, phi_recip(arr)), scalar)


def boundary_f(p: SystemParams, e: FactorExponents, x, side):
    """Limit of ``f`` at ``x`` in ``(-1, 1)`` from ``side``.

    From above ``1/phi -> x - i*sqrt(1 - x**2)``, from below its conjugate.
    """
    side = _side(side)
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) >= 1):
        raise DomainError("boundary values are taken on the open interval (-1, 1)")
    u = boundary_phi(x, side.other)  # 1/phi^side = conj(phi^side)
    out = _factor_product(p, e, np.asarray(u, dtype=complex))
    return _ret(out)


def first_sheet_f(p: SystemParams, e: FactorExponents, z, side=None):
    """``eval_f`` extended to the closed cut with an explicit side."""
    arr, scalar = _as_complex(z)
    out = np.empty_like(arr)
    cut = _on_closed_cut(arr)
    if np.any(~cut):
        out[~cut] = eval_f(p, e, arr[~cut])
    if np.any(cut):
        side = _side(side)
        if side is None:
            raise DomainError("a SheetSide is required on [-1, 1]")
        u = boundary_phi(arr[cut].real, side.other)
        out[cut] = _factor_product(p, e, np.asarray(u, dtype=complex))
    return _out(out, scalar)


def eval_h(p: SystemParams, j: int, x):
    """``h_j(x) = 2 Re (A_j - (x + i sqrt(1 - x**2)))**(1/2)``, positive on [-1, 1]."""
    if j not in (1, 2):
        raise ValueError("j must be 1 or 2")
    A = p.A[j - 1]
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1):
        raise DomainError("h_j is defined on [-1, 1]")
    v = np.sqrt(A - np.asarray(boundary_phi(x, SheetSide.ABOVE), dtype=complex))
    out = 2.0 * v.real
    return _ret(out)


def jump_f(p: SystemParams, e: FactorExponents, x):
    """``f+(x) - f-(x)`` from the two closed-form boundary values."""
    return boundary_f(p, e, x, SheetSide.ABOVE) - boundary_f(p, e, x, SheetSide.BELOW)


def jump_f_closed_form(p: SystemParams, x):
    """Jump of the proposition-case ``f`` written through ``h1`` and ``h2``."""
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) >= 1):
        raise DomainError("jump is taken on the open interval (-1, 1)")
    h1, h2 = eval_h(p, 1, x), eval_h(p, 2, x)
    s = np.sqrt(1.0 - x * x)
    root = math.sqrt(p.A1 * p.A2) * np.sqrt((p.a1 - x) * (p.a2 - x))
    out = -0.5j * s / root * (h2 / h1 + h1 / h2)
    return _ret(out)


# ---------------------------------------------------------------------------
# second sheet

def _negative_power(d, a, side: SheetSide):
    # boundary value of the principal power at a negative real d: from above
    # A - phi has Im < 0, i.e. arg -> -pi
    return np.power(np.abs(d), a) * np.exp(-1j * np.pi * a * side.sign)


def _second_sheet_real(p, e, x, side):
    """Second sheet at real ``x`` with ``|x| >= 1``; ``side`` may be None."""
    w = np.real(phi(x.astype(complex)))
    for A in p.A:
        if np.any(w == A):
            raise DomainError("second sheet is singular or branched at a branch point a_j")
    neg = [w > A for A in p.A]
    needs_side = np.zeros(w.shape, dtype=bool)
    for m in neg:
        needs_side |= m

    def product(s):
        out = np.ones(w.shape, dtype=complex)
        for A, a, m in zip(p.A, e.alphas, neg):
            d = A - w
            val = np.power(np.abs(d), a).astype(complex)
            if s is not None:
                val = np.where(m, _negative_power(d, a, s), val)
            out = out * val
        return out

    if side is not None:
        return product(side)
    if not np.any(needs_side):
        return product(None)
    up, down = product(SheetSide.ABOVE), product(SheetSide.BELOW)
    scale = np.maximum(np.abs(up), 1.0)
    if np.any(np.abs(up - down)[needs_side] > 1e-13 * scale[needs_side]):
        raise DomainError("point on the second-sheet cut [a1, a2]; a SheetSide is required")
    return up


def second_sheet_f(p: SystemParams, e: FactorExponents, z, side=None):
    """Continuation of ``f`` through ``(-1, 1)``: ``prod (A_j - phi(z))**alpha_j``.

    For ``Im z > 0`` the arguments ``A_j - phi(z)`` stay off the negative
    axis, so principal powers continue ``x -> f-(x)`` analytically.  On the
    real axis a side is needed on ``(-1, 1)`` and wherever a factor is
    negative and the two limits differ (on ``[a1, a2]``; beyond ``a2`` they
    agree when the exponents sum to an integer).
    """
    side = _side(side)
    arr, scalar = _as_complex(z)
    out = np.empty_like(arr)
    real = arr.imag == 0
    inner = real & (np.abs(arr.real) < 1)
    outer = real & ~inner
    off = ~real
    if np.any(off):
        out[off] = _factor_product(p, e, phi(arr[off]))
    if np.any(inner):
        if side is None:
            raise DomainError("a SheetSide is required on (-1, 1)")
        out[inner] = _factor_product(p, e, np.asarray(boundary_phi(arr[inner].real, side), dtype=complex))
    if np.any(outer):
        out[outer] = _second_sheet_real(p, e, arr[outer].real, side)
    return _out(out, scalar)


def ratio_R(p: SystemParams, e: FactorExponents, k: int, z, side=None):
    """``R_k = sum_j f**j * g**(k-1-j)`` with ``g`` the second sheet.

    ``R_k`` is symmetric in the two sheets, so it is single-valued across
    ``(-1, 1)`` and equals ``Delta(f**k) / Delta f`` there.  ``R_1 = 1``,
    ``R_2 = rho_1`` and ``R_3 = rho_2``.  ``k = 0`` returns
    zero (the convention ``R_0 = 0`` used by the probe).
    """
    if int(k) != k or k < 0:
        raise ValueError("k must be a non-negative integer")
    arr, scalar = _as_complex(z)
    if k == 0:
        return _out(np.zeros_like(arr), scalar)
    if k == 1:
        return _out(np.ones_like(arr), scalar)
    side = _side(side)
    F = first_sheet_f(p, e, arr, side if side is not None else SheetSide.ABOVE)
    G = second_sheet_f(p, e, arr, side if (side is not None or not np.any(_on_open_cut(arr))) else SheetSide.ABOVE)
    out = np.zeros_like(arr)
    for j in range(k):
        out = out + F ** j * G ** (k - 1 - j)
    return _out(out, scalar)


# ---------------------------------------------------------------------------
# closed forms used as independent oracles

def rho1_jump_closed_form(p: SystemParams, x):
    """Magnitude form of the rho_1 jump on ``(a1, a2)``: ``2/sqrt((phi-A1)(A2-phi))``.

    Returned as the positive real magnitude; the orientation is a fitted sign.
    """
    x = np.asarray(x, dtype=float)
    if np.any((x <= p.a1) | (x >= p.a2)):
        raise DomainError("rho_1 jump is taken on the open interval (a1, a2)")
    w = np.real(phi(x.astype(complex)))
    out = 2.0 / np.sqrt((w - p.A1) * (p.A2 - w))
    return _ret(out)


def _side_sqrt(d, side_sign):
    # sqrt(a - z) for real z approached from the side with sign side_sign
    mag = np.sqrt(np.abs(d))
    return np.where(d >= 0, mag + 0j, -1j * side_sign * mag)


def rho2_explicit(p: SystemParams, z, side=None):
    """Explicit three-term formula for rho_2 (proposition case).

    The mixed term ``[(A1-1/phi)(A2-1/phi)(A1-phi)(A2-phi)]**(-1/2)`` is
    rewritten through ``(A - 1/phi)(A - phi) = 2A(a - z)`` and the root is
    taken per factor, positive on ``(-inf, a1)``; this fixes the branch by
    continuity from ``f+ f- > 0`` on ``[-1, 1]``.
    """
    side = _side(side)
    arr, scalar = _as_complex(z)
    real = arr.imag == 0
    x = arr.real
    if side is None and np.any(real & (x > p.a1) & (x < p.a2)):
        raise DomainError("rho_2 has a jump on (a1, a2); a SheetSide is required")
    sign = (side or SheetSide.ABOVE).sign
    cut1 = real & (np.abs(x) < 1)
    w = np.empty_like(arr)
    if np.any(cut1):
        w[cut1] = boundary_phi(x[cut1], side or SheetSide.ABOVE)
    if np.any(~cut1):
        w[~cut1] = phi(arr[~cut1])
    u = 1.0 / w
    A1, A2 = p.A
    t1 = 1.0 / ((A1 - u) * (A2 - u))
    t2 = 1.0 / ((A1 - w) * (A2 - w))
    roots = np.ones_like(arr)
    for a in (p.a1, p.a2):
        d = a - arr
        roots = roots * np.where(real, _side_sqrt(d.real, sign), np.sqrt(d))
    t3 = 1.0 / (2.0 * math.sqrt(A1 * A2) * roots)
    return _out(t1 + t2 + t3, scalar)


def rho2_jump_closed_form(p: SystemParams, x):
    """Positive magnitude ``2/sqrt((A1-1/phi)(A2-1/phi)(phi-A1)(A2-phi))`` on ``(a1, a2)``."""
    x = np.asarray(x, dtype=float)
    if np.any((x <= p.a1) | (x >= p.a2)):
        raise DomainError("rho_2 jump is taken on the open interval (a1, a2)")
    w = np.real(phi(x.astype(complex)))
    u = 1.0 / w
    out = 2.0 / np.sqrt((p.A1 - u) * (p.A2 - u) * (w - p.A1) * (p.A2 - w))
    return _ret(out)


def rho3(p: SystemParams, z):
    """``[(A1 - 1/phi)(A2 - 1/phi)]**(-1/2)`` with a principal root of the product."""
    arr, scalar = _as_complex(z)
    u = phi_recip(arr)
    return _out(1.0 / np.sqrt((p.A1 - u) * (p.A2 - u)), scalar)


def rho2_endpoint_residues(p: SystemParams) -> tuple[float, float]:
    """Residues of rho_2 at its simple poles ``a1`` and ``a2``.

    The term ``1/((A1 - phi)(A2 - phi))`` of rho_2 has no jump across
    ``(a1, a2)`` but blows up like ``1/(z - a_j)`` at the endpoints, since
    ``phi(a_j) = A_j`` and ``phi'(a_j) = 2 A_j**2 / (A_j**2 - 1)``.
    """
    A1, A2 = p.A
    r1 = -(A1 * A1 - 1.0) / (2.0 * A1 * A1 * (A2 - A1))
    r2 = (A2 * A2 - 1.0) / (2.0 * A2 * A2 * (A2 - A1))
    return r1, r2
