"""Laurent coefficients at infinity and type-I Hermite-Padé polynomials.

Coefficients follow ``F(z) = sum_k c_k z**(-k)`` and are read off a circle
``|z| = R`` by the trapezoid rule.  In double precision the coefficient
``c_k`` carries an absolute error of roughly ``R**k * eps * max|F|``, so
long coefficient lists and the small remainders of higher multi-indices
are computed with ``mpmath`` when ``dps`` is given.

For a multi-index ``(m_0, ..., m_n)`` the type-I polynomials ``q_j`` with
``deg q_j <= m_j`` make ``sum_j q_j f**j`` vanish to order
``z**(mbar - M + 1)`` at infinity, where ``M = sum (m_j + 1)`` and
``mbar = max m_j``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import mpmath
import numpy as np

from . import branchkit as bk
from .branchkit import PROPOSITION, FactorExponents, SystemParams

__all__ = [
    "CircleContour",
    "LaurentSeries",
    "TypeIResult",
    "RemainderFit",
    "DegenerateSystemError",
    "laurent_at_infinity",
    "power_series",
    "type_one_hp",
    "remainder_coefficients",
    "remainder_order",
    "evaluate_remainder",
    "pade_single",
    "default_samples",
]

DEFAULT_SAMPLES = 512
DEFAULT_K = 60
NOISE_FLOOR = 1e-15


class DegenerateSystemError(ValueError):
    """The coefficient data cannot define a nonzero system (e.g. all zero)."""


@dataclass(frozen=True)
class CircleContour:
    radius: float = 2.0
    sample_count: int = DEFAULT_SAMPLES

    def __post_init__(self):
        if not self.radius > 1:
            raise ValueError("contour radius must exceed 1")
        m = self.sample_count
        if m < 2 or m & (m - 1):
            raise ValueError("sample_count must be a power of two")

    def angles(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.sample_count) / self.sample_count

    def points(self) -> np.ndarray:
        return self.radius * np.exp(1j * self.angles())


@dataclass
class LaurentSeries:
    coefficients: np.ndarray
    radius_used: float
    dps: int | None = None
    mp_coefficients: tuple | None = field(default=None, repr=False)
    max_imag: float = 0.0

    def __len__(self):
        return len(self.coefficients)

    def exact(self, k: int):
        """Coefficient ``k`` at the working precision it was computed in."""
        if k < 0:
            return 0
        if k >= len(self.coefficients):
            raise IndexError(f"coefficient {k} not available (K={len(self) - 1})")
        if self.mp_coefficients is not None:
            return self.mp_coefficients[k]
        return float(self.coefficients[k])

    @classmethod
    def constant(cls, value: float, K: int, dps: int | None = None) -> "LaurentSeries":
        c = np.zeros(K + 1)
        c[0] = value
        mp_c = None
        if dps is not None:
            with mpmath.workdps(dps):
                mp_c = tuple(mpmath.mpf(v) for v in c)
        return cls(c, math.inf, dps, mp_c)


def laurent_at_infinity(evaluator: Callable, contour: CircleContour = CircleContour(),
                        K: int = DEFAULT_K, dps: int | None = None) -> LaurentSeries:
    """Trapezoid-rule Laurent coefficients ``c_0..c_K`` of ``evaluator`` at infinity.

    ``evaluator`` takes an array of complex points (double mode) or a single
    ``mpmath.mpc`` (when ``dps`` is set).  The function must be real on the
    real axis far out, so the imaginary parts are checked and dropped.

    Raises
    ------
    ValueError
        If ``K >= sample_count / 2`` or the coefficients are not real.
    """
    M, R = contour.sample_count, contour.radius
    if not 0 <= K < M // 2:
        raise ValueError("need 0 <= K < sample_count / 2")
    if dps is None:
        F = np.asarray(evaluator(contour.points()), dtype=complex)
        c = np.fft.ifft(F)[: K + 1] * R ** np.arange(K + 1)
        scale = np.maximum(1.0, np.max(np.abs(F)) * R ** np.arange(K + 1))
        imag = np.abs(c.imag)
        if np.any(imag > 1e-12 * scale):
            raise ValueError(f"Laurent coefficients are not real (max imag {imag.max():.3e})")
        return LaurentSeries(c.real.copy(), R, None, None, float(imag.max()))
    with mpmath.workdps(dps):
        Rm = mpmath.mpf(R)
        roots = [mpmath.expjpi(mpmath.mpf(2 * m) / M) for m in range(M)]
        F = [evaluator(Rm * w) for w in roots]
        coeffs, imag = [], mpmath.mpf(0)
        Rk = mpmath.mpf(1)
        for k in range(K + 1):
            s = mpmath.fsum(F[m] * roots[(k * m) % M] for m in range(M)) * Rk / M
            imag = max(imag, abs(s.imag) / max(1, Rk))
            coeffs.append(s.real)
            Rk *= Rm
        if imag > mpmath.mpf(10) ** (5 - dps):
            raise ValueError(f"Laurent coefficients are not real (max imag {float(imag):.3e})")
        return LaurentSeries(np.array([float(v) for v in coeffs]), R, dps, tuple(coeffs),
                             float(imag))


def power_series(p: SystemParams, n: int, e: FactorExponents = PROPOSITION,
                 contour: CircleContour = CircleContour(), K: int = DEFAULT_K,
                 dps: int | None = None) -> list[LaurentSeries]:
    """Series of ``1, f, ..., f**n``, each power sampled on the contour directly."""
    out = [LaurentSeries.constant(1.0, K, dps)]
    for j in range(1, n + 1):
        out.append(laurent_at_infinity(lambda z, j=j: bk.eval_f(p, e, z) ** j, contour, K, dps))
    return out


@dataclass
class TypeIResult:
    multi_index: tuple[int, ...]
    polynomial_coefficients: list[list[float]]
    target_order: int
    condition_indicator: float
    degenerate: bool
    achieved_order: float | None = None
    fit_residual: float | None = None
    order_status: str = "not_computed"
    dps: int | None = None
    mp_vector: tuple | None = field(default=None, repr=False)

    @property
    def M(self) -> int:
        return sum(m + 1 for m in self.multi_index)

    def coefficient_vector(self):
        """Flattened ``q_{j,i}`` in working precision (mp if available)."""
        if self.mp_vector is not None:
            return list(self.mp_vector)
        return [c for q in self.polynomial_coefficients for c in q]

    def to_json(self) -> dict:
        return {
            "multi_index": list(self.multi_index),
            "polynomial_coefficients": [list(map(float, q)) for q in self.polynomial_coefficients],
            "target_order": self.target_order,
            "achieved_order": self.achieved_order,
            "fit_residual": self.fit_residual,
            "order_status": self.order_status,
            "condition_indicator": self.condition_indicator,
            "degenerate": self.degenerate,
        }


def _system_matrix(series, multi_index, exact):
    mbar = max(multi_index)
    M = sum(m + 1 for m in multi_index)
    rows = []
    for p in range(mbar, mbar - M + 1, -1):
        row = []
        for s, m in zip(series, multi_index):
            for i in range(m + 1):
                k = i - p
                row.append(s.exact(k) if exact else (s.coefficients[k] if k >= 0 else 0.0))
        rows.append(row)
    return rows


def _normalize(vec, multi_index):
    """Unit norm; the first nonzero leading coefficient is made positive."""
    norm = math.sqrt(sum(float(v) ** 2 for v in vec)) if not isinstance(vec[0], mpmath.mpf) \
        else mpmath.sqrt(mpmath.fsum(v * v for v in vec))
    vec = [v / norm for v in vec]
    pos, lead = 0, None
    for m in multi_index:
        for v in reversed(vec[pos:pos + m + 1]):
            if abs(v) > 1e-12:
                lead = v
                break
        if lead is not None:
            break
        pos += m + 1
    if lead is not None and lead < 0:
        vec = [-v for v in vec]
    return vec


def type_one_hp(series_list: Sequence[LaurentSeries], multi_index: Sequence[int],
                degeneracy_tol: float | None = None) -> TypeIResult:
    """Type-I Hermite-Padé polynomials for the given series.

    The coefficient vector spans the kernel of the ``(M-1) x M`` system that
    kills the powers ``z**mbar`` down to ``z**(mbar-M+2)`` and is taken as
    the last right singular vector.  If the second smallest singular value
    is also negligible the kernel is not one-dimensional and the result is
    flagged ``degenerate``.

    Raises
    ------
    DegenerateSystemError
        If every series is identically zero.
    ValueError
        On a malformed multi-index or too few coefficients.
    """
    multi_index = tuple(int(m) for m in multi_index)
    if len(multi_index) != len(series_list) or min(multi_index, default=-1) < 0:
        raise ValueError("one non-negative degree bound per series is required")
    if all(not np.any(s.coefficients) for s in series_list):
        raise DegenerateSystemError("all input series are zero")
    M = sum(m + 1 for m in multi_index)
    mbar = max(multi_index)
    K = min(len(s) for s in series_list) - 1
    if K < M + mbar + 5:
        raise ValueError(f"need at least {M + mbar + 5} Laurent coefficients, have {K}")
    dps_list = {s.dps for s in series_list if s.dps is not None and np.any(s.coefficients[1:])}
    dps = min(dps_list) if dps_list else None
    target = mbar - M + 1

    if M == 1:
        vec = [1.0] if dps is None else [mpmath.mpf(1)]
        return _result(multi_index, vec, target, 1.0, False, dps)

    if dps is None:
        A = np.array(_system_matrix(series_list, multi_index, exact=False), dtype=float)
        _, S, Vt = np.linalg.svd(A, full_matrices=True)
        vec = list(Vt[-1])
        tol = degeneracy_tol if degeneracy_tol is not None else 1e-11
    else:
        with mpmath.workdps(dps):
            A = mpmath.matrix(_system_matrix(series_list, multi_index, exact=True))
            _, Sm, V = mpmath.svd_r(A, full_matrices=True)
            S = np.array([float(v) for v in Sm])
            vec = [V[M - 1, j] for j in range(M)]
        tol = degeneracy_tol if degeneracy_tol is not None else 10.0 ** (-dps / 2)
    cond = float(S[-1] / S[0]) if S[0] > 0 else 0.0
    return _result(multi_index, vec, target, cond, cond < tol, dps)


def _result(multi_index, vec, target, cond, degenerate, dps):
    if dps is not None:
        with mpmath.workdps(dps):
            vec = _normalize([mpmath.mpf(v) for v in vec], multi_index)
    else:
        vec = _normalize([float(v) for v in vec], multi_index)
    polys, pos = [], 0
    for m in multi_index:
        polys.append([float(v) for v in vec[pos:pos + m + 1]])
        pos += m + 1
    return TypeIResult(multi_index, polys, target, cond, degenerate, dps=dps,
                       mp_vector=tuple(vec) if dps is not None else None)


def remainder_coefficients(result: TypeIResult, series_list: Sequence[LaurentSeries],
                           count: int | None = None) -> np.ndarray:
    """Laurent coefficients of ``sum_j q_j f**j`` for ``z**mbar`` downwards.

    Entry ``t`` is the coefficient of ``z**(mbar - t)``; the first ``M - 1``
    vanish by construction.
    """
    mi = result.multi_index
    mbar, M = max(mi), result.M
    count = count or M + 2
    vec = result.coefficient_vector()
    exact = result.dps is not None
    out = []
    ctx = mpmath.workdps(result.dps) if exact else _null()
    with ctx:
        for t in range(count):
            p = mbar - t
            acc, pos = 0, 0
            for s, m in zip(series_list, mi):
                for i in range(m + 1):
                    k = i - p
                    ck = s.exact(k) if exact else (s.coefficients[k] if k >= 0 else 0.0)
                    acc += vec[pos + i] * ck
                pos += m + 1
            out.append(float(acc))
    return np.array(out)


class _null:
    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return False


def default_samples(count: int = 24) -> np.ndarray:
    """Points ``r * exp(i pi/3)`` with ``r`` log-spaced over [10, 100]."""
    return np.geomspace(10.0, 100.0, count) * np.exp(1j * np.pi / 3)


def evaluate_remainder(result: TypeIResult, evaluators: Sequence[Callable], z):
    """``|sum_j q_j(z) F_j(z)|`` at each sample, in the result's precision."""
    vec = result.coefficient_vector()
    out = []
    ctx = mpmath.workdps(result.dps) if result.dps is not None else _null()
    with ctx:
        for zz in np.atleast_1d(np.asarray(z, dtype=complex)):
            zz = mpmath.mpc(zz) if result.dps is not None else complex(zz)
            acc, pos = 0, 0
            for F, m in zip(evaluators, result.multi_index):
                q = 0
                for i in range(m, -1, -1):
                    q = q * zz + vec[pos + i]
                acc += q * F(zz)
                pos += m + 1
            out.append(float(abs(acc)))
    return np.array(out)


@dataclass(frozen=True)
class RemainderFit:
    order: float | None
    residual: float | None
    status: str  # "ok", "below_noise_floor", "non_decaying", "degenerate"


def remainder_order(result: TypeIResult, evaluators: Sequence[Callable],
                    samples=None, noise_floor: float | None = None) -> RemainderFit:
    """Least-squares slope of ``log|remainder|`` against ``log|z|``.

    The fit is also stored on ``result``.  Samples must satisfy
    ``10 <= |z| <= 100`` and stay off the real axis.  A slope that is not
    negative means the remainder does not decay (a polynomial artifact) and
    is flagged ``non_decaying``.
    """
    z = default_samples() if samples is None else np.asarray(samples, dtype=complex).ravel()
    r = np.abs(z)
    if np.any((r < 10 - 1e-9) | (r > 100 + 1e-9)) or np.any(np.abs(z.imag) < 1e-3 * r):
        raise ValueError("samples must lie in 10 <= |z| <= 100, off the real axis")
    if noise_floor is None:
        noise_floor = NOISE_FLOOR if result.dps is None else 10.0 ** (5 - result.dps)
    vals = evaluate_remainder(result, evaluators, z)
    if np.all(vals < noise_floor):
        fit = RemainderFit(None, None, "below_noise_floor")
    else:
        keep = vals >= noise_floor
        X = np.log(r[keep])
        Y = np.log(vals[keep])
        if len(X) < 2:
            fit = RemainderFit(None, None, "below_noise_floor")
        else:
            slope, icept = np.polyfit(X, Y, 1)
            resid = float(np.sqrt(np.mean((Y - (slope * X + icept)) ** 2)))
            if result.degenerate:
                status = "degenerate"
            elif slope > -0.5:
                status = "non_decaying"
            else:
                status = "ok"
            fit = RemainderFit(float(slope), resid, status)
    result.achieved_order, result.fit_residual, result.order_status = fit.order, fit.residual, fit.status
    return fit


def pade_single(f_series: LaurentSeries, m) -> TypeIResult:
    """Padé linearization ``q_0 + q_1 f`` (``-q_0 / q_1`` approximates ``f``).

    ``m`` is a pair ``(deg q_0, deg q_1)`` or a single integer used for both.
    """
    if isinstance(m, (int, np.integer)):
        m = (int(m), int(m))
    one = LaurentSeries.constant(1.0, len(f_series) - 1, f_series.dps)
    return type_one_hp([one, f_series], m)
