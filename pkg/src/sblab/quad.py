"""Quadrature engines and the reduced measure-space integrals.

All rules are deterministic: node sets are functions of the requested orders
only, and sums run in fixed order. Tail cutoffs are supplied by callers from
explicit inequalities, never by integrate-until-it-looks-done.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad as _scipy_quad


class QuadratureError(RuntimeError):
    """Raised when a rule cannot meet its tolerance inside its budget.

    Carries the best value and the error estimate reached so far.
    """

    def __init__(self, msg, value=None, estimate=None):
        super().__init__(msg)
        self.value = value
        self.estimate = estimate


@dataclass(frozen=True)
class QuadratureRule:
    """kind: 'gauss-legendre' | 'gauss-kronrod-adaptive' | 'tanh-sinh'."""

    kind: str = "gauss-legendre"
    order: int = 64
    budget: int = 200  # panels / subdivision limit / levels
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10


@dataclass(frozen=True)
class IntegralResult:
    value: float
    error: float
    nodes: int

    def __iter__(self):  # allow value, err = integrate_1d(...)
        yield self.value
        yield self.error


@lru_cache(maxsize=None)
def _leggauss(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def gl_nodes(a: float, b: float, n: int):
    """Gauss-Legendre nodes/weights on [a, b]."""
    x, w = _leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def panel_nodes(a: float, b: float, n_panels: int, order: int):
    """Composite Gauss-Legendre: equal panels, same order each."""
    edges = np.linspace(a, b, n_panels + 1)
    x, w = _leggauss(order)
    half = 0.5 * (edges[1] - edges[0])
    starts = edges[:-1]
    nodes = (starts[:, None] + half * (x[None, :] + 1.0)).ravel()
    weights = np.broadcast_to(half * w, (n_panels, order)).ravel().copy()
    return nodes, weights


def _integrate_gl(f, a, b, rule):
    val = None
    for order in (rule.order, rule.order + max(8, rule.order // 2)):
        x, w = gl_nodes(a, b, order)
        cur = float(np.sum(w * np.asarray(f(x), dtype=np.float64)))
        if val is None:
            val, n0 = cur, order
        else:
            err = abs(cur - val)
            return IntegralResult(cur, err, n0 + order)
    raise AssertionError("unreachable")


def _integrate_gk(f, a, b, rule):
    val, err, info = _scipy_quad(
        f, a, b, epsabs=rule.abs_tol, epsrel=rule.rel_tol, limit=rule.budget, full_output=1
    )[:3]
    nodes = int(info["neval"])
    if err > max(rule.abs_tol, rule.rel_tol * abs(val)) * 10.0:
        raise QuadratureError(
            f"adaptive rule did not converge: estimate {err:.3e}", value=val, estimate=err
        )
    return IntegralResult(float(val), float(err), nodes)


def _integrate_tanh_sinh(f, a, b, rule):
    # x = mid + half*tanh(pi/2 sinh(u)); doubling levels reuse nothing fancy,
    # the integrand count stays small for the smooth uses this rule serves.
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    prev = None
    nodes_used = 0
    for level in range(3, rule.budget + 1):
        h = 1.0 / (1 << (level - 3)) * 0.5
        kmax = int(math.asinh(math.atanh(1.0 - 1e-15) * 2.0 / math.pi) / h) + 1
        k = np.arange(-kmax, kmax + 1)
        u = k * h
        su = np.sinh(u) * (math.pi / 2.0)
        x = mid + half * np.tanh(su)
        dx = half * (math.pi / 2.0) * np.cosh(u) / np.cosh(su) ** 2
        keep = (x > a) & (x < b) & np.isfinite(dx)
        vals = np.asarray(f(x[keep]), dtype=np.float64)
        cur = float(np.sum(vals * dx[keep]) * h)
        nodes_used += int(keep.sum())
        if prev is not None:
            err = abs(cur - prev)
            if err <= max(rule.abs_tol, rule.rel_tol * abs(cur)):
                return IntegralResult(cur, err, nodes_used)
        prev = cur
    raise QuadratureError("tanh-sinh level budget exhausted", value=prev, estimate=float("nan"))


def integrate_1d(f, interval, rule: QuadratureRule | None = None) -> IntegralResult:
    """Integrate a scalar function over [a, b] with the requested rule.

    f must accept numpy arrays for the non-adaptive kinds.
    """
    rule = rule or QuadratureRule()
    a, b = float(interval[0]), float(interval[1])
    if rule.kind == "gauss-legendre":
        return _integrate_gl(f, a, b, rule)
    if rule.kind == "gauss-kronrod-adaptive":
        return _integrate_gk(f, a, b, rule)
    if rule.kind == "tanh-sinh":
        return _integrate_tanh_sinh(f, a, b, rule)
    raise ValueError(f"unknown quadrature kind {rule.kind!r}")


def gaussian_tail_cutoff(t: float, growth: float = 2.0, tiny: float = 1e-16) -> float:
    """Smallest B with exp(-B^2/t + growth*B) < tiny relative to the peak.

    This budgets a Gaussian weight exp(-b^2/t) against exponential growth
    exp(growth*b) of the integrand.
    """
    log_tiny = -math.log(tiny)
    # solve b^2/t - growth*b = log_tiny
    half = 0.5 * growth * t
    return half + math.sqrt(half * half + t * log_tiny)


def _pc_grid(a_max, b_max, na, nb, ntheta):
    a, wa = gl_nodes(0.0, a_max, na)
    b, wb = gl_nodes(0.0, b_max, nb)
    # the angle integral int_0^pi g(cos th) sin th dth == int_{-1}^{1} g(x) dx
    x, wx = gl_nodes(-1.0, 1.0, ntheta)
    return (a, wa), (b, wb), (x, wx)


def integrate_pc_reduced(
    phi,
    t: float,
    *,
    a_max: float,
    b_max: float | None = None,
    na: int = 96,
    nb: int = 96,
    ntheta: int = 96,
    check: tuple | None = (64, 64, 72),
    chunk: int = 8,
):
    """Integrate a rotation-reduced function over R^3 x R^3.

    For integrands depending only on a = |X|, b = |Y| and the angle between,
    the six-dimensional integral reduces to
        8 pi^2 * int int int phi(a, b, theta) a^2 b^2 sin(theta) dtheta db da.
    phi is called with broadcastable arrays (a[:,None,None], b[None,:,None],
    x[None,None,:]) where x = cos(theta). Returns (value, error_estimate).
    """
    if b_max is None:
        b_max = gaussian_tail_cutoff(t)

    def _run(na_, nb_, nt_):
        (a, wa), (b, wb), (x, wx) = _pc_grid(a_max, b_max, na_, nb_, nt_)
        total = 0.0
        wbx = (wb[:, None] * b[:, None] ** 2) * wx[None, :]
        for i0 in range(0, na_, chunk):
            sl = slice(i0, min(i0 + chunk, na_))
            vals = phi(a[sl, None, None], b[None, :, None], x[None, None, :])
            inner = np.einsum("ijk,jk->i", np.asarray(vals, dtype=np.float64), wbx)
            total += float(np.sum(wa[sl] * a[sl] ** 2 * inner))
        return 8.0 * math.pi**2 * total

    value = _run(na, nb, ntheta)
    if check is None:
        return value, float("nan")
    low = _run(*check)
    return value, abs(value - low)


def integrate_ac(
    phi,
    t: float,
    *,
    h_max: float,
    y_max: float | None = None,
    nh: int = 96,
    ny: int = 96,
    check: tuple | None = (64, 64),
):
    """Integrate over the complexified flat (H, Y) in R x R.

    phi is called with broadcastable arrays (H[:,None], Y[None,:]) over the
    full plane [-h_max, h_max] x [-y_max, y_max]. Returns (value, estimate).
    """
    if y_max is None:
        y_max = gaussian_tail_cutoff(t)

    def _run(nh_, ny_):
        H, wH = gl_nodes(-h_max, h_max, nh_)
        Y, wY = gl_nodes(-y_max, y_max, ny_)
        vals = np.asarray(phi(H[:, None], Y[None, :]), dtype=np.float64)
        return float(wH @ vals @ wY)

    value = _run(nh, ny)
    if check is None:
        return value, float("nan")
    low = _run(*check)
    return value, abs(value - low)
