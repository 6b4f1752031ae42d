"""Heat kernels and heat semigroups, evaluable at complex radii.

The engine underneath everything is the one-dimensional Gaussian convolution
along the real line,

    (E_t h)(z) = (2 pi t)^{-1/2} int exp(-(z - s)^2 / 2t) h(s) ds,

which converges for every complex z and is entire in z, whether or not h is
analytic. A radial function u on R^3 evolves through the odd line function
h(s) = s*u(s):

    (E_t^3 u)(w) = (1/w) (E_t h)(w),

even in w, hence a function of the squared radius w^2. Folding the odd
symmetry gives the form actually computed,

    (E_t^3 u)(w) = (2 pi t)^{-1/2} (2/t) int_0^inf s^2 u(s)
                   exp(-(w^2 + s^2)/2t) sinh(w s / t) / (w s / t) ds,

which is manifestly even in w, finite at w = 0, and free of square-root
branches. Three evaluation regimes keep it stable at every magnitude:
a short even series for small |ws/t|, the direct product for moderate
arguments, and a difference of two single Gaussians when sinh would
overflow. A `damp` exponent is folded into every exponential so that
quantities like (E_t^3 u)(ib) * exp(-b^2/2t), which pair enormous growth
against an enormous weight, are formed without large intermediates.

Sums run in fixed order; all evaluators are immutable after construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy.interpolate import CubicSpline

from . import rootsys
from .quad import gl_nodes, panel_nodes, QuadratureError
from .specfun import _even_series, sinhc_real

_SMALL_Z = 0.5  # even series below this |w s / t|
_BIG_RE_Z = 300.0  # difference-of-Gaussians form above this |Re(w s / t)|
_SUPPORT_LOG_TAIL = 55.0  # exp(-55) ~ 1.3e-24 relative mass dropped at windows


class TruncationError(RuntimeError):
    """A lattice or mode series was cut before its terms became negligible."""


class InterpolationRangeError(ValueError):
    """A sampled profile was queried between its grid end and its declared support."""


# ---------------------------------------------------------------------------
# radial profiles


class HeatSource(NamedTuple):
    """Integrand data for the exponential-coordinates heat integral."""

    fn: Callable
    support: float
    gauss: tuple[float, float] | None  # (amplitude, width) when fn is exactly that Gaussian


class RadialProfile:
    """A radial function of geodesic distance, closed-form or sampled.

    Closed-form families:
      - "gaussian-over-delta": f(r) = amplitude * exp(-r^2/(2 width)) / delta(r)
        where delta is the Jacobian square root of the profile's space
        ("hyperbolic3": sinh r / r, "euclidean": 1). Multiplying back by delta
        recovers an exact Gaussian, which downstream evaluators exploit.
      - "spline-bump": amplitude * (1 - (r/radius)^2)^3 inside the radius,
        zero outside; C^2 across the support edge, smooth and even at 0.

    Sampled profiles interpolate a grid with a clamped cubic spline (zero
    slope at r = 0, so the even extension through 0 stays smooth) and vanish
    beyond their support radius. Values are immutable after construction.
    """

    def __init__(self, kind, family=None, *, amplitude=1.0, width=None, radius=None,
                 space="hyperbolic3", nodes=None, values=None, support_radius=None):
        self.kind = kind
        self.family = family
        self.amplitude = float(amplitude)
        self.width = width
        self.radius = radius
        self.space = space
        self._spline = None
        if kind == "sampled":
            nodes = np.asarray(nodes, dtype=np.float64)
            values = np.asarray(values, dtype=np.float64)
            if nodes.ndim != 1 or nodes.shape != values.shape or nodes[0] != 0.0:
                raise ValueError("sampled profile needs matching 1-D grids starting at 0")
            if np.any(np.diff(nodes) <= 0):
                raise ValueError("sampled nodes must be strictly increasing")
            nodes.flags.writeable = False
            values.flags.writeable = False
            self.nodes = nodes
            self.values = values
            self.support_radius = float(nodes[-1] if support_radius is None else support_radius)
            self._spline = CubicSpline(nodes, values, bc_type=((1, 0.0), (2, 0.0)))
        elif kind == "closed-form":
            if family == "gaussian-over-delta":
                if width is None or width <= 0:
                    raise ValueError("gaussian-over-delta needs a positive width")
                if space not in ("hyperbolic3", "euclidean"):
                    raise ValueError("space must be 'hyperbolic3' or 'euclidean'")
                self.support_radius = math.inf
            elif family == "spline-bump":
                if radius is None or radius <= 0:
                    raise ValueError("spline-bump needs a positive radius")
                self.support_radius = float(radius)
            else:
                raise ValueError(f"unknown closed-form family {family!r}")
        else:
            raise ValueError(f"unknown profile kind {kind!r}")

    # constructors ----------------------------------------------------------
    @classmethod
    def gaussian_over_delta(cls, width, amplitude=1.0, space="hyperbolic3"):
        return cls("closed-form", "gaussian-over-delta",
                   amplitude=amplitude, width=float(width), space=space)

    @classmethod
    def spline_bump(cls, radius=2.0, amplitude=1.0):
        return cls("closed-form", "spline-bump", amplitude=amplitude, radius=float(radius))

    @classmethod
    def sampled(cls, nodes, values, support_radius=None):
        return cls("sampled", nodes=nodes, values=values, support_radius=support_radius)

    # evaluation -------------------------------------------------------------
    def __call__(self, r):
        r = np.abs(np.asarray(r, dtype=np.float64))
        scalar = r.ndim == 0
        r = np.atleast_1d(r)
        if self.kind == "sampled":
            out = np.zeros_like(r)
            grid_end = self.nodes[-1]
            if self.support_radius > grid_end and np.any((r > grid_end) & (r <= self.support_radius)):
                raise InterpolationRangeError(
                    "query beyond the sampled grid but inside the declared support")
            inside = r <= min(grid_end, self.support_radius)
            out[inside] = self._spline(r[inside])
        elif self.family == "gaussian-over-delta":
            out = self.amplitude * np.exp(-0.5 * r * r / self.width)
            if self.space == "hyperbolic3":
                out = out / sinhc_real(r)
        else:  # spline-bump
            u = r / self.radius
            out = np.where(u <= 1.0, self.amplitude * np.maximum(1.0 - u * u, 0.0) ** 3, 0.0)
        return float(out[0]) if scalar else out

    def effective_radius(self, log_tail: float = _SUPPORT_LOG_TAIL) -> float:
        """Radius beyond which the profile (times delta) is numerically dead."""
        if self.kind == "sampled" or self.family == "spline-bump":
            return float(self.support_radius)
        return math.sqrt(2.0 * self.width * log_tail)

    def heat_source(self, spec: rootsys.RootSystemSpec) -> HeatSource:
        """The function delta * f fed to the 3-D heat evaluator, with metadata."""
        hyper = _is_unit_rank_one(spec)
        if not hyper and not (spec.is_empty and spec.rank == 3):
            raise ValueError("3-D evaluators support the empty rank-3 system and "
                             "the unit single-root rank-1 system only")
        if self.family == "gaussian-over-delta":
            want = "hyperbolic3" if hyper else "euclidean"
            if self.space != want:
                raise ValueError(f"profile was built for space {self.space!r}, "
                                 f"root system implies {want!r}")
            amp, width = self.amplitude, self.width
            fn = lambda r: amp * np.exp(-0.5 * np.square(r) / width)
            return HeatSource(fn, self.effective_radius(), (amp, width))
        if hyper:
            fn = lambda r: np.asarray(self(r)) * sinhc_real(r)
        else:
            fn = lambda r: np.asarray(self(r))
        return HeatSource(fn, self.effective_radius(), None)


def _is_unit_rank_one(spec: rootsys.RootSystemSpec) -> bool:
    if spec.rank != 1 or len(spec.positive_roots) != 1:
        return False
    a = spec.positive_roots[0][0]
    return abs(abs(a) - 1.0) < 1e-12


# ---------------------------------------------------------------------------
# the stable odd-kernel machinery


def _panel_layout(support: float, t: float, max_im: float, order: int):
    width = 0.35 + 0.45 * math.sqrt(t)
    if max_im > 0:
        width = min(width, 0.58 * order * t / max_im)
    n_panels = max(1, int(math.ceil(support / width)))
    if n_panels * order > 400_000:
        raise QuadratureError(f"node budget exceeded: {n_panels} panels of order {order}")
    return n_panels


class RadialHeatEvaluator:
    """Heat evolution of a radial function on R^3 at complex squared radius.

    value_w2(w2, damp) returns (E_t^3 u)(w) * exp(-damp). Pass damp so the
    total exponent stays bounded (for points with |Im w| <= b under a weight
    exp(-b^2/2t), damp = b^2/2t keeps every intermediate <= O(1) in exponent).
    max_im declares the largest |Im w| the evaluator must resolve; it sets
    the node density of the fixed panel rule.
    """

    def __init__(self, source: HeatSource, t: float, *, max_im: float = 0.0,
                 order: int = 12, self_check: bool = True):
        if t <= 0:
            raise ValueError("t must be positive")
        self.t = float(t)
        self.source = source
        self.max_im = float(max_im)
        self.order = int(order)
        self.gauss = source.gauss
        if self.gauss is not None:
            amp, width = self.gauss
            self._amp3 = amp * (width / (width + t)) ** 1.5
            self._den = 2.0 * (width + t)
            return
        if not math.isfinite(source.support):
            raise ValueError("quadrature-mode sources need finite support")
        S = float(source.support)
        n_panels = _panel_layout(S, t, max_im, order)
        s, v = panel_nodes(0.0, S, n_panels, order)
        u0 = np.asarray(source.fn(s), dtype=np.float64)
        inv2t = 0.5 / t
        pref = 1.0 / math.sqrt(2.0 * math.pi * t)
        self._s = s
        self._smax = S
        self._panel_width = S / n_panels
        self._n_panels = n_panels
        # d_j: weights for sum d_j exp(-(w^2+s^2)/2t) sinh(w s/t); value = pref*(.)*2/w... folded below
        self._d = v * s * u0 * np.exp(-s * s * inv2t)
        self._coeff_noexp = pref * 2.0 * v * s * s * u0 / t        # for the big branch
        self._coeffE = self._coeff_noexp * np.exp(-s * s * inv2t)  # series/mid/sinc branches
        self._pref = pref
        self._offsets = s[: order] if n_panels else s  # node offsets within the first panel
        self._dmat = self._d.reshape(n_panels, order)
        if self_check:
            self._self_check()

    # -- public -------------------------------------------------------------
    def value_w2(self, w2, damp=0.0):
        w2b, dampb = np.broadcast_arrays(np.asarray(w2, dtype=np.complex128),
                                         np.asarray(damp, dtype=np.float64))
        shape = w2b.shape
        w2f = w2b.ravel()
        dampf = dampb.ravel()
        if self.gauss is not None:
            out = self._amp3 * np.exp(-w2f / self._den - dampf)
            return out.reshape(shape)
        w = np.sqrt(w2f)
        out = np.empty_like(w2f)
        tiny = np.abs(w) * self._smax < 1e-6 * self.t
        if tiny.any():
            out[tiny] = self._direct(w[tiny], w2f[tiny], dampf[tiny])
        rest = ~tiny
        if rest.any():
            wr = w[rest]
            safe = np.max(np.abs(wr.real)) * self._smax / self.t < 650.0
            if safe and wr.size * self._s.size >= 2_000_000:
                out[rest] = self._factorized(wr, w2f[rest], dampf[rest])
            else:
                out[rest] = self._direct(wr, w2f[rest], dampf[rest])
        return out.reshape(shape)

    def damped_imaginary(self, b):
        """value at w = i b multiplied by exp(-b^2/2t); real for real sources."""
        b = np.atleast_1d(np.asarray(b, dtype=np.float64))
        if self.gauss is not None:
            width = self.gauss[1]
            expo = -b * b * width / (2.0 * self.t * (width + self.t))
            return self._amp3 * np.exp(expo)
        out = np.empty_like(b)
        scale = 1.0 / (math.pi * self.t)
        for i0 in range(0, b.size, 2048):
            sl = slice(i0, min(i0 + 2048, b.size))
            M = np.sinc(np.outer(b[sl], self._s) * scale)
            out[sl] = M @ self._coeffE
        return out

    def real_slice(self, r):
        r = np.asarray(r, dtype=np.float64)
        return self.value_w2((r * r).astype(np.complex128)).real

    def imaginary_series(self):
        """(s_j, c_j) with damped_imaginary(b) = sum c_j sin(b s_j/t)/(b s_j/t)."""
        if self.gauss is not None:
            return None
        return self._s, self._coeffE

    def fiber_tail(self, b1: float, b2: float) -> float:
        """int_{b1}^{b2} b^2 damped_imaginary(b) db, integrated exactly in b.

        Uses the closed antiderivative of b sin(b s/t) per node (quadrature
        mode) or of b^2 exp(-beta b^2) (Gaussian mode).
        """
        if self.gauss is not None:
            width = self.gauss[1]
            beta = width / (2.0 * self.t * (width + self.t))
            upper = 0.0 if math.isinf(b2) else _gauss_b2_tail(beta, b2)
            return self._amp3 * (_gauss_b2_tail(beta, b1) - upper)
        lam = self._s / self.t

        def antider(B):
            x = lam * B
            return (np.sin(x) - x * np.cos(x)) / (lam * lam)

        return float(np.sum(self._coeffE / lam * (antider(b2) - antider(b1))))

    # -- internals ------------------------------------------------------------
    def _direct(self, w, w2, damp):
        J = self._s.size
        out = np.empty(w.shape, dtype=np.complex128)
        invt = 1.0 / self.t
        inv2t = 0.5 / self.t
        for i0 in range(0, w.size, 4096):
            sl = slice(i0, min(i0 + 4096, w.size))
            wb = w[sl][:, None]
            A = np.exp(-w2[sl] * inv2t - damp[sl])[:, None]
            Z = wb * (self._s[None, :] * invt)
            K = np.empty((wb.shape[0], J), dtype=np.complex128)
            B = A * self._coeffE[None, :]
            az = np.abs(Z)
            small = az < _SMALL_Z
            big = np.abs(Z.real) > _BIG_RE_Z
            mid = ~(small | big)
            if small.any():
                zz = Z[small]
                K[small] = B[small] * _even_series(zz * zz)
            if mid.any():
                zz = Z[mid]
                K[mid] = B[mid] * (np.sinh(zz) / zz)
            if big.any():
                W2 = np.broadcast_to(w2[sl][:, None], Z.shape)[big]
                D = np.broadcast_to(damp[sl][:, None], Z.shape)[big]
                S = np.broadcast_to(self._s[None, :], Z.shape)[big]
                Wb = np.broadcast_to(wb, Z.shape)[big]
                E1 = np.exp(-(Wb - S) ** 2 * inv2t - D)
                E2 = np.exp(-(Wb + S) ** 2 * inv2t - D)
                C = np.broadcast_to(self._coeff_noexp[None, :], Z.shape)[big]
                K[big] = C * (E1 - E2) / (2.0 * Z[big])
            out[sl] = K.sum(axis=1)
        return out

    def _factorized(self, w, w2, damp):
        invt = 1.0 / self.t
        inv2t = 0.5 / self.t
        out = np.empty(w.shape, dtype=np.complex128)
        for i0 in range(0, w.size, 65536):
            sl = slice(i0, min(i0 + 65536, w.size))
            q = w[sl] * invt
            A = np.exp(-w2[sl] * inv2t - damp[sl]) * self._pref
            Eo = np.exp(np.outer(q, self._offsets))
            Eo_m = 1.0 / Eo
            r = np.exp(q * self._panel_width)
            r_m = 1.0 / r
            cur_p = np.ones_like(q)
            cur_m = np.ones_like(q)
            Sp = np.zeros_like(q)
            Sm = np.zeros_like(q)
            for p in range(self._n_panels):
                row = self._dmat[p]
                Sp += cur_p * (Eo @ row)
                Sm += cur_m * (Eo_m @ row)
                cur_p = cur_p * r
                cur_m = cur_m * r_m
            out[sl] = A * (Sp - Sm) / w[sl]
        return out

    def _self_check(self):
        probe = RadialHeatEvaluator(self.source, self.t, max_im=self.max_im,
                                    order=self.order + 6, self_check=False)
        mi = max(self.max_im, 1e-3)
        S = self._smax
        w2s = np.array([0.0, (0.35 * S) ** 2, (0.85 * S) ** 2,
                        -((0.6 * mi) ** 2), -(mi ** 2),
                        (0.4 * S) ** 2 - (0.5 * mi) ** 2 + 0.7j * S * mi],
                       dtype=np.complex128)
        damp = np.maximum(0.0, -w2s.real) * (0.5 / self.t)
        mine = self.value_w2(w2s, damp)
        theirs = probe.value_w2(w2s, damp)
        scale = np.max(np.abs(theirs)) + 1e-300
        err = np.max(np.abs(mine - theirs)) / scale
        if err > 1e-9:
            raise QuadratureError(f"heat evaluator self-check failed: rel {err:.2e}",
                                  value=None, estimate=err)


def _gauss_b2_tail(beta: float, B: float) -> float:
    """int_B^inf b^2 exp(-beta b^2) db."""
    rb = math.sqrt(beta)
    return (B * math.exp(-beta * B * B) / (2.0 * beta)
            + math.sqrt(math.pi) * math.erfc(rb * B) / (4.0 * beta * rb))


class LineHeatEvaluator:
    """Heat evolution of a function on a real interval, at complex arguments."""

    def __init__(self, fn, t: float, window, *, max_im: float = 0.0,
                 order: int = 12, self_check: bool = True):
        if t <= 0:
            raise ValueError("t must be positive")
        self.t = float(t)
        lo, hi = float(window[0]), float(window[1])
        self.window = (lo, hi)
        self.max_im = float(max_im)
        n_panels = _panel_layout(hi - lo, t, max_im, order)
        s, v = panel_nodes(lo, hi, n_panels, order)
        self._s = s
        self._c = v * np.asarray(fn(s), dtype=np.float64) / math.sqrt(2.0 * math.pi * t)
        if self_check:
            probe = LineHeatEvaluator(fn, t, window, max_im=max_im,
                                      order=order + 6, self_check=False)
            zs = np.array([0.0, 0.5 * hi, 1j * max(max_im, 1e-3),
                           0.3 * hi + 0.8j * max(max_im, 1e-3)])
            damp = (zs.imag ** 2) * 0.5 / t
            a, b = self.value(zs, damp), probe.value(zs, damp)
            scale = np.max(np.abs(b)) + 1e-300
            if np.max(np.abs(a - b)) / scale > 1e-9:
                raise QuadratureError("line heat evaluator self-check failed")

    def value(self, z, damp=0.0):
        zb, dampb = np.broadcast_arrays(np.asarray(z, dtype=np.complex128),
                                        np.asarray(damp, dtype=np.float64))
        shape = zb.shape
        zf, dampf = zb.ravel(), dampb.ravel()
        inv2t = 0.5 / self.t
        out = np.empty_like(zf)
        for i0 in range(0, zf.size, 4096):
            sl = slice(i0, min(i0 + 4096, zf.size))
            E = np.exp(-(zf[sl][:, None] - self._s[None, :]) ** 2 * inv2t
                       - dampf[sl][:, None])
            out[sl] = E @ self._c
        return out.reshape(shape)


class OddLineHeatEvaluator:
    """Heat evolution of an odd line function h, via nodes on s > 0 only.

    value(z, damp) = (E_t h)(z) * exp(-damp); odd and entire in z.
    """

    def __init__(self, fn_pos, t: float, support: float, *, max_im: float = 0.0,
                 order: int = 12, self_check: bool = True):
        self.t = float(t)
        n_panels = _panel_layout(support, t, max_im, order)
        s, v = panel_nodes(0.0, support, n_panels, order)
        self._s = s
        h = np.asarray(fn_pos(s), dtype=np.float64)
        inv2t = 0.5 / t
        self._d = v * h * np.exp(-s * s * inv2t) / math.sqrt(2.0 * math.pi * t)
        self._coeff_noexp = v * h / math.sqrt(2.0 * math.pi * t)
        self.max_im = float(max_im)
        if self_check:
            probe = OddLineHeatEvaluator(fn_pos, t, support, max_im=max_im,
                                         order=order + 6, self_check=False)
            zs = np.array([0.2, 0.5 * support, 1j * max(max_im, 1e-3),
                           0.3 * support + 0.7j * max(max_im, 1e-3)])
            damp = (zs.imag ** 2) * 0.5 / t
            a, b = self.value(zs, damp), probe.value(zs, damp)
            if np.max(np.abs(a - b)) / (np.max(np.abs(b)) + 1e-300) > 1e-9:
                raise QuadratureError("odd line evaluator self-check failed")

    def value(self, z, damp=0.0):
        zb, dampb = np.broadcast_arrays(np.asarray(z, dtype=np.complex128),
                                        np.asarray(damp, dtype=np.float64))
        shape = zb.shape
        zf, dampf = zb.ravel(), dampb.ravel()
        invt = 1.0 / self.t
        inv2t = 0.5 / self.t
        out = np.empty_like(zf)
        for i0 in range(0, zf.size, 4096):
            sl = slice(i0, min(i0 + 4096, zf.size))
            zc = zf[sl][:, None]
            A = np.exp(-zf[sl] ** 2 * inv2t - dampf[sl])[:, None]
            Z = zc * (self._s[None, :] * invt)
            K = np.empty_like(Z)
            big = np.abs(Z.real) > _BIG_RE_Z
            sm = ~big
            if sm.any():
                K[sm] = (A * (2.0 * self._d)[None, :])[sm] * np.sinh(Z[sm])
            if big.any():
                S = np.broadcast_to(self._s[None, :], Z.shape)[big]
                Zb = np.broadcast_to(zc, Z.shape)[big]
                D = np.broadcast_to(dampf[sl][:, None], Z.shape)[big]
                C = np.broadcast_to(self._coeff_noexp[None, :], Z.shape)[big]
                K[big] = C * (np.exp(-(Zb - S) ** 2 * inv2t - D)
                              - np.exp(-(Zb + S) ** 2 * inv2t - D))
            out[sl] = K.sum(axis=1)
        return out.reshape(shape)


# ---------------------------------------------------------------------------
# the radial extension object and the operation wrappers


@dataclass(frozen=True)
class HoloRadialExtension:
    """The entire function G(w) = exp(-ct/2) (E_t^3 (delta f))(w).

    G is the product of the heat-evolved function with the Jacobian square
    root: on the real slice F(exp X) = G(|X|)/delta(|X|), and off it the
    product is the only thing ever evaluated. Restricted to real w it is real
    for real profiles.
    """

    t: float
    c: float
    profile: RadialProfile
    spec: rootsys.RootSystemSpec
    evaluator: RadialHeatEvaluator

    def value_w2(self, w2, damp=0.0):
        return math.exp(-0.5 * self.c * self.t) * self.evaluator.value_w2(w2, damp)

    def fiber_damped(self, b):
        """G(ib) exp(-b^2/2t): the inversion-fiber integrand, overflow-free."""
        return math.exp(-0.5 * self.c * self.t) * self.evaluator.damped_imaginary(b)

    def fiber_tail(self, b1, b2):
        return math.exp(-0.5 * self.c * self.t) * self.evaluator.fiber_tail(b1, b2)

    def real_slice(self, r):
        return math.exp(-0.5 * self.c * self.t) * self.evaluator.real_slice(r)

    def function_values(self, r):
        """F on the real slice: G(r)/delta(r)."""
        r = np.asarray(r, dtype=np.float64)
        den = sinhc_real(r) if _is_unit_rank_one(self.spec) else np.ones_like(r)
        return self.real_slice(r) / den


def sb_radial_extension(f: RadialProfile, t: float, spec: rootsys.RootSystemSpec,
                        *, max_im: float | None = None, force_quadrature: bool = False,
                        order: int = 12, self_check: bool = True) -> HoloRadialExtension:
    """Heat-evolve a radial profile and package its entire radial extension."""
    src = f.heat_source(spec)
    if force_quadrature and src.gauss is not None:
        src = HeatSource(src.fn, src.support, None)
    if max_im is None:
        from .quad import gaussian_tail_cutoff

        max_im = gaussian_tail_cutoff(t) + 1.0
    ev = RadialHeatEvaluator(src, t, max_im=max_im, order=order, self_check=self_check)
    return HoloRadialExtension(t=t, c=rootsys.c_constant(spec), profile=f,
                               spec=spec, evaluator=ev)


def heat1d_complex(h, t: float, z, *, window, max_im: float | None = None,
                   order: int = 12):
    """One-dimensional heat evolution of h at complex z (convolution on the line)."""
    z_arr = np.asarray(z, dtype=np.complex128)
    if max_im is None:
        max_im = float(np.max(np.abs(z_arr.imag))) if z_arr.size else 0.0
    ev = LineHeatEvaluator(h, t, window, max_im=max_im, order=order)
    out = ev.value(z_arr)
    return complex(out) if out.shape == () else out


def heat3d_radial_complex(u0, t: float, w2, *, support: float,
                          gauss: tuple[float, float] | None = None,
                          max_im: float | None = None, order: int = 12):
    """Radial heat evolution on R^3 at complex squared radius w2.

    Returns the raw value; for deeply imaginary radii pair this with an
    explicit weight through RadialHeatEvaluator.value_w2(w2, damp) instead,
    or the exponential growth exp(-Re w2 / 2t) will overflow.
    """
    w2_arr = np.asarray(w2, dtype=np.complex128)
    if max_im is None:
        w = np.sqrt(w2_arr)
        max_im = float(np.max(np.abs(w.imag))) if w.size else 0.0
    ev = RadialHeatEvaluator(HeatSource(u0, support, gauss), t,
                             max_im=max_im, order=order)
    out = ev.value_w2(w2_arr)
    return complex(out) if out.shape == () else out


# ---------------------------------------------------------------------------
# hyperbolic 3-space heat kernel and fiber measures


def h3_heat_kernel(r, t: float):
    """Heat kernel of hyperbolic 3-space at geodesic radius r (density w.r.t.
    Riemannian volume): exp(-t/2) (2 pi t)^{-3/2} (r / sinh r) exp(-r^2/2t)."""
    r = np.asarray(r, dtype=np.float64)
    pref = math.exp(-0.5 * t) * (2.0 * math.pi * t) ** -1.5
    return pref * np.exp(-0.5 * r * r / t) / sinhc_real(r)


def h3_radial_convolve(kernel, f, r_out, *, rho_max: float,
                       n_rho: int = 400, n_u: int = 64):
    """Convolve a radial kernel with a radial function on H^3.

    (k * f)(r) = 2 pi int_0^rho_max sinh^2(rho) f(rho)
                 int_{-1}^{1} k(d(r, rho, u)) du drho,
    with d from the hyperbolic law of cosines. Vectorized over r_out.
    """
    r_out = np.atleast_1d(np.asarray(r_out, dtype=np.float64))
    rho, w_rho = gl_nodes(0.0, rho_max, n_rho)
    u, w_u = gl_nodes(-1.0, 1.0, n_u)
    f_rho = np.asarray(f(rho), dtype=np.float64)
    out = np.empty_like(r_out)
    ch = np.cosh(rho)[None, :, None]
    sh = np.sinh(rho)[None, :, None]
    for i0 in range(0, r_out.size, 16):
        sl = slice(i0, min(i0 + 16, r_out.size))
        rr = r_out[sl][:, None, None]
        arg = np.cosh(rr) * ch - np.sinh(rr) * sh * u[None, None, :]
        d = np.arccosh(np.maximum(arg, 1.0))
        kv = kernel(d)
        inner = kv @ w_u
        out[sl] = 2.0 * math.pi * (inner * (np.sinh(rho) ** 2 * f_rho)[None, :]) @ w_rho
    return out


def gangolli_fiber_density(Y, t: float, spec: rootsys.RootSystemSpec):
    """Density (w.r.t. Lebesgue measure on the fiber) of the noncompact-space
    heat kernel measure pulled back through the exponential map:
    exp(-ct/2) delta(Y) exp(-|Y|^2/2t) / (2 pi t)^{d/2}."""
    Y = np.asarray(Y, dtype=np.float64)
    if _is_unit_rank_one(spec):
        d = 3
        if Y.shape[-1] != 3:
            raise ValueError("rank-one fiber points live in R^3")
        b = np.linalg.norm(Y, axis=-1)
        jac = sinhc_real(b)
    elif spec.is_empty:
        d = spec.rank
        if Y.shape[-1] != d:
            raise ValueError(f"fiber points must live in R^{d}")
        b = np.linalg.norm(Y, axis=-1)
        jac = np.ones_like(b)
    else:
        raise ValueError("only the empty and unit rank-one systems are supported")
    c = rootsys.c_constant(spec)
    pref = math.exp(-0.5 * c * t) * (2.0 * math.pi * t) ** (-0.5 * d)
    return pref * jac * np.exp(-0.5 * b * b / t)


def _sincc_real(b):
    return np.sinc(np.asarray(b, dtype=np.float64) / math.pi)


def sigma_density(Y, t: float):
    """Signed fiber density exp(ct/2) (sin|Y|/|Y|) exp(-|Y|^2/2t)/(2 pi t)^{3/2},
    c = 1: the unwrapped dual heat kernel on the tangent space R^3."""
    Y = np.asarray(Y, dtype=np.float64)
    b = np.linalg.norm(Y, axis=-1) if Y.shape[-1:] == (3,) else np.abs(Y)
    return sigma_radial_density(b, t)


def sigma_radial_density(b, t: float):
    """sigma density as a function of the fiber radius b = |Y|."""
    b = np.asarray(b, dtype=np.float64)
    pref = math.exp(0.5 * t) * (2.0 * math.pi * t) ** -1.5
    return pref * _sincc_real(b) * np.exp(-0.5 * b * b / t)


@dataclass(frozen=True)
class SignedMeasureSigma:
    """The signed measure on R^3 whose push-forward under the 3-sphere
    exponential map is the 3-sphere heat kernel measure. Its density is
    negative exactly on the shells where sin|Y| < 0, yet its total mass is 1."""

    t: float
    c: float = 1.0

    def density(self, Y):
        return sigma_density(Y, self.t)

    def radial_density(self, b):
        return sigma_radial_density(b, self.t)

    def total_mass(self, *, log_tail: float = 60.0, n: int = 2000) -> float:
        b_max = math.sqrt(2.0 * self.t * log_tail) + 2.0 * math.pi
        b, w = gl_nodes(0.0, b_max, n)
        return float(np.sum(w * 4.0 * math.pi * b * b * self.radial_density(b)))


# ---------------------------------------------------------------------------
# the two 3-sphere heat kernel series


def _theta_interior(theta: float) -> float:
    return min(theta, math.pi - theta)


def _series_with_edge_guard(fn, theta: float, t: float):
    """Evaluate fn(theta) with quadratic extrapolation within 1e-6 of 0 or pi."""
    edge = 1e-6
    if _theta_interior(theta) >= edge:
        return fn(theta)
    base = 0.0 if theta < 0.5 * math.pi else math.pi
    sgn = 1.0 if theta < 0.5 * math.pi else -1.0
    h = 2e-3
    pts = [base + sgn * h, base + sgn * 2 * h, base + sgn * 3 * h]
    vals = [fn(p) for p in pts]
    # quadratic extrapolation to theta (Lagrange)
    out = 0.0
    for i, (pi_, vi) in enumerate(zip(pts, vals)):
        li = 1.0
        for j, pj in enumerate(pts):
            if j != i:
                li *= (theta - pj) / (pi_ - pj)
        out += li * vi
    return out


def s3_heat_theta(theta: float, t: float, n_lattice: int) -> float:
    """3-sphere heat kernel at polar angle theta via the wrapped-Gaussian series:
    exp(t/2)(2 pi t)^{-3/2} sum_{|n|<=N} ((theta+2 pi n)/sin theta)
    exp(-(theta+2 pi n)^2 / 2t)."""
    if t <= 0:
        raise ValueError("t must be positive")
    if n_lattice < 1:
        raise ValueError("n_lattice must be >= 1")

    def _eval(th):
        pref = math.exp(0.5 * t) * (2.0 * math.pi * t) ** -1.5
        sin_th = math.sin(th)
        total = 0.0
        # smallest-magnitude terms first: largest |n| down to 0
        for k in range(n_lattice, 0, -1):
            for n in (k, -k):
                x = th + 2.0 * math.pi * n
                total += x * math.exp(-0.5 * x * x / t)
        total += th * math.exp(-0.5 * th * th / t)
        omitted = max(
            abs(x) * math.exp(-0.5 * x * x / t)
            for x in (th + 2.0 * math.pi * (n_lattice + 1),
                      th - 2.0 * math.pi * (n_lattice + 1))
        )
        if omitted > 1e-15 * abs(total) + 1e-300:
            raise TruncationError(
                f"lattice sum truncated too early: next term {omitted:.2e}")
        return pref * total / sin_th

    return _series_with_edge_guard(_eval, float(theta), t)


def s3_heat_spectral(theta: float, t: float, n_modes: int) -> float:
    """3-sphere heat kernel via its spectral series:
    sum_{n=1}^{M} (n / 2 pi^2) exp(-(n^2-1) t/2) sin(n theta)/sin(theta)."""
    if t <= 0:
        raise ValueError("t must be positive")
    if n_modes < 1:
        raise ValueError("n_modes must be >= 1")

    def _eval(th):
        sin_th = math.sin(th)
        total = 0.0
        for n in range(n_modes, 0, -1):
            total += n * math.exp(-0.5 * (n * n - 1) * t) * math.sin(n * th)
        m = n_modes + 1
        omitted = m * math.exp(-0.5 * (m * m - 1) * t)
        if omitted > 1e-15 * abs(total) + 1e-300:
            raise TruncationError(
                f"spectral sum truncated too early: next term {omitted:.2e}")
        return total / (2.0 * math.pi ** 2 * sin_th)

    return _series_with_edge_guard(_eval, float(theta), t)


def pushforward_sigma(theta: float, t: float, n_lattice: int) -> float:
    """Push the signed fiber measure through the exponential map: at a point of
    polar angle theta, sum sigma-density(Y)/j(Y) over all fiber points Y with
    exp(Y) landing there, i.e. |Y| = |theta + 2 pi n|."""
    if n_lattice < 1:
        raise ValueError("n_lattice must be >= 1")

    def _eval(th):
        total = 0.0
        # each fiber point contributes its signed density divided by the
        # exponential-map Jacobian j = (sin b / b)^2, in measure form: one
        # factor of (sin b / b) cancels against the density's own.
        for k in range(n_lattice, 0, -1):
            for n in (k, -k):
                b = abs(th + 2.0 * math.pi * n)
                total += float(sigma_radial_density(b, t)) / float(_sincc_real(b))
        b0 = abs(th)
        total += float(sigma_radial_density(b0, t)) / float(_sincc_real(b0))
        nxt = abs(th - 2.0 * math.pi * (n_lattice + 1))
        omitted = abs(float(sigma_radial_density(nxt, t)) / float(_sincc_real(nxt)))
        if omitted > 1e-15 * abs(total) + 1e-300:
            raise TruncationError("lattice sum truncated too early")
        return total

    return _series_with_edge_guard(_eval, float(theta), t)


def s3_lattice_truncation(t: float, theta: float = 0.5 * math.pi) -> int:
    """Smallest N whose first omitted wrapped-Gaussian term is below 1e-16 of
    the leading one."""
    lead = abs(theta) * math.exp(-0.5 * theta * theta / t) + 1e-300
    for N in range(1, 200):
        nxt = (2.0 * math.pi * (N + 1) + math.pi) * math.exp(
            -0.5 * (2.0 * math.pi * (N + 1) - math.pi) ** 2 / t)
        if nxt < 1e-16 * lead:
            return N
    raise TruncationError("no admissible lattice truncation below 200")


def s3_spectral_truncation(t: float) -> int:
    """Smallest M with M exp(-(M^2-1) t / 2) < 1e-16."""
    for M in range(1, 10000):
        if (M + 1) * math.exp(-0.5 * ((M + 1) ** 2 - 1) * t) < 1e-16:
            return M
    raise TruncationError("no admissible spectral truncation below 10000")
