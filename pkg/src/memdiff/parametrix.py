"""Fundamental solutions of the two backward equations by the parametrix method.

For each side the kernel splits as G = Z0 + Z1, where Z0 is the Gaussian
with diffusion frozen at the terminal point,

    Z0(s,x,t,y) = [2 pi b(t,y) (t-s)]^{-1/2} exp(-(y-x)^2 / (2 b(t,y) (t-s))),

and Z1 is the space-time convolution of Z0 with a correction density Q.  Q
is the Neumann series Q = sum_m K^(m) built from

    K^(1)(s,x,t,y) = (d/ds + L_s) Z0 = (b(s,x)-b(t,y))/2 * d2Z0/dx2
                                       + a(s,x) * dZ0/dx,

with K^(m+1) the space-time convolution of K^(1) with K^(m).  When the
drift vanishes and the diffusion is constant, K^(1) is identically zero and
G = Z0 exactly; that case is detected structurally and skipped.

The series is never materialized in four variables.  Everything the solver
needs is a "terminal functional" of Q (evaluation at a fixed terminal
point, integration of the terminal slice against a weight, or a space-time
integral against a coefficient), and each such functional u(sigma, w) =
functional[Q(sigma, w, ., .)] satisfies the same Volterra recursion as Q.
The functionals are iterated on a product grid, graded in time toward the
terminal anchor and regularized by the known power of (t - sigma), then
convolved with Z0 for field evaluation.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, replace

import numpy as np

from ._quadrature import singular_rule, window_nodes
from .errors import ConvergenceFailureError, TimeOrderError
from .problem import SideSpec


@dataclass(frozen=True)
class CorrectionQuadrature:
    """Discretization parameters for the correction-kernel machinery.

    n_sigma, n_w, gamma control the product grid of the cached tables;
    n_time and n_space the convolution quadratures (n_space is per panel of
    the Gaussian window); r_cut truncates space integrals at
    r_cut * sqrt(b_max * dt); depth and tol stop the Neumann iteration.
    """

    n_sigma: int = 24
    n_w: int = 48
    gamma: float = 2.0
    n_time: int = 12
    n_space: int = 10
    r_cut: float = 8.0
    depth: int = 8
    tol: float = 1e-8

    def refined(self, factor: int = 2) -> "CorrectionQuadrature":
        return replace(self, n_sigma=self.n_sigma * factor, n_w=self.n_w * factor,
                       n_time=self.n_time * factor, n_space=self.n_space * factor)


class PrincipalKernel:
    """Gaussian principal part Z0 of one side, with x-derivatives up to 2."""

    def __init__(self, side: SideSpec, index: int = 1):
        self.side = side
        self.index = index

    def __call__(self, s, x, t, y, p: int = 0):
        s, x, t, y = map(np.asarray, (s, x, t, y))
        dt = t - s
        if np.any(dt <= 0):
            raise TimeOrderError("principal kernel needs s < t")
        var = self.side.diffusion(t, y) * dt
        z = y - x
        g = np.exp(-z * z / (2.0 * var)) / np.sqrt(2.0 * math.pi * var)
        if p == 0:
            out = g
        elif p == 1:
            out = g * z / var
        elif p == 2:
            out = g * (z * z / var - 1.0) / var
        else:
            raise ValueError("derivative order must be 0, 1 or 2")
        return float(out) if out.ndim == 0 else out


def _principal_pieces(b_ty, s, x, t, y):
    """Z0, dZ0/dx, d2Z0/dx2 for a precomputed terminal diffusion value."""
    dt = t - s
    var = b_ty * dt
    z = y - x
    g = np.exp(-z * z / (2.0 * var)) / np.sqrt(2.0 * math.pi * var)
    return g, g * z / var, g * (z * z / var - 1.0) / var


class _CorrectionSource:
    """The generating kernel K^(1) = (d/ds + L_s) Z0, vectorized."""

    def __init__(self, side: SideSpec):
        self.side = side
        self._drift_null = side.drift.is_constant and side.drift.constant_value() == 0.0
        self._diff_const = side.diffusion.is_constant

    @property
    def is_null(self) -> bool:
        return self._drift_null and self._diff_const

    def __call__(self, s, x, t, y):
        b_ty = self.side.diffusion(t, y)
        _, gx, gxx = _principal_pieces(b_ty, s, x, t, y)
        out = 0.0
        if not self._diff_const:
            out = 0.5 * (self.side.diffusion(s, x) - b_ty) * gxx
        elif not self._drift_null:
            out = np.zeros(np.broadcast_shapes(np.shape(s), np.shape(x),
                                               np.shape(t), np.shape(y)))
        if not self._drift_null:
            out = out + self.side.drift(s, x) * gx
        return out


def _bilinear(g, pz, pw, clip_w=True):
    """Bilinear lookup on a regular grid with fractional indices pz, pw."""
    nz, nw = g.shape
    pz = np.clip(pz, 0.0, nz - 1.0)
    if clip_w:
        pw = np.clip(pw, 0.0, nw - 1.0)
    iz = np.minimum(pz.astype(int), nz - 2)
    iw = np.minimum(np.clip(pw, 0.0, nw - 1.0).astype(int), nw - 2)
    fz = pz - iz
    fw = np.clip(pw, 0.0, nw - 1.0) - iw
    out = ((1 - fz) * (1 - fw) * g[iz, iw] + fz * (1 - fw) * g[iz + 1, iw]
           + (1 - fz) * fw * g[iz, iw + 1] + fz * fw * g[iz + 1, iw + 1])
    if not clip_w:
        out = np.where((pw < 0.0) | (pw > nw - 1.0), 0.0, out)
    return out


class _Table:
    """One terminal functional of Q on a graded (sigma, w) product grid.

    Values are stored regularized: g = (t_anchor - sigma)^reg_pow * u, and
    interpolated bilinearly in (zeta, w) with zeta = ((t - sigma)/span)^(1/gamma)
    uniform over the rows.  Below the first row (sigma -> t_anchor) the
    regularized value is extended as a constant.  Used for the spatially
    smooth anchors (terminal-slice and space-time weights).
    """

    scaled = False

    def __init__(self, t_anchor, s_lo, w_lo, w_hi, reg_pow, quad):
        self.t_anchor = t_anchor
        self.s_lo = s_lo
        self.span = t_anchor - s_lo
        self.gamma = quad.gamma
        self.reg_pow = reg_pow
        n = quad.n_sigma
        self.zeta = (np.arange(1, n + 1)) / n
        self.sigma = t_anchor - self.span * self.zeta ** quad.gamma
        self.w = np.linspace(w_lo, w_hi, quad.n_w)
        self.g = np.zeros((n, quad.n_w))
        self.term_sups: list[float] = []

    def covers(self, s_lo, w_lo, w_hi) -> bool:
        return (self.s_lo <= s_lo + 1e-12 and self.w[0] <= w_lo + 1e-9
                and self.w[-1] >= w_hi - 1e-9)

    def nodes(self, k: int) -> np.ndarray:
        return self.w

    def _zeta_index(self, rho):
        zeta = ((self.t_anchor - rho) / self.span) ** (1.0 / self.gamma)
        return zeta * len(self.zeta) - 1.0

    def interp_reg(self, rho, v):
        pw = (v - self.w[0]) / (self.w[1] - self.w[0])
        return _bilinear(self.g, self._zeta_index(rho), pw)

    def eval(self, rho, v):
        """Raw functional values u(rho, v)."""
        rho = np.asarray(rho, dtype=float)
        return self.interp_reg(rho, v) * (self.t_anchor - rho) ** (-self.reg_pow)


class _ScaledTable(_Table):
    """Point-anchored table in self-similar coordinates.

    Iterated kernels evaluated at a fixed terminal point (t, y) concentrate
    around y on the scale sqrt(b (t - sigma)), so rows hold values on nodes
    y + xi * sqrt(b_ref (t - sigma)) with a fixed xi-grid.  In (zeta, xi)
    coordinates every series term is an O(1)-width smooth profile, which a
    plain product grid can interpolate.  Outside the xi-range the kernels
    have decayed: values are zero there.
    """

    scaled = True

    def __init__(self, t_anchor, s_lo, y, b_ref, reg_pow, quad):
        self.t_anchor = t_anchor
        self.s_lo = s_lo
        self.span = t_anchor - s_lo
        self.gamma = quad.gamma
        self.reg_pow = reg_pow
        self.y = y
        self.b_ref = b_ref
        n = quad.n_sigma
        self.zeta = (np.arange(1, n + 1)) / n
        self.sigma = t_anchor - self.span * self.zeta ** quad.gamma
        self.xi = np.linspace(-quad.r_cut, quad.r_cut, quad.n_w)
        self.g = np.zeros((n, quad.n_w))
        self.term_sups: list[float] = []

    def covers(self, s_lo, w_lo, w_hi) -> bool:
        return self.s_lo <= s_lo + 1e-12

    def nodes(self, k: int) -> np.ndarray:
        scale = math.sqrt(self.b_ref * (self.t_anchor - self.sigma[k]))
        return self.y + self.xi * scale

    def interp_reg(self, rho, v):
        scale = np.sqrt(self.b_ref * (self.t_anchor - rho))
        pw = ((v - self.y) / scale - self.xi[0]) / (self.xi[1] - self.xi[0])
        return _bilinear(self.g, self._zeta_index(rho), pw, clip_w=False)


class CorrectionKernel:
    """Neumann-series correction of one side, cached per terminal anchor.

    Supports three anchor families: 'point' tables hold the remainder
    Q - K^(1) at a fixed terminal point (the first series term is handled in
    closed form by the callers), 'final' tables hold the terminal-slice
    integral of Q against a weight, and 'spacetime' tables the space-time
    integral of Q against a coefficient.
    """

    def __init__(self, side: SideSpec, quad: CorrectionQuadrature | None = None,
                 index: int = 1):
        self.side = side
        self.index = index
        self.quad = quad or CorrectionQuadrature()
        self.source = _CorrectionSource(side)
        self.alpha = side.holder_exponent
        self._tables: dict = {}
        self._lock = threading.Lock()

    @property
    def is_null(self) -> bool:
        return self.source.is_null

    # -- grid helpers -----------------------------------------------------

    def _b_max(self, t_anchor, w_lo, w_hi) -> float:
        ss = np.linspace(0.0, t_anchor, 9)
        xs = np.linspace(w_lo, w_hi, 17)
        S, X = np.meshgrid(ss, xs, indexing="ij")
        return float(np.max(self.side.diffusion(S, X)))

    def _window(self, centers, scales):
        return window_nodes(centers, scales, self.quad.n_space, self.quad.r_cut)

    # -- table construction ------------------------------------------------

    def table(self, kind: str, key, t_anchor: float, s_lo: float,
              w_lo: float, w_hi: float, **ctx) -> _Table:
        cache_key = (kind, key, round(t_anchor, 12))
        with self._lock:
            tab = self._tables.get(cache_key)
            if tab is not None and tab.covers(s_lo, w_lo, w_hi):
                return tab
            if tab is not None:
                s_lo = min(s_lo, tab.s_lo)
                w_lo = min(w_lo, tab.w[0])
                w_hi = max(w_hi, tab.w[-1])
            tab = self._build(kind, t_anchor, s_lo, w_lo, w_hi, ctx)
            self._tables[cache_key] = tab
            return tab

    def _build(self, kind, t_anchor, s_lo, w_lo, w_hi, ctx) -> _Table:
        alpha = self.alpha
        b_max = self._b_max(t_anchor, w_lo, w_hi)
        if kind == "point":
            reg_pow = min(0.5 * (3.0 - 2.0 * alpha), 0.95)
            tab = _ScaledTable(t_anchor, s_lo, ctx["y"], b_max, reg_pow, self.quad)
        elif kind == "final":
            reg_pow = min(1.0 - 0.5 * alpha, 0.95)
            tab = _Table(t_anchor, s_lo, w_lo, w_hi, reg_pow, self.quad)
        elif kind == "spacetime":
            reg_pow = 0.0
            tab = _Table(t_anchor, s_lo, w_lo, w_hi, reg_pow, self.quad)
        else:
            raise ValueError(f"unknown table kind {kind!r}")
        first = self._first_term(kind, tab, b_max, ctx)
        reg = (t_anchor - tab.sigma)[:, None] ** reg_pow
        term = first * reg
        tab.g = term.copy()
        tab.term_sups = [float(np.max(np.abs(term)))]
        scale = max(tab.term_sups[0], 1e-300)
        for _ in range(1, self.quad.depth):
            term = self._apply_source(tab, term, b_max)
            tab.g += term
            sup = float(np.max(np.abs(term)))
            tab.term_sups.append(sup)
            if sup <= self.quad.tol * scale:
                break
        else:
            sups = tab.term_sups
            if len(sups) >= 2 and sups[-1] > sups[-2] and sups[-1] > self.quad.tol * scale:
                raise ConvergenceFailureError(
                    f"correction terms not decreasing at depth {self.quad.depth}: "
                    f"{sups[-2]:.3e} -> {sups[-1]:.3e}")
        return tab

    def _first_term(self, kind, tab, b_max, ctx) -> np.ndarray:
        t = tab.t_anchor
        out = np.zeros(tab.g.shape)
        for k, sig in enumerate(tab.sigma):
            wrow = tab.nodes(k)
            if kind == "final":
                weight = ctx["weight"]
                y, wy = self._window(wrow, math.sqrt(b_max * (t - sig)))
                vals = self.source(sig, wrow[:, None], t, y) * weight(y)
                out[k] = np.sum(vals * wy, axis=-1)
            elif kind == "spacetime":
                coeff = ctx["coeff"]
                tau, wt = singular_rule(sig, t, self.quad.n_time,
                                        left_exp=0.5 * self.alpha - 1.0)
                scale = np.sqrt(b_max * (tau - sig))
                z, wz = self._window(wrow[:, None] + 0.0 * tau[None, :],
                                     scale[None, :])
                vals = self.source(sig, wrow[:, None, None], tau[None, :, None], z)
                vals = vals * coeff(tau[None, :, None], z)
                out[k] = np.sum(vals * wz * wt[None, :, None], axis=(1, 2))
            else:  # point: second series term at the anchor
                y = ctx["y"]
                rho, wr = singular_rule(sig, t, self.quad.n_time,
                                        left_exp=0.5 * self.alpha - 1.0,
                                        right_exp=0.5 * self.alpha - 1.0)
                va = b_max * (rho - sig)
                vb = b_max * (t - rho)
                center = (wrow[:, None] * vb[None, :] + y * va[None, :]) / (va + vb)
                scale = np.sqrt(va * vb / (va + vb))
                v, wv = self._window(center, scale[None, :])
                vals = (self.source(sig, wrow[:, None, None], rho[None, :, None], v)
                        * self.source(rho[None, :, None], v, t, y))
                out[k] = np.sum(vals * wv * wr[None, :, None], axis=(1, 2))
        return out

    def _apply_source(self, tab: _Table, term_reg: np.ndarray, b_max) -> np.ndarray:
        """One Volterra sweep: K^(1) convolved with the previous term."""
        t = tab.t_anchor
        prev = object.__new__(type(tab))
        prev.__dict__.update(tab.__dict__)
        prev.g = term_reg
        out = np.zeros_like(term_reg)
        for k, sig in enumerate(tab.sigma):
            wrow = tab.nodes(k)
            rho, wr = singular_rule(sig, t, self.quad.n_time,
                                    left_exp=0.5 * self.alpha - 1.0,
                                    right_exp=-tab.reg_pow)
            scale = np.sqrt(b_max * (rho - sig))
            v, wv = self._window(wrow[:, None] + 0.0 * rho[None, :], scale[None, :])
            kern = self.source(sig, wrow[:, None, None], rho[None, :, None], v)
            uprev = prev.eval(np.broadcast_to(rho[None, :, None], v.shape), v)
            out[k] = np.sum(kern * uprev * wv * wr[None, :, None], axis=(1, 2))
        return out * (t - tab.sigma)[:, None] ** tab.reg_pow


class FundamentalSolution:
    """Evaluator for G = Z0 + Z1 of one side, with x-derivatives up to 2."""

    def __init__(self, side: SideSpec, quad: CorrectionQuadrature | None = None,
                 index: int = 1, horizon: float = 1.0):
        self.side = side
        self.index = index
        self.quad = quad or CorrectionQuadrature()
        self.horizon = horizon
        self.principal = PrincipalKernel(side, index)
        self.correction = CorrectionKernel(side, self.quad, index)

    @classmethod
    def build(cls, side: SideSpec, quad: CorrectionQuadrature | None = None,
              index: int = 1, horizon: float = 1.0) -> "FundamentalSolution":
        return cls(side, quad, index, horizon)

    @property
    def is_exact(self) -> bool:
        return self.correction.is_null

    # -- pointwise evaluation ----------------------------------------------

    def __call__(self, s, x, t, y, p: int = 0):
        return self.eval(s, x, t, y, p)

    def eval(self, s, x, t, y, p: int = 0):
        """G and its x-derivatives at (s, x, t, y); y and x may be arrays."""
        z0 = self.principal(s, x, t, y, p)
        if self.is_exact:
            return z0
        return z0 + self._correction_point(s, x, float(t), float(y), p)

    def _correction_point(self, s, x, t, y, p):
        s_in, x_in = np.asarray(s, dtype=float), np.asarray(x, dtype=float)
        scalar = s_in.ndim == 0 and x_in.ndim == 0
        s_arr, x_arr = np.broadcast_arrays(np.atleast_1d(s_in), np.atleast_1d(x_in))
        pad = self.quad.r_cut * math.sqrt(self._bmax_guess(t) * t) + 0.5
        w_lo = min(float(np.min(x_arr)), y) - pad
        w_hi = max(float(np.max(x_arr)), y) + pad
        s_lo = 0.75 * float(np.min(s_arr))
        tab = self.correction.table("point", (round(y, 12),), t, s_lo, w_lo, w_hi, y=y)
        b_max = self.correction._b_max(t, w_lo, w_hi)
        out = np.empty(s_arr.shape)
        for idx in np.ndindex(s_arr.shape):
            out[idx] = (self._term_one(s_arr[idx], x_arr[idx], t, y, p, b_max)
                        + self._outer(tab, s_arr[idx], x_arr[idx], t, p, b_max,
                                      right_exp=-tab.reg_pow, spread_at=y))
        if scalar:
            return float(out[0])
        return out.reshape(np.broadcast_shapes(s_in.shape, x_in.shape))

    def _bmax_guess(self, t) -> float:
        ss = np.linspace(0.0, t, 5)
        return float(np.max(self.side.diffusion(ss, 0.0 * ss))) + 1e-12

    def _term_one(self, s, x, t, y, p, b_max):
        """First series term of Z1: Z0 convolved once with K^(1) at (t, y)."""
        rho, wr = singular_rule(s, t, 2 * self.quad.n_time,
                                left_exp=0.0,
                                right_exp=0.5 * self.correction.alpha - 1.0)
        va = b_max * (rho - s)
        vb = b_max * (t - rho)
        center = (x * vb + y * va) / (va + vb)
        scale = np.sqrt(va * vb / (va + vb))
        v, wv = self.correction._window(center, scale)
        b_rv = self.side.diffusion(rho[:, None], v)
        z0 = _principal_pieces(b_rv, s, x, rho[:, None], v)[p]
        vals = z0 * self.correction.source(rho[:, None], v, t, y)
        return float(np.sum(vals * wv * wr[:, None]))

    def _outer(self, tab: _Table, s, x, t, p, b_max, right_exp, spread_at=None):
        """Z0 convolved with a cached table, evaluated at one (s, x)."""
        rho, wr = singular_rule(s, t, 2 * self.quad.n_time,
                                left_exp=0.0, right_exp=right_exp)
        va = b_max * (rho - s)
        if spread_at is None:
            center = np.full_like(rho, x)
            scale = np.sqrt(va)
        else:
            vb = 2.0 * b_max * (t - rho)
            center = (x * vb + spread_at * va) / (va + vb)
            scale = np.sqrt(va * vb / (va + vb))
        v, wv = self.correction._window(center, scale)
        b_rv = self.side.diffusion(rho[:, None], v)
        z0 = _principal_pieces(b_rv, s, x, rho[:, None], v)[p]
        u = tab.eval(np.broadcast_to(rho[:, None], v.shape), v)
        return float(np.sum(z0 * u * wv * wr[:, None]))

    # -- weighted terminal functionals ---------------------------------------

    def terminal_integral(self, s, x, t, weight, key, p: int = 0):
        """integral of G(s,x,t,y)^{(p)} weight(y) dy for a fixed terminal time."""
        if s >= t:
            raise TimeOrderError("terminal integral needs s < t")
        b_max = self._bmax_guess(t)
        y, wy = window_nodes(x, math.sqrt(b_max * (t - s)),
                             2 * self.quad.n_space, self.quad.r_cut)
        b_ty = self.side.diffusion(t, y)
        direct = float(np.sum(_principal_pieces(b_ty, s, x, t, y)[p] * weight(y) * wy))
        if self.is_exact:
            return direct
        pad = self.quad.r_cut * math.sqrt(b_max * t) + 0.5
        tab = self.correction.table("final", key, t, 0.75 * s, x - pad, x + pad,
                                    weight=weight)
        return direct + self._outer(tab, s, x, t, p, b_max,
                                    right_exp=-tab.reg_pow)

    def spacetime_integral(self, s, x, t, coeff, key):
        """integral over (s,t) x R of G(s,x,tau,z) coeff(tau,z) dz dtau."""
        if s >= t:
            raise TimeOrderError("space-time integral needs s < t")
        b_max = self._bmax_guess(t)
        tau, wt = singular_rule(s, t, 2 * self.quad.n_time)
        z, wz = window_nodes(np.full_like(tau, x), np.sqrt(b_max * (tau - s)),
                             self.quad.n_space, self.quad.r_cut)
        b_tz = self.side.diffusion(tau[:, None], z)
        z0 = _principal_pieces(b_tz, s, x, tau[:, None], z)[0]
        direct = float(np.sum(z0 * coeff(tau[:, None], z) * wz * wt[:, None]))
        if self.is_exact:
            return direct
        pad = self.quad.r_cut * math.sqrt(b_max * t) + 0.5
        tab = self.correction.table("spacetime", key, t, 0.75 * s, x - pad, x + pad,
                                    coeff=coeff)
        return direct + self._outer(tab, s, x, t, 0, b_max, right_exp=0.0)


def build_correction(side: SideSpec, depth: int | None = None,
                     quad: CorrectionQuadrature | None = None,
                     index: int = 1) -> CorrectionKernel:
    """Construct the correction kernel for one side (series truncation knobs)."""
    quad = quad or CorrectionQuadrature()
    if depth is not None:
        quad = replace(quad, depth=depth)
    return CorrectionKernel(side, quad, index)


def moment_residuals(fs: FundamentalSolution, s: float, x: float, t: float):
    """Residuals of the three moment identities of the fundamental solution.

    residual 0: |integral G dy - 1|
    residual 1: |integral G (y-x) dy - double integral of G a|
    residual 2: |integral G (y-x)^2 dy - double integral of G b
                 - 2 double integral of G a (z-x)|
    """
    if s >= t:
        raise TimeOrderError("moment identities need s < t")
    xr = round(x, 12)
    m0 = fs.terminal_integral(s, x, t, lambda y: np.ones_like(y), ("m0",))
    m1 = fs.terminal_integral(s, x, t, lambda y: y - x, ("m1", xr))
    m2 = fs.terminal_integral(s, x, t, lambda y: (y - x) ** 2, ("m2", xr))
    drift_null = fs.side.drift.is_constant and fs.side.drift.constant_value() == 0.0
    if drift_null:
        ra = 0.0
        rax = 0.0
    else:
        ra = fs.spacetime_integral(s, x, t, lambda tau, z: fs.side.drift(tau, z),
                                   ("a",))
        rax = fs.spacetime_integral(
            s, x, t, lambda tau, z: fs.side.drift(tau, z) * (z - x), ("ax", xr))
    rb = fs.spacetime_integral(s, x, t, lambda tau, z: fs.side.diffusion(tau, z),
                               ("b",))
    return (abs(m0 - 1.0), abs(m1 - ra), abs(m2 - rb - 2.0 * rax))


def audit_correction_envelope(fs: FundamentalSolution, samples):
    """Fit the Gaussian envelope bound of the correction kernel on samples.

    Regresses log|Z1| + (1-alpha)/2 log(t-s) against -(y-x)^2/(t-s) and
    returns (C, c, max_excess) where max_excess is the largest violation of
    the fitted bound (zero by construction of a least-squares fit up to the
    sample spread).  Purely qualitative: finite C and positive c witness the
    expected envelope shape.
    """
    alpha = fs.side.holder_exponent
    logs, quads = [], []
    for (s, x, t, y) in samples:
        z1 = fs.eval(s, x, t, y) - fs.principal(s, x, t, y)
        if abs(z1) < 1e-14:
            continue
        logs.append(math.log(abs(z1)) + 0.5 * (1 - alpha) * math.log(t - s))
        quads.append((y - x) ** 2 / (t - s))
    if not logs:
        return (0.0, 1.0, 0.0)
    A = np.stack([np.ones(len(logs)), -np.asarray(quads)], axis=1)
    coef, *_ = np.linalg.lstsq(A, np.asarray(logs), rcond=None)
    resid = np.asarray(logs) - A @ coef
    return (math.exp(coef[0]), float(coef[1]), float(np.max(resid)))
