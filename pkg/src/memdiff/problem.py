"""Problem instances: coefficients, membrane path, interface data, initial functions.

A problem consists of two one-dimensional diffusion generators
(1/2) b_i(s,x) d^2/dx^2 + a_i(s,x) d/dx on either side of a moving point
x = h(s), pasted by a transmission condition with reflection weights
q_1(s), q_2(s) and an atomic jump measure.  Coefficients, the membrane and
all time-dependent data come from a small closed catalog of parameterized
forms plus tabulated data, so every regularity requirement is audited by
sampling rather than assumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.interpolate import CubicSpline, RegularGridInterpolator

from .errors import (
    AtomOnMembraneError,
    ConfigError,
    DegenerateWentzellError,
    NonparabolicCoefficientError,
)

SIDE_LEFT = "left"
SIDE_MEMBRANE = "membrane"
SIDE_RIGHT = "right"

COEFFICIENT_KINDS = ("constant", "affine-in-x", "sinusoidal-in-s-and-x", "tabulated")
TIME_FUNCTION_KINDS = ("constant", "linear", "sinusoidal", "tabulated")
INITIAL_KINDS = ("constant-one", "gaussian-bump", "indicator-smoothed",
                 "polynomial-clamped", "tabulated")


def _as_tuple(params) -> tuple:
    return tuple(float(p) for p in params)


# ---------------------------------------------------------------------------
# space-time coefficient fields
# ---------------------------------------------------------------------------

class CoefficientField:
    """Scalar field (s, x) -> value from the parameterized catalog.

    kinds and parameter layouts:
      constant                 [c]
      affine-in-x              [c0, c1]                     c0 + c1*x
      sinusoidal-in-s-and-x    [c0, ax, wx, as, ws]         c0 + ax*sin(wx*x) + as*sin(ws*s)
      tabulated                [ns, nx, s..., x..., v...]   bilinear, clamped outside
    """

    def __init__(self, kind: str, params: Sequence[float]):
        if kind not in COEFFICIENT_KINDS:
            raise ConfigError(f"unknown coefficient kind {kind!r}")
        self.kind = kind
        self.params = _as_tuple(params)
        self._interp = None
        if kind == "constant" and len(self.params) != 1:
            raise ConfigError("constant coefficient takes one parameter")
        if kind == "affine-in-x" and len(self.params) != 2:
            raise ConfigError("affine-in-x coefficient takes two parameters")
        if kind == "sinusoidal-in-s-and-x" and len(self.params) != 5:
            raise ConfigError("sinusoidal-in-s-and-x takes five parameters")
        if kind == "tabulated":
            self._build_table()

    def _build_table(self):
        p = self.params
        if len(p) < 2:
            raise ConfigError("tabulated coefficient needs a size header")
        ns, nx = int(p[0]), int(p[1])
        need = 2 + ns + nx + ns * nx
        if len(p) != need:
            raise ConfigError(f"tabulated coefficient expects {need} parameters, got {len(p)}")
        s = np.array(p[2:2 + ns])
        x = np.array(p[2 + ns:2 + ns + nx])
        v = np.array(p[2 + ns + nx:]).reshape(ns, nx)
        self._s_range = (s[0], s[-1])
        self._x_range = (x[0], x[-1])
        self._interp = RegularGridInterpolator((s, x), v, method="linear",
                                               bounds_error=False, fill_value=None)

    @classmethod
    def constant(cls, c: float) -> "CoefficientField":
        return cls("constant", [c])

    @classmethod
    def tabulated(cls, s_knots, x_knots, values) -> "CoefficientField":
        s = np.asarray(s_knots, float)
        x = np.asarray(x_knots, float)
        v = np.asarray(values, float)
        params = [len(s), len(x)] + list(s) + list(x) + list(v.ravel())
        return cls("tabulated", params)

    @property
    def is_constant(self) -> bool:
        if self.kind == "constant":
            return True
        if self.kind == "affine-in-x":
            return self.params[1] == 0.0
        if self.kind == "sinusoidal-in-s-and-x":
            return self.params[1] == 0.0 and self.params[3] == 0.0
        return False

    def constant_value(self) -> float:
        if not self.is_constant:
            raise ValueError("field is not constant")
        return self.params[0]

    def __call__(self, s, x):
        s = np.asarray(s, dtype=float)
        x = np.asarray(x, dtype=float)
        if self.kind == "constant":
            out = np.broadcast_to(self.params[0], np.broadcast_shapes(s.shape, x.shape))
            return out.copy() if out.shape else float(self.params[0])
        if self.kind == "affine-in-x":
            c0, c1 = self.params
            return c0 + c1 * x + 0.0 * s
        if self.kind == "sinusoidal-in-s-and-x":
            c0, ax, wx, amp_s, ws = self.params
            return c0 + ax * np.sin(wx * x) + amp_s * np.sin(ws * s) + 0.0 * (s + x) * 0.0
        sq = np.clip(s, *self._s_range)
        xq = np.clip(x, *self._x_range)
        sq, xq = np.broadcast_arrays(sq, xq)
        pts = np.stack([sq.ravel(), xq.ravel()], axis=-1)
        vals = self._interp(pts).reshape(sq.shape)
        return vals if vals.shape else float(vals)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": list(self.params)}

    @classmethod
    def from_dict(cls, d: dict) -> "CoefficientField":
        try:
            return cls(d["kind"], d["params"])
        except KeyError as exc:
            raise ConfigError(f"coefficient object missing key {exc}") from exc


# ---------------------------------------------------------------------------
# time-only rules: membrane path, reflection weights, atom data
# ---------------------------------------------------------------------------

class TimeFunction:
    """Scalar function of time from the catalog.

    kinds and parameter layouts:
      constant    [c]
      linear      [c0, c1]            c0 + c1*s
      sinusoidal  [c0, amp, freq] or [c0, amp, freq, phase]
      tabulated   [n, s..., v...]     piecewise linear, clamped outside
    """

    def __init__(self, kind: str, params: Sequence[float]):
        if kind not in TIME_FUNCTION_KINDS:
            raise ConfigError(f"unknown time-function kind {kind!r}")
        self.kind = kind
        self.params = _as_tuple(params)
        if kind == "constant" and len(self.params) != 1:
            raise ConfigError("constant time function takes one parameter")
        if kind == "linear" and len(self.params) != 2:
            raise ConfigError("linear time function takes two parameters")
        if kind == "sinusoidal" and len(self.params) not in (3, 4):
            raise ConfigError("sinusoidal time function takes three or four parameters")
        if kind == "tabulated":
            n = int(self.params[0])
            if len(self.params) != 1 + 2 * n:
                raise ConfigError("tabulated time function expects [n, s..., v...]")
            self._knots = np.array(self.params[1:1 + n])
            self._vals = np.array(self.params[1 + n:])

    @classmethod
    def constant(cls, c: float) -> "TimeFunction":
        return cls("constant", [c])

    @property
    def is_constant(self) -> bool:
        if self.kind == "constant":
            return True
        if self.kind == "linear":
            return self.params[1] == 0.0
        if self.kind == "sinusoidal":
            return self.params[1] == 0.0
        return False

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "constant":
            out = np.broadcast_to(self.params[0], s.shape)
            return out.copy() if out.shape else float(self.params[0])
        if self.kind == "linear":
            c0, c1 = self.params
            return c0 + c1 * s
        if self.kind == "sinusoidal":
            c0, amp, freq = self.params[:3]
            phase = self.params[3] if len(self.params) == 4 else 0.0
            return c0 + amp * np.sin(freq * s + phase)
        out = np.interp(s, self._knots, self._vals)
        return out if np.shape(out) else float(out)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": list(self.params)}

    @classmethod
    def from_dict(cls, d: dict) -> "TimeFunction":
        try:
            return cls(d["kind"], d["params"])
        except KeyError as exc:
            raise ConfigError(f"time-function object missing key {exc}") from exc


class MembranePath(TimeFunction):
    """The moving interface x = h(s); same catalog as TimeFunction."""


@dataclass(frozen=True)
class Atom:
    """One moving atom of the jump measure.

    position evaluates to the absolute location y(s) (never equal to the
    membrane), weight to its nonnegative mass w(s).
    """

    position: TimeFunction
    weight: TimeFunction

    def to_dict(self) -> dict:
        return {"position": self.position.to_dict(), "weight": self.weight.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "Atom":
        return cls(TimeFunction.from_dict(d["position"]), TimeFunction.from_dict(d["weight"]))


@dataclass(frozen=True)
class JumpMeasure:
    """Finitely many moving atoms; the empty measure is allowed."""

    atoms: tuple = ()

    @property
    def is_null(self) -> bool:
        return len(self.atoms) == 0

    def positions(self, s) -> np.ndarray:
        return np.array([a.position(s) for a in self.atoms], dtype=float)

    def weights(self, s) -> np.ndarray:
        return np.array([a.weight(s) for a in self.atoms], dtype=float)

    def first_moment(self, s, h_s: float) -> float:
        """sum over atoms of |y(s) - h(s)| * w(s)."""
        if self.is_null:
            return 0.0
        return float(np.sum(np.abs(self.positions(s) - h_s) * self.weights(s)))

    def to_dict(self) -> dict:
        return {"atoms": [a.to_dict() for a in self.atoms]}

    @classmethod
    def from_dict(cls, d: dict) -> "JumpMeasure":
        return cls(tuple(Atom.from_dict(a) for a in d.get("atoms", [])))


@dataclass(frozen=True)
class WentzellData:
    """Reflection weights q1, q2 and the jump measure of the interface condition."""

    q1: TimeFunction
    q2: TimeFunction
    measure: JumpMeasure = JumpMeasure()

    def to_dict(self) -> dict:
        return {"q1": self.q1.to_dict(), "q2": self.q2.to_dict(),
                "measure": self.measure.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "WentzellData":
        return cls(TimeFunction.from_dict(d["q1"]), TimeFunction.from_dict(d["q2"]),
                   JumpMeasure.from_dict(d.get("measure", {"atoms": []})))


@dataclass(frozen=True)
class SideSpec:
    """Drift and diffusion of one side, plus its declared regularity data.

    diffusion_min/diffusion_max are the user-declared uniform bounds for the
    diffusion coefficient; validation samples the field and fails the
    parabolicity condition if a sample leaves (0, inf) or the declared band.
    """

    drift: CoefficientField
    diffusion: CoefficientField
    holder_exponent: float = 0.75
    diffusion_min: float | None = None
    diffusion_max: float | None = None

    def __post_init__(self):
        if not (0.0 < self.holder_exponent < 1.0):
            raise ConfigError("holder_exponent must lie in (0, 1)")

    def to_dict(self) -> dict:
        d = {"drift": self.drift.to_dict(), "diffusion": self.diffusion.to_dict(),
             "holder_exponent": self.holder_exponent}
        if self.diffusion_min is not None:
            d["diffusion_min"] = self.diffusion_min
        if self.diffusion_max is not None:
            d["diffusion_max"] = self.diffusion_max
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SideSpec":
        return cls(
            drift=CoefficientField.from_dict(d["drift"]),
            diffusion=CoefficientField.from_dict(d["diffusion"]),
            holder_exponent=float(d.get("holder_exponent", 0.75)),
            diffusion_min=d.get("diffusion_min"),
            diffusion_max=d.get("diffusion_max"),
        )


# ---------------------------------------------------------------------------
# initial functions
# ---------------------------------------------------------------------------

class InitialFunction:
    """Bounded continuous terminal datum from the catalog.

    kinds and parameter layouts:
      constant-one        [] or [c]                    identically c (default 1)
      gaussian-bump       [amp, center, width]
      indicator-smoothed  [a, b, eps]                  smoothed indicator of [a, b]
      polynomial-clamped  [center, r_in, r_out, c0, c1, ...]
                          sum c_m (x-center)^m, flat taper to zero on
                          r_in <= |x-center| <= r_out, zero outside
      tabulated           [n, x..., v...]              cubic spline, constant outside
    """

    def __init__(self, kind: str, params: Sequence[float] = (), sup_norm: float | None = None):
        if kind not in INITIAL_KINDS:
            raise ConfigError(f"unknown initial-function kind {kind!r}")
        self.kind = kind
        self.params = _as_tuple(params)
        self._spline = None
        if kind == "constant-one" and len(self.params) > 1:
            raise ConfigError("constant-one takes at most one parameter")
        if kind == "gaussian-bump" and len(self.params) != 3:
            raise ConfigError("gaussian-bump takes [amp, center, width]")
        if kind == "indicator-smoothed" and len(self.params) != 3:
            raise ConfigError("indicator-smoothed takes [a, b, eps]")
        if kind == "polynomial-clamped" and len(self.params) < 4:
            raise ConfigError("polynomial-clamped takes [center, r_in, r_out, c0, ...]")
        if kind == "tabulated":
            n = int(self.params[0])
            if len(self.params) != 1 + 2 * n or n < 4:
                raise ConfigError("tabulated initial function expects [n, x..., v...], n >= 4")
            xk = np.array(self.params[1:1 + n])
            vk = np.array(self.params[1 + n:])
            self._spline = CubicSpline(xk, vk)
            self._x_range = (xk[0], xk[-1])
            self._edge_vals = (vk[0], vk[-1])
        self.sup_norm = float(sup_norm) if sup_norm is not None else self._infer_sup()

    @classmethod
    def one(cls) -> "InitialFunction":
        return cls("constant-one", [1.0])

    @classmethod
    def gaussian(cls, amp=1.0, center=0.0, width=1.0) -> "InitialFunction":
        return cls("gaussian-bump", [amp, center, width])

    @classmethod
    def from_samples(cls, x_knots, values) -> "InitialFunction":
        x = np.asarray(x_knots, float)
        v = np.asarray(values, float)
        return cls("tabulated", [len(x)] + list(x) + list(v))

    def _infer_sup(self) -> float:
        if self.kind == "constant-one":
            return abs(self.params[0]) if self.params else 1.0
        if self.kind == "gaussian-bump":
            return abs(self.params[0])
        if self.kind == "indicator-smoothed":
            return 1.0
        if self.kind == "polynomial-clamped":
            c, _, r_out = self.params[:3]
            xs = np.linspace(c - r_out, c + r_out, 4001)
            return float(np.max(np.abs(self(xs))))
        xs = np.linspace(self._x_range[0], self._x_range[1], 4001)
        return float(np.max(np.abs(self._spline(xs))))

    def _poly_pieces(self, x):
        c, r_in, r_out = self.params[:3]
        coeffs = self.params[3:]
        u = x - c
        p = np.polynomial.polynomial.polyval(u, coeffs)
        au = np.abs(u)
        taper = np.ones_like(au)
        outside = au >= r_out
        ramp = (au > r_in) & ~outside
        z = (au[ramp] - r_in) / (r_out - r_in)
        taper[ramp] = 1.0 - z * z * (3.0 - 2.0 * z)
        taper[outside] = 0.0
        return p, taper, u

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        if self.kind == "constant-one":
            out = np.full_like(x, self.params[0] if self.params else 1.0)
        elif self.kind == "gaussian-bump":
            amp, c, w = self.params
            out = amp * np.exp(-((x - c) ** 2) / (2.0 * w * w))
        elif self.kind == "indicator-smoothed":
            a, b, eps = self.params
            out = 0.5 * (np.tanh((x - a) / eps) - np.tanh((x - b) / eps))
        elif self.kind == "polynomial-clamped":
            p, taper, _ = self._poly_pieces(x)
            out = p * taper
        else:
            out = self._spline(np.clip(x, *self._x_range))
            out = np.where(x < self._x_range[0], self._edge_vals[0], out)
            out = np.where(x > self._x_range[1], self._edge_vals[1], out)
        return float(out[0]) if scalar else out

    def derivative(self, x, order: int = 1):
        """Analytic derivative where the catalog form has one (order <= 2)."""
        if order not in (1, 2):
            raise ValueError("only first and second derivatives are supported")
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        if self.kind == "constant-one":
            out = np.zeros_like(x)
        elif self.kind == "gaussian-bump":
            amp, c, w = self.params
            u = (x - c) / w
            g = amp * np.exp(-0.5 * u * u)
            out = -g * u / w if order == 1 else g * (u * u - 1.0) / (w * w)
        elif self.kind == "indicator-smoothed":
            a, b, eps = self.params
            ta, tb = np.tanh((x - a) / eps), np.tanh((x - b) / eps)
            if order == 1:
                out = 0.5 * ((1 - ta ** 2) - (1 - tb ** 2)) / eps
            else:
                out = 0.5 * (-2 * ta * (1 - ta ** 2) + 2 * tb * (1 - tb ** 2)) / eps ** 2
        elif self.kind == "polynomial-clamped":
            out = self._poly_derivative(x, order)
        else:
            out = self._spline(np.clip(x, *self._x_range), nu=order)
            out = np.where((x < self._x_range[0]) | (x > self._x_range[1]), 0.0, out)
        return float(out[0]) if scalar else out

    def _poly_derivative(self, x, order):
        c, r_in, r_out = self.params[:3]
        coeffs = np.array(self.params[3:])
        u = x - c
        dcoef = np.polynomial.polynomial.polyder(coeffs, order)
        p = np.polynomial.polynomial.polyval(u, dcoef)
        p0 = np.polynomial.polynomial.polyval(u, coeffs)
        p1 = np.polynomial.polynomial.polyval(u, np.polynomial.polynomial.polyder(coeffs, 1))
        au = np.abs(u)
        sgn = np.sign(u)
        taper = np.ones_like(au)
        dtaper = np.zeros_like(au)
        d2taper = np.zeros_like(au)
        outside = au >= r_out
        ramp = (au > r_in) & ~outside
        z = (au[ramp] - r_in) / (r_out - r_in)
        dz = sgn[ramp] / (r_out - r_in)
        taper[ramp] = 1.0 - z * z * (3.0 - 2.0 * z)
        taper[outside] = 0.0
        dtaper[ramp] = -6.0 * z * (1.0 - z) * dz
        d2taper[ramp] = -6.0 * (1.0 - 2.0 * z) * dz * dz
        if order == 1:
            return p * taper + p0 * dtaper
        p2 = p
        return p2 * taper + 2.0 * p1 * dtaper + p0 * d2taper

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": list(self.params), "sup_norm": self.sup_norm}

    @classmethod
    def from_dict(cls, d: dict) -> "InitialFunction":
        return cls(d["kind"], d.get("params", []), d.get("sup_norm"))


# ---------------------------------------------------------------------------
# the assembled problem
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Problem:
    """Immutable description of one pasting problem.

    Instances are safe to share read-only across threads; every solver object
    holds its own mutable state.
    """

    left: SideSpec
    right: SideSpec
    membrane: MembranePath
    wentzell: WentzellData
    horizon: float
    x_window: tuple | None = None
    grid_resolution: int = 65

    def __post_init__(self):
        if self.horizon <= 0:
            raise ConfigError("horizon must be positive")

    def side(self, i: int) -> SideSpec:
        if i == 1:
            return self.left
        if i == 2:
            return self.right
        raise ValueError("side index must be 1 or 2")

    def h(self, s):
        return self.membrane(s)

    def q(self, i: int, s):
        return self.wentzell.q1(s) if i == 1 else self.wentzell.q2(s)

    def diffusion(self, i: int, s, x):
        return self.side(i).diffusion(s, x)

    def drift(self, i: int, s, x):
        return self.side(i).drift(s, x)

    @property
    def alpha(self) -> float:
        return min(self.left.holder_exponent, self.right.holder_exponent)

    def membrane_tolerance(self, s) -> float:
        return 1e-12 * (1.0 + abs(float(self.membrane(s))))

    def kernel_time_exponent(self) -> float:
        """Left endpoint exponent of the membrane-trace kernels.

        The gradient of the fundamental solution between two membrane points
        behaves like (tau-s)^(alpha/2 - 1) when the membrane is merely
        Holder-(1+alpha)/2, but like (tau-s)^(-1/2) for the smooth catalog
        paths.  Matching the product-quadrature weight to the sharp exponent
        restores spectral accuracy in the smooth case.
        """
        if self.membrane.kind == "tabulated":
            return 0.5 * self.alpha - 1.0
        return -0.5

    def sample_window(self) -> tuple:
        """x-range used for validation sampling and coefficient bounds."""
        if self.x_window is not None:
            return self.x_window
        ss = np.linspace(0.0, self.horizon, 33)
        hs = self.membrane(ss)
        b_guess = max(self.diffusion_bounds_rough())
        pad = 8.0 * math.sqrt(b_guess * self.horizon) + 1.0
        lo = float(np.min(hs)) - pad
        hi = float(np.max(hs)) + pad
        if not self.wentzell.measure.is_null:
            for a in self.wentzell.measure.atoms:
                ys = a.position(ss)
                lo = min(lo, float(np.min(ys)) - 1.0)
                hi = max(hi, float(np.max(ys)) + 1.0)
        return (lo, hi)

    def diffusion_bounds_rough(self) -> tuple:
        """Crude sampled (min, max) of both diffusion fields near the membrane."""
        ss = np.linspace(0.0, self.horizon, 17)
        hs = self.membrane(ss)
        xs = (hs[:, None] + np.linspace(-5.0, 5.0, 21)[None, :]).ravel()
        sg = np.repeat(ss, 21)
        vals = [self.diffusion(i, sg, xs) for i in (1, 2)]
        v = np.concatenate([np.atleast_1d(u) for u in vals])
        return float(np.min(v)), float(np.max(v))

    def diffusion_bounds(self, grid_resolution: int | None = None) -> tuple:
        """Sampled uniform ellipticity bounds (b_min, b_max) on the audit grid."""
        n = grid_resolution or self.grid_resolution
        lo, hi = self.sample_window()
        ss = np.linspace(0.0, self.horizon, n)
        xs = np.linspace(lo, hi, n)
        S, X = np.meshgrid(ss, xs, indexing="ij")
        vmin, vmax = np.inf, -np.inf
        for i in (1, 2):
            v = np.asarray(self.diffusion(i, S, X), dtype=float)
            vmin = min(vmin, float(np.min(v)))
            vmax = max(vmax, float(np.max(v)))
        return vmin, vmax

    def side_of(self, s: float, x: float, tol_mem: float | None = None) -> str:
        """Classify x relative to the membrane at time s."""
        h = float(self.membrane(s))
        tol = self.membrane_tolerance(s) if tol_mem is None else tol_mem
        if abs(x - h) <= tol:
            return SIDE_MEMBRANE
        return SIDE_LEFT if x < h else SIDE_RIGHT

    def to_dict(self) -> dict:
        d = {
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
            "membrane": self.membrane.to_dict(),
            "wentzell": self.wentzell.to_dict(),
            "horizon": self.horizon,
        }
        if self.x_window is not None:
            d["x_window"] = list(self.x_window)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Problem":
        for key in ("left", "right", "membrane", "wentzell", "horizon"):
            if key not in d:
                raise ConfigError(f"problem object missing key {key!r}")
        xw = d.get("x_window")
        return cls(
            left=SideSpec.from_dict(d["left"]),
            right=SideSpec.from_dict(d["right"]),
            membrane=MembranePath(**d["membrane"]),
            wentzell=WentzellData.from_dict(d["wentzell"]),
            horizon=float(d["horizon"]),
            x_window=tuple(xw) if xw is not None else None,
        )


def side_of(problem: Problem, s: float, x: float, tol_mem: float | None = None) -> str:
    return problem.side_of(s, x, tol_mem)


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

@dataclass
class ConditionCheck:
    condition: str
    passed: bool
    statistic: dict = field(default_factory=dict)
    note: str = ""

    def to_dict(self) -> dict:
        return {"condition": self.condition, "passed": self.passed,
                "statistic": self.statistic, "note": self.note}


@dataclass
class ValidationReport:
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, condition: str) -> ConditionCheck:
        for c in self.checks:
            if c.condition == condition:
                return c
        raise KeyError(condition)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "checks": [c.to_dict() for c in self.checks]}


def _holder_quotient(values: np.ndarray, dists: np.ndarray, exponent: float) -> float:
    values, dists = np.broadcast_arrays(np.abs(values), dists)
    mask = dists > 0
    if not np.any(mask):
        return 0.0
    return float(np.max(values[mask] / dists[mask] ** exponent))


def validate(problem: Problem, grid_resolution: int | None = None,
             phi: InitialFunction | None = None) -> ValidationReport:
    """Audit conditions I-V by sampling on a grid of the given resolution.

    The resolution defaults to the one declared on the problem instance.
    Hard failures (a nonpositive diffusion sample, a vanishing q1+q2, an atom
    on the membrane) raise immediately; soft failures (a declared bound
    violated by a sample) are reported in the per-condition entries.
    """
    n = int(grid_resolution if grid_resolution is not None
            else problem.grid_resolution)
    if n < 3:
        raise ValueError("grid_resolution must be at least 3")
    lo, hi = problem.sample_window()
    ss = np.linspace(0.0, problem.horizon, n)
    xs = np.linspace(lo, hi, n)
    S, X = np.meshgrid(ss, xs, indexing="ij")
    checks = []

    # condition I: uniform parabolicity
    b_min, b_max = np.inf, -np.inf
    for i in (1, 2):
        v = np.asarray(problem.diffusion(i, S, X), dtype=float)
        if np.any(v <= 0.0) or not np.all(np.isfinite(v)):
            raise NonparabolicCoefficientError(
                f"diffusion sample <= 0 on side {i} (min {np.min(v):.3g})")
        b_min = min(b_min, float(np.min(v)))
        b_max = max(b_max, float(np.max(v)))
    ok = True
    notes = []
    for i, side in ((1, problem.left), (2, problem.right)):
        v = np.asarray(problem.diffusion(i, S, X), dtype=float)
        if side.diffusion_min is not None and np.min(v) < side.diffusion_min - 1e-12:
            ok = False
            notes.append(f"side {i} sample below declared minimum")
        if side.diffusion_max is not None and np.max(v) > side.diffusion_max + 1e-12:
            ok = False
            notes.append(f"side {i} sample above declared maximum")
    checks.append(ConditionCheck("I", ok, {"b_min": b_min, "b_max": b_max},
                                 "; ".join(notes)))

    # condition II: sampled Holder quotients of the coefficients
    quot = 0.0
    for i in (1, 2):
        alpha = problem.side(i).holder_exponent
        for fld in (problem.side(i).drift, problem.side(i).diffusion):
            v = np.asarray(fld(S, X), dtype=float)
            if v.shape != S.shape:
                v = np.broadcast_to(v, S.shape)
            dx = np.abs(np.diff(xs))[None, :]
            quot = max(quot, _holder_quotient(np.diff(v, axis=1), dx, alpha))
            ds = np.abs(np.diff(ss))[:, None]
            quot = max(quot, _holder_quotient(np.diff(v, axis=0), ds, alpha / 2.0))
    checks.append(ConditionCheck("II", bool(np.isfinite(quot)),
                                 {"holder_quotient": quot}))

    # condition III: the initial function, when supplied
    if phi is not None:
        vals = phi(np.linspace(lo, hi, 4 * n))
        bounded = bool(np.all(np.abs(vals) <= phi.sup_norm * (1 + 1e-12)))
        checks.append(ConditionCheck("III", bounded,
                                     {"sup_sample": float(np.max(np.abs(vals))),
                                      "sup_norm": phi.sup_norm}))
    else:
        checks.append(ConditionCheck("III", True, {}, "no initial function supplied"))

    # condition IV: reflection weights and measure
    q1 = np.asarray(problem.wentzell.q1(ss), dtype=float)
    q2 = np.asarray(problem.wentzell.q2(ss), dtype=float)
    if np.any(q1 < 0) or np.any(q2 < 0):
        raise DegenerateWentzellError("negative reflection weight sample")
    qsum = q1 + q2
    if np.any(qsum <= 0.0):
        raise DegenerateWentzellError("q1 + q2 vanishes at a sample time")
    q0 = float(np.min(qsum))
    hs = np.asarray(problem.membrane(ss), dtype=float)
    moment = 0.0
    for atom in problem.wentzell.measure.atoms:
        ys = np.asarray(atom.position(ss), dtype=float)
        ws = np.asarray(atom.weight(ss), dtype=float)
        if np.any(ws < 0):
            raise DegenerateWentzellError("negative atom weight sample")
        tol = 1e-12 * (1.0 + np.abs(hs))
        if np.any(np.abs(ys - hs) <= tol):
            raise AtomOnMembraneError("atom position equals the membrane at a sample time")
        moment = max(moment, float(np.max(np.abs(ys - hs) * ws)))
    checks.append(ConditionCheck("IV", True, {"q0": q0, "atom_moment_max": moment}))

    # condition V: membrane Holder-(1+alpha)/2 quotient
    alpha = problem.alpha
    dh = np.diff(hs)
    dquot = _holder_quotient(dh, np.diff(ss), (1.0 + alpha) / 2.0)
    checks.append(ConditionCheck("V", bool(np.isfinite(dquot)),
                                 {"holder_quotient": dquot}))

    return ValidationReport(checks)
