"""Independent ground truth: skew Brownian closed forms and particle simulation.

The closed-form transition density of skew Brownian motion (membrane at 0,
crossing parameter alpha, scale sigma) is the image formula

    p(dt, x, y) = g(y - x) + sign(y) (2 alpha - 1) g(|x| + |y|),

with g the centered Gaussian density of variance sigma^2 dt.  The particle
simulation realizes the pasted diffusion directly: Euler-Maruyama between
crossings, and on a membrane crossing the landing side is redrawn with the
membrane weights read as exit probabilities.  Atomic jump measures are
realized by a thin-layer approximation that is first-order accurate only
and used purely for qualitative cross-checks; its bias indicator is
reported alongside the estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._quadrature import panel_rule
from .errors import StepTooLargeError, TimeOrderError
from .problem import InitialFunction, Problem


@dataclass(frozen=True)
class SkewParams:
    """Crossing probability and diffusion scale of a skew Brownian motion."""

    alpha: float
    sigma: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")

    @classmethod
    def from_problem(cls, problem: Problem, s: float = 0.0) -> "SkewParams":
        """Identification alpha = q2/(q1+q2) for equal constant diffusions.

        Derived by matching the flux condition q1 u'(h-) = q2 u'(h+) with
        the skew generator domain; confirmed by the oracle cross-checks.
        """
        b1 = problem.side(1).diffusion
        b2 = problem.side(2).diffusion
        if not (b1.is_constant and b2.is_constant
                and b1.constant_value() == b2.constant_value()):
            raise ValueError("skew identification needs equal constant diffusions")
        q1 = float(problem.q(1, s))
        q2 = float(problem.q(2, s))
        return cls(alpha=q2 / (q1 + q2), sigma=math.sqrt(b1.constant_value()))


def skew_density(params: SkewParams, dt: float, x, y):
    """Transition density of skew Brownian motion after elapsed time dt."""
    if dt <= 0:
        raise TimeOrderError("elapsed time must be positive")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    var = params.sigma ** 2 * dt
    norm = 1.0 / math.sqrt(2.0 * math.pi * var)

    def g(z):
        return norm * np.exp(-z * z / (2.0 * var))

    out = g(y - x) + np.sign(y) * (2.0 * params.alpha - 1.0) * g(np.abs(x) + np.abs(y))
    return float(out) if out.ndim == 0 else out


def skew_action(params: SkewParams, dt: float, x: float, phi,
                n_nodes: int = 24, width: float | None = None) -> float:
    """integral of phi(y) skew_density(dt, x, y) dy (the oracle operator)."""
    sd = params.sigma * math.sqrt(dt)
    if width is None:
        width = abs(x) + 10.0 * sd + 10.0
    edges = np.concatenate([
        np.linspace(-width, 0.0, 40), np.linspace(0.0, width, 40)[1:]])
    y, w = panel_rule(edges, n_nodes)
    return float(np.sum(phi(y) * skew_density(params, dt, x, y) * w))


@dataclass(frozen=True)
class SimConfig:
    """Particle-simulation controls; streams are keyed by (seed, block)."""

    paths: int = 100_000
    dt: float = 1e-3
    seed: int = 0
    scheme: str = "euler-skew"
    block_size: int = 16384
    jump_layer: float = 1.0
    crossing_risk_cap: float = 0.05

    def __post_init__(self):
        if self.paths < 1 or self.dt <= 0:
            raise ValueError("paths must be >= 1 and dt > 0")
        if self.scheme not in ("euler-skew", "exact-gaussian-increment"):
            raise ValueError(f"unknown scheme {self.scheme!r}")


@dataclass
class SimResult:
    mean: float
    stderr: float
    paths: int
    crossing_risk: float
    jump_bias_indicator: float = 0.0

    @property
    def variance(self) -> float:
        return self.stderr ** 2 * self.paths


def _block_generator(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=[seed, block]))


def simulate(problem: Problem, s: float, x: float, t: float,
             phi: InitialFunction, config: SimConfig | None = None) -> SimResult:
    """Estimate the phi-average of the pasted diffusion started at (s, x).

    Euler-Maruyama with per-block counter-based streams.  A step that
    crosses the membrane, or whose Brownian bridge touched it, is resolved
    by redrawing the side with probability l_2 of landing right and
    rescaling the overshoot by the destination/landing diffusion ratio;
    for flat membranes and constant scales this resolve reproduces the
    exact one-step law.  Raises StepTooLargeError when the average
    second-interaction indicator of resolved steps exceeds the cap.
    """
    config = config or SimConfig()
    if s >= t:
        raise TimeOrderError("simulation needs s < t")
    n_steps = max(1, int(math.ceil((t - s) / config.dt)))
    dt = (t - s) / n_steps
    meas = problem.wentzell.measure
    has_atoms = not meas.is_null

    sums = []
    sq_sums = []
    risk_sum = 0.0
    jump_count = 0
    n_left = config.paths
    block = 0
    while n_left > 0:
        size = min(config.block_size, n_left)
        rng = _block_generator(config.seed, block)
        xs = np.full(size, float(x))
        risk = 0.0
        for k in range(n_steps):
            sk = s + k * dt
            sk1 = sk + dt
            h_k = float(problem.h(sk))
            h_k1 = float(problem.h(sk1))
            right = xs >= h_k
            b = np.where(right, problem.diffusion(2, sk, xs),
                         problem.diffusion(1, sk, xs))
            if config.scheme == "euler-skew":
                a = np.where(right, problem.drift(2, sk, xs),
                             problem.drift(1, sk, xs))
            else:
                a = 0.0
            noise = rng.standard_normal(size)
            prop = xs + a * dt + np.sqrt(b * dt) * noise

            b1h = float(problem.diffusion(1, sk, h_k))
            b2h = float(problem.diffusion(2, sk, h_k))
            q1 = float(problem.q(1, sk))
            q2 = float(problem.q(2, sk))
            l2 = q2 * math.sqrt(b1h) / (q1 * math.sqrt(b2h) + q2 * math.sqrt(b1h))

            land_right = prop >= h_k1
            crossed = right != land_right
            # same-side steps may still have touched the membrane: the
            # Brownian bridge touch probability exp(-2 d0 d1 / (b dt));
            # resolving touched steps alongside crossed ones makes the
            # one-step law exact for flat membranes and constant scales
            d0 = np.abs(xs - h_k)
            d1 = np.abs(prop - h_k1)
            p_touch = np.exp(-2.0 * d0 * d1 / (b * dt + 1e-300))
            u_touch = rng.random(size)
            resolve = crossed | (u_touch < p_touch)
            u_side = rng.random(size)
            dest_right = u_side < l2
            excess = np.abs(prop - h_k1)
            scale = np.where(dest_right, math.sqrt(b2h), math.sqrt(b1h)) \
                / np.where(land_right, math.sqrt(b2h), math.sqrt(b1h))
            resolved = h_k1 + np.where(dest_right, 1.0, -1.0) * excess * scale
            xs = np.where(resolve, resolved, prop)
            # step-size reliability: probability that a resolved step
            # interacts with the membrane again before it ends
            e_res = excess * scale
            risk += float(np.mean(np.where(
                resolve, np.exp(-2.0 * e_res * e_res / (b * dt + 1e-300)), 0.0)))
            if has_atoms:
                b_bar = 0.5 * (b1h + b2h)
                layer = config.jump_layer * math.sqrt(b_bar * dt)
                in_layer = np.abs(xs - h_k1) < layer
                uj = rng.random(size)
                if np.any(in_layer):
                    y_at = meas.positions(sk1)
                    w_at = meas.weights(sk1)
                    total_w = float(np.sum(w_at))
                    if total_w > 0:
                        denom = q1 * math.sqrt(b2h) + q2 * math.sqrt(b1h)
                        d_sum = (b1h * math.sqrt(b2h) + b2h * math.sqrt(b1h)) / denom
                        ell = math.sqrt(dt / b_bar) / config.jump_layer
                        p_jump = min(1.0, 0.5 * d_sum * total_w * ell)
                        do_jump = in_layer & (uj < p_jump)
                        if np.any(do_jump):
                            choice = rng.random(size)
                            cum = np.cumsum(w_at) / total_w
                            idx = np.searchsorted(cum, choice[do_jump])
                            xs[do_jump] = y_at[np.clip(idx, 0, len(y_at) - 1)]
                            jump_count += int(np.sum(do_jump))
        vals = np.asarray(phi(xs), dtype=float)
        sums.append(float(np.sum(vals)))
        sq_sums.append(float(np.sum(vals * vals)))
        risk_sum += risk / n_steps * size
        n_left -= size
        block += 1

    n = config.paths
    mean = math.fsum(sums) / n
    var = max(math.fsum(sq_sums) / n - mean * mean, 0.0)
    stderr = math.sqrt(var / n)
    crossing_risk = risk_sum / n
    if crossing_risk > config.crossing_risk_cap:
        raise StepTooLargeError(
            f"unobserved-crossing indicator {crossing_risk:.3f} exceeds "
            f"{config.crossing_risk_cap}; reduce dt")
    return SimResult(mean=mean, stderr=stderr, paths=n,
                     crossing_risk=crossing_risk,
                     jump_bias_indicator=jump_count / n)


@dataclass
class CompareResult:
    passed: bool
    z_score: float
    solver_value: float
    mc_estimate: float
    stderr: float
    k_sigma: float

    def to_dict(self) -> dict:
        return {"passed": self.passed, "z_score": self.z_score,
                "solver_value": self.solver_value, "mc_estimate": self.mc_estimate,
                "stderr": self.stderr, "k_sigma": self.k_sigma}


def compare(solver_value: float, mc_estimate: float, stderr: float,
            k_sigma: float = 3.0) -> CompareResult:
    """Statistical agreement check: pass iff |solver - mc| <= k_sigma stderr."""
    if stderr <= 0:
        raise ValueError("stderr must be positive")
    z = abs(solver_value - mc_estimate) / stderr
    return CompareResult(passed=bool(z <= k_sigma), z_score=float(z),
                         solver_value=float(solver_value),
                         mc_estimate=float(mc_estimate), stderr=float(stderr),
                         k_sigma=float(k_sigma))
