"""Assembly and solution of the interface system of Volterra equations.

The two pasting conditions turn into a system for the layer densities: a
first-kind equation from continuity of the field across the membrane and a
second-kind equation from the flux condition.  The Holmgren transform

    Ef(s,t) = sqrt(2/pi) d/ds integral over (s,t) of (rho-s)^(-1/2) f(rho,t)

converts the first-kind equation into second kind; it is always evaluated
through its differentiated representation

    Ef(s,t) = (2 pi)^(-1/2) integral of (rho-s)^(-3/2) [f(rho)-f(s)] d rho
              - sqrt(2/pi) (t-s)^(-1/2) f(s),

never by numerical differentiation.  After elimination the system reads

    V_i(s,t) = Psi_i(s,t) + sum_j integral N_ij(s,tau) V_j(tau,t) d tau

and is solved by successive approximations on the regularized unknowns
W_i = (t-s)^(1/2) V_i over a graded mesh.  The jump-measure part of the
kernels is handled through the split into a weakly singular piece and a
factored strongly singular piece; the theta-integral appearing in the
factorization has an affine exponent and is therefore evaluated in closed
form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._quadrature import singular_rule
from .errors import (
    MeshTooCoarseError,
    SeriesDivergenceError,
    SingularIntegrandError,
    TimeOrderError,
)
from .potentials import DensityPair, PotentialEvaluator, graded_mesh
from .problem import InitialFunction, Problem

SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class SolverConfig:
    """Discretization and iteration controls for the density solve."""

    mesh_n: int = 64
    mesh_gamma: float = 2.0
    n_kernel: int = 16
    n_holmgren: int = 24
    n_theta: int = 24
    n_u: int = 20
    tol_v: float = 1e-8
    k_max: int = 200
    delta: float | None = None
    contraction_onset: int = 10


# ---------------------------------------------------------------------------
# Holmgren transform
# ---------------------------------------------------------------------------

def holmgren_transform(f, s: float, t: float, f_s: float | None = None,
                       n: int = 24, left_exp: float = -0.5) -> float:
    """Differentiated Holmgren transform of f over (s, t).

    f must be callable on arrays of interior times; f_s overrides the left
    endpoint value f(s) (useful when f has a removable definition there).
    The integral is split at the midpoint: the left half uses a Jacobi rule
    matched to the decay of f(rho) - f(s), the right half plain Gauss.
    """
    if s >= t:
        raise TimeOrderError("holmgren transform needs s < t")
    fs_val = float(f(np.array([s]))[0]) if f_s is None else float(f_s)
    mid = 0.5 * (s + t)
    scale = abs(fs_val) + 1.0

    span = t - s
    d_small, d_large = 1e-8 * span, 1e-4 * span
    f_near = float(f(np.array([s + d_small]))[0])
    f_far = float(f(np.array([s + d_large]))[0])
    q_near = abs(f_near - fs_val) / math.sqrt(d_small)
    q_far = abs(f_far - fs_val) / math.sqrt(d_large)
    if q_near > 4.0 * q_far + 1e3 * scale:
        raise SingularIntegrandError(
            "integrand increment does not decay at the left endpoint")

    rho_l, w_l = singular_rule(s, mid, n, left_exp=left_exp)
    vals_l = (np.asarray(f(rho_l)) - fs_val) * (rho_l - s) ** (-1.5)
    rho_r, w_r = singular_rule(mid, t, n)
    vals_r = (np.asarray(f(rho_r)) - fs_val) * (rho_r - s) ** (-1.5)
    integral = float(np.sum(vals_l * w_l) + np.sum(vals_r * w_r))
    return INV_SQRT_2PI * integral - SQRT_2_OVER_PI * fs_val / math.sqrt(t - s)


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------

def theta_blend_integral(sq_far, sq_near, denom):
    """Closed form of the theta integral of the factored atom kernel.

    integral over theta in (0,1) of exp(-[(1-theta) sq_far + theta sq_near]
    / denom), which equals (exp(-c0) - exp(-c1)) / (c1 - c0) with
    c0 = sq_far/denom, c1 = sq_near/denom.
    """
    c0 = np.asarray(sq_far, dtype=float) / denom
    c1 = np.asarray(sq_near, dtype=float) / denom
    d = c1 - c0
    small = np.abs(d) < 1e-6
    d_safe = np.where(small, 1.0, d)
    out = np.where(small, np.exp(-0.5 * (c0 + c1)),
                   (np.exp(-c0) - np.exp(-c1)) / d_safe)
    return out if out.shape else float(out)


@dataclass
class SingularKernelPart:
    """Factored strongly singular kernel piece of one (equation, side) pair.

    value = prefactor * sum over near atoms of weight_k * theta_integral_k,
    with prefactor = -d_i(s) / (2 sqrt(2 pi) [b_j(tau,h(tau)) (tau-s)]^(3/2)),
    weight_k = (y_k - h(s))^2 w_k(s).
    """

    prefactor: float
    weights: np.ndarray
    theta_integrals: np.ndarray

    @property
    def value(self) -> float:
        if len(self.weights) == 0:
            return 0.0
        return self.prefactor * float(np.sum(self.weights * self.theta_integrals))


class KernelAssembler:
    """Pointwise evaluation of the interface kernels of one problem."""

    def __init__(self, problem: Problem, evaluator: PotentialEvaluator | None = None,
                 config: SolverConfig | None = None):
        self.problem = problem
        self.config = config or SolverConfig()
        self.evaluator = evaluator or PotentialEvaluator(problem)
        self.delta = (self.config.delta if self.config.delta is not None
                      else default_delta(problem))
        self._flat_exact = {
            i: self.evaluator.fs[i].is_exact and problem.membrane.is_constant
            for i in (1, 2)
        }
        # flat membrane, exact Gaussian kernels, no atoms: the reflection
        # term is a centered Gaussian derivative (identically zero) and the
        # transformed continuity kernel vanishes, so the whole system kernel
        # is exactly zero
        self.kernels_vanish = (all(self._flat_exact.values())
                               and problem.wentzell.measure.is_null)

    # -- coupling weights ---------------------------------------------------

    def coupling_weights(self, s: float):
        """The pair (d_1, d_2) entering the eliminated second-kind system."""
        h = float(self.problem.h(s))
        b1 = float(self.problem.diffusion(1, s, h))
        b2 = float(self.problem.diffusion(2, s, h))
        q1 = float(self.problem.q(1, s))
        q2 = float(self.problem.q(2, s))
        denom = q1 * math.sqrt(b2) + q2 * math.sqrt(b1)
        return (b1 * math.sqrt(b2) / denom, b2 * math.sqrt(b1) / denom)

    # -- flux kernel ----------------------------------------------------------

    def _g(self, j, s, x, tau, y, p=0):
        fs = self.evaluator.fs[j]
        if fs.is_exact:
            return fs.principal(s, x, tau, y, p)
        return fs.eval(s, x, tau, y, p)

    def _atom_data(self, s: float):
        meas = self.problem.wentzell.measure
        if meas.is_null:
            return np.empty(0), np.empty(0), np.empty(0, dtype=int)
        h = float(self.problem.h(s))
        y = meas.positions(s)
        w = meas.weights(s)
        sides = np.where(y < h, 1, 2)
        return y, w, sides

    def flux_kernel(self, j: int, s: float, tau: float) -> float:
        """Kernel of the flux condition: reflection term plus measure term."""
        if s >= tau:
            raise TimeOrderError("flux kernel needs s < tau")
        h_s = float(self.problem.h(s))
        h_tau = float(self.problem.h(tau))
        q_j = float(self.problem.q(j, s))
        out = (-1.0) ** j * q_j * float(self._g(j, s, h_s, tau, h_tau, p=1))
        y, w, sides = self._atom_data(s)
        for yk, wk, side in zip(y, w, sides):
            if side != j or wk == 0.0:
                continue
            out += wk * float(self._g(j, s, yk, tau, h_tau)
                              - self._g(j, s, h_s, tau, h_tau))
        return out

    # -- Holmgren-transformed continuity kernel --------------------------------

    def holmgren_kernel(self, j: int, s: float, tau: float) -> float:
        """Kernel produced by transforming the continuity equation.

        Evaluates the differentiated representation: the (rho-s)^(-3/2)
        integral of the three increments of the membrane-trace kernel (the
        correction-part increment, the mixed time/space increment, and the
        membrane-motion increment), split at the midpoint, plus the boundary
        term with the (tau-s)^(-1/2) factor.
        """
        if s >= tau:
            raise TimeOrderError("holmgren kernel needs s < tau")
        if self._flat_exact[j]:
            return 0.0
        h_tau = float(self.problem.h(tau))
        fs = self.evaluator.fs[j]

        def trace_f(rho):
            # the three increments of the representation telescope to
            # G(rho, h(rho)) - Z0(rho, h(tau)), both anchored at (tau, h(tau))
            rho = np.asarray(rho, dtype=float)
            h_rho = np.asarray(self.problem.h(rho), dtype=float)
            g_moved = np.asarray(self._g(j, rho, h_rho, tau, h_tau))
            z0_flat = np.asarray(fs.principal(rho, h_tau, tau, h_tau))
            return g_moved - z0_flat

        n = self.config.n_holmgren
        value = holmgren_transform(trace_f, s, tau, n=n,
                                   left_exp=self.problem.kernel_time_exponent())
        return (-1.0) ** j * value

    # -- combined system kernel ---------------------------------------------------

    def _kernel_pieces(self, j: int, s: float, tau: float, delta: float):
        """Side-j kernel pieces shared by both equations.

        Returns (k_reg, near_weights, near_thetas, bare_prefactor, r_val):
        the regular flux/measure part, the factored near-atom data with the
        prefactor before multiplication by d_i, and the transformed
        continuity kernel.
        """
        h_s = float(self.problem.h(s))
        h_tau = float(self.problem.h(tau))
        q_j = float(self.problem.q(j, s))
        b_j_tau = float(self.problem.diffusion(j, tau, h_tau))
        dt = tau - s
        denom = 2.0 * b_j_tau * dt

        k_reg = (-1.0) ** j * q_j * float(self._g(j, s, h_s, tau, h_tau, p=1))
        y, w, sides = self._atom_data(s)
        near_w, near_theta = [], []
        fs = self.evaluator.fs[j]
        for yk, wk, side in zip(y, w, sides):
            if side != j or wk == 0.0:
                continue
            if abs(yk - h_s) >= delta:
                k_reg += wk * float(self._g(j, s, yk, tau, h_tau)
                                    - self._g(j, s, h_s, tau, h_tau))
                continue
            # near atom: the correction-part difference stays regular
            if not fs.is_exact:
                k_reg += wk * float(
                    (fs.eval(s, yk, tau, h_tau) - fs.principal(s, yk, tau, h_tau))
                    - (fs.eval(s, h_s, tau, h_tau) - fs.principal(s, h_s, tau, h_tau)))
            theta = float(theta_blend_integral((yk - h_tau) ** 2,
                                               (h_s - h_tau) ** 2, denom))
            # membrane-motion part of the factored principal difference
            k_reg += ((h_tau - h_s) / (math.sqrt(2 * math.pi) * (b_j_tau * dt) ** 1.5)
                      * (yk - h_s) * wk * theta)
            near_w.append((yk - h_s) ** 2 * wk)
            near_theta.append(theta)
        bare_pref = -1.0 / (2.0 * math.sqrt(2 * math.pi) * (b_j_tau * dt) ** 1.5)
        r_val = self.holmgren_kernel(j, s, tau)
        return k_reg, np.asarray(near_w), np.asarray(near_theta), bare_pref, r_val

    def system_kernel(self, i: int, j: int, s: float, tau: float,
                      delta: float | None = None):
        """Regular and factored singular parts of the system kernel N_ij.

        The regular part carries the reflection term, the far-atom and
        correction measure terms, the membrane-motion atom term, and the
        Holmgren-transformed continuity kernel; the singular part is the
        factored piece whose atom weights are squared distances to the
        membrane.  Their sum is the full kernel.
        """
        if s >= tau:
            raise TimeOrderError("system kernel needs s < tau")
        delta = self.delta if delta is None else delta
        d1, d2 = self.coupling_weights(s)
        d_i = d1 if i == 1 else d2
        h_s = float(self.problem.h(s))
        q_other = float(self.problem.q(3 - i, s))
        b_other = float(self.problem.diffusion(3 - i, s, h_s))
        k_reg, near_w, near_theta, bare_pref, r_val = \
            self._kernel_pieces(j, s, tau, delta)
        regular = d_i * (k_reg + (-1.0) ** i * q_other / math.sqrt(b_other) * r_val)
        singular = SingularKernelPart(d_i * bare_pref, near_w, near_theta)
        return regular, singular

    def system_kernel_value(self, i: int, j: int, s: float, tau: float) -> float:
        reg, sing = self.system_kernel(i, j, s, tau)
        return reg + sing.value

    def system_kernel_matrix(self, s: float, tau_nodes: np.ndarray) -> np.ndarray:
        """Full kernel values N_ij(s, tau_q), shape (2, 2, len(tau_nodes))."""
        d = self.coupling_weights(s)
        h_s = float(self.problem.h(s))
        out = np.zeros((2, 2, len(tau_nodes)))
        for q_idx, tq in enumerate(tau_nodes):
            for j in (1, 2):
                k_reg, near_w, near_theta, bare_pref, r_val = \
                    self._kernel_pieces(j, float(s), float(tq), self.delta)
                sing = bare_pref * float(np.sum(near_w * near_theta)) \
                    if len(near_w) else 0.0
                base = k_reg + sing
                for i in (1, 2):
                    q_other = float(self.problem.q(3 - i, s))
                    b_other = float(self.problem.diffusion(3 - i, s, h_s))
                    out[i - 1, j - 1, q_idx] = d[i - 1] * (
                        base + (-1.0) ** i * q_other / math.sqrt(b_other) * r_val)
        return out


def default_delta(problem: Problem) -> float:
    """Half the minimal atom distance to the membrane over the horizon."""
    meas = problem.wentzell.measure
    if meas.is_null:
        return math.inf
    ss = np.linspace(0.0, problem.horizon, 65)
    hs = np.asarray(problem.membrane(ss), dtype=float)
    dist = min(float(np.min(np.abs(np.asarray(a.position(ss)) - hs)))
               for a in meas.atoms)
    return 0.5 * dist


def m_delta_witness(problem: Problem, delta: float) -> float:
    """Sampled smallness witness of the near-membrane measure mass."""
    meas = problem.wentzell.measure
    if meas.is_null or not math.isfinite(delta):
        return 0.0
    b_min, b_max = problem.diffusion_bounds_rough()
    ss = np.linspace(0.0, problem.horizon, 65)
    hs = np.asarray(problem.membrane(ss), dtype=float)
    q0 = float(np.min(np.asarray(problem.wentzell.q1(ss))
                      + np.asarray(problem.wentzell.q2(ss))))
    worst = 0.0
    for k, s in enumerate(ss):
        total = 0.0
        for a in meas.atoms:
            gap = abs(float(a.position(s)) - hs[k])
            if gap < delta:
                total += gap * float(a.weight(s))
        worst = max(worst, total)
    return (b_max / b_min) ** 2 * math.pi / (2.0 * q0) * worst


# ---------------------------------------------------------------------------
# right-hand side
# ---------------------------------------------------------------------------

class RightHandSide:
    """Mesh values of the trace gap, the flux data and their combinations."""

    def __init__(self, assembler: KernelAssembler, phi: InitialFunction, t: float):
        self.assembler = assembler
        self.phi = phi
        self.t = t
        left, right = assembler.problem.left, assembler.problem.right
        # identical generators on both sides make the Poisson traces equal
        # for every initial function: the trace gap vanishes structurally
        self._identical_sides = (
            (left.drift.kind, left.drift.params)
            == (right.drift.kind, right.drift.params)
            and (left.diffusion.kind, left.diffusion.params)
            == (right.diffusion.kind, right.diffusion.params))

    def trace_gap(self, s: float) -> float:
        """Difference of the Poisson traces on the membrane (right minus left)."""
        if s >= self.t:
            raise TimeOrderError("trace gap needs s < t")
        if self._identical_sides:
            return 0.0
        ev = self.assembler.evaluator
        h = float(self.assembler.problem.h(s))
        return (ev.poisson(2, s, h, self.t, self.phi)
                - ev.poisson(1, s, h, self.t, self.phi))

    def flux_gap(self, s: float) -> float:
        """Flux data: weighted Poisson-derivative gap plus measure increments."""
        ev = self.assembler.evaluator
        prob = self.assembler.problem
        h = float(prob.h(s))
        out = (float(prob.q(2, s)) * ev.poisson(2, s, h, self.t, self.phi, p=1)
               - float(prob.q(1, s)) * ev.poisson(1, s, h, self.t, self.phi, p=1))
        y, w, sides = self.assembler._atom_data(s)
        for yk, wk, side in zip(y, w, sides):
            if wk == 0.0:
                continue
            out += wk * (ev.poisson(side, s, yk, self.t, self.phi)
                         - ev.poisson(side, s, h, self.t, self.phi))
        return out

    def transformed_trace_gap(self, s: float) -> float:
        """Holmgren transform of the trace gap at s."""
        if self._identical_sides:
            return 0.0

        def f(rho):
            rho = np.atleast_1d(np.asarray(rho, dtype=float))
            return np.array([self.trace_gap(min(r, self.t - 1e-14)) for r in rho])

        return holmgren_transform(f, s, self.t, n=self.assembler.config.n_holmgren,
                                  left_exp=self.assembler.problem.kernel_time_exponent())

    def combined(self, i: int, s: float) -> float:
        """Right-hand side Psi_i of the eliminated second-kind system."""
        prob = self.assembler.problem
        h = float(prob.h(s))
        d1, d2 = self.assembler.coupling_weights(s)
        d_i = d1 if i == 1 else d2
        q_other = float(prob.q(3 - i, s))
        b_other = float(prob.diffusion(3 - i, s, h))
        phi_term = self.transformed_trace_gap(s)
        return d_i * (self.flux_gap(s)
                      + (-1.0) ** i * q_other / math.sqrt(b_other) * phi_term)


# ---------------------------------------------------------------------------
# the solve
# ---------------------------------------------------------------------------

@dataclass
class SolveDiagnostics:
    iterate_sups: list = field(default_factory=list)
    iterations: int = 0
    delta: float = math.inf
    m_delta: float = 0.0
    converged: bool = False
    # numerical witness that the regularized densities stay bounded by a
    # multiple of the initial-function norm
    w_sup_ratio: float = 0.0


def solve_densities(problem: Problem, phi: InitialFunction, t: float,
                    s_min: float = 0.0, config: SolverConfig | None = None,
                    evaluator: PotentialEvaluator | None = None) -> DensityPair:
    """Solve the interface system by successive approximations.

    Returns the regularized densities W_i on a graded mesh over [s_min, t).
    Raises SeriesDivergenceError when the iterate sup norms stop decreasing
    past the contraction onset, and reports the measure smallness witness in
    the exception message and in the attached diagnostics.
    """
    config = config or SolverConfig()
    if config.mesh_n < 8:
        raise MeshTooCoarseError("density mesh needs at least 8 nodes")
    if not s_min < t:
        raise TimeOrderError("solve needs s_min < t")
    assembler = KernelAssembler(problem, evaluator, config)
    rhs = RightHandSide(assembler, phi, t)
    mesh = graded_mesh(t, s_min, config.mesh_n, config.mesh_gamma)
    n = len(mesh)
    sqrt_rem = np.sqrt(t - mesh)

    w = np.zeros((2, n))
    for idx, s in enumerate(mesh):
        w[0, idx] = rhs.combined(1, float(s)) * sqrt_rem[idx]
        w[1, idx] = rhs.combined(2, float(s)) * sqrt_rem[idx]

    # kernel tables: per node, quadrature times and full kernel values
    exponent = problem.kernel_time_exponent()
    tau_nodes = np.zeros((n, config.n_kernel))
    kern = np.zeros((n, 2, 2, config.n_kernel))
    if not assembler.kernels_vanish:
        for idx, s in enumerate(mesh):
            tau, wt = singular_rule(float(s), t, config.n_kernel,
                                    left_exp=exponent, right_exp=-0.5)
            tau_nodes[idx] = tau
            kern[idx] = assembler.system_kernel_matrix(float(s), tau) \
                * (wt * (t - tau) ** (-0.5))[None, None, :]
    else:
        for idx, s in enumerate(mesh):
            tau_nodes[idx] = singular_rule(float(s), t, config.n_kernel,
                                           left_exp=exponent, right_exp=-0.5)[0]

    diag = SolveDiagnostics(delta=assembler.delta,
                            m_delta=m_delta_witness(problem, assembler.delta))
    scale = max(phi.sup_norm, 1e-300)
    total = w.copy()
    current = w
    sup = float(np.max(np.abs(current)))
    diag.iterate_sups.append(sup)
    rise_count = 0
    for k in range(1, config.k_max + 1):
        if sup <= config.tol_v * scale:
            diag.converged = True
            break
        nxt = np.zeros_like(current)
        for idx in range(n):
            w_interp = np.stack([np.interp(tau_nodes[idx], mesh, current[jd])
                                 for jd in (0, 1)])
            for i in (0, 1):
                nxt[i, idx] = sqrt_rem[idx] * float(
                    np.sum(kern[idx, i] * w_interp))
        current = nxt
        total += current
        sup = float(np.max(np.abs(current)))
        diag.iterate_sups.append(sup)
        diag.iterations = k
        if k > config.contraction_onset and sup > diag.iterate_sups[-2]:
            rise_count += 1
            if rise_count >= 3:
                raise SeriesDivergenceError(
                    f"iterate sup norms not contracting (m_delta witness "
                    f"{diag.m_delta:.3g}, delta {diag.delta:.3g})")
        else:
            rise_count = 0
    else:
        if sup > config.tol_v * scale:
            raise SeriesDivergenceError(
                f"no convergence within k_max={config.k_max} iterations "
                f"(m_delta witness {diag.m_delta:.3g})")
    densities = DensityPair(t, mesh, total[0], total[1])
    diag.w_sup_ratio = densities.max_w() / scale
    densities.diagnostics = diag
    return densities


def first_kind_residual(problem: Problem, phi: InitialFunction, t: float,
                        densities: DensityPair,
                        evaluator: PotentialEvaluator | None = None) -> np.ndarray:
    """Residual of the first-kind continuity equation at the mesh nodes.

    The solve uses only the Holmgren-transformed system, so this is an
    independent consistency witness of the equivalence.
    """
    ev = evaluator or PotentialEvaluator(problem)
    assembler = KernelAssembler(problem, ev)
    rhs = RightHandSide(assembler, phi, t)
    out = np.zeros(len(densities.mesh))
    for idx, s in enumerate(densities.mesh):
        h = float(problem.h(s))
        lhs = (ev.layer(1, float(s), h, t, densities)
               - ev.layer(2, float(s), h, t, densities))
        out[idx] = lhs - rhs.trace_gap(float(s))
    return out


# ---------------------------------------------------------------------------
# secondary route for the factored singular part (validation)
# ---------------------------------------------------------------------------

def singular_part_time_integral(assembler: KernelAssembler, i: int, j: int,
                                s: float, t: float, densities: DensityPair,
                                delta: float | None = None) -> float:
    """Time integral of the factored singular kernel against the density.

    Substitution route: theta stays an outer quadrature variable (with the
    inverse-square-root endpoint weight at theta = 1) and the inner time
    integral uses u = g/sqrt(tau-s), which maps the (tau-s)^(-3/2)
    exponential-weighted singularity onto a Gaussian-type integrand, the
    same change of variables that produces the closed-form full-interval
    integral.  Used to validate the direct product-quadrature route.
    """
    prob = assembler.problem
    config = assembler.config
    delta = assembler.delta if delta is None else delta
    h_s = float(prob.h(s))
    b_j_s = float(prob.diffusion(j, s, h_s))
    d1, d2 = assembler.coupling_weights(s)
    d_i = d1 if i == 1 else d2
    y, w, sides = assembler._atom_data(s)
    total = 0.0
    theta, w_theta = singular_rule(0.0, 1.0, config.n_theta, right_exp=-0.5)
    for yk, wk, side in zip(y, w, sides):
        if side != j or wk == 0.0 or abs(yk - h_s) >= delta:
            continue
        for th, wth in zip(theta, w_theta):
            g_bar = math.sqrt((1.0 - th) * (yk - h_s) ** 2 / (2.0 * b_j_s))
            u_min = g_bar / math.sqrt(t - s)
            parts = [singular_rule(u_min, u_min + 1.0, config.n_u, left_exp=-0.5),
                     singular_rule(u_min + 1.0, u_min + 9.0, config.n_u)]
            for u, wu in parts:
                tau = s + g_bar ** 2 / u ** 2
                b_tau = np.asarray(prob.diffusion(j, tau, prob.h(tau)), dtype=float)
                h_tau = np.asarray(prob.h(tau), dtype=float)
                a_val = ((1.0 - th) * (yk - h_tau) ** 2 + th * (h_s - h_tau) ** 2)
                expo = np.exp(-a_val / (2.0 * b_tau * (tau - s)))
                pref = -d_i / (2.0 * math.sqrt(2 * math.pi) * b_tau ** 1.5)
                dens = densities.w(j, np.minimum(tau, densities.t - 1e-14)) \
                    * (t - tau) ** (-0.5)
                vals = pref * (yk - h_s) ** 2 * wk * expo * dens
                total += (2.0 / g_bar) * float(np.sum(vals * wu)) * wth
    return total
