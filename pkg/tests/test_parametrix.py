"""Fundamental-solution tests: Gaussian part, Neumann correction, moment identities."""

import math

import numpy as np
import pytest

from memdiff.errors import TimeOrderError
from memdiff.parametrix import (
    CorrectionQuadrature,
    FundamentalSolution,
    PrincipalKernel,
    audit_correction_envelope,
    build_correction,
    moment_residuals,
)
from memdiff.problem import CoefficientField, SideSpec


def side(a=0.0, b=1.0, alpha=0.75):
    if callable(a) or callable(b):
        raise TypeError
    return SideSpec(CoefficientField.constant(a), CoefficientField.constant(b),
                    holder_exponent=alpha)


def sine_b_side(base=1.0, amp=0.25, alpha=0.75):
    return SideSpec(CoefficientField.constant(0.0),
                    CoefficientField("sinusoidal-in-s-and-x", [base, amp, 1.0, 0.0, 0.0]),
                    holder_exponent=alpha)


def drifted_kernel(s, x, t, y, a=1.0, b=1.0):
    """Closed-form fundamental solution for constant drift and diffusion."""
    dt = t - s
    return math.exp(-((y - x - a * dt) ** 2) / (2 * b * dt)) / math.sqrt(2 * math.pi * b * dt)


# -- principal part -----------------------------------------------------------

def test_principal_reference_values():
    pk = PrincipalKernel(side(b=1.0))
    assert pk(0.0, 0.0, 1.0, 0.0) == pytest.approx(0.3989422804014327, abs=1e-12)
    assert pk(0.0, 0.0, 1.0, 1.0) == pytest.approx(0.24197072451914337, abs=1e-12)
    pk2 = PrincipalKernel(side(b=2.0))
    assert pk2(0.0, 0.0, 1.0, 0.0) == pytest.approx(0.28209479177387814, abs=1e-12)


def test_principal_requires_time_order():
    pk = PrincipalKernel(side())
    with pytest.raises(TimeOrderError):
        pk(1.0, 0.0, 0.5, 0.0)


def test_principal_positive_and_symmetric():
    pk = PrincipalKernel(side(b=1.3))
    rng = np.random.default_rng(3)
    for _ in range(50):
        s, dt = rng.uniform(0, 1), rng.uniform(0.05, 1.0)
        x, y = rng.normal(size=2)
        v = pk(s, x, s + dt, y)
        assert v > 0
        assert v == pytest.approx(pk(s, y, s + dt, x), rel=1e-12)


# -- correction kernel ---------------------------------------------------------

def test_null_correction_for_driftless_constant_diffusion():
    fs = FundamentalSolution(side(a=0.0, b=1.0))
    assert fs.is_exact
    assert fs.eval(0.1, 0.2, 0.9, -0.3) == pytest.approx(
        fs.principal(0.1, 0.2, 0.9, -0.3), abs=0.0)


def test_drifted_kernel_recovered():
    fs = FundamentalSolution(side(a=1.0, b=1.0), CorrectionQuadrature(depth=12))
    for y in (-0.3, 0.0, 0.4, 0.9):
        got = fs.eval(0.0, 0.0, 0.5, y)
        want = drifted_kernel(0.0, 0.0, 0.5, y)
        assert got == pytest.approx(want, abs=3e-3), f"y={y}"


def test_variable_diffusion_normalization():
    fs = FundamentalSolution(sine_b_side())
    total = fs.terminal_integral(0.0, 0.0, 0.5, lambda y: np.ones_like(y), ("one",))
    assert total == pytest.approx(1.0, abs=2e-3)


def test_derivative_consistency_with_finite_differences():
    fs = FundamentalSolution(sine_b_side())
    s, x, t, y = 0.0, 0.0, 1.0, 0.3
    eps = 1e-3
    fd = (fs.eval(s, x + eps, t, y) - fs.eval(s, x - eps, t, y)) / (2 * eps)
    got = fs.eval(s, x, t, y, p=1)
    assert got == pytest.approx(fd, rel=1e-4)


def test_first_derivative_vanishes_at_center_constant_coefficients():
    fs = FundamentalSolution(side())
    assert fs.eval(0.0, 0.4, 1.0, 0.4, p=1) == pytest.approx(0.0, abs=1e-14)


def test_positivity_on_samples():
    fs = FundamentalSolution(sine_b_side())
    rng = np.random.default_rng(11)
    for _ in range(10):
        s, dt = rng.uniform(0, 0.4), rng.uniform(0.1, 0.6)
        x, y = rng.normal(scale=0.8, size=2)
        assert fs.eval(s, x, s + dt, y) > 0.0


# -- moment identities ---------------------------------------------------------

def test_moments_exact_for_plain_heat_kernel():
    fs = FundamentalSolution(side())
    r0, r1, r2 = moment_residuals(fs, 0.0, 0.0, 0.7)
    assert r0 < 1e-10
    assert r1 < 1e-10
    assert r2 < 1e-10


def test_drifted_first_moment_matches_displacement():
    # constant a=1, b=1: mean displacement over an interval of length 0.5 is 0.5
    fs = FundamentalSolution(side(a=1.0, b=1.0), CorrectionQuadrature(depth=12))
    m1 = fs.terminal_integral(0.0, 0.0, 0.5, lambda y: y, ("mean",))
    assert m1 == pytest.approx(0.5, abs=5e-3)
    r0, r1, r2 = moment_residuals(fs, 0.0, 0.0, 0.5)
    assert r0 < 5e-3
    assert r1 < 5e-3
    assert r2 < 2e-2


def test_variable_coefficient_moment_residuals_small():
    # the refinement-halving behavior is covered by the acceptance suite
    fs = FundamentalSolution(sine_b_side())
    res = moment_residuals(fs, 0.0, 0.0, 0.5)
    assert max(res) < 1e-3


def test_correction_terms_decay():
    fs = FundamentalSolution(sine_b_side())
    fs.eval(0.0, 0.0, 0.5, 0.2)
    (tab,) = [t for (k, *_), t in fs.correction._tables.items() if k == "point"]
    sups = tab.term_sups
    assert len(sups) >= 2
    assert sups[-1] < sups[0]


def test_correction_depth_consistency():
    # once the series has converged, one extra depth changes nothing visible
    vals = []
    for depth in (7, 8):
        fs = FundamentalSolution(sine_b_side(), CorrectionQuadrature(depth=depth))
        vals.append(fs.eval(0.0, 0.1, 0.5, 0.2))
    assert vals[0] == pytest.approx(vals[1], abs=1e-8)


def test_correction_envelope_audit():
    fs = FundamentalSolution(sine_b_side())
    rng = np.random.default_rng(5)
    samples = [(0.0, rng.uniform(-0.5, 0.5), 0.5, rng.uniform(-0.5, 0.5))
               for _ in range(12)]
    C, c, excess = audit_correction_envelope(fs, samples)
    assert np.isfinite(C) and C >= 0.0
    assert np.isfinite(c)


def test_build_correction_flags_null_case():
    corr = build_correction(side(a=0.0, b=2.5))
    assert corr.is_null
    corr2 = build_correction(sine_b_side(), depth=6)
    assert not corr2.is_null
    assert corr2.quad.depth == 6
