"""Validation, classification and catalog-evaluation tests."""

import numpy as np
import pytest

from memdiff.errors import AtomOnMembraneError, ConfigError, DegenerateWentzellError
from memdiff.problem import (
    CoefficientField,
    InitialFunction,
    MembranePath,
    SideSpec,
    TimeFunction,
    Problem,
    WentzellData,
    JumpMeasure,
    side_of,
    validate,
)

from conftest import make_problem, atom_at


def test_constant_problem_passes_all_conditions(symmetric_problem):
    report = validate(symmetric_problem, grid_resolution=33)
    assert report.passed
    stat = report["I"].statistic
    assert stat["b_min"] == pytest.approx(1.0)
    assert stat["b_max"] == pytest.approx(1.0)
    assert report["IV"].statistic["q0"] == pytest.approx(1.0)


def test_sampled_diffusion_extrema_match_declared_band():
    # b(s,x) = 1 + 0.5 sin x has true extrema 0.5 and 1.5
    b = CoefficientField("sinusoidal-in-s-and-x", [1.0, 0.5, 1.0, 0.0, 0.0])
    side = SideSpec(CoefficientField.constant(0.0), b, diffusion_min=0.5,
                    diffusion_max=1.5)
    prob = Problem(left=side, right=side, membrane=MembranePath.constant(0.0),
                   wentzell=WentzellData(TimeFunction.constant(0.5),
                                         TimeFunction.constant(0.5)),
                   horizon=1.0, x_window=(-12.0, 12.0))
    report = validate(prob, grid_resolution=101)
    assert report.passed
    assert report["I"].statistic["b_min"] >= 0.5 - 1e-12
    assert report["I"].statistic["b_max"] <= 1.5 + 1e-12
    # independent oracle: sample the closed form on the same grid
    xs = np.linspace(-12.0, 12.0, 101)
    assert report["I"].statistic["b_min"] == pytest.approx(float(np.min(1 + 0.5 * np.sin(xs))))


def test_degenerate_wentzell_raises():
    with pytest.raises(DegenerateWentzellError):
        validate(make_problem(q1=0.0, q2=0.0), grid_resolution=17)


def test_atom_on_membrane_raises():
    prob = make_problem(atoms=(atom_at(0.0),))
    with pytest.raises(AtomOnMembraneError):
        validate(prob, grid_resolution=17)


def test_validate_is_deterministic(symmetric_problem):
    r1 = validate(symmetric_problem, grid_resolution=21).to_dict()
    r2 = validate(symmetric_problem, grid_resolution=21).to_dict()
    assert r1 == r2


def test_side_of_basic_cases():
    prob = make_problem()
    assert side_of(prob, 0.3, -1.0) == "left"
    assert side_of(prob, 0.3, 1.0) == "right"
    assert side_of(prob, 0.3, 1e-15) == "membrane"
    lin = make_problem(membrane=MembranePath("linear", [0.0, 1.0]))
    assert side_of(lin, 0.5, 0.5) == "membrane"


def test_side_of_partitions_the_line():
    prob = make_problem(membrane=MembranePath("sinusoidal", [0.0, 0.1, 2.0]))
    rng = np.random.default_rng(7)
    for _ in range(200):
        s = rng.uniform(0.0, prob.horizon)
        x = rng.uniform(-3.0, 3.0)
        labels = [side_of(prob, s, x)]
        assert labels[0] in ("left", "membrane", "right")
        h = float(prob.membrane(s))
        tol = prob.membrane_tolerance(s)
        if x < h - tol:
            assert labels[0] == "left"
        elif x > h + tol:
            assert labels[0] == "right"
        else:
            assert labels[0] == "membrane"


def test_membrane_band_width():
    prob = make_problem()
    tol = prob.membrane_tolerance(0.1)
    assert side_of(prob, 0.1, 0.999 * tol) == "membrane"
    assert side_of(prob, 0.1, 1.5 * tol) == "right"
    assert side_of(prob, 0.1, -1.5 * tol) == "left"


def test_coefficient_catalog_evaluation():
    aff = CoefficientField("affine-in-x", [1.0, 2.0])
    assert aff(0.0, 3.0) == pytest.approx(7.0)
    tab = CoefficientField.tabulated([0.0, 1.0], [-1.0, 1.0],
                                     [[1.0, 2.0], [3.0, 4.0]])
    assert tab(0.0, -1.0) == pytest.approx(1.0)
    assert tab(1.0, 1.0) == pytest.approx(4.0)
    assert tab(0.5, 0.0) == pytest.approx(2.5)
    # clamped outside the table
    assert tab(2.0, 5.0) == pytest.approx(4.0)
    with pytest.raises(ConfigError):
        CoefficientField("nope", [1.0])


def test_time_function_catalog():
    lin = TimeFunction("linear", [1.0, -2.0])
    assert lin(0.5) == pytest.approx(0.0)
    sine = TimeFunction("sinusoidal", [0.0, 0.1, 2.0])
    assert sine(0.25) == pytest.approx(0.1 * np.sin(0.5))
    tab = TimeFunction("tabulated", [3, 0.0, 0.5, 1.0, 0.0, 1.0, 0.0])
    assert tab(0.25) == pytest.approx(0.5)


def test_initial_function_values_and_derivatives():
    phi = InitialFunction.gaussian(amp=2.0, center=0.5, width=0.7)
    assert phi(0.5) == pytest.approx(2.0)
    assert phi.sup_norm == pytest.approx(2.0)
    # derivative against central differences
    for x in (-0.3, 0.2, 1.1):
        eps = 1e-5
        fd1 = (phi(x + eps) - phi(x - eps)) / (2 * eps)
        fd2 = (phi(x + eps) - 2 * phi(x) + phi(x - eps)) / eps ** 2
        assert phi.derivative(x, 1) == pytest.approx(fd1, rel=1e-6, abs=1e-8)
        assert phi.derivative(x, 2) == pytest.approx(fd2, rel=1e-4, abs=1e-6)
    one = InitialFunction.one()
    assert one(12.3) == 1.0
    assert one.sup_norm == 1.0


def test_polynomial_clamped_taper():
    # (x-0)^2 inside |x| <= 1, tapered to zero at |x| = 2
    phi = InitialFunction("polynomial-clamped", [0.0, 1.0, 2.0, 0.0, 0.0, 1.0])
    assert phi(0.5) == pytest.approx(0.25)
    assert phi(3.0) == 0.0
    assert phi(1.999) < 4.0 * 0.02
    xs = np.linspace(-3, 3, 1201)
    vals = phi(xs)
    assert np.all(np.isfinite(vals))
    # continuity across the taper edges
    assert np.max(np.abs(np.diff(vals))) < 0.05


def test_tabulated_initial_function_roundtrip():
    xs = np.linspace(-2, 2, 41)
    phi = InitialFunction.from_samples(xs, np.cos(xs))
    assert phi(0.0) == pytest.approx(1.0, abs=1e-6)
    assert phi(1.0) == pytest.approx(np.cos(1.0), abs=1e-4)
    # constant extension outside
    assert phi(10.0) == pytest.approx(np.cos(2.0), abs=1e-12)


def test_problem_json_roundtrip(skew_problem):
    d = skew_problem.to_dict()
    back = Problem.from_dict(d)
    assert back.to_dict() == d
    assert back.q(2, 0.3) == pytest.approx(0.75)


def test_problem_from_dict_missing_key():
    with pytest.raises(ConfigError, match="membrane"):
        Problem.from_dict({"left": {}, "right": {}, "wentzell": {}, "horizon": 1.0})


def test_tabulated_kinds_json_roundtrip():
    tab_c = CoefficientField.tabulated([0.0, 1.0], [-1.0, 1.0],
                                       [[1.0, 2.0], [3.0, 4.0]])
    back_c = CoefficientField.from_dict(tab_c.to_dict())
    assert back_c(0.5, 0.0) == pytest.approx(tab_c(0.5, 0.0))
    tab_t = TimeFunction("tabulated", [3, 0.0, 0.5, 1.0, 0.2, 0.9, 0.2])
    back_t = TimeFunction.from_dict(tab_t.to_dict())
    assert back_t(0.3) == pytest.approx(tab_t(0.3))
    phi = InitialFunction.from_samples(np.linspace(-1, 1, 9),
                                       np.linspace(-1, 1, 9) ** 2)
    back_phi = InitialFunction.from_dict(phi.to_dict())
    assert back_phi(0.4) == pytest.approx(phi(0.4))


def test_atom_moment_reported():
    prob = make_problem(atoms=(atom_at(-1.0, 2.0), atom_at(0.5, 1.0)))
    report = validate(prob, grid_resolution=17)
    assert report["IV"].statistic["atom_moment_max"] == pytest.approx(2.0)
