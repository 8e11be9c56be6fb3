import math

import numpy as np
import pytest

import oracles
from sau.activations import SauParams, leaky_relu, sau_exact_forward
from sau.mollifier import (
    BudgetExceeded,
    Mollifier,
    MollifierInvalid,
    QuadratureSpec,
    broken_double_mass_mollifier,
    bump_mollifier,
    check_mollifier,
    convolve_at,
    gaussian_mollifier,
    scale_mollifier,
    smoothed_function,
)
from sau.scalar_math import INV_SQRT_2PI


def test_quadrature_spec_defaults_and_validation():
    q = QuadratureSpec()
    assert q.abs_tolerance == 1e-10
    assert q.max_subdivisions == 2000
    with pytest.raises(ValueError):
        QuadratureSpec(abs_tolerance=0.0)
    with pytest.raises(ValueError):
        QuadratureSpec(abs_tolerance=-1e-10)
    with pytest.raises(ValueError):
        QuadratureSpec(max_subdivisions=0)


def test_builtin_mollifiers_pass_axioms():
    report = check_mollifier(gaussian_mollifier())
    assert abs(report.mass - 1.0) <= 1e-10
    assert report.min_density >= 0.0
    assert report.support_leak < 1e-12

    report = check_mollifier(bump_mollifier())
    assert abs(report.mass - 1.0) <= 1e-10
    assert report.min_density >= 0.0
    assert report.support_leak == 0.0


def test_builtin_densities_at_zero():
    assert gaussian_mollifier().density(0.0) == INV_SQRT_2PI
    bump = bump_mollifier()
    expected = oracles.BUMP_NORM_CONSTANT * math.exp(-1.0)
    assert abs(bump.density(0.0) - expected) <= 1e-12
    # identically zero outside the open unit interval, including the edge
    assert bump.density(1.0) == 0.0
    assert bump.density(-1.0) == 0.0
    assert bump.density(3.7) == 0.0


def test_bump_normalization_against_frozen_integral():
    bump = bump_mollifier()
    # density(0) = e^{-1} / integral of e^{-1/(1-y^2)}
    measured_norm = bump.density(0.0) * math.exp(1.0)
    assert abs(measured_norm - 1.0 / oracles.BUMP_RAW_MASS) <= 1e-10


def test_broken_fixture_fails_mass_axiom():
    with pytest.raises(MollifierInvalid) as exc_info:
        check_mollifier(broken_double_mass_mollifier())
    exc = exc_info.value
    assert exc.axiom == "mass"
    assert abs(exc.report.mass - 2.0) <= 1e-8


def test_negative_density_fails_nonnegative_axiom():
    # unit mass but dips negative near the edges: 1.5 - 3y^2 on [-1, 1]
    dip = Mollifier(lambda y: 1.5 - 3.0 * y * y if abs(y) < 1.0 else 0.0,
                    1.0, "dipping")
    with pytest.raises(MollifierInvalid) as exc_info:
        check_mollifier(dip)
    assert exc_info.value.axiom == "nonnegative"
    assert exc_info.value.report.min_density < 0.0


def test_mass_outside_support_fails_support_axiom():
    # unit mass inside the claimed support plus an exponential tail beyond
    def density(y):
        a = abs(y)
        if a < 1.0:
            return math.cos(0.5 * math.pi * y) ** 2
        return 0.005 * math.exp(-(a - 1.0))

    leaky_support = Mollifier(density, 1.0, "leaking")
    with pytest.raises(MollifierInvalid) as exc_info:
        check_mollifier(leaky_support)
    assert exc_info.value.axiom == "support"
    assert abs(exc_info.value.report.support_leak - 0.01) <= 1e-6


def test_scale_mollifier():
    gaussian = gaussian_mollifier()
    same = scale_mollifier(gaussian, 1.0)
    for y in (-2.0, -0.5, 0.0, 1.3):
        assert same.density(y) == gaussian.density(y)
    doubled = scale_mollifier(gaussian, 2.0)
    assert abs(doubled.density(0.0) - oracles.SQRT_2_OVER_PI) <= 1e-15
    assert scale_mollifier(bump_mollifier(), 4.0).effective_support == 0.25
    # mass invariant survives scaling
    report = check_mollifier(scale_mollifier(gaussian, 4.0))
    assert abs(report.mass - 1.0) <= 1e-10
    for bad in (0.0, -2.0):
        with pytest.raises(ValueError):
            scale_mollifier(gaussian, bad)


def test_convolve_constant_and_identity():
    for m in (gaussian_mollifier(), bump_mollifier()):
        for x in (-1.3, 0.0, 0.7):
            assert abs(convolve_at(lambda u: 1.0, m, x) - 1.0) <= 1e-9
    got = convolve_at(lambda u: u, gaussian_mollifier(), 0.7)
    assert abs(got - 0.7) <= 1e-9


def test_convolve_absolute_value_closed_form():
    # |.| against the standard Gaussian at 0 is E|Z| = sqrt(2/pi)
    got = convolve_at(abs, gaussian_mollifier(), 0.0)
    assert abs(got - oracles.SQRT_2_OVER_PI) <= 1e-9


def test_smoothed_function_matches_closed_form_examples():
    gaussian = gaussian_mollifier()
    smoothed = smoothed_function(leaky_relu(0.15), gaussian, 1.0)
    assert abs(smoothed(0.0) - sau_exact_forward(0.0, SauParams(0.15, 1.0))) \
        <= 1e-9
    smoothed = smoothed_function(leaky_relu(1.0), gaussian, 3.0)
    assert abs(smoothed(-2.0) + 2.0) <= 1e-9
    smoothed = smoothed_function(leaky_relu(0.0), bump_mollifier(), 10.0)
    assert abs(smoothed(1.0) - 1.0) <= 1e-9


def test_oracle_equivalence_spot_grid():
    # module-level spot check; the full grid runs in the acceptance suite
    gaussian = gaussian_mollifier()
    for alpha in (0.0, 0.15, 0.5):
        for n in (1.0, 5.0, 20.0):
            smoothed = smoothed_function(leaky_relu(alpha), gaussian, n)
            params = SauParams(alpha, n)
            for x in (-2.5, -0.5, 0.0, 0.5, 2.5):
                got = smoothed(x)
                want = sau_exact_forward(x, params)
                assert abs(got - want) <= 1e-8, (alpha, n, x)


def test_convolution_commutes():
    # (f*g)(x) = (g*f)(x): swap which density acts as the mollifier
    bump = bump_mollifier()
    gaussian = gaussian_mollifier()
    for x in np.linspace(-2.0, 2.0, 20):
        ab = convolve_at(bump.density, gaussian, float(x))
        ba = convolve_at(gaussian.density, bump, float(x))
        assert abs(ab - ba) <= 1e-9, x


def test_approximate_identity_convergence():
    f = leaky_relu(0.15)
    gaussian = gaussian_mollifier()
    ns = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0]
    for x in (-1.0, -0.1, 0.0, 0.1, 1.0):
        devs = [abs(smoothed_function(f, gaussian, n)(x) - f(x)) for n in ns]
        # non-increasing up to the quadrature noise floor
        assert all(b <= a + 1e-10 for a, b in zip(devs, devs[1:])), (x, devs)
        assert devs[-1] < 1e-2


def test_second_difference_probe():
    # D2/h^2 of the smoothed function stabilizes to a finite limit; the raw
    # kinked map diverges like 1/h under the same probe
    f = leaky_relu(0.15)
    smoothed = smoothed_function(f, gaussian_mollifier(), 4.0)
    hs = [0.4, 0.2, 0.1, 0.05]

    def probe(fun, h):
        return (fun(h) - 2.0 * fun(0.0) + fun(-h)) / (h * h)

    smooth_vals = [probe(smoothed, h) for h in hs]
    steps = [abs(b - a) for a, b in zip(smooth_vals, smooth_vals[1:])]
    assert steps[-1] < steps[0]
    assert abs(smooth_vals[-1] - smooth_vals[-2]) \
        <= 0.05 * abs(smooth_vals[-1])

    raw_vals = [probe(f, h) for h in hs]
    for a, b in zip(raw_vals, raw_vals[1:]):
        assert abs(b) > 1.9 * abs(a)  # ~2x growth per halving of h


def test_budget_exceeded():
    # a kink off the split point with a single allowed subdivision cannot
    # reach the requested tolerance
    tight = QuadratureSpec(abs_tolerance=1e-14, max_subdivisions=1)
    with pytest.raises(BudgetExceeded) as exc_info:
        convolve_at(lambda u: abs(u - 0.3), gaussian_mollifier(), 0.0, tight)
    exc = exc_info.value
    assert exc.requested_tolerance == 1e-14
    assert exc.achieved_error > 1e-14
    assert "1e-14" in str(exc) or "tolerance" in str(exc).lower() \
        or "subdivisions" in str(exc)


def test_smoothed_function_propagates_budget_error():
    tight = QuadratureSpec(abs_tolerance=1e-15, max_subdivisions=1)
    smoothed = smoothed_function(leaky_relu(0.15), gaussian_mollifier(), 5.0,
                                 tight)
    with pytest.raises(BudgetExceeded):
        smoothed(0.37)
