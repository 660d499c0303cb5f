"""Special functions and quadrature engines.

Every derived expectation here is produced by an independent oracle in this
file (power series, integral representations through scipy.integrate.quad,
or closed forms differentiated by hand) and frozen as a literal where a
single number is wanted.
"""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from vacorr.specfun import (
    QuadratureConvergenceError,
    QuadratureSpec,
    auxiliary_f,
    auxiliary_f_deriv,
    graded_panels,
    integrate_imaginary_frequency,
    integrate_oscillatory,
    integrate_pv,
    integrate_pv_multi,
    panel_nodes,
    sine_cosine_integrals,
)

EULER_GAMMA = 0.5772156649015328606


# ----------------------------------------------------------------------
# oracles
# ----------------------------------------------------------------------

def si_ci_series(z: float):
    """Power-series Si(z) - pi/2 and Ci(z); converges fast for z <= 12."""
    si_sum = 0.0
    term = z
    n = 0
    while abs(term) > 1e-18:
        si_sum += term / (2 * n + 1)
        term *= -z * z / ((2 * n + 2) * (2 * n + 3))
        n += 1
    ci_sum = 0.0
    term = -z * z / 2.0
    n = 1
    while abs(term) > 1e-18:
        ci_sum += term / (2 * n)
        term *= -z * z / ((2 * n + 1) * (2 * n + 2))
        n += 1
    return si_sum - 0.5 * math.pi, EULER_GAMMA + math.log(z) + ci_sum


def f_from_integral(z: float) -> float:
    """f(z) = int_0^inf exp(-z t) / (1 + t^2) dt by adaptive quadrature."""
    val, _ = quad(lambda t: math.exp(-z * t) / (1.0 + t * t), 0.0, np.inf,
                  epsabs=1e-13, epsrel=1e-13, limit=300)
    return val


def pv_sin_closed(a: float, s: float) -> float:
    """PV int_0^inf sin(w s)/(w - a) dw by the subtraction route, closed form."""
    x = a * s
    si, ci = sine_cosine_integrals(x)
    return math.cos(x) * (math.pi + si) - math.sin(x) * ci


def damped_cubic_closed(eta: float) -> float:
    """int_0^inf w^3 cos(w) e^(-eta w) dw = Re Gamma(4)/(eta - i)^4."""
    return (6.0 * complex(eta, -1.0) ** -4).real


# ----------------------------------------------------------------------
# si / ci / f
# ----------------------------------------------------------------------

class TestSineCosineIntegrals:
    @pytest.mark.parametrize("z", [0.1, 0.5, 1.0, 2.0, 5.0, 8.0, 11.0])
    def test_against_power_series(self, z):
        si, ci = sine_cosine_integrals(z)
        si_ref, ci_ref = si_ci_series(z)
        assert si == pytest.approx(si_ref, abs=1e-12)
        assert ci == pytest.approx(ci_ref, abs=1e-12)

    def test_frozen_point(self):
        # frozen from the power-series oracle at 30 digits
        si, ci = sine_cosine_integrals(1.0)
        assert ci == pytest.approx(0.3374039229009681, abs=1e-13)
        assert si == pytest.approx(-0.6247132564277136, abs=1e-13)

    def test_small_z_limit(self):
        si, _ = sine_cosine_integrals(1e-8)
        assert si == pytest.approx(-0.5 * math.pi, abs=1e-7)

    def test_large_z_decay(self):
        si, ci = sine_cosine_integrals(1e4)
        assert abs(si) < 1e-3 and abs(ci) < 1e-3

    def test_accuracy_near_upper_domain(self):
        # the quoted accuracy band extends to z = 700
        si, ci = sine_cosine_integrals(700.0)
        # asymptotic forms: si ~ -cos z / z - sin z / z^2, ci ~ sin z / z - cos z / z^2
        z = 700.0
        si_ref = -math.cos(z) / z - math.sin(z) / z**2 + 2.0 * math.cos(z) / z**3
        ci_ref = math.sin(z) / z - math.cos(z) / z**2 - 2.0 * math.sin(z) / z**3
        assert si == pytest.approx(si_ref, abs=1e-10)
        assert ci == pytest.approx(ci_ref, abs=1e-10)

    def test_domain_error(self):
        with pytest.raises(ValueError):
            sine_cosine_integrals(0.0)
        with pytest.raises(ValueError):
            sine_cosine_integrals(-1.0)

    def test_vectorized(self):
        si, ci = sine_cosine_integrals(np.array([0.5, 1.0, 2.0]))
        assert si.shape == (3,) and ci.shape == (3,)


class TestAuxiliaryF:
    def test_identity_against_si_ci(self):
        zs = np.logspace(-3, 3, 121)
        si, ci = sine_cosine_integrals(zs)
        direct = ci * np.sin(zs) - si * np.cos(zs)
        assert np.max(np.abs(auxiliary_f(zs) - direct)) < 1e-12

    def test_integral_representation(self):
        for z in np.logspace(-2, 2, 9):
            assert auxiliary_f(z) == pytest.approx(f_from_integral(z), abs=1e-9)

    def test_frozen_points(self):
        # frozen from the integral-representation oracle at 30 digits
        assert auxiliary_f(1.0) == pytest.approx(0.6214496242358134, abs=1e-13)
        assert auxiliary_f(10.0) == pytest.approx(0.0981910350101702, abs=1e-13)
        assert auxiliary_f(0.1) == pytest.approx(1.2910047283091012, abs=1e-13)

    def test_asymptotic_three_terms(self):
        # 1/z - 2/z^3 + 24/z^5 at z = 10 gives 0.09824
        assert auxiliary_f(10.0) == pytest.approx(0.09824, abs=1e-3)

    def test_inverse_z_tail(self):
        z = 1e4
        assert auxiliary_f(z) * z == pytest.approx(1.0, abs=1e-4)

    def test_small_z_limit(self):
        assert auxiliary_f(1e-9) == pytest.approx(0.5 * math.pi, abs=1e-6)

    def test_monotone_decreasing_positive(self):
        zs = np.logspace(-3, 3, 200)
        vals = auxiliary_f(zs)
        assert np.all(vals > 0.0)
        assert np.all(np.diff(vals) < 0.0)

    def test_domain_error(self):
        with pytest.raises(ValueError):
            auxiliary_f(-2.0)

    def test_derivative_against_central_difference(self):
        for z in (0.3, 1.0, 4.0, 20.0):
            h = 1e-6 * max(z, 1.0)
            fd = (auxiliary_f(z + h) - auxiliary_f(z - h)) / (2.0 * h)
            assert auxiliary_f_deriv(z) == pytest.approx(fd, rel=1e-7)

    def test_derivative_frozen_point(self):
        # frozen from ci(1)cos(1) + si(1)sin(1) at 30 digits
        assert auxiliary_f_deriv(1.0) == pytest.approx(-0.3433779615564270, abs=1e-13)

    def test_second_derivative_recurrence(self):
        # f'' = 1/z - f, via central difference of f'
        for z in (0.5, 1.0, 3.0):
            h = 1e-6
            fdd = (auxiliary_f_deriv(z + h) - auxiliary_f_deriv(z - h)) / (2.0 * h)
            assert fdd == pytest.approx(1.0 / z - auxiliary_f(z), rel=1e-6)

    def test_huge_argument_switches_to_asymptotics(self):
        z = 1e9
        assert auxiliary_f(z) == pytest.approx(1.0 / z, rel=1e-6)


# ----------------------------------------------------------------------
# quadrature spec
# ----------------------------------------------------------------------

class TestQuadratureSpec:
    def test_defaults(self):
        s = QuadratureSpec()
        assert s.method == "oscillatory_semi_infinite"
        assert s.rel_tol == 1e-9 and s.abs_tol == 1e-12

    def test_methods_accepted(self):
        QuadratureSpec(method="oscillatory_semi_infinite")
        QuadratureSpec(method="imaginary_frequency")
        QuadratureSpec(method="principal_value", pole=2.0)

    def test_unknown_method_rejected(self):
        with pytest.raises(ValueError):
            QuadratureSpec(method="monte_carlo")

    def test_pv_requires_pole(self):
        with pytest.raises(ValueError):
            QuadratureSpec(method="principal_value")

    def test_bad_pole_rejected(self):
        with pytest.raises(ValueError):
            QuadratureSpec(method="principal_value", pole=-1.0)

    def test_bad_tolerances_rejected(self):
        with pytest.raises(ValueError):
            QuadratureSpec(rel_tol=0.0)
        with pytest.raises(ValueError):
            QuadratureSpec(abs_tol=-1e-9)

    def test_bad_max_evals_rejected(self):
        with pytest.raises(ValueError):
            QuadratureSpec(max_evals=0)

    def test_budget_enforced(self):
        spec = QuadratureSpec(max_evals=50)
        with pytest.raises(QuadratureConvergenceError):
            integrate_oscillatory(lambda w: np.sin(w), 1.0, spec)


# ----------------------------------------------------------------------
# oscillatory engine
# ----------------------------------------------------------------------

class TestOscillatory:
    def test_sine_closed_form(self):
        # int_0^inf sin(w s) e^(-eta w) dw -> 1/s at eta -> 0
        v = integrate_oscillatory(lambda w: np.sin(w), 1.0)
        assert v == pytest.approx(1.0, abs=1e-9)

    def test_cosine_closed_form(self):
        v = integrate_oscillatory(lambda w: np.cos(2.0 * w), 2.0)
        assert v == pytest.approx(0.0, abs=1e-9)

    def test_matches_auxiliary_f(self):
        v = integrate_oscillatory(lambda w: np.sin(w) / (w + 1.0), 1.0)
        assert v == pytest.approx(auxiliary_f(1.0), abs=1e-9)

    def test_cosine_side_frozen(self):
        # int_0^inf cos(w)/(w+1) dw = -ci(1)cos(1) - si(1)sin(1), frozen at 30 digits
        v = integrate_oscillatory(lambda w: np.cos(w) / (w + 1.0), 1.0)
        assert v == pytest.approx(0.3433779615564270, abs=1e-9)

    def test_complex_integrand(self):
        v = integrate_oscillatory(lambda w: np.exp(1j * w) / (w + 1.0), 1.0)
        assert v.real == pytest.approx(0.3433779615564270, abs=1e-9)
        assert v.imag == pytest.approx(0.6214496242358134, abs=1e-9)

    def test_origin_scale_handles_sharp_start(self):
        # sin(2w)/w -> pi/2; the 1/w structure near 0 needs origin refinement
        v = integrate_oscillatory(lambda w: np.sin(2.0 * w) / np.maximum(w, 1e-300),
                                  2.0, origin_scale=0.5)
        assert v == pytest.approx(0.5 * math.pi, abs=1e-9)

    # Growing oscillatory moments: limits of Re/Im Gamma(p+1)/(eta - i)^(p+1).
    # Tolerances sit ~5x above the measured float64 cancellation floor, which
    # grows with the moment order.
    @pytest.mark.parametrize("power,trig,expected,tol", [
        (1, np.sin, 0.0, 5e-10),
        (2, np.cos, 0.0, 2e-7),
        (3, np.cos, 6.0, 2e-4),
        (4, np.sin, 24.0, 1e-2),
    ])
    def test_growing_moments(self, power, trig, expected, tol):
        v = integrate_oscillatory(lambda w: w**power * trig(w), 1.0)
        assert v == pytest.approx(expected, abs=tol)

    def test_damped_cubic_against_closed_form(self):
        eta0 = 0.3
        v = integrate_oscillatory(lambda w: w**3 * np.cos(w) * np.exp(-eta0 * w), 1.0)
        assert v == pytest.approx(damped_cubic_closed(eta0), rel=1e-8)

    def test_deterministic(self):
        g = lambda w: np.sin(1.7 * w) / (w + 0.3)
        assert integrate_oscillatory(g, 1.7) == integrate_oscillatory(g, 1.7)

    def test_bad_phase_scale(self):
        with pytest.raises(ValueError):
            integrate_oscillatory(lambda w: np.sin(w), -1.0)

    @pytest.mark.filterwarnings("ignore:overflow", "ignore:invalid value")
    def test_divergence_reported(self):
        # exponential growth cannot be regulated away
        with pytest.raises(QuadratureConvergenceError) as exc:
            integrate_oscillatory(lambda w: np.exp(0.5 * w) * np.sin(w), 1.0)
        assert "etas" in exc.value.diagnostics


# ----------------------------------------------------------------------
# principal-value engine
# ----------------------------------------------------------------------

class TestPrincipalValue:
    @pytest.mark.parametrize("a,s", [(1.0, 1.0), (2.0, 1.5), (0.7, 3.0),
                                     (1.0, 0.2), (0.05, 1.0)])
    def test_against_subtraction_closed_form(self, a, s):
        v = integrate_pv(lambda w: np.sin(w * s) / (w - a), a, phase_scale=s)
        assert v == pytest.approx(pv_sin_closed(a, s), abs=1e-8)

    def test_fast_phase_looser(self):
        # s = 10: many oscillations inside the excision window; cancellation
        # noise raises the floor
        v = integrate_pv(lambda w: np.sin(10.0 * w) / (w - 3.0), 3.0, phase_scale=10.0)
        assert v == pytest.approx(pv_sin_closed(3.0, 10.0), abs=1e-6)

    def test_symmetric_interval_is_zero(self):
        v = integrate_pv(lambda w: 1.0 / (w - 1.0), 1.0, upper=2.0)
        assert v == pytest.approx(0.0, abs=1e-12)

    def test_finite_interval_log(self):
        # PV int_0^3 dw/(w-2) = ln(1/2)
        v = integrate_pv(lambda w: 1.0 / (w - 2.0), 2.0, upper=3.0)
        assert v == pytest.approx(-math.log(2.0), abs=1e-12)

    def test_rational_numerator(self):
        # PV int_0^2 w/(w-1) dw = 2 + PV int 1/(w-1) = 2
        v = integrate_pv(lambda w: w / (w - 1.0), 1.0, upper=2.0)
        assert v == pytest.approx(2.0, abs=1e-12)

    def test_no_pole_in_effect(self):
        # integrand regular over the whole domain: PV equals the plain integral
        g = lambda w: np.exp(-((w - 6.0) ** 2))
        v = integrate_pv(g, 1.0, phase_scale=1.0)
        ref, _ = quad(lambda w: math.exp(-((w - 6.0) ** 2)), 0.0, np.inf)
        assert v == pytest.approx(ref, abs=1e-9)

    def test_higher_order_pole_rejected(self):
        with pytest.raises(ValueError):
            integrate_pv(lambda w: np.sin(w) / (w - 1.0) ** 2, 1.0, phase_scale=1.0)

    def test_pole_location_validation(self):
        with pytest.raises(ValueError):
            integrate_pv(lambda w: 1.0 / (w + 1.0), -1.0)
        with pytest.raises(ValueError):
            integrate_pv(lambda w: 1.0 / (w - 3.0), 3.0, upper=2.0)

    def test_deterministic(self):
        g = lambda w: np.sin(w) / (w - 1.0)
        assert integrate_pv(g, 1.0, phase_scale=1.0) == integrate_pv(g, 1.0, phase_scale=1.0)

    def test_multi_pole_partial_fractions(self):
        # 1/((w-1)(w-2)) = 1/(w-2) - 1/(w-1)
        v = integrate_pv_multi(lambda w: np.sin(w) / ((w - 1.0) * (w - 2.0)),
                               [1.0, 2.0], phase_scale=1.0)
        ref = pv_sin_closed(2.0, 1.0) - pv_sin_closed(1.0, 1.0)
        assert v == pytest.approx(ref, abs=1e-8)

    def test_multi_pole_rejects_coincident(self):
        with pytest.raises(ValueError):
            integrate_pv_multi(lambda w: np.sin(w), [1.0, 1.0 + 1e-12], phase_scale=1.0)

    def test_multi_pole_needs_poles(self):
        with pytest.raises(ValueError):
            integrate_pv_multi(lambda w: np.sin(w), [], phase_scale=1.0)


# ----------------------------------------------------------------------
# imaginary-frequency engine
# ----------------------------------------------------------------------

class TestImaginaryFrequency:
    def test_unit_exponential(self):
        assert integrate_imaginary_frequency(lambda u: np.exp(-u)) == pytest.approx(1.0, rel=1e-10)

    def test_gamma_moment(self):
        v = integrate_imaginary_frequency(lambda u: u * u * np.exp(-3.0 * u))
        assert v == pytest.approx(2.0 / 27.0, rel=1e-10)

    def test_polarizability_style_kernel(self):
        # R = 5 kernel; frozen from the adaptive-bisection oracle at 30 digits
        g = lambda u: np.exp(-15.0 * u) / (1.0 + u * u) ** 3
        v = integrate_imaginary_frequency(g)
        ref, _ = quad(lambda u: math.exp(-15.0 * u) / (1.0 + u * u) ** 3, 0.0, np.inf,
                      epsabs=1e-14, epsrel=1e-14)
        assert v == pytest.approx(ref, abs=1e-10)
        assert v == pytest.approx(0.0650468973363364, abs=1e-12)

    def test_scale_hint_agrees_with_detection(self):
        g = lambda u: u * np.exp(-2.0 * u) / (1.0 + u)
        hinted = integrate_imaginary_frequency(g, scale_hint=2.0)
        auto = integrate_imaginary_frequency(g)
        assert hinted == pytest.approx(auto, rel=1e-10)

    def test_sub_exponential_falls_back_with_warning(self):
        g = lambda u: 1.0 / (1.0 + u * u) ** 3
        with pytest.warns(RuntimeWarning):
            v = integrate_imaginary_frequency(g)
        assert v == pytest.approx(3.0 * math.pi / 16.0, rel=1e-8)

    def test_deterministic(self):
        g = lambda u: np.exp(-2.5 * u) * (1.0 + u) ** -2
        assert integrate_imaginary_frequency(g) == integrate_imaginary_frequency(g)


# ----------------------------------------------------------------------
# node helpers
# ----------------------------------------------------------------------

class TestPanels:
    def test_panel_nodes_integrate_polynomial_exactly(self):
        nodes, weights = panel_nodes(0.0, 2.0, 0.5)
        assert np.sum(weights * nodes**7) == pytest.approx(2.0**8 / 8.0, rel=1e-13)

    def test_graded_panels_cover_interval(self):
        nodes, weights = graded_panels(0.0, 10.0, 1.0, fine_lo=1e-3, fine_hi=1e-2)
        assert np.sum(weights) == pytest.approx(10.0, rel=1e-13)
        assert nodes.min() > 0.0 and nodes.max() < 10.0

    def test_empty_interval(self):
        nodes, weights = panel_nodes(1.0, 1.0, 0.5)
        assert nodes.size == 0 and weights.size == 0
