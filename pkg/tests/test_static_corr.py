"""Equal-time correlation tensors: vacuum closed forms and dressed routes.

The ground-state dressing is checked three ways: against a frozen tensor
from full symbolic differentiation of the auxiliary-function profile,
against the independent double-frequency-integral route, and against the
closed-form structure invariants (trace, eigensystem, scaling).
"""

import numpy as np
import pytest

from vacorr.core import Atom, UnitSystem
from vacorr.specfun import auxiliary_f, auxiliary_f_nth
from vacorr.static_corr import (
    DressedCorrRequest,
    dressed_excited_corr,
    dressed_ground_corr,
    dressed_ground_corr_spectral,
    vacuum_em_corr,
    vacuum_em_corr_symmetrized,
    vacuum_scalar_corr,
)
from vacorr.tensorops import (
    RadialProfile,
    SeparablePair,
    SumArgumentPair,
    pair_dyadic_apply,
)

POINT = (0.3, -0.7, 1.1)
POINT_B = (-0.9, 0.4, 0.6)
MU = (0.2, -1.0, 0.5)

# Symbolic-differentiation oracle for the ground dressing at omega_n = 1.1,
# dipole MU, field points POINT / POINT_B, atom at the origin.  Recompute:
#   z = Rational(11,10)*(R + RP); f = Ci(z)*sin(z) - (Si(z) - pi/2)*cos(z)
#   (2/pi) * pair_oracle(f/(R*RP), POINT, POINT_B, MU)   # tests/test_tensorops.py
# (about two minutes of sympy; frozen here because the suite budget is tight).
DRESSING_ORACLE = np.array([
    [0.0194183720342279, 0.05342008590381438, -0.05607822755189821],
    [-0.01552152998089432, -0.03452472503523111, 0.0391418503107281],
    [0.08423294954380194, 0.23530208547121714, -0.24574213213857987],
])


def ground_request(r=POINT, rprime=POINT_B, frequency=1.0, dipole=MU, **kw):
    atom = Atom(position=(0.0, 0.0, 0.0), frequency=frequency, dipole=dipole, state="ground")
    return DressedCorrRequest(atom=atom, r=r, rprime=rprime, **kw)


def excited_request(r=POINT, rprime=POINT_B, frequency=1.0, dipole=MU, **kw):
    atom = Atom(position=(0.0, 0.0, 0.0), frequency=frequency, dipole=dipole, state="excited")
    return DressedCorrRequest(atom=atom, r=r, rprime=rprime, **kw)


# ----------------------------------------------------------------------
# vacuum closed forms
# ----------------------------------------------------------------------

class TestVacuumScalar:
    def test_unit_separation_frozen(self):
        # hbar c / (4 pi R^2) at R = 1 in natural units
        assert vacuum_scalar_corr((0, 0, 1), (0, 0, 0)) == pytest.approx(
            0.07957747154594767, rel=1e-14)

    def test_inverse_square_scaling(self):
        c1 = vacuum_scalar_corr((0, 0, 1), (0, 0, 0))
        c3 = vacuum_scalar_corr((0, 0, 3), (0, 0, 0))
        assert c3 == pytest.approx(c1 / 9.0, rel=1e-12)

    def test_gaussian_units_prefactor(self):
        g = UnitSystem.gaussian()
        ratio = vacuum_scalar_corr((0, 0, 1), (0, 0, 0), units=g) / vacuum_scalar_corr(
            (0, 0, 1), (0, 0, 0))
        assert ratio == pytest.approx(g.hbar * g.c, rel=1e-12)

    def test_coincident_points_raise(self):
        with pytest.raises(ValueError):
            vacuum_scalar_corr((0.5, 0.5, 0.5), (0.5, 0.5, 0.5))


class TestVacuumEm:
    def test_ee_on_axis_frozen(self):
        got = vacuum_em_corr("ee", (0, 0, 1.0), (0, 0, 0)).entries.real
        want = np.diag([-1.2732395447351628, -1.2732395447351628, 1.2732395447351628])
        assert np.allclose(got, want, atol=1e-13)

    def test_bb_equals_ee(self):
        ee = vacuum_em_corr("ee", POINT, POINT_B).entries
        bb = vacuum_em_corr("bb", POINT, POINT_B).entries
        assert np.array_equal(ee, bb)

    def test_trace_and_eigensystem(self):
        rvec = np.asarray(POINT) - np.asarray(POINT_B)
        d = np.linalg.norm(rvec)
        ten = vacuum_em_corr("ee", POINT, POINT_B).entries.real
        assert np.trace(ten) == pytest.approx(-4.0 / (np.pi * d**4), rel=1e-12)
        # separation direction is an eigenvector with the positive eigenvalue,
        # the transverse doublet is degenerate with the negative one
        along = ten @ (rvec / d)
        assert np.allclose(along, (4.0 / (np.pi * d**4)) * rvec / d, rtol=1e-12)
        eigs = np.sort(np.linalg.eigvalsh(ten))
        assert eigs[0] == pytest.approx(eigs[1], rel=1e-12)
        assert eigs[2] == pytest.approx(4.0 / (np.pi * d**4), rel=1e-12)

    def test_inverse_fourth_power_scaling(self):
        c1 = vacuum_em_corr("ee", (0, 0, 1.0), (0, 0, 0)).entries
        c2 = vacuum_em_corr("ee", (0, 0, 2.0), (0, 0, 0)).entries
        assert np.allclose(c2, c1 / 16.0, atol=1e-14)

    def test_eb_limit_is_zero(self):
        got = vacuum_em_corr("eb", POINT, POINT_B).entries
        assert np.array_equal(got, np.zeros((3, 3)))

    def test_eb_regulated_frozen(self):
        # 8 eta R / (eta^2 + R^2)^3 / pi = 0.6518986469044033 at eta = 1/2, R = 1
        got = vacuum_em_corr("eb", (0, 0, 1.0), (0, 0, 0), regulator_eta=0.5).entries
        assert got[0, 1] == pytest.approx(1j * 0.6518986469044033, rel=1e-13)
        assert got[1, 0] == pytest.approx(-1j * 0.6518986469044033, rel=1e-13)

    def test_eb_purely_imaginary_antisymmetric(self):
        got = vacuum_em_corr("eb", POINT, POINT_B, regulator_eta=0.3).entries
        assert np.max(np.abs(got.real)) == 0.0
        assert np.allclose(got, -got.T, atol=1e-15)
        assert np.max(np.abs(got.imag)) > 0.0

    def test_be_is_negated_eb(self):
        eb = vacuum_em_corr("eb", POINT, POINT_B, regulator_eta=0.3).entries
        be = vacuum_em_corr("be", POINT, POINT_B, regulator_eta=0.3).entries
        assert np.array_equal(be, -eb)

    @pytest.mark.parametrize("eta", [None, 0.1, 0.7])
    def test_symmetrized_crossed_pair_vanishes(self, eta):
        got = vacuum_em_corr_symmetrized(POINT, POINT_B, regulator_eta=eta).entries
        assert np.max(np.abs(got)) == 0.0

    def test_bad_pair_rejected(self):
        with pytest.raises(ValueError, match="pair"):
            vacuum_em_corr("em", POINT, POINT_B)

    def test_bad_regulator_rejected(self):
        with pytest.raises(ValueError, match="regulator"):
            vacuum_em_corr("eb", POINT, POINT_B, regulator_eta=-0.1)


# ----------------------------------------------------------------------
# dressed request validation
# ----------------------------------------------------------------------

class TestDressedCorrRequest:
    def test_coincident_field_points_rejected(self):
        with pytest.raises(ValueError, match="distinct"):
            ground_request(r=POINT, rprime=POINT)

    @pytest.mark.parametrize("which", ["r", "rprime"])
    def test_point_on_atom_rejected(self, which):
        kw = {which: (0.0, 0.0, 0.0)}
        with pytest.raises(ValueError, match="atom"):
            ground_request(**kw)

    def test_legs_are_atom_relative(self):
        atom = Atom(position=(1.0, 0.0, 0.0), frequency=1.0, dipole=MU, state="ground")
        req = DressedCorrRequest(atom=atom, r=(2.0, 0.0, 0.0), rprime=(1.0, 3.0, 0.0))
        leg, legp = req.legs()
        assert np.allclose(leg, [1.0, 0.0, 0.0])
        assert np.allclose(legp, [0.0, 3.0, 0.0])


# ----------------------------------------------------------------------
# ground-state dressing
# ----------------------------------------------------------------------

class TestDressedGround:
    def test_against_symbolic_oracle(self):
        req = ground_request(frequency=1.1, include_bare=False)
        got = dressed_ground_corr(req).part("dressing").real
        assert np.max(np.abs(got - DRESSING_ORACLE)) < 1e-10 * np.max(np.abs(DRESSING_ORACLE))

    def test_spectral_route_collinear(self):
        req = ground_request(r=(0, 0, 1.0), rprime=(0, 0, -1.0), dipole=(0, 0, 1.0),
                             include_bare=False)
        closed = dressed_ground_corr(req).entries.real
        spectral = dressed_ground_corr_spectral(req).entries.real
        assert np.max(np.abs(closed - spectral)) < 1e-6 * np.max(np.abs(closed))

    def test_spectral_route_skew(self):
        req = ground_request(r=(0, 0, 0.8), rprime=(0.6, 0, 0), dipole=(0.3, -1.0, 0.5),
                             include_bare=False)
        closed = dressed_ground_corr(req).entries.real
        spectral = dressed_ground_corr_spectral(req).entries.real
        assert np.max(np.abs(closed - spectral)) < 1e-6 * np.max(np.abs(closed))

    def test_far_zone_halving_ratio(self):
        # doubling both distances deep in the far zone divides the dressing
        # by 2^7: one power from the argument of f ~ 1/z, six from the legs
        base = ground_request(r=(0, 0, 50.0), rprime=(0, 50.0, 0), include_bare=False)
        far = ground_request(r=(0, 0, 100.0), rprime=(0, 100.0, 0), include_bare=False)
        near_t = dressed_ground_corr(base).part("dressing").real
        far_t = dressed_ground_corr(far).part("dressing").real
        ratio = np.max(np.abs(far_t)) / np.max(np.abs(near_t))
        assert ratio == pytest.approx(2.0**-7, rel=0.05)

    def test_profile_monotone_in_distance(self):
        # pre-operator scalar profile f(k(R + R'))/(R R') decreases outward
        scales = np.linspace(1.0, 6.0, 25)
        vals = auxiliary_f(scales * 2.0) / scales**2
        assert np.all(np.diff(vals) < 0.0)

    def test_zero_dipole_gives_zero_dressing(self):
        req = ground_request(dipole=(0.0, 0.0, 0.0), include_bare=False)
        got = dressed_ground_corr(req).entries
        assert np.max(np.abs(got)) == 0.0

    def test_bare_part_is_vacuum_tensor(self):
        req = ground_request()
        res = dressed_ground_corr(req)
        bare = vacuum_em_corr("ee", POINT, POINT_B).entries
        assert np.array_equal(res.part("bare"), bare)
        assert np.allclose(res.parts_total(), res.entries)

    def test_multi_level_sum_is_additive(self):
        req = ground_request(include_bare=False)
        resonances = [(1.0, MU), (2.5, (0.1, 0.2, -0.4))]
        total = dressed_ground_corr(req, resonances=resonances).entries
        parts = [dressed_ground_corr(req, resonances=[res]).entries for res in resonances]
        assert np.allclose(total, parts[0] + parts[1], atol=1e-14)

    def test_excited_atom_rejected(self):
        with pytest.raises(ValueError, match="ground"):
            dressed_ground_corr(excited_request())
        with pytest.raises(ValueError, match="ground"):
            dressed_ground_corr_spectral(excited_request())


# ----------------------------------------------------------------------
# excited-state dressing
# ----------------------------------------------------------------------

def _pv_closed_derivs(n, z):
    # phi = pi cos z - f(z), the closed form of the principal-value channel;
    # closes on itself through phi'' = -phi - 1/z
    z = np.asarray(z, dtype=float)
    if n == 0:
        return np.pi * np.cos(z) - auxiliary_f_nth(0, z)
    if n == 1:
        return -np.pi * np.sin(z) - auxiliary_f_nth(1, z)
    if n == 2:
        return -(np.pi * np.cos(z) - auxiliary_f_nth(0, z)) - 1.0 / z
    if n == 3:
        return (np.pi * np.sin(z) + auxiliary_f_nth(1, z)) + 1.0 / z**2
    if n == 4:
        return (np.pi * np.cos(z) - auxiliary_f_nth(0, z)) + 1.0 / z - 2.0 / z**3
    raise ValueError(n)


class TestDressedExcited:
    def test_pv_part_against_closed_form(self):
        req = excited_request(r=(0, 0, 0.8), rprime=(0.6, 0, 0), frequency=1.3,
                              dipole=(0.3, -1.0, 0.5), include_bare=False)
        got = dressed_excited_corr(req).part("pv_part").real
        closed = (2.0 / np.pi) * pair_dyadic_apply(
            SumArgumentPair(_pv_closed_derivs, 1.3),
            np.asarray(req.r), np.asarray(req.rprime), np.asarray(req.atom.dipole))
        assert np.max(np.abs(got - closed)) < 5e-6 * np.max(np.abs(closed))

    def test_resonant_part_prefactor_and_profile(self):
        req = excited_request(include_bare=False)
        got = dressed_excited_corr(req).part("resonant_part").real
        k = req.atom.frequency
        want = 4.0 * pair_dyadic_apply(
            SeparablePair(RadialProfile.sine(k), RadialProfile.sine(k)),
            np.asarray(POINT), np.asarray(POINT_B), np.asarray(MU))
        assert np.allclose(got, want, rtol=1e-12)

    def test_resonant_profile_zero_and_period(self):
        # the pre-operator profile sin(kR) sin(kR')/(R R') vanishes at
        # R = pi/k and repeats with period 2 pi / k up to the 1/R factor
        k = 1.7
        prof = RadialProfile.sine(k)
        assert prof.value(np.pi / k) == pytest.approx(0.0, abs=1e-12)
        r0 = 0.9
        period = 2.0 * np.pi / k
        assert prof.value(r0) * r0 == pytest.approx(
            prof.value(r0 + period) * (r0 + period), rel=1e-12)

    def test_parts_sum_and_bare(self):
        res = dressed_excited_corr(excited_request())
        assert "bare" in res.parts
        assert np.allclose(res.parts_total(), res.entries)

    def test_ground_atom_rejected(self):
        with pytest.raises(ValueError, match="excited"):
            dressed_excited_corr(ground_request())
