import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from polarimode import (
    MaterialSpec,
    Resonance,
    UnitSystem,
    char_polynomial,
    em_group_velocity,
    forbidden_bands,
    group_velocity,
    k_of_omega,
    load_material,
    refractive_index_sq,
    solve_branches,
    sweep_csv,
    total_group_velocity,
    zero_dispersion_points,
)
from polarimode.dispersion import sweep_rows
from polarimode.errors import ForbiddenBandError, InvalidMaterialError

from conftest import (
    SOSC_V_HI,
    SOSC_V_LO,
    SOSC_W_HI,
    SOSC_W_LO,
    SOSC_Z_HI,
    SOSC_Z_LO,
    random_material,
)


class TestCharPolynomial:
    def test_sosc_hand_expansion(self, sosc):
        cp = char_polynomial(sosc, 1.0)
        # p(z) = z(4 - z) - 1 (3 - z) = -z^2 + 5 z - 3
        np.testing.assert_allclose(cp.p, [-3.0, 5.0, -1.0], atol=1e-15)
        np.testing.assert_allclose(cp.a, [3.0, -1.0], atol=1e-15)
        np.testing.assert_allclose(cp.b, [0.0, 4.0, -1.0], atol=1e-15)
        assert cp.kappa == 1.0

    def test_vacuum(self, vacuum):
        cp = char_polynomial(vacuum, 2.0)
        np.testing.assert_allclose(cp.p, [-4.0, 1.0], atol=1e-15)

    def test_consistency_with_index(self, sosc):
        # n^2(omega=1) = 1.5, so kappa = 1.5 puts a root at z = 1
        cp = char_polynomial(sosc, math.sqrt(1.5))
        assert abs(cp.eval_p(1.0)) < 1e-12

    def test_ab_match_direct_products(self, duo):
        cp = char_polynomial(duo, 0.7)
        om2, gs = duo.omega2s, duo.gs
        for z in (0.3, 1.7, 9.4, 30.0):
            a_direct = np.prod(om2 - z) - sum(
                g * np.prod(np.delete(om2, i) - z) for i, g in enumerate(gs))
            b_direct = z * np.prod(om2 - z)
            assert cp.eval_a(z) == pytest.approx(a_direct, rel=1e-12)
            assert cp.eval_b(z) == pytest.approx(b_direct, rel=1e-12)

    def test_p_at_zero_is_minus_kappa_a0(self, duo):
        cp = char_polynomial(duo, 1.3)
        assert cp.p[0] == pytest.approx(-cp.kappa * cp.a[0], rel=1e-14)

    def test_degree(self, duo):
        cp = char_polynomial(duo, 1.0)
        assert len(cp.p) == duo.n_resonances + 2  # degree N+1


class TestSolveBranches:
    def test_sosc_quadratic_oracle(self, sosc):
        bps = solve_branches(sosc, 1.0)
        assert len(bps) == 2
        assert bps[0].z == pytest.approx(SOSC_Z_LO, rel=1e-12)
        assert bps[1].z == pytest.approx(SOSC_Z_HI, rel=1e-12)
        assert bps[0].omega == pytest.approx(SOSC_W_LO, rel=1e-12)
        assert bps[1].omega == pytest.approx(SOSC_W_HI, rel=1e-12)

    def test_vacuum_single_branch(self, vacuum):
        (bp,) = solve_branches(vacuum, 3.0)
        assert bp.omega == pytest.approx(3.0, rel=1e-14)
        assert bp.v_group == pytest.approx(1.0, rel=1e-14)

    def test_long_wavelength_limits(self, sosc):
        bps = solve_branches(sosc, 1e-7)
        # lower branch: omega/k -> c/n(0) = sqrt(3)/2
        assert bps[0].omega / 1e-7 == pytest.approx(math.sqrt(3.0) / 2.0,
                                                    rel=1e-9)
        # upper branch -> the resonance
        assert bps[1].omega == pytest.approx(2.0, rel=1e-9)

    def test_invalid_material_rejected(self):
        bad = MaterialSpec("bad", (Resonance(omega2=4.0, g=5.0),),
                           UnitSystem.natural())
        with pytest.raises(InvalidMaterialError):
            solve_branches(bad, 1.0)

    def test_k_must_be_positive(self, sosc):
        with pytest.raises(ValueError):
            solve_branches(sosc, 0.0)

    def test_ascending_order(self, duo):
        for k in (0.1, 1.0, 10.0):
            omegas = [bp.omega for bp in solve_branches(duo, k)]
            assert omegas == sorted(omegas)
            assert all(w > 0 for w in omegas)


class TestGroupVelocities:
    def test_sosc_values(self, sosc):
        lo, hi = solve_branches(sosc, 1.0)
        assert group_velocity(sosc, lo) == pytest.approx(SOSC_V_LO, rel=1e-12)
        assert group_velocity(sosc, hi) == pytest.approx(SOSC_V_HI, rel=1e-12)

    def test_vacuum_is_c(self, vacuum):
        (bp,) = solve_branches(vacuum, 2.0)
        assert group_velocity(vacuum, bp) == 1.0

    def test_em_equals_group_at_zero_alpha(self, sosc):
        for k in (0.3, 1.0, 4.0):
            for bp in solve_branches(sosc, k):
                assert em_group_velocity(sosc, bp) == pytest.approx(
                    group_velocity(sosc, bp), rel=1e-14)
                assert bp.v_em == bp.v_group

    def test_em_bounds(self, duo):
        for k in np.geomspace(0.01, 100.0, 30):
            for bp in solve_branches(duo, float(k)):
                assert 0.0 < bp.v_em <= 1.0 + 1e-12
                assert bp.k * bp.v_em / bp.omega <= 1.0 + 1e-12

    def test_vg_formula_vs_finite_difference(self, duo):
        h_rel = 1e-5
        for k in (0.05, 0.8, 3.0, 40.0):
            h = h_rel * k
            up = solve_branches(duo, k + h)
            dn = solve_branches(duo, k - h)
            for bp in solve_branches(duo, k):
                fd = (up[bp.branch].omega - dn[bp.branch].omega) / (2 * h)
                assert bp.v_group == pytest.approx(fd, rel=1e-6)

    def test_alpha_total_matches_fd_but_em_does_not(self):
        spec = MaterialSpec("soscA", (Resonance(omega2=4.0, g=1.0, alpha=0.5),),
                            UnitSystem.natural())
        k, h = 1.0, 1e-5
        up = solve_branches(spec, k + h)
        dn = solve_branches(spec, k - h)
        for bp in solve_branches(spec, k):
            fd = (up[bp.branch].omega - dn[bp.branch].omega) / (2 * h)
            v_tot = total_group_velocity(spec, bp.branch, k)
            assert v_tot == pytest.approx(fd, rel=1e-6)
            assert bp.v_group == pytest.approx(fd, rel=1e-6)
        # the upper branch carries most polarization: v_em differs from the
        # total slope by the resonance-transport term
        hi = solve_branches(spec, k)[1]
        fd_hi = (up[1].omega - dn[1].omega) / (2 * h)
        assert abs(hi.v_em - fd_hi) / abs(fd_hi) > 1e-3

    def test_total_reduces_to_vg1_at_zero_alpha(self, duo):
        for k in (0.2, 2.0):
            for bp in solve_branches(duo, k):
                assert total_group_velocity(duo, bp.branch, k) == pytest.approx(
                    group_velocity(duo, bp), rel=1e-13)

    def test_total_long_wavelength_limit(self):
        spec = MaterialSpec("soscA", (Resonance(omega2=4.0, g=1.0, alpha=0.5),),
                            UnitSystem.natural())
        v = total_group_velocity(spec, 0, 1e-7)
        assert v == pytest.approx(math.sqrt(3.0) / 2.0, rel=1e-6)

    def test_group_velocity_rejects_alpha(self):
        spec = MaterialSpec("soscA", (Resonance(omega2=4.0, g=1.0, alpha=0.5),),
                            UnitSystem.natural())
        bp = solve_branches(spec, 1.0)[0]
        with pytest.raises(ValueError):
            group_velocity(spec, bp)


class TestKOfOmega:
    def test_sosc_inverse(self, sosc):
        kp, km = k_of_omega(sosc, 1.0)
        assert kp == pytest.approx(math.sqrt(1.5), rel=1e-14)
        assert km == -kp

    def test_forbidden(self, sosc):
        with pytest.raises(ForbiddenBandError):
            k_of_omega(sosc, 1.9)

    def test_vacuum(self, vacuum):
        assert k_of_omega(vacuum, 5.0)[0] == pytest.approx(5.0)

    def test_inverse_consistency(self, duo):
        # omega in each transmission band: solving at k(omega) recovers omega
        for w in list(np.linspace(0.1, 1.7, 15)) + list(np.linspace(5.2, 20.0, 15)):
            k = k_of_omega(duo, float(w))[0]
            omegas = [bp.omega for bp in solve_branches(duo, k)]
            assert min(abs(o - w) / w for o in omegas) < 1e-9


class TestForbiddenBands:
    def test_sosc_closed_form(self, sosc):
        (band,) = forbidden_bands(sosc)
        assert band.omega_lo == pytest.approx(math.sqrt(3.0), rel=1e-12)
        assert band.omega_hi == pytest.approx(2.0, rel=1e-12)

    def test_vacuum_empty(self, vacuum):
        assert forbidden_bands(vacuum) == []

    def test_duo_sign_analysis_oracle(self, duo):
        bands = forbidden_bands(duo)
        assert len(bands) == 2
        for band in bands:
            assert band.omega_lo < band.omega_hi
            inside = np.linspace(band.omega_lo * 1.0001, band.omega_hi * 0.9999, 25)
            for w in inside:
                assert refractive_index_sq(duo, float(w)) < 0.0
        # dense scan outside the bands finds no negative n^2
        ws = np.linspace(0.05, 30.0, 1500)
        for w in ws:
            if any(b.omega_lo + 1e-3 < w < b.omega_hi - 1e-3 for b in bands):
                continue
            if any(abs(w - edge) < 5e-2
                   for b in bands for edge in (b.omega_lo, b.omega_hi)):
                continue
            assert refractive_index_sq(duo, float(w)) > 0.0

    def test_band_edges_are_sellmeir_poles(self, duo):
        from polarimode import multipolar_to_sellmeir

        form = multipolar_to_sellmeir(duo)
        bands = forbidden_bands(duo)
        for band, pole in zip(bands, form.poles):
            assert band.omega_lo**2 == pytest.approx(pole, rel=1e-9)


class TestRootStructure:
    @given(st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=30, deadline=None)
    def test_root_count_and_interlacing(self, seed):
        rng = np.random.default_rng(seed)
        spec = random_material(rng)
        bands = forbidden_bands(spec)
        for k in (0.01, 1.0, 50.0):
            zs = [bp.z for bp in solve_branches(spec, k)]
            assert len(zs) == spec.n_resonances + 1
            assert all(z > 0 for z in zs)
            # one root below the lowest band, one between consecutive bands,
            # one above the highest
            edges = [b.omega_lo**2 for b in bands] + [math.inf]
            lows = [0.0] + [b.omega_hi**2 for b in bands]
            for z, lo, hi in zip(zs, lows, edges):
                assert lo <= z <= hi * (1 + 1e-12)


class TestZeroDispersion:
    def test_sosc_normal_dispersion_below_resonance(self, sosc):
        assert zero_dispersion_points(sosc) == []

    def test_vacuum_empty(self, vacuum):
        assert zero_dispersion_points(vacuum) == []

    def test_fused_silica_zdp(self, fused_silica_file):
        spec = load_material(fused_silica_file)
        omegas = zero_dispersion_points(spec)
        lambdas_um = [2.0 * math.pi * spec.units.c / w * 1e6 for w in omegas]
        in_window = [lam for lam in lambdas_um if 1.25 <= lam <= 1.30]
        assert len(in_window) == 1
        lam_zd = in_window[0]
        # independent oracle: coarse finite differences of k(omega) built from
        # the wavelength-form index directly
        B, C = [0.6961663, 0.4079426, 0.8974794], \
               [0.0684043**2, 0.1162414**2, 9.896161**2]

        def k_of_lambda_um(lam):
            n = math.sqrt(1.0 + sum(b * lam**2 / (lam**2 - c)
                                    for b, c in zip(B, C)))
            return 2.0 * math.pi * n / lam

        def beta2(lam):
            w0 = 2.0 * math.pi / lam  # c = 1 in these reduced units
            h = 1e-5 * w0
            kf = lambda w: k_of_lambda_um(2.0 * math.pi / w)
            return kf(w0 + h) - 2.0 * kf(w0) + kf(w0 - h)

        assert beta2(lam_zd * 0.98) * beta2(lam_zd * 1.02) < 0.0


class TestSweep:
    def test_header_and_row_counts(self, duo):
        ks = np.linspace(0.5, 2.0, 100)
        text = sweep_csv(duo, ks)
        lines = text.strip().split("\n")
        assert lines[0] == "k,branch,omega,v_group,v_em,z"
        assert len(lines) == 1 + 100 * 3

    def test_sosc_row_values(self, sosc):
        text = sweep_csv(sosc, [1.0])
        rows = text.strip().split("\n")[1:]
        omega0 = float(rows[0].split(",")[2])
        omega1 = float(rows[1].split(",")[2])
        assert omega0 == pytest.approx(SOSC_W_LO, rel=1e-15)
        assert omega1 == pytest.approx(SOSC_W_HI, rel=1e-15)

    def test_deterministic(self, duo):
        ks = [0.3, 1.7, 0.9]
        assert sweep_csv(duo, ks) == sweep_csv(duo, ks)

    def test_row_order(self, duo):
        rows = sweep_rows(duo, [2.0, 0.5])
        keys = [(bp.k, bp.branch) for bp in rows]
        assert keys == sorted(keys)

    def test_17_digit_roundtrip(self, sosc):
        text = sweep_csv(sosc, [1.0])
        z0 = float(text.strip().split("\n")[1].split(",")[5])
        assert z0 == solve_branches(sosc, 1.0)[0].z


class TestSIUnits:
    def test_si_branches_rescale(self):
        units = UnitSystem.si()
        om2 = 4e30
        spec = MaterialSpec("x", (Resonance(omega2=om2, g=1e30),), units)
        k_si = 1e15 / units.c  # natural k = 0.5 at Omega_ref = 2e15
        bps = solve_branches(spec, k_si)
        nat = MaterialSpec("n", (Resonance(omega2=1.0, g=0.25),),
                           UnitSystem.natural())
        ref = solve_branches(nat, 0.5)
        for bp, r in zip(bps, ref):
            assert bp.omega == pytest.approx(r.omega * 2e15, rel=1e-12)
            assert bp.v_group == pytest.approx(r.v_group * units.c, rel=1e-12)

    def test_nonpositive_root_error_unreachable_for_valid(self, duo):
        # guard exists; for valid materials roots stay positive at tiny k
        bps = solve_branches(duo, 1e-9)
        assert all(bp.z > 0 for bp in bps)
