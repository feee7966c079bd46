"""Tests for spectra, arc unions, arc integrals, moments, and level sets."""

import math
from fractions import Fraction

import numpy as np
import pytest

from wgcircle import circle, counting
from wgcircle.arith import sieve_primes, smooth_set
from wgcircle.errors import AliasingError, DomainError


class TestSpectra:
    def test_f_spectrum_counts_smooth_numbers(self):
        spectrum, members = circle.build_f_spectrum(100, 2, 3)
        assert spectrum.value_at_zero() == 7.0  # |A(10, 3)|
        assert int((spectrum.coeffs != 0).sum()) == len(members)

    def test_g_spectrum_zero_value(self):
        spectrum = circle.build_g_spectrum(10)
        assert spectrum.value_at_zero() == pytest.approx(5.3471075307, abs=1e-9)

    def test_kth_root_floor(self):
        assert circle.kth_root_floor(100, 2) == 10
        assert circle.kth_root_floor(99, 2) == 9
        assert circle.kth_root_floor(2**45 - 1, 3) == 32767


class TestGridEvaluation:
    def test_constant_spectrum(self):
        spectrum = circle.ExponentialSumSpectrum(coeffs=np.array([3.5]))
        grid = circle.GridSpec(size=8)
        vals = circle.evaluate_on_grid(spectrum, grid)
        assert np.allclose(vals, 3.5)

    def test_single_frequency_gives_roots_of_unity(self):
        spectrum = circle.ExponentialSumSpectrum(coeffs=np.array([0.0, 1.0]))
        grid = circle.GridSpec(size=8)
        vals = circle.evaluate_on_grid(spectrum, grid)
        expected = np.exp(2j * np.pi * np.arange(8) / 8)
        assert np.allclose(vals, expected)

    def test_parseval(self):
        rng = np.random.default_rng(2)
        coeffs = rng.random(33)
        spectrum = circle.ExponentialSumSpectrum(coeffs=coeffs)
        grid = circle.GridSpec(size=64)
        vals = circle.evaluate_on_grid(spectrum, grid)
        lhs = float((np.abs(vals) ** 2).mean())
        rhs = float((coeffs**2).sum())
        assert lhs == pytest.approx(rhs, rel=1e-6)

    def test_aliasing_guard(self):
        spectrum = circle.ExponentialSumSpectrum(coeffs=np.ones(20))
        with pytest.raises(AliasingError):
            circle.evaluate_on_grid(spectrum, circle.GridSpec(size=16))
        circle.evaluate_on_grid(spectrum, circle.GridSpec(size=16), allow_alias=True)

    def test_grid_validation(self):
        with pytest.raises(DomainError):
            circle.GridSpec(size=12)
        grid = circle.GridSpec.alias_free(100, 2)
        assert grid.size > 300


class TestUpsilon:
    def test_exact_rational(self):
        assert circle.upsilon(1 / 3, 100) == pytest.approx(1 / 3)

    def test_off_center(self):
        assert circle.upsilon(1 / 3 + 0.01, 100) == pytest.approx(1 / 6)

    def test_zero_far_from_low_denominators(self):
        golden = (math.sqrt(5) - 1) / 2
        assert circle.upsilon(golden, 100) == 0.0

    def test_endpoints(self):
        assert circle.upsilon(0.0, 400) == pytest.approx(1.0)
        assert circle.upsilon(1.0, 400) == pytest.approx(1.0)

    def test_locate_respects_height(self):
        # alpha = 1/7 is a hit only once the height reaches q = 7
        assert circle.locate_farey_arc(1 / 7, 5.0, 10**4) is None
        assert circle.locate_farey_arc(1 / 7, 7.0, 10**4) == (7, 1)


class TestArcUnions:
    def test_unit_height_structure(self):
        union = circle.major_arcs(1.0, 100)
        assert [(float(lo), float(hi)) for lo, hi, _ in union.intervals] == [(0.0, 0.01), (0.99, 1.0)]
        assert union.measure() == pytest.approx(0.02)
        assert [(arc.q, arc.a) for arc in union.arcs] == [(1, 0), (1, 1)]

    def test_measure_bound(self):
        for n, q in ((10**4, 4.0), (10**4, 16.0), (10**5, 50.0), (4 * 10**4, 9.0)):
            union = circle.major_arcs(q, n)
            assert union.measure() <= 3 * q * q / n

    def test_disjointness_is_exact(self):
        union = circle.major_arcs(40.0, 10**4)
        for (lo1, hi1, _), (lo2, hi2, _) in zip(union.intervals, union.intervals[1:]):
            assert hi1 <= lo2  # Fractions: exact comparison

    def test_height_bound_enforced(self):
        with pytest.raises(DomainError):
            circle.major_arcs(51.0, 10**4)

    def test_slice_algebra(self):
        n, y = 10**4, 8.0
        outer = circle.major_arcs(2 * y, n)
        inner = circle.major_arcs(y, n)
        sl = circle.build_arc_union("P_slice", n, 2, Y=y)
        # disjoint from the inner set, union restores the outer set
        assert (sl.measure_exact() + inner.measure_exact()) == outer.measure_exact()
        assert sl.union(inner).same_point_set(outer)
        for lo, hi, _ in sl.intervals:
            assert not inner.contains((lo + hi) / 2)

    def test_complement_partitions_unit_interval(self):
        union = circle.major_arcs(5.0, 10**4)
        comp = union.complement()
        assert union.measure_exact() + comp.measure_exact() == Fraction(1)
        m = 4096
        assert not (union.grid_mask(m) & comp.grid_mask(m)).any()
        assert (union.grid_mask(m) | comp.grid_mask(m)).all()

    def test_named_unions(self):
        n = 10**4
        for label in ("K", "Kprime", "L", "N"):
            union = circle.build_arc_union(label, n, 2)
            assert union.measure() > 0
        assert circle.build_arc_union("K", n, 2).measure() < circle.build_arc_union("Kprime", n, 2).measure()

    def test_core_arcs_desk_scale(self):
        union = circle.build_arc_union("N", 10**5, 2)
        assert [(arc.q, arc.a) for arc in union.arcs] == [(1, 0), (1, 1)]

    def test_set_algebra_against_pointwise_oracle(self):
        import random

        rng = random.Random(17)
        n = 5000
        a = circle.major_arcs(12.0, n)
        b = circle.major_arcs(5.0, n)
        diff = a.difference(b)
        comp = a.complement()
        union = a.union(b)
        for _ in range(3000):
            x = Fraction(rng.randrange(0, 4 * n), 4 * n)
            in_a, in_b = a.contains(x), b.contains(x)
            assert diff.contains(x) == (in_a and not in_b)
            assert comp.contains(x) == (not in_a)
            assert union.contains(x) == (in_a or in_b)

    def test_grid_mask_matches_contains(self):
        n, m = 3000, 2048
        union = circle.major_arcs(9.0, n)
        mask = union.grid_mask(m)
        for j in range(0, m, 7):
            assert bool(mask[j]) == union.contains(Fraction(j, m))

    def test_difference_excludes_seam_points(self):
        # choose scales so the inner arc's endpoint lands exactly on a grid
        # point: the slice must not claim it
        n, y, m = 1024, 2.0, 4096
        outer = circle.major_arcs(2 * y, n)
        inner = circle.major_arcs(y, n)
        sl = outer.difference(inner)
        seam = Fraction(2, 1024)  # right endpoint of the inner arc at 0
        assert inner.contains(seam)
        assert not sl.contains(seam)
        assert not (sl.grid_mask(m) & inner.grid_mask(m)).any()
        combined = sl.grid_mask(m) | inner.grid_mask(m)
        assert (combined == outer.grid_mask(m)).all()

    def test_complement_seam_is_single_owner(self):
        n = 1024
        union = circle.major_arcs(2.0, n)
        comp = union.complement()
        edge = Fraction(2, 1024)
        assert union.contains(edge) and not comp.contains(edge)
        m = 4096
        assert not (union.grid_mask(m) & comp.grid_mask(m)).any()
        assert (union.grid_mask(m) | comp.grid_mask(m)).all()

    def test_locate_matches_linear_scan(self):
        import random

        rng = random.Random(23)
        n, Q = 4000, 25.0
        for _ in range(400):
            alpha = rng.random()
            hits = []
            for q in range(1, int(Q) + 1):
                a = round(q * alpha)
                if 0 <= a <= q and math.gcd(a, q) == 1 and abs(q * alpha - a) <= Q / n:
                    hits.append((q, a))
            assert len(hits) <= 1
            assert circle.locate_farey_arc(alpha, Q, n) == (hits[0] if hits else None)


class TestIntegration:
    def test_orthogonality(self):
        m, n_freq = 64, 7
        spectrum = circle.ExponentialSumSpectrum(coeffs=np.eye(1, 33, n_freq)[0])
        grid = circle.GridSpec(size=m)
        hit = circle.integrate_over_set([spectrum], [False], n_freq, None, grid)
        miss = circle.integrate_over_set([spectrum], [False], n_freq + 1, None, grid)
        assert hit.value == pytest.approx(1.0, abs=1e-12)
        assert abs(miss.value) < 1e-12

    def test_weighted_count_example(self):
        # n = 20, squares, one power: contributions from 19 + 1 and 11 + 9
        n = 20
        fspec, _ = circle.build_f_spectrum(n, 2, circle.kth_root_floor(n, 2))
        gspec = circle.build_g_spectrum(n)
        grid = circle.GridSpec.alias_free(n, 1)
        res = circle.integrate_over_set([gspec, fspec], [False, False], n, None, grid)
        assert res.value.real == pytest.approx(math.log(19) + math.log(11), rel=1e-6)
        assert res.boundary_error == 0.0

    def test_count_bound(self):
        # log-weighted integral never exceeds r(n) log n when all x are allowed
        for n in (30, 50, 90):
            fspec, _ = circle.build_f_spectrum(n, 2, circle.kth_root_floor(n, 2))
            gspec = circle.build_g_spectrum(n)
            grid = circle.GridSpec.alias_free(n, 2)
            val = circle.integrate_over_set([gspec, fspec, fspec], [False] * 3, n, None, grid).value.real
            assert val <= counting.count_direct(2, 2, n) * math.log(n) + 1e-9

    def test_subset_boundary_error_reported(self):
        n = 64
        fspec, _ = circle.build_f_spectrum(n, 2, 8)
        grid = circle.GridSpec.alias_free(n, 1)
        union = circle.major_arcs(2.0, n)
        res = circle.integrate_over_set([fspec], [False], None, union, grid)
        assert res.boundary_error > 0
        assert res.measure <= 1.0

    def test_conjugate_flag_gives_power_mean(self):
        # f * conj(f) over the full circle is the second moment: sum of
        # squared coefficients, by orthogonality
        n = 200
        fspec, _ = circle.build_f_spectrum(n, 2, 5)
        grid = circle.GridSpec.alias_free(n, 2)
        res = circle.integrate_over_set([fspec, fspec], [False, True], None, None, grid)
        assert res.value.real == pytest.approx(float((fspec.coeffs**2).sum()), rel=1e-9)
        assert abs(res.value.imag) < 1e-9


class TestVPoly:
    def test_zero_values(self):
        assert circle.v_poly(0.0, 100, 2).real == pytest.approx(9.2948019124, abs=1e-9)
        assert circle.v_poly(0.0, 50, 1).real == pytest.approx(50.0)

    def test_triangle_bound(self):
        v0 = abs(circle.v_poly(0.0, 200, 3))
        for beta in (0.01, 0.1, 0.37):
            assert abs(circle.v_poly(beta, 200, 3)) <= v0 + 1e-12


class TestSingularIntegral:
    def test_positive_and_right_order(self):
        n = 10**4
        x = math.log(n) ** (1 / 99)
        j = circle.singular_integral(n, 2, 3, x)
        assert j > 0
        # recorded: J / n^(3/2) = 0.501 at this scale
        assert 0.1 < j / n**1.5 < 2.0

    def test_doubling_increments_shrink(self):
        n = 10**4
        x = 1.02
        values = [circle.singular_integral(n, 2, 3, x * 2**i) for i in range(4)]
        increments = [abs(b - a) for a, b in zip(values, values[1:])]
        assert increments[0] > increments[1] > increments[2]

    def test_degenerate_power_against_trapezoid(self):
        n, x = 1000, 4.0
        j = circle.singular_integral(n, 3, 0, x)
        betas = np.linspace(-x / n, x / n, 20001)
        vals = np.array([(circle.v_poly(b, n, 1) * np.exp(-2j * np.pi * b * n)).real for b in betas])
        assert j == pytest.approx(float(np.trapezoid(vals, betas)), abs=1e-6)

    def test_domain(self):
        with pytest.raises(DomainError):
            circle.singular_integral(100, 2, 3, 0.5)


class TestModelError:
    def test_normalized_error_decreases(self):
        norms = []
        for n in (2**10, 2**12, 2**14):
            P = circle.kth_root_floor(n, 2)
            R = max(2, int(P ** (1 / 3)))
            rep = circle.major_arc_model_error(n, 2, R)
            norms.append(rep.normalized)
        assert norms[0] > norms[1] > norms[2]

    def test_zero_arc_is_tight(self):
        # at alpha = 0 the model is rho * v_k(0), close to |A| by construction
        n = 4096
        P = circle.kth_root_floor(n, 2)
        spectrum, members = circle.build_f_spectrum(n, 2, P)
        model = len(members) / P * circle.v_poly(0.0, n, 2).real
        assert spectrum.value_at_zero() == pytest.approx(model, rel=0.02)

    def test_full_range_smoothness_is_classical(self):
        rep = circle.major_arc_model_error(1024, 2, circle.kth_root_floor(1024, 2))
        assert rep.rho_hat == 1.0


class TestMoments:
    def test_subset_of_full_circle(self):
        P, k, t, R = 32, 3, 8.0, 2
        denom = P**k
        grid = circle.GridSpec.alias_free(denom, 0, oversample=2)
        spectrum, _ = circle.build_f_spectrum(denom, k, R)
        vals = circle.evaluate_on_grid(spectrum, grid)
        full = float((np.abs(vals) ** t).mean())
        res = circle.moment_v(P, R, 0.5 * math.sqrt(denom), t, k, grid=grid, f_values=vals)
        assert res.value <= full

    def test_measure_dominated_near_unit_height(self):
        # at Q = 1 the mass sits on two arcs around 0 and 1 where f is near
        # f(0); recorded ratio 0.719 for t = 2
        res = circle.moment_v(32, 2, 1.0, 2.0, 3)
        f0 = len(smooth_set(32, 2))
        ratio = res.value / (f0**2.0 * res.measure)
        assert 0.5 <= ratio <= 2.0

    def test_fractional_moment_allowed(self):
        res = circle.moment_v(16, 2, 2.0, 4.5, 3)
        assert res.value > 0
        assert res.below_guaranteed_range is False

    def test_small_t_flagged(self):
        res = circle.moment_v(16, 2, 2.0, 2.0, 3)
        assert res.below_guaranteed_range is True

    def test_doubling_report_schema(self):
        rep = circle.moment_doubling_report(16, 2, 3, 8.0, [1.0, 2.0, 4.0])
        assert rep["reference_slope"] == pytest.approx(2 * 0.1605, abs=0.02)
        assert len(rep["rows"]) == 3
        assert rep["rows"][1]["log2_ratio"] is not None

    def test_height_domain(self):
        with pytest.raises(DomainError):
            circle.moment_v(16, 2, 2000.0, 8.0, 3)


@pytest.fixture(scope="module")
def scene():
    n, k, s, theta = 10**4, 2, 3, 5
    grid = circle.GridSpec.alias_free(n, s)
    fspec, _ = circle.build_f_spectrum(n, k, 2)
    gspec = circle.build_g_spectrum(n)
    return {
        "n": n, "k": k, "s": s, "theta": theta, "grid": grid,
        "f": circle.evaluate_on_grid(fspec, grid),
        "g": circle.evaluate_on_grid(gspec, grid),
        "minor": circle.build_arc_union("K", n, k).complement(),
    }


class TestLevelSets:
    def test_minor_partition_is_exact(self, scene):
        part = circle.level_partition(
            scene["n"], scene["k"], scene["s"], scene["theta"], scene["minor"],
            scene["g"], scene["f"], family="minor", U=20.0,
        )
        base_measure = scene["minor"].grid_mask(scene["grid"].size).mean()
        assert part.measures_sum() == pytest.approx(float(base_measure), abs=1e-12)
        labels = [c.label for c in part.classes]
        assert labels == ["tiny_g", "band_small_f", "band_large_f", "unbanded"]

    def test_gentle_class_contribution_bound(self, scene):
        # on the small-f band the contribution is at most
        # (2n/U) * split * measure, the mechanism behind the band bound
        n, s = scene["n"], scene["s"]
        u = 20.0
        part = circle.level_partition(
            n, scene["k"], s, scene["theta"], scene["minor"], scene["g"], scene["f"],
            family="minor", U=u,
        )
        gentle = part.classes[1]
        cap = (2 * n / u) * part.thresholds["f_split"] * gentle.measure
        assert gentle.contribution_abs <= cap + 1e-9

    def test_low_band_empty(self, scene):
        # a band threshold below the covered range forces |g| >= n/U > sup g
        part = circle.level_partition(
            scene["n"], scene["k"], scene["s"], scene["theta"], scene["minor"],
            scene["g"], scene["f"], family="minor", U=1e-6,
        )
        assert part.warnings
        assert part.classes[1].points == 0 and part.classes[2].points == 0

    def test_slice_partition_is_exact(self, scene):
        n = scene["n"]
        q = 8.0
        sl = circle.build_arc_union("P_slice", n, scene["k"], Y=q)
        part = circle.level_partition(
            n, scene["k"], scene["s"], scene["theta"], sl, scene["g"], scene["f"],
            family="slice", V=q / 2, Q=q,
        )
        base_measure = sl.grid_mask(scene["grid"].size).mean()
        assert part.measures_sum() == pytest.approx(float(base_measure), abs=1e-12)
        assert [c.label for c in part.classes] == ["small_g", "band_small_f", "band_large_f", "unbanded"]

    def test_dyadic_cover(self, scene):
        cover = circle.dyadic_band_cover(
            scene["n"], scene["theta"], scene["g"],
            scene["minor"].grid_mask(scene["grid"].size),
        )
        assert cover["uncovered"] == 0
        assert cover["bands"] >= 5

    def test_envelope_reports(self, scene):
        n = scene["n"]
        env = circle.g_envelope_constant(n, scene["g"], scene["minor"].grid_mask(scene["grid"].size))
        assert env["constant"] > 0
        assert env["sup_g"] <= env["constant"] * env["scale"] + 1e-9
        fenv = circle.f_envelope_constant(n, scene["k"], scene["f"], circle.build_arc_union("L", n, scene["k"]))
        assert fenv["constant"] > 0


class TestDissectionLedger:
    def test_small_scale_ledger(self):
        rep = circle.dissection_ledger(10**4, 2, 3, 5, R=2)
        assert rep["minor_partition"]["measure_sum"] == pytest.approx(rep["minor_partition"]["base_measure"], abs=1e-12)
        assert rep["slice_partition"]["measure_sum"] == pytest.approx(rep["slice_partition"]["base_measure"], abs=1e-12)
        assert rep["covering"]["uncovered"] == 0
        assert len(rep["csv_rows"]) == 8
        for row in rep["csv_rows"]:
            assert len(row) == 5
