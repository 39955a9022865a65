"""Geometry: layouts, coarrays, and target-capacity arithmetic."""
import math

import numpy as np
import pytest

from canf import (
    CoprimeParams,
    SensorLayout,
    build_coprime_layout,
    build_dense_layout,
    build_subarrays,
    difference_coarray,
    max_targets,
)

import oracles

LAM = 10e-3
COPRIME_PAIRS = [
    (m, n)
    for m in range(1, 13)
    for n in range(m + 1, 13)
    if math.gcd(m, n) == 1
]


class TestCoprimeParams:
    def test_swaps_reversed_pair(self):
        p = CoprimeParams(11, 9, 2.5e-3, LAM)
        assert (p.m, p.n) == (9, 11)

    def test_rejects_non_coprime(self):
        with pytest.raises(ValueError, match="not coprime"):
            CoprimeParams(4, 6, 2.5e-3, LAM)

    def test_rejects_equal(self):
        with pytest.raises(ValueError):
            CoprimeParams(3, 3, 2.5e-3, LAM)

    def test_wide_spacing_warns(self):
        with pytest.warns(UserWarning, match="lambda/4"):
            CoprimeParams(2, 3, LAM / 2.0, LAM)

    def test_wide_spacing_strict_raises(self):
        with pytest.raises(ValueError, match="lambda/4"):
            CoprimeParams(2, 3, LAM / 2.0, LAM, strict_spacing=True)


class TestCoprimeLayout:
    def test_m2_n3_positions(self, layout23):
        assert layout23.grid == (-4, -3, -2, 0, 2, 3, 4)
        assert layout23.size == 7

    def test_m9_n11_counts(self, layout911):
        assert layout911.size == 37
        assert layout911.half_count == 19

    def test_m9_n11_field_boundaries(self, layout911):
        # d = 2.5 mm, lambda = 10 mm
        assert layout911.aperture == pytest.approx(0.45, abs=1e-12)
        assert layout911.fresnel_distance == pytest.approx(0.54, abs=1e-12)
        assert layout911.rayleigh_distance == pytest.approx(40.5, abs=1e-9)

    def test_positions_in_meters(self, layout23, params23):
        np.testing.assert_allclose(
            layout23.positions, np.array(layout23.grid) * params23.d
        )

    @pytest.mark.parametrize("m,n", COPRIME_PAIRS)
    def test_symmetry_exact(self, m, n):
        layout = build_coprime_layout(CoprimeParams(m, n, LAM / 4.0, LAM))
        g = layout.grid
        assert all(g[i] == -g[len(g) - 1 - i] for i in range(len(g)))
        assert layout.size == 2 * (m + n - 1) - 1


class TestDenseLayout:
    def test_grid(self):
        layout = build_dense_layout(7, LAM / 4.0, LAM)
        assert layout.grid == (-3, -2, -1, 0, 1, 2, 3)

    def test_aperture_37(self):
        layout = build_dense_layout(37, 2.5e-3, LAM)
        assert layout.aperture == pytest.approx(0.09, abs=1e-12)

    @pytest.mark.parametrize("u", [2, 0, 4])
    def test_even_count_rejected(self, u):
        with pytest.raises(ValueError, match="odd"):
            build_dense_layout(u, LAM / 4.0, LAM)

    def test_smaller_aperture_than_coprime(self):
        for m, n in [(2, 3), (3, 4), (9, 11), (5, 7)]:
            cop = build_coprime_layout(CoprimeParams(m, n, LAM / 4.0, LAM))
            dense = build_dense_layout(cop.size, LAM / 4.0, LAM)
            assert dense.aperture < cop.aperture


class TestSubarrays:
    def test_m2_n3_positions(self, params23):
        sub1, sub2 = build_subarrays(params23)
        np.testing.assert_allclose(sub1.positions, np.array([-3, 0, 3]) * params23.d)
        np.testing.assert_allclose(
            sub2.positions, np.array([-4, -2, 0, 2, 4]) * params23.d
        )

    def test_m9_n11_counts(self, params911):
        sub1, sub2 = build_subarrays(params911)
        assert sub1.size == 17
        assert sub2.size == 21

    @pytest.mark.parametrize("m,n", COPRIME_PAIRS)
    def test_union_equals_coprime_layout(self, m, n):
        params = CoprimeParams(m, n, LAM / 4.0, LAM)
        layout = build_coprime_layout(params)
        sub1, sub2 = build_subarrays(params)
        union = {g * n for g in sub1.grid} | {g * m for g in sub2.grid}
        assert union == set(layout.grid)


class TestDifferenceCoarray:
    def test_m2_n3_lags(self, layout23):
        ca = difference_coarray(layout23)
        assert ca.lags == tuple(range(-8, 9))
        assert len(ca.consecutive_segment) == 17
        assert ca.smoothing_segment == tuple(range(-6, 7))

    def test_lag_zero_multiplicity(self, layout23, layout911):
        for layout in (layout23, layout911):
            ca = difference_coarray(layout)
            assert ca.multiplicity[ca.lags.index(0)] == layout.size

    def test_m9_n11_segment_length(self, layout911):
        ca = difference_coarray(layout911)
        assert len(ca.consecutive_segment) >= 199
        assert len(ca.smoothing_segment) == 199

    def test_full_mode_uses_whole_run(self, layout911):
        ca = difference_coarray(layout911, "full")
        assert ca.smoothing_segment == ca.consecutive_segment

    def test_matches_bruteforce(self, layout911):
        ca = difference_coarray(layout911)
        ref = oracles.difference_set(layout911.grid)
        assert ca.lags == tuple(sorted(ref))
        assert ca.multiplicity == tuple(ref[lag] for lag in sorted(ref))

    @pytest.mark.parametrize("m,n", COPRIME_PAIRS)
    def test_segment_covers_guaranteed_span(self, m, n):
        layout = build_coprime_layout(CoprimeParams(m, n, LAM / 4.0, LAM))
        ca = difference_coarray(layout)
        ref = oracles.difference_set(layout.grid)
        assert oracles.central_run_length(ref) >= 2 * m * n + 1
        assert len(ca.consecutive_segment) == oracles.central_run_length(ref)

    def test_off_grid_positions_rejected(self):
        with pytest.raises(ValueError, match="integer multiples"):
            SensorLayout.from_positions([-1.0e-3, 0.0, 1.05e-3], 1e-3, LAM)

    def test_on_grid_positions_accepted(self):
        layout = SensorLayout.from_positions([-2e-3, 0.0, 2e-3], 1e-3, LAM)
        assert layout.grid == (-2, 0, 2)


class TestMaxTargets:
    @pytest.mark.parametrize(
        "m,n,k_v,k_p", [(9, 11, 13, 9), (3, 4, 4, 3), (2, 3, 3, 2)]
    )
    def test_known_values(self, m, n, k_v, k_p):
        assert max_targets(m, n) == (k_v, k_p)

    @pytest.mark.parametrize("m,n", COPRIME_PAIRS)
    def test_matches_bruteforce(self, m, n):
        k_v, k_p = max_targets(m, n)
        assert k_v == oracles.capacity_bruteforce(m, n)
        assert k_p == min(m, n)

    def test_rejects_non_coprime(self):
        with pytest.raises(ValueError):
            max_targets(4, 6)
