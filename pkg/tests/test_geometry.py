import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from carleson import geometry as geo


class TestGridInvariants:
    def test_ratio_must_be_integer(self):
        with pytest.raises(ValueError):
            geo.HalfSpaceGrid(d=1, R=1.0, h=0.3)

    def test_ratio_must_be_at_least_eight(self):
        with pytest.raises(ValueError):
            geo.HalfSpaceGrid(d=1, R=1.0, h=0.25)

    def test_bottom_boundary_in_grid(self, grid_16):
        assert grid_16.vertical_nodes()[0] == 0.0
        assert grid_16.node_shape == (33, 17)

    def test_dimension_guard(self):
        with pytest.raises(ValueError):
            geo.HalfSpaceGrid(d=3, R=1.0, h=0.125)


class TestCellsIn:
    def test_whitney_count_2d(self, grid_16):
        # Delta(0, R) = (-1, 1), t in (1/2, 1]: 32 lateral x 8 vertical cells
        cells = geo.cells_in(geo.whitney((0.0,), 1.0), grid_16)
        assert cells.shape == (256, 2)

    def test_pencil_count_2d(self, grid_16):
        cells = geo.cells_in(geo.pencil((0.0,), 1.0), grid_16)
        assert cells.shape == (512, 2)

    def test_below_resolution_is_an_error(self, grid_16):
        with pytest.raises(geo.UnresolvedRegionError):
            geo.cells_in(geo.halfball((0.0,), grid_16.h / 2.0), grid_16)

    def test_lexicographic_order(self, grid_16):
        cells = geo.cells_in(geo.halfball((0.25,), 0.5), grid_16)
        as_tuples = [tuple(row) for row in cells]
        assert as_tuples == sorted(as_tuples)

    def test_surface_ball_has_no_cells(self, grid_16):
        with pytest.raises(ValueError):
            geo.cells_in(geo.surface_ball((0.0,), 0.5), grid_16)

    def test_halfball_brute_force(self, grid_16):
        reg = geo.halfball((0.25,), 0.5)
        expected = set()
        for i, xc in enumerate(grid_16.lateral_cell_centers()):
            for j, tc in enumerate(grid_16.vertical_cell_centers()):
                if (xc - 0.25) ** 2 + tc**2 < 0.25:
                    expected.add((i, j))
        got = {tuple(row) for row in geo.cells_in(reg, grid_16)}
        assert got == expected

    def test_whitney_count_3d(self, grid_3d):
        # lateral disk of radius 1 counted cell-center-wise, 4 vertical layers
        cells = geo.cells_in(geo.whitney((0.0, 0.0), 1.0), grid_3d)
        xc = grid_3d.lateral_cell_centers()
        lat = sum(
            1 for a in xc for b in xc if a * a + b * b < 1.0
        )
        assert cells.shape == (lat * 4, 3)


class TestRegionNesting:
    @settings(max_examples=60, deadline=None)
    @given(
        x=st.floats(-0.3, 0.3),
        y_off=st.floats(-1.0, 1.0),
        r=st.sampled_from([0.125, 0.1875, 0.25]),
        factor=st.floats(2.0, 3.0),
    )
    def test_halfball_nesting(self, x, y_off, r, factor):
        # T(x, r) cells nest into T(y, s) when |x-y| <= r and 2r <= s <= 3r
        grid = geo.HalfSpaceGrid(d=1, R=1.0, h=1.0 / 16.0)
        y = x + y_off * r
        s = factor * r
        if abs(y) + s > 1.0:
            return
        inner = {tuple(c) for c in geo.cells_in(geo.halfball((x,), r), grid)}
        outer = {tuple(c) for c in geo.cells_in(geo.halfball((y,), s), grid)}
        assert inner <= outer

    def test_whitney_inside_double_box(self):
        grid = geo.HalfSpaceGrid(d=1, R=1.0, h=1.0 / 32.0)
        net = geo.dyadic_net(geo.surface_ball((0.0,), 1.0), 0.25, grid)
        for c, r, _w in net.samples():
            w_cells = {tuple(i) for i in geo.cells_in(geo.whitney(tuple(c), r), grid)}
            t_cells = {tuple(i) for i in geo.cells_in(geo.halfball(tuple(c), 2 * r), grid)}
            assert w_cells <= t_cells


class TestDyadicNet:
    def test_two_levels(self):
        net = geo.dyadic_net(geo.surface_ball((0.0,), 1.0), 0.25)
        assert net.radii() == [0.5, 0.25]

    def test_level_one_centers(self):
        net = geo.dyadic_net(geo.surface_ball((0.0,), 1.0), 0.25)
        centers = net.levels[0].centers[:, 0]
        gaps = np.diff(np.sort(centers))
        assert np.allclose(gaps, 0.25)
        assert np.all(np.abs(centers) < 1.0)

    def test_single_level_when_r_min_large(self):
        net = geo.dyadic_net(geo.surface_ball((0.0,), 1.0), 0.75)
        assert net.radii() == [0.5]

    def test_invalid_when_no_level_possible(self):
        with pytest.raises(geo.InvalidNetError):
            geo.dyadic_net(geo.surface_ball((0.0,), 1.0), 1.5)

    def test_grid_resolution_floor(self, grid_16):
        with pytest.raises(geo.InvalidNetError):
            geo.dyadic_net(geo.surface_ball((0.0,), 1.0), 0.25, grid_16)
        geo.dyadic_net(geo.surface_ball((0.0,), 1.0), 0.5, grid_16)

    def test_level_weight_sums(self):
        # per-level quadrature mass tiles |Delta_0| * ln 2 (exact in 1-D)
        net = geo.dyadic_net(geo.surface_ball((0.0,), 1.0), 1.0 / 64.0)
        target = 2.0 * math.log(2.0)
        for lv in net.levels:
            total = lv.weight * lv.centers.shape[0]
            assert abs(total - target) <= 0.1 * target

    def test_level_weight_sums_3d(self):
        net = geo.dyadic_net(geo.surface_ball((0.0, 0.0), 1.0), 1.0 / 32.0)
        target = math.pi * math.log(2.0)
        for lv in net.levels[1:]:
            total = lv.weight * lv.centers.shape[0]
            assert abs(total - target) <= 0.1 * target

    def test_refinement_adds_one_level_keeping_samples(self):
        base = geo.surface_ball((0.0,), 1.0)
        for r_min in (0.75, 0.5, 0.25, 0.2, 0.125):
            coarse = geo.dyadic_net(base, r_min)
            fine = geo.dyadic_net(base, r_min / 2.0)
            assert len(fine.levels) == len(coarse.levels) + 1
            for lv_c, lv_f in zip(coarse.levels, fine.levels):
                assert lv_c.radius == lv_f.radius
                assert np.array_equal(lv_c.centers, lv_f.centers)

    def test_weights_formula(self):
        net = geo.dyadic_net(geo.surface_ball((0.5,), 0.5), 0.125)
        for lv in net.levels:
            assert lv.weight == pytest.approx((lv.radius / 2.0) * math.log(2.0))
