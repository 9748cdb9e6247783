import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pbo.problem import (
    ConstraintSet,
    is_feasible,
    latin_hypercube,
    make_rescaler,
)


class TestConstraintSet:
    def test_dimension(self):
        c = ConstraintSet([-1.0, 0.0], [1.0, 2.0])
        assert c.dimension == 2

    def test_rejects_inverted_bounds(self):
        with pytest.raises(ValueError):
            ConstraintSet([1.0], [0.0])

    def test_rejects_mismatched_bounds(self):
        with pytest.raises(ValueError):
            ConstraintSet([0.0, 0.0], [1.0])


class TestIsFeasible:
    def test_interior_of_box(self):
        c = ConstraintSet([-1.0], [1.0])
        assert is_feasible(c, [0.0])

    def test_bound_violated(self):
        c = ConstraintSet([-1.0], [1.0])
        assert not is_feasible(c, [1.0001])

    def test_inequality_violated(self):
        # 0.7 + 0.7 - 1 = 0.4 > 0
        c = ConstraintSet([0.0, 0.0], [1.0, 1.0], ineq=lambda x: np.array([x[0] + x[1] - 1.0]))
        assert not is_feasible(c, [0.7, 0.7])
        assert is_feasible(c, [0.3, 0.3])

    def test_equality_tolerance(self):
        c = ConstraintSet([0.0], [1.0], eq=lambda x: np.array([x[0] - 0.5]))
        assert is_feasible(c, [0.5])
        assert is_feasible(c, [0.5 + 1e-9])
        assert not is_feasible(c, [0.6])

    def test_dimension_mismatch(self):
        c = ConstraintSet([-1.0], [1.0])
        with pytest.raises(ValueError):
            is_feasible(c, [0.0, 0.0])


class TestLatinHypercube:
    def test_one_point_per_slab_1d(self):
        pts = latin_hypercube([0.0], [4.0], 4, seed=7)
        bins = np.sort(np.floor(pts[:, 0]).astype(int))
        assert bins.tolist() == [0, 1, 2, 3]

    def test_deterministic(self):
        a = latin_hypercube([0.0, -1.0], [1.0, 1.0], 6, seed=42)
        b = latin_hypercube([0.0, -1.0], [1.0, 1.0], 6, seed=42)
        np.testing.assert_array_equal(a, b)

    @pytest.mark.parametrize("seed", [0, 1, 99])
    @pytest.mark.parametrize("n,count", [(1, 5), (2, 8), (3, 12)])
    def test_marginal_stratification(self, n, count, seed):
        lo = np.full(n, -2.0)
        hi = np.full(n, 3.0)
        pts = latin_hypercube(lo, hi, count, seed=seed)
        width = (hi - lo) / count
        for j in range(n):
            bins = np.floor((pts[:, j] - lo[j]) / width[j]).astype(int)
            assert sorted(bins.tolist()) == list(range(count))

    def test_points_distinct(self):
        pts = latin_hypercube([0.0, 0.0], [1.0, 1.0], 8, seed=3)
        d = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
        d[np.diag_indices(8)] = np.inf
        assert np.min(d) > 0

    def test_count_too_small(self):
        with pytest.raises(ValueError):
            latin_hypercube([0.0], [1.0], 1, seed=0)


class TestRescaler:
    def test_midpoint_maps_to_zero(self):
        r = make_rescaler(ConstraintSet([0.0], [2.0]))
        assert r.forward([1.0])[0] == pytest.approx(0.0, abs=1e-15)

    def test_endpoints(self):
        r = make_rescaler(ConstraintSet([-3.0], [3.0]))
        assert r.forward([3.0])[0] == pytest.approx(1.0)
        assert r.forward([-3.0])[0] == pytest.approx(-1.0)

    def test_inverse_example(self):
        r = make_rescaler(ConstraintSet([0.5], [2.5]))
        assert r.inverse([0.0])[0] == pytest.approx(1.5)

    def test_degenerate_dimension(self):
        with pytest.raises(ValueError, match="degenerate"):
            make_rescaler(ConstraintSet([0.0, 1.0], [1.0, 1.0]))

    def test_round_trip_random_points(self):
        rng = np.random.default_rng(0)
        lo = np.array([-3.0, 0.5, 100.0])
        hi = np.array([7.0, 0.6, 101.0])
        r = make_rescaler(ConstraintSet(lo, hi))
        for _ in range(1000):
            x = rng.uniform(lo, hi)
            back = r.inverse(r.forward(x))
            assert np.all(np.abs(back - x) <= 1e-12 * (1.0 + np.abs(x)))

    @settings(max_examples=200, deadline=None)
    @given(
        lo=st.floats(-1e3, 1e3),
        width=st.floats(1e-3, 1e3),
        frac=st.floats(0.0, 1.0),
    )
    def test_forward_stays_in_unit_box(self, lo, width, frac):
        r = make_rescaler(ConstraintSet([lo], [lo + width]))
        x = lo + frac * width
        z = r.forward([x])[0]
        assert -1.0 - 1e-9 <= z <= 1.0 + 1e-9
