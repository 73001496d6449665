"""
test_lattice.py — Boxes, finite sets, norms and balls on Z^d.
"""

import numpy as np
import pytest

from cbrw.errors import BoxError, DegenerateCovarianceError, DuplicatePointError, EmptySetError, LatticeError
from cbrw.lattice import (
    ZERO_NORM,
    Box,
    SetK,
    ThetaNorm,
    ball,
    diam,
    dist,
    norm_theta,
    origin,
    rad,
    random_subset,
    unit,
)


class TestBox:
    """Index map and geometry of lattice boxes."""

    def test_shape_and_size(self):
        """A radius-2 box in Z^5 has side 5 and 5^5 sites."""
        box = Box(origin(5), 2)
        assert box.dim == 5
        assert box.side == 5
        assert box.shape == (5,) * 5
        assert box.size == 3125

    def test_index_and_point_are_inverse(self):
        """point(index(x)) gives x back for sites inside the box."""
        box = Box((1, -1, 0), 3)
        for x in [(1, -1, 0), (4, 2, -3), (-2, -4, 3)]:
            assert box.point(box.index(x)) == x

    def test_coords_follow_index_order(self):
        """Row i of coords() is point(i)."""
        box = Box(origin(2), 1)
        coords = box.coords()
        assert coords.shape == (9, 2)
        assert tuple(coords[4]) == box.point(4) == (0, 0)

    def test_contains(self):
        """Membership uses the sup-norm around the center."""
        box = Box(origin(3), 2)
        assert box.contains((2, -2, 0))
        assert not box.contains((3, 0, 0))

    def test_outside_point_raises(self):
        """Indexing a site outside the box is a BoxError."""
        with pytest.raises(BoxError):
            Box(origin(3), 1).index((2, 0, 0))

    def test_negative_radius_raises(self):
        """Radius must be nonnegative."""
        with pytest.raises(BoxError):
            Box(origin(3), -1)

    def test_enlarge_contains_original(self):
        """An enlarged box holds the original one."""
        box = Box(origin(4), 2)
        assert box.is_inside(box.enlarge(3))
        assert not box.enlarge(3).is_inside(box)

    def test_around_set(self):
        """Box.around leaves `margin` sites beyond the farthest coordinate."""
        K = SetK.of([[0, 0, 0], [2, -3, 1]])
        assert Box.around(K, 4) == Box(origin(3), 7)

    def test_json(self):
        """to_json/from_json preserve the box."""
        box = Box((1, 2), 5)
        assert Box.from_json(box.to_json()) == box


class TestSetK:
    """Finite target sets."""

    def test_empty_raises(self):
        """The empty set is rejected."""
        with pytest.raises(EmptySetError):
            SetK(())

    def test_duplicate_raises(self):
        """Each atom appears once."""
        with pytest.raises(DuplicatePointError):
            SetK.of([[0, 0], [1, 0], [0, 0]])

    def test_mixed_dimension_raises(self):
        """All atoms share one dimension."""
        with pytest.raises(LatticeError):
            SetK.of([[0, 0], [1, 0, 0]])

    def test_membership_and_order(self):
        """Atoms keep their insertion order."""
        K = SetK.of([[2, 0], [0, 0], [1, 1]])
        assert len(K) == 3
        assert (0, 0) in K
        assert (5, 5) not in K
        assert K.index_of((1, 1)) == 2
        assert K.array.shape == (3, 2)

    def test_index_of_missing_raises(self):
        """index_of a non-member is a LatticeError."""
        with pytest.raises(LatticeError):
            SetK.single((0, 0)).index_of((1, 0))

    def test_set_algebra(self):
        """Union, intersection, subset and translation."""
        A = SetK.of([[0, 0], [1, 0]])
        B = SetK.of([[1, 0], [2, 0]])
        assert len(A.union(B)) == 3
        assert A.intersection(B) == SetK.single((1, 0))
        assert A.intersection(B.translate((5, 5))) is None
        assert SetK.single((1, 0)).is_subset(A)
        assert not B.is_subset(A)
        assert A.translate((1, 0)).points == ((1, 0), (2, 0))

    def test_lookup_table(self):
        """The dense table holds 1 + atom index on members."""
        K = SetK.of([[0, 0], [2, 1]])
        lo, shape, table = K.lookup_table()
        assert list(lo) == [0, 0]
        assert list(shape) == [3, 2]
        assert table[np.ravel_multi_index((2, 1), tuple(shape))] == 2
        assert table[np.ravel_multi_index((0, 0), tuple(shape))] == 1
        assert table.sum() == 3

    def test_random_subset(self):
        """Subsets are drawn without replacement in the parent's order."""
        K = ball("euclidean", 1, d=5)
        sub = random_subset(K, 4, np.random.default_rng(7))
        assert len(sub) == 4
        assert sub.is_subset(K)
        order = [K.index_of(p) for p in sub]
        assert order == sorted(order)

    def test_random_subset_size_checked(self):
        """Size must be between 1 and |K|."""
        K = SetK.single(origin(5))
        with pytest.raises(LatticeError):
            random_subset(K, 2, np.random.default_rng(0))


class TestNorms:
    """The jump-adapted norm and its conventions."""

    def test_srw_norm_is_euclidean(self, srw5):
        """For SRW, Q = I/d and ||x|| = |x|."""
        assert norm_theta(srw5.Q, (3, 4, 0, 0, 0)) == pytest.approx(5.0)
        assert norm_theta(srw5.Q, unit(5, 2)) == pytest.approx(1.0)

    def test_zero_norm_convention(self, srw5):
        """||0|| = 0.5."""
        assert norm_theta(srw5.Q, origin(5)) == ZERO_NORM

    def test_many_matches_single(self, srw5):
        """Row-wise norms agree with the scalar call."""
        norm = ThetaNorm(srw5.Q)
        points = np.array([[0, 0, 0, 0, 0], [1, 1, 0, 0, 0], [0, 0, 2, 0, -1]])
        expected = [norm(p) for p in points]
        assert norm.many(points) == pytest.approx(expected)

    def test_degenerate_covariance_raises(self):
        """Singular Q has no norm."""
        with pytest.raises(DegenerateCovarianceError):
            ThetaNorm([[1.0, 0.0], [0.0, 0.0]])

    def test_distances(self, srw5, K2):
        """dist, diam and rad with the zero convention."""
        assert dist(K2, unit(5, 0, 3), srw5.Q) == pytest.approx(2.0)
        assert dist(K2, origin(5), srw5.Q) == ZERO_NORM
        assert diam(K2, srw5.Q) == pytest.approx(1.0)
        assert diam(SetK.single(unit(5)), srw5.Q) == ZERO_NORM
        assert rad(K2, srw5.Q) == pytest.approx(1.0)


class TestBalls:
    """Ball enumeration."""

    def test_euclidean_unit_ball(self):
        """The unit ball in Z^5 is the origin and its 10 neighbours."""
        assert len(ball("euclidean", 1, d=5)) == 11

    def test_lexicographic_order(self):
        """Points come out sorted lexicographically."""
        points = ball("euclidean", 1, d=2).points
        assert list(points) == sorted(points)

    def test_slab_with_full_dimension_is_euclidean(self):
        """B^d(r) in Z^d is the Euclidean ball."""
        assert ball("slab", 2, m=3, d=3) == ball("euclidean", 2, d=3)

    def test_slab_lives_in_first_coordinates(self):
        """Slab points vanish beyond the first m coordinates."""
        S = ball("slab", 2, m=2, d=5)
        assert len(S) == 13
        assert not np.any(S.array[:, 2:])

    def test_slab_dimension_checked(self):
        """m must lie in [1, d]."""
        with pytest.raises(LatticeError):
            ball("slab", 2, m=6, d=5)

    def test_theta_norm_ball(self, srw5):
        """For SRW the theta-norm ball is the Euclidean ball."""
        assert ball("theta_norm", 2, Q=srw5.Q) == ball("euclidean", 2, d=5)

    def test_theta_norm_needs_covariance(self):
        """Without Q there is no theta norm."""
        with pytest.raises(LatticeError):
            ball("theta_norm", 1, d=5)

    def test_negative_radius_raises(self):
        """Radius must be nonnegative."""
        with pytest.raises(LatticeError):
            ball("euclidean", -1, d=3)
