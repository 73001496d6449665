"""
test_snakes.py — Snake samplers, records and Monte Carlo estimates.
"""

import numpy as np
import pytest

from cbrw.capacity import escape_fields, far_field_visit
from cbrw.errors import LatticeError, SamplingError
from cbrw.lattice import origin, unit
from cbrw.snakes import (
    THREADS_ENV,
    Caps,
    InfiniteVariant,
    PointMeasure,
    SnakeKind,
    collect_records,
    default_far_radius,
    estimate_visit_prob,
    get_estimate_kind,
    resolve_threads,
    sample_infinite_snake,
    sample_snake,
    stream_seed,
    stream_sizes,
)
from cbrw.snakes.sampler import SnakeSampler
from cbrw.solver import solve_visiting_bracket

SMALL_CAPS = Caps(max_tree_size=100_000)


class TestCaps:
    """Resource limits."""

    def test_defaults(self):
        caps = Caps()
        assert caps.max_tree_size == 10_000_000
        assert caps.max_spine_steps == 1_000_000
        assert caps.far_radius is None

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            Caps(max_tree_size=0)
        with pytest.raises(ValueError):
            Caps(max_spine_steps=0)


class TestPointMeasure:
    """Multiplicities on K."""

    def test_atoms_and_support(self, K2):
        a, b = K2.points
        m = PointMeasure.of_points(K2, [b, b])
        assert m.mass == 2
        assert m.atoms == [b, b]
        assert m.support == [b]
        assert m.key() == (0, 2)

    def test_addition(self, K2):
        a, b = K2.points
        total = PointMeasure.of_points(K2, [a]) + PointMeasure.of_points(K2, [b])
        assert total.counts == (1, 1)
        assert (PointMeasure.empty(K2) + total) == total

    def test_different_sets(self, K0, K2):
        with pytest.raises(LatticeError):
            PointMeasure.empty(K0) + PointMeasure.empty(K2)

    def test_validation(self, K2):
        """Wrong length and negative multiplicities are rejected."""
        with pytest.raises(LatticeError):
            PointMeasure(K2, (1,))
        with pytest.raises(LatticeError):
            PointMeasure.from_array(K2, np.array([1, -1]))


class TestSingleSnakes:
    """One snake at a time."""

    def test_root_in_K_is_visited(self, K0, binary, srw5):
        """A snake counts its root."""
        record = sample_snake(origin(5), binary, srw5, K0, rng=np.random.default_rng(3))
        assert record.visited
        assert record.first_visit == origin(5)
        assert record.visit_count >= 1
        assert record.entering.mass >= 1

    def test_entering_at_most_visits(self, K2, binary, srw5):
        """Every entrance is a visit."""
        rng = np.random.default_rng(8)
        for _ in range(200):
            record = sample_snake(unit(5, 1), binary, srw5, K2, SMALL_CAPS, rng)
            if record.usable:
                assert record.entering.mass <= record.visit_count
                assert record.visited == (record.visit_count >= 1)

    def test_infinite_snake_from_K(self, K0, binary, srw5):
        """The spine starts on K, so the infinite snake visits it."""
        record = sample_infinite_snake(
            origin(5), InfiniteVariant.INFINITE, binary, srw5, K0, Caps(far_radius=10), np.random.default_rng(2)
        )
        assert record.visited
        assert record.first_visit == origin(5)

    def test_far_radius_default(self, K0, srw5):
        """Eight times the reach, at least eight."""
        assert default_far_radius(K0, srw5, origin(5)) == pytest.approx(8.0)
        assert default_far_radius(K0, srw5, unit(5, 0, 3)) == pytest.approx(24.0)

    def test_kind_names(self):
        assert SnakeKind("adjoint-strict").skips_root
        assert not SnakeKind("one-child").skips_root


class TestStreams:
    """Seeding and thread configuration."""

    def test_stream_sizes(self):
        assert stream_sizes(10_000) == [4096, 4096, 1808]
        assert stream_sizes(4096) == [4096]
        assert stream_sizes(10) == [10]

    def test_stream_seed(self):
        assert stream_seed(7, 0) == 7
        assert stream_seed(7, 3) == 4
        assert stream_seed(2**40 + 5, 0) == 5

    def test_resolve_threads(self, monkeypatch):
        """Explicit value, else the environment, else 1."""
        monkeypatch.delenv(THREADS_ENV, raising=False)
        assert resolve_threads() == 1
        assert resolve_threads(0) == 1
        monkeypatch.setenv(THREADS_ENV, "3")
        assert resolve_threads() == 3
        assert resolve_threads(2) == 2
        monkeypatch.setenv(THREADS_ENV, "many")
        assert resolve_threads() == 1

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            get_estimate_kind("sideways")
        assert get_estimate_kind("escape").ignore_root_bush


class TestEstimates:
    """Binomial visit-probability estimates."""

    def test_root_in_K(self, K0, binary, srw5):
        """Every snake from a point of K visits K."""
        est = estimate_visit_prob("snake", origin(5), K0, 500, 1, mu=binary, theta=srw5, caps=SMALL_CAPS)
        assert est.p_hat == 1.0
        assert est.first_counts.tolist() == [est.n_used]

    def test_deterministic(self, K2, binary, srw5):
        """The same seed reproduces the same estimate."""
        kwargs = dict(mu=binary, theta=srw5, caps=SMALL_CAPS)
        first = estimate_visit_prob("snake", unit(5, 1), K2, 2000, 42, **kwargs)
        second = estimate_visit_prob("snake", unit(5, 1), K2, 2000, 42, **kwargs)
        assert first.n_visited == second.n_visited
        assert np.array_equal(first.first_counts, second.first_counts)
        assert 0.0 < first.p_hat < 1.0
        assert first.ci_low <= first.p_hat <= first.ci_high

    def test_threads_do_not_change_results(self, K0, binary, srw5):
        """Streams are seeded independently of the worker count."""
        kwargs = dict(mu=binary, theta=srw5, caps=SMALL_CAPS)
        one = estimate_visit_prob("snake", unit(5), K0, 10_000, 9, threads=1, **kwargs)
        two = estimate_visit_prob("snake", unit(5), K0, 10_000, 9, threads=2, **kwargs)
        assert one.n_visited == two.n_visited
        assert one.n_censored == two.n_censored

    def test_full_traversal_moments(self, K0, binary, srw5):
        """Full traversals report visit counts; the mean number of visits is finite."""
        est = estimate_visit_prob("snake", unit(5), K0, 1000, 5, mu=binary, theta=srw5, caps=SMALL_CAPS, full=True)
        assert est.mean_visits is not None and est.mean_visits > 0.0
        assert est.visits_second_moment >= est.mean_visits
        assert est.last_counts is not None

    def test_needs_samples(self, K0, binary, srw5):
        with pytest.raises(ValueError):
            estimate_visit_prob("snake", origin(5), K0, 0, 1, mu=binary, theta=srw5)

    def test_all_censored(self, K0, binary, srw5):
        """A one-vertex cap censors every one-child snake."""
        with pytest.raises(SamplingError):
            estimate_visit_prob(
                "one-child", unit(5, 0, 5), K0, 50, 1, mu=binary, theta=srw5, caps=Caps(max_tree_size=1)
            )

    def test_collect_records(self, K2, binary, srw5):
        """visited_only keeps visiting records with entering measures."""
        records = collect_records(
            "snake", unit(5, 1), K2, 2000, 17, mu=binary, theta=srw5, caps=SMALL_CAPS, visited_only=True
        )
        assert records
        for record in records:
            assert record.visited and record.complete
            assert 1 <= record.entering.mass <= record.visit_count
            assert record.first_visit in K2

    @pytest.mark.slow
    def test_agrees_with_bracket(self, K0, binary, srw5, tiny_box):
        """The Monte Carlo visit probability falls inside the numerical bracket."""
        bracket = solve_visiting_bracket(K0, binary, srw5, tiny_box)
        x = unit(5)
        lower = bracket.lower.p.value_at(x)
        upper = bracket.upper.p.value_at(x)
        est = estimate_visit_prob(
            "snake", x, K0, 20_000, 2024, mu=binary, theta=srw5, caps=Caps(max_tree_size=10**6)
        )
        assert lower - 4 * est.stderr <= est.p_hat <= upper + 4 * est.stderr


class TestFarRadius:
    """Spine-and-bush snakes are cut off at the far radius."""

    def test_start_beyond_far_radius(self, K0, binary, srw5):
        """A spine that starts outside the far ball would report 'not visited'."""
        with pytest.raises(SamplingError):
            sample_infinite_snake(
                unit(5, 0, 12), InfiniteVariant.INFINITE, binary, srw5, K0, Caps(far_radius=10),
                np.random.default_rng(1),
            )
        with pytest.raises(SamplingError):
            estimate_visit_prob("infinite", unit(5, 0, 10), K0, 10, 1, mu=binary, theta=srw5, caps=Caps(far_radius=10))

    def test_bushes_unpruned_by_default(self, K0, binary, srw5, monkeypatch):
        """Only an explicit prune_radius prunes bush lineages."""
        from cbrw.snakes import kernels

        seen = []

        def capture(*args):
            seen.append((args[18], args[19]))
            raise RuntimeError("captured")

        monkeypatch.setattr(kernels, "infinite_batch", capture)
        sampler = SnakeSampler(binary, srw5, K0)
        for caps in (Caps(far_radius=10), Caps(far_radius=10, prune_radius=6)):
            with pytest.raises(RuntimeError):
                sampler.infinite(unit(5), InfiniteVariant.INFINITE, 1, 0, caps)
        assert seen == [(100.0, 0.0), (100.0, 36.0)]


@pytest.mark.slow
class TestAgainstSolver:
    """Monte Carlo estimates fall inside the numerical truncation brackets (4 sigma)."""

    @pytest.fixture
    def bracket(self, K0, binary, srw5, tiny_box):
        return solve_visiting_bracket(K0, binary, srw5, tiny_box)

    def _within(self, est, lower, upper):
        assert lower - 4 * est.stderr <= est.p_hat <= upper + 4 * est.stderr

    def test_adjoint_snake(self, K0, binary, srw5, bracket):
        """r(x) from snakes whose root has the adjoint offspring law."""
        x = unit(5)
        est = estimate_visit_prob(
            "adjoint", x, K0, 20_000, 77, mu=binary, theta=srw5, caps=Caps(max_tree_size=10**6)
        )
        self._within(est, bracket.lower.r.value_at(x), bracket.upper.r.value_at(x))

    def test_strict_adjoint_snake(self, K0, binary, srw5, bracket):
        """R on K: the adjoint snake from 0 returns to K after time zero."""
        est = estimate_visit_prob(
            "adjoint-strict", origin(5), K0, 20_000, 5, mu=binary, theta=srw5, caps=Caps(max_tree_size=10**6)
        )
        self._within(est, bracket.lower.R.value_at(origin(5)), bracket.upper.R.value_at(origin(5)))

    def test_reversed_infinite_escape(self, K0, binary, srw5, bracket):
        """1 - Es(0) from reversed infinite snakes without their root bush."""
        upper_es = escape_fields(K0, bracket.lower, srw5)
        bcap = float(upper_es.on_K("Es").sum())
        lower_es = escape_fields(K0, bracket.upper, srw5, exterior=far_field_visit(binary, srw5, K0, bcap))
        est = estimate_visit_prob(
            "escape", origin(5), K0, 20_000, 11, mu=binary, theta=srw5,
            caps=Caps(max_tree_size=10**6, far_radius=16),
        )
        self._within(est, 1.0 - upper_es.on_K("Es")[0], 1.0 - lower_es.on_K("Es")[0])

    def test_invariant_escape(self, K0, binary, srw5, bracket):
        """1 - es(0) from invariant snakes, counting visits off the spine."""
        upper_es = escape_fields(K0, bracket.lower, srw5)
        bcap = float(upper_es.on_K("Es").sum())
        lower_es = escape_fields(K0, bracket.upper, srw5, exterior=far_field_visit(binary, srw5, K0, bcap))
        est = estimate_visit_prob(
            "escape-last", origin(5), K0, 20_000, 13, mu=binary, theta=srw5,
            caps=Caps(max_tree_size=10**6, far_radius=16),
        )
        self._within(est, 1.0 - upper_es.on_K("es")[0], 1.0 - lower_es.on_K("es")[0])
