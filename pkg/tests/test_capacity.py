"""
test_capacity.py — Escape fields, branching and classical capacity, hm_K.
"""

from collections import Counter

import numpy as np
import pytest

from cbrw.capacity import (
    branching_capacity,
    classical_capacity,
    escape_fields,
    far_field_visit,
    histogram_z,
    hm_law,
    sample_hm_K,
    transition_row,
    tv_distance,
)
from cbrw.errors import BoxError, SamplingError
from cbrw.lattice import Box, SetK, origin, unit
from cbrw.laws import constant_a_d, constant_t_d, get_jump_law
from cbrw.snakes import Caps
from cbrw.solver import solve_visiting


@pytest.fixture
def box3():
    return Box(origin(5), 3)


@pytest.fixture
def pair_visit(binary, srw5, box3):
    """Visit fields of {e1, -e1} for binary branching on [-3, 3]^5."""
    K = SetK.of([unit(5), unit(5, 0, -1)])
    return K, solve_visiting(K, binary, srw5, box3)


class TestEscapeFields:
    """Es, Es+, EsR and es on a box."""

    def test_probabilities(self, pair_visit, srw5):
        """Every escape field lies in [0, 1] and is positive on K."""
        K, vf = pair_visit
        escape = escape_fields(K, vf, srw5, method="direct")
        for name in ("Es", "Es_plus", "EsR", "es"):
            values = escape.field(name).values
            assert np.all(values >= -1e-12) and np.all(values <= 1.0 + 1e-12)
            assert np.all(escape.on_K(name) > 0.0)
        assert 0.0 < escape.ring_min() <= 1.0

    def test_transition_rows_are_stochastic(self, pair_visit, srw5):
        """The conditioned spine chain has rows summing to one."""
        K, vf = pair_visit
        escape = escape_fields(K, vf, srw5, method="direct")
        for x in (origin(5), unit(5, 1), unit(5, 0, 2)):
            assert transition_row(escape, vf, srw5, x).total == pytest.approx(1.0, abs=1e-8)

    def test_unknown_field(self, pair_visit, srw5):
        """Only the four escape fields can be looked up."""
        K, vf = pair_visit
        escape = escape_fields(K, vf, srw5, method="direct")
        with pytest.raises(KeyError):
            escape.field("Es_minus")

    def test_box_must_fit(self, pair_visit, srw5):
        """The escape box must sit inside the visit box."""
        K, vf = pair_visit
        with pytest.raises(BoxError):
            escape_fields(K, vf, srw5, box=Box(origin(5), 4))


class TestClassicalCapacity:
    """Random-walk capacity on a truncated box."""

    def test_singleton(self, K0, srw5, box3):
        """The constant-one exterior overestimates 1 / g(0, 0)."""
        result = classical_capacity(K0, srw5, box3, method="direct")
        assert 0.8648 < result.cap < 0.9
        assert result.harmonic == pytest.approx([1.0])

    def test_monotone(self, K0, K2, srw5, box3):
        """A larger set has a larger capacity."""
        small = classical_capacity(K0, srw5, box3, method="direct").cap
        large = classical_capacity(K2, srw5, box3, method="direct").cap
        assert small < large < 2 * small

    def test_needs_transience(self):
        """Recurrent dimensions have no capacity."""
        pm1 = get_jump_law("pm1", 1)
        with pytest.raises(ValueError):
            classical_capacity(SetK.single((0,)), pm1, Box((0,), 4))


class TestBranchingCapacity:
    """BCap from the first and last visit equilibrium weights."""

    def test_degenerate_law_is_classical(self, K2, delta1, srw5, box3):
        """With one child per particle BCap equals Cap."""
        result = branching_capacity(K2, delta1, srw5, box=box3, method="direct", bracket=False)
        cap = classical_capacity(K2, srw5, box3, method="direct").cap
        assert result.bcap_first == pytest.approx(cap, rel=1e-8)
        assert result.bcap_last == pytest.approx(cap, rel=1e-8)

    def test_symmetric_pair(self, binary, srw5, box3):
        """Reflection symmetry splits the harmonic measure evenly."""
        K = SetK.of([unit(5), unit(5, 0, -1)])
        result = branching_capacity(K, binary, srw5, box=box3, method="direct", bracket=False)
        assert result.bcap > 0.0
        assert result.harmonic_first == pytest.approx([0.5, 0.5], abs=1e-8)
        assert result.harmonic_last.sum() == pytest.approx(1.0)
        assert result.error_bar == 0.0
        assert set(result.to_json()) >= {"bcap_first", "bcap_last"}

    def test_branching_below_classical(self, K2, binary, delta1, srw5, box3):
        """Branching visits K more often, so its capacity is smaller."""
        bcap = branching_capacity(K2, binary, srw5, box=box3, method="direct", bracket=False).bcap
        cap = branching_capacity(K2, delta1, srw5, box=box3, method="direct", bracket=False).bcap
        assert 0.0 < bcap < cap

    def test_unbracketed_intervals_collapse(self, K0, binary, srw5, box3):
        result = branching_capacity(K0, binary, srw5, box=box3, method="direct", bracket=False)
        assert result.first_interval == (result.bcap_first, result.bcap_first)
        assert result.last_interval == (result.bcap_last, result.bcap_last)
        assert result.error_bar == 0.0

    def test_far_field_exterior(self, K0, binary, srw5):
        """The lower escape bracket uses the two-term far-field visit probability, clipped to [0, 1]."""
        exterior = far_field_visit(binary, srw5, K0, 0.2)
        a_d, t_d = constant_a_d(5, srw5.Q), constant_t_d(5, srw5.Q)
        dist = 10.0
        q = a_d * 0.2 * dist**-3 + t_d * a_d**2 * binary.sigma2 * 0.2 / 2 / dist
        values = exterior.evaluate(np.array([[10, 0, 0, 0, 0], [0, 0, 0, 0, 0]]))
        assert values[0] == pytest.approx(1.0 - q)
        assert 0.0 <= values[1] <= 1.0


class TestEnteringTools:
    """Total variation, z-scores and hm_K samples."""

    def test_tv_identical(self):
        """Equal laws are at distance zero."""
        law = Counter({(1, 0): 30, (0, 1): 70})
        assert tv_distance(law, Counter({(1, 0): 3, (0, 1): 7}), merge_below=1) == pytest.approx(0.0)

    def test_tv_disjoint(self):
        """Disjoint supports are at distance one."""
        assert tv_distance(Counter({(1,): 50}), Counter({(2,): 50})) == pytest.approx(1.0)

    def test_tv_pools_rare_outcomes(self):
        """Rare outcomes share a bucket before comparing."""
        p = Counter({(1,): 100, (2,): 1})
        q = Counter({(1,): 100, (3,): 1})
        assert tv_distance(p, q) == pytest.approx(0.0)
        assert tv_distance(p, q, merge_below=1) > 0.0

    def test_tv_empty(self):
        """An empty sample has no law."""
        with pytest.raises(SamplingError):
            tv_distance(Counter(), Counter({(1,): 1}))

    def test_histogram_z(self):
        """Exact frequencies score zero; impossible atoms score infinity."""
        z = histogram_z(np.array([25, 75]), np.array([0.25, 0.75]))
        assert np.all(z == 0.0)
        z = histogram_z(np.array([1, 9]), np.array([0.0, 1.0]))
        assert np.isinf(z[0])

    def test_hm_of_singleton_without_branching(self, K0, delta1, srw5, box3):
        """One child per particle: hm_K of a point is a single unit mass."""
        result = branching_capacity(K0, delta1, srw5, box=box3, method="direct", bracket=False)
        caps = Caps(far_radius=10)
        rng = np.random.default_rng(5)
        draws = [sample_hm_K(result, srw5, caps, rng) for _ in range(20)]
        assert set(draws) == {(1,)}

    def test_hm_law_counts(self, K0, delta1, srw5, box3):
        """hm_law tallies sample keys."""
        from cbrw.capacity import HmSampler

        result = branching_capacity(K0, delta1, srw5, box=box3, method="direct", bracket=False)
        sampler = HmSampler(result, srw5, Caps(far_radius=10))
        samples = sampler.sample_many(10, np.random.default_rng(1))
        assert hm_law(samples) == Counter({(1,): 10})
        assert all(s.path_length >= 1 for s in samples)
