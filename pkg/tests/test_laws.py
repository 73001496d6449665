"""
test_laws.py — Offspring laws, jump laws, alias tables and lattice constants.
"""

import numpy as np
import pytest
from scipy.special import gamma

from cbrw.errors import LawError
from cbrw.laws import (
    AliasTable,
    CriticalGeometric,
    JumpLaw,
    OffspringLaw,
    adjoint_measure,
    asymptotic_constants,
    certified_a,
    constant_a_d,
    convolution_integral,
    get_jump_law,
    get_offspring_law,
    newton_shell_integral,
    offspring_gf,
    position_offspring,
    sphere_area,
    validate_jump,
)


class TestOffspringLaws:
    """Critical offspring laws and their generating functions."""

    def test_binary_moments(self, binary):
        """Binary branching has mean 1 and variance 1."""
        assert binary.mean == pytest.approx(1.0)
        assert binary.sigma2 == pytest.approx(1.0)
        assert not binary.degenerate

    def test_binary_gf(self, binary):
        """f(t) = t - t^2/2 for binary branching."""
        t = np.linspace(0.0, 1.0, 11)
        assert binary.f(t) == pytest.approx(t - t**2 / 2)
        assert offspring_gf(binary, 0.5) == pytest.approx(0.375)

    def test_gf_endpoints(self):
        """f(0) = 0 and f'(0) = 1 for every preset."""
        for name in ["binary", "geometric", "poisson", "delta1"]:
            mu = get_offspring_law(name)
            assert mu.f(0.0) == pytest.approx(0.0, abs=1e-12)
            assert mu.f_prime(0.0) == pytest.approx(1.0, abs=1e-9)

    def test_gf_domain_checked(self, binary):
        """f is only defined on [0, 1]."""
        with pytest.raises(LawError):
            binary.f(1.5)

    def test_geometric_is_exact(self):
        """The geometric law has sigma^2 = 2 and is its own adjoint."""
        mu = get_offspring_law("geometric")
        assert isinstance(mu, CriticalGeometric)
        assert mu.sigma2 == 2.0
        assert mu.adjoint() is mu
        assert mu.f(0.5) == pytest.approx(1.0 - 1.0 / 1.5)

    def test_poisson_is_critical(self):
        """Poisson(1) is tabulated with mean 1 and variance 1."""
        mu = get_offspring_law("poisson")
        assert mu.mean == pytest.approx(1.0, abs=1e-9)
        assert mu.sigma2 == pytest.approx(1.0, abs=1e-8)

    def test_supercritical_rejected(self):
        """A law with mean other than 1 is not critical."""
        with pytest.raises(LawError):
            OffspringLaw([0.3, 0.0, 0.7])

    def test_pmf_must_sum_to_one(self):
        """Probabilities must add up to 1."""
        with pytest.raises(LawError):
            OffspringLaw([0.5, 0.0, 0.6])

    def test_pmf_spec(self, binary):
        """A {k: prob} table builds the same law as the preset."""
        mu = get_offspring_law({"pmf": {0: 0.5, 2: 0.5}})
        assert np.allclose(mu.probs, binary.probs)

    def test_unknown_preset(self):
        """Unknown preset names are a LawError."""
        with pytest.raises(LawError):
            get_offspring_law("triple")


class TestAdjoint:
    """The adjoint measure mu~(i) = sum_{j > i} mu(j)."""

    def test_binary_adjoint(self, binary):
        """Binary branching has adjoint uniform on {0, 1}."""
        adj = adjoint_measure(binary)
        assert adj.probs == pytest.approx([0.5, 0.5])

    def test_adjoint_mean_is_half_variance(self):
        """The adjoint has mean sigma^2 / 2."""
        for name in ["binary", "geometric", "poisson"]:
            mu = get_offspring_law(name)
            assert mu.adjoint().mean == pytest.approx(mu.sigma2 / 2, abs=1e-8)

    def test_delta1_adjoint_is_delta0(self, delta1):
        """With one child per particle, bush roots have no children."""
        assert delta1.degenerate
        assert list(delta1.adjoint().probs) == [1.0]


class TestPositionOffspring:
    """The position-dependent law mu_x."""

    def test_binary_values(self, binary):
        """mu_x = [r~/2, 1/2] / (1 - r) for binary branching."""
        law = position_offspring(binary, 0.6, 0.2)
        assert law.probs == pytest.approx([0.375, 0.625])

    def test_visited_site_rejected(self, binary):
        """r = 1 means the site behaves like a point of K."""
        with pytest.raises(LawError):
            position_offspring(binary, 0.0, 1.0)


class TestCertifiedGap:
    """The quadratic gap f(t) <= t - a t^2."""

    def test_binary(self, binary):
        """Binary branching has gap 1/2, capped just below."""
        a = certified_a(binary)
        assert 0.0 < a < 0.5
        assert a == pytest.approx(0.5)

    def test_degenerate_law(self, delta1):
        """delta_1 has no gap."""
        with pytest.raises(LawError):
            certified_a(delta1)


class TestJumpLaws:
    """Jump law presets and validation."""

    def test_srw_covariance(self, srw5):
        """SRW on Z^5 has zero mean and Q = I/5."""
        assert np.allclose(srw5.mean, 0.0)
        assert np.allclose(srw5.Q, np.eye(5) / 5)
        assert srw5.symmetric
        assert srw5.range == 1

    def test_lazy_srw_covariance(self):
        """The lazy walk halves the covariance."""
        theta = get_jump_law("lazy-srw", 5)
        assert np.allclose(theta.Q, np.eye(5) / 10)
        assert theta.prob_of((0, 0, 0, 0, 0)) == pytest.approx(0.5)

    def test_reversed(self):
        """theta~(x) = theta(-x)."""
        theta = JumpLaw([[1, 0], [-1, 0], [0, 2], [0, -1]], [0.25, 0.25, 1 / 6, 1 / 3])
        rev = theta.reversed()
        assert rev.prob_of((0, -2)) == pytest.approx(1 / 6)
        assert rev.prob_of((0, 1)) == pytest.approx(1 / 3)

    def test_axis_power_tail(self):
        """Heavy axis jumps respect the weak L^d tail condition."""
        theta = get_jump_law({"preset": "axis-power", "alpha": 6.0}, 5)
        assert theta.range > 1
        assert np.isfinite(theta.tail_constant())
        assert np.allclose(theta.mean, 0.0, atol=1e-12)

    def test_axis_power_exponent_checked(self):
        """alpha below d breaks the tail condition."""
        with pytest.raises(LawError):
            get_jump_law({"preset": "axis-power", "alpha": 4.0}, 5)

    def test_one_dimensional_presets(self):
        """pm1 exists only in d = 1."""
        assert get_jump_law("pm1", 1).Q[0, 0] == pytest.approx(1.0)
        with pytest.raises(LawError):
            get_jump_law("pm1", 5)

    def test_duplicate_steps_rejected(self):
        """Each step appears once in the table."""
        with pytest.raises(LawError):
            JumpLaw([[1], [1], [-1]], [0.25, 0.25, 0.5])

    def test_declared_covariance_checked(self):
        """A declared Q must match the table."""
        pmf = [[[1], 0.5], [[-1], 0.5]]
        assert get_jump_law({"pmf": pmf, "q": [[1.0]]}, 1).Q[0, 0] == pytest.approx(1.0)
        with pytest.raises(LawError):
            get_jump_law({"pmf": pmf, "q": [[2.0]]}, 1)

    def test_dimension_mismatch(self, srw5):
        """A ready law must match the requested dimension."""
        with pytest.raises(LawError):
            get_jump_law(srw5, 3)

    def test_validate_srw(self, srw5):
        """SRW passes validation and is flagged periodic."""
        report = validate_jump(srw5)
        assert report.zero_mean
        assert report.passed
        assert report.bipartite
        assert report.coordinate_gcds == [1] * 5

    def test_validate_biased_walk(self):
        """A drift is reported, not raised."""
        report = validate_jump(JumpLaw([[1], [-1]], [0.75, 0.25]))
        assert not report.zero_mean
        assert not report.passed
        assert report.notes


class TestAliasTable:
    """Walker alias sampling."""

    def test_encodes_weights(self):
        """The table reproduces the normalised weights."""
        weights = np.array([1.0, 2.0, 3.0, 4.0])
        table = AliasTable.build(weights)
        assert table.probabilities() == pytest.approx(weights / weights.sum())

    def test_sampling_frequencies(self):
        """Draw frequencies match the pmf."""
        table = AliasTable.build(np.array([0.1, 0.6, 0.3]))
        draws = table.sample(np.random.default_rng(3), 200_000)
        freq = np.bincount(draws, minlength=3) / len(draws)
        assert freq == pytest.approx([0.1, 0.6, 0.3], abs=0.01)

    def test_bad_weights(self):
        """Negative or all-zero weights are rejected."""
        with pytest.raises(LawError):
            AliasTable.build(np.array([0.0, 0.0]))
        with pytest.raises(LawError):
            AliasTable.build(np.array([1.0, -0.5]))


class TestConstants:
    """The constants a_d and t_d."""

    def test_a_d_for_srw(self, srw5):
        """For SRW on Z^5, a_5 = 5 Gamma(3/2) / (2 pi^{5/2})."""
        assert constant_a_d(5, srw5.Q) == pytest.approx(2.5 * gamma(1.5) / np.pi**2.5)

    def test_a_d_needs_high_dimension(self):
        """a_d is only defined here for d >= 5."""
        with pytest.raises(LawError):
            constant_a_d(4, np.eye(4) / 4)

    def test_sphere_area(self):
        """|S^2| = 4 pi."""
        assert sphere_area(3) == pytest.approx(4 * np.pi)

    @pytest.mark.slow
    def test_convolution_integral_matches_closed_form(self):
        """Quadrature of I_5 agrees with the shell formula."""
        value, error = convolution_integral(5)
        assert value == pytest.approx(newton_shell_integral(5), rel=1e-4)
        assert error < 1e-4 * value

    @pytest.mark.slow
    def test_asymptotic_constants(self, binary, srw5):
        """r and q limits carry the factor sigma^2 / 2."""
        consts = asymptotic_constants(binary, srw5, bcap=2.0)
        assert consts["p"] == pytest.approx(2.0 * consts["a_d"])
        assert consts["r"] == pytest.approx(consts["p"] / 2)
        assert consts["q"] == pytest.approx(consts["q_minus"])
