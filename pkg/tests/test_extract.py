import math
import random

import numpy as np
import pytest

from stochoice import (
    MNL,
    GeneralMNL,
    NotPositiveError,
    Outcome,
    Perturbed,
    Space,
    Uniform,
    Utility,
    certify_closeness,
    extract_beta,
    extract_utility,
    fit_beta_min_delta,
    fit_utility_representation,
    identity,
    power,
    probit,
    product,
    scalar,
    scalar_menu,
    ulam_bound,
    unit_binary_menu,
    upsilon,
)
from stochoice.axioms import decomposability_epsilon

UNIT = unit_binary_menu()


class TestExtractBeta:
    @pytest.mark.parametrize("beta", [-10.0, -3.0, -0.5, 0.0, 0.5, 2.0, 10.0])
    def test_recovers_mnl_parameter(self, beta):
        assert extract_beta(MNL(beta)) == pytest.approx(beta, abs=1e-12)

    def test_uniform_is_zero(self):
        assert extract_beta(Uniform()) == 0.0

    def test_argmax_limits(self):
        assert extract_beta(MNL(math.inf)) == math.inf
        assert extract_beta(MNL(-math.inf)) == -math.inf

    def test_probit_value(self):
        # ln(0.760.../0.239...) from the quadrature probabilities
        beta = extract_beta(probit())
        p = probit().choose(UNIT)["b1"]
        assert beta == pytest.approx(math.log(p / (1 - p)))


class TestExtractUtility:
    def test_mean_variance_probe(self):
        rule = GeneralMNL(Utility.mean_variance(1.0, -0.5))
        x = Outcome(Space.mean_stddev(), (2.0, 1.0))
        assert extract_utility(rule, x) == pytest.approx(1.5, abs=1e-10)

    def test_identity_outcome_is_zero(self):
        rule = GeneralMNL(Utility.mean_variance(0.7, 0.3))
        assert extract_utility(rule, identity(Space.mean_stddev())) == pytest.approx(
            0.0, abs=1e-12
        )

    def test_scalar_probe(self):
        assert extract_utility(MNL(1.0), scalar(3.0)) == pytest.approx(3.0, abs=1e-10)

    def test_not_positive(self):
        with pytest.raises(NotPositiveError):
            extract_utility(MNL(math.inf), scalar(3.0))


def _random_utility(space: Space, rng: random.Random) -> Utility:
    sizes = {
        "real_scalar": 1,
        "real_vector": space.d,
        "mean_stddev": 2,
        "discrete_distribution": space.moment_order,
        "prize_stream": len(space.alphabet),
        "matrix": 1,
    }
    coeffs = tuple(rng.uniform(-2.0, 2.0) for _ in range(sizes[space.kind]))
    return Utility(space, coeffs)


class TestFitRoundTrip:
    SPACES = [
        Space.scalar(),
        Space.vector(5),
        Space.mean_stddev(),
        Space.distribution(4),
        Space.prizes(("p1", "p2", "p3", "p4", "p5", "p6")),
        Space.matrix(3),
    ]

    @pytest.mark.parametrize("space", SPACES, ids=lambda s: s.kind)
    def test_randomized_parameters(self, space):
        rng = random.Random(f"fit-{space.kind}")
        for _ in range(5):
            u = _random_utility(space, rng)
            fit = fit_utility_representation(GeneralMNL(u), space)
            assert np.allclose(fit.utility.coeffs, u.coeffs, atol=1e-9)

    def test_uniform_fits_to_zero(self):
        fit = fit_utility_representation(Uniform(), Space.mean_stddev())
        assert fit.utility.coeffs == (0.0, 0.0)

    def test_condition_number_reported(self):
        u = Utility(Space.distribution(4), (0.5, -0.25, 0.1, 0.02))
        fit = fit_utility_representation(GeneralMNL(u), u.space)
        assert fit.probe_condition > 1.0

    def test_moment_order_zero(self):
        fit = fit_utility_representation(Uniform(), Space.distribution(0))
        assert fit.utility.coeffs == ()

    def test_not_positive_rule_rejected(self):
        with pytest.raises(NotPositiveError):
            fit_utility_representation(MNL(math.inf), Space.scalar())


class TestUpsilon:
    @pytest.mark.parametrize("beta", [-1.0, 0.0, 1.0, 2.5])
    def test_mnl_is_fixed_point(self, beta):
        menu = scalar_menu({"a": 0.0, "b": 1.0, "c": -0.5})
        est = upsilon(MNL(beta), menu, 8)
        base = MNL(beta).choose(menu)
        for a in menu.actions:
            assert est.distribution[a] == pytest.approx(base[a], abs=1e-10)

    def test_zero_propagates(self):
        est = upsilon(MNL(math.inf), UNIT, 6)
        assert est.distribution["b0"] == 0.0
        assert est.distribution["b1"] == 1.0

    def test_size_guard(self):
        with pytest.raises(ValueError):
            upsilon(MNL(1.0), UNIT, 21)

    def test_envelope_reported(self):
        est = upsilon(MNL(1.0), UNIT, 8, eps_decomp=0.5)
        assert est.bound == pytest.approx(1.5 ** (1 / 8) - 1)
        assert upsilon(MNL(1.0), UNIT, 8).bound is None

    def test_probit_drifts_toward_argmax(self):
        # probit is not uniformly approximately decomposable: its nth-root
        # estimates escalate toward the argmax rule instead of converging
        # to the binary distribution
        values = [upsilon(probit(), UNIT, n).distribution["b1"] for n in (1, 4, 8)]
        assert values[0] == pytest.approx(0.760, abs=2e-3)
        assert values[0] < values[1] < values[2]

    def test_probit_power_diagonal_against_quadrature_oracle(self):
        # oracle: scipy quadrature of the Hamming-weight-grouped integrand
        # pdf(x) * prod_k cdf(n - k + x)^C(n,k), independent of the
        # adaptive-Simpson path used by IARU.choose
        from math import comb

        from scipy import integrate
        from scipy.stats import norm

        n = 12

        def integrand(x):
            acc = norm.logpdf(x)
            for k in range(n):
                acc += comb(n, k) * norm.logcdf(n - k + x)
            return np.exp(acc)

        oracle, _ = integrate.quad(integrand, -14.0, 14.0, epsabs=1e-13, limit=300)
        from stochoice import diagonal_action

        dist = probit().choose(power(UNIT, n))
        assert dist[diagonal_action("b1", n)] == pytest.approx(oracle, abs=1e-8)

    @pytest.mark.parametrize("seed", [1, 2, 3, 4, 5])
    def test_estimate_is_neutral_decomposable_and_normalized(self, seed):
        # the limit-rule properties, asserted on the finite-n estimate at
        # the Fekete envelope tolerance
        n = 8
        rule = Perturbed(MNL(1.0), 0.05, seed)
        menu = scalar_menu({"a": 1.0, "b": 1.0, "c": 0.0})
        envelope_pairs = [
            (menu, menu),
            (power(menu, 4), power(menu, 4)),
            (power(menu, 7), menu),
        ]
        eps = max(
            decomposability_epsilon(rule, m1, m2).min_epsilon
            for m1, m2 in envelope_pairs
        )
        env = (1.0 + eps) ** (1.0 / n) - 1.0
        # raw nth roots sum to one within the envelope
        dist = rule.choose(power(menu, n))
        from stochoice import diagonal_action

        raw = {a: dist[diagonal_action(a, n)] ** (1.0 / n) for a in menu.actions}
        assert abs(sum(raw.values()) - 1.0) <= env
        # equal-outcome actions get equal estimates within the envelope
        assert max(raw["a"] / raw["b"], raw["b"] / raw["a"]) - 1.0 <= env
        # the estimate factorizes over products within the envelope
        m2 = scalar_menu({"p": 0.5, "q": -0.5})
        eps2 = max(
            decomposability_epsilon(rule, m1, m2_).min_epsilon
            for m1, m2_ in [(UNIT, m2), (power(UNIT, 4), power(m2, 4))]
        )
        env2 = (1.0 + eps2) ** (1.0 / n) - 1.0
        up1 = upsilon(rule, UNIT, n).distribution
        up2 = upsilon(rule, m2, n).distribution
        up12 = upsilon(rule, product(UNIT, m2), n).distribution
        gap = max(
            abs(up12[(a, b)] - up1[a] * up2[b])
            for a in UNIT.actions
            for b in m2.actions
        )
        assert gap <= env2

    def test_perturbed_within_fekete_envelope(self):
        n_max = 8
        rule = Perturbed(MNL(1.0), 0.05, 3)
        pairs = [(power(UNIT, k), power(UNIT, n_max - k)) for k in range(1, n_max)]
        pairs.append((UNIT, UNIT))
        eps_d = max(
            decomposability_epsilon(rule, m1, m2).min_epsilon for m1, m2 in pairs
        )
        est = upsilon(rule, UNIT, n_max, eps_decomp=eps_d)
        base = MNL(1.0).choose(UNIT)
        dev = max(abs(est.distribution[a] - base[a]) for a in UNIT.actions)
        assert dev <= est.bound


class TestCertify:
    def test_mnl_against_own_beta(self):
        corpus = [UNIT, scalar_menu({"a": -1.0, "b": 2.0, "c": 0.5})]
        cert = certify_closeness(MNL(1.5), corpus, Utility.scalar_beta(1.5))
        assert cert.delta <= 1e-10
        assert cert.corpus_size == 2

    def test_perturbed_delta_bounded_by_construction(self):
        corpus = [UNIT, product(UNIT, UNIT), scalar_menu({"a": -1.0, "b": 0.7})]
        rule = Perturbed(MNL(2.0), 0.05, 11)
        beta = fit_beta_min_delta(rule, corpus)
        cert = certify_closeness(rule, corpus, Utility.scalar_beta(beta))
        assert cert.delta <= 0.05 + 1e-8

    def test_shocks_bounded_by_delta(self):
        corpus = [UNIT, product(UNIT, UNIT)]
        rule = Perturbed(MNL(1.0), 0.1, 5)
        beta = fit_beta_min_delta(rule, corpus)
        cert = certify_closeness(rule, corpus, Utility.scalar_beta(beta))
        for _, shocks in cert.shocks:
            assert all(abs(s) <= cert.delta + 1e-12 for s in shocks.values())

    def test_probit_residual_spread(self):
        corpus = [UNIT, product(UNIT, UNIT)]
        beta = extract_beta(probit())
        cert = certify_closeness(probit(), corpus, Utility.scalar_beta(beta))
        assert cert.delta > 0.01

    def test_wrong_beta_strictly_larger(self):
        corpus = [UNIT, power(UNIT, 12)]
        rule = Perturbed(MNL(1.0), 0.05, 2)
        good = fit_beta_min_delta(rule, corpus)
        d_good = certify_closeness(rule, corpus, Utility.scalar_beta(good)).delta
        d_bad = certify_closeness(rule, corpus, Utility.scalar_beta(1.1)).delta
        assert d_bad > d_good

    def test_non_positive_corpus_rejected(self):
        with pytest.raises(ValueError, match="non-positive"):
            certify_closeness(MNL(math.inf), [UNIT], Utility.scalar_beta(1.0))

    def test_certificate_json_schema(self):
        cert = certify_closeness(MNL(1.0), [UNIT], Utility.scalar_beta(1.0))
        data = cert.to_json()
        assert set(data) == {"utility", "delta", "menus", "corpus_size"}
        assert data["menus"][0]["menu_id"] == "menu_0000"
        assert set(data["menus"][0]["shocks"]) == {"b0", "b1"}


class TestUlamBound:
    def test_zero_case(self):
        bounds = ulam_bound(0.0, 0.0)
        assert bounds.general == 0.0 and bounds.banach == 0.0

    def test_reduction_binds(self):
        # eps'_neut = min{1, 0.21} = 0.21, then 0.2 + 0.21 + 0.61 = 1.02
        bounds = ulam_bound(1.0, 0.1)
        assert bounds.general == pytest.approx(1.02)
        assert bounds.banach == pytest.approx(10 * 0.1 + 2 * 0.01)

    def test_small_neutrality_binds(self):
        bounds = ulam_bound(0.05, 0.1)
        assert bounds.general == pytest.approx(0.70)

    def test_banach_closed_form_on_grid(self):
        for i in range(51):
            eps_d = i / 100.0
            bounds = ulam_bound(2.0, eps_d)
            closed = 10.0 * eps_d + 2.0 * eps_d**2
            assert abs(bounds.general - closed) <= 1e-15
            assert abs(bounds.banach - closed) <= 1e-15

    def test_custom_stability_function(self):
        bounds = ulam_bound(1.0, 0.1, stability=lambda x: 2 * x)
        assert bounds.general == pytest.approx(0.2 + 0.21 + 2 * 0.61)

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            ulam_bound(-0.1, 0.0)

    def test_rejects_bad_stability(self):
        with pytest.raises(ValueError):
            ulam_bound(0.1, 0.1, stability=lambda x: x + 1.0)


class TestFitBetaMinDelta:
    def test_exact_for_pure_mnl(self):
        corpus = [UNIT, scalar_menu({"a": -2.0, "b": 1.0, "c": 3.0})]
        assert fit_beta_min_delta(MNL(0.8), corpus) == pytest.approx(0.8, abs=1e-9)

    def test_requires_positive_rule(self):
        with pytest.raises(ValueError, match="non-positive"):
            fit_beta_min_delta(MNL(math.inf), [UNIT])
