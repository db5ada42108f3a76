#include <doctest.h>

#include <cmath>
#include <random>

#include "csm/errors.hpp"
#include "csm/free_energy.hpp"
#include "csm/gibbs_exact.hpp"
#include "csm/oracle.hpp"
#include "test_util.hpp"

using namespace csm;

namespace {

// A random inclusion-ordered family of variable subsets; its projections
// give a functorial skeleton for the transform tests.
RegionModel random_nested_model(std::mt19937& rng) {
    std::uniform_int_distribution<int> nvars(2, 4);
    std::uniform_int_distribution<int> nregions(2, 6);
    const int vars = nvars(rng);
    std::vector<std::string> var_names;
    std::vector<int> var_sizes(static_cast<std::size_t>(vars), 2);
    for (int i = 0; i < vars; ++i) var_names.push_back("s" + std::to_string(i));
    std::set<std::vector<int>> seen;
    std::vector<std::vector<int>> region_vars;
    std::vector<std::string> region_names;
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    const int want = nregions(rng);
    for (int attempts = 0; static_cast<int>(region_vars.size()) < want && attempts < 50; ++attempts) {
        std::vector<int> subset;
        for (int v = 0; v < vars; ++v)
            if (coin(rng) < 0.5) subset.push_back(v);
        if (subset.empty() || !seen.insert(subset).second) continue;
        region_names.push_back("r" + std::to_string(region_vars.size()));
        region_vars.push_back(subset);
    }
    if (region_vars.empty()) {
        region_names.push_back("r0");
        region_vars.push_back({0});
    }
    return make_region_model(var_names, var_sizes, region_names, region_vars);
}

std::vector<std::vector<double>> random_vectors(std::mt19937& rng, const GSkeleton& skel) {
    std::uniform_real_distribution<double> value(-2.0, 2.0);
    std::vector<std::vector<double>> v(static_cast<std::size_t>(skel.poset.size()));
    for (int a = 0; a < skel.poset.size(); ++a) {
        v[static_cast<std::size_t>(a)].resize(static_cast<std::size_t>(skel.space_size(a)));
        for (double& x : v[static_cast<std::size_t>(a)]) x = value(rng);
    }
    return v;
}

double family_gap(const std::vector<std::vector<double>>& x, const std::vector<std::vector<double>>& y) {
    double gap = 0;
    for (std::size_t a = 0; a < x.size(); ++a)
        for (std::size_t w = 0; w < x[a].size(); ++w) gap = std::max(gap, std::abs(x[a][w] - y[a][w]));
    return gap;
}

double pair_total(const std::vector<std::vector<double>>& f, const std::vector<std::vector<double>>& v) {
    double total = 0;
    for (std::size_t a = 0; a < f.size(); ++a)
        for (std::size_t w = 0; w < f[a].size(); ++w) total += f[a][w] * v[a][w];
    return total;
}

HamiltonianFamily random_hamiltonians(std::mt19937& rng, const std::vector<FiniteSpace>& spaces,
                                      double beta = 1.0) {
    std::uniform_real_distribution<double> energy(-1.5, 1.5);
    HamiltonianFamily h;
    h.beta = beta;
    for (const auto& s : spaces) {
        std::vector<double> e(static_cast<std::size_t>(s.size()));
        for (double& x : e) x = energy(rng);
        h.h.push_back(std::move(e));
    }
    return h;
}

}  // namespace

TEST_CASE("fe_vector special values") {
    FiniteSpace three = indexed_space(3);
    HamiltonianFamily zero = zero_hamiltonians({three});
    BeliefFamily q{uniform_dist(three)};
    CHECK(fe_vector(q, zero)[0] == doctest::Approx(-std::log(3.0)));

    std::mt19937 rng(3);
    HamiltonianFamily h = random_hamiltonians(rng, {three});
    BeliefFamily opt{boltzmann({three, h.h[0], h.beta})};
    CHECK(fe_vector(opt, h)[0] == doctest::Approx(log_partition({three, h.h[0], h.beta})));

    BeliefFamily peak{point_mass(three, 1)};
    CHECK(fe_vector(peak, h)[0] == doctest::Approx(h.beta * h.h[0][1]));
}

TEST_CASE("generalized_bethe on a singleton poset is the Gibbs free energy") {
    FiniteSpace four = indexed_space(4);
    std::mt19937 rng(5);
    HamiltonianFamily h = random_hamiltonians(rng, {four}, 1.3);
    BeliefFamily q{normalized_dist(four, {0.1, 0.2, 0.3, 0.4})};
    std::vector<long long> c{1};
    CHECK(generalized_bethe(q, h, c) ==
          doctest::Approx(gibbs_free_energy(q[0], {four, h.h[0], h.beta})));
}

TEST_CASE("gb_entropy reconstructs the joint entropy on trees") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        auto rm = testutil::path_region_model(3 + trial % 2);
        std::vector<std::vector<double>> terms;
        std::uniform_real_distribution<double> energy(-1.0, 1.0);
        for (std::size_t r = 0; r < rm.region_vars.size(); ++r) {
            std::vector<double> t(static_cast<std::size_t>(rm.spaces[r].size()));
            for (double& x : t) x = energy(rng);
            terms.push_back(std::move(t));
        }
        auto model = make_joint_model(rm, terms, 0.8);
        auto marginals = exact_marginals(model);
        MobiusTable table(model.regions.poset);
        auto c = counting_coefficients(model.regions.poset, table);
        CHECK(gb_entropy(marginals, c) == doctest::Approx(entropy(boltzmann_joint(model))).epsilon(1e-10));
    }
}

TEST_CASE("the Bethe functional at exact tree marginals is the exact free energy") {
    auto model = testutil::ising_model(testutil::path_region_model(4), 1.0, 0.3, 0.7);
    auto marginals = exact_marginals(model);
    MobiusTable table(model.regions.poset);
    auto c = counting_coefficients(model.regions.poset, table);
    HamiltonianFamily h = region_energies(model);
    CHECK(generalized_bethe(marginals, h, c) == doctest::Approx(exact_log_partition(model)).epsilon(1e-9));

    // Other marginal-consistent families stay above the optimum.
    std::mt19937 rng(11);
    for (int rep = 0; rep < 25; ++rep) {
        Dist joint = testutil::random_positive_joint(rng, model.regions);
        BeliefFamily q;
        for (int r = 0; r < model.regions.poset.size(); ++r)
            q.push_back(pushforward_map(model.regions.projection_from_joint(r),
                                        model.regions.spaces[static_cast<std::size_t>(r)], joint));
        CHECK(generalized_bethe(q, h, c) >= exact_log_partition(model) - 1e-9);
    }
}

TEST_CASE("energy splits through counting coefficients and cumulative terms") {
    std::mt19937 rng(13);
    auto model = testutil::ising_model(testutil::path_region_model(4), 0.8, -0.2, 1.0);
    HamiltonianFamily cumulative = region_energies(model);
    MobiusTable table(model.regions.poset);
    auto c = counting_coefficients(model.regions.poset, table);
    for (int rep = 0; rep < 20; ++rep) {
        Dist joint = testutil::random_positive_joint(rng, model.regions);
        double direct = 0;
        for (std::size_t r = 0; r < model.terms.size(); ++r) {
            auto proj = model.regions.projection_from_joint(static_cast<int>(r));
            for (std::size_t w = 0; w < joint.p.size(); ++w)
                direct += joint.p[w] * model.terms[r][static_cast<std::size_t>(proj[w])];
        }
        double split = 0;
        for (int r = 0; r < model.regions.poset.size(); ++r) {
            Dist marginal = pushforward_map(model.regions.projection_from_joint(r),
                                            model.regions.spaces[static_cast<std::size_t>(r)], joint);
            double expectation = 0;
            for (std::size_t w = 0; w < marginal.p.size(); ++w)
                expectation += marginal.p[w] * cumulative.h[static_cast<std::size_t>(r)][w];
            split += static_cast<double>(c[static_cast<std::size_t>(r)]) * expectation;
        }
        CHECK(split == doctest::Approx(direct).epsilon(1e-9));
    }
}

TEST_CASE("fe_gradient formula and finite differences") {
    FiniteSpace four = indexed_space(4);
    HamiltonianFamily zero = zero_hamiltonians({four});
    BeliefFamily flat{uniform_dist(four)};
    auto grad = fe_gradient(flat, zero);
    for (double g : grad[0]) CHECK(g == doctest::Approx(1.0 - std::log(4.0)));

    std::mt19937 rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        FiniteSpace space = indexed_space(2 + trial % 4);
        HamiltonianFamily h = random_hamiltonians(rng, {space});
        BeliefFamily q = testutil::random_positive_family(rng, {space});
        auto analytic = fe_gradient(q, h);
        auto numeric = finite_diff_gradient(
            [&](const BeliefFamily& probe) { return fe_vector(probe, h)[0]; }, q, 1e-6);
        for (std::size_t w = 0; w < analytic[0].size(); ++w)
            CHECK(analytic[0][w] ==
                  doctest::Approx(numeric[0][w]).epsilon(1e-5));
    }

    // At the Boltzmann point the gradient is constant across outcomes.
    HamiltonianFamily h = random_hamiltonians(rng, {four});
    BeliefFamily opt{boltzmann({four, h.h[0], h.beta})};
    auto g = fe_gradient(opt, h);
    for (double v : g[0]) CHECK(v == doctest::Approx(g[0][0]).epsilon(1e-9));

    BeliefFamily degenerate{point_mass(four, 0)};
    CHECK_THROWS_AS(fe_gradient(degenerate, h), NonPositiveBeliefError);
}

TEST_CASE("functor transforms reduce to poset transforms on identity legs") {
    std::mt19937 rng(19);
    auto spec = testutil::identity_chain_spec(3, indexed_space(2));
    GSkeleton skel = skeleton_of(spec);
    MobiusTable table(skel.poset);
    auto v = random_vectors(rng, skel);
    auto up = functor_transform(skel, table, v, TransformDirection::Zeta, TransformVariance::FunctionsUp);
    for (int coord = 0; coord < 2; ++coord) {
        std::vector<double> slice{v[0][static_cast<std::size_t>(coord)], v[1][static_cast<std::size_t>(coord)],
                                  v[2][static_cast<std::size_t>(coord)]};
        auto z = zeta_transform(skel.poset, std::span<const double>(slice));
        for (int a = 0; a < 3; ++a)
            CHECK(up[static_cast<std::size_t>(a)][static_cast<std::size_t>(coord)] == doctest::Approx(z[static_cast<std::size_t>(a)]));
    }
}

TEST_CASE("functor transforms invert and adjoint on random skeletons") {
    std::mt19937 rng(23);
    for (int trial = 0; trial < 100; ++trial) {
        GSkeleton skel = skeleton_of(random_nested_model(rng));
        MobiusTable table(skel.poset);
        auto v = random_vectors(rng, skel);
        for (auto variance : {TransformVariance::FunctionsUp, TransformVariance::MeasuresDown}) {
            auto round1 = functor_transform(skel, table,
                                            functor_transform(skel, table, v, TransformDirection::Zeta, variance),
                                            TransformDirection::Mobius, variance);
            auto round2 = functor_transform(skel, table,
                                            functor_transform(skel, table, v, TransformDirection::Mobius, variance),
                                            TransformDirection::Zeta, variance);
            CHECK(family_gap(round1, v) <= 1e-10);
            CHECK(family_gap(round2, v) <= 1e-10);
        }
        // Duality: pairing the Moebius pushdown against functions equals
        // pairing measures against the Moebius pullback.
        auto lambda = random_vectors(rng, skel);
        auto mu_down = functor_transform(skel, table, lambda, TransformDirection::Mobius,
                                         TransformVariance::MeasuresDown);
        auto mu_up = functor_transform(skel, table, v, TransformDirection::Mobius,
                                       TransformVariance::FunctionsUp);
        CHECK(pair_total(v, mu_down) == doctest::Approx(pair_total(mu_up, lambda)).epsilon(1e-10));
    }
}

TEST_CASE("criticality on a singleton poset picks out the Boltzmann point") {
    FiniteSpace four = indexed_space(4);
    std::mt19937 rng(29);
    HamiltonianFamily h = random_hamiltonians(rng, {four});
    ASpecification spec(FinitePoset::from_pairs({"a"}, {}), {four});
    BeliefFamily opt{boltzmann({four, h.h[0], h.beta})};
    auto report = criticality_residual(spec, opt, h);
    CHECK(report.projected_residual <= 1e-9);
    CHECK(report.mobius_residual <= 1e-9);

    BeliefFamily off{normalized_dist(four, {0.4, 0.3, 0.2, 0.1})};
    auto report_off = criticality_residual(spec, off, h);
    CHECK(report_off.projected_residual > 1e-3);
}

TEST_CASE("exact tree marginals are critical for the Bethe functional") {
    auto model = testutil::ising_model(testutil::path_region_model(4), 1.0, 0.25, 0.9);
    auto marginals = exact_marginals(model);
    HamiltonianFamily h = region_energies(model);
    GSkeleton skel = skeleton_of(model.regions);
    auto report = criticality_residual(skel, marginals, h);
    CHECK(report.feasibility_residual <= 1e-12);
    CHECK(report.projected_residual <= 1e-7);
    CHECK(report.route_agreement <= 1e-9);

    // A feasible but non-critical family scores clearly worse.
    std::mt19937 rng(31);
    Dist joint = testutil::random_positive_joint(rng, model.regions);
    BeliefFamily q;
    for (int r = 0; r < model.regions.poset.size(); ++r)
        q.push_back(pushforward_map(model.regions.projection_from_joint(r),
                                    model.regions.spaces[static_cast<std::size_t>(r)], joint));
    auto report_off = criticality_residual(skel, q, h);
    CHECK(report_off.projected_residual > 1e-3);
}

TEST_CASE("criticality gates on feasibility and positivity") {
    auto spec = testutil::identity_chain_spec(2, indexed_space(2));
    HamiltonianFamily h = zero_hamiltonians(spec.spaces());
    BeliefFamily infeasible{normalized_dist(indexed_space(2), {0.9, 0.1}),
                            normalized_dist(indexed_space(2), {0.1, 0.9})};
    CHECK_THROWS_AS(criticality_residual(spec, infeasible, h), InfeasibleInputError);
    BeliefFamily boundary{point_mass(indexed_space(2), 0), point_mass(indexed_space(2), 0)};
    CHECK_THROWS_AS(criticality_residual(spec, boundary, h), NonPositiveBeliefError);
}
