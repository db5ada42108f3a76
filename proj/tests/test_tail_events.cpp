#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "csm/errors.hpp"
#include "csm/gibbs_exact.hpp"
#include "csm/tail_events.hpp"
#include "test_util.hpp"

using namespace csm;

namespace {

BeliefFamily mix(const BeliefFamily& x, const BeliefFamily& y, double lambda) {
    BeliefFamily out = x;
    for (std::size_t a = 0; a < out.size(); ++a)
        for (std::size_t w = 0; w < out[a].p.size(); ++w)
            out[a].p[w] = lambda * x[a].p[w] + (1 - lambda) * y[a].p[w];
    return out;
}

double event_mass(const Dist& d, const std::vector<bool>& in) {
    double mass = 0;
    for (std::size_t w = 0; w < d.p.size(); ++w)
        if (in[w]) mass += d.p[w];
    return mass;
}

}  // namespace

TEST_CASE("lim sigma of the identity two-chain") {
    auto spec = testutil::identity_chain_spec(2, indexed_space(2));
    auto sections = enumerate_lim_sigma(spec);
    CHECK(sections.size() == 4);  // empty, {0}, {1}, full
    for (const auto& ev : sections) {
        CHECK(ev.in[0] == ev.in[1]);  // identity pullbacks copy the subset
        CHECK(is_event_section(skeleton_of(spec), ev));
    }
}

TEST_CASE("lim sigma under a 2:1 projection is pulled back from the base") {
    FiniteSpace X = indexed_space(2, "x");
    FiniteSpace Y = indexed_space(2, "y");
    auto built = projective_spec_chain(X, Y, make_dist(Y, {0.5, 0.5}));
    auto sections = enumerate_lim_sigma(built.spec);
    CHECK(sections.size() == 4);  // one per subset of the base
    auto skel = skeleton_of(built.spec);
    for (const auto& ev : sections) {
        // Upper subset is exactly the preimage of the lower one.
        auto down = skel.down_map(1, 0);
        for (int wa = 0; wa < 4; ++wa)
            CHECK(ev.in[1][static_cast<std::size_t>(wa)] ==
                  ev.in[0][static_cast<std::size_t>(down[static_cast<std::size_t>(wa)])]);
    }
}

TEST_CASE("lim sigma is closed under complement") {
    std::vector<ASpecification> specs;
    specs.push_back(testutil::identity_chain_spec(2, indexed_space(2)));
    specs.push_back(testutil::identity_diamond_spec(indexed_space(2)));
    specs.push_back(projective_spec_chain(indexed_space(2, "x"), indexed_space(2, "y"),
                                          make_dist(indexed_space(2, "y"), {0.5, 0.5}))
                        .spec);
    for (const auto& spec : specs) {
        auto sections = enumerate_lim_sigma(spec);
        CHECK(!sections.empty());
        for (const auto& ev : sections)
            CHECK(std::find(sections.begin(), sections.end(), ev.complement()) != sections.end());
    }
}

TEST_CASE("invariant observables of the identity two-chain have dimension two") {
    auto spec = testutil::identity_chain_spec(2, indexed_space(2));
    auto inv = invariant_observables(spec);
    CHECK(inv.dimension() == 2);
}

TEST_CASE("a one-point base leaves only constants") {
    auto rm = make_region_model({"x"}, {2}, {"empty", "rx"}, {{}, {0}});
    Dist joint = make_dist(rm.joint_space(), {0.3, 0.7});
    auto spec = conditional_spec_from_joint(joint, rm);
    auto inv = invariant_observables(spec);
    CHECK(inv.dimension() == 1);
}

TEST_CASE("event-section indicators lie in the invariant span") {
    auto spec = testutil::identity_diamond_spec(indexed_space(2));
    auto inv = invariant_observables(spec);
    auto sections = enumerate_lim_sigma(spec);
    CHECK(static_cast<std::size_t>(1) << inv.dimension() == sections.size());
    for (const auto& ev : sections) {
        Eigen::VectorXd indicator(inv.offsets.back());
        for (int a = 0; a < spec.poset().size(); ++a)
            for (int w = 0; w < spec.space_size(a); ++w)
                indicator(inv.offsets[static_cast<std::size_t>(a)] + w) =
                    ev.in[static_cast<std::size_t>(a)][static_cast<std::size_t>(w)] ? 1.0 : 0.0;
        Eigen::VectorXd residual = indicator - inv.basis * (inv.basis.transpose() * indicator);
        CHECK(residual.cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("invariant observables are expectation-invariant") {
    CHECK(lim_i_subset_lim_pi_check(testutil::identity_chain_spec(2, indexed_space(2))));
    CHECK(lim_i_subset_lim_pi_check(projective_spec_chain(indexed_space(2, "x"), indexed_space(3, "y"),
                                                          make_dist(indexed_space(3, "y"), {0.2, 0.3, 0.5}))
                                        .spec));
    std::mt19937 rng(41);
    auto rm = testutil::path_region_model(3);
    for (int trial = 0; trial < 20; ++trial) {
        auto spec = conditional_spec_from_joint(testutil::random_positive_joint(rng, rm), rm);
        CHECK(lim_i_subset_lim_pi_check(spec));
    }
}

TEST_CASE("support sections") {
    auto spec = testutil::identity_chain_spec(2, indexed_space(2));

    BeliefFamily positive{uniform_dist(indexed_space(2)), uniform_dist(indexed_space(2))};
    auto full = support_section(spec, positive);
    CHECK(full.in == std::vector<std::vector<bool>>{{true, true}, {true, true}});

    BeliefFamily vertex{point_mass(indexed_space(2), 0), point_mass(indexed_space(2), 0)};
    auto delta = support_section(spec, vertex);
    CHECK(delta.in == std::vector<std::vector<bool>>{{true, false}, {true, false}});
    CHECK(is_event_section(skeleton_of(spec), delta));

    FiniteSpace X = indexed_space(2, "x");
    FiniteSpace Y = indexed_space(2, "y");
    auto built = projective_spec_chain(X, Y, make_dist(Y, {0.25, 0.75}));
    auto report = solve_gibbs(built.spec);
    for (const auto& v : report.vertices) {
        auto sup = support_section(built.spec, v);
        int x = v[0][0] == 1.0 ? 0 : 1;
        for (int i = 0; i < 2; ++i) CHECK(sup.in[0][static_cast<std::size_t>(i)] == (i == x));
        for (int i = 0; i < 2; ++i)
            for (int y = 0; y < 2; ++y)
                CHECK(sup.in[1][static_cast<std::size_t>(i * 2 + y)] == (i == x));
    }

    // Zero mass on a fiber breaks strict positivity.
    auto degenerate = projective_spec_chain(X, Y, make_dist(Y, {1.0, 0.0}));
    CHECK_THROWS_AS(support_section(degenerate.spec, positive), PositivityRequiredError);
}

TEST_CASE("zero-one test on the identity two-chain") {
    auto spec = testutil::identity_chain_spec(2, indexed_space(2));

    BeliefFamily vertex{point_mass(indexed_space(2), 0), point_mass(indexed_space(2), 0)};
    auto verdict = zero_one_extremality_test(spec, vertex);
    CHECK(verdict.extreme);
    CHECK(!verdict.heuristic);

    BeliefFamily flat{uniform_dist(indexed_space(2)), uniform_dist(indexed_space(2))};
    auto split = zero_one_extremality_test(spec, flat);
    CHECK(!split.extreme);
    REQUIRE(split.witness.has_value());
    CHECK(split.weight == doctest::Approx(0.5));
    REQUIRE(split.component_a.has_value());
    // The two components are the point masses, in one order or the other.
    auto& ca = *split.component_a;
    auto& cb = *split.component_b;
    CHECK(((ca[0][0] == doctest::Approx(1.0) && cb[0][1] == doctest::Approx(1.0)) ||
           (ca[0][1] == doctest::Approx(1.0) && cb[0][0] == doctest::Approx(1.0))));
}

TEST_CASE("vertices are exactly the zero-one sections; midpoints fail with witnesses") {
    std::vector<ASpecification> specs;
    specs.push_back(testutil::identity_chain_spec(2, indexed_space(2)));
    specs.push_back(testutil::identity_chain_spec(2, indexed_space(3)));
    specs.push_back(testutil::identity_diamond_spec(indexed_space(2)));
    specs.push_back(projective_spec_chain(indexed_space(2, "x"), indexed_space(2, "y"),
                                          make_dist(indexed_space(2, "y"), {0.25, 0.75}))
                        .spec);
    {
        auto rm = make_region_model({"x", "y"}, {2, 2}, {"e", "r1", "r2", "r12"}, {{}, {0}, {1}, {0, 1}});
        Dist joint = make_dist(rm.joint_space(), {0.4, 0.1, 0.2, 0.3});
        specs.push_back(conditional_spec_from_joint(joint, rm));
    }
    for (const auto& spec : specs) {
        REQUIRE(strict_positivity(spec));
        int total = 0;
        for (int a = 0; a < spec.poset().size(); ++a) total += spec.space_size(a);
        REQUIRE(total <= 10);

        auto report = solve_gibbs(spec);
        REQUIRE(report.feasible);
        for (const auto& vertex : report.vertices)
            CHECK(zero_one_extremality_test(spec, vertex).extreme);
        auto sections = enumerate_lim_sigma(spec);
        for (std::size_t i = 0; i < report.vertices.size(); ++i)
            for (std::size_t j = i + 1; j < report.vertices.size(); ++j)
                for (double lambda : {0.25, 0.5, 0.75}) {
                    auto blend = mix(report.vertices[i], report.vertices[j], lambda);
                    auto verdict = zero_one_extremality_test(spec, blend);
                    CHECK(!verdict.extreme);
                    REQUIRE(verdict.witness.has_value());
                    CHECK(std::find(sections.begin(), sections.end(), *verdict.witness) != sections.end());
                    // The witness decomposition reassembles the section.
                    for (std::size_t a = 0; a < blend.size(); ++a)
                        for (std::size_t w = 0; w < blend[a].p.size(); ++w) {
                            double rebuilt = verdict.weight * (*verdict.component_a)[a].p[w] +
                                             (1 - verdict.weight) * (*verdict.component_b)[a].p[w];
                            CHECK(rebuilt == doctest::Approx(blend[a].p[w]).epsilon(1e-9));
                        }
                }
    }
}

TEST_CASE("sections are determined by their invariant restrictions") {
    std::vector<ASpecification> specs;
    specs.push_back(testutil::identity_chain_spec(2, indexed_space(2)));
    specs.push_back(testutil::identity_diamond_spec(indexed_space(2)));
    specs.push_back(projective_spec_chain(indexed_space(3, "x"), indexed_space(2, "y"),
                                          make_dist(indexed_space(2, "y"), {0.5, 0.5}))
                        .spec);
    for (const auto& spec : specs) {
        auto report = solve_gibbs(spec);
        REQUIRE(report.feasible);
        if (report.vertices.size() < 2) continue;
        auto inv = invariant_observables(spec);
        // Pairing matrix restricted to one representative element per
        // component; injectivity on the polytope's tangent space is the
        // finite determinacy statement.
        auto components = spec.poset().connected_components();
        Eigen::MatrixXd pairing(inv.dimension() * static_cast<int>(components.size()), inv.offsets.back());
        pairing.setZero();
        int row = 0;
        for (const auto& component : components) {
            int rep = component.front();
            for (int k = 0; k < inv.dimension(); ++k, ++row)
                for (int w = 0; w < spec.space_size(rep); ++w)
                    pairing(row, inv.offsets[static_cast<std::size_t>(rep)] + w) =
                        inv.basis(inv.offsets[static_cast<std::size_t>(rep)] + w, k);
        }
        Eigen::MatrixXd tangent(inv.offsets.back(), static_cast<int>(report.vertices.size()) - 1);
        auto flatten = [&](const BeliefFamily& family) {
            Eigen::VectorXd x(inv.offsets.back());
            for (std::size_t a = 0; a < family.size(); ++a)
                for (std::size_t w = 0; w < family[a].p.size(); ++w)
                    x(inv.offsets[a] + static_cast<int>(w)) = family[a].p[w];
            return x;
        };
        for (std::size_t v = 1; v < report.vertices.size(); ++v)
            tangent.col(static_cast<int>(v) - 1) = flatten(report.vertices[v]) - flatten(report.vertices[0]);
        Eigen::MatrixXd restricted = pairing * tangent;
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(restricted);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd_tangent(tangent);
        CHECK(svd.rank() == svd_tangent.rank());
        CHECK(svd.singularValues().tail(1)(0) > 1e-8);
    }
}

TEST_CASE("event masses are constant along one-component posets") {
    auto spec = testutil::identity_diamond_spec(indexed_space(2));
    auto report = solve_gibbs(spec);
    REQUIRE(report.vertices.size() == 2);
    auto sections = enumerate_lim_sigma(spec);
    std::vector<BeliefFamily> candidates = report.vertices;
    candidates.push_back(mix(report.vertices[0], report.vertices[1], 0.3));
    for (const auto& family : candidates)
        for (const auto& ev : sections) {
            double first = event_mass(family[0], ev.in[0]);
            for (std::size_t a = 1; a < family.size(); ++a)
                CHECK(event_mass(family[a], ev.in[a]) == doctest::Approx(first).epsilon(1e-12));
        }
}
