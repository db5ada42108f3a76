#include <doctest.h>

#include <cmath>
#include <random>

#include "csm/errors.hpp"
#include "csm/prob.hpp"

using namespace csm;

namespace {

Kernel random_kernel(std::mt19937& rng, const FiniteSpace& src, const FiniteSpace& tgt) {
    std::uniform_real_distribution<double> mass(0.05, 1.0);
    std::vector<double> entries(static_cast<std::size_t>(src.size()) * static_cast<std::size_t>(tgt.size()));
    for (int r = 0; r < src.size(); ++r) {
        double total = 0;
        for (int c = 0; c < tgt.size(); ++c) {
            entries[static_cast<std::size_t>(r) * tgt.size() + static_cast<std::size_t>(c)] = mass(rng);
            total += entries[static_cast<std::size_t>(r) * tgt.size() + static_cast<std::size_t>(c)];
        }
        for (int c = 0; c < tgt.size(); ++c)
            entries[static_cast<std::size_t>(r) * tgt.size() + static_cast<std::size_t>(c)] /= total;
    }
    return make_kernel(src, tgt, std::move(entries));
}

Dist random_dist(std::mt19937& rng, const FiniteSpace& space) {
    std::uniform_real_distribution<double> mass(0.05, 1.0);
    std::vector<double> p(static_cast<std::size_t>(space.size()));
    for (double& x : p) x = mass(rng);
    return normalized_dist(space, std::move(p));
}

}  // namespace

TEST_CASE("kernel composition") {
    FiniteSpace two = indexed_space(2);
    Kernel id = identity_kernel(two);
    Kernel spread = make_kernel(two, two, {0.5, 0.5, 0.5, 0.5});
    Kernel composed = compose_kernels(spread, id);
    for (std::size_t i = 0; i < composed.k.size(); ++i) CHECK(composed.k[i] == doctest::Approx(spread.k[i]));

    Kernel k = make_kernel(two, two, {1, 0, 0.5, 0.5});
    Kernel swap = make_kernel(two, two, {0, 1, 1, 0});
    Kernel prod = compose_kernels(k, swap);
    CHECK(prod.at(0, 0) == doctest::Approx(0.0));
    CHECK(prod.at(0, 1) == doctest::Approx(1.0));
    CHECK(prod.at(1, 0) == doctest::Approx(0.5));
    CHECK(prod.at(1, 1) == doctest::Approx(0.5));

    FiniteSpace three = indexed_space(3);
    CHECK_THROWS_AS(compose_kernels(k, identity_kernel(three)), SpaceMismatchError);
}

TEST_CASE("kernel_from_map") {
    FiniteSpace two = indexed_space(2);
    std::vector<int> id{0, 1};
    Kernel kid = kernel_from_map(two, two, id);
    CHECK(kid.at(0, 0) == 1.0);
    CHECK(kid.at(1, 1) == 1.0);

    std::vector<int> constant{0, 0};
    Kernel kc = kernel_from_map(two, two, constant);
    CHECK(kc.at(0, 0) == 1.0);
    CHECK(kc.at(1, 0) == 1.0);

    FiniteSpace four = indexed_space(4);
    std::vector<int> first_coord{0, 0, 1, 1};
    Kernel kp = kernel_from_map(four, two, first_coord);
    CHECK(kp.at(0, 0) == 1.0);
    CHECK(kp.at(1, 0) == 1.0);
    CHECK(kp.at(2, 1) == 1.0);
    CHECK(kp.at(3, 1) == 1.0);
}

TEST_CASE("pushforward") {
    FiniteSpace two = indexed_space(2);
    Dist d = make_dist(two, {0.25, 0.75});
    CHECK(pushforward(identity_kernel(two), d).p == d.p);

    FiniteSpace four = indexed_space(4);
    std::vector<int> first_coord{0, 0, 1, 1};
    Dist u4 = uniform_dist(four);
    Dist proj = pushforward_map(first_coord, two, u4);
    CHECK(proj[0] == doctest::Approx(0.5));
    CHECK(proj[1] == doctest::Approx(0.5));

    Kernel k = make_kernel(two, two, {1, 0, 0.5, 0.5});
    Dist out = pushforward(k, d);
    CHECK(out[0] == doctest::Approx(0.625));
    CHECK(out[1] == doctest::Approx(0.375));
}

TEST_CASE("proper_kernel_check") {
    FiniteSpace two = indexed_space(2);
    CHECK(proper_kernel_check(identity_kernel(two), {{0}, {1}}));
    Kernel spread = make_kernel(two, two, {0.5, 0.5, 0.5, 0.5});
    CHECK(!proper_kernel_check(spread, {{0}, {1}}));
    CHECK_THROWS_AS(proper_kernel_check(spread, {{0}, {0}}), PartitionMismatchError);
}

TEST_CASE("entropy") {
    FiniteSpace two = indexed_space(2);
    CHECK(entropy(point_mass(two, 0)) == doctest::Approx(0.0));
    FiniteSpace four = indexed_space(4);
    CHECK(entropy(uniform_dist(four)) == doctest::Approx(std::log(4.0)));
    Dist skew = make_dist(two, {2.0 / 3.0, 1.0 / 3.0});
    CHECK(entropy(skew) == doctest::Approx(0.636514).epsilon(1e-5));
}

TEST_CASE("boltzmann") {
    FiniteSpace two = indexed_space(2);
    Dist flat = boltzmann({two, {0.0, 0.0}, 1.0});
    CHECK(flat[0] == doctest::Approx(0.5));

    Dist skew = boltzmann({two, {0.0, std::log(2.0)}, 1.0});
    CHECK(skew[0] == doctest::Approx(2.0 / 3.0));
    CHECK(skew[1] == doctest::Approx(1.0 / 3.0));

    Dist zero_beta = boltzmann({two, {3.0, -8.0}, 0.0});
    CHECK(zero_beta[0] == doctest::Approx(0.5));

    // Max-shift keeps extreme temperatures finite.
    Dist hot = boltzmann({two, {0.0, 500.0}, 20.0});
    CHECK(hot[0] == doctest::Approx(1.0));
}

TEST_CASE("gibbs free energy and log partition") {
    FiniteSpace two = indexed_space(2);
    Hamiltonian flat{two, {0.0, 0.0}, 1.0};
    CHECK(gibbs_free_energy(make_dist(two, {0.5, 0.5}), flat) == doctest::Approx(-std::log(2.0)));
    CHECK(log_partition(flat) == doctest::Approx(-std::log(2.0)));
    CHECK(gibbs_free_energy(point_mass(two, 0), flat) == doctest::Approx(0.0));

    Hamiltonian skew{two, {0.0, std::log(2.0)}, 1.0};
    CHECK(log_partition(skew) == doctest::Approx(-std::log(1.5)));
    CHECK(gibbs_free_energy(boltzmann(skew), skew) == doctest::Approx(log_partition(skew)).epsilon(1e-10));
}

TEST_CASE("composition is associative and functorial on random kernels") {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        FiniteSpace s0 = indexed_space(2 + trial % 3);
        FiniteSpace s1 = indexed_space(2 + (trial / 3) % 3);
        FiniteSpace s2 = indexed_space(2 + (trial / 9) % 3);
        FiniteSpace s3 = indexed_space(2);
        Kernel k0 = random_kernel(rng, s0, s1);
        Kernel k1 = random_kernel(rng, s1, s2);
        Kernel k2 = random_kernel(rng, s2, s3);
        Kernel left = compose_kernels(compose_kernels(k0, k1), k2);
        Kernel right = compose_kernels(k0, compose_kernels(k1, k2));
        for (std::size_t i = 0; i < left.k.size(); ++i)
            CHECK(left.k[i] == doctest::Approx(right.k[i]).epsilon(1e-12));

        Dist d = random_dist(rng, s0);
        Dist via_composite = pushforward(compose_kernels(k0, k1), d);
        Dist via_steps = pushforward(k1, pushforward(k0, d));
        for (std::size_t i = 0; i < via_composite.p.size(); ++i)
            CHECK(via_composite.p[i] == doctest::Approx(via_steps.p[i]).epsilon(1e-12));
    }
}

TEST_CASE("free energy dominates the log partition with equality only at the Boltzmann point") {
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> energy(-2.0, 2.0);
    std::uniform_int_distribution<int> size(2, 8);
    for (int trial = 0; trial < 100; ++trial) {
        FiniteSpace space = indexed_space(size(rng));
        Hamiltonian h{space, {}, 1.0};
        h.h.resize(static_cast<std::size_t>(space.size()));
        for (double& e : h.h) e = energy(rng);
        const double bound = log_partition(h);
        Dist optimal = boltzmann(h);
        CHECK(gibbs_free_energy(optimal, h) == doctest::Approx(bound).epsilon(1e-9));
        for (int rep = 0; rep < 100; ++rep) {
            Dist q = random_dist(rng, space);
            double fe = gibbs_free_energy(q, h);
            CHECK(fe >= bound - 1e-12);
            double gap = 0;
            for (int i = 0; i < space.size(); ++i) gap = std::max(gap, std::abs(q[i] - optimal[i]));
            if (fe <= bound + 1e-9) CHECK(gap < 1e-3);
        }
    }
}

TEST_CASE("entropy is concave") {
    std::mt19937 rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        FiniteSpace space = indexed_space(2 + trial % 5);
        Dist p = random_dist(rng, space);
        Dist q = random_dist(rng, space);
        for (double lambda : {0.25, 0.5, 0.75}) {
            std::vector<double> mix(p.p.size());
            for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = lambda * p.p[i] + (1 - lambda) * q.p[i];
            CHECK(entropy(std::span<const double>(mix)) >= lambda * entropy(p) + (1 - lambda) * entropy(q) - 1e-12);
        }
    }
}
