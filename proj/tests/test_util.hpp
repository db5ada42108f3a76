#pragma once

// Shared fixtures: random posets, identity specifications, Ising models.

#include <random>
#include <string>
#include <vector>

#include "csm/oracle.hpp"
#include "csm/spec_model.hpp"

namespace csm::testutil {

inline FinitePoset random_poset(std::mt19937& rng, int max_elems = 12) {
    std::uniform_int_distribution<int> size_dist(1, max_elems);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    const int n = size_dist(rng);
    std::vector<std::string> names;
    for (int i = 0; i < n; ++i) names.push_back("p" + std::to_string(i));
    std::vector<std::pair<std::string, std::string>> pairs;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (coin(rng) < 0.25) pairs.emplace_back(names[static_cast<std::size_t>(i)], names[static_cast<std::size_t>(j)]);
    return FinitePoset::from_pairs(names, pairs);
}

inline ASpecification identity_chain_spec(int length, const FiniteSpace& space) {
    std::vector<std::string> names;
    std::vector<std::pair<std::string, std::string>> covers;
    for (int i = 0; i < length; ++i) names.push_back("a" + std::to_string(i));
    for (int i = 0; i + 1 < length; ++i) covers.emplace_back(names[static_cast<std::size_t>(i)], names[static_cast<std::size_t>(i + 1)]);
    ASpecification spec(FinitePoset::from_pairs(names, covers),
                        std::vector<FiniteSpace>(static_cast<std::size_t>(length), space));
    std::vector<int> id(static_cast<std::size_t>(space.size()));
    for (std::size_t i = 0; i < id.size(); ++i) id[i] = static_cast<int>(i);
    std::vector<Rational> exact(static_cast<std::size_t>(space.size()) * static_cast<std::size_t>(space.size()),
                                Rational(0));
    for (int i = 0; i < space.size(); ++i)
        exact[static_cast<std::size_t>(i) * space.size() + static_cast<std::size_t>(i)] = 1;
    for (int i = 0; i + 1 < length; ++i) {
        spec.set_down_map(i + 1, i, id);
        spec.set_up_kernel(i, i + 1, identity_kernel(space));
        spec.set_up_kernel_exact(i, i + 1, exact);
    }
    spec.fill_composite_legs();
    return spec;
}

inline ASpecification identity_diamond_spec(const FiniteSpace& space) {
    FinitePoset poset = FinitePoset::from_pairs({"bot", "x", "y", "top"},
                                                {{"bot", "x"}, {"bot", "y"}, {"x", "top"}, {"y", "top"}});
    ASpecification spec(poset, std::vector<FiniteSpace>(4, space));
    std::vector<int> id(static_cast<std::size_t>(space.size()));
    for (std::size_t i = 0; i < id.size(); ++i) id[i] = static_cast<int>(i);
    std::vector<Rational> exact(static_cast<std::size_t>(space.size()) * static_cast<std::size_t>(space.size()),
                                Rational(0));
    for (int i = 0; i < space.size(); ++i)
        exact[static_cast<std::size_t>(i) * space.size() + static_cast<std::size_t>(i)] = 1;
    for (auto [lo, hi] : {std::pair{0, 1}, {0, 2}, {1, 3}, {2, 3}}) {
        spec.set_down_map(hi, lo, id);
        spec.set_up_kernel(lo, hi, identity_kernel(space));
        spec.set_up_kernel_exact(lo, hi, exact);
    }
    spec.fill_composite_legs();
    return spec;
}

// Vertex-edge region model of a path graph v0 - v1 - ... - v(n-1).
inline RegionModel path_region_model(int vertices, int states = 2) {
    std::vector<std::string> var_names;
    std::vector<int> var_sizes(static_cast<std::size_t>(vertices), states);
    for (int i = 0; i < vertices; ++i) var_names.push_back("s" + std::to_string(i));
    std::vector<std::string> region_names;
    std::vector<std::vector<int>> region_vars;
    for (int i = 0; i < vertices; ++i) {
        region_names.push_back("v" + std::to_string(i));
        region_vars.push_back({i});
    }
    for (int i = 0; i + 1 < vertices; ++i) {
        region_names.push_back("e" + std::to_string(i) + std::to_string(i + 1));
        region_vars.push_back({i, i + 1});
    }
    return make_region_model(var_names, var_sizes, region_names, region_vars);
}

// Star graph: center s0 with the given number of leaves.
inline RegionModel star_region_model(int leaves, int states = 2) {
    std::vector<std::string> var_names{"s0"};
    std::vector<int> var_sizes{states};
    std::vector<std::string> region_names{"v0"};
    std::vector<std::vector<int>> region_vars{{0}};
    for (int i = 1; i <= leaves; ++i) {
        var_names.push_back("s" + std::to_string(i));
        var_sizes.push_back(states);
        region_names.push_back("v" + std::to_string(i));
        region_vars.push_back({i});
    }
    for (int i = 1; i <= leaves; ++i) {
        region_names.push_back("e0" + std::to_string(i));
        region_vars.push_back({0, i});
    }
    return make_region_model(var_names, var_sizes, region_names, region_vars);
}

// Four spins on a cycle (the 2 x 2 grid with wrap edges collapsed).
inline RegionModel cycle4_region_model() {
    std::vector<std::string> var_names{"s0", "s1", "s2", "s3"};
    std::vector<int> var_sizes(4, 2);
    std::vector<std::string> region_names{"v0", "v1", "v2", "v3", "e01", "e12", "e23", "e30"};
    std::vector<std::vector<int>> region_vars{{0}, {1}, {2}, {3}, {0, 1}, {1, 2}, {2, 3}, {0, 3}};
    return make_region_model(var_names, var_sizes, region_names, region_vars);
}

// Ising energies on a vertex-edge region model: every 2-variable region
// gets -J s s', every 1-variable region gets -field s, spins +-1 with
// outcome 0 meaning s = -1.
inline JointModel ising_model(RegionModel regions, double coupling, double field, double beta) {
    std::vector<std::vector<double>> terms;
    for (std::size_t r = 0; r < regions.region_vars.size(); ++r) {
        if (regions.region_vars[r].size() == 1) {
            terms.push_back({field, -field});
        } else {
            terms.push_back({-coupling, coupling, coupling, -coupling});
        }
    }
    return make_joint_model(std::move(regions), std::move(terms), beta);
}

inline Dist random_positive_joint(std::mt19937& rng, const RegionModel& rm) {
    std::uniform_real_distribution<double> mass(0.1, 1.0);
    long long total = 1;
    for (int s : rm.var_sizes) total *= s;
    std::vector<double> p(static_cast<std::size_t>(total));
    for (double& x : p) x = mass(rng);
    return normalized_dist(rm.joint_space(), std::move(p));
}

inline BeliefFamily random_positive_family(std::mt19937& rng, const std::vector<FiniteSpace>& spaces) {
    std::uniform_real_distribution<double> mass(0.1, 1.0);
    BeliefFamily q;
    for (const auto& s : spaces) {
        std::vector<double> p(static_cast<std::size_t>(s.size()));
        for (double& x : p) x = mass(rng);
        q.push_back(normalized_dist(s, std::move(p)));
    }
    return q;
}

}  // namespace csm::testutil
