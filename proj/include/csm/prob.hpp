#pragma once

#include <span>
#include <string>
#include <vector>

namespace csm {

/// A finite outcome set with labeled outcomes in a fixed order.
struct FiniteSpace {
    std::vector<std::string> outcomes;

    int size() const { return static_cast<int>(outcomes.size()); }
    bool operator==(const FiniteSpace& other) const { return outcomes == other.outcomes; }
};

FiniteSpace make_space(std::vector<std::string> outcomes);
/// Outcomes "0", "1", ..., labeled by index.
FiniteSpace indexed_space(int n, const std::string& prefix = "");
/// Product space; outcome label is the comma-join, last factor fastest.
FiniteSpace product_space(const std::vector<FiniteSpace>& factors);

/// A probability vector over a finite space.
struct Dist {
    FiniteSpace space;
    std::vector<double> p;

    double operator[](int i) const { return p[static_cast<std::size_t>(i)]; }
};

/// Validates nonnegativity and that the mass is 1 within 1e-12.
Dist make_dist(FiniteSpace space, std::vector<double> p);
/// Divides by the total mass (the one explicit renormalization entry point).
Dist normalized_dist(FiniteSpace space, std::vector<double> p);
Dist point_mass(const FiniteSpace& space, int outcome);
Dist uniform_dist(const FiniteSpace& space);

/// A row-stochastic matrix: rows indexed by source outcomes, columns by
/// target outcomes. Row sums are checked to 1e-9 at construction.
struct Kernel {
    FiniteSpace source;
    FiniteSpace target;
    std::vector<double> k;  // row-major, source.size() x target.size()

    double at(int row, int col) const {
        return k[static_cast<std::size_t>(row) * static_cast<std::size_t>(target.size()) +
                 static_cast<std::size_t>(col)];
    }
};

Kernel make_kernel(FiniteSpace source, FiniteSpace target, std::vector<double> entries);
Kernel identity_kernel(const FiniteSpace& space);

/// Composition (k then k1): the matrix product; requires k.target == k1.source.
Kernel compose_kernels(const Kernel& k, const Kernel& k1);

/// The deterministic 0/1 kernel of a map given as an outcome-index array.
Kernel kernel_from_map(const FiniteSpace& source, const FiniteSpace& target,
                       std::span<const int> map);

/// d^T k, a distribution on k.target.
Dist pushforward(const Kernel& k, const Dist& d);
/// Pushforward along a plain map (fiber sums).
Dist pushforward_map(std::span<const int> map, const FiniteSpace& target, const Dist& d);
std::vector<double> pushforward_map(std::span<const int> map, int target_size,
                                    std::span<const double> v);

/// True iff every row of k puts all its mass inside the partition block
/// identified with the row's source outcome. `blocks` lists target-outcome
/// indices per source outcome and must partition the target.
bool proper_kernel_check(const Kernel& k, const std::vector<std::vector<int>>& blocks);

/// Shannon entropy in nats, with 0 ln 0 = 0.
double entropy(const Dist& d);
double entropy(std::span<const double> p);

/// Energy per outcome together with a shared inverse temperature.
struct Hamiltonian {
    FiniteSpace space;
    std::vector<double> h;
    double beta = 1.0;
};

/// p(w) = exp(-beta H(w)) / Z, evaluated with a max-shift.
Dist boltzmann(const Hamiltonian& h);
/// -ln sum_w exp(-beta H(w)).
double log_partition(const Hamiltonian& h);
/// E_d[beta H] - S(d); equals log_partition exactly at the Boltzmann point.
double gibbs_free_energy(const Dist& d, const Hamiltonian& h);

/// A family of distributions indexed by poset elements; used both for
/// Gibbs sections and for message-passing beliefs.
using BeliefFamily = std::vector<Dist>;

}  // namespace csm
