#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace csm {

/// A finite partially ordered set. The relation is stored as a dense
/// boolean matrix (reflexive-transitive closure of the input covers);
/// element order is the declaration order and is the iteration order
/// everywhere, so downstream computations are deterministic.
class FinitePoset {
public:
    /// Builds the poset generated by `pairs` (each pair (x, y) meaning
    /// x < y). Throws CycleError if the closure violates antisymmetry,
    /// DuplicateElementError / UnknownElementError on bad input.
    static FinitePoset from_pairs(std::vector<std::string> elements,
                                  const std::vector<std::pair<std::string, std::string>>& pairs);

    int size() const { return static_cast<int>(names_.size()); }
    const std::vector<std::string>& elements() const { return names_; }
    const std::string& name(int i) const { return names_[static_cast<std::size_t>(i)]; }
    int index_of(const std::string& name) const;  // -1 when absent

    /// b <= a in the order.
    bool leq(int b, int a) const { return leq_[static_cast<std::size_t>(b) * names_.size() + static_cast<std::size_t>(a)] != 0; }
    bool less(int b, int a) const { return b != a && leq(b, a); }

    /// Elements of the interval {c : b <= c <= a}.
    std::vector<int> interval(int b, int a) const;
    std::vector<int> down_set(int a) const;  // {b : b <= a}, includes a
    std::vector<int> up_set(int a) const;    // {b : b >= a}, includes a

    /// Strictly comparable pairs (lower, upper), lower < upper in the order.
    std::vector<std::pair<int, int>> comparable_pairs() const;
    /// Covering pairs (lower, upper): lower < upper with nothing in between.
    std::vector<std::pair<int, int>> cover_pairs() const;

    /// A linear extension: indices ordered so that smaller-in-order comes
    /// first; ties broken by declaration index (stable, deterministic).
    std::vector<int> linear_extension() const;

    /// Connected components of the comparability graph (the transitive
    /// closure of "a <= b or b <= a"). Component lists are sorted.
    std::vector<std::vector<int>> connected_components() const;

    /// One minimum per component when every component has one; nullopt as
    /// soon as any component lacks a minimum.
    std::optional<std::vector<int>> minimum_elements() const;

private:
    std::vector<std::string> names_;
    std::vector<std::uint8_t> leq_;  // row b, column a: b <= a
};

/// Moebius coefficients mu(a, b) for b <= a, zero elsewhere. Exact
/// integers: the zeta matrix is unitriangular under a linear extension.
class MobiusTable {
public:
    explicit MobiusTable(const FinitePoset& poset);
    long long mu(int a, int b) const { return mu_[static_cast<std::size_t>(a) * n_ + static_cast<std::size_t>(b)]; }
    int size() const { return static_cast<int>(n_); }

private:
    std::size_t n_;
    std::vector<long long> mu_;
};

/// result(a) = sum_{b <= a} lambda(b).
std::vector<double> zeta_transform(const FinitePoset& poset, std::span<const double> lambda);
std::vector<long long> zeta_transform(const FinitePoset& poset, std::span<const long long> lambda);

/// result(a) = sum_{b <= a} mu(a, b) lambda(b); inverse of the zeta transform.
std::vector<double> mobius_transform(const FinitePoset& poset, const MobiusTable& table,
                                     std::span<const double> lambda);
std::vector<long long> mobius_transform(const FinitePoset& poset, const MobiusTable& table,
                                        std::span<const long long> lambda);

/// Inclusion-exclusion weights c(a) = sum_{b >= a} mu(b, a). On the
/// vertex-edge poset of a graph this gives c(edge) = 1 and
/// c(vertex) = 1 - degree(vertex).
std::vector<long long> counting_coefficients(const FinitePoset& poset, const MobiusTable& table);

}  // namespace csm
