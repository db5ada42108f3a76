#include "csm/poset.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "csm/errors.hpp"

namespace csm {

FinitePoset FinitePoset::from_pairs(std::vector<std::string> elements,
                                    const std::vector<std::pair<std::string, std::string>>& pairs) {
    FinitePoset p;
    std::map<std::string, int> index;
    for (std::size_t i = 0; i < elements.size(); ++i) {
        if (!index.emplace(elements[i], static_cast<int>(i)).second)
            throw DuplicateElementError("duplicate poset element: " + elements[i]);
    }
    p.names_ = std::move(elements);
    const std::size_t n = p.names_.size();
    p.leq_.assign(n * n, 0);
    for (std::size_t i = 0; i < n; ++i) p.leq_[i * n + i] = 1;
    for (const auto& [lo, hi] : pairs) {
        auto it_lo = index.find(lo);
        auto it_hi = index.find(hi);
        if (it_lo == index.end()) throw UnknownElementError("unknown poset element: " + lo);
        if (it_hi == index.end()) throw UnknownElementError("unknown poset element: " + hi);
        p.leq_[static_cast<std::size_t>(it_lo->second) * n + static_cast<std::size_t>(it_hi->second)] = 1;
    }
    // Warshall closure.
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            if (p.leq_[i * n + k])
                for (std::size_t j = 0; j < n; ++j)
                    if (p.leq_[k * n + j]) p.leq_[i * n + j] = 1;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (p.leq_[i * n + j] && p.leq_[j * n + i])
                throw CycleError("antisymmetry violated between '" + p.names_[i] + "' and '" +
                                 p.names_[j] + "'");
    return p;
}

int FinitePoset::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == name) return static_cast<int>(i);
    return -1;
}

std::vector<int> FinitePoset::interval(int b, int a) const {
    std::vector<int> out;
    for (int c = 0; c < size(); ++c)
        if (leq(b, c) && leq(c, a)) out.push_back(c);
    return out;
}

std::vector<int> FinitePoset::down_set(int a) const {
    std::vector<int> out;
    for (int b = 0; b < size(); ++b)
        if (leq(b, a)) out.push_back(b);
    return out;
}

std::vector<int> FinitePoset::up_set(int a) const {
    std::vector<int> out;
    for (int b = 0; b < size(); ++b)
        if (leq(a, b)) out.push_back(b);
    return out;
}

std::vector<std::pair<int, int>> FinitePoset::comparable_pairs() const {
    std::vector<std::pair<int, int>> out;
    for (int a = 0; a < size(); ++a)
        for (int b = 0; b < size(); ++b)
            if (b != a && leq(b, a)) out.emplace_back(b, a);
    return out;
}

std::vector<std::pair<int, int>> FinitePoset::cover_pairs() const {
    std::vector<std::pair<int, int>> out;
    for (auto [b, a] : comparable_pairs()) {
        bool cover = true;
        for (int c = 0; c < size() && cover; ++c)
            if (c != a && c != b && leq(b, c) && leq(c, a)) cover = false;
        if (cover) out.emplace_back(b, a);
    }
    return out;
}

std::vector<int> FinitePoset::linear_extension() const {
    std::vector<int> order(static_cast<std::size_t>(size()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [this](int x, int y) { return down_set(x).size() < down_set(y).size(); });
    return order;
}

std::vector<std::vector<int>> FinitePoset::connected_components() const {
    const int n = size();
    std::vector<int> comp(static_cast<std::size_t>(n), -1);
    int count = 0;
    for (int s = 0; s < n; ++s) {
        if (comp[static_cast<std::size_t>(s)] >= 0) continue;
        std::vector<int> stack{s};
        comp[static_cast<std::size_t>(s)] = count;
        while (!stack.empty()) {
            int x = stack.back();
            stack.pop_back();
            for (int y = 0; y < n; ++y) {
                if (comp[static_cast<std::size_t>(y)] < 0 && (leq(x, y) || leq(y, x))) {
                    comp[static_cast<std::size_t>(y)] = count;
                    stack.push_back(y);
                }
            }
        }
        ++count;
    }
    std::vector<std::vector<int>> out(static_cast<std::size_t>(count));
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(comp[static_cast<std::size_t>(i)])].push_back(i);
    return out;
}

std::optional<std::vector<int>> FinitePoset::minimum_elements() const {
    std::vector<int> mins;
    for (const auto& component : connected_components()) {
        int minimum = -1;
        for (int candidate : component) {
            bool below_all = true;
            for (int other : component)
                if (!leq(candidate, other)) {
                    below_all = false;
                    break;
                }
            if (below_all) {
                minimum = candidate;
                break;
            }
        }
        if (minimum < 0) return std::nullopt;
        mins.push_back(minimum);
    }
    return mins;
}

MobiusTable::MobiusTable(const FinitePoset& poset) {
    n_ = static_cast<std::size_t>(poset.size());
    mu_.assign(n_ * n_, 0);
    // mu(a, a) = 1, mu(a, b) = -sum_{c : b < c <= a} mu(a, c).
    for (int a = 0; a < poset.size(); ++a) {
        mu_[static_cast<std::size_t>(a) * n_ + static_cast<std::size_t>(a)] = 1;
        // Fill b below a, farthest-from-a last: process b in an order where
        // all c with b < c <= a are already done. A reverse linear extension
        // restricted to the down-set of a works.
        auto order = poset.linear_extension();
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            int b = *it;
            if (b == a || !poset.leq(b, a)) continue;
            long long s = 0;
            for (int c : poset.interval(b, a))
                if (c != b) s += mu_[static_cast<std::size_t>(a) * n_ + static_cast<std::size_t>(c)];
            mu_[static_cast<std::size_t>(a) * n_ + static_cast<std::size_t>(b)] = -s;
        }
    }
}

namespace {

template <typename T>
std::vector<T> zeta_impl(const FinitePoset& poset, std::span<const T> lambda) {
    if (lambda.size() != static_cast<std::size_t>(poset.size()))
        throw DimensionMismatchError("zeta_transform: vector size does not match poset");
    std::vector<T> out(lambda.size(), T(0));
    for (int a = 0; a < poset.size(); ++a)
        for (int b : poset.down_set(a)) out[static_cast<std::size_t>(a)] += lambda[static_cast<std::size_t>(b)];
    return out;
}

template <typename T>
std::vector<T> mobius_impl(const FinitePoset& poset, const MobiusTable& table,
                           std::span<const T> lambda) {
    if (lambda.size() != static_cast<std::size_t>(poset.size()))
        throw DimensionMismatchError("mobius_transform: vector size does not match poset");
    std::vector<T> out(lambda.size(), T(0));
    for (int a = 0; a < poset.size(); ++a)
        for (int b : poset.down_set(a))
            out[static_cast<std::size_t>(a)] += static_cast<T>(table.mu(a, b)) * lambda[static_cast<std::size_t>(b)];
    return out;
}

}  // namespace

std::vector<double> zeta_transform(const FinitePoset& poset, std::span<const double> lambda) {
    return zeta_impl(poset, lambda);
}
std::vector<long long> zeta_transform(const FinitePoset& poset, std::span<const long long> lambda) {
    return zeta_impl(poset, lambda);
}
std::vector<double> mobius_transform(const FinitePoset& poset, const MobiusTable& table,
                                     std::span<const double> lambda) {
    return mobius_impl(poset, table, lambda);
}
std::vector<long long> mobius_transform(const FinitePoset& poset, const MobiusTable& table,
                                        std::span<const long long> lambda) {
    return mobius_impl(poset, table, lambda);
}

std::vector<long long> counting_coefficients(const FinitePoset& poset, const MobiusTable& table) {
    std::vector<long long> c(static_cast<std::size_t>(poset.size()), 0);
    for (int a = 0; a < poset.size(); ++a)
        for (int b : poset.up_set(a)) c[static_cast<std::size_t>(a)] += table.mu(b, a);
    return c;
}

}  // namespace csm
