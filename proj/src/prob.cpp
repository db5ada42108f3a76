#include "csm/prob.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "csm/errors.hpp"

namespace csm {

FiniteSpace make_space(std::vector<std::string> outcomes) {
    if (outcomes.empty()) throw DimensionMismatchError("a finite space needs at least one outcome");
    std::set<std::string> seen;
    for (const auto& o : outcomes)
        if (!seen.insert(o).second) throw DuplicateElementError("duplicate outcome label: " + o);
    return FiniteSpace{std::move(outcomes)};
}

FiniteSpace indexed_space(int n, const std::string& prefix) {
    std::vector<std::string> labels;
    labels.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) labels.push_back(prefix + std::to_string(i));
    return make_space(std::move(labels));
}

FiniteSpace product_space(const std::vector<FiniteSpace>& factors) {
    std::vector<std::string> labels{""};
    for (const auto& f : factors) {
        std::vector<std::string> next;
        next.reserve(labels.size() * f.outcomes.size());
        for (const auto& head : labels)
            for (const auto& o : f.outcomes)
                next.push_back(head.empty() ? o : head + "," + o);
        labels = std::move(next);
    }
    return make_space(std::move(labels));
}

Dist make_dist(FiniteSpace space, std::vector<double> p) {
    if (static_cast<int>(p.size()) != space.size())
        throw DimensionMismatchError("distribution size does not match space");
    double total = 0;
    for (double x : p) {
        if (x < 0 || !std::isfinite(x)) throw DimensionMismatchError("distribution entries must be finite and >= 0");
        total += x;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw DimensionMismatchError("distribution mass is " + std::to_string(total) + ", not 1");
    return Dist{std::move(space), std::move(p)};
}

Dist normalized_dist(FiniteSpace space, std::vector<double> p) {
    if (static_cast<int>(p.size()) != space.size())
        throw DimensionMismatchError("distribution size does not match space");
    double total = 0;
    for (double x : p) {
        if (x < 0 || !std::isfinite(x)) throw DimensionMismatchError("distribution entries must be finite and >= 0");
        total += x;
    }
    if (total <= 0) throw DimensionMismatchError("cannot normalize an all-zero vector");
    for (double& x : p) x /= total;
    return Dist{std::move(space), std::move(p)};
}

Dist point_mass(const FiniteSpace& space, int outcome) {
    std::vector<double> p(static_cast<std::size_t>(space.size()), 0.0);
    p[static_cast<std::size_t>(outcome)] = 1.0;
    return Dist{space, std::move(p)};
}

Dist uniform_dist(const FiniteSpace& space) {
    std::vector<double> p(static_cast<std::size_t>(space.size()),
                          1.0 / static_cast<double>(space.size()));
    return Dist{space, std::move(p)};
}

Kernel make_kernel(FiniteSpace source, FiniteSpace target, std::vector<double> entries) {
    const std::size_t rows = static_cast<std::size_t>(source.size());
    const std::size_t cols = static_cast<std::size_t>(target.size());
    if (entries.size() != rows * cols)
        throw DimensionMismatchError("kernel entry count does not match source x target");
    for (std::size_t r = 0; r < rows; ++r) {
        double total = 0;
        for (std::size_t c = 0; c < cols; ++c) {
            double x = entries[r * cols + c];
            if (x < 0 || !std::isfinite(x))
                throw DimensionMismatchError("kernel entries must be finite and >= 0");
            total += x;
        }
        if (std::abs(total - 1.0) > 1e-9)
            throw DimensionMismatchError("kernel row " + std::to_string(r) + " sums to " +
                                         std::to_string(total) + ", not 1");
    }
    return Kernel{std::move(source), std::move(target), std::move(entries)};
}

Kernel identity_kernel(const FiniteSpace& space) {
    const int n = space.size();
    std::vector<double> entries(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i)
        entries[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)] = 1.0;
    return Kernel{space, space, std::move(entries)};
}

Kernel compose_kernels(const Kernel& k, const Kernel& k1) {
    if (!(k.target == k1.source))
        throw SpaceMismatchError("kernel composition: k.target differs from k1.source");
    const int rows = k.source.size(), mid = k.target.size(), cols = k1.target.size();
    std::vector<double> out(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), 0.0);
    for (int r = 0; r < rows; ++r)
        for (int m = 0; m < mid; ++m) {
            const double w = k.at(r, m);
            if (w == 0) continue;
            for (int c = 0; c < cols; ++c)
                out[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(c)] +=
                    w * k1.at(m, c);
        }
    return Kernel{k.source, k1.target, std::move(out)};
}

Kernel kernel_from_map(const FiniteSpace& source, const FiniteSpace& target,
                       std::span<const int> map) {
    if (map.size() != static_cast<std::size_t>(source.size()))
        throw DimensionMismatchError("map length does not match source space");
    std::vector<double> entries(static_cast<std::size_t>(source.size()) *
                                    static_cast<std::size_t>(target.size()),
                                0.0);
    for (int r = 0; r < source.size(); ++r) {
        int img = map[static_cast<std::size_t>(r)];
        if (img < 0 || img >= target.size())
            throw DimensionMismatchError("map image out of range");
        entries[static_cast<std::size_t>(r) * static_cast<std::size_t>(target.size()) +
                static_cast<std::size_t>(img)] = 1.0;
    }
    return Kernel{source, target, std::move(entries)};
}

Dist pushforward(const Kernel& k, const Dist& d) {
    if (!(d.space == k.source)) throw SpaceMismatchError("pushforward: distribution not on kernel source");
    std::vector<double> out(static_cast<std::size_t>(k.target.size()), 0.0);
    for (int r = 0; r < k.source.size(); ++r) {
        const double w = d[r];
        if (w == 0) continue;
        for (int c = 0; c < k.target.size(); ++c) out[static_cast<std::size_t>(c)] += w * k.at(r, c);
    }
    return Dist{k.target, std::move(out)};
}

std::vector<double> pushforward_map(std::span<const int> map, int target_size,
                                    std::span<const double> v) {
    if (map.size() != v.size()) throw DimensionMismatchError("pushforward_map: size mismatch");
    std::vector<double> out(static_cast<std::size_t>(target_size), 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<std::size_t>(map[i])] += v[i];
    return out;
}

Dist pushforward_map(std::span<const int> map, const FiniteSpace& target, const Dist& d) {
    return Dist{target, pushforward_map(map, target.size(), d.p)};
}

bool proper_kernel_check(const Kernel& k, const std::vector<std::vector<int>>& blocks) {
    if (static_cast<int>(blocks.size()) != k.source.size())
        throw PartitionMismatchError("one block per source outcome required");
    std::vector<int> owner(static_cast<std::size_t>(k.target.size()), -1);
    for (std::size_t b = 0; b < blocks.size(); ++b)
        for (int o : blocks[b]) {
            if (o < 0 || o >= k.target.size() || owner[static_cast<std::size_t>(o)] != -1)
                throw PartitionMismatchError("blocks do not partition the target space");
            owner[static_cast<std::size_t>(o)] = static_cast<int>(b);
        }
    for (int o = 0; o < k.target.size(); ++o)
        if (owner[static_cast<std::size_t>(o)] < 0)
            throw PartitionMismatchError("blocks do not cover the target space");
    for (int r = 0; r < k.source.size(); ++r)
        for (int c = 0; c < k.target.size(); ++c)
            if (owner[static_cast<std::size_t>(c)] != r && k.at(r, c) > 1e-12) return false;
    return true;
}

double entropy(std::span<const double> p) {
    double s = 0;
    for (double x : p)
        if (x > 0) s -= x * std::log(x);
    return s;
}

double entropy(const Dist& d) { return entropy(std::span<const double>(d.p)); }

Dist boltzmann(const Hamiltonian& h) {
    if (static_cast<int>(h.h.size()) != h.space.size())
        throw DimensionMismatchError("hamiltonian size does not match space");
    double m = -h.beta * h.h[0];
    for (double e : h.h) m = std::max(m, -h.beta * e);
    std::vector<double> p(h.h.size());
    double z = 0;
    for (std::size_t i = 0; i < h.h.size(); ++i) {
        p[i] = std::exp(-h.beta * h.h[i] - m);
        z += p[i];
    }
    for (double& x : p) x /= z;
    return Dist{h.space, std::move(p)};
}

double log_partition(const Hamiltonian& h) {
    if (static_cast<int>(h.h.size()) != h.space.size())
        throw DimensionMismatchError("hamiltonian size does not match space");
    double m = -h.beta * h.h[0];
    for (double e : h.h) m = std::max(m, -h.beta * e);
    double z = 0;
    for (double e : h.h) z += std::exp(-h.beta * e - m);
    return -(m + std::log(z));
}

double gibbs_free_energy(const Dist& d, const Hamiltonian& h) {
    if (!(d.space == h.space)) throw SpaceMismatchError("gibbs_free_energy: spaces differ");
    double energy = 0;
    for (std::size_t i = 0; i < d.p.size(); ++i) energy += d.p[i] * h.beta * h.h[i];
    return energy - entropy(d);
}

}  // namespace csm
