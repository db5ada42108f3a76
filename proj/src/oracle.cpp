#include "csm/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "csm/errors.hpp"

namespace csm {

JointModel make_joint_model(RegionModel regions, std::vector<std::vector<double>> terms, double beta) {
    if (terms.size() != regions.region_vars.size())
        throw DimensionMismatchError("one term vector per region required");
    for (std::size_t r = 0; r < terms.size(); ++r)
        if (static_cast<int>(terms[r].size()) != regions.spaces[r].size())
            throw DimensionMismatchError("term size mismatch at region " + regions.region_names[r]);
    return JointModel{std::move(regions), std::move(terms), beta};
}

namespace {

long long joint_size(const JointModel& model) {
    long long total = 1;
    for (int s : model.regions.var_sizes) {
        total *= s;
        if (total > (1LL << 20)) throw TooLargeError("joint space beyond 2^20 outcomes");
    }
    return total;
}

std::vector<double> joint_energies(const JointModel& model) {
    const long long total = joint_size(model);
    std::vector<std::vector<int>> proj;
    for (std::size_t r = 0; r < model.terms.size(); ++r)
        proj.push_back(model.regions.projection_from_joint(static_cast<int>(r)));
    std::vector<double> energy(static_cast<std::size_t>(total), 0.0);
    for (long long w = 0; w < total; ++w)
        for (std::size_t r = 0; r < model.terms.size(); ++r)
            energy[static_cast<std::size_t>(w)] +=
                model.terms[r][static_cast<std::size_t>(proj[r][static_cast<std::size_t>(w)])];
    return energy;
}

}  // namespace

double exact_log_partition(const JointModel& model) {
    auto energy = joint_energies(model);
    double m = -model.beta * energy[0];
    for (double e : energy) m = std::max(m, -model.beta * e);
    double z = 0;
    for (double e : energy) z += std::exp(-model.beta * e - m);
    return -(m + std::log(z));
}

Dist boltzmann_joint(const JointModel& model) {
    auto energy = joint_energies(model);
    double m = -model.beta * energy[0];
    for (double e : energy) m = std::max(m, -model.beta * e);
    std::vector<double> p(energy.size());
    double z = 0;
    for (std::size_t w = 0; w < energy.size(); ++w) {
        p[w] = std::exp(-model.beta * energy[w] - m);
        z += p[w];
    }
    for (double& x : p) x /= z;
    return Dist{model.regions.joint_space(), std::move(p)};
}

BeliefFamily exact_marginals(const JointModel& model) {
    Dist joint = boltzmann_joint(model);
    BeliefFamily out;
    for (std::size_t r = 0; r < model.regions.region_vars.size(); ++r) {
        auto proj = model.regions.projection_from_joint(static_cast<int>(r));
        std::vector<double> p(static_cast<std::size_t>(model.regions.spaces[r].size()), 0.0);
        for (std::size_t w = 0; w < joint.p.size(); ++w) p[static_cast<std::size_t>(proj[w])] += joint.p[w];
        out.push_back(Dist{model.regions.spaces[r], std::move(p)});
    }
    return out;
}

HamiltonianFamily region_energies(const JointModel& model) {
    HamiltonianFamily h;
    h.beta = model.beta;
    const auto& poset = model.regions.poset;
    for (int a = 0; a < poset.size(); ++a) {
        std::vector<double> e(model.terms[static_cast<std::size_t>(a)]);
        for (int b : poset.down_set(a)) {
            if (b == a) continue;
            auto proj = model.regions.projection(a, b);
            for (std::size_t w = 0; w < e.size(); ++w)
                e[w] += model.terms[static_cast<std::size_t>(b)][static_cast<std::size_t>(proj[w])];
        }
        h.h.push_back(std::move(e));
    }
    return h;
}

namespace {

// All length-`parts` vectors of nonnegative numerators summing to `total`.
void simplex_grid(int parts, int total, std::vector<int>& head, std::vector<std::vector<int>>& out) {
    if (parts == 1) {
        head.push_back(total);
        out.push_back(head);
        head.pop_back();
        return;
    }
    for (int k = 0; k <= total; ++k) {
        head.push_back(k);
        simplex_grid(parts - 1, total - k, head, out);
        head.pop_back();
    }
}

struct SectionScan {
    const ASpecification& spec;
    int resolution;
    double tol;
    std::vector<int> order;                          // reverse linear extension (tops first)
    std::vector<std::vector<std::vector<int>>> grids;  // per element
    std::vector<std::vector<double>> assigned;       // per element, current grid point
    std::vector<bool> done;
    std::vector<BeliefFamily> found;

    bool constraints_ok(int just_assigned) const {
        for (auto [b, a] : spec.poset().cover_pairs()) {
            if (!(b == just_assigned || a == just_assigned)) continue;
            if (!done[static_cast<std::size_t>(b)] || !done[static_cast<std::size_t>(a)]) continue;
            const Kernel& f = spec.up_kernel(b, a);
            for (int wa = 0; wa < spec.space_size(a); ++wa) {
                double lifted = 0;
                for (int wb = 0; wb < spec.space_size(b); ++wb)
                    lifted += f.at(wb, wa) * assigned[static_cast<std::size_t>(b)][static_cast<std::size_t>(wb)];
                if (std::abs(lifted - assigned[static_cast<std::size_t>(a)][static_cast<std::size_t>(wa)]) > tol)
                    return false;
            }
        }
        return true;
    }

    void scan(std::size_t depth) {
        if (depth == order.size()) {
            BeliefFamily family;
            for (int a = 0; a < spec.poset().size(); ++a)
                family.push_back(Dist{spec.space(a), assigned[static_cast<std::size_t>(a)]});
            found.push_back(std::move(family));
            return;
        }
        int element = order[depth];
        for (const auto& numerators : grids[static_cast<std::size_t>(element)]) {
            auto& slot = assigned[static_cast<std::size_t>(element)];
            slot.resize(numerators.size());
            for (std::size_t i = 0; i < numerators.size(); ++i)
                slot[i] = static_cast<double>(numerators[i]) / resolution;
            done[static_cast<std::size_t>(element)] = true;
            if (constraints_ok(element)) scan(depth + 1);
            done[static_cast<std::size_t>(element)] = false;
        }
    }
};

}  // namespace

std::vector<BeliefFamily> brute_force_sections(const ASpecification& spec, int resolution) {
    int dims = 0;
    for (int a = 0; a < spec.poset().size(); ++a) dims += spec.space_size(a) - 1;
    if (dims > 6) throw TooLargeError("grid search beyond 6 simplex dimensions");

    SectionScan scan{spec, resolution, 2.0 / resolution, {}, {}, {}, {}, {}};
    auto extension = spec.poset().linear_extension();
    scan.order.assign(extension.rbegin(), extension.rend());
    scan.grids.resize(static_cast<std::size_t>(spec.poset().size()));
    for (int a = 0; a < spec.poset().size(); ++a) {
        std::vector<int> head;
        simplex_grid(spec.space_size(a), resolution, head, scan.grids[static_cast<std::size_t>(a)]);
    }
    scan.assigned.resize(static_cast<std::size_t>(spec.poset().size()));
    scan.done.assign(static_cast<std::size_t>(spec.poset().size()), false);
    scan.scan(0);
    return scan.found;
}

DualVector finite_diff_gradient(const std::function<double(const BeliefFamily&)>& functional,
                                const BeliefFamily& at, double step) {
    DualVector grad(at.size());
    BeliefFamily probe = at;
    for (std::size_t a = 0; a < at.size(); ++a) {
        grad[a].resize(at[a].p.size());
        for (std::size_t w = 0; w < at[a].p.size(); ++w) {
            const double saved = probe[a].p[w];
            probe[a].p[w] = saved + step;
            double up = functional(probe);
            probe[a].p[w] = saved - step;
            double down = functional(probe);
            probe[a].p[w] = saved;
            grad[a][w] = (up - down) / (2 * step);
        }
    }
    return grad;
}

}  // namespace csm
