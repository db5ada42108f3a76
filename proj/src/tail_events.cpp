#include "csm/tail_events.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "csm/errors.hpp"

namespace csm {

EventSection EventSection::complement() const {
    EventSection out = *this;
    for (auto& v : out.in)
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = !v[i];
    return out;
}

bool is_event_section(const GSkeleton& skel, const EventSection& ev) {
    if (ev.in.size() != static_cast<std::size_t>(skel.poset.size())) return false;
    for (int a = 0; a < skel.poset.size(); ++a)
        if (static_cast<int>(ev.in[static_cast<std::size_t>(a)].size()) != skel.space_size(a)) return false;
    for (auto [b, a] : skel.poset.comparable_pairs()) {
        auto m = skel.down_map(a, b);
        for (int wa = 0; wa < skel.space_size(a); ++wa)
            if (ev.in[static_cast<std::size_t>(a)][static_cast<std::size_t>(wa)] !=
                ev.in[static_cast<std::size_t>(b)][static_cast<std::size_t>(m[static_cast<std::size_t>(wa)])])
                return false;
    }
    return true;
}

namespace {

// Union-find over outcome atoms (element, outcome). Compatibility ties
// each upper outcome to its image below, so event sections are constant
// on the resulting classes.
struct AtomClasses {
    std::vector<int> offsets;
    std::vector<int> parent;
    std::vector<int> class_of;  // atom -> dense class id, ordered by first appearance
    int num_classes = 0;

    int find(int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    }
    void unite(int x, int y) {
        x = find(x);
        y = find(y);
        if (x != y) parent[static_cast<std::size_t>(std::max(x, y))] = std::min(x, y);
    }
};

AtomClasses atom_classes(const GSkeleton& skel) {
    AtomClasses ac;
    ac.offsets = layout_offsets(skel.spaces);
    ac.parent.resize(static_cast<std::size_t>(ac.offsets.back()));
    std::iota(ac.parent.begin(), ac.parent.end(), 0);
    for (auto [b, a] : skel.poset.comparable_pairs()) {
        auto m = skel.down_map(a, b);
        for (int wa = 0; wa < skel.space_size(a); ++wa)
            ac.unite(ac.offsets[static_cast<std::size_t>(a)] + wa,
                     ac.offsets[static_cast<std::size_t>(b)] + m[static_cast<std::size_t>(wa)]);
    }
    ac.class_of.assign(ac.parent.size(), -1);
    for (std::size_t i = 0; i < ac.parent.size(); ++i) {
        int root = ac.find(static_cast<int>(i));
        if (ac.class_of[static_cast<std::size_t>(root)] < 0)
            ac.class_of[static_cast<std::size_t>(root)] = ac.num_classes++;
        ac.class_of[i] = ac.class_of[static_cast<std::size_t>(root)];
    }
    return ac;
}

}  // namespace

std::vector<EventSection> enumerate_lim_sigma(const GSkeleton& skel) {
    AtomClasses ac = atom_classes(skel);
    if (ac.num_classes > 16)
        throw TooLargeError("lim sigma has 2^" + std::to_string(ac.num_classes) + " members; refusing past 2^16");
    std::vector<EventSection> out;
    const std::uint32_t count = 1u << ac.num_classes;
    out.reserve(count);
    for (std::uint32_t mask = 0; mask < count; ++mask) {
        EventSection ev;
        ev.in.resize(static_cast<std::size_t>(skel.poset.size()));
        for (int a = 0; a < skel.poset.size(); ++a) {
            ev.in[static_cast<std::size_t>(a)].resize(static_cast<std::size_t>(skel.space_size(a)));
            for (int w = 0; w < skel.space_size(a); ++w) {
                int cls = ac.class_of[static_cast<std::size_t>(ac.offsets[static_cast<std::size_t>(a)] + w)];
                ev.in[static_cast<std::size_t>(a)][static_cast<std::size_t>(w)] = (mask >> cls) & 1u;
            }
        }
        out.push_back(std::move(ev));
    }
    return out;
}

std::vector<EventSection> enumerate_lim_sigma(const ASpecification& spec) {
    return enumerate_lim_sigma(skeleton_of(spec));
}

InvariantObservableBasis invariant_observables(const GSkeleton& skel) {
    InvariantObservableBasis out;
    out.offsets = layout_offsets(skel.spaces);
    const int n = out.offsets.back();
    // f_upper(w) - f_lower(image(w)) = 0 stacked over pairs and outcomes.
    int rows = 0;
    for (auto [b, a] : skel.poset.comparable_pairs()) rows += skel.space_size(a);
    Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(std::max(rows, 1), n);
    int row = 0;
    for (auto [b, a] : skel.poset.comparable_pairs()) {
        auto m = skel.down_map(a, b);
        for (int wa = 0; wa < skel.space_size(a); ++wa, ++row) {
            sys(row, out.offsets[static_cast<std::size_t>(a)] + wa) += 1.0;
            sys(row, out.offsets[static_cast<std::size_t>(b)] + m[static_cast<std::size_t>(wa)]) -= 1.0;
        }
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sys);
    lu.setThreshold(1e-10);
    Eigen::MatrixXd kernel = lu.kernel();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(kernel);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, kernel.cols());
    out.basis = q;
    return out;
}

InvariantObservableBasis invariant_observables(const ASpecification& spec) {
    return invariant_observables(skeleton_of(spec));
}

bool lim_i_subset_lim_pi_check(const ASpecification& spec, double tol) {
    InvariantObservableBasis inv = invariant_observables(spec);
    for (int k = 0; k < inv.dimension(); ++k) {
        for (auto [b, a] : spec.poset().comparable_pairs()) {
            const Kernel& f = spec.up_kernel(b, a);
            for (int wb = 0; wb < spec.space_size(b); ++wb) {
                double expectation = 0;
                for (int wa = 0; wa < spec.space_size(a); ++wa)
                    expectation += f.at(wb, wa) * inv.basis(inv.offsets[static_cast<std::size_t>(a)] + wa, k);
                if (std::abs(expectation - inv.basis(inv.offsets[static_cast<std::size_t>(b)] + wb, k)) > tol)
                    return false;
            }
        }
    }
    return true;
}

EventSection support_section(const ASpecification& spec, const BeliefFamily& mu, double tol) {
    if (!strict_positivity(spec))
        throw PositivityRequiredError("support_section requires strictly positive kernels");
    EventSection ev;
    ev.in.resize(mu.size());
    for (std::size_t a = 0; a < mu.size(); ++a) {
        ev.in[a].resize(mu[a].p.size());
        for (std::size_t w = 0; w < mu[a].p.size(); ++w) ev.in[a][w] = mu[a].p[w] > tol;
    }
    return ev;
}

ExtremalityResult zero_one_extremality_test(const ASpecification& spec, const BeliefFamily& mu) {
    constexpr double kTol = 1e-9;
    ExtremalityResult result;
    result.heuristic = !strict_positivity(spec);

    const auto components = spec.poset().connected_components();
    std::vector<int> component_of(static_cast<std::size_t>(spec.poset().size()), 0);
    for (std::size_t c = 0; c < components.size(); ++c)
        for (int a : components[c]) component_of[static_cast<std::size_t>(a)] = static_cast<int>(c);

    for (const EventSection& ev : enumerate_lim_sigma(spec)) {
        int witness_component = -1;
        double witness_mass = 0;
        for (int a = 0; a < spec.poset().size() && witness_component < 0; ++a) {
            double mass = 0;
            for (int w = 0; w < spec.space_size(a); ++w)
                if (ev.in[static_cast<std::size_t>(a)][static_cast<std::size_t>(w)]) mass += mu[static_cast<std::size_t>(a)][w];
            if (mass > kTol && mass < 1.0 - kTol) {
                witness_component = component_of[static_cast<std::size_t>(a)];
                witness_mass = mass;
            }
        }
        if (witness_component < 0) continue;

        // Split along the witness on its component, leave the rest alone.
        result.extreme = false;
        result.witness = ev;
        result.weight = witness_mass;
        BeliefFamily inside, outside;
        for (int a = 0; a < spec.poset().size(); ++a) {
            if (component_of[static_cast<std::size_t>(a)] != witness_component) {
                inside.push_back(mu[static_cast<std::size_t>(a)]);
                outside.push_back(mu[static_cast<std::size_t>(a)]);
                continue;
            }
            std::vector<double> pin(mu[static_cast<std::size_t>(a)].p.size(), 0.0);
            std::vector<double> pout(pin.size(), 0.0);
            for (std::size_t w = 0; w < pin.size(); ++w) {
                if (ev.in[static_cast<std::size_t>(a)][w])
                    pin[w] = mu[static_cast<std::size_t>(a)].p[w] / witness_mass;
                else
                    pout[w] = mu[static_cast<std::size_t>(a)].p[w] / (1.0 - witness_mass);
            }
            inside.push_back(Dist{spec.space(a), std::move(pin)});
            outside.push_back(Dist{spec.space(a), std::move(pout)});
        }
        result.component_a = std::move(inside);
        result.component_b = std::move(outside);
        return result;
    }
    result.extreme = true;
    return result;
}

}  // namespace csm
