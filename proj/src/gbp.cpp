#include "csm/gbp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "csm/errors.hpp"

namespace csm {

namespace {

int pair_index(const MessageState& state, int upper, int lower) {
    for (std::size_t i = 0; i < state.pairs.size(); ++i)
        if (state.pairs[i].first == upper && state.pairs[i].second == lower) return static_cast<int>(i);
    throw UnknownElementError("gbp: no message for the requested pair");
}

std::vector<double> normalize_log(std::vector<double> v) {
    if (v.empty()) return v;
    double m = *std::max_element(v.begin(), v.end());
    for (double& x : v) x -= m;
    return v;
}

// The message from pair p as a positive function on the *lower* space of
// the pair; for the LiteralF variant that means taking the up-kernel
// expectation of the upper-space message.
std::vector<double> message_on_lower(const MessageState& state, int p) {
    const auto [upper, lower] = state.pairs[static_cast<std::size_t>(p)];
    const auto& lm = state.log_m[static_cast<std::size_t>(p)];
    if (state.variant == GbpVariant::PushDown) {
        std::vector<double> out(lm.size());
        for (std::size_t i = 0; i < lm.size(); ++i) out[i] = std::exp(lm[i]);
        return out;
    }
    const Kernel& f = state.spec->up_kernel(lower, upper);
    std::vector<double> out(static_cast<std::size_t>(state.skel.space_size(lower)), 0.0);
    for (int wb = 0; wb < state.skel.space_size(lower); ++wb) {
        double e = 0;
        for (int wa = 0; wa < state.skel.space_size(upper); ++wa)
            e += f.at(wb, wa) * std::exp(lm[static_cast<std::size_t>(wa)]);
        out[static_cast<std::size_t>(wb)] = e;
    }
    return out;
}

}  // namespace

MessageState init_messages(const GSkeleton& skel, const GbpOptions& opts, const ASpecification* spec) {
    if (opts.variant == GbpVariant::LiteralF && spec == nullptr)
        throw SpaceMismatchError("the LiteralF variant needs the specification's kernels");
    MessageState state;
    state.skel = skel;
    state.spec = spec;
    state.variant = opts.variant;
    state.damping = opts.damping;
    state.pairs = skel.poset.comparable_pairs();
    for (auto& pr : state.pairs) std::swap(pr.first, pr.second);  // store as (upper, lower)
    std::sort(state.pairs.begin(), state.pairs.end());
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> noise(0.0, opts.perturb_sigma);
    for (auto [upper, lower] : state.pairs) {
        int size = state.variant == GbpVariant::PushDown ? skel.space_size(lower) : skel.space_size(upper);
        std::vector<double> lm(static_cast<std::size_t>(size), 0.0);
        if (opts.perturb_init)
            for (double& x : lm) x = noise(rng);
        state.log_m.push_back(normalize_log(std::move(lm)));
    }
    return state;
}

std::vector<double> bottom_up_log_message(const MessageState& state, int lower, int upper) {
    const auto& poset = state.skel.poset;
    if (!poset.leq(lower, upper)) throw UnknownElementError("bottom_up_log_message: pair not comparable");
    std::vector<double> log_n(static_cast<std::size_t>(state.skel.space_size(upper)), 0.0);
    std::span<const int> down;
    if (lower != upper) down = state.skel.down_map(upper, lower);
    for (int c = 0; c < poset.size(); ++c) {
        if (!poset.leq(lower, c)) continue;
        if (poset.leq(c, upper)) continue;
        int p = pair_index(state, c, lower);
        std::vector<double> on_lower = message_on_lower(state, p);
        for (int wa = 0; wa < state.skel.space_size(upper); ++wa) {
            int wb = (lower == upper) ? wa : down[static_cast<std::size_t>(wa)];
            double v = on_lower[static_cast<std::size_t>(wb)];
            if (v <= 0) throw DegenerateBeliefError("bottom_up_log_message: nonpositive message factor");
            log_n[static_cast<std::size_t>(wa)] += std::log(v);
        }
    }
    return log_n;
}

BeliefFamily compute_beliefs(const MessageState& state, const HamiltonianFamily& h) {
    const auto& poset = state.skel.poset;
    if (static_cast<int>(h.h.size()) != poset.size())
        throw SpaceMismatchError("compute_beliefs: one energy vector per element required");
    BeliefFamily beliefs;
    for (int a = 0; a < poset.size(); ++a) {
        if (static_cast<int>(h.h[static_cast<std::size_t>(a)].size()) != state.skel.space_size(a))
            throw SpaceMismatchError("compute_beliefs: energy size mismatch at " + poset.name(a));
        std::vector<double> log_b(static_cast<std::size_t>(state.skel.space_size(a)));
        for (int w = 0; w < state.skel.space_size(a); ++w)
            log_b[static_cast<std::size_t>(w)] = -h.beta * h.h[static_cast<std::size_t>(a)][static_cast<std::size_t>(w)];
        for (int b : poset.down_set(a)) {
            auto log_n = bottom_up_log_message(state, b, a);
            for (int w = 0; w < state.skel.space_size(a); ++w)
                log_b[static_cast<std::size_t>(w)] += log_n[static_cast<std::size_t>(w)];
        }
        double m = *std::max_element(log_b.begin(), log_b.end());
        if (!std::isfinite(m)) throw DegenerateBeliefError("compute_beliefs: unnormalizable belief at " + poset.name(a));
        double z = 0;
        std::vector<double> p(log_b.size());
        for (std::size_t w = 0; w < log_b.size(); ++w) {
            p[w] = std::exp(log_b[w] - m);
            z += p[w];
        }
        for (double& x : p) x /= z;
        beliefs.push_back(Dist{state.skel.spaces[static_cast<std::size_t>(a)], std::move(p)});
    }
    return beliefs;
}

double update_messages(MessageState& state, const BeliefFamily& beliefs) {
    double change = 0;
    std::vector<std::vector<double>> next(state.log_m.size());
    for (std::size_t p = 0; p < state.pairs.size(); ++p) {
        const auto [upper, lower] = state.pairs[p];
        auto down = state.skel.down_map(upper, lower);
        std::vector<double> target;
        if (state.variant == GbpVariant::PushDown) {
            // log((down)_* b_upper) - log(b_lower) on the lower space
            std::vector<double> pushed(static_cast<std::size_t>(state.skel.space_size(lower)), 0.0);
            for (int wa = 0; wa < state.skel.space_size(upper); ++wa)
                pushed[static_cast<std::size_t>(down[static_cast<std::size_t>(wa)])] +=
                    beliefs[static_cast<std::size_t>(upper)][wa];
            target.resize(pushed.size());
            for (std::size_t w = 0; w < pushed.size(); ++w) {
                double lo = beliefs[static_cast<std::size_t>(lower)][static_cast<int>(w)];
                if (pushed[w] <= 0 || lo <= 0)
                    throw DegenerateBeliefError("update_messages: vanishing belief mass");
                target[w] = std::log(pushed[w]) - std::log(lo);
            }
        } else {
            // log(F^lower_upper b_lower) - log(b_upper) on the upper space
            const Kernel& f = state.spec->up_kernel(lower, upper);
            Dist lifted = pushforward(f, beliefs[static_cast<std::size_t>(lower)]);
            target.resize(static_cast<std::size_t>(state.skel.space_size(upper)));
            for (int wa = 0; wa < state.skel.space_size(upper); ++wa) {
                double up = beliefs[static_cast<std::size_t>(upper)][wa];
                if (lifted[wa] <= 0 || up <= 0)
                    throw DegenerateBeliefError("update_messages: vanishing belief mass");
                target[static_cast<std::size_t>(wa)] = std::log(lifted[wa]) - std::log(up);
            }
        }
        std::vector<double> updated = state.log_m[p];
        for (std::size_t w = 0; w < updated.size(); ++w) updated[w] += state.damping * target[w];
        next[p] = normalize_log(std::move(updated));
    }
    for (std::size_t p = 0; p < next.size(); ++p) {
        for (std::size_t w = 0; w < next[p].size(); ++w)
            change = std::max(change, std::abs(next[p][w] - state.log_m[p][w]));
        state.log_m[p] = std::move(next[p]);
    }
    ++state.iteration;
    return change;
}

namespace {

double pushdown_residual(const MessageState& state, const BeliefFamily& beliefs, bool log_space) {
    double worst = 0;
    for (auto [upper, lower] : state.pairs) {
        auto down = state.skel.down_map(upper, lower);
        std::vector<double> pushed(static_cast<std::size_t>(state.skel.space_size(lower)), 0.0);
        for (int wa = 0; wa < state.skel.space_size(upper); ++wa)
            pushed[static_cast<std::size_t>(down[static_cast<std::size_t>(wa)])] +=
                beliefs[static_cast<std::size_t>(upper)][wa];
        for (int wb = 0; wb < state.skel.space_size(lower); ++wb) {
            double lo = beliefs[static_cast<std::size_t>(lower)][wb];
            double hi = pushed[static_cast<std::size_t>(wb)];
            if (log_space) {
                if (lo > 0 && hi > 0) worst = std::max(worst, std::abs(std::log(hi) - std::log(lo)));
            } else {
                worst = std::max(worst, std::abs(hi - lo));
            }
        }
    }
    return worst;
}

double section_residual_of(const ASpecification& spec, const BeliefFamily& beliefs) {
    double worst = 0;
    for (auto [b, a] : spec.poset().comparable_pairs()) {
        Dist lifted = pushforward(spec.up_kernel(b, a), beliefs[static_cast<std::size_t>(b)]);
        for (int wa = 0; wa < spec.space_size(a); ++wa)
            worst = std::max(worst, std::abs(lifted[wa] - beliefs[static_cast<std::size_t>(a)][wa]));
    }
    return worst;
}

}  // namespace

GbpResult run_gbp(const GSkeleton& skel, const HamiltonianFamily& h, const GbpOptions& opts,
                  const ASpecification* spec) {
    MessageState state = init_messages(skel, opts, spec);
    std::ofstream trace;
    if (!opts.trace_path.empty()) {
        trace.open(opts.trace_path);
        if (!trace) throw IoError("cannot open trace file: " + opts.trace_path);
        trace << "iteration,sup_change,f_bethe\n";
    }
    MobiusTable table(skel.poset);
    const auto coefficients = counting_coefficients(skel.poset, table);

    GbpResult result;
    double change = 0;
    BeliefFamily beliefs;
    for (int it = 0; it < opts.max_iters; ++it) {
        beliefs = compute_beliefs(state, h);
        change = update_messages(state, beliefs);
        if (trace.is_open())
            trace << state.iteration << "," << change << "," << generalized_bethe(beliefs, h, coefficients)
                  << "\n";
        if (change < opts.tol) break;
    }
    result.beliefs = compute_beliefs(state, h);
    result.iterations = state.iteration;
    result.final_change = change;
    result.converged = change < opts.tol;
    result.fixed_point_residual = pushdown_residual(state, result.beliefs, /*log_space=*/true);
    result.marginal_residual = pushdown_residual(state, result.beliefs, /*log_space=*/false);
    if (spec) result.section_residual = section_residual_of(*spec, result.beliefs);
    result.f_bethe = generalized_bethe(result.beliefs, h, coefficients);
    result.criticality = criticality_report(skel, table, marginalization_equations(skel), result.beliefs, h);
    return result;
}

GbpResult run_gbp(const ASpecification& spec, const HamiltonianFamily& h, const GbpOptions& opts) {
    return run_gbp(skeleton_of(spec), h, opts, &spec);
}

GbpResult run_gbp(const RegionModel& model, const HamiltonianFamily& h, const GbpOptions& opts) {
    return run_gbp(skeleton_of(model), h, opts, nullptr);
}

FixedPointReport fixed_point_verify(const ASpecification& spec, const HamiltonianFamily& h,
                                    const BeliefFamily& beliefs) {
    GSkeleton skel = skeleton_of(spec);
    GbpOptions opts;  // defaults; only the skeleton and variant matter here
    MessageState state = init_messages(skel, opts, &spec);
    FixedPointReport report;
    report.fixed_point_residual = pushdown_residual(state, beliefs, /*log_space=*/true);
    report.section_residual = section_residual_of(spec, beliefs);
    MobiusTable table(spec.poset());
    report.criticality = criticality_report(skel, table, section_equations(spec), beliefs, h);
    return report;
}

FixedPointReport fixed_point_verify(const GSkeleton& skel, const HamiltonianFamily& h,
                                    const BeliefFamily& beliefs) {
    GbpOptions opts;
    MessageState state = init_messages(skel, opts, nullptr);
    FixedPointReport report;
    report.fixed_point_residual = pushdown_residual(state, beliefs, /*log_space=*/true);
    report.section_residual = pushdown_residual(state, beliefs, /*log_space=*/false);
    MobiusTable table(skel.poset);
    report.criticality = criticality_report(skel, table, marginalization_equations(skel), beliefs, h);
    return report;
}

}  // namespace csm
