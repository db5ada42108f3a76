#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "csm/free_energy.hpp"
#include "csm/spec_model.hpp"

namespace csm {

enum class GbpVariant {
    /// Messages live on the lower space; the update multiplies by the
    /// fiber-sum pushdown of the upper belief over the lower belief. This
    /// is the region-graph update generalized along arbitrary down maps.
    PushDown,
    /// Experimental reading that keeps messages on the upper space and
    /// multiplies by (up-kernel applied to the lower belief) / upper
    /// belief; messages enter the belief products through the up-kernel
    /// expectation. Kept for side-by-side study of the two readings.
    LiteralF,
};

struct GbpOptions {
    int max_iters = 1000;
    double tol = 1e-10;          // sup-norm of log-message change per sweep
    double damping = 0.5;        // multiplicative step in log space
    GbpVariant variant = GbpVariant::PushDown;
    bool perturb_init = false;   // log-normal message initialization
    std::uint64_t seed = 0;
    double perturb_sigma = 0.1;
    std::string trace_path;      // per-iteration CSV when nonempty
};

/// Top-down messages for every strictly comparable pair, stored in log
/// space and max-normalized after each sweep.
struct MessageState {
    GSkeleton skel;
    const ASpecification* spec = nullptr;  // required by the LiteralF variant
    GbpVariant variant = GbpVariant::PushDown;
    double damping = 0.5;
    int iteration = 0;
    std::vector<std::pair<int, int>> pairs;        // (upper, lower), fixed sweep order
    std::vector<std::vector<double>> log_m;        // per pair
};

MessageState init_messages(const GSkeleton& skel, const GbpOptions& opts,
                           const ASpecification* spec = nullptr);

/// log n_{lower -> upper} on the upper space: the sum over contributors c
/// (c >= lower, c not <= upper) of their messages pulled back along the
/// down map. Empty products are zero in log space.
std::vector<double> bottom_up_log_message(const MessageState& state, int lower, int upper);

/// Normalized beliefs b_a from the current messages and energies.
BeliefFamily compute_beliefs(const MessageState& state, const HamiltonianFamily& h);

/// One synchronous damped sweep; messages are max-normalized afterwards.
/// Returns the sup-norm of the normalized log-message change.
double update_messages(MessageState& state, const BeliefFamily& beliefs);

struct GbpResult {
    bool converged = false;
    int iterations = 0;
    BeliefFamily beliefs;
    double final_change = 0;
    double fixed_point_residual = 0;   // update equation, log-space sup norm
    double marginal_residual = 0;      // pushdown consistency of beliefs
    double section_residual = 0;       // up-kernel consistency (specs only)
    double f_bethe = 0;
    CriticalityReport criticality;
};

GbpResult run_gbp(const GSkeleton& skel, const HamiltonianFamily& h, const GbpOptions& opts,
                  const ASpecification* spec = nullptr);
GbpResult run_gbp(const ASpecification& spec, const HamiltonianFamily& h, const GbpOptions& opts);
GbpResult run_gbp(const RegionModel& model, const HamiltonianFamily& h, const GbpOptions& opts);

struct FixedPointReport {
    double fixed_point_residual = 0;
    double section_residual = 0;
    CriticalityReport criticality;
};

/// Residual triple for externally supplied beliefs: fixed-point equation,
/// section constraints, and the criticality report of the section system.
FixedPointReport fixed_point_verify(const ASpecification& spec, const HamiltonianFamily& h,
                                    const BeliefFamily& beliefs);
/// Marginalization-constraint version for region skeletons.
FixedPointReport fixed_point_verify(const GSkeleton& skel, const HamiltonianFamily& h,
                                    const BeliefFamily& beliefs);

}  // namespace csm
