#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "csm/spec_model.hpp"

namespace csm {

/// One outcome subset per poset element, compatible under preimages:
/// A_upper = preimage of A_lower along the down map, for every pair.
struct EventSection {
    std::vector<std::vector<bool>> in;  // per element, per outcome

    EventSection complement() const;
    bool operator==(const EventSection& other) const { return in == other.in; }
};

bool is_event_section(const GSkeleton& skel, const EventSection& ev);

/// The complete list of preimage-compatible event families. Membership
/// constraints tie each outcome to the image outcomes below it, so the
/// families are exactly the 0/1 labelings constant on the classes of that
/// atom graph; one free bit per class. Throws TooLargeError when the
/// class count exceeds 16.
std::vector<EventSection> enumerate_lim_sigma(const GSkeleton& skel);
std::vector<EventSection> enumerate_lim_sigma(const ASpecification& spec);

/// Orthonormal basis of the invariant observables {f : f_upper is the
/// pullback of f_lower for every pair}; dimension is at least the number
/// of connected components.
struct InvariantObservableBasis {
    std::vector<int> offsets;
    Eigen::MatrixXd basis;  // num_vars x dim, orthonormal columns

    int dimension() const { return static_cast<int>(basis.cols()); }
};

InvariantObservableBasis invariant_observables(const GSkeleton& skel);
InvariantObservableBasis invariant_observables(const ASpecification& spec);

/// Every invariant observable is also conditional-expectation invariant:
/// taking expectations under the up kernels reproduces the lower entries.
bool lim_i_subset_lim_pi_check(const ASpecification& spec, double tol = 1e-10);

/// Supports of a strictly-positive-kernel section form an event section.
/// Throws PositivityRequiredError when F > 0 fails.
EventSection support_section(const ASpecification& spec, const BeliefFamily& mu, double tol = 1e-12);

struct ExtremalityResult {
    bool extreme = false;
    bool heuristic = false;  // F > 0 failed; verdict not covered by the theorem
    std::optional<EventSection> witness;
    double weight = 0.0;  // mass of the witness on its component
    std::optional<BeliefFamily> component_a;
    std::optional<BeliefFamily> component_b;
};

/// Zero-one test: extreme iff every event-section mass is 0 or 1 (within
/// 1e-9). When not extreme, returns a witness together with the strict
/// convex decomposition it induces.
ExtremalityResult zero_one_extremality_test(const ASpecification& spec, const BeliefFamily& mu);

}  // namespace csm
