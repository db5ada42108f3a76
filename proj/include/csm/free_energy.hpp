#pragma once

#include <Eigen/Dense>
#include <vector>

#include "csm/poset.hpp"
#include "csm/spec_model.hpp"

namespace csm {

/// One energy vector per poset element with a shared inverse temperature.
struct HamiltonianFamily {
    std::vector<std::vector<double>> h;
    double beta = 1.0;
};

HamiltonianFamily zero_hamiltonians(const std::vector<FiniteSpace>& spaces, double beta = 1.0);

/// One linear functional (as a coefficient vector) per element.
using DualVector = std::vector<std::vector<double>>;

/// Per-element Gibbs free energies: FE_a = E_{Q_a}[beta H_a] - S(Q_a).
std::vector<double> fe_vector(const BeliefFamily& q, const HamiltonianFamily& h);

/// F_Bethe = sum_a c(a) FE_a with the counting coefficients of the poset.
double generalized_bethe(const BeliefFamily& q, const HamiltonianFamily& h,
                         const std::vector<long long>& c);
double gb_entropy(const BeliefFamily& q, const std::vector<long long>& c);

/// d FE_a / d Q_a = beta H_a + ln Q_a + 1 componentwise. Throws
/// NonPositiveBeliefError when any entry is at or below `zero_tol`.
DualVector fe_gradient(const BeliefFamily& q, const HamiltonianFamily& h, double zero_tol = 1e-12);

enum class TransformDirection { Zeta, Mobius };
enum class TransformVariance {
    FunctionsUp,   // result(a) = sum_{b <= a} coeff * pullback of v_b
    MeasuresDown,  // result(b) = sum_{a >= b} coeff * fiber-sum pushdown of v_a
};

/// Functor-level zeta / Moebius transforms along the down maps. The two
/// directions are mutually inverse within each variance and the two
/// variances are adjoint for the elementwise pairing.
std::vector<std::vector<double>> functor_transform(const GSkeleton& skel, const MobiusTable& table,
                                                   const std::vector<std::vector<double>>& v,
                                                   TransformDirection direction,
                                                   TransformVariance variance);
std::vector<std::vector<double>> functor_transform(const ASpecification& spec, const MobiusTable& table,
                                                   const std::vector<std::vector<double>>& v,
                                                   TransformDirection direction,
                                                   TransformVariance variance);

struct CriticalityReport {
    /// Sup norm of the Bethe gradient projected on the tangent space of
    /// the constraint affine hull; ~0 certifies a constrained critical point.
    double projected_residual = 0;
    /// The same functional evaluated through the Moebius-dual route:
    /// max over tangent basis vectors t of |<dFE, mobius-pushdown(t)>|.
    double mobius_residual = 0;
    /// Worst disagreement between the two routes over the tangent basis.
    double route_agreement = 0;
    double feasibility_residual = 0;
};

/// Residuals for a belief family against an explicit equality system; no
/// feasibility gate (callers that need one use criticality_residual).
CriticalityReport criticality_report(const GSkeleton& skel, const MobiusTable& table,
                                     const EqualitySystem& sys, const BeliefFamily& q,
                                     const HamiltonianFamily& h);

/// The constrained-critical-point test for a specification: tangent space
/// taken from the section polytope. Requires q strictly positive and
/// feasible within `feas_tol` (throws NonPositiveBeliefError /
/// InfeasibleInputError otherwise).
CriticalityReport criticality_residual(const ASpecification& spec, const BeliefFamily& q,
                                       const HamiltonianFamily& h, double feas_tol = 1e-8);

/// Same test against marginalization constraints of a region skeleton.
CriticalityReport criticality_residual(const GSkeleton& skel, const BeliefFamily& q,
                                       const HamiltonianFamily& h, double feas_tol = 1e-8);

}  // namespace csm
