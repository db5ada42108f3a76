#pragma once

#include <functional>
#include <vector>

#include "csm/free_energy.hpp"
#include "csm/spec_model.hpp"

namespace csm {

/// A joint Boltzmann model: raw energy terms per region, summed through
/// the projections to give the global Hamiltonian.
struct JointModel {
    RegionModel regions;
    std::vector<std::vector<double>> terms;  // per region, on the region's space
    double beta = 1.0;
};

JointModel make_joint_model(RegionModel regions, std::vector<std::vector<double>> terms,
                            double beta = 1.0);

/// -ln sum_w exp(-beta sum_a term_a(w_a)) by full enumeration with a
/// max-shift; refuses joint spaces beyond 2^20 outcomes.
double exact_log_partition(const JointModel& model);

/// The joint Boltzmann distribution itself.
Dist boltzmann_joint(const JointModel& model);

/// Pushforward of the Boltzmann joint to every region.
BeliefFamily exact_marginals(const JointModel& model);

/// Region energies for message passing and the Bethe functional: each
/// region accumulates its own term plus the terms of everything below it
/// (pullback sum along the down maps). With these energies the Bethe
/// functional at the exact marginals of an acyclic model equals the Gibbs
/// free energy of the joint.
HamiltonianFamily region_energies(const JointModel& model);

/// All simplex-grid families (denominator = resolution) whose section
/// residual is at most 2/resolution. Deliberately naive; the test oracle
/// for the exact polytope solver. Refuses more than 6 grid dimensions.
std::vector<BeliefFamily> brute_force_sections(const ASpecification& spec, int resolution);

/// Central finite differences of an arbitrary functional of a family.
DualVector finite_diff_gradient(const std::function<double(const BeliefFamily&)>& functional,
                                const BeliefFamily& at, double step);

}  // namespace csm
