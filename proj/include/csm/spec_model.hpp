#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "csm/poset.hpp"
#include "csm/prob.hpp"
#include "csm/rational.hpp"

namespace csm {

/// The pair (G, F) over a finite poset: per element a space G(a); for each
/// comparable pair b <= a a down map G(a) -> G(b) (stored as an outcome
/// index array, never as a kernel) and an up kernel G(b) -> G(a). The
/// section axiom forces each kernel row onto its fiber under the down map.
///
/// Kernels built from exact data carry an exact rational shadow used by
/// the polytope solver; the double view is what everything else consumes.
class ASpecification {
public:
    ASpecification(FinitePoset poset, std::vector<FiniteSpace> spaces);

    const FinitePoset& poset() const { return poset_; }
    const FiniteSpace& space(int a) const { return spaces_[static_cast<std::size_t>(a)]; }
    int space_size(int a) const { return spaces_[static_cast<std::size_t>(a)].size(); }
    const std::vector<FiniteSpace>& spaces() const { return spaces_; }

    void set_down_map(int upper, int lower, std::vector<int> map);
    void set_up_kernel(int lower, int upper, Kernel k);
    void set_up_kernel_exact(int lower, int upper, std::vector<Rational> entries);

    /// Derives every missing non-cover leg by composing cover legs along a
    /// fixed chain. Path independence is what validation checks afterwards.
    void fill_composite_legs();

    bool has_down_map(int upper, int lower) const;
    std::span<const int> down_map(int upper, int lower) const;  // identity allowed (upper == lower)
    bool has_up_kernel(int lower, int upper) const;
    const Kernel& up_kernel(int lower, int upper) const;
    bool has_exact_kernel(int lower, int upper) const;
    std::span<const Rational> exact_kernel(int lower, int upper) const;
    /// Exact entries when available, otherwise the exact image of the doubles.
    std::vector<Rational> kernel_as_rational(int lower, int upper) const;

private:
    FinitePoset poset_;
    std::vector<FiniteSpace> spaces_;
    std::map<std::pair<int, int>, std::vector<int>> down_;          // (upper, lower)
    std::map<std::pair<int, int>, Kernel> up_;                      // (lower, upper)
    std::map<std::pair<int, int>, std::vector<Rational>> up_exact_;  // (lower, upper)
    mutable std::map<int, std::vector<int>> identity_maps_;
};

struct ValidationIssue {
    std::string code;    // e.g. "section-axiom", "G-functoriality"
    std::string detail;  // witnessing pair / outcome
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    std::vector<std::string> warnings;  // e.g. non-surjective down maps
    bool ok() const { return issues.empty(); }
    std::string summary() const;
};

/// Checks identity/presence of legs, G functoriality (exact), F
/// functoriality (1e-9 entrywise) and the section axiom G o F = id (1e-9).
ValidationReport validate_specification(const ASpecification& spec);

/// F > 0: every kernel row is strictly positive on its fiber.
bool strict_positivity(const ASpecification& spec);

/// Witness of projectivity: per element a summand dimension, plus column
/// bases embedding each summand into the observables of every element
/// above it. Bases may be absent when only the dimensions are known.
struct ProjectiveDecomposition {
    std::vector<int> dims;
    std::map<std::pair<int, int>, Eigen::MatrixXd> basis;  // (element, summand) -> |G(element)| x dims[summand]
    bool has_bases() const { return !basis.empty(); }
};

struct DecompositionCheck {
    bool ok = true;
    std::string detail;
};

/// Verifies dimension counts, that concatenated bases span each
/// observable space, and that the expectation legs act as the identity
/// between the stored summand bases.
DecompositionCheck verify_decomposition(const ASpecification& spec,
                                        const ProjectiveDecomposition& dec, double tol = 1e-9);

struct BuiltSpec {
    ASpecification spec;
    std::optional<ProjectiveDecomposition> decomposition;
};

/// Two-element chain a0 <= a1 with G(a0) = X, G(a1) = X x Y, the first
/// projection down, and kernel rows (point mass at x) (x) q. Always
/// projective; the decomposition is attached.
BuiltSpec projective_spec_chain(const FiniteSpace& X, const FiniteSpace& Y, const Dist& q);

/// V-shaped poset b <= a >= c with G(a) = X_b x X_c and the two
/// projections down. `glue_bc` rows give the conditional on X_c per x_b,
/// `glue_cb` the conditional on X_b per x_c. The decomposition is
/// attached when the glue actually makes the presheaf projective.
BuiltSpec projective_spec_v(const FiniteSpace& Xb, const FiniteSpace& Xc, const Kernel& glue_bc,
                            const Kernel& glue_cb);

/// Variables with finite ranges plus regions (variable subsets) ordered by
/// inclusion; spaces are coordinate products, legs are projections.
struct RegionModel {
    std::vector<std::string> var_names;
    std::vector<int> var_sizes;
    std::vector<std::string> region_names;
    std::vector<std::vector<int>> region_vars;  // sorted variable indices
    FinitePoset poset;
    std::vector<FiniteSpace> spaces;

    FiniteSpace joint_space() const;
    /// Index map E_upper -> E_lower (lower's variables a subset of upper's).
    std::vector<int> projection(int upper, int lower) const;
    /// Index map joint space -> E_region.
    std::vector<int> projection_from_joint(int region) const;
};

RegionModel make_region_model(std::vector<std::string> var_names, std::vector<int> var_sizes,
                              std::vector<std::string> region_names,
                              std::vector<std::vector<int>> region_vars);

/// One marginalization consistency constraint per strictly comparable
/// pair: pushing the upper belief down must reproduce the lower one.
struct MarginalizationConstraint {
    int upper = 0;
    int lower = 0;
    std::vector<int> proj;  // index map E_upper -> E_lower
};

struct ConstraintFamily {
    FinitePoset poset;
    std::vector<FiniteSpace> spaces;
    std::vector<MarginalizationConstraint> constraints;
};

ConstraintFamily marginalization_model(const RegionModel& model);

/// Builds the conditional specification of a strictly positive joint over
/// the model's variables: down maps are coordinate projections, kernel
/// rows are exact joint conditionals P(w_a | proj(w_a) = w_b). The
/// resulting kernels carry exact rational entries, so the marginal family
/// of the joint is a section of the result exactly.
ASpecification conditional_spec_from_joint(const Dist& joint, const RegionModel& regions);

/// The common contravariant skeleton of specifications and region models:
/// poset, spaces and down maps. Message passing and the functor-level
/// Moebius machinery only ever need this much.
struct GSkeleton {
    FinitePoset poset;
    std::vector<FiniteSpace> spaces;
    std::map<std::pair<int, int>, std::vector<int>> down;  // (upper, lower), strict pairs

    std::span<const int> down_map(int upper, int lower) const;
    int space_size(int a) const { return spaces[static_cast<std::size_t>(a)].size(); }
};

GSkeleton skeleton_of(const ASpecification& spec);
GSkeleton skeleton_of(const RegionModel& model);

/// Dense equality system `A x = b` shared by the polytope assembler, the
/// criticality residual and the fixed-point verifier. Variables are the
/// concatenated belief entries in element order.
struct EqualitySystem {
    std::vector<int> offsets;  // per element, plus total at the end
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    std::vector<std::string> row_labels;

    int num_vars() const { return offsets.back(); }
};

/// Section rows F^b_a p_b - p_a = 0 over covering pairs plus one
/// normalization row per element.
EqualitySystem section_equations(const ASpecification& spec);
/// Pushforward rows over covering pairs plus normalization rows.
EqualitySystem marginalization_equations(const GSkeleton& skel);

/// Offsets for stacking one vector per element.
std::vector<int> layout_offsets(const std::vector<FiniteSpace>& spaces);

Eigen::VectorXd stack_family(const BeliefFamily& q, const std::vector<int>& offsets);

}  // namespace csm
