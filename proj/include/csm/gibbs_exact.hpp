#pragma once

#include <optional>
#include <string>
#include <vector>

#include "csm/rational.hpp"
#include "csm/spec_model.hpp"

namespace csm {

/// Linear-constraint view of the Gibbs set: one probability vector per
/// poset element, section rows over covering pairs, one normalization row
/// per element, nonnegativity bounds. Carries an exact rational copy of
/// the system alongside the float rows.
struct SectionPolytope {
    std::vector<int> offsets;
    int rows = 0;
    std::vector<Rational> a_exact;  // row-major, rows x num_vars
    std::vector<Rational> b_exact;
    EqualitySystem float_view;
    std::vector<std::string> row_labels;

    int num_vars() const { return offsets.back(); }
};

SectionPolytope assemble_polytope(const ASpecification& spec);

struct FarkasCertificate {
    std::vector<Rational> y;  // y^T A <= 0 componentwise, y^T b > 0
    bool verified = false;
};

struct GibbsSetReport {
    bool feasible = false;
    int affine_dimension = -1;  // -1 for the empty set
    std::vector<BeliefFamily> vertices;
    std::vector<std::vector<Rational>> vertices_exact;  // stacked coordinates
    std::optional<FarkasCertificate> certificate;
    std::vector<std::string> warnings;
};

/// Exact feasibility, affine dimension and vertex set of the Gibbs
/// polytope (exhaustive basic-solution enumeration with rational pivots).
GibbsSetReport solve_gibbs(const ASpecification& spec);

struct ClassificationResult {
    bool ok = false;
    std::string detail;
};

/// Checks the projective dichotomy against solve_gibbs: no component
/// minimum means an empty Gibbs set; otherwise the set must be the
/// product of simplices over the component minimums (dimension count and
/// vertex bijection onto tuples of point masses).
ClassificationResult projective_classification_check(const ASpecification& spec,
                                                     const ProjectiveDecomposition& dec);

}  // namespace csm
