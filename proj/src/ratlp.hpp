#pragma once

// Exact rational linear algebra for the polytope solver: feasibility with
// Farkas certificates (phase-1 simplex, Bland's rule) and exhaustive basic
// feasible solution enumeration. Desk scale only.

#include <cstddef>
#include <vector>

#include "csm/rational.hpp"

namespace csm::detail {

struct RatSystem {
    int rows = 0;
    int cols = 0;
    std::vector<Rational> a;  // row-major
    std::vector<Rational> b;

    Rational& at(int r, int c) { return a[static_cast<std::size_t>(r) * cols + static_cast<std::size_t>(c)]; }
    const Rational& at(int r, int c) const {
        return a[static_cast<std::size_t>(r) * cols + static_cast<std::size_t>(c)];
    }
};

struct FeasibilityResult {
    bool feasible = false;
    std::vector<Rational> x;       // a feasible point when feasible
    std::vector<Rational> farkas;  // y with y^T A <= 0 and y^T b > 0 otherwise
};

/// Decides {x >= 0 : A x = b} by phase-1 simplex. Exact; certificate is
/// re-verified before returning.
FeasibilityResult feasibility(const RatSystem& sys);

/// Rank of the matrix over the rationals (destructive copy inside).
int rational_rank(const RatSystem& sys);

/// Reduces the system to an equivalent one with independent rows.
/// Returns false when elimination exposes an inconsistent row 0 = c != 0.
bool independent_rows(const RatSystem& sys, RatSystem& out);

/// All vertices (basic feasible solutions) of {x >= 0 : A x = b},
/// deduplicated and sorted. Throws TooLargeError past `leaf_cap` basis
/// candidates.
std::vector<std::vector<Rational>> enumerate_vertices(const RatSystem& sys,
                                                      std::size_t leaf_cap = 4000000);

/// Rank over the rationals of the differences (v_i - v_0).
int affine_rank(const std::vector<std::vector<Rational>>& points);

}  // namespace csm::detail
