#include "csm/gibbs_exact.hpp"

#include <cmath>
#include <set>

#include "csm/errors.hpp"
#include "ratlp.hpp"

namespace csm {

SectionPolytope assemble_polytope(const ASpecification& spec) {
    SectionPolytope poly;
    poly.float_view = section_equations(spec);
    poly.offsets = poly.float_view.offsets;
    poly.row_labels = poly.float_view.row_labels;
    poly.rows = static_cast<int>(poly.float_view.A.rows());

    const int n = poly.num_vars();
    poly.a_exact.assign(static_cast<std::size_t>(poly.rows) * n, Rational(0));
    poly.b_exact.assign(static_cast<std::size_t>(poly.rows), Rational(0));
    int row = 0;
    for (auto [b, a] : spec.poset().cover_pairs()) {
        auto exact = spec.kernel_as_rational(b, a);
        const int nb = spec.space_size(b), na = spec.space_size(a);
        for (int wa = 0; wa < na; ++wa, ++row) {
            for (int wb = 0; wb < nb; ++wb)
                poly.a_exact[static_cast<std::size_t>(row) * n +
                             static_cast<std::size_t>(poly.offsets[static_cast<std::size_t>(b)] + wb)] =
                    exact[static_cast<std::size_t>(wb) * na + static_cast<std::size_t>(wa)];
            poly.a_exact[static_cast<std::size_t>(row) * n +
                         static_cast<std::size_t>(poly.offsets[static_cast<std::size_t>(a)] + wa)] -= 1;
        }
    }
    for (int a = 0; a < spec.poset().size(); ++a, ++row) {
        for (int w = 0; w < spec.space_size(a); ++w)
            poly.a_exact[static_cast<std::size_t>(row) * n +
                         static_cast<std::size_t>(poly.offsets[static_cast<std::size_t>(a)] + w)] = 1;
        poly.b_exact[static_cast<std::size_t>(row)] = 1;
    }
    return poly;
}

GibbsSetReport solve_gibbs(const ASpecification& spec) {
    SectionPolytope poly = assemble_polytope(spec);
    detail::RatSystem sys;
    sys.rows = poly.rows;
    sys.cols = poly.num_vars();
    sys.a = poly.a_exact;
    sys.b = poly.b_exact;

    GibbsSetReport report;
    report.vertices_exact = detail::enumerate_vertices(sys);
    if (report.vertices_exact.empty()) {
        report.feasible = false;
        report.affine_dimension = -1;
        auto feas = detail::feasibility(sys);
        if (feas.feasible)
            throw Error("internal inconsistency: no vertex found for a feasible bounded polytope");
        report.certificate = FarkasCertificate{feas.farkas, true};
        return report;
    }
    report.feasible = true;
    report.affine_dimension = detail::affine_rank(report.vertices_exact);
    for (const auto& v : report.vertices_exact) {
        BeliefFamily family;
        for (int a = 0; a < spec.poset().size(); ++a) {
            std::vector<double> p(static_cast<std::size_t>(spec.space_size(a)));
            for (int w = 0; w < spec.space_size(a); ++w)
                p[static_cast<std::size_t>(w)] =
                    to_double(v[static_cast<std::size_t>(poly.offsets[static_cast<std::size_t>(a)] + w)]);
            family.push_back(normalized_dist(spec.space(a), std::move(p)));
        }
        report.vertices.push_back(std::move(family));
    }
    // Cross-check each exact vertex under the float view; a discrepancy
    // means the double kernels drifted from the exact ones.
    double worst = 0;
    for (const auto& v : report.vertices_exact) {
        Eigen::VectorXd x(poly.num_vars());
        for (int j = 0; j < poly.num_vars(); ++j) x(j) = to_double(v[static_cast<std::size_t>(j)]);
        worst = std::max(worst, (poly.float_view.A * x - poly.float_view.b).cwiseAbs().maxCoeff());
    }
    if (worst > 1e-7)
        report.warnings.push_back("numerical-rank: float residual " + std::to_string(worst) +
                                  " on exact vertices; double and exact kernels disagree");
    return report;
}

ClassificationResult projective_classification_check(const ASpecification& spec,
                                                     const ProjectiveDecomposition& dec) {
    auto consistency = verify_decomposition(spec, dec);
    if (!consistency.ok) return {false, "decomposition invalid: " + consistency.detail};

    GibbsSetReport report = solve_gibbs(spec);
    auto minima = spec.poset().minimum_elements();
    if (!minima) {
        if (report.feasible)
            return {false, "a component lacks a minimum but the Gibbs set is nonempty"};
        if (!report.certificate || !report.certificate->verified)
            return {false, "empty Gibbs set without a verified certificate"};
        return {true, "empty as predicted, certificate verified"};
    }

    if (!report.feasible) return {false, "component minimums exist but the Gibbs set is empty"};
    long long expected_dim = 0, expected_vertices = 1;
    for (int m : *minima) {
        expected_dim += spec.space_size(m) - 1;
        expected_vertices *= spec.space_size(m);
    }
    if (report.affine_dimension != expected_dim)
        return {false, "affine dimension " + std::to_string(report.affine_dimension) + ", expected " +
                           std::to_string(expected_dim)};
    if (static_cast<long long>(report.vertices_exact.size()) != expected_vertices)
        return {false, std::to_string(report.vertices_exact.size()) + " vertices, expected " +
                           std::to_string(expected_vertices)};
    // Restriction to the component minimums must hit every tuple of point
    // masses exactly once.
    SectionPolytope poly = assemble_polytope(spec);
    std::set<std::vector<int>> seen;
    for (const auto& v : report.vertices_exact) {
        std::vector<int> restricted;
        for (int m : *minima) {
            int where = -1;
            for (int w = 0; w < spec.space_size(m); ++w) {
                const Rational& val =
                    v[static_cast<std::size_t>(poly.offsets[static_cast<std::size_t>(m)] + w)];
                if (val == 1) {
                    where = w;
                } else if (val != 0) {
                    return {false, "vertex restriction to '" + spec.poset().name(m) + "' is not a point mass"};
                }
            }
            if (where < 0) return {false, "vertex restriction has no unit mass"};
            restricted.push_back(where);
        }
        if (!seen.insert(restricted).second)
            return {false, "two vertices restrict to the same tuple of point masses"};
    }
    return {true, "product of simplices over the component minimums"};
}

}  // namespace csm
