#include "csm/free_energy.hpp"

#include <cmath>

#include "csm/errors.hpp"

namespace csm {

HamiltonianFamily zero_hamiltonians(const std::vector<FiniteSpace>& spaces, double beta) {
    HamiltonianFamily h;
    h.beta = beta;
    for (const auto& s : spaces) h.h.emplace_back(static_cast<std::size_t>(s.size()), 0.0);
    return h;
}

std::vector<double> fe_vector(const BeliefFamily& q, const HamiltonianFamily& h) {
    if (q.size() != h.h.size()) throw SpaceMismatchError("fe_vector: family sizes differ");
    std::vector<double> fe(q.size());
    for (std::size_t a = 0; a < q.size(); ++a) {
        if (q[a].p.size() != h.h[a].size())
            throw SpaceMismatchError("fe_vector: element " + std::to_string(a) + " sizes differ");
        double energy = 0;
        for (std::size_t w = 0; w < q[a].p.size(); ++w) energy += q[a].p[w] * h.beta * h.h[a][w];
        fe[a] = energy - entropy(q[a]);
    }
    return fe;
}

double generalized_bethe(const BeliefFamily& q, const HamiltonianFamily& h,
                         const std::vector<long long>& c) {
    auto fe = fe_vector(q, h);
    if (fe.size() != c.size()) throw DimensionMismatchError("generalized_bethe: coefficient count mismatch");
    double total = 0;
    for (std::size_t a = 0; a < fe.size(); ++a) total += static_cast<double>(c[a]) * fe[a];
    return total;
}

double gb_entropy(const BeliefFamily& q, const std::vector<long long>& c) {
    if (q.size() != c.size()) throw DimensionMismatchError("gb_entropy: coefficient count mismatch");
    double total = 0;
    for (std::size_t a = 0; a < q.size(); ++a) total += static_cast<double>(c[a]) * entropy(q[a]);
    return total;
}

DualVector fe_gradient(const BeliefFamily& q, const HamiltonianFamily& h, double zero_tol) {
    if (q.size() != h.h.size()) throw SpaceMismatchError("fe_gradient: family sizes differ");
    DualVector grad(q.size());
    for (std::size_t a = 0; a < q.size(); ++a) {
        grad[a].resize(q[a].p.size());
        for (std::size_t w = 0; w < q[a].p.size(); ++w) {
            double p = q[a].p[w];
            if (p <= zero_tol)
                throw NonPositiveBeliefError("fe_gradient: belief entry at or below zero tolerance");
            grad[a][w] = h.beta * h.h[a][w] + std::log(std::max(p, 1e-300)) + 1.0;
        }
    }
    return grad;
}

std::vector<std::vector<double>> functor_transform(const GSkeleton& skel, const MobiusTable& table,
                                                   const std::vector<std::vector<double>>& v,
                                                   TransformDirection direction,
                                                   TransformVariance variance) {
    const auto& poset = skel.poset;
    if (static_cast<int>(v.size()) != poset.size())
        throw DimensionMismatchError("functor_transform: one vector per element required");
    for (int a = 0; a < poset.size(); ++a)
        if (static_cast<int>(v[static_cast<std::size_t>(a)].size()) != skel.space_size(a))
            throw DimensionMismatchError("functor_transform: vector size mismatch at element " +
                                         poset.name(a));
    auto coeff = [&](int upper, int lower) -> double {
        return direction == TransformDirection::Zeta ? 1.0 : static_cast<double>(table.mu(upper, lower));
    };
    std::vector<std::vector<double>> out(v.size());
    for (std::size_t a = 0; a < v.size(); ++a) out[a].assign(v[a].size(), 0.0);

    if (variance == TransformVariance::FunctionsUp) {
        for (int a = 0; a < poset.size(); ++a)
            for (int b : poset.down_set(a)) {
                const double w = coeff(a, b);
                if (b == a) {
                    for (int i = 0; i < skel.space_size(a); ++i)
                        out[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)] +=
                            w * v[static_cast<std::size_t>(b)][static_cast<std::size_t>(i)];
                } else {
                    auto m = skel.down_map(a, b);
                    for (int i = 0; i < skel.space_size(a); ++i)
                        out[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)] +=
                            w * v[static_cast<std::size_t>(b)][static_cast<std::size_t>(m[static_cast<std::size_t>(i)])];
                }
            }
    } else {
        for (int b = 0; b < poset.size(); ++b)
            for (int a : poset.up_set(b)) {
                const double w = coeff(a, b);
                if (a == b) {
                    for (int i = 0; i < skel.space_size(b); ++i)
                        out[static_cast<std::size_t>(b)][static_cast<std::size_t>(i)] +=
                            w * v[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)];
                } else {
                    auto m = skel.down_map(a, b);
                    for (int i = 0; i < skel.space_size(a); ++i)
                        out[static_cast<std::size_t>(b)][static_cast<std::size_t>(m[static_cast<std::size_t>(i)])] +=
                            w * v[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)];
                }
            }
    }
    return out;
}

std::vector<std::vector<double>> functor_transform(const ASpecification& spec, const MobiusTable& table,
                                                   const std::vector<std::vector<double>>& v,
                                                   TransformDirection direction,
                                                   TransformVariance variance) {
    return functor_transform(skeleton_of(spec), table, v, direction, variance);
}

namespace {

Eigen::MatrixXd tangent_basis(const Eigen::MatrixXd& a) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
    const double cutoff = svd.singularValues().size() == 0
                              ? 0.0
                              : svd.singularValues()(0) * 1e-12 + 1e-300;
    int rank = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > cutoff) ++rank;
    const Eigen::MatrixXd& v = svd.matrixV();
    return v.rightCols(v.cols() - rank);
}

}  // namespace

CriticalityReport criticality_report(const GSkeleton& skel, const MobiusTable& table,
                                     const EqualitySystem& sys, const BeliefFamily& q,
                                     const HamiltonianFamily& h) {
    CriticalityReport report;
    const auto c = counting_coefficients(skel.poset, table);
    DualVector phi = fe_gradient(q, h);

    Eigen::VectorXd x = stack_family(q, sys.offsets);
    report.feasibility_residual = (sys.A * x - sys.b).cwiseAbs().maxCoeff();

    Eigen::VectorXd g(sys.num_vars());
    Eigen::VectorXd phi_flat(sys.num_vars());
    for (std::size_t a = 0; a < q.size(); ++a)
        for (std::size_t w = 0; w < q[a].p.size(); ++w) {
            g(sys.offsets[a] + static_cast<int>(w)) = static_cast<double>(c[a]) * phi[a][w];
            phi_flat(sys.offsets[a] + static_cast<int>(w)) = phi[a][w];
        }

    Eigen::MatrixXd tangent = tangent_basis(sys.A);
    if (tangent.cols() == 0) {
        report.projected_residual = 0;
        report.mobius_residual = 0;
        report.route_agreement = 0;
        return report;
    }
    Eigen::VectorXd projected = tangent * (tangent.transpose() * g);
    report.projected_residual = projected.cwiseAbs().maxCoeff();

    // Moebius route: pair the raw differential with the Moebius pushdown
    // of each tangent direction; on G-compatible tangents this is the same
    // functional as the weighted gradient.
    double mobius = 0, agreement = 0;
    for (int k = 0; k < tangent.cols(); ++k) {
        std::vector<std::vector<double>> t(q.size());
        for (std::size_t a = 0; a < q.size(); ++a) {
            t[a].resize(q[a].p.size());
            for (std::size_t w = 0; w < q[a].p.size(); ++w)
                t[a][w] = tangent(sys.offsets[a] + static_cast<int>(w), k);
        }
        auto td = functor_transform(skel, table, t, TransformDirection::Mobius,
                                    TransformVariance::MeasuresDown);
        double pairing = 0;
        for (std::size_t a = 0; a < q.size(); ++a)
            for (std::size_t w = 0; w < q[a].p.size(); ++w) pairing += phi[a][w] * td[a][w];
        double direct = g.dot(tangent.col(k));
        mobius = std::max(mobius, std::abs(pairing));
        agreement = std::max(agreement, std::abs(pairing - direct));
    }
    report.mobius_residual = mobius;
    report.route_agreement = agreement;
    return report;
}

CriticalityReport criticality_residual(const ASpecification& spec, const BeliefFamily& q,
                                       const HamiltonianFamily& h, double feas_tol) {
    GSkeleton skel = skeleton_of(spec);
    MobiusTable table(spec.poset());
    CriticalityReport report = criticality_report(skel, table, section_equations(spec), q, h);
    if (report.feasibility_residual > feas_tol)
        throw InfeasibleInputError("criticality_residual: beliefs violate the section constraints by " +
                                   std::to_string(report.feasibility_residual));
    return report;
}

CriticalityReport criticality_residual(const GSkeleton& skel, const BeliefFamily& q,
                                       const HamiltonianFamily& h, double feas_tol) {
    MobiusTable table(skel.poset);
    CriticalityReport report = criticality_report(skel, table, marginalization_equations(skel), q, h);
    if (report.feasibility_residual > feas_tol)
        throw InfeasibleInputError("criticality_residual: beliefs violate the marginal constraints by " +
                                   std::to_string(report.feasibility_residual));
    return report;
}

}  // namespace csm
