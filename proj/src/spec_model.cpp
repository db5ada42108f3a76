#include "csm/spec_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "csm/errors.hpp"

namespace csm {

namespace {

std::pair<int, int> ordered_pair(int x, int y) { return {x, y}; }

}  // namespace

ASpecification::ASpecification(FinitePoset poset, std::vector<FiniteSpace> spaces)
    : poset_(std::move(poset)), spaces_(std::move(spaces)) {
    if (static_cast<int>(spaces_.size()) != poset_.size())
        throw DimensionMismatchError("one space per poset element required");
}

void ASpecification::set_down_map(int upper, int lower, std::vector<int> map) {
    if (!poset_.less(lower, upper)) throw UnknownElementError("set_down_map: pair is not strictly comparable");
    if (static_cast<int>(map.size()) != space_size(upper))
        throw DimensionMismatchError("down map length must match the upper space");
    for (int img : map)
        if (img < 0 || img >= space_size(lower))
            throw DimensionMismatchError("down map image out of range");
    down_[ordered_pair(upper, lower)] = std::move(map);
}

void ASpecification::set_up_kernel(int lower, int upper, Kernel k) {
    if (!poset_.less(lower, upper)) throw UnknownElementError("set_up_kernel: pair is not strictly comparable");
    if (!(k.source == space(lower)) || !(k.target == space(upper)))
        throw SpaceMismatchError("up kernel spaces do not match the pair");
    up_[ordered_pair(lower, upper)] = std::move(k);
}

void ASpecification::set_up_kernel_exact(int lower, int upper, std::vector<Rational> entries) {
    if (entries.size() != static_cast<std::size_t>(space_size(lower)) * static_cast<std::size_t>(space_size(upper)))
        throw DimensionMismatchError("exact kernel entry count mismatch");
    up_exact_[ordered_pair(lower, upper)] = std::move(entries);
}

bool ASpecification::has_down_map(int upper, int lower) const {
    return upper == lower || down_.count(ordered_pair(upper, lower)) > 0;
}

std::span<const int> ASpecification::down_map(int upper, int lower) const {
    if (upper == lower) {
        auto it = identity_maps_.find(upper);
        if (it == identity_maps_.end()) {
            std::vector<int> id(static_cast<std::size_t>(space_size(upper)));
            for (std::size_t i = 0; i < id.size(); ++i) id[i] = static_cast<int>(i);
            it = identity_maps_.emplace(upper, std::move(id)).first;
        }
        return it->second;
    }
    auto it = down_.find(ordered_pair(upper, lower));
    if (it == down_.end())
        throw UnknownElementError("missing down map " + poset_.name(upper) + " -> " + poset_.name(lower));
    return it->second;
}

bool ASpecification::has_up_kernel(int lower, int upper) const {
    return up_.count(ordered_pair(lower, upper)) > 0;
}

const Kernel& ASpecification::up_kernel(int lower, int upper) const {
    auto it = up_.find(ordered_pair(lower, upper));
    if (it == up_.end())
        throw UnknownElementError("missing up kernel " + poset_.name(lower) + " -> " + poset_.name(upper));
    return it->second;
}

bool ASpecification::has_exact_kernel(int lower, int upper) const {
    return up_exact_.count(ordered_pair(lower, upper)) > 0;
}

std::span<const Rational> ASpecification::exact_kernel(int lower, int upper) const {
    auto it = up_exact_.find(ordered_pair(lower, upper));
    if (it == up_exact_.end())
        throw UnknownElementError("missing exact kernel " + poset_.name(lower) + " -> " + poset_.name(upper));
    return it->second;
}

std::vector<Rational> ASpecification::kernel_as_rational(int lower, int upper) const {
    if (has_exact_kernel(lower, upper)) {
        auto s = exact_kernel(lower, upper);
        return std::vector<Rational>(s.begin(), s.end());
    }
    return rationalize(up_kernel(lower, upper).k);
}

void ASpecification::fill_composite_legs() {
    auto pairs = poset_.comparable_pairs();
    std::stable_sort(pairs.begin(), pairs.end(), [this](const auto& x, const auto& y) {
        return poset_.interval(x.first, x.second).size() < poset_.interval(y.first, y.second).size();
    });
    for (auto [b, a] : pairs) {
        bool have_down = has_down_map(a, b);
        bool have_up = has_up_kernel(b, a);
        if (have_down && have_up) continue;
        int mid = -1;
        for (int c : poset_.interval(b, a)) {
            if (c == a || c == b) continue;
            if (has_down_map(a, c) && has_down_map(c, b) && has_up_kernel(b, c) && has_up_kernel(c, a)) {
                mid = c;
                break;
            }
        }
        if (mid < 0) continue;  // validation will report the hole
        if (!have_down) {
            auto upper_leg = down_map(a, mid);
            auto lower_leg = down_map(mid, b);
            std::vector<int> composite(upper_leg.size());
            for (std::size_t i = 0; i < upper_leg.size(); ++i)
                composite[i] = lower_leg[static_cast<std::size_t>(upper_leg[i])];
            set_down_map(a, b, std::move(composite));
        }
        if (!have_up) {
            set_up_kernel(b, a, compose_kernels(up_kernel(b, mid), up_kernel(mid, a)));
            if (has_exact_kernel(b, mid) && has_exact_kernel(mid, a)) {
                const auto k0 = exact_kernel(b, mid);
                const auto k1 = exact_kernel(mid, a);
                const int nb = space_size(b), nm = space_size(mid), na = space_size(a);
                std::vector<Rational> prod(static_cast<std::size_t>(nb) * static_cast<std::size_t>(na), Rational(0));
                for (int r = 0; r < nb; ++r)
                    for (int m = 0; m < nm; ++m) {
                        const Rational& w = k0[static_cast<std::size_t>(r) * nm + static_cast<std::size_t>(m)];
                        if (w == 0) continue;
                        for (int col = 0; col < na; ++col)
                            prod[static_cast<std::size_t>(r) * na + static_cast<std::size_t>(col)] +=
                                w * k1[static_cast<std::size_t>(m) * na + static_cast<std::size_t>(col)];
                    }
                set_up_kernel_exact(b, a, std::move(prod));
            }
        }
    }
}

std::string ValidationReport::summary() const {
    std::ostringstream os;
    if (ok())
        os << "valid (" << warnings.size() << " warning(s))";
    else
        os << issues.size() << " issue(s)";
    return os.str();
}

ValidationReport validate_specification(const ASpecification& spec) {
    ValidationReport report;
    const auto& poset = spec.poset();
    auto issue = [&](const std::string& code, const std::string& detail) {
        report.issues.push_back({code, detail});
    };

    for (auto [b, a] : poset.comparable_pairs()) {
        const std::string pair_name = poset.name(b) + " <= " + poset.name(a);
        if (!spec.has_down_map(a, b)) {
            issue("missing-leg", "down map absent for " + pair_name);
            continue;
        }
        if (!spec.has_up_kernel(b, a)) {
            issue("missing-leg", "up kernel absent for " + pair_name);
            continue;
        }
        auto g = spec.down_map(a, b);
        const Kernel& f = spec.up_kernel(b, a);
        // Section axiom: each row is a probability supported on its fiber.
        for (int wb = 0; wb < spec.space_size(b); ++wb) {
            double fiber_mass = 0, off_mass = 0;
            for (int wa = 0; wa < spec.space_size(a); ++wa) {
                if (g[static_cast<std::size_t>(wa)] == wb)
                    fiber_mass += f.at(wb, wa);
                else
                    off_mass += f.at(wb, wa);
            }
            if (off_mass > 1e-9 || std::abs(fiber_mass - 1.0) > 1e-9) {
                issue("section-axiom", pair_name + ": row '" + spec.space(b).outcomes[static_cast<std::size_t>(wb)] +
                                           "' has off-fiber mass " + std::to_string(off_mass));
                break;
            }
        }
        // Surjectivity is not an axiom; report it as a warning only.
        std::vector<bool> hit(static_cast<std::size_t>(spec.space_size(b)), false);
        for (int img : g) hit[static_cast<std::size_t>(img)] = true;
        if (std::find(hit.begin(), hit.end(), false) != hit.end())
            report.warnings.push_back("down map not surjective for " + pair_name);
    }

    // Functoriality over all strict triples.
    for (int b = 0; b < poset.size(); ++b)
        for (int m = 0; m < poset.size(); ++m)
            for (int a = 0; a < poset.size(); ++a) {
                if (!(poset.less(b, m) && poset.less(m, a))) continue;
                if (!spec.has_down_map(a, b) || !spec.has_down_map(a, m) || !spec.has_down_map(m, b)) continue;
                auto gam = spec.down_map(a, m);
                auto gmb = spec.down_map(m, b);
                auto gab = spec.down_map(a, b);
                for (int wa = 0; wa < spec.space_size(a); ++wa)
                    if (gab[static_cast<std::size_t>(wa)] !=
                        gmb[static_cast<std::size_t>(gam[static_cast<std::size_t>(wa)])]) {
                        issue("G-functoriality", poset.name(b) + " <= " + poset.name(m) + " <= " + poset.name(a) +
                                                     " at outcome " + spec.space(a).outcomes[static_cast<std::size_t>(wa)]);
                        break;
                    }
                if (!spec.has_up_kernel(b, m) || !spec.has_up_kernel(m, a) || !spec.has_up_kernel(b, a)) continue;
                Kernel composite = compose_kernels(spec.up_kernel(b, m), spec.up_kernel(m, a));
                const Kernel& direct = spec.up_kernel(b, a);
                double worst = 0;
                for (std::size_t i = 0; i < direct.k.size(); ++i)
                    worst = std::max(worst, std::abs(direct.k[i] - composite.k[i]));
                if (worst > 1e-9)
                    issue("F-functoriality", poset.name(b) + " <= " + poset.name(m) + " <= " + poset.name(a) +
                                                 " deviates by " + std::to_string(worst));
            }
    return report;
}

bool strict_positivity(const ASpecification& spec) {
    for (auto [b, a] : spec.poset().comparable_pairs()) {
        if (!spec.has_down_map(a, b) || !spec.has_up_kernel(b, a)) return false;
        auto g = spec.down_map(a, b);
        const Kernel& f = spec.up_kernel(b, a);
        for (int wa = 0; wa < spec.space_size(a); ++wa)
            if (f.at(g[static_cast<std::size_t>(wa)], wa) <= 0) return false;
    }
    return true;
}

namespace {

// Expectation matrix of the up kernel: sends observables on G(a) to
// observables on G(b), (M f)(w_b) = sum_wa F(w_a | w_b) f(w_a).
Eigen::MatrixXd expectation_matrix(const ASpecification& spec, int lower, int upper) {
    const Kernel& f = spec.up_kernel(lower, upper);
    Eigen::MatrixXd m(spec.space_size(lower), spec.space_size(upper));
    for (int r = 0; r < spec.space_size(lower); ++r)
        for (int c = 0; c < spec.space_size(upper); ++c) m(r, c) = f.at(r, c);
    return m;
}

}  // namespace

DecompositionCheck verify_decomposition(const ASpecification& spec, const ProjectiveDecomposition& dec,
                                        double tol) {
    const auto& poset = spec.poset();
    if (static_cast<int>(dec.dims.size()) != poset.size())
        return {false, "one summand dimension per element required"};
    for (int a = 0; a < poset.size(); ++a) {
        int total = 0;
        for (int c : poset.down_set(a)) total += dec.dims[static_cast<std::size_t>(c)];
        if (total != spec.space_size(a))
            return {false, "summand dimensions below '" + poset.name(a) + "' sum to " + std::to_string(total) +
                               ", expected " + std::to_string(spec.space_size(a))};
    }
    if (!dec.has_bases()) return {true, "dimensions only"};

    for (int a = 0; a < poset.size(); ++a) {
        Eigen::MatrixXd all(spec.space_size(a), spec.space_size(a));
        int col = 0;
        for (int c : poset.down_set(a)) {
            if (dec.dims[static_cast<std::size_t>(c)] == 0) continue;
            auto it = dec.basis.find({a, c});
            if (it == dec.basis.end())
                return {false, "missing basis for summand '" + poset.name(c) + "' at '" + poset.name(a) + "'"};
            if (it->second.rows() != spec.space_size(a) ||
                it->second.cols() != dec.dims[static_cast<std::size_t>(c)])
                return {false, "basis shape mismatch at '" + poset.name(a) + "'"};
            all.block(0, col, spec.space_size(a), it->second.cols()) = it->second;
            col += static_cast<int>(it->second.cols());
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(all);
        if (lu.rank() != spec.space_size(a))
            return {false, "summand bases do not span the observables of '" + poset.name(a) + "'"};
    }
    for (auto [b, a] : poset.comparable_pairs()) {
        Eigen::MatrixXd pi = expectation_matrix(spec, b, a);
        for (int c : poset.down_set(a)) {
            if (dec.dims[static_cast<std::size_t>(c)] == 0) continue;
            const Eigen::MatrixXd& up = dec.basis.at({a, c});
            if (poset.leq(c, b)) {
                const Eigen::MatrixXd& low = dec.basis.at({b, c});
                double err = (pi * up - low).cwiseAbs().maxCoeff();
                if (err > tol)
                    return {false, "summand '" + poset.name(c) + "' is not carried identically from '" +
                                       poset.name(a) + "' to '" + poset.name(b) + "' (err " + std::to_string(err) + ")"};
            } else {
                double err = (pi * up).cwiseAbs().maxCoeff();
                if (err > tol)
                    return {false, "summand '" + poset.name(c) + "' does not vanish under the leg to '" +
                                       poset.name(b) + "' (err " + std::to_string(err) + ")"};
            }
        }
    }
    return {true, ""};
}

BuiltSpec projective_spec_chain(const FiniteSpace& X, const FiniteSpace& Y, const Dist& q) {
    if (!(q.space == Y)) throw SpaceMismatchError("projective_spec_chain: q must live on Y");
    FinitePoset poset = FinitePoset::from_pairs({"a0", "a1"}, {{"a0", "a1"}});
    FiniteSpace XY = product_space({X, Y});
    ASpecification spec(poset, {X, XY});
    const int nx = X.size(), ny = Y.size();

    std::vector<int> proj(static_cast<std::size_t>(nx * ny));
    for (int i = 0; i < nx * ny; ++i) proj[static_cast<std::size_t>(i)] = i / ny;
    spec.set_down_map(1, 0, proj);

    std::vector<double> rows(static_cast<std::size_t>(nx) * static_cast<std::size_t>(nx * ny), 0.0);
    std::vector<Rational> rows_exact(rows.size(), Rational(0));
    for (int x = 0; x < nx; ++x)
        for (int y = 0; y < ny; ++y) {
            rows[static_cast<std::size_t>(x) * static_cast<std::size_t>(nx * ny) +
                 static_cast<std::size_t>(x * ny + y)] = q[y];
            rows_exact[static_cast<std::size_t>(x) * static_cast<std::size_t>(nx * ny) +
                       static_cast<std::size_t>(x * ny + y)] = rational_from_double(q[y]);
        }
    spec.set_up_kernel(0, 1, make_kernel(X, XY, rows));
    spec.set_up_kernel_exact(0, 1, std::move(rows_exact));

    ProjectiveDecomposition dec;
    dec.dims = {nx, nx * (ny - 1)};
    dec.basis[{0, 0}] = Eigen::MatrixXd::Identity(nx, nx);
    Eigen::MatrixXd pullback = Eigen::MatrixXd::Zero(nx * ny, nx);
    for (int x = 0; x < nx; ++x)
        for (int y = 0; y < ny; ++y) pullback(x * ny + y, x) = 1.0;
    dec.basis[{1, 0}] = pullback;
    if (ny > 1) {
        Eigen::MatrixXd pi(nx, nx * ny);
        pi.setZero();
        for (int x = 0; x < nx; ++x)
            for (int y = 0; y < ny; ++y) pi(x, x * ny + y) = q[y];
        Eigen::FullPivLU<Eigen::MatrixXd> lu(pi);
        dec.basis[{1, 1}] = lu.kernel();
    }
    return BuiltSpec{std::move(spec), std::move(dec)};
}

BuiltSpec projective_spec_v(const FiniteSpace& Xb, const FiniteSpace& Xc, const Kernel& glue_bc,
                            const Kernel& glue_cb) {
    if (!(glue_bc.source == Xb) || !(glue_bc.target == Xc))
        throw SpaceMismatchError("projective_spec_v: glue_bc must map Xb to Xc");
    if (!(glue_cb.source == Xc) || !(glue_cb.target == Xb))
        throw SpaceMismatchError("projective_spec_v: glue_cb must map Xc to Xb");
    FinitePoset poset = FinitePoset::from_pairs({"b", "c", "a"}, {{"b", "a"}, {"c", "a"}});
    FiniteSpace top = product_space({Xb, Xc});
    ASpecification spec(poset, {Xb, Xc, top});
    const int nb = Xb.size(), nc = Xc.size(), n = nb * nc;

    std::vector<int> proj_b(static_cast<std::size_t>(n)), proj_c(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        proj_b[static_cast<std::size_t>(i)] = i / nc;
        proj_c[static_cast<std::size_t>(i)] = i % nc;
    }
    spec.set_down_map(2, 0, proj_b);
    spec.set_down_map(2, 1, proj_c);

    std::vector<double> fb(static_cast<std::size_t>(nb) * static_cast<std::size_t>(n), 0.0);
    std::vector<Rational> fb_exact(fb.size(), Rational(0));
    for (int xb = 0; xb < nb; ++xb)
        for (int xc = 0; xc < nc; ++xc) {
            fb[static_cast<std::size_t>(xb) * static_cast<std::size_t>(n) + static_cast<std::size_t>(xb * nc + xc)] =
                glue_bc.at(xb, xc);
            fb_exact[static_cast<std::size_t>(xb) * static_cast<std::size_t>(n) +
                     static_cast<std::size_t>(xb * nc + xc)] = rational_from_double(glue_bc.at(xb, xc));
        }
    spec.set_up_kernel(0, 2, make_kernel(Xb, top, fb));
    spec.set_up_kernel_exact(0, 2, std::move(fb_exact));

    std::vector<double> fc(static_cast<std::size_t>(nc) * static_cast<std::size_t>(n), 0.0);
    std::vector<Rational> fc_exact(fc.size(), Rational(0));
    for (int xc = 0; xc < nc; ++xc)
        for (int xb = 0; xb < nb; ++xb) {
            fc[static_cast<std::size_t>(xc) * static_cast<std::size_t>(n) + static_cast<std::size_t>(xb * nc + xc)] =
                glue_cb.at(xc, xb);
            fc_exact[static_cast<std::size_t>(xc) * static_cast<std::size_t>(n) +
                     static_cast<std::size_t>(xb * nc + xc)] = rational_from_double(glue_cb.at(xc, xb));
        }
    spec.set_up_kernel(1, 2, make_kernel(Xc, top, fc));
    spec.set_up_kernel_exact(1, 2, std::move(fc_exact));

    // Try to realize the observable presheaf as corner summands: the b and
    // c summands must sit inside the kernels of the opposite legs and map
    // isomorphically under their own legs.
    BuiltSpec out{std::move(spec), std::nullopt};
    Eigen::MatrixXd mb = expectation_matrix(out.spec, 0, 2);
    Eigen::MatrixXd mc = expectation_matrix(out.spec, 1, 2);
    auto right_inverse_within = [](const Eigen::MatrixXd& leg, const Eigen::MatrixXd& subspace)
        -> std::optional<Eigen::MatrixXd> {
        if (subspace.cols() == 0) return std::nullopt;
        Eigen::MatrixXd reduced = leg * subspace;  // rows x dim(subspace)
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(reduced);
        if (cod.rank() != leg.rows()) return std::nullopt;
        Eigen::MatrixXd w = cod.solve(Eigen::MatrixXd::Identity(leg.rows(), leg.rows()));
        Eigen::MatrixXd embed = subspace * w;
        if ((leg * embed - Eigen::MatrixXd::Identity(leg.rows(), leg.rows())).cwiseAbs().maxCoeff() > 1e-9)
            return std::nullopt;
        return embed;
    };
    Eigen::FullPivLU<Eigen::MatrixXd> lu_c(mc), lu_b(mb);
    auto embed_b = right_inverse_within(mb, lu_c.kernel());
    auto embed_c = right_inverse_within(mc, lu_b.kernel());
    Eigen::MatrixXd both(nb + nc, n);
    both << mb, mc;
    Eigen::FullPivLU<Eigen::MatrixXd> lu_both(both);
    Eigen::MatrixXd top_kernel = lu_both.kernel();
    int top_dim = n - nb - nc;
    if (embed_b && embed_c && top_dim >= 0 &&
        (top_dim == 0 || static_cast<int>(top_kernel.cols()) == top_dim)) {
        ProjectiveDecomposition dec;
        dec.dims = {nb, nc, top_dim};
        dec.basis[{0, 0}] = Eigen::MatrixXd::Identity(nb, nb);
        dec.basis[{1, 1}] = Eigen::MatrixXd::Identity(nc, nc);
        dec.basis[{2, 0}] = *embed_b;
        dec.basis[{2, 1}] = *embed_c;
        if (top_dim > 0) dec.basis[{2, 2}] = top_kernel;
        if (verify_decomposition(out.spec, dec).ok) out.decomposition = std::move(dec);
    }
    return out;
}

FiniteSpace RegionModel::joint_space() const {
    std::vector<FiniteSpace> factors;
    factors.reserve(var_sizes.size());
    for (int s : var_sizes) factors.push_back(indexed_space(s));
    if (factors.empty()) return make_space({"*"});
    return product_space(factors);
}

namespace {

// Multi-radix strides for a sorted variable list, last variable fastest.
std::vector<long long> strides_for(const std::vector<int>& vars, const std::vector<int>& sizes) {
    std::vector<long long> strides(vars.size(), 1);
    for (std::size_t i = vars.size(); i-- > 1;)
        strides[i - 1] = strides[i] * sizes[static_cast<std::size_t>(vars[i])];
    return strides;
}

}  // namespace

std::vector<int> RegionModel::projection(int upper, int lower) const {
    const auto& uv = region_vars[static_cast<std::size_t>(upper)];
    const auto& lv = region_vars[static_cast<std::size_t>(lower)];
    auto ustr = strides_for(uv, var_sizes);
    auto lstr = strides_for(lv, var_sizes);
    // position of each lower var inside the upper list
    std::vector<int> pos;
    for (int v : lv) {
        auto it = std::find(uv.begin(), uv.end(), v);
        if (it == uv.end()) throw RegionNotNestedError("region '" + region_names[static_cast<std::size_t>(lower)] +
                                                       "' is not contained in '" +
                                                       region_names[static_cast<std::size_t>(upper)] + "'");
        pos.push_back(static_cast<int>(it - uv.begin()));
    }
    const int total = spaces[static_cast<std::size_t>(upper)].size();
    std::vector<int> map(static_cast<std::size_t>(total));
    for (int idx = 0; idx < total; ++idx) {
        long long rest = idx, low = 0;
        std::vector<int> digits(uv.size());
        for (std::size_t i = 0; i < uv.size(); ++i) {
            digits[i] = static_cast<int>(rest / ustr[i]);
            rest %= ustr[i];
        }
        for (std::size_t i = 0; i < lv.size(); ++i)
            low += digits[static_cast<std::size_t>(pos[i])] * lstr[i];
        map[static_cast<std::size_t>(idx)] = static_cast<int>(low);
    }
    return map;
}

std::vector<int> RegionModel::projection_from_joint(int region) const {
    std::vector<int> all(var_sizes.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    const auto& rv = region_vars[static_cast<std::size_t>(region)];
    auto astr = strides_for(all, var_sizes);
    auto rstr = strides_for(rv, var_sizes);
    long long total = 1;
    for (int s : var_sizes) total *= s;
    std::vector<int> map(static_cast<std::size_t>(total));
    for (long long idx = 0; idx < total; ++idx) {
        long long rest = idx, low = 0;
        for (std::size_t i = 0; i < all.size(); ++i) {
            long long digit = rest / astr[i];
            rest %= astr[i];
            auto it = std::find(rv.begin(), rv.end(), static_cast<int>(i));
            if (it != rv.end()) low += digit * rstr[static_cast<std::size_t>(it - rv.begin())];
        }
        map[static_cast<std::size_t>(idx)] = static_cast<int>(low);
    }
    return map;
}

RegionModel make_region_model(std::vector<std::string> var_names, std::vector<int> var_sizes,
                              std::vector<std::string> region_names,
                              std::vector<std::vector<int>> region_vars) {
    if (var_names.size() != var_sizes.size())
        throw DimensionMismatchError("one size per variable required");
    for (int s : var_sizes)
        if (s < 1) throw InvalidRegionError("variable ranges must have at least one value");
    if (region_names.size() != region_vars.size())
        throw DimensionMismatchError("one variable list per region required");
    RegionModel m;
    m.var_names = std::move(var_names);
    m.var_sizes = std::move(var_sizes);
    m.region_names = std::move(region_names);
    for (auto& rv : region_vars) {
        std::sort(rv.begin(), rv.end());
        if (std::adjacent_find(rv.begin(), rv.end()) != rv.end())
            throw InvalidRegionError("region repeats a variable");
        for (int v : rv)
            if (v < 0 || v >= static_cast<int>(m.var_sizes.size()))
                throw InvalidRegionError("region references an unknown variable");
    }
    m.region_vars = std::move(region_vars);

    std::vector<std::pair<std::string, std::string>> pairs;
    for (std::size_t i = 0; i < m.region_vars.size(); ++i)
        for (std::size_t j = 0; j < m.region_vars.size(); ++j) {
            if (i == j) continue;
            if (std::includes(m.region_vars[j].begin(), m.region_vars[j].end(), m.region_vars[i].begin(),
                              m.region_vars[i].end()) &&
                m.region_vars[i] != m.region_vars[j])
                pairs.emplace_back(m.region_names[i], m.region_names[j]);
            else if (m.region_vars[i] == m.region_vars[j])
                throw InvalidRegionError("two regions with identical variable sets");
        }
    m.poset = FinitePoset::from_pairs(m.region_names, pairs);

    for (const auto& rv : m.region_vars) {
        std::vector<FiniteSpace> factors;
        for (int v : rv) factors.push_back(indexed_space(m.var_sizes[static_cast<std::size_t>(v)]));
        m.spaces.push_back(factors.empty() ? make_space({"*"}) : product_space(factors));
    }
    return m;
}

ConstraintFamily marginalization_model(const RegionModel& model) {
    ConstraintFamily fam;
    fam.poset = model.poset;
    fam.spaces = model.spaces;
    for (auto [b, a] : model.poset.comparable_pairs())
        fam.constraints.push_back({a, b, model.projection(a, b)});
    return fam;
}

ASpecification conditional_spec_from_joint(const Dist& joint, const RegionModel& regions) {
    long long total = 1;
    for (int s : regions.var_sizes) total *= s;
    if (static_cast<long long>(joint.p.size()) != total)
        throw DimensionMismatchError("joint size does not match the model's variables");
    for (double x : joint.p)
        if (x <= 0) throw NonPositiveJointError("conditional_spec_from_joint needs a strictly positive joint");

    std::vector<Rational> jq = rationalize(joint.p);
    std::vector<std::vector<Rational>> marginals(regions.region_vars.size());
    for (std::size_t r = 0; r < regions.region_vars.size(); ++r) {
        auto proj = regions.projection_from_joint(static_cast<int>(r));
        marginals[r].assign(static_cast<std::size_t>(regions.spaces[r].size()), Rational(0));
        for (std::size_t i = 0; i < jq.size(); ++i) marginals[r][static_cast<std::size_t>(proj[i])] += jq[i];
    }

    ASpecification spec(regions.poset, regions.spaces);
    for (auto [b, a] : regions.poset.comparable_pairs()) {
        auto proj = regions.projection(a, b);
        spec.set_down_map(a, b, proj);
        const int nb = regions.spaces[static_cast<std::size_t>(b)].size();
        const int na = regions.spaces[static_cast<std::size_t>(a)].size();
        std::vector<Rational> exact(static_cast<std::size_t>(nb) * static_cast<std::size_t>(na), Rational(0));
        std::vector<double> entries(exact.size(), 0.0);
        for (int wa = 0; wa < na; ++wa) {
            int wb = proj[static_cast<std::size_t>(wa)];
            Rational v = marginals[static_cast<std::size_t>(a)][static_cast<std::size_t>(wa)] /
                         marginals[static_cast<std::size_t>(b)][static_cast<std::size_t>(wb)];
            exact[static_cast<std::size_t>(wb) * static_cast<std::size_t>(na) + static_cast<std::size_t>(wa)] = v;
            entries[static_cast<std::size_t>(wb) * static_cast<std::size_t>(na) + static_cast<std::size_t>(wa)] =
                to_double(v);
        }
        spec.set_up_kernel(b, a, make_kernel(regions.spaces[static_cast<std::size_t>(b)],
                                             regions.spaces[static_cast<std::size_t>(a)], std::move(entries)));
        spec.set_up_kernel_exact(b, a, std::move(exact));
    }
    return spec;
}

std::span<const int> GSkeleton::down_map(int upper, int lower) const {
    auto it = down.find({upper, lower});
    if (it == down.end())
        throw UnknownElementError("skeleton: missing down map " + poset.name(upper) + " -> " + poset.name(lower));
    return it->second;
}

GSkeleton skeleton_of(const ASpecification& spec) {
    GSkeleton s;
    s.poset = spec.poset();
    s.spaces = spec.spaces();
    for (auto [b, a] : s.poset.comparable_pairs()) {
        auto m = spec.down_map(a, b);
        s.down[{a, b}] = std::vector<int>(m.begin(), m.end());
    }
    return s;
}

GSkeleton skeleton_of(const RegionModel& model) {
    GSkeleton s;
    s.poset = model.poset;
    s.spaces = model.spaces;
    for (auto [b, a] : s.poset.comparable_pairs()) s.down[{a, b}] = model.projection(a, b);
    return s;
}

std::vector<int> layout_offsets(const std::vector<FiniteSpace>& spaces) {
    std::vector<int> offsets(spaces.size() + 1, 0);
    for (std::size_t i = 0; i < spaces.size(); ++i) offsets[i + 1] = offsets[i] + spaces[i].size();
    return offsets;
}

Eigen::VectorXd stack_family(const BeliefFamily& q, const std::vector<int>& offsets) {
    Eigen::VectorXd x(offsets.back());
    for (std::size_t a = 0; a < q.size(); ++a)
        for (int i = 0; i < q[a].space.size(); ++i) x(offsets[a] + i) = q[a][i];
    return x;
}

EqualitySystem section_equations(const ASpecification& spec) {
    EqualitySystem sys;
    sys.offsets = layout_offsets(spec.spaces());
    const auto covers = spec.poset().cover_pairs();
    int rows = 0;
    for (auto [b, a] : covers) rows += spec.space_size(a);
    rows += spec.poset().size();
    sys.A = Eigen::MatrixXd::Zero(rows, sys.num_vars());
    sys.b = Eigen::VectorXd::Zero(rows);
    int row = 0;
    for (auto [b, a] : covers) {
        const Kernel& f = spec.up_kernel(b, a);
        for (int wa = 0; wa < spec.space_size(a); ++wa, ++row) {
            for (int wb = 0; wb < spec.space_size(b); ++wb)
                sys.A(row, sys.offsets[static_cast<std::size_t>(b)] + wb) = f.at(wb, wa);
            sys.A(row, sys.offsets[static_cast<std::size_t>(a)] + wa) -= 1.0;
            sys.row_labels.push_back("section " + spec.poset().name(b) + "<=" + spec.poset().name(a) + " @ " +
                                     spec.space(a).outcomes[static_cast<std::size_t>(wa)]);
        }
    }
    for (int a = 0; a < spec.poset().size(); ++a, ++row) {
        for (int w = 0; w < spec.space_size(a); ++w) sys.A(row, sys.offsets[static_cast<std::size_t>(a)] + w) = 1.0;
        sys.b(row) = 1.0;
        sys.row_labels.push_back("normalize " + spec.poset().name(a));
    }
    return sys;
}

EqualitySystem marginalization_equations(const GSkeleton& skel) {
    EqualitySystem sys;
    sys.offsets = layout_offsets(skel.spaces);
    const auto covers = skel.poset.cover_pairs();
    int rows = 0;
    for (auto [b, a] : covers) rows += skel.space_size(b);
    rows += skel.poset.size();
    sys.A = Eigen::MatrixXd::Zero(rows, sys.num_vars());
    sys.b = Eigen::VectorXd::Zero(rows);
    int row = 0;
    for (auto [b, a] : covers) {
        auto m = skel.down_map(a, b);
        for (int wb = 0; wb < skel.space_size(b); ++wb, ++row) {
            for (int wa = 0; wa < skel.space_size(a); ++wa)
                if (m[static_cast<std::size_t>(wa)] == wb)
                    sys.A(row, sys.offsets[static_cast<std::size_t>(a)] + wa) = 1.0;
            sys.A(row, sys.offsets[static_cast<std::size_t>(b)] + wb) -= 1.0;
            sys.row_labels.push_back("marginal " + skel.poset.name(b) + "<=" + skel.poset.name(a) + " @ " +
                                     skel.spaces[static_cast<std::size_t>(b)].outcomes[static_cast<std::size_t>(wb)]);
        }
    }
    for (int a = 0; a < skel.poset.size(); ++a, ++row) {
        for (int w = 0; w < skel.space_size(a); ++w) sys.A(row, sys.offsets[static_cast<std::size_t>(a)] + w) = 1.0;
        sys.b(row) = 1.0;
        sys.row_labels.push_back("normalize " + skel.poset.name(a));
    }
    return sys;
}

}  // namespace csm
