#include "ratlp.hpp"

#include <algorithm>

#include "csm/errors.hpp"

namespace csm::detail {

namespace {

// Gaussian elimination to reduced row echelon form of [A | b]; returns
// pivot columns. `wide` is (rows) x (cols + 1), row-major.
std::vector<int> rref(std::vector<Rational>& wide, int rows, int wide_cols) {
    std::vector<int> pivots;
    int r = 0;
    for (int c = 0; c < wide_cols - 1 && r < rows; ++c) {
        int pivot = -1;
        for (int i = r; i < rows; ++i)
            if (wide[static_cast<std::size_t>(i) * wide_cols + c] != 0) {
                pivot = i;
                break;
            }
        if (pivot < 0) continue;
        if (pivot != r)
            for (int j = 0; j < wide_cols; ++j)
                std::swap(wide[static_cast<std::size_t>(pivot) * wide_cols + j],
                          wide[static_cast<std::size_t>(r) * wide_cols + j]);
        Rational inv = 1 / wide[static_cast<std::size_t>(r) * wide_cols + c];
        for (int j = 0; j < wide_cols; ++j) wide[static_cast<std::size_t>(r) * wide_cols + j] *= inv;
        for (int i = 0; i < rows; ++i) {
            if (i == r) continue;
            Rational f = wide[static_cast<std::size_t>(i) * wide_cols + c];
            if (f == 0) continue;
            for (int j = 0; j < wide_cols; ++j)
                wide[static_cast<std::size_t>(i) * wide_cols + j] -=
                    f * wide[static_cast<std::size_t>(r) * wide_cols + j];
        }
        pivots.push_back(c);
        ++r;
    }
    return pivots;
}

}  // namespace

int rational_rank(const RatSystem& sys) {
    const int wide_cols = sys.cols + 1;
    std::vector<Rational> wide(static_cast<std::size_t>(sys.rows) * wide_cols, Rational(0));
    for (int i = 0; i < sys.rows; ++i)
        for (int j = 0; j < sys.cols; ++j)
            wide[static_cast<std::size_t>(i) * wide_cols + j] = sys.at(i, j);
    return static_cast<int>(rref(wide, sys.rows, wide_cols).size());
}

bool independent_rows(const RatSystem& sys, RatSystem& out) {
    const int wide_cols = sys.cols + 1;
    std::vector<Rational> wide(static_cast<std::size_t>(sys.rows) * wide_cols, Rational(0));
    for (int i = 0; i < sys.rows; ++i) {
        for (int j = 0; j < sys.cols; ++j) wide[static_cast<std::size_t>(i) * wide_cols + j] = sys.at(i, j);
        wide[static_cast<std::size_t>(i) * wide_cols + sys.cols] = sys.b[static_cast<std::size_t>(i)];
    }
    auto pivots = rref(wide, sys.rows, wide_cols);
    const int rank = static_cast<int>(pivots.size());
    // Any surviving row of the form 0 = c with c != 0 means infeasible.
    for (int i = rank; i < sys.rows; ++i)
        if (wide[static_cast<std::size_t>(i) * wide_cols + sys.cols] != 0) return false;
    out.rows = rank;
    out.cols = sys.cols;
    out.a.assign(static_cast<std::size_t>(rank) * sys.cols, Rational(0));
    out.b.assign(static_cast<std::size_t>(rank), Rational(0));
    for (int i = 0; i < rank; ++i) {
        for (int j = 0; j < sys.cols; ++j) out.at(i, j) = wide[static_cast<std::size_t>(i) * wide_cols + j];
        out.b[static_cast<std::size_t>(i)] = wide[static_cast<std::size_t>(i) * wide_cols + sys.cols];
    }
    return true;
}

FeasibilityResult feasibility(const RatSystem& sys) {
    const int m = sys.rows, n = sys.cols;
    // Tableau with artificial columns: [A | I | b], rows flipped so b >= 0.
    const int width = n + m + 1;
    std::vector<Rational> t(static_cast<std::size_t>(m) * width, Rational(0));
    std::vector<int> flipped(static_cast<std::size_t>(m), 1);
    for (int i = 0; i < m; ++i) {
        int sign = sys.b[static_cast<std::size_t>(i)] < 0 ? -1 : 1;
        flipped[static_cast<std::size_t>(i)] = sign;
        for (int j = 0; j < n; ++j) t[static_cast<std::size_t>(i) * width + j] = sign * sys.at(i, j);
        t[static_cast<std::size_t>(i) * width + n + i] = 1;
        t[static_cast<std::size_t>(i) * width + n + m] = sign * sys.b[static_cast<std::size_t>(i)];
    }
    // Cost row for min(sum of artificials), reduced against the artificial basis.
    std::vector<Rational> cost(static_cast<std::size_t>(width), Rational(0));
    for (int j = 0; j < n + m; ++j) {
        Rational s(0);
        for (int i = 0; i < m; ++i) s += t[static_cast<std::size_t>(i) * width + j];
        cost[static_cast<std::size_t>(j)] = (j >= n ? Rational(1) : Rational(0)) - s;
    }
    std::vector<int> basis(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) basis[static_cast<std::size_t>(i)] = n + i;

    for (;;) {
        int enter = -1;  // Bland: smallest index with negative reduced cost
        for (int j = 0; j < n + m; ++j)
            if (cost[static_cast<std::size_t>(j)] < 0) {
                enter = j;
                break;
            }
        if (enter < 0) break;
        int leave = -1;
        Rational best;
        for (int i = 0; i < m; ++i) {
            const Rational& piv = t[static_cast<std::size_t>(i) * width + enter];
            if (piv <= 0) continue;
            Rational ratio = t[static_cast<std::size_t>(i) * width + n + m] / piv;
            if (leave < 0 || ratio < best ||
                (ratio == best && basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
                best = ratio;
                leave = i;
            }
        }
        if (leave < 0)
            throw Error("phase-1 simplex unbounded; the feasibility objective cannot be unbounded");
        // Pivot on (leave, enter).
        Rational inv = 1 / t[static_cast<std::size_t>(leave) * width + enter];
        for (int j = 0; j < width; ++j) t[static_cast<std::size_t>(leave) * width + j] *= inv;
        for (int i = 0; i < m; ++i) {
            if (i == leave) continue;
            Rational f = t[static_cast<std::size_t>(i) * width + enter];
            if (f == 0) continue;
            for (int j = 0; j < width; ++j)
                t[static_cast<std::size_t>(i) * width + j] -= f * t[static_cast<std::size_t>(leave) * width + j];
        }
        Rational fc = cost[static_cast<std::size_t>(enter)];
        for (int j = 0; j < width - 1; ++j)
            cost[static_cast<std::size_t>(j)] -= fc * t[static_cast<std::size_t>(leave) * width + j];
        basis[static_cast<std::size_t>(leave)] = enter;
    }

    Rational objective(0);
    for (int i = 0; i < m; ++i)
        if (basis[static_cast<std::size_t>(i)] >= n) objective += t[static_cast<std::size_t>(i) * width + n + m];

    FeasibilityResult result;
    if (objective == 0) {
        result.feasible = true;
        result.x.assign(static_cast<std::size_t>(n), Rational(0));
        for (int i = 0; i < m; ++i)
            if (basis[static_cast<std::size_t>(i)] < n)
                result.x[static_cast<std::size_t>(basis[static_cast<std::size_t>(i)])] =
                    t[static_cast<std::size_t>(i) * width + n + m];
        return result;
    }
    // Infeasible: duals off the artificial reduced costs, mapped back
    // through the row sign flips, then re-verified.
    result.feasible = false;
    result.farkas.assign(static_cast<std::size_t>(m), Rational(0));
    for (int i = 0; i < m; ++i)
        result.farkas[static_cast<std::size_t>(i)] =
            flipped[static_cast<std::size_t>(i)] * (Rational(1) - cost[static_cast<std::size_t>(n + i)]);
    Rational yb(0);
    for (int i = 0; i < m; ++i) yb += result.farkas[static_cast<std::size_t>(i)] * sys.b[static_cast<std::size_t>(i)];
    if (yb <= 0) throw Error("farkas certificate failed verification (y^T b <= 0)");
    for (int j = 0; j < n; ++j) {
        Rational ya(0);
        for (int i = 0; i < m; ++i) ya += result.farkas[static_cast<std::size_t>(i)] * sys.at(i, j);
        if (ya > 0) throw Error("farkas certificate failed verification (y^T A has a positive entry)");
    }
    return result;
}

namespace {

struct VertexEnumerator {
    const RatSystem& sys;  // independent rows
    std::size_t leaf_cap;
    std::size_t leaves = 0;
    std::vector<int> chosen;
    // Incremental elimination state: for each accepted column, the reduced
    // column and its pivot row.
    std::vector<std::vector<Rational>> reduced;
    std::vector<int> pivot_rows;
    std::vector<std::vector<Rational>> found;

    explicit VertexEnumerator(const RatSystem& s, std::size_t cap) : sys(s), leaf_cap(cap) {}

    void solve_leaf() {
        if (++leaves > leaf_cap) throw TooLargeError("vertex enumeration exceeded the basis budget");
        const int r = sys.rows;
        // Solve A_B x_B = b by dense elimination on the basis columns.
        std::vector<Rational> wide(static_cast<std::size_t>(r) * (r + 1), Rational(0));
        for (int i = 0; i < r; ++i) {
            for (int j = 0; j < r; ++j) wide[static_cast<std::size_t>(i) * (r + 1) + j] = sys.at(i, chosen[static_cast<std::size_t>(j)]);
            wide[static_cast<std::size_t>(i) * (r + 1) + r] = sys.b[static_cast<std::size_t>(i)];
        }
        auto pivots = rref(wide, r, r + 1);
        if (static_cast<int>(pivots.size()) != r) return;  // singular basis (should be pruned already)
        std::vector<Rational> xb(static_cast<std::size_t>(r), Rational(0));
        for (int i = 0; i < r; ++i) xb[static_cast<std::size_t>(pivots[static_cast<std::size_t>(i)])] =
            wide[static_cast<std::size_t>(i) * (r + 1) + r];
        for (const Rational& v : xb)
            if (v < 0) return;
        std::vector<Rational> x(static_cast<std::size_t>(sys.cols), Rational(0));
        for (int j = 0; j < r; ++j) x[static_cast<std::size_t>(chosen[static_cast<std::size_t>(j)])] = xb[static_cast<std::size_t>(j)];
        found.push_back(std::move(x));
    }

    // Tries to add column c to the elimination state; returns false when c
    // is linearly dependent on the chosen prefix.
    bool push_column(int c) {
        std::vector<Rational> col(static_cast<std::size_t>(sys.rows));
        for (int i = 0; i < sys.rows; ++i) col[static_cast<std::size_t>(i)] = sys.at(i, c);
        for (std::size_t k = 0; k < reduced.size(); ++k) {
            const Rational& f = col[static_cast<std::size_t>(pivot_rows[k])];
            if (f == 0) continue;
            for (int i = 0; i < sys.rows; ++i) col[static_cast<std::size_t>(i)] -= f * reduced[k][static_cast<std::size_t>(i)];
        }
        int pivot = -1;
        for (int i = 0; i < sys.rows; ++i)
            if (col[static_cast<std::size_t>(i)] != 0) {
                pivot = i;
                break;
            }
        if (pivot < 0) return false;
        Rational inv = 1 / col[static_cast<std::size_t>(pivot)];
        for (int i = 0; i < sys.rows; ++i) col[static_cast<std::size_t>(i)] *= inv;
        reduced.push_back(std::move(col));
        pivot_rows.push_back(pivot);
        chosen.push_back(c);
        return true;
    }

    void pop_column() {
        reduced.pop_back();
        pivot_rows.pop_back();
        chosen.pop_back();
    }

    void recurse(int next) {
        if (static_cast<int>(chosen.size()) == sys.rows) {
            solve_leaf();
            return;
        }
        const int needed = sys.rows - static_cast<int>(chosen.size());
        for (int c = next; c <= sys.cols - needed; ++c) {
            if (!push_column(c)) continue;
            recurse(c + 1);
            pop_column();
        }
    }
};

}  // namespace

std::vector<std::vector<Rational>> enumerate_vertices(const RatSystem& sys, std::size_t leaf_cap) {
    RatSystem indep;
    if (!independent_rows(sys, indep)) return {};
    if (indep.rows == 0) {
        // No constraints beyond x >= 0; only sensible with zero columns.
        return {std::vector<Rational>(static_cast<std::size_t>(sys.cols), Rational(0))};
    }
    VertexEnumerator en(indep, leaf_cap);
    en.recurse(0);
    std::sort(en.found.begin(), en.found.end());
    en.found.erase(std::unique(en.found.begin(), en.found.end()), en.found.end());
    return en.found;
}

int affine_rank(const std::vector<std::vector<Rational>>& points) {
    if (points.empty()) return -1;
    if (points.size() == 1) return 0;
    RatSystem diffs;
    diffs.rows = static_cast<int>(points.size()) - 1;
    diffs.cols = static_cast<int>(points[0].size());
    diffs.a.assign(static_cast<std::size_t>(diffs.rows) * diffs.cols, Rational(0));
    diffs.b.assign(static_cast<std::size_t>(diffs.rows), Rational(0));
    for (int i = 0; i < diffs.rows; ++i)
        for (int j = 0; j < diffs.cols; ++j)
            diffs.at(i, j) = points[static_cast<std::size_t>(i) + 1][static_cast<std::size_t>(j)] -
                             points[0][static_cast<std::size_t>(j)];
    return rational_rank(diffs);
}

}  // namespace csm::detail
