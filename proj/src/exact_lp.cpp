#include "detnet/exact_lp.hpp"

#include <cstddef>
#include <optional>

#include "detnet/errors.hpp"

namespace detnet::lp {

namespace {

class Tableau {
public:
    std::vector<std::vector<Rational>> a;
    std::vector<Rational> b;
    std::vector<std::size_t> basis;
    std::size_t cols = 0;

    void pivot(std::size_t row, std::size_t col) {
        const Rational p = a[row][col];
        for (auto& v : a[row]) v /= p;
        b[row] /= p;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (i == row || a[i][col] == 0) continue;
            const Rational f = a[i][col];
            for (std::size_t j = 0; j < cols; ++j)
                if (a[row][j] != 0) a[i][j] -= f * a[row][j];
            b[i] -= f * b[row];
        }
        basis[row] = col;
    }

    // Maximizes cost . x over the columns with allowed[j]; returns false
    // when unbounded.
    bool optimize(const std::vector<Rational>& cost, const std::vector<bool>& allowed) {
        while (true) {
            std::optional<std::size_t> entering;
            for (std::size_t j = 0; j < cols && !entering; ++j) {
                if (!allowed[j] || is_basic(j)) continue;
                Rational reduced = cost[j];
                for (std::size_t i = 0; i < a.size(); ++i)
                    if (a[i][j] != 0) reduced -= cost[basis[i]] * a[i][j];
                if (reduced > 0) entering = j;
            }
            if (!entering) return true;
            std::optional<std::size_t> leaving;
            Rational best_ratio;
            for (std::size_t i = 0; i < a.size(); ++i) {
                if (a[i][*entering] <= 0) continue;
                const Rational ratio = b[i] / a[i][*entering];
                if (!leaving || ratio < best_ratio || (ratio == best_ratio && basis[i] < basis[*leaving])) {
                    leaving = i;
                    best_ratio = ratio;
                }
            }
            if (!leaving) return false;
            pivot(*leaving, *entering);
        }
    }

    bool is_basic(std::size_t col) const {
        for (auto c : basis)
            if (c == col) return true;
        return false;
    }
};

}  // namespace

Solution maximize(const std::vector<Rational>& objective, const std::vector<Row>& rows) {
    const std::size_t n = objective.size();
    for (const auto& r : rows)
        if (r.coeffs.size() != n) throw InvalidArgument("lp::maximize: row width differs from objective");

    // At most a surplus and an artificial column per row.
    const std::size_t extra = 2 * rows.size();

    Tableau t;
    t.cols = n + extra;
    std::vector<bool> artificial(t.cols, false);
    std::size_t next = n;
    for (const auto& r : rows) {
        std::vector<Rational> coeffs = r.coeffs;
        Rational rhs = r.rhs;
        Sense sense = r.sense;
        if (rhs < 0) {
            for (auto& c : coeffs) c = -c;
            rhs = -rhs;
            if (sense == Sense::kLessEqual) {
                sense = Sense::kGreaterEqual;
            } else if (sense == Sense::kGreaterEqual) {
                sense = Sense::kLessEqual;
            }
        }
        coeffs.resize(t.cols);
        std::size_t basic = 0;
        if (sense == Sense::kLessEqual) {
            coeffs[next] = 1;
            basic = next++;
        } else {
            if (sense == Sense::kGreaterEqual) coeffs[next++] = -1;
            coeffs[next] = 1;
            artificial[next] = true;
            basic = next++;
        }
        t.a.push_back(std::move(coeffs));
        t.b.push_back(rhs);
        t.basis.push_back(basic);
    }
    t.cols = next;
    for (auto& row : t.a) row.resize(t.cols);
    artificial.resize(t.cols);

    std::vector<bool> all(t.cols, true);
    std::vector<Rational> phase1(t.cols);
    bool any_artificial = false;
    for (std::size_t j = 0; j < t.cols; ++j) {
        if (artificial[j]) {
            phase1[j] = -1;
            any_artificial = true;
        }
    }
    if (any_artificial) {
        t.optimize(phase1, all);
        for (std::size_t i = 0; i < t.a.size(); ++i)
            if (artificial[t.basis[i]] && t.b[i] != 0) return {Status::kInfeasible, {}, {}};
        // Drive zero-valued artificials out of the basis; drop redundant rows.
        for (std::size_t i = 0; i < t.a.size();) {
            if (!artificial[t.basis[i]]) {
                ++i;
                continue;
            }
            std::optional<std::size_t> col;
            for (std::size_t j = 0; j < t.cols && !col; ++j)
                if (!artificial[j] && t.a[i][j] != 0) col = j;
            if (col) {
                t.pivot(i, *col);
                ++i;
            } else {
                t.a.erase(t.a.begin() + static_cast<std::ptrdiff_t>(i));
                t.b.erase(t.b.begin() + static_cast<std::ptrdiff_t>(i));
                t.basis.erase(t.basis.begin() + static_cast<std::ptrdiff_t>(i));
            }
        }
    }

    std::vector<Rational> cost(t.cols);
    for (std::size_t j = 0; j < n; ++j) cost[j] = objective[j];
    std::vector<bool> allowed(t.cols);
    for (std::size_t j = 0; j < t.cols; ++j) allowed[j] = !artificial[j];
    if (!t.optimize(cost, allowed)) return {Status::kUnbounded, {}, {}};

    Solution sol{Status::kOptimal, 0, std::vector<Rational>(n)};
    for (std::size_t i = 0; i < t.a.size(); ++i)
        if (t.basis[i] < n) sol.x[t.basis[i]] = t.b[i];
    for (std::size_t j = 0; j < n; ++j) sol.value += objective[j] * sol.x[j];
    return sol;
}

}  // namespace detnet::lp
