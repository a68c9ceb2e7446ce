#pragma once

#include <vector>

#include "detnet/rational.hpp"

namespace detnet::lp {

enum class Sense { kLessEqual, kEqual, kGreaterEqual };

struct Row {
    std::vector<Rational> coeffs;
    Sense sense = Sense::kLessEqual;
    Rational rhs;
};

enum class Status { kOptimal, kInfeasible, kUnbounded };

struct Solution {
    Status status = Status::kInfeasible;
    Rational value;
    std::vector<Rational> x;
};

/// Maximizes objective . x subject to `rows` and x >= 0, in exact rational
/// arithmetic (two-phase simplex, Bland's rule).  The returned vertex is a
/// deterministic function of the input.
Solution maximize(const std::vector<Rational>& objective, const std::vector<Row>& rows);

}  // namespace detnet::lp
