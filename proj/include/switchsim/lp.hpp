#pragma once

#include <vector>

namespace switchsim::lp {

enum class Sense { LessEq, Eq, GreaterEq };

struct Row {
  std::vector<double> coeffs;
  Sense sense = Sense::LessEq;
  double rhs = 0.0;
};

enum class Status { Optimal, Infeasible, Unbounded };

struct Solution {
  Status status = Status::Infeasible;
  std::vector<double> x;
  double objective = 0.0;
  double phase1_residual = 0.0;  // leftover infeasibility after phase 1
};

/// Maximize c.x subject to the given rows and x >= 0.
///
/// Dense two-phase tableau simplex with Bland's rule. Intended for the small
/// programs that arise here (tens of rows, a few hundred columns); not a
/// general-purpose LP code.
Solution maximize(const std::vector<double>& c, const std::vector<Row>& rows);

}  // namespace switchsim::lp
