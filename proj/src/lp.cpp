#include "switchsim/lp.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>

namespace switchsim::lp {

namespace {

constexpr double kEps = 1e-9;

struct Tableau {
  // rows of the constraint system in canonical form, rhs in the last column
  std::vector<std::vector<double>> t;
  std::vector<double> z;   // objective row: reduced costs, value in last slot
  std::vector<int> basis;  // basic column per row

  std::size_t cols() const { return z.size() - 1; }

  void pivot(std::size_t r, std::size_t c) {
    const double p = t[r][c];
    for (double& v : t[r]) v /= p;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (i == r || std::abs(t[i][c]) < 1e-14) continue;
      const double f = t[i][c];
      for (std::size_t k = 0; k < t[i].size(); ++k) t[i][k] -= f * t[r][k];
      t[i][c] = 0.0;
    }
    if (std::abs(z[c]) > 1e-14) {
      const double f = z[c];
      for (std::size_t k = 0; k < z.size(); ++k) z[k] -= f * t[r][k];
      z[c] = 0.0;
    }
    basis[r] = static_cast<int>(c);
  }

  // Bland's rule: smallest improving column, smallest basic index on ratio ties.
  Status run() {
    for (;;) {
      std::size_t enter = cols();
      for (std::size_t j = 0; j < cols(); ++j) {
        if (z[j] > kEps) {
          enter = j;
          break;
        }
      }
      if (enter == cols()) return Status::Optimal;

      std::size_t leave = t.size();
      double best_ratio = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i][enter] <= kEps) continue;
        const double ratio = t[i].back() / t[i][enter];
        if (ratio < best_ratio - kEps ||
            (ratio < best_ratio + kEps &&
             (leave == t.size() || basis[i] < basis[leave]))) {
          best_ratio = ratio;
          leave = i;
        }
      }
      if (leave == t.size()) return Status::Unbounded;
      pivot(leave, enter);
    }
  }

  void canonicalize_objective() {
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double f = z[basis[i]];
      if (std::abs(f) > 1e-14) {
        for (std::size_t k = 0; k < z.size(); ++k) z[k] -= f * t[i][k];
      }
    }
  }
};

}  // namespace

Solution maximize(const std::vector<double>& c, const std::vector<Row>& rows) {
  const std::size_t n = c.size();
  const std::size_t m = rows.size();
  for (const Row& r : rows) {
    if (r.coeffs.size() != n) throw std::invalid_argument("lp: row width mismatch");
  }

  // Flip rows to nonnegative rhs, note the effective sense.
  std::vector<std::vector<double>> a(m);
  std::vector<double> b(m);
  std::vector<Sense> sense(m);
  std::size_t n_slack = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double sign = rows[i].rhs < 0.0 ? -1.0 : 1.0;
    a[i].assign(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) a[i][j] = sign * rows[i].coeffs[j];
    b[i] = sign * rows[i].rhs;
    sense[i] = rows[i].sense;
    if (sign < 0.0) {
      if (sense[i] == Sense::LessEq) sense[i] = Sense::GreaterEq;
      else if (sense[i] == Sense::GreaterEq) sense[i] = Sense::LessEq;
    }
    if (sense[i] != Sense::Eq) ++n_slack;
  }

  // Column layout: [structural | slack/surplus | artificial | rhs].
  std::size_t n_art = 0;
  for (std::size_t i = 0; i < m; ++i)
    if (sense[i] != Sense::LessEq) ++n_art;
  const std::size_t total = n + n_slack + n_art;

  Tableau tab;
  tab.t.assign(m, std::vector<double>(total + 1, 0.0));
  tab.basis.assign(m, -1);
  std::vector<int> artificial_cols;
  std::size_t slack_at = n;
  std::size_t art_at = n + n_slack;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) tab.t[i][j] = a[i][j];
    tab.t[i].back() = b[i];
    if (sense[i] == Sense::LessEq) {
      tab.t[i][slack_at] = 1.0;
      tab.basis[i] = static_cast<int>(slack_at++);
    } else {
      if (sense[i] == Sense::GreaterEq) tab.t[i][slack_at++] = -1.0;
      tab.t[i][art_at] = 1.0;
      tab.basis[i] = static_cast<int>(art_at);
      artificial_cols.push_back(static_cast<int>(art_at++));
    }
  }

  Solution sol;

  // Phase 1: maximize -sum(artificials).
  if (!artificial_cols.empty()) {
    tab.z.assign(total + 1, 0.0);
    for (int col : artificial_cols) tab.z[col] = -1.0;
    tab.canonicalize_objective();
    if (tab.run() != Status::Optimal)
      throw std::logic_error("lp: phase 1 cannot be unbounded");
    const double infeas = -tab.z.back();
    sol.phase1_residual = std::max(0.0, infeas);
    if (infeas > 1e-7) {
      sol.status = Status::Infeasible;
      return sol;
    }
    // Drive any basic artificial out, or drop its (redundant) row.
    for (std::size_t i = 0; i < tab.t.size();) {
      bool is_art = false;
      for (int col : artificial_cols)
        if (tab.basis[i] == col) is_art = true;
      if (!is_art) {
        ++i;
        continue;
      }
      std::size_t piv = total;
      for (std::size_t j = 0; j < n + n_slack; ++j) {
        if (std::abs(tab.t[i][j]) > kEps) {
          piv = j;
          break;
        }
      }
      if (piv < total) {
        tab.z.assign(total + 1, 0.0);  // placeholder objective during cleanup
        tab.pivot(i, piv);
        ++i;
      } else {
        tab.t.erase(tab.t.begin() + static_cast<long>(i));
        tab.basis.erase(tab.basis.begin() + static_cast<long>(i));
      }
    }
    // Artificials must never re-enter.
    for (int col : artificial_cols)
      for (auto& row : tab.t) row[col] = 0.0;
  }

  // Phase 2: the real objective.
  tab.z.assign(total + 1, 0.0);
  for (std::size_t j = 0; j < n; ++j) tab.z[j] = c[j];
  tab.canonicalize_objective();
  const Status st = tab.run();
  if (st == Status::Unbounded) {
    sol.status = Status::Unbounded;
    return sol;
  }

  sol.status = Status::Optimal;
  sol.x.assign(n, 0.0);
  for (std::size_t i = 0; i < tab.t.size(); ++i) {
    if (tab.basis[i] >= 0 && static_cast<std::size_t>(tab.basis[i]) < n)
      sol.x[tab.basis[i]] = tab.t[i].back();
  }
  sol.objective = -tab.z.back();
  return sol;
}

}  // namespace switchsim::lp
