#include "switchsim/solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "switchsim/lp.hpp"

namespace switchsim {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kWeightFloor = 1e-15;
}  // namespace

double Objective::g_value(double s) const {
  switch (g) {
    case UtilityKind::Log:
      return s > 0.0 ? std::log(s) : -kInf;
    case UtilityKind::Power:
      if (s <= 0.0) return beta < 1.0 ? 0.0 : -kInf;
      return std::pow(s, 1.0 - beta) / (1.0 - beta);
    case UtilityKind::Linear:
      return s;
  }
  return 0.0;
}

double Objective::g_deriv(double s) const {
  const double sc = std::max(s, 1e-300);
  switch (g) {
    case UtilityKind::Log:
      return 1.0 / sc;
    case UtilityKind::Power:
      return std::pow(sc, -beta);
    case UtilityKind::Linear:
      return 1.0;
  }
  return 0.0;
}

double Objective::g_second(double s) const {
  const double sc = std::max(s, 1e-300);
  switch (g) {
    case UtilityKind::Log:
      return -1.0 / (sc * sc);
    case UtilityKind::Power:
      return -beta * std::pow(sc, -beta - 1.0);
    case UtilityKind::Linear:
      return 0.0;
  }
  return 0.0;
}

double Objective::value(std::span<const double> s) const {
  double total = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    if (weights[j] <= 0.0) continue;  // 0 * g(s) = 0 by convention
    total += weights[j] * g_value(s[j]);
  }
  return total;
}

std::vector<double> queue_weights(std::span<const std::int64_t> q, double alpha) {
  std::vector<double> w(q.size());
  for (std::size_t j = 0; j < q.size(); ++j)
    w[j] = std::pow(static_cast<double>(q[j]), alpha);
  return w;
}

std::vector<double> queue_weights(std::span<const double> q, double alpha) {
  std::vector<double> w(q.size());
  for (std::size_t j = 0; j < q.size(); ++j)
    w[j] = q[j] > 0.0 ? std::pow(q[j], alpha) : 0.0;
  return w;
}

std::size_t linear_oracle(std::span<const double> w, const ScheduleSet& s) {
  if (w.size() != s.dim())
    throw std::invalid_argument("linear_oracle: weight vector length mismatch");
  std::size_t best = 0;
  double best_val = -kInf;
  for (std::size_t i = 0; i < s.atoms.size(); ++i) {
    double v = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) v += w[j] * s.atoms[i][j];
    if (v > best_val) {
      best_val = v;
      best = i;
    } else if (v == best_val &&
               std::lexicographical_compare(s.atoms[i].begin(), s.atoms[i].end(),
                                            s.atoms[best].begin(), s.atoms[best].end())) {
      best = i;
    }
  }
  return best;
}

namespace detail {

double uniform_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

namespace {

using Support = std::vector<std::pair<std::vector<double>, double>>;

std::vector<double> support_mean(const Support& sup, std::size_t dim) {
  std::vector<double> s(dim, 0.0);
  for (const auto& [v, w] : sup)
    for (std::size_t j = 0; j < dim; ++j) s[j] += w * v[j];
  return s;
}

void normalize_weights(Support& sup) {
  double total = 0.0;
  for (auto& [v, w] : sup) total += w;
  if (total <= 0.0) return;
  for (auto& [v, w] : sup) w /= total;
}

// Exact line search for phi(t) = F(s + t*d) on [0, t_hi]: safeguarded Newton
// on the strictly concave restriction.
double line_search(const Objective& obj, std::span<const double> s,
                   std::span<const double> d, double t_hi) {
  const auto dphi = [&](double t) {
    double v = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (obj.weights[j] <= 0.0 || d[j] == 0.0) continue;
      v += obj.weights[j] * obj.g_deriv(s[j] + t * d[j]) * d[j];
    }
    return v;
  };
  const auto d2phi = [&](double t) {
    double v = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (obj.weights[j] <= 0.0 || d[j] == 0.0) continue;
      v += obj.weights[j] * obj.g_second(s[j] + t * d[j]) * d[j] * d[j];
    }
    return v;
  };

  if (dphi(t_hi) >= 0.0) return t_hi;
  double lo = 0.0, hi = t_hi;
  double t = 0.5 * t_hi;
  for (int it = 0; it < 100; ++it) {
    const double g1 = dphi(t);
    if (std::abs(g1) < 1e-14 * (1.0 + std::abs(dphi(0.0)))) return t;
    if (g1 > 0.0)
      lo = t;
    else
      hi = t;
    const double g2 = d2phi(t);
    double next = g2 < 0.0 ? t - g1 / g2 : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo < 1e-16 * std::max(1.0, t_hi)) return 0.5 * (lo + hi);
    t = next;
  }
  return t;
}

// Largest step along d keeping positive-weight coordinates strictly positive.
double domain_cap(const Objective& obj, std::span<const double> s,
                  std::span<const double> d, double t_max) {
  if (!obj.strictly_concave()) return t_max;
  double cap = t_max;
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (obj.weights[j] <= 0.0 || d[j] >= 0.0) continue;
    const double hit = s[j] / -d[j];
    cap = std::min(cap, hit * (1.0 - 1e-12));
  }
  return std::max(cap, 0.0);
}

// Newton refinement of the weights over the current active set (an
// equality-constrained concave maximization on the weight simplex). Drives
// the duality gap to machine precision once Frank-Wolfe has identified the
// right face.
void polish_support(const Objective& obj, Support& sup, std::vector<double>& s) {
  const std::size_t dim = s.size();
  for (int pass = 0; pass < 20; ++pass) {
    const std::size_t k = sup.size();
    if (k <= 1) return;
    Eigen::MatrixXd a(dim, k);
    Eigen::VectorXd w(k);
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < dim; ++j) a(j, i) = sup[i].first[j];
      w(i) = sup[i].second;
    }
    Eigen::VectorXd sv = a * w;
    Eigen::VectorXd grad_s = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd hess_s = Eigen::VectorXd::Zero(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      if (obj.weights[j] <= 0.0) continue;
      grad_s(j) = obj.weights[j] * obj.g_deriv(sv(j));
      hess_s(j) = obj.weights[j] * obj.g_second(sv(j));
    }
    Eigen::VectorXd gw = a.transpose() * grad_s;
    Eigen::MatrixXd hw = a.transpose() * hess_s.asDiagonal() * a;

    Eigen::MatrixXd kkt(k + 1, k + 1);
    kkt.topLeftCorner(k, k) = hw;
    kkt.topRightCorner(k, 1).setOnes();
    kkt.bottomLeftCorner(1, k).setOnes();
    kkt(k, k) = 0.0;
    Eigen::VectorXd rhs(k + 1);
    rhs.head(k) = -gw;
    rhs(k) = 0.0;
    Eigen::VectorXd sol = kkt.fullPivLu().solve(rhs);
    if (!((kkt * sol - rhs).norm() < 1e-8 * (1.0 + rhs.norm()))) return;
    Eigen::VectorXd delta = sol.head(k);
    if (delta.lpNorm<Eigen::Infinity>() < 1e-16) return;

    const double f0 = obj.value(std::span<const double>(sv.data(), dim));
    double t = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      Eigen::VectorXd wn = w + t * delta;
      if (wn.minCoeff() < 0.0) {
        t *= 0.5;
        continue;
      }
      Eigen::VectorXd sn = a * wn;
      const double fn = obj.value(std::span<const double>(sn.data(), dim));
      if (std::isfinite(fn) && fn >= f0) {
        for (std::size_t i = 0; i < k; ++i) sup[i].second = wn(i);
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) return;
    sup.erase(std::remove_if(sup.begin(), sup.end(),
                             [](const auto& p) { return p.second <= kWeightFloor; }),
              sup.end());
    normalize_weights(sup);
    s = support_mean(sup, dim);
    if (t == 1.0 && delta.lpNorm<Eigen::Infinity>() < 1e-12) return;
  }
}

}  // namespace

FWResult frank_wolfe(const Objective& obj, const VertexOracle& oracle,
                     Support start, const SolveOptions& opt) {
  if (start.empty()) throw SolverError("frank_wolfe: empty starting support");
  const std::size_t dim = start.front().first.size();
  Support sup = std::move(start);
  normalize_weights(sup);
  std::vector<double> s = support_mean(sup, dim);
  if (!std::isfinite(obj.value(s)))
    throw SolverError("no strictly positive feasible start");

  std::vector<double> grad(dim, 0.0);
  FWResult res;
  int it = 0;
  for (; it < opt.max_iters; ++it) {
    for (std::size_t j = 0; j < dim; ++j)
      grad[j] = obj.weights[j] > 0.0 ? obj.weights[j] * obj.g_deriv(s[j]) : 0.0;

    std::vector<double> fw = oracle(grad);
    double gap = 0.0;
    for (std::size_t j = 0; j < dim; ++j) gap += grad[j] * (fw[j] - s[j]);
    res.gap = gap;
    if (gap <= opt.gap_tol) break;

    // away vertex: worst active vertex under the current gradient
    std::size_t away = 0;
    double away_val = kInf;
    for (std::size_t i = 0; i < sup.size(); ++i) {
      double v = 0.0;
      for (std::size_t j = 0; j < dim; ++j) v += grad[j] * sup[i].first[j];
      if (v < away_val) {
        away_val = v;
        away = i;
      }
    }
    double s_val = 0.0;
    for (std::size_t j = 0; j < dim; ++j) s_val += grad[j] * s[j];
    const double away_gap = s_val - away_val;

    std::vector<double> dir(dim);
    bool fw_step = sup.size() == 1 || gap >= away_gap;
    double t_max;
    if (fw_step) {
      for (std::size_t j = 0; j < dim; ++j) dir[j] = fw[j] - s[j];
      t_max = 1.0;
    } else {
      for (std::size_t j = 0; j < dim; ++j) dir[j] = s[j] - sup[away].first[j];
      const double wa = sup[away].second;
      t_max = wa / (1.0 - wa);
    }
    const double t_hi = domain_cap(obj, s, dir, t_max);
    if (t_hi <= 0.0) break;
    const double t = line_search(obj, s, dir, t_hi);
    if (t <= 0.0) break;

    if (fw_step) {
      for (auto& [v, w] : sup) w *= (1.0 - t);
      bool found = false;
      for (auto& [v, w] : sup) {
        if (v == fw) {
          w += t;
          found = true;
          break;
        }
      }
      if (!found) sup.emplace_back(std::move(fw), t);
    } else {
      for (auto& [v, w] : sup) w *= (1.0 + t);
      sup[away].second -= t;
      if (sup[away].second <= kWeightFloor)
        sup.erase(sup.begin() + static_cast<long>(away));
    }
    sup.erase(std::remove_if(sup.begin(), sup.end(),
                             [](const auto& p) { return p.second <= kWeightFloor; }),
              sup.end());
    normalize_weights(sup);
    if (it % 64 == 63)
      s = support_mean(sup, dim);
    else
      for (std::size_t j = 0; j < dim; ++j) s[j] = std::max(0.0, s[j] + t * dir[j]);
  }

  if (opt.polish && obj.strictly_concave()) {
    s = support_mean(sup, dim);
    polish_support(obj, sup, s);
  } else {
    s = support_mean(sup, dim);
  }

  // certified gap at the final point
  for (std::size_t j = 0; j < dim; ++j)
    grad[j] = obj.weights[j] > 0.0 ? obj.weights[j] * obj.g_deriv(s[j]) : 0.0;
  std::vector<double> fw = oracle(grad);
  double gap = 0.0;
  for (std::size_t j = 0; j < dim; ++j) gap += grad[j] * (fw[j] - s[j]);

  res.s = s;
  res.gap = std::max(gap, 0.0);
  res.objective_value = obj.value(res.s);
  res.iterations = it;
  res.support = std::move(sup);
  return res;
}

}  // namespace detail

namespace {

std::size_t find_zero_atom(const ScheduleSet& s) {
  for (std::size_t i = 0; i < s.atoms.size(); ++i) {
    bool all_zero = true;
    for (int v : s.atoms[i])
      if (v != 0) all_zero = false;
    if (all_zero) return i;
  }
  throw ValidationError("zero schedule missing");
}

std::vector<double> atom_as_doubles(const std::vector<int>& atom) {
  return std::vector<double>(atom.begin(), atom.end());
}

}  // namespace

MeanSchedule solve_program(const Objective& obj, const ScheduleSet& set,
                           const SolveOptions& opt) {
  const std::size_t dim = set.dim();
  if (obj.weights.size() != dim)
    throw std::invalid_argument("solve_program: weight vector length mismatch");
  for (double w : obj.weights)
    if (!(w >= 0.0) || !std::isfinite(w))
      throw std::invalid_argument("solve_program: weights must be finite and >= 0");

  MeanSchedule out;
  bool all_zero = true;
  for (double w : obj.weights)
    if (w > 0.0) all_zero = false;
  if (all_zero) {
    const std::size_t zi = find_zero_atom(set);
    out.s.assign(dim, 0.0);
    out.support = {{zi, 1.0}};
    return out;
  }

  if (!obj.strictly_concave()) {
    // linear utility: the program is linear, so the optimum is the MaxWeight vertex
    const std::size_t idx = linear_oracle(obj.weights, set);
    out.s = atom_as_doubles(set.atoms[idx]);
    out.support = {{idx, 1.0}};
    out.objective_value = obj.value(out.s);
    return out;
  }

  // starting support: warm start if usable, else uniform over non-zero atoms
  detail::Support start;
  const std::size_t zero_idx = find_zero_atom(set);
  if (opt.warm_start != nullptr) {
    bool ok = !opt.warm_start->support.empty();
    for (const auto& [idx, w] : opt.warm_start->support)
      if (idx >= set.size() || w < 0.0) ok = false;
    if (ok) {
      for (const auto& [idx, w] : opt.warm_start->support)
        if (w > kWeightFloor) start.emplace_back(atom_as_doubles(set.atoms[idx]), w);
      std::vector<double> s0(dim, 0.0);
      double tot = 0.0;
      for (auto& [v, w] : start) tot += w;
      for (auto& [v, w] : start)
        for (std::size_t j = 0; j < dim; ++j) s0[j] += (w / tot) * v[j];
      if (start.empty() || !std::isfinite(obj.value(s0))) start.clear();
    }
  }
  if (start.empty()) {
    std::size_t nonzero = 0;
    for (std::size_t i = 0; i < set.size(); ++i)
      if (i != zero_idx) ++nonzero;
    if (nonzero == 0) throw SolverError("no strictly positive feasible start");
    for (std::size_t i = 0; i < set.size(); ++i)
      if (i != zero_idx)
        start.emplace_back(atom_as_doubles(set.atoms[i]), 1.0 / static_cast<double>(nonzero));

    // cover positive-weight coordinates that the average leaves at zero
    for (std::size_t j = 0; j < dim; ++j) {
      if (obj.weights[j] <= 0.0) continue;
      double sj = 0.0;
      for (const auto& [v, w] : start) sj += w * v[j];
      if (sj > 0.0) continue;
      std::size_t best = set.size();
      int best_service = 0;
      for (std::size_t i = 0; i < set.size(); ++i) {
        if (set.atoms[i][j] > best_service) {
          best_service = set.atoms[i][j];
          best = i;
        }
      }
      if (best == set.size()) throw SolverError("no strictly positive feasible start");
      for (auto& [v, w] : start) w *= 0.99;
      start.emplace_back(atom_as_doubles(set.atoms[best]), 0.01);
    }
  }

  const auto oracle = [&set](std::span<const double> grad) {
    return atom_as_doubles(set.atoms[linear_oracle(grad, set)]);
  };
  detail::FWResult res = detail::frank_wolfe(obj, oracle, std::move(start), opt);

  // map support vertices back to atom indices
  std::map<std::vector<int>, std::size_t> index;
  for (std::size_t i = 0; i < set.size(); ++i) index.emplace(set.atoms[i], i);
  out.s = std::move(res.s);
  out.gap = res.gap;
  out.objective_value = res.objective_value;
  out.iterations = res.iterations;
  for (const auto& [v, w] : res.support) {
    std::vector<int> key(v.size());
    for (std::size_t j = 0; j < v.size(); ++j)
      key[j] = static_cast<int>(std::llround(v[j]));
    out.support.emplace_back(index.at(key), w);
  }
  return out;
}

std::vector<double> Decomposition::mean() const {
  if (terms.empty()) return {};
  std::vector<double> m(terms.front().atom.size(), 0.0);
  for (const auto& t : terms)
    for (std::size_t j = 0; j < m.size(); ++j) m[j] += t.weight * t.atom[j];
  return m;
}

double Decomposition::weight_sum() const {
  double total = 0.0;
  for (const auto& t : terms) total += t.weight;
  return total;
}

Decomposition caratheodory_decompose(const MeanSchedule& ms, const ScheduleSet& set) {
  const std::size_t dim = set.dim();
  if (ms.s.size() != dim)
    throw std::invalid_argument("caratheodory_decompose: point dimension mismatch");

  std::vector<std::pair<std::size_t, double>> wts;
  if (!ms.support.empty()) {
    for (const auto& [idx, w] : ms.support) {
      if (idx >= set.size())
        throw std::invalid_argument("caratheodory_decompose: bad support index");
      if (w > kWeightFloor) wts.emplace_back(idx, w);
    }
  } else {
    // express the point over the atoms via a feasibility LP
    const std::size_t m = set.size();
    std::vector<double> c(m, 0.0);
    std::vector<lp::Row> rows;
    for (std::size_t j = 0; j < dim; ++j) {
      lp::Row row;
      row.coeffs.assign(m, 0.0);
      for (std::size_t i = 0; i < m; ++i) row.coeffs[i] = set.atoms[i][j];
      row.sense = lp::Sense::Eq;
      row.rhs = ms.s[j];
      rows.push_back(std::move(row));
    }
    lp::Row convex;
    convex.coeffs.assign(m, 1.0);
    convex.sense = lp::Sense::Eq;
    convex.rhs = 1.0;
    rows.push_back(std::move(convex));
    lp::Solution sol = lp::maximize(c, rows);
    if (sol.status != lp::Status::Optimal)
      throw SolverError("not in hull");
    for (std::size_t i = 0; i < m; ++i)
      if (sol.x[i] > kWeightFloor) wts.emplace_back(i, sol.x[i]);
  }
  if (wts.empty()) throw SolverError("not in hull");

  // iterative null-space elimination down to at most |J|+1 atoms
  while (wts.size() > dim + 1) {
    const std::size_t k = wts.size();
    Eigen::MatrixXd a(dim + 1, k);
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < dim; ++j) a(j, i) = set.atoms[wts[i].first][j];
      a(dim, i) = 1.0;
    }
    Eigen::MatrixXd ker = Eigen::FullPivLU<Eigen::MatrixXd>(a).kernel();
    if (ker.cols() == 0 || ker.col(0).lpNorm<Eigen::Infinity>() < 1e-12) break;
    Eigen::VectorXd lam = ker.col(0);
    lam /= lam.lpNorm<Eigen::Infinity>();
    if (lam.maxCoeff() <= 0.0) lam = -lam;
    double t = kInf;
    std::size_t hit = k;
    for (std::size_t i = 0; i < k; ++i) {
      if (lam(i) <= 1e-12) continue;
      const double ratio = wts[i].second / lam(i);
      if (ratio < t) {
        t = ratio;
        hit = i;
      }
    }
    if (hit == k) break;
    for (std::size_t i = 0; i < k; ++i) wts[i].second -= t * lam(i);
    wts[hit].second = 0.0;
    wts.erase(std::remove_if(wts.begin(), wts.end(),
                             [](const auto& p) { return p.second <= kWeightFloor; }),
              wts.end());
  }

  double total = 0.0;
  for (const auto& [idx, w] : wts) total += w;
  Decomposition d;
  for (const auto& [idx, w] : wts)
    d.terms.push_back({w / total, set.atoms[idx]});

  std::vector<double> rec = d.mean();
  double err = 0.0;
  for (std::size_t j = 0; j < dim; ++j)
    err = std::max(err, std::abs(rec[j] - ms.s[j]));
  if (err > 1e-7) throw SolverError("not in hull");
  return d;
}

const std::vector<int>& sample_schedule(const Decomposition& d, std::mt19937_64& rng) {
  if (d.terms.empty()) throw SolverError("sample_schedule: empty decomposition");
  if (std::abs(d.weight_sum() - 1.0) > 1e-12)
    throw SolverError("sample_schedule: weights do not sum to 1");
  for (const auto& t : d.terms)
    if (t.weight < 0.0) throw SolverError("sample_schedule: negative weight");
  const double u = detail::uniform_double(rng);
  double acc = 0.0;
  for (const auto& t : d.terms) {
    acc += t.weight;
    if (u < acc) return t.atom;
  }
  return d.terms.back().atom;
}

}  // namespace switchsim
