#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "switchsim/core.hpp"

namespace switchsim {

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class UtilityKind { Log, Power, Linear };

/// Per-link concave utility g applied to allocated service, weighted by q^alpha.
/// Power means g(s) = s^(1-beta)/(1-beta) with beta > 0, beta != 1.
struct Objective {
  double alpha = 1.0;
  UtilityKind g = UtilityKind::Log;
  double beta = 0.5;
  std::vector<double> weights;  // q^alpha per link, set per call

  double g_value(double s) const;
  double g_deriv(double s) const;
  double g_second(double s) const;
  bool strictly_concave() const { return g != UtilityKind::Linear; }

  double value(std::span<const double> s) const;  // sum of weighted utilities
};

std::vector<double> queue_weights(std::span<const std::int64_t> q, double alpha);
std::vector<double> queue_weights(std::span<const double> q, double alpha);

/// Point in the convex hull of a schedule set together with the solver's own
/// convex-combination certificate and the certified Frank-Wolfe duality gap.
struct MeanSchedule {
  std::vector<double> s;
  double gap = 0.0;
  double objective_value = 0.0;
  int iterations = 0;
  std::vector<std::pair<std::size_t, double>> support;  // (atom index, weight)
};

struct Decomposition {
  struct Term {
    double weight;
    std::vector<int> atom;
  };
  std::vector<Term> terms;

  std::vector<double> mean() const;
  double weight_sum() const;
};

struct SolveOptions {
  double gap_tol = 1e-8;
  int max_iters = 100000;
  bool polish = true;
  const MeanSchedule* warm_start = nullptr;  // previous solution on the same set
};

/// Atom maximizing w.sigma; ties broken by the lexicographically smallest
/// atom vector. The zero atom makes this total for any weight sign.
std::size_t linear_oracle(std::span<const double> w, const ScheduleSet& s);

/// Solves  max sum_j weights_j g(s_j)  over the hull of the schedule set by
/// away-step Frank-Wolfe with exact line search; the linear subproblem is the
/// MaxWeight oracle above. Zero-weight coordinates are excluded from the
/// objective (0*g(s) = 0); all-zero weights return the zero schedule. The
/// linear utility is routed straight to the vertex oracle.
MeanSchedule solve_program(const Objective& obj, const ScheduleSet& s,
                           const SolveOptions& opt = {});

/// Reduces a hull point to a convex combination of at most |J|+1 atoms by
/// iterative null-space elimination on the active atom set. Points without a
/// solver certificate are first expressed via a feasibility LP; points more
/// than 1e-7 outside the hull are rejected.
Decomposition caratheodory_decompose(const MeanSchedule& s, const ScheduleSet& set);

/// Draws an atom with probability equal to its decomposition weight.
const std::vector<int>& sample_schedule(const Decomposition& d, std::mt19937_64& rng);

namespace detail {

/// Vertex-oracle form of the same Frank-Wolfe routine, for problems whose
/// feasible set is only available through a best-vertex oracle (used by the
/// expanded-network fluid integrator). Vertices are compared by exact value.
struct FWResult {
  std::vector<double> s;
  double gap = 0.0;
  double objective_value = 0.0;
  int iterations = 0;
  std::vector<std::pair<std::vector<double>, double>> support;
};

using VertexOracle = std::function<std::vector<double>(std::span<const double>)>;

FWResult frank_wolfe(const Objective& obj, const VertexOracle& oracle,
                     std::vector<std::pair<std::vector<double>, double>> start,
                     const SolveOptions& opt);

double uniform_double(std::mt19937_64& rng);  // in [0,1), 53-bit

}  // namespace detail

}  // namespace switchsim
