#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace switchsim {

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Finite set of integer service vectors. Component order follows `links`.
struct ScheduleSet {
  std::vector<std::string> links;
  std::vector<std::vector<int>> atoms;
  int sigma_max = 0;

  std::size_t dim() const { return links.size(); }
  std::size_t size() const { return atoms.size(); }

  /// Checks the structural invariants: the zero vector is present, every
  /// component is a nonnegative integer, and every link is served by at
  /// least one atom (so the hull has nonempty interior).
  void validate() const;
};

struct LinkDef {
  std::string id;
  std::string tail;
  std::string head;
};

struct RouteDef {
  std::string id;
  std::vector<int> links;  // indices into Network::links, in traversal order
  double rate = 0.0;
};

enum class ArrivalKind { Bernoulli, Poisson, DeterministicBatch };

struct ArrivalSpec {
  ArrivalKind kind = ArrivalKind::Bernoulli;
  std::uint64_t seed = 0;
};

struct Network {
  std::vector<std::string> nodes;
  std::vector<LinkDef> links;
  std::vector<RouteDef> routes;
  ScheduleSet schedules;
  ArrivalSpec arrivals;
  std::vector<double> link_loads;  // a_bar_j = sum of rates of routes using j

  std::size_t num_links() const { return links.size(); }
  bool single_hop() const;
  int link_index(const std::string& id) const;  // -1 if unknown
};

/// Untyped network description as read from config; validate_network turns it
/// into a Network or reports the first violated invariant.
struct RawNetwork {
  std::vector<std::string> nodes;
  std::vector<LinkDef> links;
  std::vector<std::vector<int>> schedules;  // ordered as `links`
  struct RawRoute {
    std::string id;
    std::vector<std::string> link_ids;
    double rate = 0.0;
  };
  std::vector<RawRoute> routes;
  ArrivalSpec arrivals;
};

Network validate_network(const RawNetwork& raw);

struct QueueState {
  std::vector<std::int64_t> q;
  std::int64_t time = 0;
};

struct MultiHopState {
  // x[r][k]: packets of route r waiting at the k-th link on their route
  std::vector<std::vector<std::int64_t>> x;
  std::int64_t time = 0;

  std::vector<std::int64_t> queue_sizes(const Network& net) const;
  std::int64_t total() const;
};

MultiHopState zero_state(const Network& net);

/// S_Q = { sigma ∧ Q }: per-component min with the queue vector, duplicates
/// removed (the zero vector is always retained).
ScheduleSet truncate_schedules(const ScheduleSet& s, const std::vector<std::int64_t>& q);

struct HeadroomResult {
  double epsilon = 0.0;                  // largest eps with (1+eps)*a_bar in <S>
  double theta = 0.0;                    // 1 + eps
  std::vector<double> weights;           // convex weights over atoms achieving it
  bool interior = false;                 // eps > 0
};

/// Largest eps such that (1+eps)*a_bar lies in the convex hull of the
/// schedule set, via the LP  max theta  s.t.  sum_w w_s * sigma >= theta*a_bar,
/// w a probability vector. Throws ValidationError("link never served: ...")
/// when some positive-rate link is served by no schedule.
HeadroomResult load_headroom(const std::vector<double>& a_bar, const ScheduleSet& s);

}  // namespace switchsim
