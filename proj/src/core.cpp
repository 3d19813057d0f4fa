#include "switchsim/core.hpp"

#include <algorithm>
#include <set>

#include "switchsim/lp.hpp"

namespace switchsim {

void ScheduleSet::validate() const {
  if (atoms.empty()) throw ValidationError("schedule set is empty");
  bool has_zero = false;
  for (const auto& atom : atoms) {
    if (atom.size() != links.size())
      throw ValidationError("schedule vector length does not match link count");
    bool all_zero = true;
    for (int v : atom) {
      if (v < 0) throw ValidationError("schedule component is negative");
      if (v > sigma_max) throw ValidationError("schedule component exceeds sigma_max");
      if (v != 0) all_zero = false;
    }
    if (all_zero) has_zero = true;
  }
  if (!has_zero) throw ValidationError("zero schedule missing");
  for (std::size_t j = 0; j < links.size(); ++j) {
    bool served = false;
    for (const auto& atom : atoms)
      if (atom[j] >= 1) served = true;
    if (!served)
      throw ValidationError("link never served: " + links[j]);
  }
}

bool Network::single_hop() const {
  for (const auto& r : routes)
    if (r.links.size() != 1) return false;
  return true;
}

int Network::link_index(const std::string& id) const {
  for (std::size_t j = 0; j < links.size(); ++j)
    if (links[j].id == id) return static_cast<int>(j);
  return -1;
}

Network validate_network(const RawNetwork& raw) {
  Network net;
  net.nodes = raw.nodes;
  net.links = raw.links;
  net.arrivals = raw.arrivals;

  std::set<std::string> node_set(raw.nodes.begin(), raw.nodes.end());
  std::set<std::string> link_ids;
  for (const auto& l : raw.links) {
    if (!link_ids.insert(l.id).second)
      throw ValidationError("duplicate link id: " + l.id);
    if (!node_set.count(l.tail))
      throw ValidationError("link " + l.id + " references unknown tail node " + l.tail);
    if (!node_set.count(l.head))
      throw ValidationError("link " + l.id + " references unknown head node " + l.head);
  }

  net.schedules.links.reserve(raw.links.size());
  for (const auto& l : raw.links) net.schedules.links.push_back(l.id);
  net.schedules.atoms = raw.schedules;
  int smax = 0;
  for (const auto& atom : raw.schedules)
    for (int v : atom) smax = std::max(smax, v);
  net.schedules.sigma_max = smax;
  net.schedules.validate();

  net.link_loads.assign(raw.links.size(), 0.0);
  for (const auto& rr : raw.routes) {
    RouteDef route;
    route.id = rr.id;
    route.rate = rr.rate;
    if (rr.rate < 0.0)
      throw ValidationError("route " + rr.id + " has negative rate");
    if (rr.link_ids.empty())
      throw ValidationError("route " + rr.id + " has no links");
    std::set<int> seen;
    for (const auto& lid : rr.link_ids) {
      int idx = net.link_index(lid);
      if (idx < 0)
        throw ValidationError("route " + rr.id + " references unknown link " + lid);
      if (!seen.insert(idx).second)
        throw ValidationError("route " + rr.id + " revisits link " + lid);
      route.links.push_back(idx);
    }
    for (std::size_t k = 0; k + 1 < route.links.size(); ++k) {
      const LinkDef& a = net.links[route.links[k]];
      const LinkDef& b = net.links[route.links[k + 1]];
      if (a.head != b.tail)
        throw ValidationError("route " + rr.id + " is not chained: link " + a.id +
                              " ends at " + a.head + " but link " + b.id +
                              " starts at " + b.tail);
    }
    for (int j : route.links) net.link_loads[j] += route.rate;
    net.routes.push_back(std::move(route));
  }
  return net;
}

std::vector<std::int64_t> MultiHopState::queue_sizes(const Network& net) const {
  std::vector<std::int64_t> q(net.num_links(), 0);
  for (std::size_t r = 0; r < x.size(); ++r)
    for (std::size_t k = 0; k < x[r].size(); ++k)
      q[net.routes[r].links[k]] += x[r][k];
  return q;
}

std::int64_t MultiHopState::total() const {
  std::int64_t sum = 0;
  for (const auto& row : x)
    for (std::int64_t v : row) sum += v;
  return sum;
}

MultiHopState zero_state(const Network& net) {
  MultiHopState st;
  st.x.resize(net.routes.size());
  for (std::size_t r = 0; r < net.routes.size(); ++r)
    st.x[r].assign(net.routes[r].links.size(), 0);
  return st;
}

ScheduleSet truncate_schedules(const ScheduleSet& s, const std::vector<std::int64_t>& q) {
  if (q.size() != s.dim())
    throw std::invalid_argument("truncate_schedules: queue vector length mismatch");
  for (std::int64_t v : q)
    if (v < 0) throw std::invalid_argument("truncate_schedules: negative queue");
  ScheduleSet out;
  out.links = s.links;
  out.sigma_max = s.sigma_max;
  std::set<std::vector<int>> seen;
  for (const auto& atom : s.atoms) {
    std::vector<int> t(atom.size());
    for (std::size_t j = 0; j < atom.size(); ++j)
      t[j] = static_cast<int>(std::min<std::int64_t>(atom[j], q[j]));
    if (seen.insert(t).second) out.atoms.push_back(std::move(t));
  }
  return out;
}

HeadroomResult load_headroom(const std::vector<double>& a_bar, const ScheduleSet& s) {
  if (a_bar.size() != s.dim())
    throw std::invalid_argument("load_headroom: rate vector length mismatch");
  double total_rate = 0.0;
  for (std::size_t j = 0; j < a_bar.size(); ++j) {
    if (a_bar[j] < 0.0) throw std::invalid_argument("load_headroom: negative rate");
    total_rate += a_bar[j];
    if (a_bar[j] > 0.0) {
      bool served = false;
      for (const auto& atom : s.atoms)
        if (atom[j] >= 1) served = true;
      if (!served) throw ValidationError("link never served: " + s.links[j]);
    }
  }
  if (total_rate == 0.0)
    throw std::invalid_argument("load_headroom: rate vector is zero");

  // Variables: [w_1..w_m, theta_plus, theta_minus]
  const std::size_t m = s.size();
  std::vector<double> c(m + 2, 0.0);
  c[m] = 1.0;
  c[m + 1] = -1.0;
  std::vector<lp::Row> rows;
  for (std::size_t j = 0; j < a_bar.size(); ++j) {
    if (a_bar[j] <= 0.0) continue;
    lp::Row row;
    row.coeffs.assign(m + 2, 0.0);
    for (std::size_t i = 0; i < m; ++i) row.coeffs[i] = s.atoms[i][j];
    row.coeffs[m] = -a_bar[j];
    row.coeffs[m + 1] = a_bar[j];
    row.sense = lp::Sense::GreaterEq;
    row.rhs = 0.0;
    rows.push_back(std::move(row));
  }
  lp::Row convex;
  convex.coeffs.assign(m + 2, 0.0);
  for (std::size_t i = 0; i < m; ++i) convex.coeffs[i] = 1.0;
  convex.sense = lp::Sense::Eq;
  convex.rhs = 1.0;
  rows.push_back(std::move(convex));

  lp::Solution sol = lp::maximize(c, rows);
  if (sol.status != lp::Status::Optimal)
    throw std::runtime_error("load_headroom: LP did not solve");

  HeadroomResult res;
  res.theta = sol.objective;
  res.epsilon = res.theta - 1.0;
  res.interior = res.epsilon > 0.0;
  res.weights.assign(sol.x.begin(), sol.x.begin() + static_cast<long>(m));
  return res;
}

}  // namespace switchsim
