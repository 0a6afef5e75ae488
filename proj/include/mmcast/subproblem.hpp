#pragma once

#include <deque>
#include <string>
#include <vector>

#include "mmcast/entropy.hpp"
#include "mmcast/network.hpp"

namespace mmcast {

// The part of the network that matters to one client t: the sources M_t with
// a path to t, and the edges E_t among M_t and into t. Subsets of M_t are
// "local" bitmasks over `sources`.
struct ClientSubproblem {
  std::size_t client = 0;
  std::vector<std::size_t> sources;  // node indices, ordered by ground position
  std::vector<std::size_t> edges;    // instance edge indices, file order
  Rational ground_entropy;           // H(X_{M_t})
  Subset ground_mask = 0;            // M_t as a subset of the oracle's ground

  // Local position of each edge's endpoints; head -1 is the client itself.
  std::vector<int> tail_position;
  std::vector<int> head_position;

  std::size_t size() const noexcept { return sources.size(); }
  Subset full() const noexcept { return full_subset(sources.size()); }

  // Maps a local subset of M_t onto the global source ground set.
  Subset to_global(Subset local, const NetworkInstance& inst) const {
    Subset g = 0;
    for (std::size_t i = 0; i < sources.size(); ++i)
      if (contains(local, i)) g |= Subset{1} << *inst.source_position(sources[i]);
    return g;
  }

  // Coefficient of each E_t edge in the boundary of S: +1 leaving, -1 entering.
  std::vector<int> boundary_coefficients(Subset local) const {
    std::vector<int> coeff(edges.size(), 0);
    for (std::size_t k = 0; k < edges.size(); ++k) {
      bool tail_in = contains(local, static_cast<std::size_t>(tail_position[k]));
      bool head_in = head_position[k] >= 0 && contains(local, static_cast<std::size_t>(head_position[k]));
      coeff[k] = tail_in == head_in ? 0 : (tail_in ? 1 : -1);
    }
    return coeff;
  }

  std::vector<std::string> names(Subset local, const NetworkInstance& inst) const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < sources.size(); ++i)
      if (contains(local, i)) out.push_back(inst.node_name(sources[i]));
    return out;
  }
};

inline ClientSubproblem client_subproblem(const NetworkInstance& inst, const EntropyOracle& oracle,
                                          std::size_t client) {
  if (client >= inst.node_count() || !inst.is_client(client))
    throw Error(ErrorCode::InvalidInput, "node is not a client",
                client < inst.node_count() ? inst.node_name(client) : std::to_string(client));
  if (oracle.ground_size() != inst.sources().size())
    throw Error(ErrorCode::DimensionMismatch, "source model ground set does not match the instance sources");
  std::vector<std::vector<std::size_t>> in(inst.node_count());
  for (const auto& e : inst.edges()) in[e.head].push_back(e.tail);

  std::vector<bool> reached(inst.node_count(), false);
  std::deque<std::size_t> queue{client};
  reached[client] = true;
  while (!queue.empty()) {
    std::size_t v = queue.front();
    queue.pop_front();
    for (auto u : in[v])
      if (!reached[u]) {
        reached[u] = true;
        queue.push_back(u);
      }
  }

  ClientSubproblem sub;
  sub.client = client;
  std::vector<int> local(inst.node_count(), -1);
  for (auto m : inst.sources())
    if (reached[m]) {
      local[m] = static_cast<int>(sub.sources.size());
      sub.sources.push_back(m);
      sub.ground_mask |= Subset{1} << *inst.source_position(m);
    }
  if (sub.sources.empty())
    throw Error(ErrorCode::EmptyReachableSet, "no source reaches client '" + inst.node_name(client) + "'",
                inst.node_name(client));
  for (std::size_t k = 0; k < inst.edges().size(); ++k) {
    const auto& e = inst.edges()[k];
    if (local[e.tail] < 0) continue;
    if (e.head != client && local[e.head] < 0) continue;
    sub.edges.push_back(k);
    sub.tail_position.push_back(local[e.tail]);
    sub.head_position.push_back(e.head == client ? -1 : local[e.head]);
  }
  sub.ground_entropy = oracle.entropy(sub.ground_mask);
  return sub;
}

// dR(S) = sum of rates leaving S minus sum of rates entering S, over E_t.
inline Rational boundary(const RateVector& rates, Subset local, const ClientSubproblem& sub) {
  Rational total = 0;
  auto coeff = sub.boundary_coefficients(local);
  for (std::size_t k = 0; k < sub.edges.size(); ++k) {
    auto it = rates.find(sub.edges[k]);
    if (it == rates.end())
      throw Error(ErrorCode::UnknownEdgeRate, "no rate for an edge of the client subgraph",
                  std::to_string(sub.edges[k]));
    if (coeff[k] > 0) total += it->second;
    if (coeff[k] < 0) total -= it->second;
  }
  return total;
}

// c(D+S): capacity of E_t edges leaving S. `capacity` is indexed by instance edge.
inline Rational cut_capacity(const std::vector<Rational>& capacity, Subset local, const ClientSubproblem& sub) {
  Rational total = 0;
  auto coeff = sub.boundary_coefficients(local);
  for (std::size_t k = 0; k < sub.edges.size(); ++k)
    if (coeff[k] > 0) total += capacity[sub.edges[k]];
  return total;
}

// g_t(S) = H(X_S | X_{M_t \ S}) for a local subset S.
inline Rational client_conditional_entropy(const EntropyOracle& oracle, const NetworkInstance& inst,
                                           const ClientSubproblem& sub, Subset local) {
  return conditional_entropy(oracle, sub.to_global(local, inst), sub.ground_mask);
}

struct ReconstructabilityEntry {
  std::size_t client;
  Rational entropy;  // H(X_{M_t})
  bool complete;     // equals H(X_M)
};

struct ReconstructabilityReport {
  Rational total_entropy;  // H(X_M)
  std::vector<ReconstructabilityEntry> clients;
  bool passed() const {
    for (const auto& c : clients)
      if (!c.complete) return false;
    return true;
  }
};

inline ReconstructabilityReport check_reconstructability(const NetworkInstance& inst,
                                                         const EntropyOracle& oracle) {
  ReconstructabilityReport report;
  report.total_entropy = oracle.entropy(full_subset(oracle.ground_size()));
  for (auto t : inst.clients()) {
    auto sub = client_subproblem(inst, oracle, t);
    report.clients.push_back({t, sub.ground_entropy, sub.ground_entropy == report.total_entropy});
  }
  return report;
}

}  // namespace mmcast
