#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mmcast/error.hpp"
#include "mmcast/rational.hpp"

namespace mmcast {

// Subset of an ordered ground set, bit i <=> element i.
using Subset = std::uint64_t;
inline constexpr std::size_t kMaxGround = 63;

inline Subset full_subset(std::size_t n) { return n >= 64 ? ~Subset{0} : (Subset{1} << n) - 1; }
inline bool contains(Subset s, std::size_t i) { return (s >> i) & 1U; }
inline std::size_t cardinality(Subset s) { return static_cast<std::size_t>(std::popcount(s)); }

struct RawEdge {
  std::string id;
  std::string tail;
  std::string head;
  Rational capacity;
  Rational cost;
};

// Instance as read from a file, before any checks.
struct RawInstance {
  std::vector<std::string> nodes;
  std::vector<RawEdge> edges;
  std::vector<std::string> clients;
};

struct Edge {
  std::string id;
  std::size_t tail;
  std::size_t head;
  Rational capacity;
  Rational cost;
};

// Per-edge rates keyed by instance edge index.
using RateVector = std::map<std::size_t, Rational>;

class NetworkInstance;
NetworkInstance validate_instance(const RawInstance& raw);

// Capacitated, cost-weighted DAG. Every node that is not a client is a source
// (relays are sources whose observation carries no entropy). Immutable once
// built by validate_instance.
class NetworkInstance {
 public:
  const std::vector<std::string>& node_names() const noexcept { return names_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  // Source node indices in file order; position i is ground element i.
  const std::vector<std::size_t>& sources() const noexcept { return sources_; }
  const std::vector<std::size_t>& clients() const noexcept { return clients_; }
  const std::vector<std::size_t>& topological_order() const noexcept { return topo_; }

  std::size_t node_count() const noexcept { return names_.size(); }
  std::size_t topological_position(std::size_t node) const { return topo_pos_.at(node); }
  bool is_client(std::size_t node) const { return source_pos_.at(node) < 0; }
  std::optional<std::size_t> source_position(std::size_t node) const {
    auto p = source_pos_.at(node);
    return p < 0 ? std::nullopt : std::optional<std::size_t>(static_cast<std::size_t>(p));
  }

  std::size_t node_index(const std::string& name) const {
    auto it = node_lookup_.find(name);
    if (it == node_lookup_.end()) throw Error(ErrorCode::UnknownNode, "unknown node '" + name + "'", name);
    return it->second;
  }
  std::size_t edge_index(const std::string& id) const {
    auto it = edge_lookup_.find(id);
    if (it == edge_lookup_.end()) throw Error(ErrorCode::InvalidInput, "unknown edge '" + id + "'", id);
    return it->second;
  }
  const std::string& node_name(std::size_t node) const { return names_.at(node); }

  std::vector<Rational> capacities() const {
    std::vector<Rational> c;
    for (const auto& e : edges_) c.push_back(e.capacity);
    return c;
  }
  std::vector<Rational> costs() const {
    std::vector<Rational> c;
    for (const auto& e : edges_) c.push_back(e.cost);
    return c;
  }

  // Raw description that reproduces this instance through validate_instance.
  RawInstance to_raw() const {
    RawInstance raw;
    raw.nodes = names_;
    for (const auto& e : edges_)
      raw.edges.push_back({e.id, names_[e.tail], names_[e.head], e.capacity, e.cost});
    for (auto t : clients_) raw.clients.push_back(names_[t]);
    return raw;
  }

 private:
  friend NetworkInstance validate_instance(const RawInstance& raw);
  NetworkInstance() = default;

  std::vector<std::string> names_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> sources_;
  std::vector<std::size_t> clients_;
  std::vector<std::size_t> topo_;
  std::vector<std::size_t> topo_pos_;
  std::vector<std::ptrdiff_t> source_pos_;
  std::unordered_map<std::string, std::size_t> node_lookup_;
  std::unordered_map<std::string, std::size_t> edge_lookup_;
};

namespace detail {

// Returns a directed cycle as a node sequence with the start repeated, or
// nothing when the graph is acyclic.
inline std::optional<std::vector<std::size_t>> find_cycle(
    std::size_t n, const std::vector<std::vector<std::size_t>>& out) {
  enum : std::uint8_t { kWhite, kGray, kBlack };
  std::vector<std::uint8_t> color(n, kWhite);
  std::vector<std::size_t> parent(n, SIZE_MAX);
  for (std::size_t root = 0; root < n; ++root) {
    if (color[root] != kWhite) continue;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
    color[root] = kGray;
    while (!stack.empty()) {
      auto& [v, next] = stack.back();
      if (next == out[v].size()) {
        color[v] = kBlack;
        stack.pop_back();
        continue;
      }
      std::size_t w = out[v][next++];
      if (color[w] == kGray) {
        std::vector<std::size_t> cycle{w};
        for (std::size_t u = v; u != w; u = parent[u]) cycle.push_back(u);
        cycle.push_back(w);
        std::reverse(cycle.begin(), cycle.end());
        return cycle;
      }
      if (color[w] == kWhite) {
        color[w] = kGray;
        parent[w] = v;
        stack.emplace_back(w, 0);
      }
    }
  }
  return std::nullopt;
}

}  // namespace detail

inline NetworkInstance validate_instance(const RawInstance& raw) {
  NetworkInstance inst;
  inst.names_ = raw.nodes;
  for (std::size_t i = 0; i < raw.nodes.size(); ++i)
    if (!inst.node_lookup_.emplace(raw.nodes[i], i).second)
      throw Error(ErrorCode::DuplicateNode, "duplicate node '" + raw.nodes[i] + "'", raw.nodes[i]);

  const std::size_t n = raw.nodes.size();
  std::vector<std::vector<std::size_t>> out(n);
  std::vector<std::size_t> in_degree(n, 0);
  for (const auto& re : raw.edges) {
    if (!inst.edge_lookup_.emplace(re.id, inst.edges_.size()).second)
      throw Error(ErrorCode::DuplicateEdgeId, "duplicate edge id '" + re.id + "'", re.id);
    std::size_t tail = inst.node_index(re.tail), head = inst.node_index(re.head);
    if (tail == head) throw Error(ErrorCode::SelfLoop, "self-loop on edge '" + re.id + "'", re.id);
    if (re.capacity < 0)
      throw Error(ErrorCode::NegativeCapacity, "edge '" + re.id + "' has negative capacity", re.id);
    if (re.cost <= 0)
      throw Error(ErrorCode::NonpositiveCost, "edge '" + re.id + "' has nonpositive cost", re.id);
    inst.edges_.push_back({re.id, tail, head, re.capacity, re.cost});
    out[tail].push_back(head);
    ++in_degree[head];
  }

  inst.source_pos_.assign(n, 0);
  for (const auto& name : raw.clients) {
    std::size_t t = inst.node_index(name);
    if (inst.source_pos_[t] < 0) throw Error(ErrorCode::DuplicateNode, "client listed twice", name);
    inst.source_pos_[t] = -1;
    inst.clients_.push_back(t);
  }
  for (auto t : inst.clients_) {
    if (!out[t].empty())
      throw Error(ErrorCode::ClientNotSink, "client '" + inst.names_[t] + "' has outgoing edges",
                  inst.names_[t]);
  }
  if (auto cycle = detail::find_cycle(n, out)) {
    std::string witness;
    for (std::size_t i = 0; i < cycle->size(); ++i)
      witness += (i ? "," : "") + inst.names_[(*cycle)[i]];
    throw Error(ErrorCode::CycleDetected, "graph contains a directed cycle (" + witness + ")", witness);
  }
  for (auto t : inst.clients_)
    if (in_degree[t] == 0)
      throw Error(ErrorCode::ClientWithoutInput, "client '" + inst.names_[t] + "' has no incoming edge",
                  inst.names_[t]);

  for (std::size_t v = 0; v < n; ++v) {
    if (inst.source_pos_[v] < 0) continue;
    inst.source_pos_[v] = static_cast<std::ptrdiff_t>(inst.sources_.size());
    inst.sources_.push_back(v);
  }
  if (inst.sources_.size() > kMaxGround)
    throw Error(ErrorCode::GroundTooLarge, "at most 63 source nodes are supported",
                std::to_string(inst.sources_.size()));

  // Kahn's algorithm; ties resolved by file order so the order is stable.
  std::vector<std::size_t> indeg = in_degree;
  std::vector<std::size_t> ready;
  for (std::size_t v = n; v-- > 0;)
    if (indeg[v] == 0) ready.push_back(v);
  inst.topo_pos_.assign(n, 0);
  while (!ready.empty()) {
    std::size_t v = ready.back();
    ready.pop_back();
    inst.topo_pos_[v] = inst.topo_.size();
    inst.topo_.push_back(v);
    std::vector<std::size_t> released;
    for (auto w : out[v])
      if (--indeg[w] == 0) released.push_back(w);
    std::sort(released.rbegin(), released.rend());
    ready.insert(ready.end(), released.begin(), released.end());
    std::sort(ready.rbegin(), ready.rend());
  }
  return inst;
}

}  // namespace mmcast
