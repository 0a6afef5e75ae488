#pragma once

// Shared helpers for the test suites: a random instance generator and
// reference computations written directly against the instance JSON, so
// they do not route through the library code under test.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "mmcast/mmcast.hpp"

namespace testing_support {

using mmcast::json;
using mmcast::Rational;

inline std::string fixture(const std::string& name) { return std::string(MMCAST_FIXTURE_DIR) + "/" + name; }

struct RandomInstanceParams {
  std::size_t min_sources = 2;
  std::size_t max_sources = 6;
  std::size_t clients = 2;
  std::uint32_t q = 5;
  std::size_t dimension = 4;
  int max_capacity = 5;
  int max_cost = 1;
  double edge_probability = 0.45;
};

// Sources observe random subsets of W's coordinates (0/1 selector rows).
inline json random_instance(std::mt19937_64& rng, const RandomInstanceParams& p = {}) {
  std::uniform_int_distribution<std::size_t> count(p.min_sources, p.max_sources);
  std::uniform_int_distribution<int> cap(0, p.max_capacity), cost(1, p.max_cost);
  std::bernoulli_distribution edge(p.edge_probability), coin(0.5);
  const std::size_t k = count(rng);
  json doc;
  std::vector<std::string> nodes, clients;
  for (std::size_t i = 1; i <= k; ++i) nodes.push_back("m" + std::to_string(i));
  for (std::size_t i = 1; i <= p.clients; ++i) clients.push_back("t" + std::to_string(i));
  for (const auto& c : clients) nodes.push_back(c);
  json edges = json::array();
  auto add = [&](const std::string& a, const std::string& b) {
    edges.push_back({{"id", "e" + std::to_string(edges.size() + 1)},
                     {"tail", a},
                     {"head", b},
                     {"capacity", std::to_string(cap(rng))},
                     {"cost", std::to_string(cost(rng))}});
  };
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j)
      if (edge(rng)) add(nodes[i], nodes[j]);
  std::uniform_int_distribution<std::size_t> pick(0, k - 1);
  for (const auto& c : clients) {
    bool any = false;
    for (std::size_t i = 0; i < k; ++i)
      if (edge(rng)) add(nodes[i], c), any = true;
    if (!any) add(nodes[pick(rng)], c);
  }
  json matrices = json::object();
  for (std::size_t i = 0; i < k; ++i) {
    json rows = json::array();
    for (std::size_t d = 0; d < p.dimension; ++d)
      if (coin(rng)) {
        std::vector<int> row(p.dimension, 0);
        row[d] = 1;
        rows.push_back(row);
      }
    matrices[nodes[i]] = rows;
  }
  doc["nodes"] = nodes;
  doc["edges"] = edges;
  doc["clients"] = clients;
  doc["source_model"] = {{"kind", "linear"}, {"q", p.q}, {"N", p.dimension}, {"matrices", matrices}};
  return doc;
}

// ---- reference computations on the raw JSON ----

inline std::size_t rank_mod(std::vector<std::vector<long long>> m, long long q) {
  std::size_t r = 0;
  const std::size_t cols = m.empty() ? 0 : m[0].size();
  for (std::size_t c = 0; c < cols && r < m.size(); ++c) {
    std::size_t p = r;
    while (p < m.size() && ((m[p][c] % q) + q) % q == 0) ++p;
    if (p == m.size()) continue;
    std::swap(m[p], m[r]);
    long long pivot = ((m[r][c] % q) + q) % q, inv = 1;
    for (long long e = q - 2, b = pivot; e > 0; e >>= 1, b = b * b % q)
      if (e & 1) inv = inv * b % q;
    for (auto& x : m[r]) x = ((x % q) + q) % q * inv % q;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (i == r) continue;
      long long f = ((m[i][c] % q) + q) % q;
      for (std::size_t j = 0; j < cols; ++j) m[i][j] = ((m[i][j] - f * m[r][j]) % q + q) % q;
    }
    ++r;
  }
  return r;
}

struct PlainEdge {
  std::string id, tail, head;
  Rational capacity, cost;
};

struct PlainInstance {
  std::vector<std::string> sources, clients;
  std::vector<PlainEdge> edges;
  std::map<std::string, std::vector<std::vector<long long>>> rows;
  long long q = 0;
  std::size_t dimension = 0;

  explicit PlainInstance(const json& doc) {
    for (const auto& c : doc["clients"]) clients.push_back(c.get<std::string>());
    for (const auto& n : doc["nodes"]) {
      auto name = n.get<std::string>();
      if (std::find(clients.begin(), clients.end(), name) == clients.end()) sources.push_back(name);
    }
    for (const auto& e : doc["edges"])
      edges.push_back({e["id"], e["tail"], e["head"], Rational(e["capacity"].get<std::string>()),
                       Rational(e["cost"].get<std::string>())});
    const auto& sm = doc["source_model"];
    q = sm["q"].get<long long>();
    dimension = sm["N"].get<std::size_t>();
    for (const auto& s : sources) rows[s] = {};
    for (const auto& [name, m] : sm["matrices"].items()) rows[name] = m.get<std::vector<std::vector<long long>>>();
  }

  long long entropy(const std::set<std::string>& names) const {
    std::vector<std::vector<long long>> stacked;
    for (const auto& n : names)
      for (const auto& r : rows.at(n)) stacked.push_back(r);
    if (stacked.empty()) return 0;
    return static_cast<long long>(rank_mod(stacked, q));
  }

  std::set<std::string> all_sources() const { return {sources.begin(), sources.end()}; }

  // Sources with a directed path to `client`.
  std::vector<std::string> reaching(const std::string& client) const {
    std::set<std::string> seen{client};
    bool grew = true;
    while (grew) {
      grew = false;
      for (const auto& e : edges)
        if (seen.count(e.head) && !seen.count(e.tail)) seen.insert(e.tail), grew = true;
    }
    std::vector<std::string> out;
    for (const auto& s : sources)
      if (seen.count(s)) out.push_back(s);
    return out;
  }
};

struct CutCheck {
  bool reconstructable = true;
  bool feasible = true;
  Rational min_slack;
};

// Enumerates every inequality c(out of S) >= H(M_t) - H(M_t \ S) for one client.
inline CutCheck enumerate_cuts(const PlainInstance& inst, const std::string& client) {
  auto mt = inst.reaching(client);
  std::set<std::string> all(mt.begin(), mt.end());
  CutCheck out;
  out.reconstructable = inst.entropy(all) == inst.entropy(inst.all_sources());
  const long long h_all = inst.entropy(all);
  bool first = true;
  for (std::uint64_t s = 1; s < (std::uint64_t{1} << mt.size()); ++s) {
    std::set<std::string> in, rest;
    for (std::size_t i = 0; i < mt.size(); ++i) ((s >> i) & 1 ? in : rest).insert(mt[i]);
    Rational cut = 0;
    for (const auto& e : inst.edges)
      if (in.count(e.tail) && (rest.count(e.head) || e.head == client)) cut += e.capacity;
    Rational slack = cut - Rational(static_cast<long>(h_all - inst.entropy(rest)));
    if (first || slack < out.min_slack) out.min_slack = slack;
    first = false;
  }
  out.feasible = out.min_slack >= 0;
  return out;
}

// Random submodular function on n elements: a weighted cut function of a
// random graph plus concave-of-modular terms plus a modular part.
inline std::vector<double> random_submodular_table(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> w(0.0, 1.0), m(-2.0, 1.0);
  std::vector<std::vector<double>> adj(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && w(rng) < 0.4) adj[i][j] = w(rng);
  std::vector<double> a(n), b(n), lin(n);
  for (std::size_t i = 0; i < n; ++i) a[i] = w(rng), b[i] = w(rng), lin[i] = m(rng);
  std::vector<double> table(std::size_t{1} << n);
  for (std::uint64_t s = 0; s < table.size(); ++s) {
    double v = 0, sa = 0, sb = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!((s >> i) & 1)) continue;
      sa += a[i];
      sb += b[i];
      v += lin[i];
      for (std::size_t j = 0; j < n; ++j)
        if (!((s >> j) & 1)) v += adj[i][j];
    }
    v += std::sqrt(sa) + std::min(sb, 1.5);
    table[s] = v;
  }
  return table;
}

}  // namespace testing_support
