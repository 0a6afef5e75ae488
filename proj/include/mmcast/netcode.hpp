#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "mmcast/feasibility.hpp"
#include "mmcast/field.hpp"

namespace mmcast {

// A unit-rate symbol channel. Source channels leave the super node and carry
// one basis row of a source's observation matrix; edge channels are the
// beta * R_e copies of a graph edge.
struct Channel {
  enum class Kind { Source, Edge };
  Kind kind = Kind::Edge;
  std::size_t tail = SIZE_MAX;  // node index; SIZE_MAX for the super node
  std::size_t head = 0;
  std::size_t edge = SIZE_MAX;  // instance edge for Kind::Edge
};

struct CodedNetwork {
  PrimeField field{2};
  std::size_t dimension = 0;  // N
  std::uint64_t scale = 1;    // beta, rates were multiplied by it
  std::vector<Channel> channels;  // every channel's inputs precede it
  FieldMatrix source_matrix{0, 0, PrimeField(2)};  // A, N x channels
  // (input channel, output channel) pairs meeting at a node; one local
  // coefficient each.
  std::vector<std::pair<std::size_t, std::size_t>> adjacency;
  std::vector<std::size_t> clients;                     // node indices
  std::vector<std::vector<std::size_t>> client_inputs;  // channels into each client
  std::vector<std::size_t> edge_symbols;                // channels per instance edge

  std::size_t channel_count() const noexcept { return channels.size(); }

  // B(t): channels x inputs selector for client i.
  FieldMatrix output_selector(std::size_t i) const {
    FieldMatrix b(channels.size(), client_inputs.at(i).size(), field);
    for (std::size_t j = 0; j < client_inputs[i].size(); ++j) b(client_inputs[i][j], j) = 1;
    return b;
  }
};

struct CodeOptions {
  std::uint64_t max_scale = 4096;
  std::size_t max_attempts = 64;
};

namespace detail {

inline const LinearSource& linear_model(const EntropyOracle& oracle) {
  auto* lin = std::get_if<LinearSource>(&oracle.model());
  if (!lin) throw Error(ErrorCode::NotLinearModel, "network coding needs the finite linear source model");
  return *lin;
}

}  // namespace detail

// Expands the graph under integral-after-scaling rates into unit channels
// and attaches a super node feeding each source a basis of its row space.
inline CodedNetwork build_coded_network(const NetworkInstance& inst, const EntropyOracle& oracle,
                                        const RateVector& rates, const CodeOptions& options = {}) {
  const auto& lin = detail::linear_model(oracle);
  const auto& edges = inst.edges();
  std::vector<Rational> rate(edges.size(), 0);
  for (const auto& [e, r] : rates) {
    if (e >= edges.size()) throw Error(ErrorCode::InvalidInput, "rate for unknown edge");
    if (r < 0 || r > edges[e].capacity)
      throw Error(ErrorCode::InfeasibleRates, "rate outside [0, capacity]", edges[e].id);
    rate[e] = r;
  }
  for (auto t : inst.clients()) {
    auto sub = client_subproblem(inst, oracle, t);
    auto cert = check_feasible_single(inst, sub, oracle, rate);
    if (!cert.feasible)
      throw Error(ErrorCode::InfeasibleRates, "rates do not let every client decode", inst.node_name(t));
  }
  FieldMatrix stacked(0, lin.dimension, lin.field);
  for (const auto& a : lin.observations) stacked = stacked.stack(a);
  if (rank(stacked) != lin.dimension)
    throw Error(ErrorCode::InvalidSourceModel, "stacked observations do not determine W");

  mpz_class beta = 1;
  for (const auto& r : rate) mpz_lcm(beta.get_mpz_t(), beta.get_mpz_t(), r.get_den_mpz_t());
  if (beta > mpz_class(static_cast<unsigned long>(options.max_scale)))
    throw Error(ErrorCode::ScaleOverflow, "rate denominators need too large a block scale", beta.get_str());

  CodedNetwork net;
  net.field = lin.field;
  net.dimension = lin.dimension;
  net.scale = beta.get_ui();
  net.clients = inst.clients();

  std::vector<std::vector<FieldValue>> source_rows;  // A columns for source channels
  for (std::size_t i = 0; i < inst.sources().size(); ++i) {
    auto basis = row_basis(lin.observations[i]);
    for (std::size_t r = 0; r < basis.rows(); ++r) {
      net.channels.push_back({Channel::Kind::Source, SIZE_MAX, inst.sources()[i], SIZE_MAX});
      source_rows.emplace_back(basis.row(r).begin(), basis.row(r).end());
    }
  }
  std::vector<std::size_t> by_tail(edges.size());
  std::iota(by_tail.begin(), by_tail.end(), 0);
  std::stable_sort(by_tail.begin(), by_tail.end(), [&](auto a, auto b) {
    return inst.topological_position(edges[a].tail) < inst.topological_position(edges[b].tail);
  });
  net.edge_symbols.assign(edges.size(), 0);
  for (auto e : by_tail) {
    Rational scaled = rate[e] * beta;
    net.edge_symbols[e] = scaled.get_num().get_ui();
    for (std::size_t c = 0; c < net.edge_symbols[e]; ++c)
      net.channels.push_back({Channel::Kind::Edge, edges[e].tail, edges[e].head, e});
  }

  net.source_matrix = FieldMatrix(lin.dimension, net.channels.size(), lin.field);
  for (std::size_t c = 0; c < source_rows.size(); ++c)
    for (std::size_t j = 0; j < lin.dimension; ++j) net.source_matrix(j, c) = source_rows[c][j];

  for (std::size_t b = 0; b < net.channels.size(); ++b) {
    if (net.channels[b].kind != Channel::Kind::Edge) continue;
    for (std::size_t a = 0; a < b; ++a)
      if (net.channels[a].head == net.channels[b].tail) net.adjacency.emplace_back(a, b);
  }
  net.client_inputs.resize(net.clients.size());
  for (std::size_t i = 0; i < net.clients.size(); ++i)
    for (std::size_t c = 0; c < net.channels.size(); ++c)
      if (net.channels[c].head == net.clients[i]) net.client_inputs[i].push_back(c);
  return net;
}

// Local coefficients, one per adjacency pair, plus how they were found.
struct CodeAssignment {
  std::vector<FieldValue> coefficients;
  std::size_t attempts = 0;
  std::vector<std::size_t> client_ranks;  // rank of M(t) per client
};

// Global coding vectors (N x channels): column c expresses channel c's symbol
// as a linear functional of W, propagated in channel order.
inline FieldMatrix propagate_global_vectors(const CodedNetwork& net, const CodeAssignment& code) {
  const auto& f = net.field;
  FieldMatrix g = net.source_matrix;
  for (std::size_t idx = 0; idx < net.adjacency.size(); ++idx) {
    auto [a, b] = net.adjacency[idx];
    FieldValue coeff = code.coefficients[idx];
    if (coeff == 0) continue;
    for (std::size_t r = 0; r < net.dimension; ++r) g(r, b) = f.add(g(r, b), f.mul(coeff, g(r, a)));
  }
  return g;
}

// Channel adjacency matrix Gamma with the assignment's local coefficients.
inline FieldMatrix adjacency_matrix(const CodedNetwork& net, const CodeAssignment& code) {
  FieldMatrix gamma(net.channel_count(), net.channel_count(), net.field);
  for (std::size_t idx = 0; idx < net.adjacency.size(); ++idx)
    gamma(net.adjacency[idx].first, net.adjacency[idx].second) = code.coefficients[idx];
  return gamma;
}

// M(t) = A (I - Gamma)^{-1} B(t); I - Gamma is unipotent, hence invertible.
inline FieldMatrix transfer_matrix(const CodedNetwork& net, const CodeAssignment& code, std::size_t client_index) {
  const auto& f = net.field;
  FieldMatrix m = FieldMatrix::identity(net.channel_count(), f);
  auto gamma = adjacency_matrix(net, code);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = f.sub(m(i, j), gamma(i, j));
  return net.source_matrix * inverse(m) * net.output_selector(client_index);
}

inline std::vector<std::size_t> client_ranks(const CodedNetwork& net, const CodeAssignment& code) {
  auto g = propagate_global_vectors(net, code);
  std::vector<std::size_t> ranks;
  for (const auto& inputs : net.client_inputs) ranks.push_back(rank(g.select_columns(inputs)));
  return ranks;
}

// Assignment with given coefficients (one per adjacency pair).
inline CodeAssignment make_assignment(const CodedNetwork& net, std::vector<FieldValue> coefficients) {
  if (coefficients.size() != net.adjacency.size())
    throw Error(ErrorCode::DimensionMismatch, "one coefficient per adjacency pair required");
  CodeAssignment code{std::move(coefficients), 0, {}};
  for (auto& c : code.coefficients) c %= net.field.modulus();
  code.client_ranks = client_ranks(net, code);
  return code;
}

// Draws local coefficients uniformly from F_q and keeps the first draw under
// which every client's transfer matrix has rank N. Each attempt has its own
// generator derived from (seed, attempt), so the outcome depends only on seed.
inline CodeAssignment assign_coefficients(const CodedNetwork& net, std::uint64_t seed,
                                          const CodeOptions& options = {}) {
  if (net.field.modulus() <= net.clients.size())
    throw Error(ErrorCode::FieldTooSmall, "field size must exceed the number of clients",
                "q=" + std::to_string(net.field.modulus()) + ";k=" + std::to_string(net.clients.size()));
  std::vector<std::size_t> last_ranks;
  for (std::size_t attempt = 1; attempt <= options.max_attempts; ++attempt) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(attempt)};
    std::mt19937_64 rng(seq);
    std::uniform_int_distribution<FieldValue> draw(0, net.field.modulus() - 1);
    std::vector<FieldValue> coeff(net.adjacency.size());
    for (auto& c : coeff) c = draw(rng);
    auto code = make_assignment(net, std::move(coeff));
    code.attempts = attempt;
    if (std::all_of(code.client_ranks.begin(), code.client_ranks.end(),
                    [&](auto r) { return r == net.dimension; }))
      return code;
    last_ranks = code.client_ranks;
  }
  std::string ranks;
  for (auto r : last_ranks) ranks += (ranks.empty() ? "" : ",") + std::to_string(r);
  throw Error(ErrorCode::VerificationFailedAllAttempts, "no full-rank assignment found", "ranks=" + ranks);
}

// D with D * y = W for the symbols y received by the client. Uses N
// independent input channels and ignores the rest.
inline FieldMatrix build_decoder(const CodedNetwork& net, const CodeAssignment& code, std::size_t client_index) {
  auto m = transfer_matrix(net, code, client_index);
  auto ech = row_reduce(m);
  if (ech.pivot_columns.size() < net.dimension)
    throw Error(ErrorCode::RankDeficient, "transfer matrix does not have full rank",
                std::to_string(ech.pivot_columns.size()) + "/" + std::to_string(net.dimension));
  auto square = m.select_columns(ech.pivot_columns);
  auto inv_t = inverse(square).transpose();  // D_sub * square^T = I
  FieldMatrix d(net.dimension, m.cols(), net.field);
  for (std::size_t r = 0; r < net.dimension; ++r)
    for (std::size_t j = 0; j < ech.pivot_columns.size(); ++j) d(r, ech.pivot_columns[j]) = inv_t(r, j);
  return d;
}

struct SimulationResult {
  std::vector<FieldValue> channel_symbols;
  std::vector<std::vector<FieldValue>> reconstructions;  // per client
  std::vector<bool> exact;                               // reconstruction == W
  std::vector<std::size_t> edge_symbols;                 // symbols sent per instance edge
};

// Pushes W through the network symbol by symbol, then decodes at each client.
inline SimulationResult simulate(const CodedNetwork& net, const CodeAssignment& code, std::span<const FieldValue> w) {
  if (w.size() != net.dimension) throw Error(ErrorCode::DimensionMismatch, "message length must be N");
  const auto& f = net.field;
  SimulationResult out;
  out.channel_symbols.assign(net.channel_count(), 0);
  for (std::size_t c = 0; c < net.channel_count(); ++c)
    for (std::size_t r = 0; r < net.dimension; ++r)
      out.channel_symbols[c] = f.add(out.channel_symbols[c], f.mul(net.source_matrix(r, c), w[r] % f.modulus()));
  for (std::size_t idx = 0; idx < net.adjacency.size(); ++idx) {
    auto [a, b] = net.adjacency[idx];
    out.channel_symbols[b] = f.add(out.channel_symbols[b], f.mul(code.coefficients[idx], out.channel_symbols[a]));
  }
  for (std::size_t i = 0; i < net.clients.size(); ++i) {
    auto d = build_decoder(net, code, i);
    std::vector<FieldValue> decoded(net.dimension, 0);
    for (std::size_t r = 0; r < net.dimension; ++r)
      for (std::size_t j = 0; j < net.client_inputs[i].size(); ++j)
        decoded[r] = f.add(decoded[r], f.mul(d(r, j), out.channel_symbols[net.client_inputs[i][j]]));
    bool match = true;
    for (std::size_t r = 0; r < net.dimension; ++r) match = match && decoded[r] == w[r] % f.modulus();
    out.exact.push_back(match);
    out.reconstructions.push_back(std::move(decoded));
  }
  out.edge_symbols = net.edge_symbols;
  return out;
}

}  // namespace mmcast
