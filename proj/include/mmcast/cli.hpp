#pragma once

#include <openssl/evp.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mmcast/mmcast.hpp"

namespace mmcast::cli {

inline constexpr const char* kVersion = "0.1.0";

namespace detail {

inline std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open '" + path + "'", path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 15]);
  }
  return out;
}

// 12 significant digits, stored as the double that prints that way.
inline json float12(double v) {
  if (!std::isfinite(v)) return nullptr;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::strtod(buf, nullptr);
}

inline std::string format12(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline json names_json(const std::vector<std::string>& names) { return names; }

inline json rates_json(const NetworkInstance& inst, const RateVector& rates) {
  json out = json::object();
  for (const auto& [e, r] : rates) out[inst.edges()[e].id] = to_string(r);
  return out;
}

inline StepSchedule parse_schedule(const std::string& text) {
  auto fail = [&] {
    return Error(ErrorCode::InvalidParameters, "schedule must be s1:a,b,c or s2:a", text);
  };
  auto colon = text.find(':');
  if (colon == std::string::npos) throw fail();
  std::vector<double> params;
  std::stringstream ss(text.substr(colon + 1));
  std::string part;
  while (std::getline(ss, part, ',')) {
    char* end = nullptr;
    double v = std::strtod(part.c_str(), &end);
    if (part.empty() || *end != '\0') throw fail();
    params.push_back(v);
  }
  StepSchedule schedule;
  auto kind = text.substr(0, colon);
  if (kind == "s1" && params.size() == 3) schedule = HarmonicSchedule{params[0], params[1], params[2]};
  else if (kind == "s2" && params.size() == 1) schedule = PowerSchedule{params[0]};
  else throw fail();
  step_size(schedule, 1);
  return schedule;
}

inline std::string schedule_string(const StepSchedule& s) {
  if (auto* h = std::get_if<HarmonicSchedule>(&s))
    return "s1:" + format12(h->a) + "," + format12(h->b) + "," + format12(h->c);
  return "s2:" + format12(std::get<PowerSchedule>(s).a);
}

inline std::vector<FieldValue> parse_message(const std::string& text) {
  std::vector<FieldValue> w;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    char* end = nullptr;
    long long v = std::strtoll(part.c_str(), &end, 10);
    if (part.empty() || *end != '\0' || v < 0)
      throw Error(ErrorCode::InvalidInput, "message must be comma-separated nonnegative integers", text);
    w.push_back(static_cast<FieldValue>(v));
  }
  return w;
}

struct Outcome {
  json result;
  int status = 0;
};

struct Options {
  std::string input;
  std::size_t threads = 1;
  std::uint64_t seed = 0;
  std::string client;
  bool all_clients = false;
  std::string method = "exact";
  std::string schedule = "s1:1,1,1";
  std::size_t iters = 50000;
  double gap = 1e-2;
  std::string trace_csv;
  std::string rates;
  std::optional<std::uint64_t> q;
  std::string w;
};

inline json certificate_json(const NetworkInstance& inst, const ClientSubproblem& sub,
                             const FeasibilityCertificate& cert) {
  json c;
  c["client"] = inst.node_name(cert.client);
  c["status"] = cert.feasible ? "feasible" : "infeasible";
  c["violating_set"] = cert.feasible ? json(nullptr) : names_json(sub.names(cert.set, inst));
  c["deficit"] = to_string(cert.deficit());
  c["slack"] = to_string(cert.slack);
  c["tightest_set"] = names_json(sub.names(cert.set, inst));
  c["cut_capacity"] = to_string(cert.cut_capacity);
  c["required"] = to_string(cert.required);
  return c;
}

inline Outcome run_validate(const LoadedInstance& li) {
  const auto& inst = li.network;
  json r;
  r["nodes"] = inst.node_names().size();
  r["edges"] = inst.edges().size();
  json sources = json::array(), order = json::array(), clients = json::array();
  for (auto m : inst.sources()) sources.push_back(inst.node_name(m));
  for (auto v : inst.topological_order()) order.push_back(inst.node_name(v));
  for (auto t : inst.clients()) clients.push_back(inst.node_name(t));
  r["sources"] = sources;
  r["clients"] = clients;
  r["topological_order"] = order;
  r["unit"] = li.oracle.unit();
  auto recon = check_reconstructability(inst, li.oracle);
  r["total_entropy"] = to_string(recon.total_entropy);
  json per = json::array();
  for (const auto& c : recon.clients)
    per.push_back({{"client", inst.node_name(c.client)}, {"entropy", to_string(c.entropy)}, {"complete", c.complete}});
  r["reconstructability"] = {{"passed", recon.passed()}, {"clients", per}};
  auto poly = validate_polymatroid(li.oracle);
  r["polymatroid"] = {{"ok", poly.ok()},
                      {"exhaustive", poly.exhaustive},
                      {"pairs_checked", poly.pairs_checked},
                      {"violations", poly.violation_count}};
  return {r, recon.passed() && poly.ok() ? 0 : 2};
}

inline Outcome run_feas(const LoadedInstance& li, const Options& o) {
  const auto& inst = li.network;
  auto feas = check_feasible_multi(inst, li.oracle, o.threads);
  json clients = json::array();
  for (const auto& cert : feas.clients)
    clients.push_back(certificate_json(inst, client_subproblem(inst, li.oracle, cert.client), cert));
  return {{{"feasible", feas.feasible()}, {"clients", clients}}, feas.feasible() ? 0 : 2};
}

inline json tight_sets_json(const NetworkInstance& inst, const ClientSubproblem& sub,
                            const std::vector<Subset>& sets) {
  json out = json::array();
  for (auto s : sets) out.push_back(sub.names(s, inst));
  return out;
}

inline json multicast_json(const NetworkInstance& inst, const MulticastRates& m) {
  json z = json::object(), per = json::object();
  for (std::size_t e = 0; e < inst.edges().size(); ++e) z[inst.edges()[e].id] = to_string(m.envelope[e]);
  for (std::size_t i = 0; i < inst.clients().size(); ++i)
    per[inst.node_name(inst.clients()[i])] = rates_json(inst, m.per_client[i]);
  return {{"Z", z}, {"per_client", per}, {"cost", to_string(m.cost)}};
}

inline Outcome run_solve(const LoadedInstance& li, const Options& o) {
  const auto& inst = li.network;
  if (o.all_clients == !o.client.empty())
    throw Error(ErrorCode::InvalidParameters, "solve needs exactly one of --client and --all-clients");
  if (!o.all_clients) {
    auto t = inst.node_index(o.client);
    if (!inst.is_client(t)) throw Error(ErrorCode::InvalidInput, "'" + o.client + "' is not a client", o.client);
    auto sub = client_subproblem(inst, li.oracle, t);
    auto sol = solve_single_client(inst, sub, li.oracle, inst.costs(), inst.capacities());
    return {{{"client", o.client},
             {"rates", rates_json(inst, sol.rates)},
             {"cost", to_string(sol.cost)},
             {"tight_sets", tight_sets_json(inst, sub, sol.tight_sets)}},
            0};
  }
  if (o.method == "exact") {
    auto r = multicast_json(inst, solve_multi_exact(inst, li.oracle));
    r["method"] = "exact";
    return {r, 0};
  }
  if (o.method != "subgradient")
    throw Error(ErrorCode::InvalidParameters, "method must be exact or subgradient", o.method);
  SubgradientOptions so;
  so.schedule = parse_schedule(o.schedule);
  so.max_iterations = o.iters;
  so.gap_tolerance = o.gap;
  so.threads = o.threads;
  auto res = solve_multi_subgradient(inst, li.oracle, so);
  auto r = multicast_json(inst, res.rates);
  r["method"] = "subgradient";
  r["iterations"] = res.iterations;
  r["converged"] = res.converged;
  r["best_dual"] = to_string(res.best_dual);
  r["gap"] = float12(res.gap);
  json trace = json::array();
  for (const auto& t : res.trace)
    trace.push_back({{"n", t.n}, {"dual", float12(t.dual.get_d())}, {"primal", float12(t.primal.get_d())},
                     {"gap", float12(t.gap)}});
  r["trace"] = trace;
  if (!o.trace_csv.empty()) {
    std::ofstream csv(o.trace_csv);
    if (!csv) throw Error(ErrorCode::InvalidInput, "cannot write '" + o.trace_csv + "'", o.trace_csv);
    csv << "n,dual,primal,gap\n";
    for (const auto& t : res.trace)
      csv << t.n << ',' << format12(t.dual.get_d()) << ',' << format12(t.primal.get_d()) << ','
          << format12(t.gap) << '\n';
  }
  return {r, res.converged ? 0 : 2};
}

inline json load_document(const std::string& bytes, const std::optional<std::uint64_t>& q) {
  json doc;
  try {
    doc = json::parse(bytes);
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::InvalidInput, std::string("invalid JSON: ") + ex.what());
  }
  if (q) {
    if (!doc.contains("source_model") || doc["source_model"].value("kind", "") != "linear")
      throw Error(ErrorCode::NotLinearModel, "--q applies to linear source models only");
    doc["source_model"]["q"] = *q;
  }
  return doc;
}

struct CodedRun {
  CodedNetwork net;
  CodeAssignment code;
};

inline CodedRun build_code(const LoadedInstance& li, const Options& o) {
  if (o.rates.empty()) throw Error(ErrorCode::InvalidParameters, "--rates is required");
  auto rates = parse_rates(read_json_file(o.rates), li.network);
  auto net = build_coded_network(li.network, li.oracle, rates);
  auto code = assign_coefficients(net, o.seed);
  return {std::move(net), std::move(code)};
}

inline json channel_json(const NetworkInstance& inst, const Channel& c) {
  json j;
  j["kind"] = c.kind == Channel::Kind::Source ? "source" : "edge";
  j["tail"] = c.tail == SIZE_MAX ? json("S") : json(inst.node_name(c.tail));
  j["head"] = inst.node_name(c.head);
  j["edge"] = c.edge == SIZE_MAX ? json(nullptr) : json(inst.edges()[c.edge].id);
  return j;
}

inline Outcome run_code(const LoadedInstance& li, const Options& o) {
  const auto& inst = li.network;
  auto [net, code] = build_code(li, o);
  auto global = propagate_global_vectors(net, code);
  json channels = json::array();
  for (std::size_t c = 0; c < net.channel_count(); ++c) {
    auto j = channel_json(inst, net.channels[c]);
    std::vector<FieldValue> v;
    for (std::size_t r = 0; r < net.dimension; ++r) v.push_back(global(r, c));
    j["global_vector"] = v;
    channels.push_back(j);
  }
  json clients = json::array();
  for (std::size_t i = 0; i < net.clients.size(); ++i)
    clients.push_back({{"client", inst.node_name(net.clients[i])},
                       {"rank", code.client_ranks[i]},
                       {"inputs", net.client_inputs[i].size()},
                       {"decoder", build_decoder(net, code, i).to_rows()}});
  json edges = json::object();
  for (std::size_t e = 0; e < inst.edges().size(); ++e) edges[inst.edges()[e].id] = net.edge_symbols[e];
  return {{{"q", net.field.modulus()},
           {"N", net.dimension},
           {"scale", net.scale},
           {"attempts", code.attempts},
           {"coefficients", code.coefficients},
           {"channels", channels},
           {"edge_symbols", edges},
           {"clients", clients}},
          0};
}

inline Outcome run_simulate(const LoadedInstance& li, const Options& o) {
  const auto& inst = li.network;
  auto [net, code] = build_code(li, o);
  auto w = parse_message(o.w);
  auto sim = simulate(net, code, w);
  json clients = json::array();
  bool all = true;
  for (std::size_t i = 0; i < net.clients.size(); ++i) {
    clients.push_back({{"client", inst.node_name(net.clients[i])},
                       {"reconstruction", sim.reconstructions[i]},
                       {"exact", static_cast<bool>(sim.exact[i])}});
    all = all && sim.exact[i];
  }
  json edges = json::object();
  for (std::size_t e = 0; e < inst.edges().size(); ++e) {
    std::vector<FieldValue> symbols;
    for (std::size_t c = 0; c < net.channel_count(); ++c)
      if (net.channels[c].kind == Channel::Kind::Edge && net.channels[c].edge == e)
        symbols.push_back(sim.channel_symbols[c]);
    edges[inst.edges()[e].id] = {{"count", sim.edge_symbols[e]}, {"symbols", symbols}};
  }
  std::vector<FieldValue> reduced;
  for (auto x : w) reduced.push_back(x % net.field.modulus());
  return {{{"W", reduced}, {"scale", net.scale}, {"attempts", code.attempts}, {"clients", clients}, {"edges", edges}},
          all ? 0 : 2};
}

// Full-enumeration baselines: every cut inequality and every region row.
inline Outcome run_oracle(const LoadedInstance& li, const Options& o) {
  const auto& inst = li.network;
  auto capacity = inst.capacities();
  auto cost = inst.costs();
  json clients = json::array();
  bool feasible = true;
  for (auto t : inst.clients()) {
    if (!o.client.empty() && inst.node_name(t) != o.client) continue;
    auto sub = client_subproblem(inst, li.oracle, t);
    auto g = conditional_table(inst, sub, li.oracle);
    std::optional<Rational> least;
    Subset where = 0;
    for (Subset s = 1; s <= sub.full(); ++s) {
      Rational slack = cut_capacity(capacity, s, sub) - g[s];
      if (!least || slack < *least) least = slack, where = s;
    }
    json c{{"client", inst.node_name(t)},
           {"feasible", *least >= 0},
           {"min_slack", to_string(*least)},
           {"set", sub.names(where, inst)}};
    if (*least >= 0) c["cost"] = to_string(solve_single_client_bruteforce(inst, sub, li.oracle, cost, capacity).cost);
    feasible = feasible && *least >= 0;
    clients.push_back(c);
  }
  json r{{"feasible", feasible}, {"clients", clients}};
  if (feasible && o.client.empty()) r["multi_cost"] = to_string(solve_multi_exact(inst, li.oracle).cost);
  return {r, feasible ? 0 : 2};
}

}  // namespace detail

// Parses argv, runs one subcommand and writes a JSON document to `out`.
// Returns 0 on success, 2 when the instance is infeasible or a verification
// failed, 1 on input errors.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multisource multicast rate optimization and network coding"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();
  detail::Options o;
  app.add_option("--threads", o.threads, "Worker threads for per-client solves")->check(CLI::PositiveNumber);
  app.add_option("--seed", o.seed, "Seed for all randomness");

  auto add_input = [&](CLI::App* sub) { sub->add_option("input", o.input, "Instance JSON")->required(); };
  auto* validate = app.add_subcommand("validate", "Check an instance and its source model");
  auto* feas = app.add_subcommand("feas", "Cut-condition feasibility per client");
  auto* solve = app.add_subcommand("solve", "Minimum-cost rates");
  auto* code = app.add_subcommand("code", "Random linear network code for given rates");
  auto* sim = app.add_subcommand("simulate", "Send a message through a network code");
  auto* oracle = app.add_subcommand("oracle", "Brute-force feasibility and LP baselines");
  for (auto* s : {validate, feas, solve, code, sim, oracle}) add_input(s);
  solve->add_option("--client", o.client, "Single client to optimize for");
  solve->add_flag("--all-clients", o.all_clients, "Optimize the multicast envelope");
  solve->add_option("--method", o.method, "exact or subgradient")->check(CLI::IsMember({"exact", "subgradient"}));
  solve->add_option("--schedule", o.schedule, "s1:a,b,c for a/(b+cn), s2:a for n^-a");
  solve->add_option("--iters", o.iters, "Subgradient iteration limit")->check(CLI::PositiveNumber);
  solve->add_option("--gap", o.gap, "Relative duality gap target")->check(CLI::NonNegativeNumber);
  solve->add_option("--trace-csv", o.trace_csv, "Write the subgradient trace as CSV");
  for (auto* s : {code, sim}) {
    s->add_option("--rates", o.rates, "Rates JSON (edge id to rational)")->required();
    s->add_option("--q", o.q, "Override the field modulus");
  }
  sim->add_option("--w", o.w, "Message W, comma-separated")->required();
  oracle->add_option("--client", o.client, "Restrict to one client");

  json manifest;
  auto fail = [&](const Error& e, json context_manifest) {
    json doc;
    if (!context_manifest.is_null()) doc["manifest"] = context_manifest;
    doc["error"] = {{"code", to_string(e.code())}, {"message", e.what()}, {"context", e.context()}};
    out << doc.dump(2) << '\n';
    return is_outcome_failure(e.code()) ? 2 : 1;
  };

  std::vector<const char*> argv{"mmcast"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    return fail(Error(ErrorCode::InvalidParameters, e.what(), e.get_name()), nullptr);
  }

  auto* chosen = app.get_subcommands().front();
  const std::string name = chosen->get_name();
  manifest["subcommand"] = name;
  manifest["input"] = o.input;
  json params{{"seed", o.seed}};
  if (name == "solve") {
    params["client"] = o.all_clients ? json("*") : json(o.client);
    if (o.all_clients) params["method"] = o.method;
    if (o.all_clients && o.method == "subgradient") {
      params["iters"] = o.iters;
      params["gap"] = detail::float12(o.gap);
    }
  }
  if (name == "code" || name == "simulate") {
    params["rates"] = o.rates;
    params["q"] = o.q ? json(*o.q) : json(nullptr);
  }
  if (name == "simulate") params["w"] = o.w;
  if (name == "oracle") params["client"] = o.client.empty() ? json("*") : json(o.client);
  manifest["version"] = kVersion;

  try {
    if (name == "solve" && o.all_clients && o.method == "subgradient")
      params["schedule"] = detail::schedule_string(detail::parse_schedule(o.schedule));
    manifest["params"] = params;
    auto bytes = detail::read_bytes(o.input);
    manifest["digest"] = "sha256:" + detail::sha256_hex(bytes);
    auto li = load_instance(detail::load_document(bytes, o.q));
    detail::Outcome outcome;
    if (name == "validate") outcome = detail::run_validate(li);
    else if (name == "feas") outcome = detail::run_feas(li, o);
    else if (name == "solve") outcome = detail::run_solve(li, o);
    else if (name == "code") outcome = detail::run_code(li, o);
    else if (name == "simulate") outcome = detail::run_simulate(li, o);
    else outcome = detail::run_oracle(li, o);
    json doc{{"manifest", manifest}, {"result", outcome.result}};
    out << doc.dump(2) << '\n';
    return outcome.status;
  } catch (const Error& e) {
    if (!manifest.contains("params")) manifest["params"] = params;
    return fail(e, manifest);
  } catch (const std::exception& e) {
    if (!manifest.contains("params")) manifest["params"] = params;
    return fail(Error(ErrorCode::InvalidInput, e.what()), manifest);
  }
}

}  // namespace mmcast::cli
