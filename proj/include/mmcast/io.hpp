#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "mmcast/entropy.hpp"
#include "mmcast/network.hpp"

namespace mmcast {

using json = nlohmann::json;

struct LoadedInstance {
  NetworkInstance network;
  EntropyOracle oracle;
};

namespace detail {

inline Rational rational_field(const json& v, const std::string& what) {
  if (v.is_string()) return parse_rational(v.get<std::string>());
  if (v.is_number_integer()) return rational_from_int(v.get<std::int64_t>());
  if (v.is_number_float()) return parse_rational(v.dump());
  throw Error(ErrorCode::InvalidInput, what + " must be a number or a decimal string", v.dump());
}

inline const json& required(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key))
    throw Error(ErrorCode::InvalidInput, std::string("missing key '") + key + "'", key);
  return obj.at(key);
}

inline std::vector<std::string> split_names(const std::string& key) {
  std::vector<std::string> names;
  std::stringstream ss(key);
  std::string part;
  while (std::getline(ss, part, ',')) {
    auto b = part.find_first_not_of(" \t"), e = part.find_last_not_of(" \t");
    if (b == std::string::npos) throw Error(ErrorCode::InvalidInput, "empty name in subset key", key);
    names.push_back(part.substr(b, e - b + 1));
  }
  return names;
}

inline std::size_t ground_index(const std::vector<std::string>& ground, const std::string& name) {
  for (std::size_t i = 0; i < ground.size(); ++i)
    if (ground[i] == name) return i;
  throw Error(ErrorCode::UnknownNode, "'" + name + "' is not a source node", name);
}

inline SourceModel parse_source_model(const json& sm, const std::vector<std::string>& ground) {
  const std::string kind = required(sm, "kind").get<std::string>();
  const std::size_t n = ground.size();
  if (kind == "linear") {
    LinearSource lin;
    lin.field = PrimeField(required(sm, "q").get<std::uint64_t>());
    lin.dimension = required(sm, "N").get<std::size_t>();
    lin.blocklength = sm.value("n", std::size_t{1});
    for (std::size_t i = 0; i < n; ++i) lin.observations.emplace_back(0, lin.dimension, lin.field);
    for (const auto& [name, rows] : required(sm, "matrices").items()) {
      auto data = rows.get<std::vector<std::vector<std::int64_t>>>();
      for (const auto& row : data)
        if (row.size() != lin.dimension)
          throw Error(ErrorCode::InvalidSourceModel, "observation rows must have N entries", name);
      lin.observations[ground_index(ground, name)] = FieldMatrix::from_rows(data, lin.field, lin.dimension);
    }
    return lin;
  }
  if (kind == "tabular") {
    TabularSource tab;
    tab.unit = sm.value("unit", std::string("packets"));
    for (const auto& [key, value] : required(sm, "entropies").items()) {
      Subset s = 0;
      for (const auto& name : split_names(key)) s |= Subset{1} << ground_index(ground, name);
      tab.entropies[s] = rational_field(value, "entropy");
    }
    if (n > 20) throw Error(ErrorCode::InvalidSourceModel, "tabular model limited to 20 sources");
    for (Subset s = 1; s <= full_subset(n); ++s)
      if (!tab.entropies.count(s)) {
        std::string names;
        for (std::size_t i = 0; i < n; ++i)
          if (contains(s, i)) names += (names.empty() ? "" : ",") + ground[i];
        throw Error(ErrorCode::UnknownSubset, "tabular model misses subset {" + names + "}", names);
      }
    return tab;
  }
  if (kind == "pmf") {
    PmfSource pmf;
    pmf.alphabet_sizes.assign(n, 1);
    for (const auto& [name, size] : required(sm, "alphabets").items())
      pmf.alphabet_sizes[ground_index(ground, name)] = size.get<std::size_t>();
    for (const auto& p : required(sm, "table")) pmf.table.push_back(rational_field(p, "probability"));
    return pmf;
  }
  throw Error(ErrorCode::InvalidSourceModel, "unknown source model kind '" + kind + "'", kind);
}

}  // namespace detail

// Builds and validates an instance from its JSON description.
inline LoadedInstance load_instance(const json& doc) {
  try {
    RawInstance raw;
    raw.nodes = detail::required(doc, "nodes").get<std::vector<std::string>>();
    for (const auto& e : detail::required(doc, "edges"))
      raw.edges.push_back({detail::required(e, "id").get<std::string>(), detail::required(e, "tail").get<std::string>(),
                           detail::required(e, "head").get<std::string>(),
                           detail::rational_field(detail::required(e, "capacity"), "capacity"),
                           detail::rational_field(detail::required(e, "cost"), "cost")});
    raw.clients = detail::required(doc, "clients").get<std::vector<std::string>>();
    auto network = validate_instance(raw);
    std::vector<std::string> ground;
    for (auto m : network.sources()) ground.push_back(network.node_name(m));
    auto model = detail::parse_source_model(detail::required(doc, "source_model"), ground);
    return {std::move(network), EntropyOracle(std::move(ground), std::move(model))};
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::InvalidInput, std::string("malformed instance: ") + ex.what());
  }
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open '" + path + "'", path);
  try {
    return json::parse(in);
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::InvalidInput, "invalid JSON in '" + path + "': " + ex.what(), path);
  }
}

inline LoadedInstance load_instance_file(const std::string& path) { return load_instance(read_json_file(path)); }

// Rates from a JSON object {edge id: rational}. Also accepts the output of
// `solve` ("Z" for all clients, "rates" for one client), with or without the
// surrounding manifest. Missing edges get 0.
inline RateVector parse_rates(const json& doc, const NetworkInstance& inst) {
  const json* obj = doc.contains("result") ? &doc.at("result") : &doc;
  if (obj->contains("Z")) obj = &obj->at("Z");
  else if (obj->contains("rates")) obj = &obj->at("rates");
  if (!obj->is_object()) throw Error(ErrorCode::InvalidInput, "rates must be an object keyed by edge id");
  RateVector rates;
  for (std::size_t e = 0; e < inst.edges().size(); ++e) rates[e] = 0;
  for (const auto& [id, value] : obj->items()) rates[inst.edge_index(id)] = detail::rational_field(value, "rate");
  return rates;
}

}  // namespace mmcast
