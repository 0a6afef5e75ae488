#pragma once

#include <string>
#include <vector>

#include "mmcast/feasibility.hpp"

namespace mmcast {

struct SingleClientSolution {
  RateVector rates;  // on E_t
  Rational cost;
  std::vector<Subset> tight_sets;  // local nonempty S with dR(S) = g_t(S)
  std::size_t iterations = 0;      // LP solves
};

namespace detail {

inline std::string describe_certificate(const NetworkInstance& inst, const ClientSubproblem& sub,
                                        const FeasibilityCertificate& cert) {
  std::string names;
  for (const auto& n : sub.names(cert.set, inst)) names += (names.empty() ? "" : ",") + n;
  return "client=" + inst.node_name(sub.client) + ";set={" + names + "};deficit=" + to_string(cert.deficit());
}

inline std::vector<Subset> tight_sets(const ClientSubproblem& sub, std::span<const Rational> g,
                                      std::span<const Rational> rates) {
  std::vector<Subset> tight;
  for (Subset s = 1; s <= sub.full(); ++s) {
    Rational v = -g[s];
    auto coeff = sub.boundary_coefficients(s);
    for (std::size_t k = 0; k < coeff.size(); ++k) {
      if (coeff[k] > 0) v += rates[k];
      if (coeff[k] < 0) v -= rates[k];
    }
    if (v == 0) tight.push_back(s);
  }
  return tight;
}

}  // namespace detail

// Minimum weighted-rate point of one client's region intersected with the
// capacity box. Keeps its constraint pool between calls, which is what the
// multi-client subgradient loop relies on.
class ClientRegionSolver {
 public:
  ClientRegionSolver(const NetworkInstance& inst, ClientSubproblem sub, const EntropyOracle& oracle,
                     std::vector<Rational> capacity)
      : inst_(&inst), sub_(std::move(sub)), g_(conditional_table(inst, sub_, oracle)), capacity_(std::move(capacity)) {}

  const ClientSubproblem& subproblem() const noexcept { return sub_; }
  const std::vector<Rational>& conditional() const noexcept { return g_; }

  // `weights` has one entry per E_t edge; zero weights are allowed.
  SingleClientSolution solve(std::span<const Rational> weights, bool with_tight_sets = true) {
    std::vector<std::size_t> vars;
    auto lp = client_rate_lp(sub_, weights, capacity_, vars);
    auto solved = solve_with_region(lp, vars, sub_, g_, pool_);
    if (solved.solution.status != LpStatus::Optimal)
      throw Error(ErrorCode::Infeasible, "client rate LP is infeasible", inst_->node_name(sub_.client));
    SingleClientSolution out;
    out.cost = solved.solution.value;
    out.iterations = solved.iterations;
    std::vector<Rational> flat;
    for (std::size_t k = 0; k < sub_.edges.size(); ++k) {
      flat.push_back(solved.solution.x[vars[k]]);
      out.rates[sub_.edges[k]] = flat.back();
    }
    if (with_tight_sets) out.tight_sets = detail::tight_sets(sub_, g_, flat);
    return out;
  }

 private:
  const NetworkInstance* inst_;
  ClientSubproblem sub_;
  std::vector<Rational> g_;
  std::vector<Rational> capacity_;
  std::vector<Subset> pool_;
};

inline std::vector<Rational> subgraph_weights(const ClientSubproblem& sub, const std::vector<Rational>& per_edge) {
  std::vector<Rational> w;
  for (auto e : sub.edges) w.push_back(per_edge[e]);
  return w;
}

// min sum alpha_e R_e over the client's region and 0 <= R <= c, by cutting
// planes with an exact SFM separation step.
inline SingleClientSolution solve_single_client(const NetworkInstance& inst, const ClientSubproblem& sub,
                                                const EntropyOracle& oracle, const std::vector<Rational>& cost,
                                                const std::vector<Rational>& capacity) {
  auto cert = check_feasible_single(inst, sub, oracle, capacity);
  if (!cert.feasible)
    throw Error(ErrorCode::Infeasible, "client is infeasible under the given capacities",
                detail::describe_certificate(inst, sub, cert));
  ClientRegionSolver solver(inst, sub, oracle, capacity);
  auto solution = solver.solve(subgraph_weights(sub, cost));
  std::vector<Rational> flat;
  for (auto e : sub.edges) flat.push_back(solution.rates.at(e));
  if (most_violated_set(sub, solver.conditional(), flat).value < 0)
    throw Error(ErrorCode::Infeasible, "optimizer returned a point outside the region");
  return solution;
}

inline constexpr std::size_t kBruteForceRegionLimit = 16;

// Same problem with every region inequality written out.
inline SingleClientSolution solve_single_client_bruteforce(const NetworkInstance& inst, const ClientSubproblem& sub,
                                                           const EntropyOracle& oracle,
                                                           const std::vector<Rational>& cost,
                                                           const std::vector<Rational>& capacity) {
  if (sub.size() > kBruteForceRegionLimit)
    throw Error(ErrorCode::GroundTooLarge, "full enumeration limited to 16 sources", std::to_string(sub.size()));
  auto g = conditional_table(inst, sub, oracle);
  std::vector<std::size_t> vars;
  auto weights = subgraph_weights(sub, cost);
  auto lp = client_rate_lp(sub, weights, capacity, vars);
  for (Subset s = 1; s <= sub.full(); ++s) lp.add_constraint(region_row(sub, s, g[s], vars));
  auto sol = solve_lp(lp);
  if (sol.status != LpStatus::Optimal)
    throw Error(ErrorCode::Infeasible, "client is infeasible under the given capacities", inst.node_name(sub.client));
  SingleClientSolution out;
  out.cost = sol.value;
  out.iterations = 1;
  std::vector<Rational> flat;
  for (std::size_t k = 0; k < sub.edges.size(); ++k) {
    flat.push_back(sol.x[vars[k]]);
    out.rates[sub.edges[k]] = flat.back();
  }
  out.tight_sets = detail::tight_sets(sub, g, flat);
  return out;
}

}  // namespace mmcast
