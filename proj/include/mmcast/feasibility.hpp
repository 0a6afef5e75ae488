#pragma once

#include <future>
#include <vector>

#include "mmcast/region.hpp"

namespace mmcast {

// Outcome of the cut test c(D+S) >= g_t(S) for one client. `set` is the
// violating set when infeasible, otherwise the nonempty set of least slack.
struct FeasibilityCertificate {
  std::size_t client = 0;
  bool feasible = false;
  Subset set = 0;  // local to the client's M_t
  Rational cut_capacity;
  Rational required;
  Rational slack;  // cut_capacity - required

  Rational deficit() const { return slack < 0 ? Rational(-slack) : Rational(0); }
};

// Minimizes the submodular function S -> c(D+S) - g_t(S) over nonempty
// S in M_t; the client is feasible iff the minimum is nonnegative.
inline FeasibilityCertificate check_feasible_single(const NetworkInstance& inst, const ClientSubproblem& sub,
                                                    const EntropyOracle& oracle,
                                                    const std::vector<Rational>& capacity) {
  auto g = conditional_table(inst, sub, oracle);
  SetFunction<Rational> slack{sub.size(),
                              [&](Subset s) { return Rational(cut_capacity(capacity, s, sub) - g[s]); },
                              SetFunctionKind::Submodular};
  auto best = sfm_brute_force(slack, true);
  FeasibilityCertificate cert;
  cert.client = sub.client;
  cert.feasible = best.value >= 0;
  cert.set = best.set;
  cert.cut_capacity = cut_capacity(capacity, best.set, sub);
  cert.required = g[best.set];
  cert.slack = best.value;
  return cert;
}

struct MultiFeasibility {
  std::vector<FeasibilityCertificate> clients;  // instance client order
  bool feasible() const {
    for (const auto& c : clients)
      if (!c.feasible) return false;
    return true;
  }
};

// Runs `work(i)` for i in [0, count) on up to `threads` workers and returns
// the results in index order.
template <class Fn>
auto parallel_map(std::size_t count, std::size_t threads, Fn&& work) {
  using Result = decltype(work(std::size_t{0}));
  std::vector<Result> out;
  out.reserve(count);
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) out.push_back(work(i));
    return out;
  }
  std::vector<std::future<Result>> pending;
  for (std::size_t start = 0; start < count; start += threads) {
    pending.clear();
    for (std::size_t i = start; i < std::min(count, start + threads); ++i)
      pending.push_back(std::async(std::launch::async, [&work, i] { return work(i); }));
    for (auto& f : pending) out.push_back(f.get());
  }
  return out;
}

inline MultiFeasibility check_feasible_multi(const NetworkInstance& inst, const EntropyOracle& oracle,
                                             std::size_t threads = 1) {
  auto recon = check_reconstructability(inst, oracle);
  if (!recon.passed()) {
    std::string who;
    for (const auto& c : recon.clients)
      if (!c.complete) who += (who.empty() ? "" : ",") + inst.node_name(c.client);
    throw Error(ErrorCode::ReconstructabilityViolated,
                "some clients cannot reach the full source entropy", who);
  }
  auto capacity = inst.capacities();
  MultiFeasibility result;
  result.clients = parallel_map(inst.clients().size(), threads, [&](std::size_t i) {
    auto sub = client_subproblem(inst, oracle, inst.clients()[i]);
    return check_feasible_single(inst, sub, oracle, capacity);
  });
  return result;
}

// Some rate vector with dR in the client's region and 0 <= R <= c, found by
// the unit-cost optimizer and checked for membership before returning.
inline RateVector achievable_point(const NetworkInstance& inst, const ClientSubproblem& sub,
                                   const EntropyOracle& oracle, const std::vector<Rational>& capacity) {
  auto cert = check_feasible_single(inst, sub, oracle, capacity);
  if (!cert.feasible)
    throw Error(ErrorCode::Infeasible, "client has no achievable rate vector",
                inst.node_name(sub.client));
  auto g = conditional_table(inst, sub, oracle);
  std::vector<Rational> unit(sub.edges.size(), Rational(1));
  std::vector<std::size_t> vars;
  auto lp = client_rate_lp(sub, unit, capacity, vars);
  std::vector<Subset> pool;
  auto solved = solve_with_region(lp, vars, sub, g, pool);
  if (solved.solution.status != LpStatus::Optimal)
    throw Error(ErrorCode::Infeasible, "rate LP infeasible", inst.node_name(sub.client));
  RateVector rates;
  std::vector<Rational> flat;
  for (std::size_t k = 0; k < sub.edges.size(); ++k) {
    rates[sub.edges[k]] = solved.solution.x[vars[k]];
    flat.push_back(solved.solution.x[vars[k]]);
  }
  if (most_violated_set(sub, g, flat).value < 0 || boundary(rates, sub.full(), sub) != g[sub.full()])
    throw Error(ErrorCode::Infeasible, "achievable point failed region membership", inst.node_name(sub.client));
  return rates;
}

}  // namespace mmcast
