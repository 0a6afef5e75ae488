#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "mmcast/rate_single.hpp"

namespace mmcast {

// Rates for all clients at once: Z_e is the envelope max_t R_e^(t).
struct MulticastRates {
  std::vector<Rational> envelope;      // Z, one per instance edge
  std::vector<RateVector> per_client;  // instance client order
  Rational cost;
};

inline constexpr std::size_t kExactRowBudget = std::size_t{1} << 16;

namespace detail {

inline void require_feasible(const NetworkInstance& inst, const EntropyOracle& oracle) {
  auto feas = check_feasible_multi(inst, oracle);
  for (const auto& cert : feas.clients)
    if (!cert.feasible) {
      auto sub = client_subproblem(inst, oracle, cert.client);
      throw Error(ErrorCode::Infeasible, "instance is infeasible", describe_certificate(inst, sub, cert));
    }
}

}  // namespace detail

// The multi-client LP with every region inequality of every client written
// out, coupled through Z_e >= R_e^(t).
inline MulticastRates solve_multi_exact(const NetworkInstance& inst, const EntropyOracle& oracle,
                                        std::size_t row_budget = kExactRowBudget) {
  std::vector<ClientSubproblem> subs;
  std::size_t rows = 0;
  for (auto t : inst.clients()) {
    subs.push_back(client_subproblem(inst, oracle, t));
    if (subs.back().size() > kBruteForceRegionLimit)
      throw Error(ErrorCode::BudgetExceeded, "client region too large for the exact LP", inst.node_name(t));
    rows += std::size_t{1} << subs.back().size();
  }
  if (rows > row_budget)
    throw Error(ErrorCode::BudgetExceeded, "region constraints exceed the exact LP budget", std::to_string(rows));
  detail::require_feasible(inst, oracle);

  const auto& edges = inst.edges();
  const auto capacity = inst.capacities();
  LinearProgram lp;
  for (const auto& e : edges) lp.add_variable(e.cost, {Rational(0), std::nullopt});
  std::vector<std::vector<std::size_t>> vars(subs.size());
  for (std::size_t i = 0; i < subs.size(); ++i) {
    const auto& sub = subs[i];
    auto g = conditional_table(inst, sub, oracle);
    for (auto e : sub.edges) {
      vars[i].push_back(lp.add_variable(0, {Rational(0), capacity[e]}));
      lp.add_constraint({{{e, Rational(1)}, {vars[i].back(), Rational(-1)}}, Relation::GreaterEqual, 0});
    }
    for (Subset s = 1; s <= sub.full(); ++s) lp.add_constraint(region_row(sub, s, g[s], vars[i]));
  }
  auto sol = solve_lp(lp);
  if (sol.status != LpStatus::Optimal) throw Error(ErrorCode::Infeasible, "multi-client LP infeasible");
  MulticastRates out;
  out.cost = sol.value;
  out.envelope.assign(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(edges.size()));
  for (std::size_t i = 0; i < subs.size(); ++i) {
    RateVector r;
    for (std::size_t k = 0; k < subs[i].edges.size(); ++k) r[subs[i].edges[k]] = sol.x[vars[i][k]];
    out.per_client.push_back(std::move(r));
  }
  return out;
}

// Euclidean projection of v onto {x >= 0, sum x = total} (sort and threshold).
inline std::vector<double> project_scaled_simplex(std::span<const double> v, double total) {
  if (v.empty()) return {};
  std::vector<double> u(v.begin(), v.end());
  std::sort(u.begin(), u.end(), std::greater<>());
  double running = 0, tau = 0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    running += u[j];
    double candidate = (running - total) / static_cast<double>(j + 1);
    if (u[j] - candidate > 0) tau = candidate;
  }
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::max(v[i] - tau, 0.0);
  return out;
}

// theta[n] = a / (b + c n), with a > 0, b >= 0, c > 0.
struct HarmonicSchedule {
  double a = 1, b = 1, c = 1;
};
// theta[n] = n^(-a), with 0 < a < 1.
struct PowerSchedule {
  double a = 0.5;
};
using StepSchedule = std::variant<HarmonicSchedule, PowerSchedule>;

inline double step_size(const StepSchedule& schedule, std::size_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidParameters, "step index starts at 1");
  if (auto* h = std::get_if<HarmonicSchedule>(&schedule)) {
    if (!(h->a > 0) || !(h->b >= 0) || !(h->c > 0))
      throw Error(ErrorCode::InvalidParameters, "harmonic schedule needs a>0, b>=0, c>0");
    return h->a / (h->b + h->c * static_cast<double>(n));
  }
  const auto& p = std::get<PowerSchedule>(schedule);
  if (!(p.a > 0) || !(p.a < 1)) throw Error(ErrorCode::InvalidParameters, "power schedule needs 0<a<1");
  return std::pow(static_cast<double>(n), -p.a);
}

struct SubgradientOptions {
  StepSchedule schedule = HarmonicSchedule{};
  std::size_t max_iterations = 50000;
  double gap_tolerance = 1e-2;
  // Stop after this many iterations without a better recovered primal; 0 disables.
  std::size_t patience = 0;
  std::size_t threads = 1;
  // Starting multipliers per client and E_t edge; default splits alpha_e evenly.
  std::optional<std::vector<std::vector<double>>> initial_multipliers;
  // Called after every dual update with the new multipliers.
  std::function<void(std::size_t, const std::vector<std::vector<double>>&)> observer;
};

struct SubgradientTraceEntry {
  std::size_t n = 0;
  Rational dual;    // sum of the client dual functions at this iterate
  Rational primal;  // cost of the recovered envelope
  double gap = 0;   // (primal - best dual) / |best dual|
};

struct SubgradientResult {
  MulticastRates rates;  // best recovered iterate (ergodic average)
  Rational best_dual;
  double gap = std::numeric_limits<double>::infinity();
  std::size_t iterations = 0;
  bool converged = false;
  bool no_progress = false;
  std::vector<SubgradientTraceEntry> trace;
};

// Dual subgradient ascent on the multipliers lambda_e^(t) with projection
// onto sum_t lambda_e^(t) = alpha_e, and ergodic primal recovery with
// uniform weights 1/n. Inner problems are solved exactly; the recovered
// averages are kept as exact rationals, so every recovered R^(t) lies in its
// client's region.
inline SubgradientResult solve_multi_subgradient(const NetworkInstance& inst, const EntropyOracle& oracle,
                                                 const SubgradientOptions& options = {}) {
  detail::require_feasible(inst, oracle);
  if (options.max_iterations == 0) throw Error(ErrorCode::InvalidParameters, "max_iterations must be positive");
  step_size(options.schedule, 1);

  const auto& edges = inst.edges();
  const auto capacity = inst.capacities();
  std::vector<ClientRegionSolver> solvers;
  for (auto t : inst.clients()) solvers.emplace_back(inst, client_subproblem(inst, oracle, t), oracle, capacity);
  const std::size_t k = solvers.size();

  // For each edge, the (client, position in E_t) pairs that carry a multiplier.
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> holders(edges.size());
  for (std::size_t i = 0; i < k; ++i) {
    const auto& sub = solvers[i].subproblem();
    for (std::size_t p = 0; p < sub.edges.size(); ++p) holders[sub.edges[p]].emplace_back(i, p);
  }

  std::vector<std::vector<double>> lambda(k);
  for (std::size_t i = 0; i < k; ++i) lambda[i].assign(solvers[i].subproblem().edges.size(), 0.0);
  if (options.initial_multipliers) {
    const auto& init = *options.initial_multipliers;
    if (init.size() != k) throw Error(ErrorCode::InvalidParameters, "initial multipliers: one row per client");
    for (std::size_t i = 0; i < k; ++i) {
      if (init[i].size() != lambda[i].size())
        throw Error(ErrorCode::InvalidParameters, "initial multipliers: one entry per client edge");
      lambda[i] = init[i];
    }
  } else {
    for (std::size_t e = 0; e < edges.size(); ++e)
      for (auto [i, p] : holders[e])
        lambda[i][p] = edges[e].cost.get_d() / static_cast<double>(holders[e].size());
  }

  // Exact multipliers used by the inner solves: the floating-point iterate
  // rescaled so each edge's multipliers sum to alpha_e exactly.
  auto exact_weights = [&] {
    std::vector<std::vector<Rational>> w(k);
    for (std::size_t i = 0; i < k; ++i) w[i].resize(lambda[i].size());
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (holders[e].empty()) continue;
      Rational sum = 0;
      for (auto [i, p] : holders[e]) sum += from_double(std::max(lambda[i][p], 0.0));
      for (auto [i, p] : holders[e]) {
        if (sum == 0) w[i][p] = edges[e].cost / static_cast<long>(holders[e].size());
        else w[i][p] = from_double(std::max(lambda[i][p], 0.0)) * edges[e].cost / sum;
      }
    }
    return w;
  };

  // Running sums of inner minimizers; the recovered iterate is sum / n.
  std::vector<std::vector<Rational>> sums(k);
  for (std::size_t i = 0; i < k; ++i) sums[i].assign(lambda[i].size(), 0);

  SubgradientResult result;
  bool have_dual = false;
  std::optional<Rational> best_primal;
  std::vector<std::vector<Rational>> best_average;
  std::size_t last_improvement = 0;

  for (std::size_t n = 1; n <= options.max_iterations; ++n) {
    auto weights = exact_weights();
    auto inner = parallel_map(k, options.threads, [&](std::size_t i) { return solvers[i].solve(weights[i], false); });

    Rational dual = 0;
    for (const auto& s : inner) dual += s.cost;
    if (!have_dual || dual > result.best_dual) result.best_dual = dual;
    have_dual = true;

    for (std::size_t i = 0; i < k; ++i) {
      const auto& sub = solvers[i].subproblem();
      for (std::size_t p = 0; p < sub.edges.size(); ++p) sums[i][p] += inner[i].rates.at(sub.edges[p]);
    }
    Rational scaled_primal = 0;  // n times the cost of the recovered envelope
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (holders[e].empty()) continue;
      const Rational* top = nullptr;
      for (auto [i, p] : holders[e])
        if (!top || sums[i][p] > *top) top = &sums[i][p];
      scaled_primal += edges[e].cost * *top;
    }
    Rational primal = scaled_primal / static_cast<unsigned long>(n);

    double gap;
    if (result.best_dual > 0) gap = Rational((primal - result.best_dual) / result.best_dual).get_d();
    else gap = primal == result.best_dual ? 0.0 : std::numeric_limits<double>::infinity();
    result.trace.push_back({n, dual, primal, gap});
    result.iterations = n;

    if (!best_primal || primal < *best_primal) {
      best_primal = primal;
      best_average = sums;
      for (auto& row : best_average)
        for (auto& v : row) v /= static_cast<unsigned long>(n);
      last_improvement = n;
    }
    result.gap = best_primal->get_d() > 0 && result.best_dual > 0
                     ? Rational((*best_primal - result.best_dual) / result.best_dual).get_d()
                     : gap;
    if (result.gap <= options.gap_tolerance) {
      result.converged = true;
      break;
    }
    if (options.patience > 0 && n - last_improvement >= options.patience) {
      result.no_progress = true;
      break;
    }

    const double theta = step_size(options.schedule, n);
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (holders[e].empty()) continue;
      std::vector<double> moved;
      for (auto [i, p] : holders[e])
        moved.push_back(lambda[i][p] + theta * inner[i].rates.at(solvers[i].subproblem().edges[p]).get_d());
      auto projected = project_scaled_simplex(moved, edges[e].cost.get_d());
      for (std::size_t j = 0; j < holders[e].size(); ++j) {
        auto [i, p] = holders[e][j];
        lambda[i][p] = projected[j];
      }
    }
    if (options.observer) options.observer(n, lambda);
  }

  auto& rates = result.rates;
  rates.envelope.assign(edges.size(), 0);
  for (std::size_t i = 0; i < k; ++i) {
    const auto& sub = solvers[i].subproblem();
    RateVector r;
    for (std::size_t p = 0; p < sub.edges.size(); ++p) {
      r[sub.edges[p]] = best_average[i][p];
      rates.envelope[sub.edges[p]] = std::max(rates.envelope[sub.edges[p]], best_average[i][p]);
    }
    rates.per_client.push_back(std::move(r));
  }
  rates.cost = 0;
  for (std::size_t e = 0; e < edges.size(); ++e) rates.cost += edges[e].cost * rates.envelope[e];
  return result;
}

}  // namespace mmcast
