#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "mmcast/entropy.hpp"
#include "mmcast/lp.hpp"
#include "mmcast/submodular.hpp"
#include "mmcast/subproblem.hpp"

namespace mmcast {

// g_t(S) for every local subset S of M_t, indexed by bitmask.
inline std::vector<Rational> conditional_table(const NetworkInstance& inst, const ClientSubproblem& sub,
                                               const EntropyOracle& oracle) {
  if (sub.size() > kBruteForceLimit)
    throw Error(ErrorCode::GroundTooLarge, "client reaches more than 20 sources",
                std::to_string(sub.size()));
  const Subset full = sub.full();
  std::vector<Rational> g(std::size_t{1} << sub.size());
  for (Subset s = 1; s <= full; ++s) g[s] = client_conditional_entropy(oracle, inst, sub, s);
  return g;
}

// Region inequality dR(S) >= g(S) (equality for S = M_t) over LP variables
// `rate_vars`, one per E_t edge in subproblem order.
inline LinearConstraint region_row(const ClientSubproblem& sub, Subset s, const Rational& g,
                                   std::span<const std::size_t> rate_vars) {
  LinearConstraint row;
  auto coeff = sub.boundary_coefficients(s);
  for (std::size_t k = 0; k < coeff.size(); ++k)
    if (coeff[k] != 0) row.terms.emplace_back(rate_vars[k], Rational(coeff[k]));
  row.relation = s == sub.full() ? Relation::Equal : Relation::GreaterEqual;
  row.rhs = g;
  return row;
}

// Most violated region inequality at `rates` (one value per E_t edge): the
// minimizer of the submodular function S -> dR(S) - g(S) over nonempty S.
inline Minimizer<Rational> most_violated_set(const ClientSubproblem& sub, std::span<const Rational> g,
                                             std::span<const Rational> rates) {
  SetFunction<Rational> slack{sub.size(),
                              [&](Subset s) {
                                Rational v = -g[s];
                                auto coeff = sub.boundary_coefficients(s);
                                for (std::size_t k = 0; k < coeff.size(); ++k) {
                                  if (coeff[k] > 0) v += rates[k];
                                  if (coeff[k] < 0) v -= rates[k];
                                }
                                return v;
                              },
                              SetFunctionKind::Submodular};
  return sfm_brute_force(slack, true);
}

struct CuttingPlaneResult {
  LpSolution solution;
  std::size_t iterations = 0;
};

// Solves `base` extended with the region of one client by constraint
// generation. `pool` holds the region sets currently in the LP and is updated
// in place so later calls can warm start from it. An empty pool is seeded with
// M_t, the singletons and their complements.
inline CuttingPlaneResult solve_with_region(const LinearProgram& base, std::span<const std::size_t> rate_vars,
                                            const ClientSubproblem& sub, std::span<const Rational> g,
                                            std::vector<Subset>& pool) {
  const Subset full = sub.full();
  if (pool.empty()) {
    auto add = [&](Subset s) {
      if (s != 0 && std::find(pool.begin(), pool.end(), s) == pool.end()) pool.push_back(s);
    };
    add(full);
    for (std::size_t i = 0; i < sub.size(); ++i) {
      add(Subset{1} << i);
      add(full & ~(Subset{1} << i));
    }
  }
  CuttingPlaneResult result;
  for (;;) {
    ++result.iterations;
    LinearProgram lp = base;
    for (auto s : pool) lp.add_constraint(region_row(sub, s, g[s], rate_vars));
    result.solution = solve_lp(lp);
    if (result.solution.status != LpStatus::Optimal) return result;
    std::vector<Rational> rates;
    rates.reserve(rate_vars.size());
    for (auto v : rate_vars) rates.push_back(result.solution.x[v]);
    auto cut = most_violated_set(sub, g, rates);
    if (cut.value >= 0) return result;
    pool.push_back(cut.set);
  }
}

// LP for one client's rates: variables R_e in [0, c_e] for e in E_t, cost
// weights per E_t edge. Returns the LP and fills `rate_vars`.
inline LinearProgram client_rate_lp(const ClientSubproblem& sub, std::span<const Rational> weights,
                                    const std::vector<Rational>& capacity, std::vector<std::size_t>& rate_vars) {
  LinearProgram lp;
  rate_vars.clear();
  for (std::size_t k = 0; k < sub.edges.size(); ++k)
    rate_vars.push_back(lp.add_variable(weights[k], {Rational(0), capacity[sub.edges[k]]}));
  return lp;
}

}  // namespace mmcast
