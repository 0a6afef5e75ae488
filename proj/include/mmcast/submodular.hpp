#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "mmcast/error.hpp"
#include "mmcast/network.hpp"

namespace mmcast {

enum class SetFunctionKind { Submodular, Supermodular, Unknown };

// A set function on an ordered ground set {0..n-1}, evaluated on bitmasks.
template <class Value>
struct SetFunction {
  std::size_t ground_size = 0;
  std::function<Value(Subset)> evaluate;
  SetFunctionKind kind = SetFunctionKind::Unknown;

  Value operator()(Subset s) const { return evaluate(s); }
};

template <class Value>
struct Minimizer {
  Subset set = 0;
  Value value{};
};

inline constexpr std::size_t kBruteForceLimit = 20;

// Exact minimum over all subsets. Ties go to the smallest cardinality, then to
// the numerically smallest bitmask.
template <class Value>
Minimizer<Value> sfm_brute_force(const SetFunction<Value>& f, bool exclude_empty = false) {
  if (f.ground_size > kBruteForceLimit)
    throw Error(ErrorCode::GroundTooLarge, "brute-force minimization limited to 20 elements",
                std::to_string(f.ground_size));
  const Subset full = full_subset(f.ground_size);
  Subset first = exclude_empty ? 1 : 0;
  if (first > full) throw Error(ErrorCode::InvalidInput, "no nonempty subset of an empty ground set");
  Minimizer<Value> best{first, f(first)};
  for (Subset s = first + 1; s <= full; ++s) {
    Value v = f(s);
    if (v < best.value || (v == best.value && cardinality(s) < cardinality(best.set)))
      best = {s, std::move(v)};
  }
  return best;
}

// Greedy vertex x(e_i) = f({e_1..e_i}) - f({e_1..e_{i-1}}) for the given ordering.
template <class Value>
std::vector<Value> greedy_base_vertex(const SetFunction<Value>& f, std::span<const std::size_t> ordering) {
  if (ordering.size() != f.ground_size)
    throw Error(ErrorCode::DimensionMismatch, "ordering must be a permutation of the ground set");
  std::vector<Value> x(f.ground_size);
  Subset seen = 0;
  Value previous = f(0);
  for (auto e : ordering) {
    if (e >= f.ground_size || contains(seen, e))
      throw Error(ErrorCode::InvalidInput, "ordering is not a permutation", std::to_string(e));
    seen |= Subset{1} << e;
    Value current = f(seen);
    x[e] = current - previous;
    previous = std::move(current);
  }
  return x;
}

template <class Value>
Value subset_sum(std::span<const Value> x, Subset s) {
  Value total{};
  for (std::size_t i = 0; i < x.size(); ++i)
    if (contains(s, i)) total += x[i];
  return total;
}

template <class Value>
struct Membership {
  bool member = false;
  Subset violating = 0;  // certificate when not a member
  Value margin{};        // minimum slack over all subsets (negative => violation)
};

// Base polyhedron membership. Submodular f: x(S) <= f(S) for all S and
// x(ground) = f(ground). Supermodular f: the inequalities reverse. The slack
// function is submodular in both cases and minimized exactly.
template <class Value>
Membership<Value> in_base_polyhedron(std::span<const Value> x, const SetFunction<Value>& f) {
  if (x.size() != f.ground_size) throw Error(ErrorCode::DimensionMismatch, "vector length differs from ground");
  if (f.kind == SetFunctionKind::Unknown)
    throw Error(ErrorCode::InvalidInput, "membership needs a submodular or supermodular function");
  const bool sub = f.kind == SetFunctionKind::Submodular;
  const Subset full = full_subset(f.ground_size);
  Value total = subset_sum(x, full);
  Value target = f(full);
  if (total != target) {
    Value diff = sub ? Value(target - total) : Value(total - target);
    return {false, full, diff};
  }
  SetFunction<Value> slack{f.ground_size,
                           [&](Subset s) {
                             Value xs = subset_sum(x, s);
                             return sub ? Value(f(s) - xs) : Value(xs - f(s));
                           },
                           SetFunctionKind::Submodular};
  auto best = sfm_brute_force(slack);
  if (best.value < 0) return {false, best.set, best.value};
  return {true, 0, best.value};
}

struct MinNormOptions {
  double epsilon = 1e-9;
  std::size_t max_iterations = 10000;
};

struct MinNormResult {
  std::vector<double> point;  // approximate minimum-norm point of B(f)
  Subset minimizer = 0;
  double value = 0;
  std::size_t iterations = 0;
};

namespace detail {

// Affine minimizer of the points (columns of `points`): weights summing to 1
// that minimize the norm of the combination.
inline Eigen::VectorXd affine_minimizer(const Eigen::MatrixXd& points) {
  const auto m = points.cols();
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(m + 1, m + 1);
  kkt.topLeftCorner(m, m) = points.transpose() * points;
  kkt.block(0, m, m, 1).setOnes();
  kkt.block(m, 0, 1, m).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + 1);
  rhs(m) = 1;
  Eigen::VectorXd sol = kkt.colPivHouseholderQr().solve(rhs);
  return sol.head(m);
}

inline std::vector<double> greedy_by_value(const SetFunction<double>& f, const Eigen::VectorXd& x) {
  std::vector<std::size_t> order(f.ground_size);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x(a) < x(b); });
  return greedy_base_vertex(f, std::span<const std::size_t>(order));
}

// Best prefix of the ordering by increasing x (the level sets of x).
inline Minimizer<double> best_level_set(const SetFunction<double>& f, const Eigen::VectorXd& x) {
  std::vector<std::size_t> order(f.ground_size);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x(a) < x(b); });
  Minimizer<double> best{0, f(0)};
  Subset prefix = 0;
  for (auto e : order) {
    prefix |= Subset{1} << e;
    double v = f(prefix);
    if (v < best.value) best = {prefix, v};
  }
  return best;
}

}  // namespace detail

// Fujishige-Wolfe minimum-norm-point algorithm on B(f). The minimizer is read
// off the level sets of the final point; its value is an exact evaluation of
// f, so it is never below the true minimum.
inline MinNormResult min_norm_point(const SetFunction<double>& f, const MinNormOptions& options = {}) {
  const std::size_t n = f.ground_size;
  if (n > kMaxGround) throw Error(ErrorCode::GroundTooLarge, "ground set too large");
  if (n == 0) return {{}, 0, 0.0, 0};
  using Eigen::VectorXd;
  auto to_vec = [n](const std::vector<double>& v) { return Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(n)); };

  std::vector<std::size_t> identity(n);
  std::iota(identity.begin(), identity.end(), 0);
  std::vector<VectorXd> corrals{to_vec(greedy_base_vertex(f, std::span<const std::size_t>(identity)))};
  std::vector<double> weights{1.0};
  VectorXd x = corrals.front();

  auto combine = [&] {
    VectorXd y = VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < corrals.size(); ++i) y += weights[i] * corrals[i];
    return y;
  };

  std::size_t iter = 0;
  bool converged = false;
  for (; iter < options.max_iterations; ++iter) {
    VectorXd q = to_vec(detail::greedy_by_value(f, x));
    const double norm2 = x.squaredNorm();
    if (norm2 - x.dot(q) <= 1e-12 * std::max(1.0, norm2)) {
      converged = true;
      break;
    }
    corrals.push_back(q);
    weights.push_back(0.0);
    for (std::size_t minor = 0; minor <= n + 1; ++minor) {
      Eigen::MatrixXd pts(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(corrals.size()));
      for (std::size_t i = 0; i < corrals.size(); ++i) pts.col(static_cast<Eigen::Index>(i)) = corrals[i];
      VectorXd alpha = detail::affine_minimizer(pts);
      constexpr double kTiny = 1e-14;
      if ((alpha.array() > kTiny).all()) {
        weights.assign(alpha.data(), alpha.data() + alpha.size());
        x = combine();
        break;
      }
      double theta = 1.0;
      for (std::size_t i = 0; i < corrals.size(); ++i) {
        double a = alpha(static_cast<Eigen::Index>(i));
        if (a <= kTiny) theta = std::min(theta, weights[i] / (weights[i] - a));
      }
      for (std::size_t i = 0; i < corrals.size(); ++i)
        weights[i] = theta * alpha(static_cast<Eigen::Index>(i)) + (1 - theta) * weights[i];
      std::vector<VectorXd> kept;
      std::vector<double> kept_weights;
      for (std::size_t i = 0; i < corrals.size(); ++i)
        if (weights[i] > kTiny) {
          kept.push_back(corrals[i]);
          kept_weights.push_back(weights[i]);
        }
      double total = std::accumulate(kept_weights.begin(), kept_weights.end(), 0.0);
      for (auto& w : kept_weights) w /= total;
      corrals = std::move(kept);
      weights = std::move(kept_weights);
      x = combine();
    }
  }

  auto best = detail::best_level_set(f, x);
  Subset negative = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (x(static_cast<Eigen::Index>(i)) < -options.epsilon) negative |= Subset{1} << i;
  if (double v = f(negative); v < best.value || (v == best.value && cardinality(negative) < cardinality(best.set)))
    best = {negative, v};

  if (!converged)
    throw Error(ErrorCode::MaxIterationsExceeded, "min-norm point did not converge",
                "set=" + std::to_string(best.set) + ";value=" + std::to_string(best.value));
  return {std::vector<double>(x.data(), x.data() + x.size()), best.set, best.value, iter};
}

}  // namespace mmcast
