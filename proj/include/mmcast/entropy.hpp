#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "mmcast/error.hpp"
#include "mmcast/field.hpp"
#include "mmcast/network.hpp"
#include "mmcast/rational.hpp"

namespace mmcast {

// X_i = A_i W over F_q. Entropies are in packets (1 packet = log q^n bits),
// i.e. the rank of the stacked observation matrices.
struct LinearSource {
  PrimeField field{2};
  std::size_t dimension = 0;    // N, length of W
  std::size_t blocklength = 1;  // n
  std::vector<FieldMatrix> observations;  // one per ground element, N columns each
};

// Entropy given directly for every nonempty subset.
struct TabularSource {
  std::string unit = "packets";
  std::map<Subset, Rational> entropies;
};

// Joint pmf over finite alphabets, dense row-major table with ground
// element 0 as the most significant coordinate. Entropies in bits.
struct PmfSource {
  std::vector<std::size_t> alphabet_sizes;
  std::vector<Rational> table;
};

using SourceModel = std::variant<LinearSource, TabularSource, PmfSource>;

inline constexpr std::size_t kMaxPmfEntries = std::size_t{1} << 20;
// Pmf entropies are rounded to this grid before being made exact.
inline constexpr int kPmfResolutionBits = 40;

// Subset-entropy function H(X_S) over an ordered ground set of sources. Values
// are memoized per subset; copies share the memo, which is safe to read and
// fill from several threads.
class EntropyOracle {
 public:
  EntropyOracle(std::vector<std::string> ground, SourceModel model)
      : ground_(std::move(ground)), model_(std::move(model)), memo_(std::make_shared<Memo>()) {
    if (ground_.size() > kMaxGround)
      throw Error(ErrorCode::GroundTooLarge, "at most 63 sources supported");
    check_model();
  }

  std::size_t ground_size() const noexcept { return ground_.size(); }
  const std::vector<std::string>& ground() const noexcept { return ground_; }
  const SourceModel& model() const noexcept { return model_; }
  bool is_linear() const noexcept { return std::holds_alternative<LinearSource>(model_); }

  std::string unit() const {
    if (auto* t = std::get_if<TabularSource>(&model_)) return t->unit;
    return std::holds_alternative<PmfSource>(model_) ? "bits" : "packets";
  }

  Rational entropy(Subset s) const {
    if (s & ~full_subset(ground_.size()))
      throw Error(ErrorCode::InvalidInput, "subset outside the ground set");
    if (s == 0) return 0;
    {
      std::shared_lock lock(memo_->mutex);
      if (auto it = memo_->values.find(s); it != memo_->values.end()) return it->second;
    }
    Rational value = evaluate(s);
    std::unique_lock lock(memo_->mutex);
    return memo_->values.emplace(s, value).first->second;
  }

  // Entropy of a subset given by names.
  Rational entropy(const std::vector<std::string>& names) const { return entropy(subset_of(names)); }

  Subset subset_of(const std::vector<std::string>& names) const {
    Subset s = 0;
    for (const auto& name : names) {
      auto it = std::find(ground_.begin(), ground_.end(), name);
      if (it == ground_.end()) throw Error(ErrorCode::UnknownNode, "'" + name + "' is not a source", name);
      s |= Subset{1} << (it - ground_.begin());
    }
    return s;
  }

 private:
  struct Memo {
    std::shared_mutex mutex;
    std::unordered_map<Subset, Rational> values;
  };

  void check_model() const {
    const std::size_t n = ground_.size();
    if (auto* lin = std::get_if<LinearSource>(&model_)) {
      if (lin->observations.size() != n)
        throw Error(ErrorCode::InvalidSourceModel, "one observation matrix per source required");
      for (std::size_t i = 0; i < n; ++i) {
        if (lin->observations[i].cols() != lin->dimension)
          throw Error(ErrorCode::InvalidSourceModel, "observation matrix must have N columns", ground_[i]);
        if (lin->observations[i].field().modulus() != lin->field.modulus())
          throw Error(ErrorCode::ModulusMismatch, "observation matrix over a different field", ground_[i]);
      }
    } else if (auto* tab = std::get_if<TabularSource>(&model_)) {
      if (tab->unit != "packets" && tab->unit != "bits")
        throw Error(ErrorCode::UnitMismatch, "tabular unit must be 'packets' or 'bits'", tab->unit);
      if (auto it = tab->entropies.find(0); it != tab->entropies.end() && it->second != 0)
        throw Error(ErrorCode::InvalidSourceModel, "entropy of the empty set must be 0");
    } else {
      const auto& pmf = std::get<PmfSource>(model_);
      if (pmf.alphabet_sizes.size() != n)
        throw Error(ErrorCode::InvalidSourceModel, "one alphabet per source required");
      std::size_t entries = 1;
      for (auto a : pmf.alphabet_sizes) {
        if (a == 0) throw Error(ErrorCode::InvalidSourceModel, "empty alphabet");
        if (entries > kMaxPmfEntries / a)
          throw Error(ErrorCode::InvalidSourceModel, "joint table larger than 2^20 entries");
        entries *= a;
      }
      if (pmf.table.size() != entries)
        throw Error(ErrorCode::InvalidSourceModel, "joint table size does not match alphabets",
                    std::to_string(pmf.table.size()) + "!=" + std::to_string(entries));
      Rational total = 0;
      for (const auto& p : pmf.table) {
        if (p < 0) throw Error(ErrorCode::InvalidSourceModel, "negative probability");
        total += p;
      }
      if (total != 1) throw Error(ErrorCode::InvalidSourceModel, "probabilities do not sum to 1", to_string(total));
    }
  }

  Rational evaluate(Subset s) const {
    if (auto* lin = std::get_if<LinearSource>(&model_)) {
      FieldMatrix stacked(0, lin->dimension, lin->field);
      for (std::size_t i = 0; i < ground_.size(); ++i)
        if (contains(s, i)) stacked = stacked.stack(lin->observations[i]);
      return rational_from_int(static_cast<std::int64_t>(rank(stacked)));
    }
    if (auto* tab = std::get_if<TabularSource>(&model_)) {
      auto it = tab->entropies.find(s);
      if (it == tab->entropies.end()) {
        std::string names;
        for (std::size_t i = 0; i < ground_.size(); ++i)
          if (contains(s, i)) names += (names.empty() ? "" : ",") + ground_[i];
        throw Error(ErrorCode::UnknownSubset, "no entropy given for {" + names + "}", names);
      }
      return it->second;
    }
    return pmf_entropy(std::get<PmfSource>(model_), s);
  }

  Rational pmf_entropy(const PmfSource& pmf, Subset s) const {
    const std::size_t n = ground_.size();
    std::vector<std::size_t> stride(n, 1);
    std::size_t marginal_size = 1;
    for (std::size_t i = n; i-- > 0;) {
      if (contains(s, i)) {
        stride[i] = marginal_size;
        marginal_size *= pmf.alphabet_sizes[i];
      }
    }
    std::vector<Rational> marginal(marginal_size);
    std::vector<std::size_t> digits(n, 0);
    for (std::size_t idx = 0; idx < pmf.table.size(); ++idx) {
      std::size_t m = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (contains(s, i)) m += digits[i] * stride[i];
      marginal[m] += pmf.table[idx];
      for (std::size_t i = n; i-- > 0;) {
        if (++digits[i] < pmf.alphabet_sizes[i]) break;
        digits[i] = 0;
      }
    }
    double h = 0;
    for (const auto& p : marginal) {
      double pd = p.get_d();
      if (pd > 0) h -= pd * std::log2(pd);
    }
    const double scale = std::ldexp(1.0, kPmfResolutionBits);
    mpz_class units(static_cast<signed long>(std::llround(h * scale)));
    mpz_class den;
    mpz_ui_pow_ui(den.get_mpz_t(), 2, kPmfResolutionBits);
    Rational r(units, den);
    r.canonicalize();
    return r;
  }

  std::vector<std::string> ground_;
  SourceModel model_;
  std::shared_ptr<Memo> memo_;
};

// g(S) = H(X_S | X_{G\S}) = H(G) - H(G\S), for S inside the ground G.
inline Rational conditional_entropy(const EntropyOracle& oracle, Subset s, Subset ground) {
  if (s & ~ground) throw Error(ErrorCode::InvalidInput, "conditioning subset is not inside the ground");
  return oracle.entropy(ground) - oracle.entropy(ground & ~s);
}

// Tabular oracle holding the values of `oracle` on every subset.
inline EntropyOracle tabulate(const EntropyOracle& oracle) {
  TabularSource tab;
  tab.unit = oracle.unit();
  const Subset full = full_subset(oracle.ground_size());
  for (Subset s = 1;; ++s) {
    tab.entropies.emplace(s, oracle.entropy(s));
    if (s == full) break;
  }
  return EntropyOracle(oracle.ground(), std::move(tab));
}

struct PolymatroidViolation {
  enum class Kind { Monotonicity, Submodularity };
  Kind kind;
  Subset first = 0;
  Subset second = 0;
  Rational lhs, rhs;  // violated relation lhs >= rhs
};

struct PolymatroidReport {
  bool exhaustive = true;
  std::size_t pairs_checked = 0;
  std::size_t violation_count = 0;
  std::vector<PolymatroidViolation> violations;  // first few, in enumeration order
  bool ok() const noexcept { return violation_count == 0; }
};

struct PolymatroidCheckOptions {
  std::size_t exhaustive_limit = 12;
  std::size_t samples = 200000;
  std::uint64_t seed = 0;
  std::size_t max_reported = 16;
};

// Checks monotonicity and submodularity, exhaustively for small ground sets,
// otherwise on random pairs. H(empty)=0 holds by construction of the oracle.
inline PolymatroidReport validate_polymatroid(const EntropyOracle& oracle,
                                              const PolymatroidCheckOptions& options = {}) {
  using Kind = PolymatroidViolation::Kind;
  PolymatroidReport report;
  const std::size_t n = oracle.ground_size();
  auto record = [&](Kind kind, Subset a, Subset b, Rational lhs, Rational rhs) {
    ++report.violation_count;
    if (report.violations.size() < options.max_reported)
      report.violations.push_back({kind, a, b, std::move(lhs), std::move(rhs)});
  };
  auto check_pair = [&](Subset s, Subset t, auto&& h) {
    ++report.pairs_checked;
    if ((s & t) == s || (s & t) == t) {
      Subset small = (s & t) == s ? s : t, large = small == s ? t : s;
      if (h(large) < h(small)) record(Kind::Monotonicity, large, small, h(large), h(small));
      return;
    }
    Rational lhs = h(s) + h(t), rhs = h(s | t) + h(s & t);
    if (lhs < rhs) record(Kind::Submodularity, s, t, lhs, rhs);
  };

  if (n <= options.exhaustive_limit) {
    const Subset full = full_subset(n);
    std::vector<Rational> values(std::size_t{1} << n);
    for (Subset s = 1; s <= full; ++s) values[s] = oracle.entropy(s);
    auto h = [&](Subset s) -> const Rational& { return values[s]; };
    for (Subset s = 0; s <= full; ++s) {
      for (std::size_t i = 0; i < n; ++i)
        if (!contains(s, i) && values[s | (Subset{1} << i)] < values[s])
          record(Kind::Monotonicity, s | (Subset{1} << i), s, values[s | (Subset{1} << i)], values[s]);
    }
    for (Subset s = 0; s <= full; ++s)
      for (Subset t = s + 1; t <= full; ++t) {
        if ((s & t) == s || (s & t) == t) {
          ++report.pairs_checked;
          continue;
        }
        check_pair(s, t, h);
      }
  } else {
    report.exhaustive = false;
    std::mt19937_64 rng(options.seed);
    const Subset full = full_subset(n);
    auto h = [&](Subset s) { return oracle.entropy(s); };
    for (std::size_t k = 0; k < options.samples; ++k) check_pair(rng() & full, rng() & full, h);
  }
  return report;
}

}  // namespace mmcast
