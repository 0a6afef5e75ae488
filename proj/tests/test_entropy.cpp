#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace mmcast;
using testing_support::fixture;

namespace {

EntropyOracle tabular(std::vector<std::string> ground, std::map<Subset, Rational> h) {
  return EntropyOracle(std::move(ground), TabularSource{"packets", std::move(h)});
}

}  // namespace

TEST(LinearOracle, FixtureValues) {
  auto li = load_instance_file(fixture("fixture-F2.json"));
  const auto& h = li.oracle;
  EXPECT_EQ(h.unit(), "packets");
  EXPECT_EQ(h.entropy({"m1"}), 2);
  EXPECT_EQ(h.entropy({"m1", "m2", "m3", "m4"}), 4);
  EXPECT_EQ(h.entropy(Subset{0}), 0);
}

TEST(LinearOracle, MatchesReferenceRank) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 40; ++trial) {
    auto doc = testing_support::random_instance(rng);
    testing_support::PlainInstance plain(doc);
    auto li = load_instance(doc);
    const auto& ground = li.oracle.ground();
    for (Subset s = 0; s <= full_subset(ground.size()); ++s) {
      std::set<std::string> names;
      for (std::size_t i = 0; i < ground.size(); ++i)
        if (contains(s, i)) names.insert(ground[i]);
      EXPECT_EQ(li.oracle.entropy(s), Rational(static_cast<long>(plain.entropy(names))));
    }
  }
}

TEST(ConditionalEntropy, FixtureValues) {
  auto li = load_instance_file(fixture("fixture-F2.json"));
  const auto& h = li.oracle;
  Subset all = h.subset_of({"m1", "m2", "m3", "m4"});
  Subset mt2 = h.subset_of({"m1", "m2", "m4"});
  EXPECT_EQ(conditional_entropy(h, h.subset_of({"m2"}), all), 0);
  EXPECT_EQ(conditional_entropy(h, h.subset_of({"m4"}), mt2), 1);
  EXPECT_EQ(conditional_entropy(h, mt2, mt2), h.entropy(mt2));
  EXPECT_EQ(conditional_entropy(h, 0, mt2), 0);
}

TEST(TabularOracle, EqualsLinearSubsetwise) {
  auto li = load_instance_file(fixture("fixture-F2.json"));
  auto tab = tabulate(li.oracle);
  EXPECT_FALSE(tab.is_linear());
  for (Subset s = 0; s < 16; ++s) EXPECT_EQ(tab.entropy(s), li.oracle.entropy(s)) << s;
  EXPECT_TRUE(validate_polymatroid(tab).ok());
}

TEST(TabularOracle, MissingSubset) {
  auto h = tabular({"a", "b"}, {{1, 1}, {2, 1}});
  try {
    h.entropy(3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownSubset);
  }
}

TEST(TabularOracle, LoaderRequiresEverySubset) {
  json doc = read_json_file(fixture("fixture-F2.json"));
  doc["source_model"] = {{"kind", "tabular"}, {"unit", "packets"}, {"entropies", {{"m1", 2}, {"m2", 2}}}};
  try {
    load_instance(doc);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownSubset);
  }
}

TEST(Polymatroid, SubmodularityViolation) {
  auto h = tabular({"a", "b"}, {{1, 1}, {2, 1}, {3, 3}});
  auto report = validate_polymatroid(h);
  EXPECT_FALSE(report.ok());
  ASSERT_FALSE(report.violations.empty());
  const auto& v = report.violations.front();
  EXPECT_EQ(v.kind, PolymatroidViolation::Kind::Submodularity);
  EXPECT_EQ(v.first | v.second, 3U);
  EXPECT_EQ(v.first & v.second, 0U);
}

TEST(Polymatroid, MonotonicityViolation) {
  auto h = tabular({"a", "b"}, {{1, 2}, {2, 1}, {3, 1}});
  auto report = validate_polymatroid(h);
  ASSERT_FALSE(report.ok());
  bool saw = false;
  for (const auto& v : report.violations) saw = saw || v.kind == PolymatroidViolation::Kind::Monotonicity;
  EXPECT_TRUE(saw);
}

TEST(Polymatroid, FixturePassesExhaustively) {
  auto li = load_instance_file(fixture("fixture-F2.json"));
  auto report = validate_polymatroid(li.oracle);
  EXPECT_TRUE(report.ok());
  EXPECT_TRUE(report.exhaustive);
}

TEST(PmfOracle, IndependentFairBits) {
  PmfSource pmf{{2, 2}, {Rational(1, 4), Rational(1, 4), Rational(1, 4), Rational(1, 4)}};
  EntropyOracle h({"x", "y"}, pmf);
  EXPECT_EQ(h.unit(), "bits");
  EXPECT_EQ(h.entropy(1), 1);
  EXPECT_EQ(h.entropy(2), 1);
  EXPECT_EQ(h.entropy(3), 2);
}

TEST(PmfOracle, CorrelatedPairWithinTolerance) {
  // P(x, y): (0,0)=1/2, (0,1)=1/4, (1,1)=1/4, (1,0)=0.
  PmfSource pmf{{2, 2}, {Rational(1, 2), Rational(1, 4), Rational(0), Rational(1, 4)}};
  EntropyOracle h({"x", "y"}, pmf);
  auto hb = [](std::vector<double> p) {
    double s = 0;
    for (double v : p)
      if (v > 0) s -= v * std::log2(v);
    return s;
  };
  EXPECT_NEAR(h.entropy(1).get_d(), hb({0.75, 0.25}), std::ldexp(1.0, -39));
  EXPECT_NEAR(h.entropy(2).get_d(), hb({0.5, 0.5}), std::ldexp(1.0, -39));
  EXPECT_NEAR(h.entropy(3).get_d(), 1.5, std::ldexp(1.0, -39));
  EXPECT_TRUE(validate_polymatroid(h).ok());
}

TEST(PmfOracle, RejectsTableNotSummingToOne) {
  PmfSource pmf{{2}, {Rational(1, 2), Rational(1, 3)}};
  EXPECT_THROW(EntropyOracle({"x"}, pmf), Error);
}

TEST(Duality, ComplementDualEqualsEntropy) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    auto li = load_instance(testing_support::random_instance(rng));
    for (auto t : li.network.clients()) {
      auto sub = client_subproblem(li.network, li.oracle, t);
      auto g = conditional_table(li.network, sub, li.oracle);
      for (Subset s = 0; s <= sub.full(); ++s) {
        Rational dual = g[sub.full()] - g[sub.full() & ~s];
        EXPECT_EQ(dual, li.oracle.entropy(sub.to_global(s, li.network)));
      }
    }
  }
}

TEST(Supermodularity, ConditionalTableOnRandomInstances) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    auto li = load_instance(testing_support::random_instance(rng));
    for (auto t : li.network.clients()) {
      auto sub = client_subproblem(li.network, li.oracle, t);
      auto g = conditional_table(li.network, sub, li.oracle);
      for (Subset a = 0; a <= sub.full(); ++a)
        for (Subset b = 0; b <= sub.full(); ++b) EXPECT_LE(g[a] + g[b], g[a | b] + g[a & b]);
    }
  }
}

TEST(EntropyOracle, ConcurrentReadsAgree) {
  auto li = load_instance_file(fixture("fixture-F2.json"));
  std::vector<std::future<std::vector<Rational>>> jobs;
  for (int w = 0; w < 4; ++w)
    jobs.push_back(std::async(std::launch::async, [&] {
      std::vector<Rational> v;
      for (Subset s = 0; s < 16; ++s) v.push_back(li.oracle.entropy(s));
      return v;
    }));
  auto first = jobs[0].get();
  for (std::size_t w = 1; w < jobs.size(); ++w) EXPECT_EQ(jobs[w].get(), first);
}
