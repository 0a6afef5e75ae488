#include <gtest/gtest.h>
#include <openssl/sha.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "instances.hpp"
#include "mmcast/cli.hpp"

using namespace mmcast;
using namespace testing_support;

namespace {

struct Run {
  int status = 0;
  std::string out;
  json doc;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Run r;
  r.status = cli::run(args, out, err);
  r.out = out.str();
  if (!r.out.empty() && r.out.front() == '{') r.doc = json::parse(r.out);
  return r;
}

std::string temp_file(const std::string& name, const std::string& contents) {
  auto path = testing::TempDir() + name;
  std::ofstream(path) << contents;
  return path;
}

std::string f2() { return fixture("fixture-F2.json"); }

std::string rates_file() {
  auto solved = run({"solve", "--all-clients", f2()});
  return temp_file("f2-rates.json", solved.out);
}

}  // namespace

TEST(Cli, FeasFixture) {
  auto r = run({"feas", f2()});
  EXPECT_EQ(r.status, 0);
  EXPECT_TRUE(r.doc["result"]["feasible"].get<bool>());
  EXPECT_EQ(r.doc["result"]["clients"][0]["status"], "feasible");
  EXPECT_EQ(r.doc["result"]["clients"][1]["status"], "feasible");
  EXPECT_EQ(r.doc["result"]["clients"][1]["slack"], "0");
}

TEST(Cli, FeasInfeasibleExitsTwo) {
  auto doc = with_capacity(read_json_file(f2()), "e7", "3");
  auto r = run({"feas", temp_file("f2-e7.json", doc.dump())});
  EXPECT_EQ(r.status, 2);
  const auto& t2 = r.doc["result"]["clients"][1];
  EXPECT_EQ(t2["status"], "infeasible");
  EXPECT_EQ(t2["violating_set"], json({"m1", "m2", "m4"}));
  EXPECT_EQ(t2["required"], "4");
  EXPECT_EQ(t2["deficit"], "1");
}

TEST(Cli, SolveExactAndSingle) {
  auto r = run({"solve", "--all-clients", "--method", "exact", f2()});
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(r.doc["result"]["cost"], "11");
  EXPECT_EQ(r.doc["result"]["method"], "exact");
  auto t2 = run({"solve", "--client", "t2", f2()});
  EXPECT_EQ(t2.status, 0);
  EXPECT_EQ(t2.doc["result"]["cost"], "7");
  EXPECT_EQ(t2.doc["result"]["rates"]["e7"], "4");
  EXPECT_EQ(run({"solve", f2()}).status, 1);
  EXPECT_EQ(run({"solve", "--client", "m1", f2()}).status, 1);
}

TEST(Cli, SubgradientTraceAndCsv) {
  auto csv = testing::TempDir() + "trace.csv";
  auto r = run({"solve", "--all-clients", "--method", "subgradient", "--trace-csv", csv, f2()});
  EXPECT_EQ(r.status, 0);
  const auto& res = r.doc["result"];
  EXPECT_TRUE(res["converged"].get<bool>());
  EXPECT_EQ(res["trace"].size(), res["iterations"].get<std::size_t>());
  EXPECT_EQ(r.doc["manifest"]["params"]["schedule"], "s1:1,1,1");
  std::ifstream in(csv);
  std::string line;
  std::size_t lines = 0;
  std::getline(in, line);
  EXPECT_EQ(line, "n,dual,primal,gap");
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, res["iterations"].get<std::size_t>());

  auto capped = run({"solve", "--all-clients", "--method", "subgradient", "--gap", "0", "--iters", "3", f2()});
  EXPECT_EQ(capped.status, 2);
  EXPECT_FALSE(capped.doc["result"]["converged"].get<bool>());
  EXPECT_EQ(run({"solve", "--all-clients", "--method", "subgradient", "--schedule", "s3:1", f2()}).status, 1);
}

TEST(Cli, CodeAndSimulate) {
  auto rates = rates_file();
  auto c = run({"code", "--rates", rates, f2()});
  ASSERT_EQ(c.status, 0) << c.out;
  for (const auto& client : c.doc["result"]["clients"]) EXPECT_EQ(client["rank"], 4);
  auto s = run({"simulate", "--rates", rates, "--w", "1,2,3,4", f2()});
  ASSERT_EQ(s.status, 0) << s.out;
  for (const auto& client : s.doc["result"]["clients"]) {
    EXPECT_EQ(client["reconstruction"], json({1, 2, 3, 4}));
    EXPECT_TRUE(client["exact"].get<bool>());
  }
  EXPECT_EQ(run({"simulate", "--rates", rates, "--w", "1,x", f2()}).status, 1);
}

TEST(Cli, FieldTooSmall) {
  auto r = run({"code", "--rates", rates_file(), "--q", "2", f2()});
  EXPECT_EQ(r.status, 1);
  EXPECT_EQ(r.doc["error"]["code"], "FieldTooSmall");
  EXPECT_TRUE(r.doc.contains("manifest"));
  EXPECT_EQ(r.doc["manifest"]["params"]["q"], 2);
  auto tab = run({"code", "--rates", rates_file(), "--q", "7", fixture("fixture-F2-tabular.json")});
  EXPECT_EQ(tab.doc["error"]["code"], "NotLinearModel");
}

TEST(Cli, InputErrors) {
  auto missing = run({"feas", "/nonexistent.json"});
  EXPECT_EQ(missing.status, 1);
  EXPECT_EQ(missing.doc["error"]["code"], "InvalidInput");
  auto broken = run({"feas", temp_file("broken.json", "{\"nodes\": [")});
  EXPECT_EQ(broken.status, 1);
  EXPECT_EQ(broken.doc["error"]["code"], "InvalidInput");
  auto flag = run({"feas", "--bogus", f2()});
  EXPECT_EQ(flag.status, 1);
  EXPECT_EQ(flag.doc["error"]["code"], "InvalidParameters");
  EXPECT_EQ(run({}).status, 1);
  EXPECT_EQ(run({"frobnicate", f2()}).status, 1);
  auto cyclic = read_json_file(f2());
  cyclic["edges"].push_back({{"id", "e8"}, {"tail", "m4"}, {"head", "m1"}, {"capacity", "1"}, {"cost", "1"}});
  auto c = run({"validate", temp_file("cyclic.json", cyclic.dump())});
  EXPECT_EQ(c.status, 1);
  EXPECT_EQ(c.doc["error"]["code"], "CycleDetected");
}

TEST(Cli, ValidateFixtures) {
  auto r = run({"validate", f2()});
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(r.doc["result"]["total_entropy"], "4");
  EXPECT_TRUE(r.doc["result"]["polymatroid"]["ok"].get<bool>());
  auto bad = read_json_file(f2());
  bad["edges"].erase(2);
  auto b = run({"validate", temp_file("no-e3.json", bad.dump())});
  EXPECT_EQ(b.status, 2);
  EXPECT_FALSE(b.doc["result"]["reconstructability"]["passed"].get<bool>());
}

TEST(Cli, ManifestDigest) {
  std::ifstream in(f2(), std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), {});
  std::array<unsigned char, SHA256_DIGEST_LENGTH> md{};
  SHA256(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), md.data());
  std::string hex;
  char buf[3];
  for (auto b : md) std::snprintf(buf, sizeof buf, "%02x", b), hex += buf;
  auto r = run({"--seed", "5", "feas", f2()});
  const auto& m = r.doc["manifest"];
  EXPECT_EQ(m["digest"], "sha256:" + hex);
  EXPECT_EQ(m["subcommand"], "feas");
  EXPECT_EQ(m["input"], f2());
  EXPECT_EQ(m["params"]["seed"], 5);
  EXPECT_EQ(m["version"], cli::kVersion);
  EXPECT_EQ(cli::detail::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Cli, OutputIndependentOfThreads) {
  auto rates = rates_file();
  std::vector<std::vector<std::string>> commands{
      {"feas", f2()},
      {"solve", "--all-clients", f2()},
      {"solve", "--all-clients", "--method", "subgradient", "--gap", "0", "--iters", "40", f2()},
      {"code", "--rates", rates, f2()},
      {"simulate", "--rates", rates, "--w", "4,0,2,1", f2()},
      {"oracle", f2()}};
  for (const auto& cmd : commands) {
    auto one = cmd, four = cmd;
    one.insert(one.begin(), {"--threads", "1"});
    four.insert(four.begin(), {"--threads", "4"});
    auto a = run(one), b = run(four), c = run(one);
    EXPECT_EQ(a.out, b.out) << cmd[0];
    EXPECT_EQ(a.out, c.out) << cmd[0];
  }
}

TEST(Cli, OracleAgreesOnFixtures) {
  for (const auto& entry : std::filesystem::directory_iterator(MMCAST_FIXTURE_DIR)) {
    const auto path = entry.path().string();
    auto feas = run({"feas", path});
    auto oracle = run({"oracle", path});
    ASSERT_EQ(feas.status, oracle.status) << path;
    const auto& fc = feas.doc["result"]["clients"];
    const auto& oc = oracle.doc["result"]["clients"];
    ASSERT_EQ(fc.size(), oc.size());
    for (std::size_t i = 0; i < fc.size(); ++i) {
      EXPECT_EQ(fc[i]["slack"], oc[i]["min_slack"]) << path;
      if (oc[i]["feasible"].get<bool>()) {
        auto single = run({"solve", "--client", fc[i]["client"].get<std::string>(), path});
        EXPECT_EQ(single.doc["result"]["cost"], oc[i]["cost"]) << path;
      }
    }
    if (oracle.doc["result"].contains("multi_cost"))
      EXPECT_EQ(run({"solve", "--all-clients", path}).doc["result"]["cost"], oracle.doc["result"]["multi_cost"]);
  }
}

TEST(Cli, BinaryExitCodes) {
  auto status_of = [](const std::string& args) {
    int raw = std::system((std::string(MMCAST_CLI_PATH) + " " + args + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(raw);
  };
  EXPECT_EQ(status_of("feas " + f2()), 0);
  EXPECT_EQ(status_of("feas /nonexistent.json"), 1);
  auto doc = with_capacity(read_json_file(f2()), "e7", "3");
  EXPECT_EQ(status_of("feas " + temp_file("bin-e7.json", doc.dump())), 2);
  EXPECT_EQ(status_of("--version"), 0);
}
