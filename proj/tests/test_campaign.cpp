#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "censorlab/campaign.hpp"
#include "censorlab/scenarios.hpp"

using namespace censorlab;
using namespace censorlab::campaign;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("censorlab_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write(const fs::path& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Scenario files in a fresh directory, with campaign.json replaced when given.
fs::path stage(const std::string& scenario, const std::string& tag, const std::optional<std::string>& campaign = {}) {
  auto dir = scratch(tag);
  for (const auto& [f, c] : scenarios::render_files(scenarios::build(scenario))) write(dir / f, c);
  if (campaign) write(dir / "campaign.json", *campaign);
  return dir;
}

int cli(const std::string& args) {
  std::string cmd = std::string(CENSORLAB_TEST_CLI) + " " + args + " >/dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST(LoadCampaign, ShippedScenarioLoads) {
  auto dir = stage("airtel_wm", "load");
  auto cfg = load_campaign(dir / "campaign.json");
  EXPECT_EQ(cfg.name, "airtel_wm");
  EXPECT_EQ(cfg.config_digest.size(), 64u);
  EXPECT_FALSE(cfg.pbw.empty());
  auto other = load_campaign(dir / "campaign.json", 99);
  EXPECT_EQ(other.seed, 99u);
  EXPECT_EQ(other.config_digest, cfg.config_digest);
  EXPECT_EQ(provenance(cfg)["config_sha256"], cfg.config_digest);
}

TEST(LoadCampaign, ErrorsCarryLines) {
  auto expect_line = [](const std::string& tag, const std::string& campaign, int line, const std::string& what) {
    auto dir = stage("airtel_wm", tag, campaign);
    try {
      load_campaign(dir / "campaign.json");
      ADD_FAILURE() << tag << ": no error";
    } catch (const ConfigFileError& e) {
      EXPECT_EQ(e.line(), line) << tag << ": " << e.what();
      EXPECT_NE(std::string(e.what()).find(what), std::string::npos) << e.what();
    }
  };
  expect_line("noseed", "{\n\"topology\": \"topology.json\",\n\"pbw\": \"pbw.txt\",\n\"client\": \"client\"\n}", 1,
              "/seed");
  expect_line("badseed",
              "{\n\"topology\": \"topology.json\",\n\"pbw\": \"pbw.txt\",\n\"seed\": -4,\n\"client\": \"client\"\n}", 4,
              "non-negative");
  expect_line("badplan",
              "{\n\"topology\": \"topology.json\",\n\"pbw\": \"pbw.txt\",\n\"seed\": 1,\n\"client\": \"client\",\n"
              "\"plan\": [\"dns\",\n \"bogus\"]\n}",
              7, "plan steps");
  expect_line("badclient",
              "{\n\"topology\": \"topology.json\",\n\"pbw\": \"pbw.txt\",\n\"seed\": 1,\n\"client\": \"nobody\"\n}", 5,
              "nobody");
  expect_line("badjson", "{\n\"seed\": 1,\n\"pbw\" \"x\"\n}", 3, "invalid JSON");
}

TEST(LoadCampaign, TopologyErrorsPointIntoTopologyFile) {
  auto dir = stage("airtel_wm", "badtopo");
  auto text = slurp(dir / "topology.json");
  auto pos = text.find("\"kind\": \"WM\"");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 12, "\"kind\": \"XX\"");
  write(dir / "topology.json", text);
  try {
    load_campaign(dir / "campaign.json");
    FAIL();
  } catch (const ConfigFileError& e) {
    EXPECT_EQ(e.file().filename(), "topology.json");
    EXPECT_EQ(e.line(), 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
  }
}

TEST(LoadCampaign, SeedOverrideSatisfiesMissingSeed) {
  auto dir = stage("airtel_wm", "seedflag",
                   std::string("{\"topology\": \"topology.json\", \"pbw\": \"pbw.txt\", \"client\": \"client\"}"));
  EXPECT_EQ(load_campaign(dir / "campaign.json", 5).seed, 5u);
}

TEST(RunChunks, OrderedAndPropagatesErrors) {
  auto r = run_chunks<int>(50, 8, [](size_t i) { return static_cast<int>(i * i); });
  for (size_t i = 0; i < r.size(); ++i) EXPECT_EQ(r[i], static_cast<int>(i * i));
  EXPECT_THROW(run_chunks<int>(10, 4,
                               [](size_t i) -> int {
                                 if (i == 7) throw std::runtime_error("boom");
                                 return 0;
                               }),
               std::runtime_error);
}

TEST(RunScan, JobsDoNotChangeOutput) {
  auto dir = stage("bsnl_dns", "jobs");
  auto cfg = load_campaign(dir / "campaign.json");
  auto a = dir / "out1", b = dir / "out8";
  run_scan("dns", cfg, {a, 1});
  run_scan("dns", cfg, {b, 8});
  for (const auto& f : {"dns.json", "dns_verdicts.csv", "dns_consistency.tsv"}) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
}

TEST(MergeReport, NothingToMerge) {
  auto dir = scratch("empty_report");
  EXPECT_THROW(merge_report(dir), UsageError);
}

TEST(Cli, ExitCodes) {
  auto dir = stage("airtel_wm", "cli");
  auto text = slurp(dir / "campaign.json");
  auto seed = text.find("\"seed\"");
  ASSERT_NE(seed, std::string::npos);
  text.erase(seed, text.find('\n', seed) - seed + 1);
  write(dir / "campaign.json", text);
  auto cfg = (dir / "campaign.json").string();
  auto out = (dir / "out").string();
  EXPECT_EQ(cli("scan-http --config " + cfg + " --out " + out), 1);  // no seed anywhere
  EXPECT_EQ(cli("scan-http --config " + cfg + " --seed 3 --out " + out), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "http.json"));
  EXPECT_EQ(cli("report --out " + (dir / "nothing").string()), 1);
  EXPECT_EQ(cli("report --out " + out), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "report.json"));
  EXPECT_EQ(cli("scan-http --config " + cfg + " --scenario airtel_wm"), 1);
  EXPECT_EQ(cli("scan-http --config " + cfg + " --seed 3 --jobs 0"), 1);
  EXPECT_EQ(cli("scenario list"), 0);
}
