#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "censorlab/campaign.hpp"
#include "censorlab/scenarios.hpp"

#ifndef CENSORLAB_SCENARIO_DIR
#define CENSORLAB_SCENARIO_DIR "scenarios"
#endif

namespace fs = std::filesystem;
using namespace censorlab;

namespace {

struct Common {
  std::string config;
  std::string scenario;
  std::optional<uint64_t> seed;
  int jobs{1};
  std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
  auto* cfg = cmd->add_option("--config", c.config, "campaign.json to run");
  auto* sc = cmd->add_option("--scenario", c.scenario, "shipped scenario name");
  cfg->excludes(sc);
  cmd->add_option("--seed", c.seed, "override the campaign seed");
  cmd->add_option("--jobs", c.jobs, "worker threads")->check(CLI::Range(1, 256));
  cmd->add_option("--out", c.out, "output directory");
}

fs::path scenario_dir() {
  if (const char* env = std::getenv("CENSORLAB_SCENARIO_DIR")) return env;
  return CENSORLAB_SCENARIO_DIR;
}

fs::path campaign_path(const Common& c) {
  if (!c.config.empty()) return c.config;
  if (!c.scenario.empty()) return scenario_dir() / c.scenario / "campaign.json";
  throw campaign::UsageError("one of --config or --scenario is required");
}

fs::path out_dir(const std::string& flag, const std::string& campaign_name) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("CENSORLAB_OUT")) return env;
  return fs::path("censorlab-out") / campaign_name;
}

int report(const std::vector<campaign::ScanOutcome>& outcomes) {
  int failures = 0;
  for (const auto& o : outcomes) {
    for (const auto& p : o.written) std::cout << "wrote " << p.string() << "\n";
    if (o.failures > 0) std::cerr << o.scan << ": " << o.failures << " item(s) failed, see \"errors\"\n";
    failures += o.failures;
  }
  return failures > 0 ? 2 : 0;
}

void print_summary(const fs::path& dir, const std::string& scan) {
  std::ifstream in(dir / (scan + "_summary.txt"));
  if (in) std::cout << in.rdbuf();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"censorlab: censorship measurement against a simulated network"};
  app.require_subcommand(1);
  app.set_version_flag("--version", campaign::kToolkitVersion);

  Common common;
  std::map<std::string, CLI::App*> scans;
  for (auto [name, scan, help] : std::vector<std::tuple<std::string, std::string, std::string>>{
           {"scan-dns", "dns", "find censorious resolvers and score coverage and consistency"},
           {"scan-http", "http", "compare direct and clean fetches for every domain"},
           {"classify", "classify", "locate and classify the middleboxes that censor"},
           {"evade", "evade", "try each evasion strategy against censored domains"},
           {"metrics", "metrics", "compute coverage and precision/recall"},
       }) {
    auto* cmd = app.add_subcommand(name, help);
    add_common(cmd, common);
    scans[scan] = cmd;
  }

  auto* trace = app.add_subcommand("trace", "iterative TTL trace toward a server or resolver");
  add_common(trace, common);
  std::string trace_kind, trace_domain, trace_dst;
  bool exhaustive = false;
  trace->add_option("--kind", trace_kind, "http or dns")->check(CLI::IsMember({"http", "dns"}));
  trace->add_option("--domain", trace_domain, "domain to request or query");
  trace->add_option("--dst", trace_dst, "server or resolver address");
  trace->add_flag("--exhaustive", exhaustive, "keep probing after the destination answers");

  auto* run = app.add_subcommand("run", "execute the campaign plan, then the report");
  add_common(run, common);

  auto* rep = app.add_subcommand("report", "merge scan outputs in a directory");
  std::string report_out;
  rep->add_option("--out", report_out, "directory holding scan outputs");

  auto* scen = app.add_subcommand("scenario", "shipped scenarios");
  scen->require_subcommand(1);
  scen->add_subcommand("list", "print scenario names");
  auto* exp = scen->add_subcommand("export", "write scenario files from the builder");
  std::vector<std::string> export_names;
  std::string export_dir = scenario_dir().string();
  exp->add_option("names", export_names, "scenarios to export (default all)");
  exp->add_option("--dir", export_dir, "destination directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (scen->parsed()) {
      if (scen->got_subcommand("list")) {
        for (const auto& n : scenarios::names()) std::cout << n << "\n";
        return 0;
      }
      if (export_names.empty()) export_names = scenarios::names();
      for (const auto& n : export_names) {
        auto files = scenarios::render_files(scenarios::build(n));
        auto dir = fs::path(export_dir) / n;
        fs::create_directories(dir);
        for (const auto& [file, content] : files) {
          std::ofstream(dir / file, std::ios::binary) << content;
          std::cout << "wrote " << (dir / file).string() << "\n";
        }
      }
      return 0;
    }
    if (rep->parsed()) {
      auto dir = out_dir(report_out, "");
      if (report_out.empty() && !std::getenv("CENSORLAB_OUT"))
        throw campaign::UsageError("report needs --out or CENSORLAB_OUT");
      return report({campaign::merge_report(dir)});
    }

    auto cfg = campaign::load_campaign(campaign_path(common), common.seed);
    campaign::RunOptions opts{out_dir(common.out, cfg.name), common.jobs};
    if (run->parsed()) {
      int rc = report(campaign::run_plan(cfg, opts));
      for (const char* s : {"dns", "http", "classify", "metrics"}) print_summary(opts.out, s);
      return rc;
    }
    if (trace->parsed()) {
      if (!trace_kind.empty()) cfg.doc["trace"]["kind"] = trace_kind;
      if (!trace_domain.empty()) cfg.doc["trace"]["domain"] = trace_domain;
      if (!trace_dst.empty()) cfg.doc["trace"]["dst"] = trace_dst;
      if (exhaustive) cfg.doc["trace"]["exhaustive"] = true;
      auto o = campaign::run_scan("trace", cfg, opts);
      std::ifstream table(opts.out / "trace.txt");
      if (table) std::cout << table.rdbuf();
      return report({o});
    }
    for (const auto& [scan, cmd] : scans) {
      if (!cmd->parsed()) continue;
      auto o = campaign::run_scan(scan, cfg, opts);
      print_summary(opts.out, scan);
      return report({o});
    }
  } catch (const campaign::ConfigFileError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const campaign::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
