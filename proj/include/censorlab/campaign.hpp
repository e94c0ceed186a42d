#ifndef CENSORLAB_CAMPAIGN_HPP
#define CENSORLAB_CAMPAIGN_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "censorlab/json_io.hpp"
#include "censorlab/netsim.hpp"

namespace censorlab::campaign {

inline constexpr const char* kToolkitVersion = "0.1.0";

/// Invalid campaign input, located to a file and line when possible.
class ConfigFileError : public std::runtime_error {
 public:
  ConfigFileError(std::filesystem::path file, int line, const std::string& msg);
  const std::filesystem::path& file() const { return file_; }
  int line() const { return line_; }

 private:
  std::filesystem::path file_;
  int line_;
};

/// Nothing to do for the requested command (e.g. report with no prior scans).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CampaignConfig {
  std::string name;
  std::filesystem::path campaign_file;
  netsim::TopologyConfig topology;
  std::vector<std::string> pbw;
  std::set<std::string> plan;
  uint64_t seed{0};
  std::string client;
  json doc;
  std::string campaign_text;
  std::string config_digest;  // sha256 over campaign, topology and pbw bytes
};

/// Reads campaign.json and the files it names (relative to its directory),
/// validating the topology. `seed_override` replaces the file's seed; one of
/// the two must be present.
CampaignConfig load_campaign(const std::filesystem::path& campaign_file,
                             std::optional<uint64_t> seed_override = std::nullopt);

struct RunOptions {
  std::filesystem::path out;
  int jobs{1};
};

struct ScanOutcome {
  std::string scan;
  int failures{0};  // items that raised; recorded in the JSON under "errors"
  std::vector<std::filesystem::path> written;
};

/// Valid scan names: dns, http, trace, classify, evade, metrics.
ScanOutcome run_scan(const std::string& scan, const CampaignConfig& cfg, const RunOptions& opts);
/// Every scan in the plan, then the report.
std::vector<ScanOutcome> run_plan(const CampaignConfig& cfg, const RunOptions& opts);

/// Merges prior scan outputs in `out` into report.json plus plot TSVs.
/// Throws UsageError("nothing to merge") when there are none.
ScanOutcome merge_report(const std::filesystem::path& out);

json provenance(const CampaignConfig& cfg);

/// Runs fn(chunk) for chunk in [0, chunks) on up to `jobs` threads.
/// Results come back in chunk order.
template <typename R, typename Fn>
std::vector<R> run_chunks(size_t chunks, int jobs, Fn fn);

}  // namespace censorlab::campaign

#include "censorlab/campaign_impl.hpp"

#endif  // CENSORLAB_CAMPAIGN_HPP
