#ifndef CENSORLAB_SCENARIOS_HPP
#define CENSORLAB_SCENARIOS_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "censorlab/config.hpp"
#include "censorlab/json_io.hpp"

namespace censorlab::scenarios {

struct Scenario {
  std::string name;
  netsim::TopologyConfig topology;
  std::vector<std::string> pbw;
  json campaign;
};

/// Shipped scenario names, in a fixed order.
std::vector<std::string> names();
/// Throws std::invalid_argument for an unknown name.
Scenario build(std::string_view name);

/// File name -> content for topology.json, pbw.txt and campaign.json.
std::map<std::string, std::string> render_files(const Scenario& s);
std::string render_pbw(const std::vector<std::string>& pbw);
/// One domain per line; blank lines and '#' comments are skipped.
std::vector<std::string> parse_pbw(std::string_view text);

// Building blocks, also used by the tests.

/// client - r1 - ... - rN - {server, resolver}. Middleboxes attach by router
/// index (1-based) and take `blocklist` when their own is empty.
struct LinearSpec {
  std::string name{"linear"};
  int routers{6};
  std::string client_as{"Client-AS"};
  std::vector<std::string> router_as;  // per router; "Transit-AS" when short
  std::set<int> anonymized;
  std::vector<std::pair<int, netsim::MiddleboxConfig>> middleboxes;
  std::vector<std::string> sites;
  std::vector<std::string> blocklist;
  std::vector<uint16_t> ports{80, 8080};
};

inline constexpr const char* kLinearClient = "client";
Ipv4Addr linear_server_addr();
Ipv4Addr linear_resolver_addr();
netsim::TopologyConfig linear_topology(const LinearSpec& spec);

std::vector<std::string> numbered_domains(const std::string& stem, int count);

/// Six routers with `archetype` attached at router 3, ten blocked and ten
/// allowed domains.
Scenario archetype_scenario(const std::string& archetype);
/// airtel_wm with the given inspection direction.
Scenario trigger_scenario(netsim::InspectDirection dir);

}  // namespace censorlab::scenarios

#endif  // CENSORLAB_SCENARIOS_HPP
