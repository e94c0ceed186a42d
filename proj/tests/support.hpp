#ifndef CENSORLAB_TESTS_SUPPORT_HPP
#define CENSORLAB_TESTS_SUPPORT_HPP

#include <string>
#include <vector>

#include "censorlab/config.hpp"
#include "censorlab/netsim.hpp"
#include "censorlab/scenarios.hpp"

namespace testsupport {

using namespace censorlab;

inline const std::string kClient = scenarios::kLinearClient;

/// Linear path with `routers` routers, optionally one middlebox attached at
/// router `attach` (1-based). Blocked domains are blocked001...; allowed ones open001...
inline netsim::Topology linear(int routers, std::optional<netsim::MiddleboxConfig> mb = std::nullopt, int attach = 2,
                               std::set<int> anonymized = {}) {
  scenarios::LinearSpec spec;
  spec.routers = routers;
  spec.anonymized = std::move(anonymized);
  auto blocked = scenarios::numbered_domains("blocked", 3);
  auto open = scenarios::numbered_domains("open", 3);
  spec.sites = blocked;
  spec.sites.insert(spec.sites.end(), open.begin(), open.end());
  spec.blocklist = blocked;
  if (mb) spec.middleboxes.emplace_back(attach, *mb);
  return netsim::build_topology(scenarios::linear_topology(spec));
}

inline netsim::MiddleboxConfig certain(netsim::MiddleboxConfig mb) {
  mb.injection_delay_ticks = netsim::delay_for_win_probability(1.0);
  return mb;
}

inline Ipv4Addr server() { return scenarios::linear_server_addr(); }

}  // namespace testsupport

#endif
