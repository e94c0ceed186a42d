#ifndef CENSORLAB_JSON_IO_HPP
#define CENSORLAB_JSON_IO_HPP

#include <json.hpp>

#include "censorlab/config.hpp"
#include "censorlab/wire.hpp"

namespace censorlab {

using json = nlohmann::ordered_json;

json packet_to_json(const Packet& p);

namespace netsim {

json topology_to_json(const TopologyConfig& cfg);
/// Throws ConfigError carrying the JSON pointer of the first bad value.
TopologyConfig topology_from_json(const json& doc);

json middlebox_to_json(const MiddleboxConfig& mb);
MiddleboxConfig middlebox_from_json(const json& doc, const std::string& pointer = "");

}  // namespace netsim
}  // namespace censorlab

#endif  // CENSORLAB_JSON_IO_HPP
