#ifndef CENSORLAB_NETSIM_HPP
#define CENSORLAB_NETSIM_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "censorlab/config.hpp"
#include "censorlab/wire.hpp"

namespace censorlab::netsim {

enum class NodeKind { Router, Client, WebServer, Resolver, Host };

struct Node {
  std::string id;
  Ipv4Addr addr;
  std::string as_label;
  NodeKind kind{NodeKind::Router};
  bool anonymized{false};
  size_t config_index{0};  // index into the per-kind config vector
};

/// Traceroute hop: nullopt address means the router stayed silent.
struct Hop {
  int index{0};
  std::optional<Ipv4Addr> addr;
  std::string as_label;  // empty when anonymized

  bool anonymized() const { return !addr.has_value(); }
};

/// Validated, immutable network description with a deterministic path table.
/// Paths are breadth-first shortest paths that only transit routers; ties
/// break on node id order.
class Topology {
 public:
  const TopologyConfig& config() const { return cfg_; }
  const std::vector<Node>& nodes() const { return nodes_; }

  std::optional<size_t> node_index(std::string_view id) const;
  std::optional<size_t> node_by_addr(Ipv4Addr a) const;
  const Node& node(size_t i) const { return nodes_[i]; }
  const Node& node(std::string_view id) const;

  /// Node indices from `client` to the endpoint owning `dst`, both ends
  /// included. Empty when unroutable; {client} when dst is the client itself.
  const std::vector<size_t>& path(std::string_view client, Ipv4Addr dst) const;
  /// Routers on the path plus one; 0 when unroutable or dst is the client.
  int hop_count(std::string_view client, Ipv4Addr dst) const;
  /// One record per hop in path order, destination last. Throws
  /// std::invalid_argument when unroutable.
  std::vector<Hop> traceroute(std::string_view client, Ipv4Addr dst) const;

  /// AS label whose configured prefixes contain `a`, else the label of the
  /// node owning `a`, else empty.
  std::string as_of(Ipv4Addr a) const;

  std::vector<std::string> client_ids() const;

 private:
  friend Topology build_topology(TopologyConfig cfg);

  TopologyConfig cfg_;
  std::vector<Node> nodes_;
  std::vector<std::vector<size_t>> adj_;
  std::unordered_map<std::string, size_t> by_id_;
  std::unordered_map<Ipv4Addr, size_t> by_addr_;
  // BFS parent per client, indexed by node.
  std::unordered_map<size_t, std::vector<int64_t>> parents_;
  mutable std::map<std::pair<size_t, size_t>, std::vector<size_t>> path_cache_;
};

/// Validates the config (unique ids and addresses, known link ends, every
/// endpoint reachable from every client, no router off every path) and
/// resolves middlebox blocklist references. Throws ConfigError naming the
/// offenders.
Topology build_topology(TopologyConfig cfg);

/// Seeded generator with its own bounded draws so sequences do not depend on
/// the standard library's distribution implementations.
class SimRng {
 public:
  explicit SimRng(uint64_t seed) : gen_(seed) {}
  uint64_t next() { return gen_(); }
  /// Uniform integer in [0, n). n must be positive.
  uint64_t below(uint64_t n);
  /// Uniform real in [0, 1).
  double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  uint16_t u16() { return static_cast<uint16_t>(gen_() >> 48); }
  uint32_t u32() { return static_cast<uint32_t>(gen_() >> 32); }

 private:
  std::mt19937_64 gen_;
};

enum class EventKind { Delivered, Filtered, Dropped, ServerReceived, Timeout };
/// Ground-truth sender of a packet. Kept for traces and tests; detectors never read it.
enum class Origin { None, Client, Router, WebServer, Resolver, Middlebox };

std::string to_string(EventKind k);
std::string to_string(Origin o);

struct Event {
  int64_t tick{0};
  EventKind kind{EventKind::Delivered};
  Origin origin{Origin::None};
  std::string node;  // where the event happened
  std::string note;
  Packet packet;
};

/// Client-side drop rule. A packet matches when every set predicate holds.
struct DropRule {
  uint8_t flags_any{0};  // TCP packet with any of these flags; 0 means any packet
  std::optional<uint16_t> ip_id;
  std::optional<Ipv4Addr> src;

  bool matches(const Packet& p) const;
};

struct Receipt {
  int64_t tick{0};
  Packet packet;
};

class Network {
 public:
  Network(Topology topo, uint64_t seed);

  const Topology& topology() const { return topo_; }
  int64_t clock() const { return clock_; }
  SimRng& rng() { return rng_; }

  /// Injects `p` from `client` (src is filled in when unset) and runs the
  /// simulation until no work is left. Returns the packets delivered to that
  /// client (plus Filtered events for any its filter discarded), or a single
  /// Timeout event when nothing came back.
  std::vector<Event> send(std::string_view client, Packet p);
  /// Moves the clock forward, processing anything that falls due.
  void advance(int64_t ticks);

  void set_client_filter(std::string_view client, std::vector<DropRule> rules);
  void clear_client_filter(std::string_view client) { set_client_filter(client, {}); }

  /// Fresh source port for `client`.
  uint16_t ephemeral_port(std::string_view client);

  // Clean vantage: bypasses routers, middleboxes and poisoned resolvers.
  std::vector<Ipv4Addr> clean_resolve(std::string_view domain) const;
  std::optional<std::string> clean_fetch(std::string_view domain, Ipv4Addr server) const;
  bool clean_handshake(Ipv4Addr server, uint16_t port) const;

  const std::vector<Event>& trace() const { return trace_; }
  void set_recording(bool on) { recording_ = on; }
  std::string trace_jsonl() const;
  const std::vector<Receipt>& receipt_log(Ipv4Addr server) const;

  /// Number of times each middlebox (by id) fired.
  const std::map<std::string, int>& trigger_counts() const { return triggers_; }

 private:
  struct Flow {
    Ipv4Addr initiator;
    uint16_t initiator_port{0};
    bool saw_syn{false};
    bool saw_synack{false};
    bool handshake_complete{false};
    bool triggered{false};
    int64_t last_activity{0};
    std::string stream;
  };
  struct MiddleboxRt {
    MiddleboxConfig cfg;
    size_t router{0};
    std::map<std::tuple<uint32_t, uint16_t, uint32_t, uint16_t>, Flow> flows;
  };
  struct ServerConn {
    uint32_t snd_nxt{0};
    uint32_t rcv_nxt{0};
    bool established{false};
    std::string buffer;
  };
  struct ServerRt {
    uint16_t next_ip_id{0};
    std::map<std::tuple<uint32_t, uint16_t, uint16_t>, ServerConn> conns;
  };
  struct Pending {
    int64_t tick;
    uint64_t seq;
    enum class Action { Launch, Arrive } action;
    size_t from;  // launching node, or the node the packet arrives at
    Origin origin;
    Packet packet;
    bool operator>(const Pending& o) const { return tick != o.tick ? tick > o.tick : seq > o.seq; }
  };
  enum class Verdict { Pass, Drop };

  void schedule(int64_t tick, Pending::Action a, size_t node, Origin origin, Packet p);
  void drain(int64_t until, bool bounded);
  void launch(size_t from, Origin origin, Packet p);
  void arrive(size_t at, Origin origin, const Packet& p);
  Verdict tap(MiddleboxRt& mb, size_t hop, const Packet& p, bool client_to_server);
  void inject_to(size_t node, Origin origin, Packet p, int64_t delay);
  void on_web_server(size_t node, const Packet& p);
  void on_resolver(size_t node, const Packet& p);
  void record(EventKind k, Origin o, size_t node, std::string note, const Packet& p);
  int64_t draw_delay(const MiddleboxConfig& cfg);

  Topology topo_;
  SimRng rng_;
  int64_t clock_{0};
  uint64_t seq_{0};
  std::priority_queue<Pending, std::vector<Pending>, std::greater<>> queue_;
  std::vector<MiddleboxRt> middleboxes_;
  std::unordered_map<size_t, std::vector<size_t>> mb_at_router_;
  std::map<size_t, int> blackhole_hits_;
  std::unordered_map<size_t, ServerRt> servers_;
  std::unordered_map<size_t, std::vector<DropRule>> filters_;
  std::unordered_map<size_t, uint16_t> next_port_;
  std::unordered_map<size_t, std::vector<Receipt>> receipts_;
  std::map<std::string, int> triggers_;
  std::vector<Event> trace_;
  bool recording_{true};
  // Deliveries for the client currently inside send().
  std::optional<size_t> collecting_for_;
  std::vector<Event> collected_;
};

/// Default page served for a site without an explicit body.
std::string default_site_body(std::string_view domain);
/// Header names and values a genuine server sends.
HeaderList genuine_headers();

/// Client-side TCP endpoint driven over a Network. Delivered segments are
/// accepted strictly in order (seq must equal rcv_nxt); a FIN closes the
/// receive side, an in-order RST resets the connection.
class TcpClient {
 public:
  TcpClient(Network& net, std::string client, Ipv4Addr dst, uint16_t dport = 80);

  /// SYN, SYN|ACK, ACK. Returns false when no SYN|ACK arrived.
  bool connect(int ttl = 64);
  /// Sends one segment. `seq` overrides snd_nxt without advancing it.
  std::vector<Event> send_segment(uint8_t flags, std::string data, int ttl = 64,
                                  std::optional<uint32_t> seq = std::nullopt);
  /// Sends the request, one segment per fragment, at `ttl`.
  std::vector<Event> send_request(const std::vector<std::string>& fragments, int ttl = 64);

  const std::string& stream() const { return stream_; }
  const std::vector<Packet>& inbound() const { return inbound_; }
  bool established() const { return established_; }
  bool reset() const { return reset_; }
  bool peer_closed() const { return peer_closed_; }
  uint16_t sport() const { return sport_; }
  uint32_t snd_nxt() const { return snd_nxt_; }
  Ipv4Addr dst() const { return dst_; }

 private:
  void absorb(const std::vector<Event>& events);

  Network& net_;
  std::string client_;
  Ipv4Addr dst_;
  uint16_t sport_;
  uint16_t dport_;
  uint32_t snd_nxt_{0};
  uint32_t rcv_nxt_{0};
  bool established_{false};
  bool reset_{false};
  bool peer_closed_{false};
  std::string stream_;
  std::vector<Packet> inbound_;
};

/// Heuristic used by detectors: RST, data carrying FIN, or a body that
/// differs from `reference` when one is given.
bool looks_like_censor_reply(const Packet& p, const std::optional<std::string>& reference = std::nullopt);

/// Body of the first HTTP response found in the packet data, if any.
std::optional<std::string> response_body(const Packet& p);

}  // namespace censorlab::netsim

#endif  // CENSORLAB_NETSIM_HPP
