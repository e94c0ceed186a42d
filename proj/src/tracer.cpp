#include "censorlab/tracer.hpp"

#include <algorithm>
#include <cstdio>

#include "censorlab/json_io.hpp"

namespace censorlab::tracer {

using netsim::EventKind;

std::string to_string(RecordKind k) {
  switch (k) {
    case RecordKind::IcmpFrom: return "IcmpFrom";
    case RecordKind::CensorResponse: return "CensorResponse";
    case RecordKind::ServerResponse: return "ServerResponse";
    case RecordKind::ManipulatedDnsAnswer: return "ManipulatedDnsAnswer";
    case RecordKind::HonestDnsAnswer: return "HonestDnsAnswer";
    case RecordKind::Timeout: return "Timeout";
  }
  return "?";
}

std::string to_string(DnsMechanism m) { return m == DnsMechanism::Poisoning ? "Poisoning" : "Injection"; }

const TraceRecord* TraceResult::at(int ttl) const {
  for (const auto& r : records)
    if (r.ttl == ttl) return &r;
  return nullptr;
}

namespace {

struct Step {
  TraceRecord rec;
  bool reached{false};
};

std::optional<Ipv4Addr> icmp_source(const std::vector<netsim::Event>& events, Ipv4Addr dst) {
  for (const auto& e : events) {
    if (e.kind != EventKind::Delivered) continue;
    if (auto* i = e.packet.icmp(); i && i->orig_dst == dst) return e.packet.src;
  }
  return std::nullopt;
}

Step http_step(netsim::Network& net, const std::string& client, const ProbeSpec& spec, const HttpGet& get, int ttl,
               TraceResult& out) {
  Step step;
  step.rec.ttl = ttl;
  netsim::TcpClient conn(net, client, spec.dst, get.dport);
  if (get.requires_handshake && !conn.connect()) throw TransportError("handshake with " + spec.dst.str() + " failed");
  auto events = conn.send_request(segment_http(get.request), ttl);
  for (const auto& e : events)
    if (e.kind == EventKind::Delivered) out.transcript.push_back(e.packet);

  const Packet* censor = nullptr;
  bool genuine = false;
  for (const auto& e : events) {
    if (e.kind != EventKind::Delivered || e.packet.src != spec.dst) continue;
    auto* t = e.packet.tcp();
    if (!t || t->dport != conn.sport()) continue;
    if (netsim::looks_like_censor_reply(e.packet)) {
      if (!censor) censor = &e.packet;
    } else if (!t->data.empty()) {
      genuine = true;
    }
  }
  step.reached = genuine;
  if (censor) {
    auto* t = censor->tcp();
    step.rec.kind = RecordKind::CensorResponse;
    step.rec.flags = t->flags;
    step.rec.ip_id = censor->ip_id;
    if (auto body = netsim::response_body(*censor)) step.rec.body = *body;
    if (auto fp = netsim::match_fingerprint(step.rec.body)) step.rec.fingerprint = fp->fingerprint;
  } else if (genuine) {
    step.rec.kind = RecordKind::ServerResponse;
  } else if (auto src = icmp_source(events, spec.dst)) {
    step.rec.kind = RecordKind::IcmpFrom;
    step.rec.addr = src;
  }
  return step;
}

Step dns_step(netsim::Network& net, const std::string& client, const ProbeSpec& spec, const DnsQuery& q, int ttl,
              TraceResult& out) {
  Step step;
  step.rec.ttl = ttl;
  Packet p;
  p.dst = spec.dst;
  p.ttl = static_cast<uint8_t>(ttl);
  p.ip_id = net.rng().u16();
  uint16_t txid = net.rng().u16();
  p.payload = DnsMessage{DnsKind::Query, txid, q.qname, {}};
  auto events = net.send(client, std::move(p));
  auto clean = net.clean_resolve(q.qname);
  std::optional<std::vector<Ipv4Addr>> honest, manipulated;
  for (const auto& e : events) {
    if (e.kind != EventKind::Delivered) continue;
    out.transcript.push_back(e.packet);
    auto* d = e.packet.dns();
    if (!d || d->kind != DnsKind::Response || d->txid != txid) continue;
    bool overlap = std::any_of(d->answers.begin(), d->answers.end(), [&](Ipv4Addr a) {
      return std::find(clean.begin(), clean.end(), a) != clean.end();
    });
    bool agrees = overlap || (d->answers.empty() && clean.empty());
    if (agrees) {
      if (!honest) honest = d->answers;
    } else if (!manipulated) {
      manipulated = d->answers;
    }
  }
  if (manipulated) {
    step.rec.kind = RecordKind::ManipulatedDnsAnswer;
    step.rec.answers = *manipulated;
    if (!manipulated->empty()) step.rec.addr = manipulated->front();
    step.reached = true;
  } else if (honest) {
    step.rec.kind = RecordKind::HonestDnsAnswer;
    step.rec.answers = *honest;
    step.reached = true;
  } else if (auto src = icmp_source(events, spec.dst)) {
    step.rec.kind = RecordKind::IcmpFrom;
    step.rec.addr = src;
  }
  return step;
}

}  // namespace

TraceResult iterative_trace(netsim::Network& net, const std::string& client, const ProbeSpec& spec) {
  if (spec.ttl_min < 1 || spec.ttl_max > 64 || spec.ttl_min > spec.ttl_max)
    throw std::invalid_argument("ttl range must lie within 1-64");
  TraceResult out;
  for (int ttl = spec.ttl_min; ttl <= spec.ttl_max; ++ttl) {
    Step step;
    for (int attempt = 0; attempt < std::max(1, spec.retries); ++attempt) {
      if (auto* get = std::get_if<HttpGet>(&spec.kind)) step = http_step(net, client, spec, *get, ttl, out);
      else step = dns_step(net, client, spec, std::get<DnsQuery>(spec.kind), ttl, out);
      if (step.rec.kind != RecordKind::Timeout) break;
    }
    out.records.push_back(step.rec);
    if (step.reached && !spec.exhaustive) break;
  }
  return out;
}

std::optional<Located> locate_middlebox(const TraceResult& trace, const std::vector<netsim::Hop>& hops) {
  if (trace.records.empty()) throw std::invalid_argument("empty trace");
  for (const auto& r : trace.records) {
    if (r.kind != RecordKind::CensorResponse) continue;
    Located loc;
    loc.hop = r.ttl;
    if (r.ttl >= 1 && static_cast<size_t>(r.ttl) <= hops.size()) {
      loc.addr = hops[r.ttl - 1].addr;
      loc.as_label = hops[r.ttl - 1].as_label;
    }
    return loc;
  }
  return std::nullopt;
}

DnsMechanism classify_dns_mechanism(const TraceResult& trace, int path_len) {
  bool any = false;
  for (const auto& r : trace.records) {
    if (r.kind != RecordKind::ManipulatedDnsAnswer) continue;
    any = true;
    if (r.ttl < path_len) return DnsMechanism::Injection;
  }
  if (!any) throw std::invalid_argument("trace holds no manipulated DNS answer");
  return DnsMechanism::Poisoning;
}

std::string trace_to_jsonl(const TraceResult& trace) {
  std::string out;
  for (const auto& r : trace.records) {
    json j;
    j["ttl"] = r.ttl;
    j["kind"] = to_string(r.kind);
    if (r.addr) j["addr"] = r.addr->str();
    if (!r.answers.empty()) {
      json a = json::array();
      for (auto ip : r.answers) a.push_back(ip.str());
      j["answers"] = a;
    }
    if (r.kind == RecordKind::CensorResponse) {
      j["flags"] = flags_str(r.flags);
      j["ip_id"] = r.ip_id;
      j["fingerprint"] = r.fingerprint;
    }
    out += j.dump() + "\n";
  }
  return out;
}

std::string render_trace_table(const TraceResult& trace) {
  std::string out = "TTL  RESULT                 DETAIL\n";
  char line[160];
  for (const auto& r : trace.records) {
    std::string detail;
    switch (r.kind) {
      case RecordKind::IcmpFrom: detail = r.addr ? r.addr->str() : "*"; break;
      case RecordKind::CensorResponse:
        detail = flags_str(r.flags) + " ip_id=" + std::to_string(r.ip_id);
        if (!r.fingerprint.empty()) detail += " fp=" + r.fingerprint;
        break;
      case RecordKind::ManipulatedDnsAnswer:
      case RecordKind::HonestDnsAnswer:
        for (auto a : r.answers) detail += a.str() + " ";
        break;
      default: break;
    }
    std::snprintf(line, sizeof line, "%3d  %-22s %s\n", r.ttl, to_string(r.kind).c_str(), detail.c_str());
    out += line;
  }
  return out;
}

}  // namespace censorlab::tracer
