#include "tracemax/simulator.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <queue>
#include <sstream>

#include "json.hpp"

namespace tracemax {

namespace {

using nlohmann::json;

// splitmix64; used both as a mixer and as the per-packet stream.
std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

struct Rng {
  std::uint64_t state;

  explicit Rng(std::uint64_t seed) : state(seed) {}
  std::uint64_t next() { return state = mix64(state); }
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }  // [0,1)
};

std::uint64_t stream_seed(std::uint64_t scenario_seed, std::uint64_t packet_id,
                          std::uint64_t purpose) {
  return mix64(mix64(scenario_seed ^ 0x74726163656d6178ull) + mix64(packet_id) + purpose);
}

constexpr std::uint64_t kRouteStream = 1;
constexpr std::uint64_t kLossStream = 2;

// Hop counts toward dst over the full graph; unreachable stays SIZE_MAX.
std::map<RouterId, std::size_t> hops_to(const Topology& t, RouterId dst) {
  std::map<RouterId, std::size_t> dist;
  std::queue<RouterId> queue;
  dist[dst] = 0;
  queue.push(dst);
  while (!queue.empty()) {
    const RouterId u = queue.front();
    queue.pop();
    for (const Neighbor& nb : t.neighbors(u))
      if (!dist.contains(nb.router)) {
        dist[nb.router] = dist[u] + 1;
        queue.push(nb.router);
      }
  }
  return dist;
}

// Distinct next-hop routers one step closer to dst, ascending id.
std::vector<RouterId> downhill(const Topology& t, const std::map<RouterId, std::size_t>& dist,
                               RouterId u) {
  std::vector<RouterId> out;
  const std::size_t du = dist.at(u);
  for (const Neighbor& nb : t.neighbors(u)) {
    auto it = dist.find(nb.router);
    if (it != dist.end() && it->second + 1 == du &&
        std::find(out.begin(), out.end(), nb.router) == out.end())
      out.push_back(nb.router);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<RouterId> route(const Topology& t, RouterId src, RouterId dst, RoutingPolicy policy,
                            std::uint64_t per_packet_seed) {
  t.router(src);
  t.router(dst);
  if (src == dst) return {src};

  const auto dist = hops_to(t, dst);
  if (!dist.contains(src))
    throw UnreachableError("router " + std::to_string(dst) + " unreachable from router " +
                           std::to_string(src));

  std::vector<RouterId> path{src};
  if (policy == RoutingPolicy::shortest_path) {
    RouterId u = src;
    while (u != dst) {
      u = downhill(t, dist, u).front();  // lowest-id tie break
      path.push_back(u);
    }
    return path;
  }

  // ECMP: uniform over all minimal-hop router paths. Weight each step
  // by the number of minimal paths through the candidate.
  std::map<RouterId, double> count;  // minimal paths from node to dst
  std::vector<RouterId> order;
  for (const auto& [r, d] : dist) order.push_back(r);
  std::sort(order.begin(), order.end(),
            [&](RouterId x, RouterId y) { return dist.at(x) < dist.at(y); });
  for (RouterId r : order) {
    if (r == dst) {
      count[r] = 1.0;
      continue;
    }
    double sum = 0.0;
    for (RouterId v : downhill(t, dist, r)) sum += count.at(v);
    count[r] = sum;
  }

  Rng rng(per_packet_seed);
  RouterId u = src;
  while (u != dst) {
    const auto nexts = downhill(t, dist, u);
    double total = 0.0;
    for (RouterId v : nexts) total += count.at(v);
    double pick = rng.next_unit() * total;
    RouterId chosen = nexts.back();
    for (RouterId v : nexts) {
      pick -= count.at(v);
      if (pick < 0.0) {
        chosen = v;
        break;
      }
    }
    path.push_back(chosen);
    u = chosen;
  }
  return path;
}

PortRef egress_port_toward(const Topology& t, RouterId from, RouterId to) {
  for (const Neighbor& nb : t.neighbors(from))  // sorted by local port
    if (nb.router == to) return nb.local;
  throw Error("router " + std::to_string(from) + " has no link to router " + std::to_string(to));
}

namespace {

void check_scenario(const Scenario& s) {
  if (s.sources.empty()) throw ScenarioError("scenario has no sources");
  if (s.loss_rate < 0.0 || s.loss_rate > 1.0)
    throw ScenarioError("loss_rate must be within [0,1]");
  if (!s.topology.has_router(s.victim.attach))
    throw ScenarioError("victim attach router " + std::to_string(s.victim.attach) + " unknown");
  if (s.assignment.bit_width != s.profile.bit_width)
    throw ScenarioError("assignment bit_width does not match profile bit_width");
  if (capacity(s.profile) < 1) throw ScenarioError("profile has no id capacity");
  for (const SourceSpec& src : s.sources) {
    if (!s.topology.has_router(src.attach))
      throw ScenarioError("source attach router " + std::to_string(src.attach) + " unknown");
    route(s.topology, src.attach, s.victim.attach, RoutingPolicy::shortest_path, 0);
  }
  for (RouterId r : s.boundary)
    if (!s.topology.has_router(r))
      throw ScenarioError("boundary router " + std::to_string(r) + " unknown");
}

}  // namespace

RunResult run(const Scenario& s) {
  check_scenario(s);

  MarkingConfig cfg;
  cfg.profile = s.profile;
  cfg.assignment = s.assignment;
  cfg.on_capacity = s.on_capacity;
  if (s.boundary.empty())
    for (const auto& [id, r] : s.topology.routers()) cfg.system_boundary.insert(id);
  else
    cfg.system_boundary = s.boundary;

  RunResult result;
  std::vector<Capture> captures;
  std::vector<std::size_t> capture_packet;
  std::vector<std::vector<RouterId>> capture_path;

  std::size_t packet_id = 0;
  for (std::size_t si = 0; si < s.sources.size(); ++si) {
    const SourceSpec& source = s.sources[si];
    for (std::size_t k = 0; k < source.packets; ++k, ++packet_id) {
      TransitRecord rec;
      rec.packet_id = packet_id;
      rec.source_index = si;
      rec.claimed_src = source.claimed_src;
      rec.actual_path = route(s.topology, source.attach, s.victim.attach, s.routing,
                              stream_seed(s.seed, packet_id, kRouteStream));

      Packet pkt = Packet::make(source.claimed_src, s.victim.ip, source.payload_size);
      pkt = ingress_process(pkt, s.topology.router(rec.actual_path.front()), std::nullopt, cfg);
      rec.option_hex.push_back(to_hex(pkt.option_bytes));

      bool dropped = false;
      for (std::size_t i = 0; i + 1 < rec.actual_path.size() && !dropped; ++i) {
        const Router& at = s.topology.router(rec.actual_path[i]);
        if (!at.marking_enabled) continue;
        const PortRef egress =
            egress_port_toward(s.topology, rec.actual_path[i], rec.actual_path[i + 1]);
        MarkResult marked = mark(pkt, at, egress, cfg);
        switch (marked.status) {
          case MarkStatus::marked:
            pkt = std::move(marked.packet);
            rec.option_hex.push_back(to_hex(pkt.option_bytes));
            break;
          case MarkStatus::truncated:
            rec.truncated = true;
            break;
          case MarkStatus::dropped:
            dropped = true;
            break;
        }
      }

      if (!dropped) {
        pkt = egress_process(pkt, s.topology.router(rec.actual_path.back()), std::nullopt, cfg);
        Rng loss_rng(stream_seed(s.seed, packet_id, kLossStream));
        rec.delivered = loss_rng.next_unit() >= s.loss_rate;
      }
      rec.final_option_hex = to_hex(pkt.option_bytes);

      if (rec.delivered) {
        captures.push_back(
            Capture{decode_or_throw(pkt.option_bytes, s.profile), s.victim.attach});
        capture_packet.push_back(packet_id);
        capture_path.push_back(rec.actual_path);
      }
      result.records.push_back(std::move(rec));
    }
  }

  RunReport& report = result.report;
  report.packets = packet_id;
  report.delivered = captures.size();
  for (std::size_t i = 0; i < captures.size(); ++i) {
    PacketVerdict v;
    v.packet_id = capture_packet[i];
    v.delivered = true;
    try {
      const ReconstructedPath path =
          reconstruct(captures[i].option, captures[i].receiver, s.topology, s.assignment);
      v.reconstructed = true;
      v.reconstructed_path = path.routers;
      v.status = path.status;
      v.matched = path.routers == capture_path[i];
      if (!v.matched) {
        std::ostringstream why;
        why << "reconstructed sequence diverges from the transit path";
        v.error = why.str();
      }
    } catch (const ReconstructionError& e) {
      v.error = e.what();
    }
    v.matched ? ++report.matched : (v.reconstructed ? ++report.mismatched : ++report.failed);
    report.verdicts.push_back(std::move(v));
  }
  report.attribution = attribute_sources(captures, s.topology, s.assignment);
  return result;
}

std::vector<OverheadRow> overhead_report(const CodecProfile& p,
                                         const std::vector<std::uint32_t>& sizes) {
  const std::uint32_t added = static_cast<std::uint32_t>(padded_length(p.option_length));
  std::vector<OverheadRow> rows;
  rows.reserve(sizes.size());
  for (std::uint32_t size : sizes) {
    if (size < 20) throw ScenarioError("packet size must be at least the 20-byte base header");
    // percent to 4 decimals, rounding half up on the exact rational
    const std::uint64_t scaled =
        (static_cast<std::uint64_t>(added) * 100 * 10000 * 2 + size) / (2ull * size);
    std::ostringstream text;
    text << scaled / 10000 << '.';
    const auto frac = scaled % 10000;
    text.width(4);
    text.fill('0');
    text << frac;
    rows.push_back(OverheadRow{size, added, text.str()});
  }
  return rows;
}

namespace {

json verdict_to_json(const PacketVerdict& v, const Topology& t) {
  json j{{"packet_id", v.packet_id},
         {"delivered", v.delivered},
         {"reconstructed", v.reconstructed},
         {"matched", v.matched}};
  if (v.reconstructed) {
    j["status"] = to_string(v.status);
    j["routers"] = v.reconstructed_path;
    json addrs = json::array();
    for (RouterId r : v.reconstructed_path) addrs.push_back(t.router(r).address.to_string());
    j["addresses"] = std::move(addrs);
  }
  if (!v.error.empty()) j["error"] = v.error;
  return j;
}

}  // namespace

std::string transit_log_json(const std::vector<TransitRecord>& records) {
  json recs = json::array();
  for (const TransitRecord& r : records)
    recs.push_back({{"packet_id", r.packet_id},
                    {"source", r.source_index},
                    {"claimed_src", r.claimed_src.to_string()},
                    {"path", r.actual_path},
                    {"option_hex", r.option_hex},
                    {"final_option_hex", r.final_option_hex},
                    {"delivered", r.delivered},
                    {"truncated", r.truncated}});
  return json{{"records", std::move(recs)}}.dump(2) + "\n";
}

std::string run_report_json(const RunReport& report, const Topology& t) {
  json verdicts = json::array();
  for (const PacketVerdict& v : report.verdicts) verdicts.push_back(verdict_to_json(v, t));
  json ingress = json::array();
  for (const auto& [router, n] : report.attribution.by_ingress)
    ingress.push_back({{"router", router},
                       {"address", t.router(router).address.to_string()},
                       {"packets", n}});
  return json{{"summary",
               {{"packets", report.packets},
                {"delivered", report.delivered},
                {"matched", report.matched},
                {"mismatched", report.mismatched},
                {"failed", report.failed}}},
              {"attribution",
               {{"by_ingress", std::move(ingress)},
                {"truncated", report.attribution.truncated},
                {"no_match", report.attribution.no_match},
                {"ambiguous", report.attribution.ambiguous}}},
              {"captures", std::move(verdicts)}}
             .dump(2) +
         "\n";
}

namespace {

CodecProfile profile_from_json(const json& j) {
  CodecProfile p;
  p.bit_width = j.at("bit_width").get<int>();
  p.include_sender = j.value("include_sender", true);
  p.include_receiver = j.value("include_receiver", true);
  p.option_length = j.value("option_length", 40);
  return p;
}

}  // namespace

Scenario Scenario::load(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ScenarioError("cannot open '" + file.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();

  json doc;
  try {
    doc = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw ScenarioError(file.string() + ": " + e.what());
  }

  const auto dir = file.parent_path();
  Scenario s;
  try {
    const json& jt = doc.at("topology");
    s.topology = jt.is_string() ? Topology::load(dir / jt.get<std::string>())
                                : Topology::from_json_text(jt.dump(), file.string());

    s.profile = profile_from_json(doc.at("profile"));

    if (doc.contains("assignment")) {
      const json& ja = doc.at("assignment");
      s.assignment = ja.is_string() ? IdAssignment::load(dir / ja.get<std::string>())
                                    : IdAssignment::from_json_text(ja.dump(), file.string());
    } else {
      s.assignment = assign_ids(s.topology, doc.value("assign_seed", 0ull));
    }
    // a wider deployment profile is fine; a narrower one cannot hold the ids
    if (s.assignment.bit_width < s.profile.bit_width)
      s.assignment.bit_width = s.profile.bit_width;

    for (const json& js : doc.at("sources"))
      s.sources.push_back(SourceSpec{js.at("attach").get<RouterId>(),
                                     Ipv4Address::parse(js.at("src_ip").get<std::string>()),
                                     js.at("packets").get<std::size_t>(),
                                     js.value("payload_size", 0u)});
    s.victim = VictimSpec{doc.at("victim").at("attach").get<RouterId>(),
                          Ipv4Address::parse(doc.at("victim").at("ip").get<std::string>())};

    const std::string routing = doc.value("routing", "shortest_path");
    if (routing == "shortest_path") s.routing = RoutingPolicy::shortest_path;
    else if (routing == "ecmp_random") s.routing = RoutingPolicy::ecmp_random;
    else throw ScenarioError("unknown routing policy '" + routing + "'");

    s.loss_rate = doc.value("loss_rate", 0.0);
    s.seed = doc.value("seed", 0ull);
    if (doc.contains("boundary"))
      for (const json& jb : doc.at("boundary")) s.boundary.insert(jb.get<RouterId>());
    const std::string policy = doc.value("on_capacity", "stop_marking");
    if (policy == "stop_marking") s.on_capacity = CapacityPolicy::stop_marking;
    else if (policy == "drop_packet") s.on_capacity = CapacityPolicy::drop_packet;
    else throw ScenarioError("unknown on_capacity policy '" + policy + "'");
  } catch (const json::exception& e) {
    throw ScenarioError(file.string() + ": " + e.what());
  }
  return s;
}

}  // namespace tracemax
