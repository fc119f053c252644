#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "tracemax/marking.hpp"
#include "tracemax/reconstruction.hpp"

namespace tracemax {

class ScenarioError : public Error {
  using Error::Error;
};

class UnreachableError : public Error {
  using Error::Error;
};

enum class RoutingPolicy {
  shortest_path,  // minimal hops, lowest-router-id tie break
  ecmp_random,    // uniform choice among all minimal-hop paths, per packet
};

struct SourceSpec {
  RouterId attach = 0;
  Ipv4Address claimed_src;  // spoofable, attribution must not trust it
  std::size_t packets = 0;
  std::uint32_t payload_size = 0;
};

struct VictimSpec {
  RouterId attach = 0;
  Ipv4Address ip;
};

struct Scenario {
  Topology topology;
  IdAssignment assignment;
  CodecProfile profile;
  std::vector<SourceSpec> sources;
  VictimSpec victim;
  RoutingPolicy routing = RoutingPolicy::shortest_path;
  double loss_rate = 0.0;
  std::uint64_t seed = 0;
  std::set<RouterId> boundary;  // empty means every router may act as an edge
  CapacityPolicy on_capacity = CapacityPolicy::stop_marking;

  // Reads a scenario document; "topology" and "assignment" may be
  // inline objects or paths relative to the scenario file.
  static Scenario load(const std::filesystem::path& file);
};

// Minimal-hop route between two routers. The policy decides among
// equal-cost paths; per_packet_seed drives the ECMP draw.
std::vector<RouterId> route(const Topology& t, RouterId src, RouterId dst, RoutingPolicy policy,
                            std::uint64_t per_packet_seed);

// Smallest-numbered local port connecting `from` to `to`.
PortRef egress_port_toward(const Topology& t, RouterId from, RouterId to);

struct TransitRecord {
  std::size_t packet_id = 0;
  std::size_t source_index = 0;
  Ipv4Address claimed_src;
  std::vector<RouterId> actual_path;
  std::vector<std::string> option_hex;  // after ingress, then after every mark
  std::string final_option_hex;         // as captured at the victim
  bool delivered = false;
  bool truncated = false;
};

struct PacketVerdict {
  std::size_t packet_id = 0;
  bool delivered = false;
  bool reconstructed = false;
  bool matched = false;  // reconstructed router sequence equals the transit path
  std::vector<RouterId> reconstructed_path;
  PathStatus status = PathStatus::complete;
  std::string error;  // reconstruction failure detail
};

struct RunReport {
  std::vector<PacketVerdict> verdicts;
  AttributionReport attribution;
  std::size_t packets = 0;
  std::size_t delivered = 0;
  std::size_t matched = 0;
  std::size_t mismatched = 0;
  std::size_t failed = 0;  // reconstruction errors

  bool all_matched() const { return delivered == matched; }
};

struct RunResult {
  std::vector<TransitRecord> records;
  RunReport report;
};

// Drives every packet through ingress, per-hop marking and egress,
// applies Bernoulli loss, then reconstructs each delivered capture and
// compares it against the transit path. Deterministic per scenario:
// per-packet RNG streams are derived from (seed, packet id), so
// results are independent of processing order and of other packets.
RunResult run(const Scenario& s);

struct OverheadRow {
  std::uint32_t packet_size = 0;
  std::uint32_t added_bytes = 0;
  std::string percent;  // added/size, exact rational rendered to 4 decimals
};

std::vector<OverheadRow> overhead_report(const CodecProfile& p,
                                         const std::vector<std::uint32_t>& sizes);

std::string transit_log_json(const std::vector<TransitRecord>& records);
std::string run_report_json(const RunReport& report, const Topology& t);

}  // namespace tracemax
