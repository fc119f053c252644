#pragma once

#include <optional>
#include <set>

#include "tracemax/id_assignment.hpp"
#include "tracemax/option_codec.hpp"
#include "tracemax/topology.hpp"

namespace tracemax {

class MarkingError : public Error {
  using Error::Error;
};

// Simulated IPv4 packet. Payload is carried by size only; marking must
// never touch it, nor the addresses.
struct Packet {
  Ipv4Address src;
  Ipv4Address dst;
  std::vector<std::uint8_t> option_bytes;  // includes alignment padding; may be foreign pre-ingress
  std::uint32_t payload_size = 0;
  std::uint32_t total_length = 20;

  static Packet make(const Ipv4Address& src, const Ipv4Address& dst, std::uint32_t payload_size);
};

enum class CapacityPolicy {
  stop_marking,  // leave the packet as is; the trace stays valid but partial
  drop_packet,
};

struct MarkingConfig {
  CodecProfile profile;
  IdAssignment assignment;
  std::set<RouterId> system_boundary;  // designated edge routers
  CapacityPolicy on_capacity = CapacityPolicy::stop_marking;
};

// Edge ingress: any pre-existing option content is discarded and a
// fresh zero-filled trace option installed, so forged trails never
// survive the border. The sender slot records the previous external
// hop when known, the packet's own source address otherwise.
Packet ingress_process(const Packet& pkt, const Router& entry,
                       const std::optional<Ipv4Address>& prev_hop, const MarkingConfig& cfg);

enum class MarkStatus {
  marked,
  truncated,  // id field full, stop_marking policy: packet unchanged
  dropped,    // id field full, drop_packet policy
};

struct MarkResult {
  Packet packet;
  MarkStatus status = MarkStatus::marked;
};

// Writes the id of the outgoing physical port into the option.
MarkResult mark(const Packet& pkt, const Router& at, const PortRef& egress_port,
                const MarkingConfig& cfg);

// Edge egress: stamps the receiver slot with the next external device,
// or the packet's destination when it is delivered directly.
Packet egress_process(const Packet& pkt, const Router& exit,
                      const std::optional<Ipv4Address>& next_external, const MarkingConfig& cfg);

}  // namespace tracemax
