#include "tracemax/marking.hpp"

#include <algorithm>

namespace tracemax {

namespace {

void check_config(const MarkingConfig& cfg) {
  if (cfg.assignment.bit_width != cfg.profile.bit_width)
    throw MarkingError("assignment bit_width " + std::to_string(cfg.assignment.bit_width) +
                       " does not match profile bit_width " +
                       std::to_string(cfg.profile.bit_width));
}

std::uint32_t with_option_length(std::uint32_t payload_size, std::size_t option_bytes) {
  return 20 + static_cast<std::uint32_t>(option_bytes) + payload_size;
}

}  // namespace

Packet Packet::make(const Ipv4Address& src, const Ipv4Address& dst, std::uint32_t payload_size) {
  Packet p;
  p.src = src;
  p.dst = dst;
  p.payload_size = payload_size;
  p.total_length = 20 + payload_size;
  return p;
}

Packet ingress_process(const Packet& pkt, const Router& entry,
                       const std::optional<Ipv4Address>& prev_hop, const MarkingConfig& cfg) {
  check_config(cfg);
  if (!cfg.system_boundary.contains(entry.id))
    throw MarkingError("router " + std::to_string(entry.id) + " is not a system boundary edge");

  TraceOption o;
  o.option_length = cfg.profile.option_length;
  o.has_sender = cfg.profile.include_sender;
  o.has_receiver = cfg.profile.include_receiver;
  if (o.has_sender) o.sender = prev_hop.value_or(pkt.src);

  Packet out = pkt;
  out.option_bytes = encode(o, cfg.profile);
  out.total_length = with_option_length(out.payload_size, out.option_bytes.size());
  return out;
}

MarkResult mark(const Packet& pkt, const Router& at, const PortRef& egress_port,
                const MarkingConfig& cfg) {
  check_config(cfg);
  if (!at.marking_enabled)
    throw MarkingError("router " + std::to_string(at.id) + " does not mark");
  if (egress_port.router != at.id)
    throw MarkingError("egress port " + egress_port.to_string() + " does not belong to router " +
                       std::to_string(at.id));
  const auto id = cfg.assignment.id_at(egress_port);
  if (!id) throw MarkingError("no id assigned to egress port " + egress_port.to_string());

  try {
    Packet out = pkt;
    out.option_bytes = append_id(pkt.option_bytes, *id, cfg.profile);
    return MarkResult{std::move(out), MarkStatus::marked};
  } catch (const CapacityExceeded&) {
    if (cfg.on_capacity == CapacityPolicy::stop_marking)
      return MarkResult{pkt, MarkStatus::truncated};
    return MarkResult{pkt, MarkStatus::dropped};
  }
}

Packet egress_process(const Packet& pkt, const Router& exit,
                      const std::optional<Ipv4Address>& next_external, const MarkingConfig& cfg) {
  check_config(cfg);
  if (!cfg.system_boundary.contains(exit.id))
    throw MarkingError("router " + std::to_string(exit.id) + " is not a system boundary edge");
  DecodeResult decoded = decode(pkt.option_bytes, cfg.profile);
  if (!decoded.ok()) throw MarkingError("malformed option at egress: " + decoded.error);
  if (!cfg.profile.include_receiver) return pkt;
  if (!decoded.option.has_receiver)
    throw MarkingError("option carries no receiver slot");

  const Ipv4Address receiver = next_external.value_or(pkt.dst);
  Packet out = pkt;
  std::copy(receiver.octets.begin(), receiver.octets.end(),
            out.option_bytes.begin() + decoded.option.option_length - 4);
  return out;
}

}  // namespace tracemax
