#include "tracemax/option_codec.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

namespace tracemax {

namespace {

std::string fmt(const char* format, auto... args) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

void check_bit_width(int bit_width) {
  if (bit_width < 1 || bit_width > 8)
    throw CodecError(fmt("bit_width %d out of range 1..8", bit_width));
}

// MSB-first bit packing inside the ID field.
void write_bits(std::vector<std::uint8_t>& buf, std::size_t bit_offset, int width,
                std::uint32_t value) {
  for (int k = 0; k < width; ++k) {
    const std::uint32_t bit = (value >> (width - 1 - k)) & 1u;
    const std::size_t pos = bit_offset + static_cast<std::size_t>(k);
    buf[pos / 8] |= static_cast<std::uint8_t>(bit << (7 - pos % 8));
  }
}

std::uint32_t read_bits(std::span<const std::uint8_t> buf, std::size_t bit_offset, int width) {
  std::uint32_t value = 0;
  for (int k = 0; k < width; ++k) {
    const std::size_t pos = bit_offset + static_cast<std::size_t>(k);
    value = (value << 1) | ((buf[pos / 8] >> (7 - pos % 8)) & 1u);
  }
  return value;
}

int id_region_bytes(std::size_t option_length, bool sender, bool receiver) {
  return static_cast<int>(option_length) - 3 - (sender ? 4 : 0) - (receiver ? 4 : 0);
}

std::size_t id_region_offset(bool sender) { return sender ? 7 : 3; }

}  // namespace

std::size_t padded_length(std::size_t option_length) {
  const std::size_t header = 20 + option_length;
  return (header + 3) / 4 * 4 - 20;
}

std::size_t capacity_for(std::size_t option_length, bool sender, bool receiver, int bit_width) {
  check_bit_width(bit_width);
  const int region = id_region_bytes(option_length, sender, receiver);
  if (region <= 0) return 0;
  return std::min(kMaxHopCount,
                  static_cast<std::size_t>(region) * 8 / static_cast<std::size_t>(bit_width));
}

std::size_t capacity(const CodecProfile& p) {
  return capacity_for(p.option_length, p.include_sender, p.include_receiver, p.bit_width);
}

std::vector<std::uint8_t> encode(const TraceOption& o, const CodecProfile& p) {
  check_bit_width(p.bit_width);
  if (o.option_type != kTraceOptionType)
    throw CodecError(fmt("option type 0x%02x is not the trace option", o.option_type));
  if (o.option_length < kMinOptionLength || o.option_length > kMaxOptionLength)
    throw CodecError(fmt("option_length %u out of range 3..40", o.option_length));
  const int region = id_region_bytes(o.option_length, o.has_sender, o.has_receiver);
  if (region < 0)
    throw CodecError(fmt("option_length %u cannot hold the flagged address slots",
                         o.option_length));
  const std::size_t cap =
      capacity_for(o.option_length, o.has_sender, o.has_receiver, p.bit_width);
  if (o.ids.size() > cap)
    throw CodecError(fmt("hop count %zu exceeds capacity %zu", o.ids.size(), cap));
  const TracemaxId id_limit = static_cast<TracemaxId>((1u << p.bit_width) - 1);
  for (TracemaxId id : o.ids)
    if (id < 1 || id > id_limit)
      throw CodecError(fmt("id %u out of range 1..%u for bit_width %d", id, id_limit,
                           p.bit_width));

  std::vector<std::uint8_t> out(padded_length(o.option_length), 0);
  out[0] = kTraceOptionType;
  out[1] = o.option_length;
  out[2] = static_cast<std::uint8_t>((o.has_sender ? kSenderFlag : 0) |
                                     (o.has_receiver ? kReceiverFlag : 0) | o.ids.size());
  if (o.has_sender) std::copy(o.sender.octets.begin(), o.sender.octets.end(), out.begin() + 3);
  const std::size_t region_bit0 = id_region_offset(o.has_sender) * 8;
  for (std::size_t i = 0; i < o.ids.size(); ++i)
    write_bits(out, region_bit0 + i * static_cast<std::size_t>(p.bit_width), p.bit_width,
               o.ids[i]);
  if (o.has_receiver)
    std::copy(o.receiver.octets.begin(), o.receiver.octets.end(),
              out.begin() + o.option_length - 4);
  return out;
}

DecodeResult decode(std::span<const std::uint8_t> bytes, const CodecProfile& p) {
  check_bit_width(p.bit_width);
  auto malformed = [](std::string why) {
    return DecodeResult{DecodeStatus::malformed, {}, std::move(why)};
  };
  if (bytes.empty()) return malformed("empty buffer");
  if (bytes[0] == kLooseSourceRouteType)
    return {DecodeStatus::source_route_refused, {}, "loose source route option refused"};
  if (bytes[0] == kStrictSourceRouteType)
    return {DecodeStatus::source_route_refused, {}, "strict source route option refused"};
  if (bytes[0] != kTraceOptionType)
    return malformed(fmt("option type 0x%02x is not the trace option", bytes[0]));
  if (bytes.size() < kMinOptionLength) return malformed("truncated: option header needs 3 octets");

  TraceOption o;
  o.option_length = bytes[1];
  if (o.option_length < kMinOptionLength || o.option_length > kMaxOptionLength)
    return malformed(fmt("option_length %u out of range 3..40", o.option_length));
  if (bytes.size() != padded_length(o.option_length))
    return malformed(fmt("buffer is %zu bytes, expected %zu (option_length %u plus padding)",
                         bytes.size(), padded_length(o.option_length), o.option_length));
  for (std::size_t i = o.option_length; i < bytes.size(); ++i)
    if (bytes[i] != 0) return malformed(fmt("non-zero padding octet at offset %zu", i));

  const std::uint8_t control = bytes[2];
  o.has_sender = (control & kSenderFlag) != 0;
  o.has_receiver = (control & kReceiverFlag) != 0;
  const std::size_t hops = control & kHopCountMask;
  const int region = id_region_bytes(o.option_length, o.has_sender, o.has_receiver);
  if (region < 0)
    return malformed(fmt("option_length %u cannot hold the flagged address slots",
                         o.option_length));
  const std::size_t cap =
      capacity_for(o.option_length, o.has_sender, o.has_receiver, p.bit_width);
  if (hops > cap) return malformed(fmt("hop count %zu exceeds capacity %zu", hops, cap));

  if (o.has_sender) std::copy(bytes.begin() + 3, bytes.begin() + 7, o.sender.octets.begin());
  if (o.has_receiver)
    std::copy(bytes.begin() + o.option_length - 4, bytes.begin() + o.option_length,
              o.receiver.octets.begin());

  const std::size_t region_bit0 = id_region_offset(o.has_sender) * 8;
  const std::size_t width = static_cast<std::size_t>(p.bit_width);
  o.ids.reserve(hops);
  for (std::size_t i = 0; i < hops; ++i) {
    const std::uint32_t id = read_bits(bytes, region_bit0 + i * width, p.bit_width);
    if (id == 0) return malformed(fmt("id 0 embedded at hop %zu", i));
    o.ids.push_back(static_cast<TracemaxId>(id));
  }
  // written ids must be followed by zero fill only
  const std::size_t region_bits = static_cast<std::size_t>(region) * 8;
  for (std::size_t b = hops * width; b < region_bits; ++b)
    if (read_bits(bytes, region_bit0 + b, 1) != 0)
      return malformed("id field carries bits beyond the declared hop count");

  return {DecodeStatus::ok, std::move(o), {}};
}

TraceOption decode_or_throw(std::span<const std::uint8_t> bytes, const CodecProfile& p) {
  DecodeResult res = decode(bytes, p);
  if (!res.ok()) throw CodecError(res.error);
  return std::move(res.option);
}

std::vector<std::uint8_t> append_id(std::span<const std::uint8_t> bytes, TracemaxId id,
                                    const CodecProfile& p) {
  DecodeResult decoded = decode(bytes, p);
  if (!decoded.ok()) throw CodecError("append to undecodable option: " + decoded.error);
  const TraceOption& o = decoded.option;
  const TracemaxId id_limit = static_cast<TracemaxId>((1u << p.bit_width) - 1);
  if (id < 1 || id > id_limit)
    throw CodecError(fmt("id %u out of range 1..%u for bit_width %d", id, id_limit, p.bit_width));
  const std::size_t cap =
      capacity_for(o.option_length, o.has_sender, o.has_receiver, p.bit_width);
  if (o.ids.size() >= cap)
    throw CapacityExceeded(fmt("id field full: %zu hops at capacity %zu", o.ids.size(), cap));

  std::vector<std::uint8_t> out(bytes.begin(), bytes.end());
  out[2] = static_cast<std::uint8_t>((out[2] & ~kHopCountMask) | (o.ids.size() + 1));
  const std::size_t region_bit0 = id_region_offset(o.has_sender) * 8;
  write_bits(out, region_bit0 + o.ids.size() * static_cast<std::size_t>(p.bit_width),
             p.bit_width, id);
  return out;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve(bytes.size() * 3);
  char buf[4];
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%02x", bytes[i]);
    if (i) out += ' ';
    out += buf;
  }
  return out;
}

std::vector<std::uint8_t> parse_hex(const std::string& text) {
  std::vector<std::uint8_t> out;
  int nibble = -1;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (nibble >= 0) throw CodecError(fmt("odd hex digit before offset %zu", i));
      continue;
    }
    int v;
    if (c >= '0' && c <= '9') v = c - '0';
    else if (c >= 'a' && c <= 'f') v = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F') v = c - 'A' + 10;
    else throw CodecError(fmt("bad hex character '%c' at offset %zu", c, i));
    if (nibble < 0) {
      nibble = v;
    } else {
      out.push_back(static_cast<std::uint8_t>(nibble << 4 | v));
      nibble = -1;
    }
  }
  if (nibble >= 0) throw CodecError("odd number of hex digits");
  return out;
}

}  // namespace tracemax
