#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tracemax/error.hpp"
#include "tracemax/ipv4.hpp"
#include "tracemax/types.hpp"

namespace tracemax {

// Trace option carried in the IPv4 Option Field.
//
// Wire layout (option_length bytes, then zero padding to a 32-bit
// header boundary):
//
//   0               8               16
//   +---------------+---------------+-+-+-----------+
//   |  option type  | option length |S|R| hop count |
//   |     0x56      |   (3..40)     | | |  (6 bit)  |
//   +---------------+---------------+-+-+-----------+
//   |        sender IPv4, 4 octets when S set       |
//   +-----------------------------------------------+
//   |  ID field: hop IDs packed MSB-first at        |
//   |  bit_width bits each, zero-filled to the      |
//   |  fixed region size                            |
//   +-----------------------------------------------+
//   |       receiver IPv4, 4 octets when R set      |
//   +-----------------------------------------------+
//
// The receiver slot sits at the end of the fixed region
// (offset option_length - 4), independent of the hop count.

inline constexpr std::uint8_t kTraceOptionType = 0x56;  // copied 0, class 2, number 22
inline constexpr std::uint8_t kLooseSourceRouteType = 0x83;
inline constexpr std::uint8_t kStrictSourceRouteType = 0x89;
inline constexpr std::size_t kMinOptionLength = 3;
inline constexpr std::size_t kMaxOptionLength = 40;
inline constexpr std::size_t kMaxHopCount = 63;

inline constexpr std::uint8_t kSenderFlag = 0x80;
inline constexpr std::uint8_t kReceiverFlag = 0x40;
inline constexpr std::uint8_t kHopCountMask = 0x3f;

class CodecError : public Error {
  using Error::Error;
};

// Raised when an append would not fit in the ID field; the caller
// decides the policy.
class CapacityExceeded : public CodecError {
  using CodecError::CodecError;
};

// Deployment-wide knobs fixed at configuration time. The default is
// the full layout: both address slots and 4-bit IDs (capacity 58).
struct CodecProfile {
  int bit_width = 4;  // 1..8
  bool include_sender = true;
  bool include_receiver = true;
  std::uint8_t option_length = 40;

  bool operator==(const CodecProfile&) const = default;
};

struct TraceOption {
  std::uint8_t option_type = kTraceOptionType;
  std::uint8_t option_length = kMaxOptionLength;
  bool has_sender = false;
  bool has_receiver = false;
  Ipv4Address sender{};    // meaningful only when has_sender
  Ipv4Address receiver{};  // meaningful only when has_receiver
  std::vector<TracemaxId> ids;

  std::size_t hop_count() const { return ids.size(); }

  bool operator==(const TraceOption&) const = default;
};

// Option bytes plus End-of-Option-List padding so the IPv4 header
// stays 32-bit aligned (header = 20 + returned value, never > 60).
std::size_t padded_length(std::size_t option_length);

// Hop IDs that fit the ID field for the given layout; never above the
// 6-bit hop counter.
std::size_t capacity_for(std::size_t option_length, bool sender, bool receiver, int bit_width);
std::size_t capacity(const CodecProfile& p);

// Serializes a valid option; throws CodecError when `o` violates the
// layout (id out of range for bit_width, hop count over capacity, ...).
std::vector<std::uint8_t> encode(const TraceOption& o, const CodecProfile& p);

enum class DecodeStatus {
  ok,
  source_route_refused,  // loose/strict source route, dropped on sight
  malformed,
};

struct DecodeResult {
  DecodeStatus status = DecodeStatus::malformed;
  TraceOption option;  // populated when status == ok
  std::string error;   // populated otherwise

  bool ok() const { return status == DecodeStatus::ok; }
};

// Total over arbitrary bytes: classifies every input, never throws.
// Only p.bit_width is consulted; address flags come from the buffer.
DecodeResult decode(std::span<const std::uint8_t> bytes, const CodecProfile& p);

TraceOption decode_or_throw(std::span<const std::uint8_t> bytes, const CodecProfile& p);

// In-place append performed by a router at its outgoing interface.
// Output differs from input only in the hop counter and the bit_width
// bits at offset hop_count * bit_width of the ID field.
std::vector<std::uint8_t> append_id(std::span<const std::uint8_t> bytes, TracemaxId id,
                                    const CodecProfile& p);

// Lowercase hex, space-separated octets ("56 28 00 ...").
std::string to_hex(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> parse_hex(const std::string& text);  // throws CodecError

}  // namespace tracemax
