#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>

namespace tracemax {

// Dotted-quad IPv4 address, octets in wire order.
struct Ipv4Address {
  std::array<std::uint8_t, 4> octets{};

  static Ipv4Address parse(const std::string& text);  // throws Error on bad syntax
  std::string to_string() const;

  auto operator<=>(const Ipv4Address&) const = default;
};

}  // namespace tracemax
