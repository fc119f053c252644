#include "tracemax/ipv4.hpp"

#include <cstdio>

#include "tracemax/error.hpp"

namespace tracemax {

Ipv4Address Ipv4Address::parse(const std::string& text) {
  Ipv4Address out;
  std::size_t pos = 0;
  for (int i = 0; i < 4; ++i) {
    if (pos >= text.size() || text[pos] < '0' || text[pos] > '9')
      throw Error("bad IPv4 address '" + text + "'");
    unsigned value = 0;
    std::size_t digits = 0;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      value = value * 10 + static_cast<unsigned>(text[pos] - '0');
      ++pos;
      if (++digits > 3 || value > 255)
        throw Error("bad IPv4 address '" + text + "': octet out of range");
    }
    out.octets[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(value);
    if (i < 3) {
      if (pos >= text.size() || text[pos] != '.')
        throw Error("bad IPv4 address '" + text + "': expected '.'");
      ++pos;
    }
  }
  if (pos != text.size()) throw Error("bad IPv4 address '" + text + "': trailing characters");
  return out;
}

std::string Ipv4Address::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%u.%u.%u.%u", octets[0], octets[1], octets[2], octets[3]);
  return buf;
}

}  // namespace tracemax
