#pragma once

#include <map>
#include <random>
#include <vector>

#include "tracemax/topology.hpp"

namespace testsupport {

using namespace tracemax;

inline Ipv4Address addr_for(RouterId id) {
  return Ipv4Address{{10, static_cast<std::uint8_t>((id >> 16) & 0xff),
                      static_cast<std::uint8_t>((id >> 8) & 0xff),
                      static_cast<std::uint8_t>(id & 0xff)}};
}

inline Topology make_chain(std::size_t n, bool marking = true) {
  Topology t;
  for (std::size_t i = 1; i <= n; ++i)
    t.add_router(Router{static_cast<RouterId>(i), addr_for(static_cast<RouterId>(i)), marking, 2});
  for (std::size_t i = 1; i < n; ++i)
    t.add_link(PortRef{static_cast<RouterId>(i), 2}, PortRef{static_cast<RouterId>(i + 1), 1});
  return t;
}

// Connected random graph: a random spanning tree plus extra edges,
// bounded port counts so ids stay small.
inline Topology random_connected(std::mt19937_64& rng, std::size_t n, std::size_t extra_links,
                                 PortIndex ports_per_router = 12) {
  Topology t;
  for (std::size_t i = 1; i <= n; ++i)
    t.add_router(
        Router{static_cast<RouterId>(i), addr_for(static_cast<RouterId>(i)), true, ports_per_router});

  std::map<RouterId, PortIndex> next_port;
  auto take_port = [&](RouterId r) -> PortIndex {
    PortIndex& p = next_port[r];
    return ++p;
  };
  auto has_port = [&](RouterId r) { return next_port[r] < ports_per_router; };

  for (std::size_t i = 2; i <= n; ++i) {
    RouterId parent = static_cast<RouterId>(1 + rng() % (i - 1));
    while (!has_port(parent)) parent = static_cast<RouterId>(1 + rng() % (i - 1));
    t.add_link(PortRef{parent, take_port(parent)},
               PortRef{static_cast<RouterId>(i), take_port(static_cast<RouterId>(i))});
  }
  for (std::size_t e = 0; e < extra_links; ++e) {
    const RouterId a = static_cast<RouterId>(1 + rng() % n);
    const RouterId b = static_cast<RouterId>(1 + rng() % n);
    if (a == b || !has_port(a) || !has_port(b)) continue;
    t.add_link(PortRef{a, take_port(a)}, PortRef{b, take_port(b)});
  }
  return t;
}

}  // namespace testsupport
