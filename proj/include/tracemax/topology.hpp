#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tracemax/error.hpp"
#include "tracemax/ipv4.hpp"
#include "tracemax/types.hpp"

namespace tracemax {

class TopologyError : public Error {
  using Error::Error;
};

struct Router {
  RouterId id = 0;
  Ipv4Address address;
  bool marking_enabled = true;
  PortIndex port_count = 1;

  bool operator==(const Router&) const = default;
};

struct PortRef {
  RouterId router = 0;
  PortIndex port = 0;  // 1-based

  auto operator<=>(const PortRef&) const = default;
  std::string to_string() const;  // "router:port"
};

struct Link {
  PortRef a;
  PortRef b;

  bool operator==(const Link&) const = default;
};

struct Neighbor {
  RouterId router;  // far-end router
  PortRef local;
  PortRef remote;  // facing port on the far end
};

// Router graph: nodes with numbered physical ports, point-to-point
// links. Self-loops are rejected; parallel links between two routers
// are allowed and each physical port carries at most one cable.
// Mutation is a single-owner build phase; afterwards values are read
// only and safe to share across threads.
class Topology {
 public:
  void add_router(const Router& r);
  void add_link(const PortRef& a, const PortRef& b);

  bool has_router(RouterId id) const { return routers_.contains(id); }
  const Router& router(RouterId id) const;
  std::optional<RouterId> router_by_address(const Ipv4Address& addr) const;
  bool port_occupied(const PortRef& p) const { return link_at_port_.contains(p); }

  // One entry per incident link, sorted by local port index.
  std::vector<Neighbor> neighbors(RouterId id) const;

  const std::map<RouterId, Router>& routers() const { return routers_; }
  const std::vector<Link>& links() const { return links_; }

  static Topology load(const std::filesystem::path& file);
  void save(const std::filesystem::path& file) const;
  static Topology from_json_text(const std::string& text, const std::string& origin = "<input>");
  std::string to_json_text() const;

  bool operator==(const Topology& other) const;  // structural equality

 private:
  void check_port(const PortRef& p) const;

  std::map<RouterId, Router> routers_;
  std::map<Ipv4Address, RouterId> by_address_;
  std::vector<Link> links_;
  std::map<PortRef, std::size_t> link_at_port_;
};

}  // namespace tracemax
