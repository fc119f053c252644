#include "tracemax/topology.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace tracemax {

namespace {

using nlohmann::json;

Link normalized(const Link& l) { return l.a <= l.b ? l : Link{l.b, l.a}; }

std::string read_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw TopologyError("cannot open '" + file.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw TopologyError("cannot write '" + file.string() + "'");
  out << text;
}

PortRef parse_port_ref(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 >= text.size())
    throw TopologyError("bad port reference '" + text + "', expected \"router:port\"");
  try {
    return PortRef{static_cast<RouterId>(std::stoul(text.substr(0, colon))),
                   static_cast<PortIndex>(std::stoul(text.substr(colon + 1)))};
  } catch (const std::exception&) {
    throw TopologyError("bad port reference '" + text + "', expected \"router:port\"");
  }
}

}  // namespace

std::string PortRef::to_string() const {
  return std::to_string(router) + ":" + std::to_string(port);
}

void Topology::add_router(const Router& r) {
  if (r.port_count < 1)
    throw TopologyError("router " + std::to_string(r.id) + ": port_count must be >= 1");
  if (routers_.contains(r.id))
    throw TopologyError("duplicate router id " + std::to_string(r.id));
  if (by_address_.contains(r.address))
    throw TopologyError("duplicate router address " + r.address.to_string());
  routers_.emplace(r.id, r);
  by_address_.emplace(r.address, r.id);
}

void Topology::check_port(const PortRef& p) const {
  auto it = routers_.find(p.router);
  if (it == routers_.end())
    throw TopologyError("unknown router " + std::to_string(p.router));
  if (p.port < 1 || p.port > it->second.port_count)
    throw TopologyError("port " + p.to_string() + " out of range (router has " +
                        std::to_string(it->second.port_count) + " ports)");
}

void Topology::add_link(const PortRef& a, const PortRef& b) {
  check_port(a);
  check_port(b);
  if (a.router == b.router)
    throw TopologyError("self-loop on router " + std::to_string(a.router));
  for (const PortRef& p : {a, b})
    if (link_at_port_.contains(p))
      throw TopologyError("port " + p.to_string() + " already occupied");
  links_.push_back(Link{a, b});
  link_at_port_.emplace(a, links_.size() - 1);
  link_at_port_.emplace(b, links_.size() - 1);
}

const Router& Topology::router(RouterId id) const {
  auto it = routers_.find(id);
  if (it == routers_.end()) throw TopologyError("unknown router " + std::to_string(id));
  return it->second;
}

std::optional<RouterId> Topology::router_by_address(const Ipv4Address& addr) const {
  auto it = by_address_.find(addr);
  if (it == by_address_.end()) return std::nullopt;
  return it->second;
}

std::vector<Neighbor> Topology::neighbors(RouterId id) const {
  router(id);  // existence check
  std::vector<Neighbor> out;
  for (const Link& l : links_) {
    if (l.a.router == id) out.push_back(Neighbor{l.b.router, l.a, l.b});
    else if (l.b.router == id) out.push_back(Neighbor{l.a.router, l.b, l.a});
  }
  std::sort(out.begin(), out.end(),
            [](const Neighbor& x, const Neighbor& y) { return x.local.port < y.local.port; });
  return out;
}

bool Topology::operator==(const Topology& other) const {
  if (routers_ != other.routers_) return false;
  auto key = [](const Topology& t) {
    std::vector<Link> ls;
    ls.reserve(t.links_.size());
    for (const Link& l : t.links_) ls.push_back(normalized(l));
    std::sort(ls.begin(), ls.end(), [](const Link& x, const Link& y) {
      return std::tie(x.a, x.b) < std::tie(y.a, y.b);
    });
    return ls;
  };
  return key(*this) == key(other);
}

Topology Topology::from_json_text(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw TopologyError(origin + ": " + e.what());
  }
  Topology t;
  try {
    for (const json& jr : doc.at("routers")) {
      Router r;
      r.id = jr.at("id").get<RouterId>();
      r.address = Ipv4Address::parse(jr.at("address").get<std::string>());
      r.port_count = jr.at("ports").get<PortIndex>();
      r.marking_enabled = jr.at("marking").get<bool>();
      t.add_router(r);
    }
    for (const json& jl : doc.at("links"))
      t.add_link(parse_port_ref(jl.at("a").get<std::string>()),
                 parse_port_ref(jl.at("b").get<std::string>()));
  } catch (const json::exception& e) {
    throw TopologyError(origin + ": " + e.what());
  } catch (const Error& e) {
    throw TopologyError(origin + ": " + e.what());
  }
  return t;
}

std::string Topology::to_json_text() const {
  json routers = json::array();
  for (const auto& [id, r] : routers_)
    routers.push_back({{"id", id},
                       {"address", r.address.to_string()},
                       {"ports", r.port_count},
                       {"marking", r.marking_enabled}});
  json links = json::array();
  for (const Link& l : links_) {
    const Link n = normalized(l);
    links.push_back({{"a", n.a.to_string()}, {"b", n.b.to_string()}});
  }
  return json{{"routers", std::move(routers)}, {"links", std::move(links)}}.dump(2) + "\n";
}

Topology Topology::load(const std::filesystem::path& file) {
  return from_json_text(read_file(file), file.string());
}

void Topology::save(const std::filesystem::path& file) const {
  write_file(file, to_json_text());
}

}  // namespace tracemax
