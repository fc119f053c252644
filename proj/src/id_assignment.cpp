#include "tracemax/id_assignment.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <map>
#include <queue>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

namespace tracemax {

namespace {

using nlohmann::json;

std::string read_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw AssignmentError("cannot open '" + file.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Incoming ids of a router: ids on far-end ports of its links. Only
// assigned ports contribute.
std::multiset<TracemaxId> incoming_ids(const Topology& t, const std::map<PortRef, TracemaxId>& ids,
                                       RouterId at) {
  std::multiset<TracemaxId> in;
  for (const Neighbor& nb : t.neighbors(at)) {
    auto it = ids.find(nb.remote);
    if (it != ids.end()) in.insert(it->second);
  }
  return in;
}

}  // namespace

std::optional<TracemaxId> IdAssignment::id_at(const PortRef& p) const {
  auto it = ids.find(p);
  if (it == ids.end()) return std::nullopt;
  return it->second;
}

IdAssignment assign_ids(const Topology& t, std::uint64_t seed) {
  std::vector<RouterId> marking;
  for (const auto& [id, r] : t.routers())
    if (r.marking_enabled) marking.push_back(id);
  if (marking.empty()) throw AssignmentError("no marking-enabled routers");

  IdAssignment out;
  std::set<RouterId> selected;
  std::set<RouterId> frontier;  // unselected marking routers adjacent to the selected set

  auto ids_used_at = [&](RouterId node) {
    std::set<TracemaxId> used;
    for (const Neighbor& nb : t.neighbors(node)) {
      auto it = out.ids.find(nb.local);
      if (it != out.ids.end()) used.insert(it->second);
    }
    return used;
  };
  auto select = [&](RouterId node) {
    selected.insert(node);
    frontier.erase(node);
    for (const Neighbor& nb : t.neighbors(node))
      if (t.router(nb.router).marking_enabled && !selected.contains(nb.router))
        frontier.insert(nb.router);
  };

  // Seed-picked start node: every linked port keeps its port number.
  std::mt19937_64 rng(seed);
  const RouterId first = marking[rng() % marking.size()];
  for (const Neighbor& nb : t.neighbors(first)) {
    if (nb.local.port > kMaxTracemaxId)
      throw AssignmentError("port number " + nb.local.to_string() + " exceeds the id ceiling 255");
    out.ids[nb.local] = static_cast<TracemaxId>(nb.local.port);
  }
  select(first);

  while (selected.size() < marking.size()) {
    if (frontier.empty())
      throw AssignmentError("marking subgraph is disconnected: " +
                            std::to_string(marking.size() - selected.size()) +
                            " router(s) unreachable from router " + std::to_string(first));
    const RouterId node = *frontier.begin();  // smallest id first, reproducible
    std::set<TracemaxId> used = ids_used_at(node);
    for (const Neighbor& nb : t.neighbors(node)) {   // ascending port index
      if (out.ids.contains(nb.local)) continue;      // free ports only
      std::multiset<TracemaxId> far_in = incoming_ids(t, out.ids, nb.router);
      TracemaxId id = 1;
      while (used.contains(id) || far_in.contains(id)) {
        if (++id > kMaxTracemaxId)
          throw AssignmentError("id demand at port " + nb.local.to_string() + " exceeds 255");
      }
      out.ids[nb.local] = id;
      used.insert(id);
    }
    select(node);
  }

  out.bit_width = out.ids.empty() ? 1 : min_bit_width(out);
  return out;
}

ValidationReport validate(const Topology& t, const IdAssignment& a) {
  for (const auto& [id, r] : t.routers()) {
    if (!r.marking_enabled) continue;
    for (const Neighbor& nb : t.neighbors(id))
      if (!a.ids.contains(nb.local))
        throw AssignmentError("linked port " + nb.local.to_string() +
                              " of marking router has no id");
  }

  ValidationReport report;
  for (const auto& [id, r] : t.routers()) {
    std::map<TracemaxId, std::vector<PortRef>> seen;
    for (const Neighbor& nb : t.neighbors(id)) {
      if (!t.router(nb.router).marking_enabled) continue;
      auto it = a.ids.find(nb.remote);
      if (it != a.ids.end()) seen[it->second].push_back(nb.remote);
    }
    for (auto& [in_id, ports] : seen)
      if (ports.size() > 1) report.conflicts.push_back(IdConflict{id, in_id, std::move(ports)});
  }
  return report;
}

int min_bit_width(const IdAssignment& a) {
  if (a.ids.empty()) throw AssignmentError("empty assignment");
  TracemaxId max_id = 0;
  for (const auto& [port, id] : a.ids) max_id = std::max(max_id, id);
  return std::bit_width(static_cast<unsigned>(max_id));
}

namespace {

// State for the exhaustive path enumeration: emitted sequences per end
// router, mapped back to the first path that produced them.
struct PathTable {
  // key: (end router, id sequence)
  std::map<std::pair<RouterId, std::vector<TracemaxId>>, std::vector<RouterId>> seen;
  std::optional<PathCollision> collision;

  void record(const std::vector<RouterId>& path, const std::vector<TracemaxId>& seq) {
    auto [it, inserted] = seen.try_emplace({path.back(), seq}, path);
    if (!inserted && it->second != path && !collision)
      collision = PathCollision{path.back(), seq, it->second, path};
  }
};

void extend_paths(const Topology& t, const IdAssignment& a, std::size_t max_len,
                  std::vector<RouterId>& path, std::vector<TracemaxId>& seq,
                  std::set<RouterId>& visited, PathTable& table) {
  table.record(path, seq);
  if (table.collision || path.size() > max_len) return;
  const RouterId here = path.back();
  for (const Neighbor& nb : t.neighbors(here)) {
    if (visited.contains(nb.router)) continue;
    const bool marks = t.router(here).marking_enabled;
    const auto id = a.id_at(nb.local);
    if (marks && !id) continue;  // unlabeled egress cannot be transited
    path.push_back(nb.router);
    visited.insert(nb.router);
    if (marks) seq.push_back(*id);
    extend_paths(t, a, max_len, path, seq, visited, table);
    if (marks) seq.pop_back();
    visited.erase(nb.router);
    path.pop_back();
  }
}

}  // namespace

ReconstructibilityCheck check_reconstructible(const Topology& t, const IdAssignment& a,
                                              std::size_t max_len) {
  if (max_len < 1) throw AssignmentError("max_len must be >= 1");
  PathTable table;
  for (const auto& [id, r] : t.routers()) {
    if (!r.marking_enabled) continue;  // in-system paths begin at a marking router
    std::vector<RouterId> path{id};
    std::vector<TracemaxId> seq;
    std::set<RouterId> visited{id};
    extend_paths(t, a, max_len, path, seq, visited, table);
    if (table.collision) break;
  }
  return ReconstructibilityCheck{table.collision};
}

IdAssignment IdAssignment::from_json_text(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw AssignmentError(origin + ": " + e.what());
  }
  IdAssignment a;
  try {
    a.bit_width = doc.at("bit_width").get<int>();
    for (const json& je : doc.at("ids")) {
      const PortRef port{je.at("router").get<RouterId>(), je.at("port").get<PortIndex>()};
      const auto id = je.at("id").get<unsigned>();
      if (id < 1 || id > kMaxTracemaxId)
        throw AssignmentError("id " + std::to_string(id) + " at port " + port.to_string() +
                              " out of range 1..255");
      if (!a.ids.emplace(port, static_cast<TracemaxId>(id)).second)
        throw AssignmentError("duplicate entry for port " + port.to_string());
    }
  } catch (const json::exception& e) {
    throw AssignmentError(origin + ": " + e.what());
  }
  if (a.bit_width < 1 || a.bit_width > 8)
    throw AssignmentError(origin + ": bit_width out of range 1..8");
  if (!a.ids.empty() && a.bit_width < min_bit_width(a))
    throw AssignmentError(origin + ": bit_width " + std::to_string(a.bit_width) +
                          " too small for the largest id");
  return a;
}

std::string IdAssignment::to_json_text() const {
  json entries = json::array();
  for (const auto& [port, id] : ids)
    entries.push_back({{"router", port.router}, {"port", port.port}, {"id", id}});
  return json{{"bit_width", bit_width}, {"ids", std::move(entries)}}.dump(2) + "\n";
}

IdAssignment IdAssignment::load(const std::filesystem::path& file) {
  return from_json_text(read_file(file), file.string());
}

void IdAssignment::save(const std::filesystem::path& file) const {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw AssignmentError("cannot write '" + file.string() + "'");
  out << to_json_text();
}

}  // namespace tracemax
