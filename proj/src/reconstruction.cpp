#include "tracemax/reconstruction.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace tracemax {

namespace {

PathStatus status_for(const TraceOption& opt, const IdAssignment& a) {
  const std::size_t cap =
      capacity_for(opt.option_length, opt.has_sender, opt.has_receiver, a.bit_width);
  // A full id field cannot prove that marking continued past it.
  if (!opt.ids.empty() && opt.ids.size() >= cap) return PathStatus::truncated;
  return PathStatus::complete;
}

ReconstructedPath finish(std::vector<RouterId> routers, const TraceOption& opt,
                         const Topology& t, const IdAssignment& a) {
  ReconstructedPath out;
  out.routers = std::move(routers);
  out.addresses.reserve(out.routers.size());
  for (RouterId id : out.routers) out.addresses.push_back(t.router(id).address);
  out.status = status_for(opt, a);
  if (opt.has_sender) out.external_sender = opt.sender;
  if (opt.has_receiver) out.external_receiver = opt.receiver;
  return out;
}

std::string join_ids(const std::vector<RouterId>& ids) {
  std::ostringstream out;
  for (std::size_t i = 0; i < ids.size(); ++i) out << (i ? ", " : "") << ids[i];
  return out.str();
}

}  // namespace

const char* to_string(PathStatus s) {
  switch (s) {
    case PathStatus::complete: return "complete";
    case PathStatus::partial: return "partial";
    case PathStatus::truncated: return "truncated";
  }
  return "?";
}

ReconstructedPath reconstruct(const TraceOption& opt, RouterId receiver, const Topology& t,
                              const IdAssignment& a) {
  t.router(receiver);  // existence check

  std::vector<RouterId> back{receiver};  // receiver-first; reversed at the end
  std::set<RouterId> visited{receiver};
  RouterId current = receiver;
  for (std::size_t i = opt.ids.size(); i-- > 0;) {
    const TracemaxId id = opt.ids[i];
    std::vector<RouterId> candidates;
    for (const Neighbor& nb : t.neighbors(current)) {
      if (visited.contains(nb.router)) continue;
      if (!t.router(nb.router).marking_enabled) continue;
      if (a.id_at(nb.remote) == id &&
          std::find(candidates.begin(), candidates.end(), nb.router) == candidates.end())
        candidates.push_back(nb.router);
    }
    if (candidates.empty())
      throw NoMatchError("no neighbor of router " + std::to_string(current) +
                             " faces it with id " + std::to_string(id),
                         current, id, i);
    if (candidates.size() > 1) {
      std::sort(candidates.begin(), candidates.end());
      throw AmbiguousError("routers " + join_ids(candidates) + " all face router " +
                               std::to_string(current) + " with id " + std::to_string(id),
                           current, id, i, std::move(candidates));
    }
    current = candidates.front();
    back.push_back(current);
    visited.insert(current);
  }
  std::reverse(back.begin(), back.end());
  return finish(std::move(back), opt, t, a);
}

namespace {

// Backward step targets for one id: each entry is the chain of routers
// stepped through, bridges first, ending with the marking router whose
// facing port carries the id.
std::vector<std::vector<RouterId>> backward_steps(const Topology& t, const IdAssignment& a,
                                                  RouterId from, TracemaxId id,
                                                  std::size_t bridge_budget,
                                                  const std::set<RouterId>& visited) {
  std::vector<std::vector<RouterId>> found;
  std::vector<RouterId> chain;

  auto descend = [&](auto&& self, RouterId node, std::size_t bridges_left) -> void {
    for (const Neighbor& nb : t.neighbors(node)) {
      if (visited.contains(nb.router)) continue;
      if (std::find(chain.begin(), chain.end(), nb.router) != chain.end()) continue;
      if (t.router(nb.router).marking_enabled) {
        if (a.id_at(nb.remote) == id) {
          auto full = chain;
          full.push_back(nb.router);
          if (std::find(found.begin(), found.end(), full) == found.end())
            found.push_back(std::move(full));
        }
      } else if (bridges_left > 0) {
        chain.push_back(nb.router);
        self(self, nb.router, bridges_left - 1);
        chain.pop_back();
      }
    }
  };
  descend(descend, from, bridge_budget);
  return found;
}

void search_all(const Topology& t, const IdAssignment& a, const TraceOption& opt,
                std::size_t bridge_budget, std::vector<RouterId>& back,
                std::set<RouterId>& visited, std::size_t remaining,
                std::vector<std::vector<RouterId>>& results) {
  if (remaining == 0) {
    results.push_back(back);
    return;
  }
  const TracemaxId id = opt.ids[remaining - 1];
  for (const auto& chain : backward_steps(t, a, back.back(), id, bridge_budget, visited)) {
    for (RouterId r : chain) {
      back.push_back(r);
      visited.insert(r);
    }
    search_all(t, a, opt, bridge_budget, back, visited, remaining - 1, results);
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
      visited.erase(*it);
      back.pop_back();
    }
  }
}

}  // namespace

std::vector<ReconstructedPath> reconstruct_all(const TraceOption& opt, RouterId receiver,
                                               const Topology& t, const IdAssignment& a,
                                               std::size_t bridge_budget) {
  t.router(receiver);

  std::vector<std::vector<RouterId>> raw;
  std::vector<RouterId> back{receiver};
  std::set<RouterId> visited{receiver};
  search_all(t, a, opt, bridge_budget, back, visited, opt.ids.size(), raw);

  for (auto& routers : raw) std::reverse(routers.begin(), routers.end());
  std::sort(raw.begin(), raw.end());
  raw.erase(std::unique(raw.begin(), raw.end()), raw.end());

  std::vector<ReconstructedPath> out;
  out.reserve(raw.size());
  for (auto& routers : raw) out.push_back(finish(std::move(routers), opt, t, a));
  return out;
}

AttributionReport attribute_sources(const std::vector<Capture>& captures, const Topology& t,
                                    const IdAssignment& a) {
  AttributionReport report;
  for (const Capture& c : captures) {
    try {
      const ReconstructedPath path = reconstruct(c.option, c.receiver, t, a);
      if (path.status == PathStatus::truncated) {
        ++report.truncated;  // first hop unreliable, keep it out of the table
        continue;
      }
      ++report.by_ingress[path.routers.front()];
    } catch (const AmbiguousError&) {
      ++report.ambiguous;
    } catch (const NoMatchError&) {
      ++report.no_match;
    }
  }
  return report;
}

}  // namespace tracemax
