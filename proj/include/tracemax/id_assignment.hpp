#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <vector>

#include "tracemax/topology.hpp"

namespace tracemax {

class AssignmentError : public Error {
  using Error::Error;
};

// Port-to-ID map for a deployment, plus the deployment-wide bit width
// used when packing IDs into the option field.
struct IdAssignment {
  std::map<PortRef, TracemaxId> ids;
  int bit_width = 0;  // 1..8, >= bits needed for the largest id

  std::optional<TracemaxId> id_at(const PortRef& p) const;

  static IdAssignment load(const std::filesystem::path& file);
  void save(const std::filesystem::path& file) const;
  static IdAssignment from_json_text(const std::string& text,
                                     const std::string& origin = "<input>");
  std::string to_json_text() const;

  bool operator==(const IdAssignment&) const = default;
};

// A router that would see the same incoming ID from two or more
// neighbors; reconstruction cannot decide between them.
struct IdConflict {
  RouterId at;
  TracemaxId id;
  std::vector<PortRef> ports;  // far-end ports carrying the duplicate
};

struct ValidationReport {
  std::vector<IdConflict> conflicts;

  bool valid() const { return conflicts.empty(); }
};

// Automatic ID assignment: the seed picks the first node, whose linked
// ports are labeled with their port numbers; every further node picked
// from the frontier (smallest router id first) labels each free linked
// port with the smallest id >= 1 that is unused on the node and absent
// from the far-end node's incoming ids. Deterministic per (t, seed).
// Non-marking routers are left unlabeled. Throws AssignmentError when
// the marking subgraph is disconnected or an id would exceed 255.
IdAssignment assign_ids(const Topology& t, std::uint64_t seed);

// Checks, for every router, that no incoming ID from a marking
// neighbor occurs twice. Throws AssignmentError when a linked port of
// a marking router carries no id.
ValidationReport validate(const Topology& t, const IdAssignment& a);

// Bits needed to represent the largest assigned id.
int min_bit_width(const IdAssignment& a);

struct PathCollision {
  RouterId end;
  std::vector<TracemaxId> id_sequence;
  std::vector<RouterId> path_a;
  std::vector<RouterId> path_b;
};

struct ReconstructibilityCheck {
  std::optional<PathCollision> collision;

  bool ok() const { return !collision.has_value(); }
};

// Exhaustively enumerates every simple path of up to max_len hops that
// begins at a marking-capable router, and checks that the emitted ID
// sequence plus the end router identify the path uniquely. Non-marking
// routers may sit mid-path and emit nothing, so this is the strongest
// check available for bridged configurations.
ReconstructibilityCheck check_reconstructible(const Topology& t, const IdAssignment& a,
                                              std::size_t max_len);

}  // namespace tracemax
