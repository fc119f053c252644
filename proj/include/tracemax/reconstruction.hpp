#pragma once

#include <map>
#include <optional>
#include <vector>

#include "tracemax/id_assignment.hpp"
#include "tracemax/option_codec.hpp"
#include "tracemax/topology.hpp"

namespace tracemax {

enum class PathStatus {
  complete,
  partial,    // marks stop before the true origin (staged deployment)
  truncated,  // id field was full; marks near the receiver may be missing
};

const char* to_string(PathStatus s);

struct ReconstructedPath {
  std::vector<RouterId> routers;       // source-first; bridged routers appear explicitly
  std::vector<Ipv4Address> addresses;  // parallel to routers
  PathStatus status = PathStatus::complete;
  std::optional<Ipv4Address> external_sender;
  std::optional<Ipv4Address> external_receiver;

  bool operator==(const ReconstructedPath&) const = default;
};

class ReconstructionError : public Error {
 public:
  ReconstructionError(const std::string& what, RouterId at, TracemaxId id, std::size_t hop_index)
      : Error(what), at(at), id(id), hop_index(hop_index) {}

  RouterId at;            // router where the backward walk stopped
  TracemaxId id;          // id that failed to resolve
  std::size_t hop_index;  // index into the option's id sequence
};

// No neighbor's facing port carries the id: wrong receiver, corrupted
// option, or an out-of-system hop.
class NoMatchError : public ReconstructionError {
  using ReconstructionError::ReconstructionError;
};

// Two or more neighbors face the router with the same id; the
// assignment is invalid at this node.
class AmbiguousError : public ReconstructionError {
 public:
  AmbiguousError(const std::string& what, RouterId at, TracemaxId id, std::size_t hop_index,
                 std::vector<RouterId> candidates)
      : ReconstructionError(what, at, id, hop_index), candidates(std::move(candidates)) {}

  std::vector<RouterId> candidates;
};

// Backward walk from the receiver: each unconsumed id, last first,
// must select exactly one marking neighbor whose facing port carries
// it. Output is a pure function of (option, receiver, topology,
// assignment) and in particular never looks at source addresses.
ReconstructedPath reconstruct(const TraceOption& opt, RouterId receiver, const Topology& t,
                              const IdAssignment& a);

// Exhaustive variant: every simple router path consistent with the id
// sequence, allowing up to bridge_budget consecutive non-marking
// routers between marked hops. Empty result means no match; two or
// more mean the assignment cannot discriminate. Deterministic order.
std::vector<ReconstructedPath> reconstruct_all(const TraceOption& opt, RouterId receiver,
                                               const Topology& t, const IdAssignment& a,
                                               std::size_t bridge_budget = 1);

struct Capture {
  TraceOption option;
  RouterId receiver;
};

// Packets grouped by the first router of their reconstructed path —
// the system ingress — regardless of claimed source addresses.
struct AttributionReport {
  std::map<RouterId, std::size_t> by_ingress;
  std::size_t truncated = 0;
  std::size_t no_match = 0;
  std::size_t ambiguous = 0;
};

AttributionReport attribute_sources(const std::vector<Capture>& captures, const Topology& t,
                                    const IdAssignment& a);

}  // namespace tracemax
