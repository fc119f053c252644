// tracemax command line: id assignment, option encode/decode, routing,
// scenario simulation, capture reconstruction, overhead tables.
//
// Exit codes (stable, scripts may branch on them):
//   0  success
//   1  operational failure (invalid input, validation failure, mismatch)
//   2  usage error
//   3  decode: source route option refused
//   4  decode: malformed option

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "tracemax/id_assignment.hpp"
#include "tracemax/option_codec.hpp"
#include "tracemax/reconstruction.hpp"
#include "tracemax/simulator.hpp"
#include "tracemax/topology.hpp"

namespace {

using nlohmann::json;
using namespace tracemax;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitSourceRoute = 3;
constexpr int kExitMalformed = 4;

struct ProfileFlags {
  CodecProfile profile;

  void attach(CLI::App* cmd) {
    cmd->add_option("--bit-width", profile.bit_width, "ID bit width, 1..8")
        ->check(CLI::Range(1, 8))
        ->capture_default_str();
    cmd->add_option("--option-length", profile.option_length, "Option length in bytes, 3..40")
        ->check(CLI::Range(3, 40))
        ->capture_default_str();
    cmd->add_flag("--with-sender,!--no-sender", profile.include_sender,
                  "Reserve the sender address slot")
        ->capture_default_str();
    cmd->add_flag("--with-receiver,!--no-receiver", profile.include_receiver,
                  "Reserve the receiver address slot")
        ->capture_default_str();
  }
};

std::string read_hex_input(const std::string& hex, const std::string& in_file) {
  if (!hex.empty()) return hex;
  std::ifstream in(in_file, std::ios::binary);
  if (!in) throw Error("cannot open '" + in_file + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + file.string() + "'");
  out << text;
}

json conflicts_json(const ValidationReport& report) {
  json out = json::array();
  for (const IdConflict& c : report.conflicts) {
    json ports = json::array();
    for (const PortRef& p : c.ports) ports.push_back(p.to_string());
    out.push_back({{"router", c.at}, {"incoming_id", c.id}, {"ports", std::move(ports)}});
  }
  return out;
}

void print_conflicts(const ValidationReport& report) {
  for (const IdConflict& c : report.conflicts) {
    std::cout << "conflict: router " << c.at << " receives incoming id " << c.id << " from";
    for (const PortRef& p : c.ports) std::cout << " " << p.to_string();
    std::cout << "\n";
  }
}

int cmd_assign(const std::string& topology_file, std::uint64_t seed, const std::string& out_file,
               bool as_json) {
  const Topology t = Topology::load(topology_file);
  const IdAssignment a = assign_ids(t, seed);
  const ValidationReport report = validate(t, a);
  if (!out_file.empty()) a.save(out_file);
  if (as_json) {
    std::cout << json{{"bit_width", a.bit_width},
                      {"min_bit_width", min_bit_width(a)},
                      {"ports_labeled", a.ids.size()},
                      {"valid", report.valid()},
                      {"conflicts", conflicts_json(report)}}
                     .dump(2)
              << "\n";
  } else {
    std::cout << "labeled " << a.ids.size() << " ports, min bit width " << min_bit_width(a)
              << "\n";
    std::cout << "validation: " << (report.valid() ? "valid" : "INVALID") << "\n";
    print_conflicts(report);
  }
  return report.valid() ? kExitOk : kExitFailure;
}

int cmd_validate(const std::string& topology_file, const std::string& assignment_file,
                 bool as_json) {
  const Topology t = Topology::load(topology_file);
  const IdAssignment a = IdAssignment::load(assignment_file);
  const ValidationReport report = validate(t, a);
  if (as_json) {
    std::cout << json{{"valid", report.valid()},
                      {"bit_width", a.bit_width},
                      {"min_bit_width", min_bit_width(a)},
                      {"conflicts", conflicts_json(report)}}
                     .dump(2)
              << "\n";
  } else {
    std::cout << "bit width " << a.bit_width << " (min " << min_bit_width(a) << ")\n";
    std::cout << "validation: " << (report.valid() ? "valid" : "INVALID") << "\n";
    print_conflicts(report);
  }
  return report.valid() ? kExitOk : kExitFailure;
}

int cmd_encode(const CodecProfile& profile, const std::vector<unsigned>& ids,
               const std::string& sender, const std::string& receiver) {
  TraceOption o;
  o.option_length = profile.option_length;
  o.has_sender = profile.include_sender;
  o.has_receiver = profile.include_receiver;
  if (o.has_sender && !sender.empty()) o.sender = Ipv4Address::parse(sender);
  if (o.has_receiver && !receiver.empty()) o.receiver = Ipv4Address::parse(receiver);
  for (unsigned id : ids) o.ids.push_back(static_cast<TracemaxId>(id));
  std::cout << to_hex(encode(o, profile)) << "\n";
  return kExitOk;
}

int cmd_decode(const CodecProfile& profile, const std::string& hex, const std::string& in_file,
               bool as_json) {
  const std::vector<std::uint8_t> bytes = parse_hex(read_hex_input(hex, in_file));
  const DecodeResult res = decode(bytes, profile);
  if (!res.ok()) {
    std::cerr << "decode failed: " << res.error << "\n";
    return res.status == DecodeStatus::source_route_refused ? kExitSourceRoute : kExitMalformed;
  }
  const TraceOption& o = res.option;
  if (as_json) {
    json j{{"option_type", o.option_type},
           {"option_length", o.option_length},
           {"hop_count", o.hop_count()},
           {"ids", o.ids}};
    if (o.has_sender) j["sender"] = o.sender.to_string();
    if (o.has_receiver) j["receiver"] = o.receiver.to_string();
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "option type 0x56, length " << static_cast<unsigned>(o.option_length)
              << ", hop count " << o.hop_count() << "\n";
    if (o.has_sender) std::cout << "sender   " << o.sender.to_string() << "\n";
    if (o.has_receiver) std::cout << "receiver " << o.receiver.to_string() << "\n";
    std::cout << "ids:";
    for (TracemaxId id : o.ids) std::cout << " " << id;
    std::cout << "\n";
  }
  return kExitOk;
}

int cmd_route(const std::string& topology_file, RouterId src, RouterId dst,
              const std::string& policy, std::uint64_t seed, bool as_json) {
  const Topology t = Topology::load(topology_file);
  const RoutingPolicy rp =
      policy == "ecmp_random" ? RoutingPolicy::ecmp_random : RoutingPolicy::shortest_path;
  const auto path = route(t, src, dst, rp, seed);
  if (as_json) {
    std::cout << json{{"path", path}}.dump() << "\n";
  } else {
    for (std::size_t i = 0; i < path.size(); ++i) std::cout << (i ? " -> " : "") << path[i];
    std::cout << "\n";
  }
  return kExitOk;
}

int cmd_simulate(const std::string& scenario_file, const std::string& out_dir) {
  const Scenario s = Scenario::load(scenario_file);
  const RunResult result = run(s);
  const RunReport& report = result.report;

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    write_text(std::filesystem::path(out_dir) / "transit_log.json",
               transit_log_json(result.records));
    write_text(std::filesystem::path(out_dir) / "report.json",
               run_report_json(report, s.topology));
  }

  std::size_t longest = 0;
  for (const TransitRecord& r : result.records)
    longest = std::max(longest, r.actual_path.size());
  std::cout << "packets " << report.packets << ", delivered " << report.delivered << ", matched "
            << report.matched << ", mismatched " << report.mismatched << ", failed "
            << report.failed << "\n";
  std::cout << "longest path: " << longest << " routers\n";
  std::cout << "attribution by ingress:\n";
  for (const auto& [router, n] : report.attribution.by_ingress)
    std::cout << "  router " << router << " (" << s.topology.router(router).address.to_string()
              << "): " << n << " packet(s)\n";
  if (report.attribution.no_match + report.attribution.ambiguous + report.attribution.truncated >
      0)
    std::cout << "  unattributed: " << report.attribution.no_match << " no-match, "
              << report.attribution.ambiguous << " ambiguous, " << report.attribution.truncated
              << " truncated\n";

  for (const PacketVerdict& v : report.verdicts)
    if (!v.matched) {
      std::cout << "first failure: packet " << v.packet_id << ": " << v.error << "\n";
      return kExitFailure;
    }
  return kExitOk;
}

int cmd_reconstruct(const std::string& topology_file, const std::string& assignment_file,
                    const std::string& hex, const std::string& in_file,
                    std::optional<RouterId> receiver, std::size_t bridge_budget, bool all,
                    bool as_json) {
  const Topology t = Topology::load(topology_file);
  const IdAssignment a = IdAssignment::load(assignment_file);
  const std::vector<std::uint8_t> bytes = parse_hex(read_hex_input(hex, in_file));
  CodecProfile profile;
  profile.bit_width = a.bit_width;
  const DecodeResult decoded = decode(bytes, profile);
  if (!decoded.ok()) {
    std::cerr << "decode failed: " << decoded.error << "\n";
    return decoded.status == DecodeStatus::source_route_refused ? kExitSourceRoute
                                                                : kExitMalformed;
  }

  RouterId at;
  if (receiver) {
    at = *receiver;
  } else if (decoded.option.has_receiver) {
    const auto found = t.router_by_address(decoded.option.receiver);
    if (!found) {
      std::cerr << "receiver slot " << decoded.option.receiver.to_string()
                << " matches no router; pass --receiver\n";
      return kExitFailure;
    }
    at = *found;
  } else {
    std::cerr << "option has no receiver slot; pass --receiver\n";
    return kExitUsage;
  }

  auto path_json = [&](const ReconstructedPath& p) {
    json addrs = json::array();
    for (const auto& addr : p.addresses) addrs.push_back(addr.to_string());
    json j{{"routers", p.routers}, {"addresses", std::move(addrs)}, {"status", to_string(p.status)}};
    if (p.external_sender) j["external_sender"] = p.external_sender->to_string();
    if (p.external_receiver) j["external_receiver"] = p.external_receiver->to_string();
    return j;
  };
  auto print_path = [&](const ReconstructedPath& p) {
    for (std::size_t i = 0; i < p.routers.size(); ++i)
      std::cout << (i ? " -> " : "") << p.routers[i] << " (" << p.addresses[i].to_string() << ")";
    std::cout << "  [" << to_string(p.status) << "]\n";
  };

  if (all) {
    const auto paths = reconstruct_all(decoded.option, at, t, a, bridge_budget);
    if (as_json) {
      json out = json::array();
      for (const auto& p : paths) out.push_back(path_json(p));
      std::cout << json{{"paths", std::move(out)}}.dump(2) << "\n";
    } else {
      std::cout << paths.size() << " consistent path(s)\n";
      for (const auto& p : paths) print_path(p);
    }
    return paths.size() == 1 ? kExitOk : kExitFailure;
  }

  try {
    const ReconstructedPath p = reconstruct(decoded.option, at, t, a);
    if (as_json) std::cout << path_json(p).dump(2) << "\n";
    else print_path(p);
    return kExitOk;
  } catch (const AmbiguousError& e) {
    std::cerr << "ambiguous: " << e.what() << "\n";
    return kExitFailure;
  } catch (const NoMatchError& e) {
    std::cerr << "no match: " << e.what() << "\n";
    return kExitFailure;
  }
}

int cmd_overhead(const CodecProfile& profile, const std::vector<std::uint32_t>& sizes,
                 bool as_json) {
  const auto rows = overhead_report(profile, sizes);
  if (as_json) {
    json out = json::array();
    for (const auto& r : rows)
      out.push_back(
          {{"size", r.packet_size}, {"added_bytes", r.added_bytes}, {"percent", r.percent}});
    std::cout << json{{"rows", std::move(out)}}.dump(2) << "\n";
  } else {
    std::cout << "size\tadded\tpercent\n";
    for (const auto& r : rows)
      std::cout << r.packet_size << "\t" << r.added_bytes << "\t" << r.percent << "%\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Single-packet IP traceback: port id assignment, option marking, reconstruction"};
  app.require_subcommand(1);
  bool as_json = false;
  app.add_flag("--json", as_json, "Machine-readable output");

  std::string topology_file, assignment_file, scenario_file, out_path, hex, in_file;
  std::string sender_ip, receiver_ip, policy = "shortest_path";
  std::uint64_t seed = 0;
  RouterId src = 0, dst = 0;
  std::vector<unsigned> ids;
  std::vector<std::uint32_t> sizes;
  RouterId receiver = 0;
  std::size_t bridge_budget = 1;
  bool all_paths = false;

  auto* assign = app.add_subcommand("assign", "Compute an id assignment for a topology");
  assign->add_option("--topology", topology_file, "Topology file")->required();
  assign->add_option("--seed", seed, "Start-node selection seed")->capture_default_str();
  assign->add_option("--out", out_path, "Assignment output file");

  auto* validate_cmd = app.add_subcommand("validate", "Validate an assignment for a topology");
  validate_cmd->add_option("--topology", topology_file, "Topology file")->required();
  validate_cmd->add_option("--assignment", assignment_file, "Assignment file")->required();

  ProfileFlags encode_profile, decode_profile, overhead_profile;
  auto* encode_cmd = app.add_subcommand("encode", "Encode a trace option to hex");
  encode_profile.attach(encode_cmd);
  encode_cmd->add_option("--ids", ids, "Hop ids, in path order")->delimiter(',');
  encode_cmd->add_option("--sender", sender_ip, "Sender slot value");
  encode_cmd->add_option("--receiver", receiver_ip, "Receiver slot value");

  auto* decode_cmd = app.add_subcommand("decode", "Decode option hex");
  decode_profile.attach(decode_cmd);
  decode_cmd->add_option("--hex", hex, "Option bytes as hex");
  decode_cmd->add_option("--in", in_file, "File with option hex");

  auto* route_cmd = app.add_subcommand("route", "Compute a route between two routers");
  route_cmd->add_option("--topology", topology_file, "Topology file")->required();
  route_cmd->add_option("--src", src, "Source router id")->required();
  route_cmd->add_option("--dst", dst, "Destination router id")->required();
  route_cmd->add_option("--policy", policy, "shortest_path or ecmp_random")
      ->check(CLI::IsMember({"shortest_path", "ecmp_random"}))
      ->capture_default_str();
  route_cmd->add_option("--seed", seed, "ECMP draw seed")->capture_default_str();

  auto* simulate = app.add_subcommand("simulate", "Run a scenario and verify reconstruction");
  simulate->add_option("--scenario", scenario_file, "Scenario file")->required();
  simulate->add_option("--out", out_path, "Directory for transit log and report");

  auto* reconstruct_cmd = app.add_subcommand("reconstruct", "Reconstruct a captured option");
  reconstruct_cmd->add_option("--topology", topology_file, "Topology file")->required();
  reconstruct_cmd->add_option("--assignment", assignment_file, "Assignment file")->required();
  reconstruct_cmd->add_option("--hex", hex, "Option bytes as hex");
  reconstruct_cmd->add_option("--in", in_file, "File with option hex");
  auto* recv_opt = reconstruct_cmd->add_option("--receiver", receiver, "Capture router id");
  reconstruct_cmd->add_flag("--all", all_paths, "Exhaustive search incl. bridged routers");
  reconstruct_cmd->add_option("--bridge-budget", bridge_budget,
                              "Consecutive non-marking routers allowed with --all")
      ->capture_default_str();

  auto* overhead = app.add_subcommand("overhead", "Per-packet-size overhead table");
  overhead_profile.attach(overhead);
  overhead->add_option("--sizes", sizes, "Packet sizes in bytes")->required()->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (assign->parsed()) return cmd_assign(topology_file, seed, out_path, as_json);
    if (validate_cmd->parsed()) return cmd_validate(topology_file, assignment_file, as_json);
    if (encode_cmd->parsed())
      return cmd_encode(encode_profile.profile, ids, sender_ip, receiver_ip);
    if (decode_cmd->parsed()) return cmd_decode(decode_profile.profile, hex, in_file, as_json);
    if (route_cmd->parsed()) return cmd_route(topology_file, src, dst, policy, seed, as_json);
    if (simulate->parsed()) return cmd_simulate(scenario_file, out_path);
    if (reconstruct_cmd->parsed())
      return cmd_reconstruct(topology_file, assignment_file, hex, in_file,
                             recv_opt->count() ? std::optional<RouterId>(receiver) : std::nullopt,
                             bridge_budget, all_paths, as_json);
    if (overhead->parsed()) return cmd_overhead(overhead_profile.profile, sizes, as_json);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
