#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <string>

#include "support/proc.hpp"

using testsupport::run_cmd;

namespace {

const std::string cli = TRACEMAX_CLI;
const std::string data = TRACEMAX_DATA_DIR;

std::filesystem::path tmp_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "tracemax_cli_test";
  std::filesystem::create_directories(dir);
  return dir;
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return s;
}

}  // namespace

TEST_CASE("assign validates and writes the assignment") {
  const auto out = tmp_dir() / "mesh.assign.json";
  const auto res = run_cmd(cli + " assign --topology " + data + "/mesh.topo.json --seed 1 --out " +
                           out.string());
  CHECK(res.exit_code == 0);
  CHECK(contains(res.output, "validation: valid"));
  CHECK(contains(res.output, "min bit width"));
  CHECK(std::filesystem::exists(out));

  const auto validate = run_cmd(cli + " validate --topology " + data +
                                "/mesh.topo.json --assignment " + out.string());
  CHECK(validate.exit_code == 0);
  CHECK(contains(validate.output, "validation: valid"));
}

TEST_CASE("assign reruns are byte identical") {
  const auto out1 = tmp_dir() / "mesh1.assign.json";
  const auto out2 = tmp_dir() / "mesh2.assign.json";
  const std::string base = cli + " assign --topology " + data + "/mesh.topo.json --seed 4 --out ";
  CHECK(run_cmd(base + out1.string()).exit_code == 0);
  CHECK(run_cmd(base + out2.string()).exit_code == 0);
  CHECK(slurp(out1) == slurp(out2));
}

TEST_CASE("assign rejects a disconnected topology") {
  const auto topo = tmp_dir() / "disconnected.topo.json";
  std::ofstream(topo) << R"({
    "routers": [{"id": 1, "address": "10.0.0.1", "ports": 1, "marking": true},
                {"id": 2, "address": "10.0.0.2", "ports": 1, "marking": true}],
    "links": []
  })";
  const auto res = run_cmd(cli + " assign --topology " + topo.string());
  CHECK(res.exit_code == 1);
  CHECK(contains(res.output, "disconnected"));
}

TEST_CASE("a 32-port device fits in five or six bits") {
  const auto topo = tmp_dir() / "dense.topo.json";
  std::ofstream out(topo);
  out << R"({"routers": [{"id": 1, "address": "10.1.0.1", "ports": 32, "marking": true})";
  for (int leaf = 2; leaf <= 32; ++leaf)
    out << ",\n{\"id\": " << leaf << ", \"address\": \"10.1.0." << leaf
        << "\", \"ports\": 1, \"marking\": true}";
  out << "],\n\"links\": [";
  for (int leaf = 2; leaf <= 32; ++leaf)
    out << (leaf > 2 ? "," : "") << "{\"a\": \"1:" << leaf - 1 << "\", \"b\": \"" << leaf
        << ":1\"}";
  out << "]}";
  out.close();

  const auto res = run_cmd(cli + " assign --topology " + topo.string());
  CHECK(res.exit_code == 0);
  CHECK((contains(res.output, "min bit width 5") || contains(res.output, "min bit width 6")));
}

TEST_CASE("decode prints the zero option") {
  const auto res = run_cmd(cli + " decode --hex '56 28 00 00 00 00 00 00 00 00 00 00 00 00 00 00"
                                 " 00 00 00 00 00 00 00 00 00 00 00 00 00 00 00 00 00 00 00 00"
                                 " 00 00 00 00'");
  CHECK(res.exit_code == 0);
  CHECK(contains(res.output, "hop count 0"));
}

TEST_CASE("decode exit codes distinguish refusal from malformation") {
  CHECK(run_cmd(cli + " decode --hex '83 07 04 00 00 00 00'").exit_code == 3);
  CHECK(run_cmd(cli + " decode --hex '89 07 04 00 00 00 00'").exit_code == 3);
  CHECK(run_cmd(cli + " decode --hex '56 28'").exit_code == 4);
  CHECK(run_cmd(cli + " decode --hex 'zz'").exit_code == 1);  // not even hex
}

TEST_CASE("encode emits the pinned prototype bytes") {
  const auto res =
      run_cmd(cli + " encode --bit-width 8 --no-sender --no-receiver --ids 18");
  CHECK(res.exit_code == 0);
  CHECK(contains(res.output, "56 28 01 12 00"));
}

TEST_CASE("encode and decode round trip through the shell") {
  const auto enc = run_cmd(cli + " encode --bit-width 4 --no-sender --no-receiver --ids 1,2,3");
  REQUIRE(enc.exit_code == 0);
  const std::string hex = enc.output.substr(0, enc.output.find('\n'));
  CHECK(contains(hex, "56 28 03 12 30"));
  const auto dec = run_cmd(cli + " decode --bit-width 4 --hex '" + hex + "'");
  CHECK(dec.exit_code == 0);
  CHECK(contains(dec.output, "ids: 1 2 3"));
}

TEST_CASE("route prints the chain") {
  const auto res =
      run_cmd(cli + " route --topology " + data + "/mesh.topo.json --src 1 --dst 6");
  CHECK(res.exit_code == 0);
  CHECK(contains(res.output, "1 -> 2 -> 4 -> 6"));
}

TEST_CASE("simulate the long chain end to end") {
  const auto out = tmp_dir() / "chain55";
  const auto res = run_cmd(cli + " simulate --scenario " + data +
                           "/chain55.scenario.json --out " + out.string());
  CHECK(res.exit_code == 0);
  CHECK(contains(res.output, "longest path: 55 routers"));
  CHECK(contains(res.output, "matched 5"));
  CHECK(std::filesystem::exists(out / "transit_log.json"));
  CHECK(std::filesystem::exists(out / "report.json"));

  // reruns are byte identical
  const auto out2 = tmp_dir() / "chain55_again";
  run_cmd(cli + " simulate --scenario " + data + "/chain55.scenario.json --out " + out2.string());
  CHECK(slurp(out / "report.json") == slurp(out2 / "report.json"));
}

TEST_CASE("simulate surfaces the ambiguity of a broken assignment") {
  const auto res = run_cmd(cli + " simulate --scenario " + data + "/conflicting_ids.scenario.json");
  CHECK(res.exit_code == 1);
  CHECK(contains(res.output, "first failure"));
  CHECK(contains(res.output, "face router 3 with id 3"));
}

TEST_CASE("simulate attributes spoofed sources to their edges") {
  const auto res = run_cmd(cli + " simulate --scenario " + data + "/spoofed_sources.scenario.json");
  CHECK(res.exit_code == 0);
  CHECK(contains(res.output, "router 1 (10.0.4.1): 17 packet(s)"));
  CHECK(contains(res.output, "router 2 (10.0.4.2): 29 packet(s)"));
  CHECK(contains(res.output, "router 3 (10.0.4.3): 11 packet(s)"));
}

TEST_CASE("reconstruct bridges a silent router with --all") {
  const std::string topo = data + "/bridged.topo.json";
  const std::string assign = data + "/bridged.assign.json";
  const auto enc = run_cmd(cli + " encode --bit-width 2 --no-sender --no-receiver --ids 1,1");
  REQUIRE(enc.exit_code == 0);
  const std::string hex = enc.output.substr(0, enc.output.find('\n'));

  const auto all = run_cmd(cli + " reconstruct --topology " + topo + " --assignment " + assign +
                           " --receiver 4 --all --bridge-budget 1 --hex '" + hex + "'");
  CHECK(all.exit_code == 0);
  CHECK(contains(all.output, "1 consistent path(s)"));
  CHECK(contains(all.output, "1 (10.0.2.1) -> 2 (10.0.2.2) -> 3 (10.0.2.3) -> 4 (10.0.2.4)"));

  const auto plain = run_cmd(cli + " reconstruct --topology " + topo + " --assignment " + assign +
                             " --receiver 4 --hex '" + hex + "'");
  CHECK(plain.exit_code == 1);
  CHECK(contains(plain.output, "no match"));
}

TEST_CASE("overhead prints the flagship figure") {
  const auto res = run_cmd(cli + " overhead --sizes 1500,60");
  CHECK(res.exit_code == 0);
  CHECK(contains(res.output, "2.6667%"));
  CHECK(contains(res.output, "66.6667%"));
}

TEST_CASE("usage errors exit with code 2") {
  CHECK(run_cmd(cli + " simulate").exit_code == 2);
  CHECK(run_cmd(cli + " nonsense").exit_code == 2);
  CHECK(run_cmd(cli + " --help").exit_code == 0);
}

TEST_CASE("json output mode is machine readable") {
  const auto res = run_cmd(cli + " --json overhead --sizes 1500");
  CHECK(res.exit_code == 0);
  CHECK(contains(res.output, "\"percent\": \"2.6667\""));
}
