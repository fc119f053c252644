#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "support/oracles.hpp"
#include "support/random_graphs.hpp"
#include "tracemax/topology.hpp"

using namespace tracemax;
using namespace testsupport;

TEST_CASE("add_router basics") {
  Topology t;
  t.add_router(Router{1, addr_for(1), true, 4});
  CHECK(t.routers().size() == 1);
  CHECK(t.links().empty());
  CHECK(t.router(1).port_count == 4);

  CHECK_THROWS_WITH_AS(t.add_router(Router{1, addr_for(9), true, 2}),
                       doctest::Contains("duplicate router id"), TopologyError);
  CHECK_THROWS_WITH_AS(t.add_router(Router{2, addr_for(1), true, 2}),
                       doctest::Contains("duplicate router address"), TopologyError);
  CHECK_THROWS_AS(t.add_router(Router{3, addr_for(3), true, 0}), TopologyError);
}

TEST_CASE("a 56-router chain builds cleanly") {
  const Topology t = make_chain(56);
  CHECK(t.routers().size() == 56);
  CHECK(t.links().size() == 55);
}

TEST_CASE("add_link") {
  Topology t;
  t.add_router(Router{1, addr_for(1), true, 3});
  t.add_router(Router{2, addr_for(2), true, 3});

  t.add_link(PortRef{1, 1}, PortRef{2, 1});
  auto nbs = t.neighbors(1);
  REQUIRE(nbs.size() == 1);
  CHECK(nbs[0].router == 2);
  CHECK(nbs[0].local == PortRef{1, 1});
  CHECK(nbs[0].remote == PortRef{2, 1});

  CHECK_THROWS_WITH_AS(t.add_link(PortRef{1, 1}, PortRef{2, 2}),
                       doctest::Contains("already occupied"), TopologyError);
  CHECK_THROWS_WITH_AS(t.add_link(PortRef{1, 2}, PortRef{1, 3}), doctest::Contains("self-loop"),
                       TopologyError);
  CHECK_THROWS_AS(t.add_link(PortRef{1, 2}, PortRef{7, 1}), TopologyError);
  CHECK_THROWS_WITH_AS(t.add_link(PortRef{1, 4}, PortRef{2, 2}),
                       doctest::Contains("out of range"), TopologyError);

  // parallel links are a distinct pair of ports
  t.add_link(PortRef{1, 2}, PortRef{2, 2});
  CHECK(t.links().size() == 2);
  CHECK(t.neighbors(1).size() == 2);
}

TEST_CASE("parallel links stay reconstructible when ids are distinct") {
  Topology t;
  t.add_router(Router{1, addr_for(1), true, 2});
  t.add_router(Router{2, addr_for(2), true, 2});
  t.add_link(PortRef{1, 1}, PortRef{2, 1});
  t.add_link(PortRef{1, 2}, PortRef{2, 2});

  IdAssignment a;
  a.ids = {{PortRef{1, 1}, 1}, {PortRef{1, 2}, 2}, {PortRef{2, 1}, 1}, {PortRef{2, 2}, 2}};
  a.bit_width = 2;
  REQUIRE(oracle_valid(t, a));
  CHECK(oracle_unique(oracle_all_paths(t, a, 2)));
}

TEST_CASE("neighbors listing") {
  Topology t;
  t.add_router(Router{5, addr_for(5), true, 2});
  CHECK(t.neighbors(5).empty());
  CHECK_THROWS_AS(t.neighbors(6), TopologyError);

  const Topology chain = make_chain(3);
  auto nbs = chain.neighbors(2);
  REQUIRE(nbs.size() == 2);
  CHECK(nbs[0].router == 1);  // sorted by local port index
  CHECK(nbs[1].router == 3);

  Topology star;
  star.add_router(Router{1, addr_for(1), true, 6});
  for (RouterId leaf = 2; leaf <= 6; ++leaf) {
    star.add_router(Router{leaf, addr_for(leaf), true, 1});
    star.add_link(PortRef{1, static_cast<PortIndex>(leaf - 1)}, PortRef{leaf, 1});
  }
  CHECK(star.neighbors(1).size() == 5);
}

TEST_CASE("neighbors is symmetric on random graphs") {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 20; ++round) {
    const Topology t = random_connected(rng, 2 + rng() % 30, rng() % 20);
    for (const auto& [a, ra] : t.routers()) {
      for (const Neighbor& nb : t.neighbors(a)) {
        bool back = false;
        for (const Neighbor& rev : t.neighbors(nb.router))
          if (rev.router == a && rev.local == nb.remote && rev.remote == nb.local) back = true;
        CHECK(back);
      }
    }
  }
}

TEST_CASE("save and load round trip") {
  Topology t;
  for (RouterId i = 1; i <= 3; ++i) t.add_router(Router{i, addr_for(i), i != 2, 2});
  t.add_link(PortRef{1, 1}, PortRef{2, 1});
  t.add_link(PortRef{2, 2}, PortRef{3, 1});
  t.add_link(PortRef{3, 2}, PortRef{1, 2});

  const Topology back = Topology::from_json_text(t.to_json_text());
  CHECK(back == t);
}

TEST_CASE("load save identity over random graphs") {
  std::mt19937_64 rng(23);
  for (int round = 0; round < 40; ++round) {
    const Topology t = random_connected(rng, 2 + rng() % 63, rng() % 40);
    CHECK(Topology::from_json_text(t.to_json_text()) == t);
  }
}

TEST_CASE("load rejects malformed documents with diagnostics") {
  const char* out_of_range = R"({
    "routers": [{"id": 1, "address": "10.0.0.1", "ports": 2, "marking": true},
                {"id": 2, "address": "10.0.0.2", "ports": 2, "marking": true}],
    "links": [{"a": "1:5", "b": "2:1"}]
  })";
  CHECK_THROWS_WITH_AS(Topology::from_json_text(out_of_range),
                       doctest::Contains("port 1:5 out of range"), TopologyError);

  const char* dup_addr = R"({
    "routers": [{"id": 1, "address": "10.0.0.1", "ports": 2, "marking": true},
                {"id": 2, "address": "10.0.0.1", "ports": 2, "marking": true}],
    "links": []
  })";
  CHECK_THROWS_WITH_AS(Topology::from_json_text(dup_addr),
                       doctest::Contains("duplicate router address"), TopologyError);

  CHECK_THROWS_AS(Topology::from_json_text("{nope"), TopologyError);
  CHECK_THROWS_AS(Topology::from_json_text(R"({"routers": []})"), TopologyError);
}
