#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "lce/router.hpp"

using namespace lce;

namespace {

std::vector<Router::Vertex> tokens(int n) {
  std::vector<Router::Vertex> out;
  for (int i = 0; i < n; ++i) out.push_back(IdPool::next_token());
  return out;
}

void check_paths(const Router& r, std::mt19937_64& rng, int samples) {
  auto live = r.live_vertices();
  if (live.size() < 2) return;
  for (int i = 0; i < samples; ++i) {
    Router::Vertex u = live[rng() % live.size()];
    Router::Vertex v = live[rng() % live.size()];
    auto p = r.path(u, v);
    REQUIRE(p.front() == u);
    REQUIRE(p.back() == v);
    REQUIRE(Length(p.size()) - 1 <= r.declared_hrt());
    for (std::size_t j = 0; j + 1 < p.size(); ++j) REQUIRE(r.has_edge(p[j], p[j + 1]));
  }
}

void check_routability(const Router& r, std::mt19937_64& rng, int pairs) {
  auto live = r.live_vertices();
  if (live.size() < 2) return;
  // random perfect-matching style unit demand
  std::vector<Router::Vertex> shuffled = live;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  std::vector<std::pair<Router::Vertex, Router::Vertex>> demand;
  for (std::size_t i = 0; i + 1 < shuffled.size() && int(demand.size()) < pairs; i += 2)
    demand.push_back({shuffled[i], shuffled[i + 1]});
  auto routing = r.route_demand(demand);
  REQUIRE(routing.ok);
  REQUIRE(routing.congestion() <= r.declared_grt());
  for (auto& [e, l] : routing.load) REQUIRE(r.has_edge(e.first, e.second));
}

}  // namespace

TEST_CASE("router_init structure") {
  // |V| <= 10b: a single leaf clique of diameter 1
  {
    auto vs = tokens(12);
    Router r = Router::init(vs, 3, 4);
    REQUIRE(r.levels() == 1);
    for (std::size_t i = 0; i < vs.size(); ++i)
      for (std::size_t j = i + 1; j < vs.size(); ++j) REQUIRE(r.has_edge(vs[i], vs[j]));
    auto p = r.path(vs[0], vs[5]);
    REQUIRE(p.size() == 2);
  }
  // two levels: every surviving sibling pair fully matched at init
  {
    auto vs = tokens(40);
    Router r = Router::init(vs, 3, 4);
    REQUIRE(r.levels() == 2);
    for (auto& m : r.sibling_matchings()) {
      REQUIRE(m.m_total == std::min(m.b1, m.b2));
      REQUIRE(m.m_alive == m.m_total);
    }
  }
  // any init: sampled demands route within the declared bound
  {
    std::mt19937_64 rng(7);
    auto vs = tokens(100);
    Router r = Router::init(vs, 3, 4);
    check_paths(r, rng, 50);
    check_routability(r, rng, 25);
  }
}

TEST_CASE("router path on trivial cases") {
  auto vs = tokens(5);
  Router r = Router::init(vs, 3, 4);
  auto p = r.path(vs[2], vs[2]);
  REQUIRE(p.size() == 1);
  REQUIRE_THROWS_AS(r.path(vs[0], 999999999), Error);
}

TEST_CASE("router edge deletion prunes by the group rule") {
  // empty deletion: nothing pruned
  {
    auto vs = tokens(40);
    Router r = Router::init(vs, 3, 10, 2);
    auto pruned = r.delete_edges({});
    REQUIRE(pruned.empty());
  }
  // deleting every edge of one leaf vertex prunes that vertex
  {
    auto vs = tokens(12);
    Router r = Router::init(vs, 3, 10, 2);
    std::vector<Router::Edge> batch;
    for (std::size_t i = 1; i < vs.size(); ++i) batch.push_back({vs[0], vs[i]});
    auto pruned = r.delete_edges(batch);
    bool found = false;
    for (auto v : pruned)
      if (v == vs[0]) found = true;
    REQUIRE(found);
    REQUIRE_FALSE(r.has_vertex(vs[0]));
  }
}

TEST_CASE("router matching insertion grows affiliated trees") {
  auto vs = tokens(20);
  Router r = Router::init(vs, 3, 8, 2);
  // empty matching: unchanged
  r.insert_matching({});
  REQUIRE(r.live_vertices().size() == 20);
  // one new vertex at distance 1 from its mate
  Router::Vertex fresh = IdPool::next_token();
  r.insert_matching({Router::Edge{vs[0], fresh}});
  auto p = r.path(fresh, vs[0]);
  REQUIRE(p.size() == 2);
  // successive matchings: depth grows by at most one per batch
  Router::Vertex cur = fresh;
  for (int i = 0; i < 3; ++i) {
    Router::Vertex next = IdPool::next_token();
    r.insert_matching({Router::Edge{cur, next}});
    auto pp = r.path(next, vs[0]);
    REQUIRE(Length(pp.size()) - 1 <= 2 + i + 1);
    cur = next;
  }
  // rejected: matching an absent vertex
  REQUIRE_THROWS_AS(r.insert_matching({Router::Edge{9999999, IdPool::next_token()}}), Error);
}

TEST_CASE("router budget is enforced") {
  auto vs = tokens(10);
  Router r = Router::init(vs, 3, 2, 2);
  r.insert_matching({});
  r.insert_matching({});
  REQUIRE_THROWS_AS(r.insert_matching({}), Error);
}

TEST_CASE("router survives a mixed schedule with quality checks") {
  // Regime with graceful pruning: leaf groups above the prune threshold, so
  // single affected vertices are pruned without killing their group.
  std::mt19937_64 rng(11);
  auto vs = tokens(500);
  Router r = Router::init(vs, 21, 10, 2);
  REQUIRE(r.levels() == 2);
  std::size_t leaf = 500 / 21;  // ~24 per leaf, threshold 24/20 > 1
  int rotor = 0;
  for (int batch = 0; batch < 10; ++batch) {
    if (batch % 3 == 2) {
      // delete edges at vertices spread across distinct leaf groups
      std::vector<Router::Edge> dels;
      std::set<Router::Vertex> chosen;
      for (int i = 0; i < 2; ++i) {
        std::size_t block = std::size_t(rotor++ % 21);
        Router::Vertex a = vs[block * leaf + std::size_t(batch % 5)];
        if (!r.has_vertex(a) || !chosen.insert(a).second) continue;
        for (auto& e : r.edges())
          if (e.first == a || e.second == a) {
            dels.push_back({e.first, e.second});
            break;
          }
      }
      auto pruned = r.delete_edges(dels);
      for (auto v : pruned) REQUIRE_FALSE(r.has_vertex(v));
    } else {
      std::vector<Router::Edge> m;
      auto live = r.live_vertices();
      REQUIRE_FALSE(live.empty());
      std::set<Router::Vertex> used;
      for (int i = 0; i < 12; ++i) {
        Router::Vertex a = live[rng() % live.size()];
        if (!used.insert(a).second) continue;
        m.push_back({a, IdPool::next_token()});
      }
      r.insert_matching(m);
    }
    // surviving sibling matchings stay mostly intact
    for (auto& m : r.sibling_matchings())
      REQUIRE(double(m.m_alive) >= 0.8 * double(std::max(m.b1, m.b2)) - 1.0);
    check_paths(r, rng, 20);
    check_routability(r, rng, 20);
  }
  REQUIRE(r.batches() == 10);
}
