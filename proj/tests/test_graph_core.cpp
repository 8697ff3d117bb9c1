#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "lce/brute.hpp"
#include "lce/graph.hpp"
#include "lce/shortest_paths.hpp"

using namespace lce;

namespace {

Graph line_graph(std::vector<VertexId>& vs, const std::vector<Length>& lens) {
  Graph g;
  vs.clear();
  for (std::size_t i = 0; i + 1 <= lens.size(); ++i) vs.push_back(g.add_vertex());
  vs.push_back(g.add_vertex());
  for (std::size_t i = 0; i < lens.size(); ++i) g.add_edge(vs[i], vs[i + 1], lens[i]);
  return g;
}

Graph random_graph(std::mt19937_64& rng, int n, int m, Length maxlen,
                   std::vector<VertexId>* out_vs = nullptr) {
  Graph g;
  std::vector<VertexId> vs;
  for (int i = 0; i < n; ++i) vs.push_back(g.add_vertex());
  std::uniform_int_distribution<int> pick(0, n - 1);
  std::uniform_int_distribution<Length> len(1, maxlen);
  for (int i = 0; i < m; ++i) {
    int a = pick(rng), b = pick(rng);
    if (a == b) continue;
    g.add_edge(vs[a], vs[b], len(rng));
  }
  if (out_vs) *out_vs = vs;
  return g;
}

}  // namespace

TEST_CASE("apply_batch: empty batch is identity with epoch bump") {
  Graph g;
  VertexId a = g.add_vertex(), b = g.add_vertex();
  g.add_edge(a, b, 3);
  BatchedUpdate empty{UpdateKind::EdgeIns, {}};
  auto [g2, realized] = apply_batch(g, empty);
  REQUIRE(realized.empty());
  REQUIRE(g2.same_graph(g));
  REQUIRE(g2.epoch() == g.epoch() + 1);
}

TEST_CASE("apply_batch: edge insertion and deletion round trip") {
  Graph g;
  VertexId a = g.add_vertex(), b = g.add_vertex();
  BatchedUpdate ins{UpdateKind::EdgeIns, {UnitUpdate{UpdateKind::EdgeIns, a, b, 3, 0, 0}}};
  auto [g2, r1] = apply_batch(g, ins);
  REQUIRE(dist_exact(g2, a, b) == 3);

  // delete the only a-b edge: distance becomes infinite per the Dijkstra oracle
  BatchedUpdate del{UpdateKind::EdgeDel, {UnitUpdate{UpdateKind::EdgeDel, a, b, 0, 0, 0}}};
  auto [g3, r2] = apply_batch(g2, del);
  REQUIRE(r2[0].edge == r1[0].edge);
  REQUIRE(dist_exact(g3, a, b) == kInfLength);
}

TEST_CASE("apply_batch errors") {
  Graph g;
  VertexId a = g.add_vertex(), b = g.add_vertex();
  g.add_edge(a, b, 1);
  BatchedUpdate bad{UpdateKind::EdgeDel, {UnitUpdate{UpdateKind::EdgeDel, a, a + 12345, 0, 0, 0}}};
  REQUIRE_THROWS_AS(apply_batch(g, bad).first, Error);
  BatchedUpdate bad2{UpdateKind::IsoVertexDel, {UnitUpdate{UpdateKind::IsoVertexDel, a, 0, 0, 0, 0}}};
  REQUIRE_THROWS_AS(apply_batch(g, bad2).first, Error);  // non-isolated deletion
}

TEST_CASE("dist_exact basics") {
  std::vector<VertexId> vs;
  Graph g = line_graph(vs, {1, 2});
  REQUIRE(dist_exact(g, vs[0], vs[0]) == 0);
  REQUIRE(dist_exact(g, vs[0], vs[2]) == 3);
  MovingCut c;
  for (auto& [e, rec] : g.edges())
    if (rec.length == 1) c.add(e, 5);
  REQUIRE(dist_exact(g, vs[0], vs[2], &c) == 8);
  REQUIRE_THROWS_AS(dist_exact(g, vs[0], vs[0] + 99999), Error);
}

TEST_CASE("dist_exact agrees with exhaustive path enumeration on small graphs") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<VertexId> vs;
    Graph g = random_graph(rng, 5, 9, 4, &vs);
    if (g.num_edges() > kEnumEdgeCap) continue;
    for (VertexId u : vs)
      for (VertexId v : vs) REQUIRE(dist_exact(g, u, v) == dist_by_enumeration(g, u, v));
  }
}

TEST_CASE("verify_landmarks on the definition's three cases") {
  Graph g;
  VertexId u = g.add_vertex(), v = g.add_vertex(), w = g.add_vertex();
  EdgeId e = g.add_edge(u, v, 2);
  g.add_edge(v, w, 4);

  MovingCut empty_cut;
  LandmarkSet empty_l;
  empty_l.distortion = 3;
  REQUIRE(verify_landmarks(g, empty_cut, empty_l));

  // single cut edge with l_{G-C} > sigma and both endpoints in L
  MovingCut c;
  c.add(e, 10);
  LandmarkSet l;
  l.distortion = 3;
  l.landmarks = {u, v};
  REQUIRE(verify_landmarks(g, c, l));

  // light cut edge, landmark too far: distance check fails
  MovingCut c2;
  c2.add(e, 1);  // l_{G-C} = 3 <= sigma
  LandmarkSet l2;
  l2.distortion = 3;
  l2.landmarks = {w};  // dist_{G-C}(u, w) = 3 + 4 = 7 > 3
  REQUIRE_FALSE(verify_landmarks(g, c2, l2));
  LandmarkSet l3;
  l3.distortion = 3;
  l3.landmarks = {v};  // covers both endpoints within 3
  REQUIRE(verify_landmarks(g, c2, l3));
}

TEST_CASE("union_landmarks validates on randomized instances") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<VertexId> vs;
    Graph g = random_graph(rng, 8, 14, 3, &vs);
    if (g.num_edges() == 0) continue;
    // C1: random cut on G with endpoint landmarks (distortion 0)
    MovingCut c1;
    LandmarkSet l1;
    l1.distortion = 0;
    int k = 0;
    for (auto& [e, rec] : g.edges()) {
      if (++k % 3 == 0) {
        c1.add(e, 2);
        l1.landmarks.insert(rec.u);
        l1.landmarks.insert(rec.v);
      }
    }
    REQUIRE(verify_landmarks(g, c1, l1));
    // C2 on G - C1, same construction
    MovingCut c2;
    LandmarkSet l2;
    l2.distortion = 0;
    k = 0;
    for (auto& [e, rec] : g.edges()) {
      if (++k % 4 == 0) {
        c2.add(e, 3);
        l2.landmarks.insert(rec.u);
        l2.landmarks.insert(rec.v);
      }
    }
    LandmarkSet lu = union_landmarks(l1, l2);
    MovingCut cu = c1.plus(c2);
    REQUIRE(lu.distortion == l1.distortion + l2.distortion);
    REQUIRE(verify_landmarks(g, cu, lu));
  }
}

TEST_CASE("union_landmarks with identical cuts doubles the cut") {
  Graph g;
  VertexId a = g.add_vertex(), b = g.add_vertex();
  EdgeId e = g.add_edge(a, b, 1);
  MovingCut c;
  c.add(e, 4);
  LandmarkSet l;
  l.distortion = 2;
  l.landmarks = {a, b};
  LandmarkSet lu = union_landmarks(l, l);
  REQUIRE(verify_landmarks(g, c.plus(c), lu));
}

TEST_CASE("landmarks_after_deletion keeps validity") {
  // path u - v - w - x; cut on (w,x); landmark u reaches w through (u,v),(v,w)
  Graph g;
  VertexId u = g.add_vertex(), v = g.add_vertex(), w = g.add_vertex(), x = g.add_vertex();
  EdgeId e1 = g.add_edge(u, v, 1);
  g.add_edge(v, w, 1);
  EdgeId e3 = g.add_edge(w, x, 1);
  MovingCut c;
  c.add(e3, 1);
  LandmarkSet l;
  l.distortion = 2;
  l.landmarks = {u, x};
  REQUIRE(verify_landmarks(g, c, l));

  // deleting (u,v) breaks the u-to-w path; the lemma adds V(F)
  LandmarkSet l2 = landmarks_after_deletion(g, l, {e1});
  Graph g2 = g;
  g2.remove_edge(e1);
  MovingCut c2 = c;
  c2.restrict_to(g2);
  REQUIRE(verify_landmarks(g2, c2, l2));
  REQUIRE(l2.distortion == l.distortion);

  // deleting a cut edge itself: endpoints enter L, cut loses the entry
  LandmarkSet l3 = landmarks_after_deletion(g, l, {e3});
  Graph g3 = g;
  g3.remove_edge(e3);
  MovingCut c3 = c;
  c3.restrict_to(g3);
  REQUIRE(c3.cut.empty());
  REQUIRE(l3.landmarks.count(w) == 1);
  REQUIRE(verify_landmarks(g3, c3, l3));
}

TEST_CASE("apply_batch replay is deterministic") {
  std::mt19937_64 rng(3);
  std::vector<VertexId> vs;
  Graph g0 = random_graph(rng, 6, 8, 4, &vs);
  BatchedUpdate b1{UpdateKind::EdgeIns,
                   {UnitUpdate{UpdateKind::EdgeIns, vs[0], vs[3], 2, 0, 0},
                    UnitUpdate{UpdateKind::EdgeIns, vs[1], vs[4], 5, 0, 0}}};
  auto [ga, ra] = apply_batch(g0, b1);
  BatchedUpdate b2{UpdateKind::EdgeDel,
                   {UnitUpdate{UpdateKind::EdgeDel, 0, 0, 0, ra[0].edge, 0}}};
  auto [gb, rb] = apply_batch(ga, b2);
  auto [gb2, rb2] = apply_batch(ga, b2);
  REQUIRE(gb.same_graph(gb2));
}

TEST_CASE("split_pure separates mixed streams in order") {
  std::vector<UnitUpdate> units;
  units.push_back({UpdateKind::EdgeIns, 1, 2, 1, 0, 0});
  units.push_back({UpdateKind::EdgeIns, 2, 3, 1, 0, 0});
  units.push_back({UpdateKind::EdgeDel, 1, 2, 0, 0, 0});
  units.push_back({UpdateKind::EdgeIns, 3, 4, 1, 0, 0});
  auto batches = split_pure(units);
  REQUIRE(batches.size() == 3);
  REQUIRE(batches[0].units.size() == 2);
  REQUIRE(batches[1].kind == UpdateKind::EdgeDel);
}
