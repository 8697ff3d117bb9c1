#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <random>

#include "lce/brute.hpp"
#include "lce/cutmatch.hpp"
#include "lce/local_flow.hpp"

using namespace lce;

namespace {

Params desk_params() {
  Params p;
  p.delta_flow = 0.5;
  return p;
}

// the exhaustive sweep family: all digraphs over {s,a,b,t} on six candidate
// arcs, plus deterministic variants with longer lengths
std::vector<FlowNet> sweep_nets() {
  std::vector<FlowNet> nets;
  for (int mask = 1; mask < 64; ++mask) {
    for (int variant = 0; variant < 2; ++variant) {
      FlowNet net;
      std::uint32_t s = net.add_vertex(), t = net.add_vertex();
      std::uint32_t a = net.add_vertex(), b = net.add_vertex();
      net.s = s;
      net.t = t;
      Length l = variant == 0 ? 1 : 2;
      if (mask & 1) net.add_arc(s, a, 1, 1 + variant);
      if (mask & 2) net.add_arc(s, b, 1, 1);
      if (mask & 4) net.add_arc(a, b, l, 1);
      if (mask & 8) net.add_arc(b, a, l, 2);
      if (mask & 16) net.add_arc(a, t, 1, 1);
      if (mask & 32) net.add_arc(b, t, 1, 1 + variant);
      nets.push_back(std::move(net));
    }
  }
  return nets;
}

FlowNet random_net(std::mt19937_64& rng, int extra_mid) {
  FlowNet net;
  std::uint32_t s = net.add_vertex(), t = net.add_vertex();
  net.s = s;
  net.t = t;
  int mids = 3 + int(rng() % 3);
  std::vector<std::uint32_t> mid;
  for (int i = 0; i < mids; ++i) mid.push_back(net.add_vertex());
  std::uniform_int_distribution<int> pick(0, mids - 1);
  std::uniform_int_distribution<Length> len(1, 3);
  std::uniform_int_distribution<std::int64_t> cap(1, 3);
  for (std::uint32_t v : mid) {
    if (rng() % 2) net.add_arc(s, v, 1, cap(rng));
    if (rng() % 2) net.add_arc(v, t, 1, cap(rng));
  }
  for (int i = 0; i < extra_mid; ++i) {
    int a = pick(rng), b = pick(rng);
    if (a == b) continue;
    if (net.arcs.size() >= 12) break;
    net.add_arc(mid[std::size_t(a)], mid[std::size_t(b)], len(rng), cap(rng));
  }
  return net;
}

}  // namespace

TEST_CASE("base_blocker on trivial nets") {
  // no h-length s-t path: zero flow
  {
    FlowNet net;
    net.s = net.add_vertex();
    net.t = net.add_vertex();
    std::uint32_t v = net.add_vertex();
    net.add_arc(net.s, v, 3, 1);
    net.add_arc(v, net.t, 3, 1);
    auto f = base_blocker(net, 4, 0.1, 0.0);
    REQUIRE(f.empty());
  }
  // unique path s->v->t, zero weights, lambda 0: flow 1 and the path blocked
  {
    FlowNet net;
    net.s = net.add_vertex();
    net.t = net.add_vertex();
    std::uint32_t v = net.add_vertex();
    net.add_arc(net.s, v, 1, 1);
    net.add_arc(v, net.t, 1, 1);
    auto f = base_blocker(net, 3, 0.1, 0.0);
    REQUIRE(f.value() == 1);
    for (auto& p : enumerate_net_paths(net, 3)) {
      bool blocked = false;
      for (auto a : p)
        if (f.arc_flow[a] >= net.arcs[a].cap) blocked = true;
      REQUIRE(blocked);
    }
  }
}

TEST_CASE("base_blocker precondition violation is detected") {
  FlowNet net;
  net.s = net.add_vertex();
  net.t = net.add_vertex();
  std::uint32_t v = net.add_vertex();
  net.add_arc(net.s, v, 1, 1, 0.25);
  net.add_arc(v, net.t, 1, 1, 0.25);
  REQUIRE_THROWS_AS(base_blocker(net, 3, 0.1, 0.9), Error);  // a path of weight 0.5 < 0.9
  REQUIRE_NOTHROW(base_blocker(net, 3, 0.1, 0.4));
}

TEST_CASE("base_blocker contract on a weighted grid") {
  FlowNet net;
  std::vector<std::uint32_t> v;
  for (int i = 0; i < 9; ++i) v.push_back(net.add_vertex());
  net.s = net.add_vertex();
  net.t = net.add_vertex();
  auto idx = [&](int r, int c) { return v[std::size_t(3 * r + c)]; };
  std::mt19937_64 rng(5);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      if (c + 1 < 3) net.add_arc(idx(r, c), idx(r, c + 1), 1, 1, double(rng() % 4) / 4.0);
      if (r + 1 < 3) net.add_arc(idx(r, c), idx(r + 1, c), 1, 1, double(rng() % 4) / 4.0);
    }
  net.add_arc(net.s, idx(0, 0), 1, 2, 0.0);
  net.add_arc(idx(2, 2), net.t, 1, 2, 0.0);

  Length h = 7;
  double lambda = 0.25, delta = 0.2;
  auto f = base_blocker(net, h, delta, lambda, false);
  for (auto& p : f.paths) {
    double w = 0;
    Length len = 0;
    for (auto a : p.arcs) {
      w += net.arcs[a].weight;
      len += net.arcs[a].length;
    }
    REQUIRE(w <= (1 + 2 * delta) * lambda + 1e-9);
    REQUIRE(len <= h);
  }
  for (std::size_t a = 0; a < net.arcs.size(); ++a)
    REQUIRE(f.arc_flow[a] <= net.arcs[a].cap);
  for (auto& p : enumerate_net_paths(net, h)) {
    double w = 0;
    for (auto a : p) w += net.arcs[a].weight;
    if (w > (1 + delta) * lambda + 1e-9) continue;
    bool blocked = false;
    for (auto a : p)
      if (f.arc_flow[a] >= net.arcs[a].cap) blocked = true;
    REQUIRE(blocked);
  }
}

TEST_CASE("local_blocker matches base_blocker value on a star and stays local") {
  FlowNet net;
  net.s = net.add_vertex();
  net.t = net.add_vertex();
  for (int i = 0; i < 4; ++i) {
    std::uint32_t v = net.add_vertex();
    net.add_arc(net.s, v, 1, 1, 0.0);
    net.add_arc(v, net.t, 1, 1, 0.0);
  }
  auto fl = local_blocker(net, 3, 0.1, 0.0);
  auto fb = base_blocker(net, 3, 0.1, 0.0);
  REQUIRE(fl.value() == fb.value());

  FlowNet net2;
  net2.s = net2.add_vertex();
  net2.t = net2.add_vertex();
  std::uint32_t a = net2.add_vertex();
  net2.add_arc(net2.s, a, 1, 1, 0.0);
  net2.add_arc(a, net2.t, 1, 1, 0.0);
  std::uint32_t far1 = net2.add_vertex(), far2 = net2.add_vertex();
  net2.add_arc(far1, far2, 1, 1, 0.0);
  net2.add_arc(far2, net2.t, 1, 1, 0.0);
  BlockerTrace trace;
  local_blocker(net2, 3, 0.1, 0.0, true, nullptr, nullptr, &trace);
  for (auto& vset : trace.visited) REQUIRE_FALSE(vset.count(far1));
}

TEST_CASE("cor44 wrapper excludes heavy sinks from blocking obligations") {
  FlowNet net;
  net.s = net.add_vertex();
  net.t = net.add_vertex();
  std::uint32_t a = net.add_vertex(), b = net.add_vertex();
  double lambda = 0.5, delta = 0.2;
  net.add_arc(net.s, a, 1, 1, 0.0);
  net.add_arc(a, net.t, 1, 1, 2.0 * (1 + delta) * lambda);  // heavy sink: excluded
  net.add_arc(net.s, b, 1, 1, 0.0);
  net.add_arc(b, net.t, 1, 1, 0.1);
  auto f = cor44_blocker(net, 4, delta, lambda);
  for (auto& p : enumerate_net_paths(net, 4)) {
    double w = 0;
    bool uses_heavy = false;
    for (auto arc : p) {
      w += net.arcs[arc].weight;
      if (net.arcs[arc].to == net.t && net.arcs[arc].weight > (1 + delta) * lambda + 1e-9)
        uses_heavy = true;
    }
    if (uses_heavy || w > (1 + delta) * lambda + 1e-9) continue;
    bool blocked = false;
    for (auto arc : p)
      if (f.arc_flow[arc] >= net.arcs[arc].cap) blocked = true;
    REQUIRE(blocked);
  }
  for (auto& p : f.paths) {
    double w = 0;
    for (auto arc : p.arcs) w += net.arcs[arc].weight;
    REQUIRE(w <= (2 + 3 * delta) * lambda + 1e-9);
  }
}

namespace {

void check_local_flow_contracts(const FlowNet& net, Length h, double delta,
                                const Params& par) {
  auto res = local_flow(net, h, delta, par, [&](const LocalFlowCheckpoint& cp) {
    double d = min_weight_h_path(net, h, cp.w->w);
    REQUIRE(cp.lambda <= d * (1 + 1e-7) + 1e-12);
    double m = double(std::max<std::size_t>(net.arcs.size(), 2));
    double d0 = delta / 6.0;
    double zeta = (1.0 + 2.0 * d0) / d0 + 1.0;
    for (std::size_t a = 0; a < net.arcs.size(); ++a) {
      double expect = std::exp(std::log(1 + d0) * double(cp.hat->arc_flow[a]) /
                                   double(net.arcs[a].cap) -
                               zeta * std::log(m));
      REQUIRE(cp.w->w[a] == Catch::Approx(expect).epsilon(1e-7));
    }
  });
  REQUIRE(res.lambda >= 1.0);
  for (std::size_t a = 0; a < net.arcs.size(); ++a)
    REQUIRE(res.eta * double(res.hat.arc_flow[a]) <= double(net.arcs[a].cap) + 1e-9);
  for (auto& p : res.hat.paths) {
    Length len = 0;
    for (auto a : p.arcs) len += net.arcs[a].length;
    REQUIRE(len <= h);
  }
  for (auto& p : enumerate_net_paths(net, h)) {
    double w = 0;
    for (auto a : p) w += res.w.w[a];
    REQUIRE(w >= 1.0 - 1e-9);
  }
  double n = double(std::max<std::uint32_t>(net.n, 2));
  double init_size = 0;
  for (auto& a : net.arcs) init_size += double(a.cap) / res.m_pow_zeta;
  double bound = par.k_mwu * (std::log(n) / delta) * res.value() + init_size + 1e-12;
  REQUIRE(res.w.size(net) <= bound);
}

}  // namespace

TEST_CASE("local_flow on a single path matches the exact maxflow") {
  Params par = desk_params();
  FlowNet net;
  net.s = net.add_vertex();
  net.t = net.add_vertex();
  std::uint32_t v = net.add_vertex();
  net.add_arc(net.s, v, 1, 1);
  net.add_arc(v, net.t, 1, 1);
  auto res = local_flow(net, 3, 0.5, par);
  double opt = exact_hflow(net, 3);
  REQUIRE(opt == Catch::Approx(1.0));
  REQUIRE(res.value() <= opt + 1e-9);
  REQUIRE(res.value() > 0.0);
  check_local_flow_contracts(net, 3, 0.5, par);
}

TEST_CASE("local_flow on disconnected s,t") {
  Params par = desk_params();
  FlowNet net;
  net.s = net.add_vertex();
  net.t = net.add_vertex();
  std::uint32_t v = net.add_vertex();
  net.add_arc(net.s, v, 1, 1);
  auto res = local_flow(net, 4, 0.5, par);
  REQUIRE(res.value() == 0.0);
  REQUIRE(enumerate_net_paths(net, 4).empty());
}

TEST_CASE("local_flow on parallel routes reaches a constant fraction of OPT") {
  Params par = desk_params();
  FlowNet net;
  net.s = net.add_vertex();
  net.t = net.add_vertex();
  std::uint32_t u = net.add_vertex(), v = net.add_vertex();
  net.add_arc(net.s, u, 1, 1);
  net.add_arc(u, net.t, 1, 1);
  net.add_arc(net.s, v, 1, 1);
  net.add_arc(v, net.t, 1, 1);
  double opt = exact_hflow(net, 2);
  REQUIRE(opt == Catch::Approx(2.0));
  auto res = local_flow(net, 2, 0.5, par);
  REQUIRE(res.value() > 0.05 * opt);
  REQUIRE(res.value() <= opt + 1e-9);
  check_local_flow_contracts(net, 2, 0.5, par);
}

TEST_CASE("local_flow sweep: sampled exhaustive nets plus random nets") {
  Params par = desk_params();
  int run = 0;
  for (auto& net : sweep_nets()) {
    if (enumerate_net_paths(net, 6).empty()) continue;
    if (++run % 7 != 0) continue;  // thinned here; the acceptance suite runs all
    check_local_flow_contracts(net, 6, 0.5, par);
  }
  std::mt19937_64 rng(99);
  for (int i = 0; i < 6; ++i) {
    FlowNet net = random_net(rng, 6);
    check_local_flow_contracts(net, 5, 0.5, par);
  }
}

TEST_CASE("round_matching brackets") {
  {
    FracMatching m;
    m.edges.push_back({1, 2, 2.0});
    m.edges.push_back({1, 3, 1.0});
    auto r = round_matching(m);
    REQUIRE(r.total() == 3);
    for (auto& e : r.edges) REQUIRE((e.w == 1 || e.w == 2));
  }
  {
    FracMatching m;
    m.edges.push_back({1, 2, 0.5});
    auto r = round_matching(m);
    REQUIRE(r.total() == 1);
    REQUIRE(r.edges.size() == 1);
  }
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 60; ++trial) {
    FracMatching m;
    for (VertexId a = 1; a <= 4; ++a)
      for (VertexId b = 11; b <= 14; ++b) {
        double w = double(rng() % 8) / 4.0;
        if (w > 0) m.edges.push_back({a, b, w});
      }
    if (m.edges.empty()) continue;
    double t0 = m.total();
    auto r = round_matching(m);
    REQUIRE(double(r.total()) == Catch::Approx(std::ceil(t0 - 1e-9)));
    std::map<std::pair<VertexId, VertexId>, double> orig;
    for (auto& e : m.edges) orig[{e.src, e.sink}] += e.w;
    for (auto& e : r.edges) {
      REQUIRE(orig.count({e.src, e.sink}) == 1);
      double w0 = orig.at({e.src, e.sink});
      REQUIRE(double(e.w) >= std::floor(w0 + 1e-9) - 1e-9);
      REQUIRE(double(e.w) <= std::ceil(w0 - 1e-9) + 1e-9);
    }
    for (VertexId a = 1; a <= 4; ++a) {
      double l0 = m.src_load(a), li = 0;
      for (auto& e : r.edges)
        if (e.src == a) li += double(e.w);
      REQUIRE(li >= std::floor(l0 + 1e-9) - 1e-9);
      REQUIRE(li <= std::ceil(l0 - 1e-9) + 1e-9);
    }
    for (VertexId b = 11; b <= 14; ++b) {
      double l0 = m.sink_load(b), li = 0;
      for (auto& e : r.edges)
        if (e.sink == b) li += double(e.w);
      REQUIRE(li >= std::floor(l0 + 1e-9) - 1e-9);
      REQUIRE(li <= std::ceil(l0 - 1e-9) + 1e-9);
    }
  }
}

namespace {

Graph random_cm_graph(std::mt19937_64& rng, int n, int m, std::vector<VertexId>* vs) {
  Graph g;
  vs->clear();
  for (int i = 0; i < n; ++i) vs->push_back(g.add_vertex());
  for (int i = 1; i < n; ++i)
    g.add_edge((*vs)[std::size_t(rng() % std::uint64_t(i))], (*vs)[std::size_t(i)],
               Length(1 + rng() % 3));
  for (int i = n - 1; i < m; ++i) {
    VertexId a = (*vs)[rng() % std::uint64_t(n)], b = (*vs)[rng() % std::uint64_t(n)];
    if (a == b) continue;
    g.add_edge(a, b, Length(1 + rng() % 3));
  }
  return g;
}

void check_cutmatch_contract(const Graph& g, const CutmatchResult& cm,
                             const std::map<VertexId, std::uint64_t>& src,
                             const std::map<VertexId, std::uint64_t>& sink, Length h_cm,
                             double phi_cm, const Params& par) {
  auto total = [](const std::map<VertexId, std::uint64_t>& m) {
    std::uint64_t t = 0;
    for (auto& [v, a] : m) t += a;
    return t;
  };
  std::uint64_t matched = cm.matching.size();
  REQUIRE(total(cm.src_matched) == matched);
  REQUIRE(total(cm.src_matched) + total(cm.src_unmatched) == total(src));
  REQUIRE(total(cm.sink_matched) + total(cm.sink_unmatched) + total(cm.sink_sat_remainder) ==
          total(sink));
  REQUIRE(total(cm.src_matched) <= total(cm.sink_matched) + total(cm.sink_sat_remainder));
  for (auto& u : cm.matching) {
    if (u.path.empty()) {
      REQUIRE(u.src == u.sink);
      continue;
    }
    REQUIRE(is_walk(g, u.path, u.src, u.sink));
    REQUIRE(path_length(g, u.path) <= h_cm);
  }
  std::vector<VertexId> srcs;
  for (auto& [v, c] : cm.src_unmatched)
    if (c > 0) srcs.push_back(v);
  if (!srcs.empty()) {
    auto d = dijkstra_multi(g, srcs, &cm.cut);
    for (auto& [v, c] : cm.sink_unmatched) {
      if (c == 0) continue;
      REQUIRE(d.at(v) > h_cm);
    }
  }
  REQUIRE(verify_landmarks(g, cm.cut, cm.landmarks));
  REQUIRE(double(cm.cut.size()) <=
          par.k_cm * phi_cm * double(h_cm) * double(total(src)) + 1e-9);
}

}  // namespace

TEST_CASE("cutmatch: abundant adjacent sink matches everything") {
  Params par = desk_params();
  Graph g;
  VertexId a = g.add_vertex(), b = g.add_vertex();
  g.add_edge(a, b, 1);
  std::map<VertexId, std::uint64_t> src{{a, 1}}, sink{{a, 2}, {b, 3}};
  auto cm = cutmatch(g, nullptr, src, sink, 4, 0.5, par);
  REQUIRE(cm.matching.size() == 1);
  REQUIRE(cm.src_unmatched.empty());
  REQUIRE(cm.cut.size() == 0);
  check_cutmatch_contract(g, cm, src, sink, 4, 0.5, par);
}

TEST_CASE("cutmatch: far components stay separated with zero cut") {
  Params par = desk_params();
  Graph g;
  VertexId a = g.add_vertex(), b = g.add_vertex();
  VertexId c = g.add_vertex(), d = g.add_vertex();
  g.add_edge(a, b, 1);
  g.add_edge(c, d, 1);
  std::map<VertexId, std::uint64_t> src{{a, 1}, {b, 1}}, sink{{c, 1}, {d, 1}};
  auto cm = cutmatch(g, nullptr, src, sink, 5, 0.5, par);
  REQUIRE(cm.matching.empty());
  REQUIRE(cm.cut.size() == 0);
  check_cutmatch_contract(g, cm, src, sink, 5, 0.5, par);
}

TEST_CASE("cutmatch: bottleneck forces a separating cut") {
  Params par = desk_params();
  Graph g;
  std::vector<VertexId> left, right;
  for (int i = 0; i < 3; ++i) left.push_back(g.add_vertex());
  for (int i = 0; i < 3; ++i) right.push_back(g.add_vertex());
  for (int i = 1; i < 3; ++i) {
    g.add_edge(left[0], left[std::size_t(i)], 1);
    g.add_edge(right[0], right[std::size_t(i)], 1);
  }
  g.add_edge(left[0], right[0], 1);
  std::map<VertexId, std::uint64_t> src, sink;
  for (auto v : left) src[v] = 3;
  for (auto v : right) sink[v] = 4;
  for (auto v : left) sink[v] += 3;
  auto cm = cutmatch(g, nullptr, src, sink, 4, 0.25, par);
  check_cutmatch_contract(g, cm, src, sink, 4, 0.25, par);
}

TEST_CASE("cutmatch contract on random instances") {
  Params par = desk_params();
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 8; ++trial) {
    std::vector<VertexId> vs;
    Graph g = random_cm_graph(rng, 6 + int(rng() % 5), 10 + int(rng() % 5), &vs);
    std::map<VertexId, std::uint64_t> src, sink;
    for (VertexId v : vs) {
      std::uint64_t deg = g.degree(v);
      std::uint64_t s = rng() % 3;
      if (s > 0) src[v] = s;
      sink[v] = deg + 1;
    }
    if (src.empty()) src[vs[0]] = 1;
    Length h_cm = 3 + Length(rng() % 4);
    auto cm = cutmatch(g, nullptr, src, sink, h_cm, 0.5, par);
    check_cutmatch_contract(g, cm, src, sink, h_cm, 0.5, par);
  }
}
