#pragma once

#include <algorithm>
#include <functional>
#include <vector>

#include "lce/flow_net.hpp"
#include "lce/graph.hpp"
#include "lce/shortest_paths.hpp"
#include "lce/simplex.hpp"

namespace lce {

// Brute-force reference engines. Everything here is independent of the
// implementations it checks: plain enumeration plus a tiny simplex.

constexpr std::size_t kEnumEdgeCap = 14;
constexpr std::size_t kEnumPathCap = 400000;
constexpr std::size_t kDijkstraVertexCap = 300;

// All simple s-t paths of length at most h in an undirected graph.
inline std::vector<std::vector<EdgeId>> enumerate_paths(const Graph& g, VertexId s, VertexId t,
                                                        Length h,
                                                        const MovingCut* cut = nullptr) {
  require(g.num_edges() <= kEnumEdgeCap, "InstanceTooLarge", "path enumeration cap");
  std::vector<std::vector<EdgeId>> out;
  std::vector<EdgeId> cur;
  std::set<VertexId> used{s};
  std::function<void(VertexId, Length)> walk = [&](VertexId v, Length len) {
    if (v == t) {
      out.push_back(cur);
      if (v != s) return;
    }
    for (EdgeId e : g.incident(v)) {
      VertexId w = g.edge(e).other(v);
      Length nl = sat_add(len, cut_length(g, cut, e));
      if (nl > h || used.count(w)) continue;
      used.insert(w);
      cur.push_back(e);
      walk(w, nl);
      cur.pop_back();
      used.erase(w);
      require(out.size() < kEnumPathCap, "InstanceTooLarge", "too many paths");
    }
  };
  walk(s, 0);
  return out;
}

inline Length dist_by_enumeration(const Graph& g, VertexId s, VertexId t,
                                  const MovingCut* cut = nullptr) {
  if (s == t) return 0;
  Length best = kInfLength;
  auto paths = enumerate_paths(g, s, t, kInfLength, cut);
  for (auto& p : paths)
    if (!p.empty()) best = std::min(best, path_length(g, p, cut));
  return best;
}

// All simple s-t arc paths of length at most h in a flow net.
inline std::vector<std::vector<std::uint32_t>> enumerate_net_paths(const FlowNet& net,
                                                                   Length h) {
  std::vector<std::vector<std::uint32_t>> out;
  std::vector<std::uint32_t> cur;
  std::vector<char> used(net.n, 0);
  used[net.s] = 1;
  std::function<void(std::uint32_t, Length)> walk = [&](std::uint32_t v, Length len) {
    if (v == net.t) {
      out.push_back(cur);
      return;
    }
    for (std::uint32_t a : net.out[v]) {
      const Arc& arc = net.arcs[a];
      Length nl = sat_add(len, arc.length);
      if (nl > h || used[arc.to]) continue;
      used[arc.to] = 1;
      cur.push_back(a);
      walk(arc.to, nl);
      cur.pop_back();
      used[arc.to] = 0;
      require(out.size() < kEnumPathCap, "InstanceTooLarge", "too many net paths");
    }
  };
  walk(net.s, 0);
  return out;
}

// Exact maximum h-length s-t flow value by LP over enumerated paths.
inline double exact_hflow(const FlowNet& net, Length h) {
  auto paths = enumerate_net_paths(net, h);
  if (paths.empty()) return 0.0;
  std::vector<std::vector<double>> a(net.arcs.size(), std::vector<double>(paths.size(), 0.0));
  std::vector<double> b(net.arcs.size());
  for (std::size_t e = 0; e < net.arcs.size(); ++e) b[e] = double(net.arcs[e].cap);
  for (std::size_t p = 0; p < paths.size(); ++p)
    for (std::uint32_t e : paths[p]) a[e][p] += 1.0;
  std::vector<double> c(paths.size(), 1.0);
  return simplex_max(a, b, c);
}

// Exact vertex-capacitated multicommodity maxflow by LP over enumerated
// simple paths of every pair.
inline double exact_mcf_lp(const Graph& g,
                           const std::vector<std::pair<VertexId, VertexId>>& pairs) {
  std::vector<std::vector<EdgeId>> all;
  std::vector<std::pair<VertexId, VertexId>> ends;
  for (auto& [s, t] : pairs) {
    if (s == t) continue;
    for (auto& p : enumerate_paths(g, s, t, kInfLength)) {
      if (p.empty()) continue;
      all.push_back(p);
      ends.push_back({s, t});
    }
  }
  if (all.empty()) return 0.0;
  std::vector<VertexId> verts;
  for (auto& [v, _] : g.vertices()) verts.push_back(v);
  std::map<VertexId, std::size_t> vidx;
  for (std::size_t i = 0; i < verts.size(); ++i) vidx[verts[i]] = i;
  std::vector<std::vector<double>> a(verts.size(), std::vector<double>(all.size(), 0.0));
  for (std::size_t p = 0; p < all.size(); ++p) {
    VertexId cur = ends[p].first;
    a[vidx.at(cur)][p] = 1.0;
    for (EdgeId e : all[p]) {
      cur = g.edge(e).other(cur);
      a[vidx.at(cur)][p] = 1.0;
    }
  }
  std::vector<double> b(verts.size(), 1.0);
  std::vector<double> c(all.size(), 1.0);
  return simplex_max(a, b, c);
}

}  // namespace lce
