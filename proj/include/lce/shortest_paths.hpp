#pragma once

#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <vector>

#include "lce/graph.hpp"

namespace lce {

// Dijkstra with optional moving-cut overlay. Ties are broken toward the
// smallest vertex id so identical inputs always yield identical trees.
struct DijkstraResult {
  std::map<VertexId, Length> dist;
  std::map<VertexId, EdgeId> parent_edge;

  Length at(VertexId v) const {
    auto it = dist.find(v);
    return it == dist.end() ? kInfLength : it->second;
  }
};

inline DijkstraResult dijkstra_multi(const Graph& g, const std::vector<VertexId>& sources,
                                     const MovingCut* cut = nullptr,
                                     Length bound = kInfLength) {
  DijkstraResult res;
  using Item = std::pair<Length, VertexId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
  for (VertexId s : sources) {
    require(g.has_vertex(s), "UnknownVertex", "dijkstra source");
    if (!res.dist.count(s) || res.dist[s] > 0) {
      res.dist[s] = 0;
      pq.push({0, s});
    }
  }
  while (!pq.empty()) {
    auto [d, v] = pq.top();
    pq.pop();
    if (d != res.dist.at(v)) continue;
    if (d > bound) continue;
    for (EdgeId e : g.incident(v)) {
      const EdgeRec& r = g.edge(e);
      VertexId w = r.other(v);
      Length nd = sat_add(d, cut_length(g, cut, e));
      if (nd > bound) continue;
      auto it = res.dist.find(w);
      if (it == res.dist.end() || nd < it->second) {
        res.dist[w] = nd;
        res.parent_edge[w] = e;
        pq.push({nd, w});
      }
    }
  }
  return res;
}

inline DijkstraResult dijkstra(const Graph& g, VertexId s, const MovingCut* cut = nullptr,
                               Length bound = kInfLength) {
  return dijkstra_multi(g, {s}, cut, bound);
}

// Exact shortest-path distance in G or G-C; kInfLength iff disconnected.
inline Length dist_exact(const Graph& g, VertexId u, VertexId v,
                         const MovingCut* cut = nullptr) {
  require(g.has_vertex(u) && g.has_vertex(v), "UnknownVertex", "dist_exact");
  if (u == v) return 0;
  return dijkstra(g, u, cut).at(v);
}

inline std::vector<EdgeId> shortest_path_edges(const Graph& g, VertexId u, VertexId v,
                                               const MovingCut* cut = nullptr) {
  require(g.has_vertex(u) && g.has_vertex(v), "UnknownVertex", "shortest_path_edges");
  auto res = dijkstra(g, u, cut);
  require(res.at(v) < kInfLength, "Disconnected", "no path");
  std::vector<EdgeId> out;
  VertexId w = v;
  while (w != u) {
    EdgeId e = res.parent_edge.at(w);
    out.push_back(e);
    w = g.edge(e).other(w);
  }
  std::reverse(out.begin(), out.end());
  return out;
}

inline Length path_length(const Graph& g, const std::vector<EdgeId>& path,
                          const MovingCut* cut = nullptr) {
  Length l = 0;
  for (EdgeId e : path) l = sat_add(l, cut_length(g, cut, e));
  return l;
}

// Checks that a list of edges is a contiguous walk from `from` to `to`.
inline bool is_walk(const Graph& g, const std::vector<EdgeId>& path, VertexId from,
                    VertexId to) {
  VertexId cur = from;
  for (EdgeId e : path) {
    if (!g.has_edge(e)) return false;
    const EdgeRec& r = g.edge(e);
    if (r.u == cur)
      cur = r.v;
    else if (r.v == cur)
      cur = r.u;
    else
      return false;
  }
  return cur == to;
}

inline bool is_simple_walk(const Graph& g, const std::vector<EdgeId>& path, VertexId from,
                           VertexId to) {
  if (!is_walk(g, path, from, to)) return false;
  std::set<VertexId> seen{from};
  VertexId cur = from;
  for (EdgeId e : path) {
    cur = g.edge(e).other(cur);
    if (!seen.insert(cur).second) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Landmark sets (Def 3.13 checks and the two maintenance lemmas)

// True iff L is a landmark set of C on g with distortion sigma. Exhaustive at
// test scale: one multi-source Dijkstra from L in G-C.
inline bool verify_landmarks(const Graph& g, const MovingCut& c, const LandmarkSet& l) {
  for (auto& [e, val] : c.cut)
    require(g.has_edge(e), "UnknownEdge", "cut supported outside the graph");
  std::vector<VertexId> ls(l.landmarks.begin(), l.landmarks.end());
  DijkstraResult tol;
  if (!ls.empty()) tol = dijkstra_multi(g, ls, &c);
  for (auto& [e, val] : c.cut) {
    if (val <= 0) continue;
    const EdgeRec& r = g.edge(e);
    if (cut_length(g, &c, e) > l.distortion) {
      if (!l.landmarks.count(r.u) || !l.landmarks.count(r.v)) return false;
    } else {
      if (tol.at(r.u) > l.distortion || tol.at(r.v) > l.distortion) return false;
    }
  }
  return true;
}

// L1 valid for C1 on G, L2 valid for C2 on G-C1: the union is valid for
// C1+C2 with distortion sigma1+sigma2.
inline LandmarkSet union_landmarks(const LandmarkSet& l1, const LandmarkSet& l2) {
  return LandmarkSet::unite(l1, l2);
}

// After deleting F, L union V(F) stays valid for C restricted to the rest.
inline LandmarkSet landmarks_after_deletion(const Graph& g, const LandmarkSet& l,
                                            const std::vector<EdgeId>& deleted) {
  LandmarkSet out = l;
  for (EdgeId e : deleted) {
    const EdgeRec& r = g.edge(e);
    out.landmarks.insert(r.u);
    out.landmarks.insert(r.v);
  }
  return out;
}

}  // namespace lce
