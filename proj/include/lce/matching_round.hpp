#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "lce/base.hpp"

namespace lce {

// Fractional bipartite matching between a source side and a sink side
// (vertex sets may intersect; the sides are kept apart formally).
struct FracMatching {
  struct E {
    VertexId src = 0, sink = 0;
    double w = 0;
  };
  std::vector<E> edges;
  double total() const {
    double t = 0;
    for (auto& e : edges) t += e.w;
    return t;
  }
  double src_load(VertexId v) const {
    double t = 0;
    for (auto& e : edges)
      if (e.src == v) t += e.w;
    return t;
  }
  double sink_load(VertexId v) const {
    double t = 0;
    for (auto& e : edges)
      if (e.sink == v) t += e.w;
    return t;
  }
};

struct IntMatching {
  struct E {
    VertexId src = 0, sink = 0;
    std::int64_t w = 0;
  };
  std::vector<E> edges;
  std::int64_t total() const {
    std::int64_t t = 0;
    for (auto& e : edges) t += e.w;
    return t;
  }
};

// Rounds a fractional matching to an integral one with E(M_int) inside E(M),
// per-edge and per-vertex loads within floor/ceil of the originals, and
// |M_int| = ceil(|M|). Cycle canceling first, then leaf-to-leaf paths with
// the direction chosen against the remaining deficit to ceil(|M|).
inline IntMatching round_matching(const FracMatching& m_in) {
  constexpr double kEps = 1e-9;
  // merge parallel edges
  std::map<std::pair<VertexId, VertexId>, double> merged;
  for (auto& e : m_in.edges) merged[{e.src, e.sink}] += e.w;
  struct Edge {
    VertexId src, sink;
    double w;
  };
  std::vector<Edge> edges;
  for (auto& [k, w] : merged) edges.push_back({k.first, k.second, w});

  double total0 = 0;
  for (auto& e : edges) total0 += e.w;
  double target = std::ceil(total0 - kEps);
  double total = total0;

  auto fractional = [&](double w) { return std::fabs(w - std::round(w)) > kEps; };
  // node keys: (side, vertex); side 0 = src, 1 = sink
  using Node = std::pair<int, VertexId>;
  auto adj_frac = [&]() {
    std::map<Node, std::vector<std::size_t>> adj;
    for (std::size_t i = 0; i < edges.size(); ++i)
      if (fractional(edges[i].w)) {
        adj[{0, edges[i].src}].push_back(i);
        adj[{1, edges[i].sink}].push_back(i);
      }
    return adj;
  };

  for (int guard = 0; guard < int(edges.size()) * 8 + 16; ++guard) {
    auto adj = adj_frac();
    if (adj.empty()) break;

    // walk from a leaf (or any node when none) until revisiting a node or
    // hitting a leaf: yields either a cycle or a maximal path
    Node start = adj.begin()->first;
    for (auto& [node, ids] : adj)
      if (ids.size() == 1) {
        start = node;
        break;
      }
    std::vector<std::size_t> walk;
    std::map<Node, int> pos;
    Node cur = start;
    std::size_t prev_edge = SIZE_MAX;
    int cycle_from = -1;
    for (;;) {
      pos[cur] = int(walk.size());
      std::size_t next = SIZE_MAX;
      for (std::size_t i : adj[cur])
        if (i != prev_edge) {
          next = i;
          break;
        }
      if (next == SIZE_MAX) break;  // leaf: path complete
      walk.push_back(next);
      Node other = (cur.first == 0) ? Node{1, edges[next].sink} : Node{0, edges[next].src};
      prev_edge = next;
      if (pos.count(other)) {
        cycle_from = pos[other];
        break;
      }
      cur = other;
    }
    require(!walk.empty(), "RoundingInternal", "no fractional structure found");

    std::vector<std::size_t> seq;
    if (cycle_from >= 0)
      seq.assign(walk.begin() + cycle_from, walk.end());
    else
      seq = walk;

    bool odd = (seq.size() % 2) == 1 && cycle_from < 0;
    double deficit = target - total;
    // sign of the adjustment on the first edge of the sequence
    double dir = 1.0;
    if (odd) dir = (deficit > kEps) ? 1.0 : -1.0;
    // eps = largest feasible step
    double eps = 2.0;
    double sgn = dir;
    for (std::size_t i : seq) {
      double margin =
          (sgn > 0) ? (std::ceil(edges[i].w - kEps) - edges[i].w) : (edges[i].w - std::floor(edges[i].w + kEps));
      eps = std::min(eps, margin);
      sgn = -sgn;
    }
    if (odd && dir > 0) eps = std::min(eps, deficit);
    require(eps > kEps / 2, "RoundingInternal", "stuck adjustment");
    sgn = dir;
    for (std::size_t i : seq) {
      edges[i].w += sgn * eps;
      sgn = -sgn;
    }
    if (odd) total += dir * eps;
  }

  IntMatching out;
  for (auto& e : edges) {
    std::int64_t w = std::int64_t(std::llround(e.w));
    require(std::fabs(e.w - double(w)) <= 1e-6, "RoundingInternal", "non-integral result");
    if (w > 0) out.edges.push_back({e.src, e.sink, w});
  }
  return out;
}

}  // namespace lce
