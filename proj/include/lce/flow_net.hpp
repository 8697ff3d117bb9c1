#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <queue>
#include <vector>

#include "lce/base.hpp"

namespace lce {

// Directed flow network for the length-constrained machinery. Vertices are
// dense local indices; s and t are distinguished. Arcs keep an optional
// back-reference to the undirected graph edge they came from.
struct Arc {
  std::uint32_t from = 0, to = 0;
  Length length = 1;
  std::int64_t cap = 1;
  double weight = 0.0;
  EdgeId origin = 0;  // 0 = synthetic (source/sink) arc
};

struct FlowNet {
  std::uint32_t n = 0;
  std::uint32_t s = 0, t = 0;
  std::vector<Arc> arcs;
  std::vector<std::vector<std::uint32_t>> out;

  std::uint32_t add_vertex() {
    out.emplace_back();
    return n++;
  }
  std::uint32_t add_arc(std::uint32_t from, std::uint32_t to, Length len, std::int64_t cap,
                        double weight = 0.0, EdgeId origin = 0) {
    require(from < n && to < n, "UnknownVertex", "add_arc");
    require(len >= 1 && cap >= 1, "BadArc", "length and capacity must be positive");
    arcs.push_back(Arc{from, to, len, cap, weight, origin});
    out[from].push_back(std::uint32_t(arcs.size() - 1));
    return std::uint32_t(arcs.size() - 1);
  }
  std::int64_t source_cap(std::uint32_t v) const {  // Delta(v)
    std::int64_t c = 0;
    for (std::uint32_t a : out[s])
      if (arcs[a].to == v) c += arcs[a].cap;
    return c;
  }
  std::int64_t sink_cap(std::uint32_t v) const {  // Nabla(v)
    std::int64_t c = 0;
    for (std::uint32_t a : out[v])
      if (arcs[a].to == t) c += arcs[a].cap;
    return c;
  }
};

// Integral flow stored as explicit paths (arc index sequences) plus per-arc
// totals. Used for blockers and for the unscaled accumulation in the MWU.
struct IntPathFlow {
  struct Path {
    std::vector<std::uint32_t> arcs;
    std::int64_t value = 0;
  };
  std::vector<Path> paths;
  std::vector<std::int64_t> arc_flow;

  explicit IntPathFlow(std::size_t num_arcs = 0) : arc_flow(num_arcs, 0) {}
  void add(const std::vector<std::uint32_t>& p, std::int64_t v) {
    paths.push_back(Path{p, v});
    for (std::uint32_t a : p) arc_flow[a] += v;
  }
  void add_all(const IntPathFlow& o) {
    for (auto& p : o.paths) add(p.arcs, p.value);
  }
  std::int64_t value() const {
    std::int64_t v = 0;
    for (auto& p : paths) v += p.value;
    return v;
  }
  bool empty() const { return paths.empty(); }
};

// Fractional moving cut on a flow net; |w| = sum U(e) * w(e).
struct FracCut {
  std::vector<double> w;
  double size(const FlowNet& net) const {
    double s = 0;
    for (std::size_t i = 0; i < w.size(); ++i) s += double(net.arcs[i].cap) * w[i];
    return s;
  }
};

// Exact bicriteria search: among s-t paths of length at most h, find one of
// minimum weight. Label-setting over Pareto frontiers (weight, length);
// dominated labels are pruned, so returned paths are simple. Arc filter and
// weight override let callers express residual networks and modified nets
// without copying.
struct LightestPathResult {
  bool found = false;
  double weight = 0;
  Length length = 0;
  std::vector<std::uint32_t> arcs;
};

inline LightestPathResult lightest_path_bounded(
    const FlowNet& net, Length h, const std::function<bool(std::uint32_t)>& arc_ok,
    const std::function<double(std::uint32_t)>& arc_weight) {
  struct Label {
    double weight;
    Length length;
    std::uint32_t vertex;
    std::int32_t parent;      // label index
    std::uint32_t parent_arc;
  };
  std::vector<Label> labels;
  // per-vertex Pareto frontier: (length -> weight), weights strictly
  // decreasing as length increases
  std::vector<std::vector<std::pair<Length, double>>> frontier(net.n);
  auto dominated = [&](std::uint32_t v, Length len, double wt) {
    for (auto& [l, w] : frontier[v])
      if (l <= len && w <= wt + 1e-15 * std::max(1.0, std::fabs(wt))) return true;
    return false;
  };
  auto push_frontier = [&](std::uint32_t v, Length len, double wt) {
    auto& f = frontier[v];
    f.erase(std::remove_if(f.begin(), f.end(),
                           [&](auto& p) { return p.first >= len && p.second >= wt; }),
            f.end());
    f.push_back({len, wt});
  };

  using QItem = std::pair<std::pair<double, Length>, std::uint32_t>;  // ((w,len), label)
  std::priority_queue<QItem, std::vector<QItem>, std::greater<QItem>> pq;
  labels.push_back(Label{0.0, 0, net.s, -1, 0});
  push_frontier(net.s, 0, 0.0);
  pq.push({{0.0, 0}, 0});

  while (!pq.empty()) {
    auto [key, li] = pq.top();
    pq.pop();
    Label lab = labels[li];
    if (lab.vertex == net.t) {
      LightestPathResult res;
      res.found = true;
      res.weight = lab.weight;
      res.length = lab.length;
      std::int32_t cur = li;
      while (labels[cur].parent >= 0) {
        res.arcs.push_back(labels[cur].parent_arc);
        cur = labels[cur].parent;
      }
      std::reverse(res.arcs.begin(), res.arcs.end());
      return res;
    }
    for (std::uint32_t a : net.out[lab.vertex]) {
      if (arc_ok && !arc_ok(a)) continue;
      const Arc& arc = net.arcs[a];
      Length nl = sat_add(lab.length, arc.length);
      if (nl > h) continue;
      double nw = lab.weight + (arc_weight ? arc_weight(a) : arc.weight);
      if (dominated(arc.to, nl, nw)) continue;
      push_frontier(arc.to, nl, nw);
      labels.push_back(Label{nw, nl, arc.to, std::int32_t(li), a});
      if (labels.size() > 4000000) fail("LabelExplosion", "bicriteria search too large");
      pq.push({{nw, nl}, std::uint32_t(labels.size() - 1)});
    }
  }
  return LightestPathResult{};
}

}  // namespace lce
