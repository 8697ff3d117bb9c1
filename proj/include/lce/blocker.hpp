#pragma once

#include <cmath>
#include <set>
#include <vector>

#include "lce/flow_net.hpp"

namespace lce {

inline double weight_margin(double thr) { return 1e-9 * std::max(1.0, std::fabs(thr)); }

struct BlockerTrace {
  // per iteration of the local algorithm: vertices of the local graph
  std::vector<std::set<std::uint32_t>> visited;
};

// h-length (1+delta, 1+2delta)-lightest path blocker, built by repeated
// saturation of minimum-weight length-bounded paths. Stronger than the
// abstract contract: on return no augmentable h-length path of weight at
// most (1+delta)*lambda remains. base_flow, arc_mask and weight_override
// carry the local-graph and modified-net variants without copying the net.
inline IntPathFlow base_blocker(const FlowNet& net, Length h, double delta, double lambda,
                                bool check_precondition = true,
                                const std::vector<std::int64_t>* base_flow = nullptr,
                                const std::vector<char>* arc_mask = nullptr,
                                const std::vector<double>* weight_override = nullptr,
                                Length length_budget = -1) {
  if (length_budget < 0) length_budget = h;
  IntPathFlow flow(net.arcs.size());
  auto weight_of = [&](std::uint32_t a) {
    return weight_override ? (*weight_override)[a] : net.arcs[a].weight;
  };
  auto residual_ok = [&](std::uint32_t a) {
    if (arc_mask && !(*arc_mask)[a]) return false;
    std::int64_t used = flow.arc_flow[a] + (base_flow ? (*base_flow)[a] : 0);
    return used < net.arcs[a].cap;
  };

  if (check_precondition) {
    auto first = lightest_path_bounded(net, length_budget, residual_ok, weight_of);
    if (first.found && first.weight < lambda - weight_margin(lambda))
      fail("PreconditionViolated", "an h-length path lighter than lambda exists");
  }

  double thr = (1.0 + delta) * lambda;
  for (;;) {
    auto p = lightest_path_bounded(net, length_budget, residual_ok, weight_of);
    if (!p.found || p.weight > thr + weight_margin(thr)) break;
    std::int64_t push = std::numeric_limits<std::int64_t>::max();
    for (std::uint32_t a : p.arcs) {
      std::int64_t used = flow.arc_flow[a] + (base_flow ? (*base_flow)[a] : 0);
      push = std::min(push, net.arcs[a].cap - used);
    }
    flow.add(p.arcs, push);
  }
  return flow;
}

// Local blocker (iterated local graphs): h iterations; in iteration i the
// local graph is grown from s through saturated sinks and the base blocker
// runs with length budget i+1. Requires sink arcs of weight 0 and length 1
// and no direct (s,t) arc.
inline IntPathFlow local_blocker(const FlowNet& net, Length h, double delta, double lambda,
                                 bool check_precondition = true,
                                 const std::vector<double>* weight_override = nullptr,
                                 const std::vector<char>* deleted_arcs = nullptr,
                                 BlockerTrace* trace = nullptr) {
  auto weight_of = [&](std::uint32_t a) {
    return weight_override ? (*weight_override)[a] : net.arcs[a].weight;
  };
  for (std::uint32_t a : net.out[net.s])
    require(net.arcs[a].to != net.t, "BadNet", "local blocker requires (s,t) not in E");
  for (std::uint32_t v = 0; v < net.n; ++v) {
    if (v == net.s) continue;
    for (std::uint32_t a : net.out[v])
      if (net.arcs[a].to == net.t) {
        require(net.arcs[a].length == 1, "BadNet", "sink arcs must have length 1");
        if (!deleted_arcs || !(*deleted_arcs)[a])
          require(std::fabs(weight_of(a)) <= 1e-302, "BadNet", "sink arcs must have weight 0");
      }
  }
  if (check_precondition) {
    auto alive = [&](std::uint32_t a) { return !deleted_arcs || !(*deleted_arcs)[a]; };
    auto first = lightest_path_bounded(net, h, alive, weight_of);
    if (first.found && first.weight < lambda - weight_margin(lambda))
      fail("PreconditionViolated", "an h-length path lighter than lambda exists");
  }

  IntPathFlow acc(net.arcs.size());
  std::vector<std::int64_t> sink_flow(net.n, 0), sink_cap(net.n, 0);
  for (std::uint32_t v = 0; v < net.n; ++v)
    if (v != net.s && v != net.t)
      for (std::uint32_t a : net.out[v])
        if (net.arcs[a].to == net.t && (!deleted_arcs || !(*deleted_arcs)[a]))
          sink_cap[v] += net.arcs[a].cap;

  // Iteration i handles length budget i+1. When a budget-(i+1) call returns
  // no flow, a full-budget call on the same local graph decides the rest: if
  // it is empty too, every later iteration would see the same frozen flow,
  // hence the same local graph, hence return nothing, so we stop; if not,
  // the extra saturation only strengthens the blocking property. Either way
  // the loop advances the flow or terminates, so it runs O(m) rounds even
  // for very large h.
  for (Length i = 1; i <= h; ++i) {
    std::vector<char> arc_mask(net.arcs.size(), 0);
    std::set<std::uint32_t> vset{net.s, net.t};
    std::vector<std::uint32_t> stack{net.s};
    std::set<std::uint32_t> sat_visited;
    std::set<std::uint32_t> seen{net.s};
    while (!stack.empty()) {
      std::uint32_t v = stack.back();
      stack.pop_back();
      bool expand = (v == net.s) || (sink_flow[v] >= sink_cap[v]);
      if (v != net.s && expand && v != net.t) sat_visited.insert(v);
      if (!expand) continue;
      for (std::uint32_t a : net.out[v]) {
        if (deleted_arcs && (*deleted_arcs)[a]) continue;
        if (acc.arc_flow[a] >= net.arcs[a].cap) continue;  // saturated
        std::uint32_t w = net.arcs[a].to;
        if (w != net.t && seen.insert(w).second) stack.push_back(w);
      }
    }
    // V(G_i) = {s,t} + N+[{s} + sat]; E(G_i) = boundary source/sink arcs +
    // out-arcs of saturated vertices
    std::set<std::uint32_t> core = sat_visited;
    core.insert(net.s);
    for (std::uint32_t v : core)
      for (std::uint32_t a : net.out[v]) {
        if (deleted_arcs && (*deleted_arcs)[a]) continue;
        vset.insert(net.arcs[a].to);
        vset.insert(v);
        if (v != net.s) arc_mask[a] = 1;  // E+(sat)
      }
    for (std::uint32_t a : net.out[net.s]) {
      if (deleted_arcs && (*deleted_arcs)[a]) continue;
      if (vset.count(net.arcs[a].to)) arc_mask[a] = 1;
    }
    for (std::uint32_t v : vset) {
      if (v == net.s || v == net.t) continue;
      for (std::uint32_t a : net.out[v])
        if (net.arcs[a].to == net.t && (!deleted_arcs || !(*deleted_arcs)[a])) arc_mask[a] = 1;
    }
    if (trace) trace->visited.push_back(vset);

    auto absorb = [&](const IntPathFlow& fi) {
      for (auto& p : fi.paths) {
        acc.add(p.arcs, p.value);
        for (std::uint32_t a : p.arcs)
          if (net.arcs[a].to == net.t) sink_flow[net.arcs[a].from] += p.value;
      }
    };
    IntPathFlow fi = base_blocker(net, h, delta, lambda, false, &acc.arc_flow, &arc_mask,
                                  weight_override, std::min<Length>(sat_add(i, 1), h));
    if (!fi.empty()) {
      absorb(fi);
      continue;
    }
    IntPathFlow ff = base_blocker(net, h, delta, lambda, false, &acc.arc_flow, &arc_mask,
                                  weight_override, h);
    if (ff.empty()) break;
    absorb(ff);
  }
  return acc;
}

// Cor 4.4 wrapper: drops sink arcs heavier than (1+delta)*lambda, zeroes the
// remaining sink weights, and runs the local blocker. The result is an
// h-length (1+delta, 2+3delta)-lightest path blocker for the original net.
inline IntPathFlow cor44_blocker(const FlowNet& net, Length h, double delta, double lambda,
                                 const std::vector<double>* weights = nullptr,
                                 BlockerTrace* trace = nullptr) {
  std::vector<double> w(net.arcs.size());
  for (std::size_t a = 0; a < net.arcs.size(); ++a)
    w[a] = weights ? (*weights)[a] : net.arcs[a].weight;
  std::vector<char> deleted(net.arcs.size(), 0);
  double thr = (1.0 + delta) * lambda;
  for (std::size_t a = 0; a < net.arcs.size(); ++a) {
    if (net.arcs[a].to != net.t || net.arcs[a].from == net.s) continue;
    if (w[a] > thr + weight_margin(thr))
      deleted[a] = 1;
    else
      w[a] = 0.0;
  }
  return local_blocker(net, h, delta, lambda, false, &w, &deleted, trace);
}

}  // namespace lce
