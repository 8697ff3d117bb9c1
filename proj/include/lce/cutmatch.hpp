#pragma once

#include <algorithm>
#include <map>
#include <vector>

#include "lce/covers.hpp"
#include "lce/local_flow.hpp"
#include "lce/matching_round.hpp"

namespace lce {

// Result of the local cutmatch. The matching is returned as unit edges
// between vertices together with one embedding path (edge ids of g) each;
// callers assign concrete virtual nodes or items to the units.
struct CutmatchResult {
  struct Unit {
    VertexId src = 0, sink = 0;
    std::vector<EdgeId> path;  // empty for a self match
  };
  std::vector<Unit> matching;
  std::map<VertexId, std::uint64_t> src_matched, src_unmatched;
  std::map<VertexId, std::uint64_t> sink_matched, sink_unmatched;
  // remainders of cut-saturated sink vertices: these join the matched side
  // of the sink partition, not the separated side
  std::map<VertexId, std::uint64_t> sink_sat_remainder;
  MovingCut cut;          // C_CM on the base metric
  LandmarkSet landmarks;  // of C_CM with distortion h_cm/kappa_sigma
  double congestion = 0;  // measured embedding congestion
  std::uint64_t iterations = 0;
};

namespace detail {

struct CmNet {
  FlowNet net;
  std::map<VertexId, std::uint32_t> index;
  std::vector<VertexId> label;
  std::map<VertexId, std::uint32_t> src_arc, sink_arc;
};

inline CmNet build_cm_net(const Graph& g, const MovingCut* base,
                          const std::map<VertexId, std::uint64_t>& src,
                          const std::map<VertexId, std::uint64_t>& sink) {
  CmNet out;
  out.net.s = out.net.add_vertex();
  out.net.t = out.net.add_vertex();
  out.label.assign(2, 0);
  for (auto& [v, _] : g.vertices()) {
    out.index[v] = out.net.add_vertex();
    out.label.push_back(v);
  }
  for (auto& [e, rec] : g.edges()) {
    if (rec.u == rec.v) continue;
    Length len = cut_length(g, base, e);
    out.net.add_arc(out.index.at(rec.u), out.index.at(rec.v), len, 1, 0.0, e);
    out.net.add_arc(out.index.at(rec.v), out.index.at(rec.u), len, 1, 0.0, e);
  }
  for (auto& [v, a] : src)
    if (a > 0) out.src_arc[v] = out.net.add_arc(out.net.s, out.index.at(v), 1, std::int64_t(a));
  for (auto& [v, a] : sink)
    if (a > 0) out.sink_arc[v] = out.net.add_arc(out.index.at(v), out.net.t, 1, std::int64_t(a));
  return out;
}

// flow paths grouped by (source vertex, sink vertex); the pool keeps the
// graph part of each unit copy for embedding
struct PathPool {
  std::map<std::pair<VertexId, VertexId>, std::vector<std::vector<EdgeId>>> units;
  FracMatching fractional;
};

inline PathPool decompose(const CmNet& cm, const LocalFlowResult& lf) {
  PathPool pool;
  std::map<std::pair<VertexId, VertexId>, double> frac;
  for (auto& p : lf.hat.paths) {
    if (p.arcs.size() < 2) continue;
    VertexId a = cm.label[cm.net.arcs[p.arcs.front()].to];
    VertexId b = cm.label[cm.net.arcs[p.arcs.back()].from];
    std::vector<EdgeId> mid;
    for (std::uint32_t idx : p.arcs)
      if (cm.net.arcs[idx].origin != 0) mid.push_back(cm.net.arcs[idx].origin);
    frac[{a, b}] += lf.eta * double(p.value);
    auto& vec = pool.units[{a, b}];
    for (std::int64_t c = 0; c < p.value; ++c) vec.push_back(mid);
  }
  for (auto& [k, w] : frac) pool.fractional.edges.push_back({k.first, k.second, w});
  return pool;
}

}  // namespace detail

// Local cutmatch. Matches the two integral functions (node-weightings or
// densities, Remark 4.2) through short low-congestion paths, and produces an
// integral moving cut separating the unmatched remainders plus a landmark
// set of that cut. Same-vertex units are matched first through empty paths.
inline CutmatchResult cutmatch(const Graph& g, const MovingCut* base,
                               std::map<VertexId, std::uint64_t> src,
                               std::map<VertexId, std::uint64_t> sink, Length h_cm,
                               double phi_cm, const Params& par) {
  for (auto& [v, a] : src) require(g.has_vertex(v), "UnknownVertex", "cutmatch src");
  for (auto& [v, a] : sink) require(g.has_vertex(v), "UnknownVertex", "cutmatch sink");
  CutmatchResult res;
  auto total = [](const std::map<VertexId, std::uint64_t>& m) {
    std::uint64_t t = 0;
    for (auto& [v, a] : m) t += a;
    return t;
  };
  auto prune_zero = [](std::map<VertexId, std::uint64_t>& m) {
    for (auto it = m.begin(); it != m.end();)
      it = (it->second == 0) ? m.erase(it) : std::next(it);
  };
  auto match_unit = [&](VertexId a, VertexId b, std::vector<EdgeId> path) {
    res.matching.push_back({a, b, std::move(path)});
    res.src_matched[a]++;
    res.sink_matched[b]++;
    src[a]--;
    sink[b]--;
  };

  // self matches: a vertex never keeps both unmatched source and unmatched
  // sink units (the separation contract could not hold otherwise)
  for (auto& [v, a] : src) {
    auto it = sink.find(v);
    if (it == sink.end()) continue;
    std::uint64_t c = std::min(a, it->second);
    for (std::uint64_t i = 0; i < c; ++i) match_unit(v, v, {});
  }
  prune_zero(src);
  prune_zero(sink);

  double phi = phi_cm;
  if (par.cutmatch_log_div) {
    double ln_n = std::log(double(std::max<std::size_t>(g.num_vertices(), 3)));
    phi = phi_cm / (ln_n * ln_n);
  }

  bool done = total(src) == 0;
  while (!done) {
    ++res.iterations;
    require(res.iterations < 4096, "CutmatchStuck", "no progress");
    detail::CmNet cm = detail::build_cm_net(g, base, src, sink);
    LocalFlowResult lf = local_flow(cm.net, sat_add(h_cm, 2), par.delta_flow, par);
    if (lf.value() >= phi * double(total(src)) && lf.value() > 0) {
      // matching round: round the fractional matching and realize it
      detail::PathPool pool = detail::decompose(cm, lf);
      IntMatching m = round_matching(pool.fractional);
      for (auto& e : m.edges) {
        auto& units = pool.units.at({e.src, e.sink});
        std::int64_t take =
            std::min<std::int64_t>(e.w, std::min<std::int64_t>(std::int64_t(src[e.src]),
                                                               std::int64_t(sink[e.sink])));
        for (std::int64_t i = 0; i < take; ++i)
          match_unit(e.src, e.sink, units[std::size_t(i % std::int64_t(units.size()))]);
      }
      prune_zero(src);
      prune_zero(sink);
      if (total(src) == 0) done = true;
      continue;
    }

    // final round: scaled sources against the full sink side
    std::map<VertexId, std::uint64_t> scaled = src;
    for (auto& [v, a] : scaled) a *= std::uint64_t(par.cutmatch_x);
    std::map<VertexId, std::uint64_t> full_sink = sink;
    for (auto& [v, c] : res.sink_matched) full_sink[v] += c;
    prune_zero(full_sink);
    detail::CmNet cm2 = detail::build_cm_net(g, base, scaled, full_sink);
    LocalFlowResult lf2 = local_flow(cm2.net, sat_add(h_cm, 2), par.delta_flow, par);
    double mbar = double(std::max<std::size_t>(cm2.net.arcs.size(), 2));

    std::map<VertexId, char> sat_src, sat_sink;
    for (auto& [v, a] : cm2.src_arc)
      if (lf2.w.w[a] >= 1.0 / mbar) sat_src[v] = 1;
    for (auto& [v, a] : cm2.sink_arc)
      if (lf2.w.w[a] >= 1.0 / mbar) sat_sink[v] = 1;

    detail::PathPool pool = detail::decompose(cm2, lf2);
    IntMatching m = round_matching(pool.fractional);
    std::uint64_t matched_now = 0;
    for (auto& e : m.edges) {
      if (!src.count(e.src) || !sink.count(e.sink)) continue;
      auto& units = pool.units.at({e.src, e.sink});
      std::int64_t take =
          std::min<std::int64_t>(e.w, std::min<std::int64_t>(std::int64_t(src[e.src]),
                                                             std::int64_t(sink[e.sink])));
      for (std::int64_t i = 0; i < take; ++i)
        match_unit(e.src, e.sink, units[std::size_t(i % std::int64_t(units.size()))]);
      matched_now += std::uint64_t(take);
    }
    prune_zero(src);
    prune_zero(sink);

    // a source vertex saturated by the cut must end fully matched; when the
    // sink side ran short we go around again
    bool overflow = false;
    for (auto& [v, one] : sat_src)
      if (src.count(v)) overflow = true;
    if (overflow && matched_now > 0) continue;
    require(!overflow, "CutmatchStuck", "saturated source left unmatched");

    // remainders on saturated sink vertices move to the matched side
    for (auto& [v, one] : sat_sink) {
      auto it = sink.find(v);
      if (it != sink.end() && it->second > 0) {
        res.sink_sat_remainder[v] += it->second;
        sink.erase(it);
      }
    }

    // moving cut from the fractional cut of the scaled run
    std::map<EdgeId, double> wmax;
    for (std::size_t a = 0; a < cm2.net.arcs.size(); ++a) {
      EdgeId e = cm2.net.arcs[a].origin;
      if (e == 0) continue;
      wmax[e] = std::max(wmax[e], lf2.w.w[a]);
    }
    for (auto& [e, w] : wmax) {
      if (w < 1.0 / (mbar * mbar * mbar)) continue;
      Length c = Length(std::floor(3.0 * double(h_cm) * w));
      if (c > 0) res.cut.add(e, c);
    }

    // landmarks: cover the cut support with the flow paths, then decompose
    // into heavy edges and short segments
    double sigma1 = double(h_cm) / (3.0 * par.kappa_sigma);
    res.landmarks.distortion = Length(std::floor(double(h_cm) / par.kappa_sigma));
    MovingCut after = base ? base->plus(res.cut) : res.cut;
    auto len_after = [&](EdgeId e) { return double(cut_length(g, &after, e)); };
    std::set<EdgeId> covered;
    auto flush_subpath = [&](const std::vector<EdgeId>& sub) {
      // greedy segments of after-length in [sigma1, 2*sigma1]; a trailing
      // remainder below sigma1 stays with the previous representative, which
      // then covers at most 3*sigma1 = sigma_CM
      if (sub.empty()) return;
      double acc = 0;
      bool placed = false;
      for (EdgeId e : sub) {
        if (!placed) {
          res.landmarks.landmarks.insert(g.edge(e).u);
          placed = true;
        }
        acc += len_after(e);
        if (acc >= sigma1) {
          acc = 0;
          placed = false;
        }
      }
    };
    for (auto& [pair, units] : pool.units)
      for (auto& unit : units) {
        std::vector<EdgeId> sub;
        for (EdgeId e : unit) {
          covered.insert(e);
          if (len_after(e) >= sigma1) {
            res.landmarks.landmarks.insert(g.edge(e).u);
            res.landmarks.landmarks.insert(g.edge(e).v);
            flush_subpath(sub);
            sub.clear();
          } else {
            sub.push_back(e);
          }
        }
        flush_subpath(sub);
      }
    // defensive: any cut edge missed by the path cover still gets landmarks
    for (auto& [e, c] : res.cut.cut)
      if (!covered.count(e)) {
        res.landmarks.landmarks.insert(g.edge(e).u);
        res.landmarks.landmarks.insert(g.edge(e).v);
      }
    done = true;
  }

  res.src_unmatched = src;
  res.sink_unmatched = sink;
  std::map<EdgeId, std::uint64_t> load;
  for (auto& u : res.matching)
    for (EdgeId e : u.path) load[e]++;
  for (auto& [e, l] : load) res.congestion = std::max(res.congestion, double(l));
  return res;
}

}  // namespace lce
