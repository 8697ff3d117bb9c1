#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "lce/blocker.hpp"
#include "lce/config.hpp"

namespace lce {

// Output of the multiplicative-weights maxflow. The flow f equals
// eta * hat (hat integral), so f/eta is an integral flow; the invariant
// w(e) = (1+delta0)^(hat(e)/U(e)) / m^zeta is maintained exactly by
// recomputation.
struct LocalFlowResult {
  IntPathFlow hat;      // accumulated path blockers, unscaled
  double eta = 0;
  FracCut w;            // final cut
  FracCut w_min;        // best w/lambda seen
  double lambda = 0;    // final lambda (>= 1)
  double delta0 = 0;
  double zeta = 0;
  double m_pow_zeta = 0;
  double value() const { return eta * double(hat.value()); }
  double flow_on(std::uint32_t a) const { return eta * double(hat.arc_flow[a]); }
};

struct LocalFlowCheckpoint {
  double lambda;
  const FracCut* w;
  const IntPathFlow* hat;
  double eta;
};

// Algorithm: initialize w = 1/m^zeta, repeatedly run the (1+d0, 2+3d0)
// blocker, scale flows by eta, bump weights multiplicatively, raise lambda by
// (1+d0) per phase until lambda >= 1. Phases in which the blocker provably
// returns nothing (no augmentable light path in the modified net) are
// fast-forwarded; the elision is exact because an empty blocker changes no
// state. The checkpoint hook fires at the end of every executed phase.
inline LocalFlowResult local_flow(
    const FlowNet& net, Length h, double delta, const Params& par,
    const std::function<void(const LocalFlowCheckpoint&)>& checkpoint = nullptr) {
  LocalFlowResult res;
  res.hat = IntPathFlow(net.arcs.size());
  double m = double(std::max<std::size_t>(net.arcs.size(), 2));
  double n = double(std::max<std::uint32_t>(net.n, 2));
  double d0 = delta / 6.0;
  res.delta0 = d0;
  res.zeta = (1.0 + 2.0 * d0) / d0 + 1.0;
  require(res.zeta * std::log10(m) < 280.0, "NumericRange",
          "delta too small for this net size");
  res.m_pow_zeta = std::pow(m, res.zeta);
  res.eta = d0 / ((1.0 + d0) * res.zeta * std::log(m));

  res.w.w.assign(net.arcs.size(), 1.0 / res.m_pow_zeta);
  res.lambda = 1.0 / res.m_pow_zeta;
  res.w_min.w = res.w.w;
  double wmin_lambda = res.lambda;

  auto rebuild_weight = [&](std::uint32_t a) {
    res.w.w[a] = std::exp(std::log(1.0 + d0) * double(res.hat.arc_flow[a]) /
                              double(net.arcs[a].cap) -
                          res.zeta * std::log(m));
  };
  auto consider_wmin = [&]() {
    double cur = res.w.size(net) / res.lambda;
    double best = 0;
    for (std::size_t a = 0; a < net.arcs.size(); ++a)
      best += double(net.arcs[a].cap) * res.w_min.w[a] / wmin_lambda;
    if (cur < best) {
      res.w_min.w = res.w.w;
      wmin_lambda = res.lambda;
    }
  };

  // A phase is trivial iff the Cor-4.4 modified net has no h-length path of
  // weight <= (1+d0)*lambda; nothing changes in such a phase.
  auto phase_trivial = [&](double lambda) {
    double thr = (1.0 + d0) * lambda;
    std::vector<double> wmod = res.w.w;
    std::vector<char> deleted(net.arcs.size(), 0);
    for (std::size_t a = 0; a < net.arcs.size(); ++a) {
      if (net.arcs[a].to != net.t || net.arcs[a].from == net.s) continue;
      if (wmod[a] > thr + weight_margin(thr))
        deleted[a] = 1;
      else
        wmod[a] = 0.0;
    }
    auto ok = [&](std::uint32_t a) { return !deleted[a]; };
    auto wt = [&](std::uint32_t a) { return wmod[a]; };
    auto p = lightest_path_bounded(net, h, ok, wt);
    return !p.found || p.weight > thr + weight_margin(thr);
  };

  long iter_budget = long(std::ceil(par.mwu_iter_const * double(std::min<Length>(h, 1 << 20)) *
                                    std::log(n) / (std::log1p(d0) * d0))) +
                     8;
  while (res.lambda < 1.0) {
    if (phase_trivial(res.lambda)) {
      res.lambda *= (1.0 + d0);
      consider_wmin();
      continue;
    }
    for (long it = 0; it < iter_budget; ++it) {
      IntPathFlow f = cor44_blocker(net, h, d0, res.lambda, &res.w.w);
      if (f.empty()) break;
      for (auto& p : f.paths) res.hat.add(p.arcs, p.value);
      std::set<std::uint32_t> touched;
      for (auto& p : f.paths) touched.insert(p.arcs.begin(), p.arcs.end());
      for (std::uint32_t a : touched) rebuild_weight(a);
      consider_wmin();
    }
    res.lambda *= (1.0 + d0);
    consider_wmin();
    if (checkpoint) checkpoint(LocalFlowCheckpoint{res.lambda, &res.w, &res.hat, res.eta});
  }
  for (std::size_t a = 0; a < net.arcs.size(); ++a) res.w_min.w[a] /= wmin_lambda;
  return res;
}

// Minimum w-weight among h-length s-t paths (the d_w^(h) quantity used by
// the phase invariant); +inf when no such path exists.
inline double min_weight_h_path(const FlowNet& net, Length h, const std::vector<double>& w) {
  auto wt = [&](std::uint32_t a) { return w[a]; };
  auto p = lightest_path_bounded(net, h, nullptr, wt);
  return p.found ? p.weight : std::numeric_limits<double>::infinity();
}

}  // namespace lce
