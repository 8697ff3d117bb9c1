#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <vector>

#include "lce/config.hpp"
#include "lce/covers.hpp"
#include "lce/cutmatch.hpp"
#include "lce/router.hpp"
#include "lce/shortest_paths.hpp"

namespace lce {

// Quality record of a certified expander decomposition. Downstream consumes
// these measured/declared values, never symbolic parameter tables.
struct EdQuality {
  Length sigma = 0;      // landmark distortion
  int b = 1;             // distributed factor of the ball covers
  Length h_cov = 0;      // current covering radius (= separation)
  int omega = 0;         // width record
  int f = 0;             // router update batches so far
  Length h_emb = 0;      // embedding length (monotone record)
  double gamma_emb = 0;  // embedding congestion (monotone record)
};

// Per-operation event log consumed by the sparsifier layers.
struct EdDelta {
  MovingCut cut_new;
  std::vector<VertexId> landmarks_new;
  std::vector<CoverEvent> cover_events;
  std::uint64_t recourse = 0;

  void absorb(const EdDelta& o) {
    cut_new = cut_new.plus(o.cut_new);
    landmarks_new.insert(landmarks_new.end(), o.landmarks_new.begin(), o.landmarks_new.end());
    cover_events.insert(cover_events.end(), o.cover_events.begin(), o.cover_events.end());
    recourse += o.recourse;
  }
};

// The instance ran out of provisioned /3 steps of its length parameter (or a
// router exhausted its update budget); orchestrators reinitialize.
struct BudgetExhausted : Error {
  BudgetExhausted() : Error("BudgetExhausted", "length schedule exhausted") {}
};

// Certified expander decomposition (C, L, N, R, Pi) of a node-weighting on a
// dynamic graph, with the density generalization. Plain instances run the
// same engine with unit densities, ball-cover maintenance and unscaled
// cutmatch sources; dense instances scale sources by the width and index
// router vertices by items.
class CertifiedEd {
 public:
  struct NewVNode {
    VertexId owner = 0;
    VirtualNodeId id = 0;  // 0 = allocate fresh
    std::uint64_t rho = 1;
  };

  CertifiedEd() = default;

  static CertifiedEd init(const Graph& g, const std::vector<NewVNode>& a, Length h_target,
                          double phi, const Params& par, bool dense,
                          const MovingCut* base_cut = nullptr, bool provision = true) {
    CertifiedEd ed;
    ed.par_ = par;
    ed.dense_ = dense;
    ed.phi_ = phi;
    ed.h_target_ = std::max<Length>(h_target, 1);
    ed.g_ = g;
    if (base_cut) ed.base_cut_ = *base_cut;
    ed.q_.h_cov = provision ? par.h_provision(ed.h_target_) : ed.h_target_;
    ed.build_initial(a, ed.q_.h_cov, phi);
    return ed;
  }

  const Graph& graph() const { return g_; }
  const MovingCut& cut() const { return cut_; }
  MovingCut full_cut() const { return base_cut_.plus(cut_); }
  const std::set<VertexId>& landmarks() const { return landmarks_; }
  LandmarkSet landmark_set() const { return LandmarkSet{landmarks_, q_.sigma}; }
  const PairwiseCover& cover() const { return cover_; }
  const VNodeSet& vnodes() const { return vnodes_; }
  std::uint64_t rho_of(VirtualNodeId vn) const { return rho_.at(vn); }
  const EdQuality& quality() const { return q_; }
  Length h_target() const { return h_target_; }
  bool dense() const { return dense_; }
  bool has_budget(int steps = 1) const {
    Length h = q_.h_cov;
    for (int i = 0; i < steps; ++i) h /= 3;
    return h >= h_target_;
  }

  // Declared diameter on G of any co-clustered pair: router diameter times
  // embedding length.
  Length declared_real_diam() const {
    Length rt = 4;
    for (auto& [id, cr] : routers_) rt = std::max(rt, cr.router.declared_hrt());
    return sat_mul(rt, std::max<Length>(q_.h_emb, 1));
  }

  // ---------------------------------------------------------------------
  // operations

  EdDelta insert_node_weighting(const std::vector<NewVNode>& a_new) {
    EdDelta delta;
    consume_h();
    run_insert(a_new, par_.phi_insert, delta);
    return delta;
  }

  EdDelta insert_unit_weighting(const std::vector<VertexId>& vs, std::uint64_t rho) {
    std::vector<NewVNode> a;
    for (VertexId v : vs) a.push_back(NewVNode{v, 0, std::max<std::uint64_t>(rho, 1)});
    return insert_node_weighting(a);
  }

  EdDelta delete_edges(const std::vector<EdgeId>& f) {
    EdDelta delta;
    consume_h();
    cover_.set_journal(&delta.cover_events);

    // router edges whose embedding paths hit F
    std::map<ClusterId, std::vector<Router::Edge>> hits;
    for (EdgeId e : f) {
      auto it = edge_usage_.find(e);
      if (it == edge_usage_.end()) continue;
      for (auto& [cid, redges] : it->second)
        for (auto& re : redges) hits[cid].push_back(Router::Edge{re.first, re.second});
    }
    // prune routers; a virtual node is pruned when at least ceil(rho/mu) of
    // its items are pruned in some cluster
    std::map<VirtualNodeId, std::map<ClusterId, std::uint64_t>> pruned_items;
    std::uint64_t mu = std::uint64_t(std::max(par_.mu(), 2));
    for (auto& [cid, redges] : hits) {
      auto& cr = routers_.at(cid);
      std::vector<Router::Vertex> pruned;
      try {
        pruned = cr.router.delete_edges(redges);
      } catch (const Error& e) {
        if (e.code == "BudgetExceeded") throw BudgetExhausted();
        throw;
      }
      for (Router::Vertex rv : pruned) {
        auto vin = cr.vertex_vnode.find(rv);
        if (vin == cr.vertex_vnode.end()) continue;  // redundant vertex
        pruned_items[vin->second][cid] += 1;
        cr.vnode_vertices[vin->second].erase(rv);
        if (cr.vnode_vertices[vin->second].empty()) cr.vnode_vertices.erase(vin->second);
        cr.vertex_vnode.erase(vin);
      }
      drop_vanished_router_edges(cid);
    }
    q_.f += 1;

    std::set<VirtualNodeId> a_prune;
    for (auto& [vn, per_cluster] : pruned_items) {
      std::uint64_t rho = rho_.at(vn);
      std::uint64_t thr = (rho + mu - 1) / mu;
      for (auto& [cid, cnt] : per_cluster)
        if (cnt >= thr) a_prune.insert(vn);
    }
    // degree-loss retirement, preferring already-pruned virtual nodes
    std::map<VertexId, std::uint64_t> degree_loss;
    for (EdgeId e : f) {
      const EdgeRec& r = g_.edge(e);
      degree_loss[r.u]++;
      degree_loss[r.v]++;
    }
    std::set<VirtualNodeId> retired;
    for (auto& [v, loss] : degree_loss) {
      auto it = vnodes_.nodes.find(v);
      if (it == vnodes_.nodes.end()) continue;
      std::vector<VirtualNodeId> ids = it->second;
      std::sort(ids.begin(), ids.end(), [&](VirtualNodeId x, VirtualNodeId y) {
        bool px = a_prune.count(x), py = a_prune.count(y);
        if (px != py) return px > py;
        return x > y;
      });
      std::uint64_t remaining = loss;
      for (VirtualNodeId vn : ids) {
        if (remaining == 0) break;
        retired.insert(vn);
        --remaining;
      }
    }
    // survivors of partial pruning: lower per-cluster density, rescale rho
    for (auto& [vn, per_cluster] : pruned_items) {
      if (a_prune.count(vn) || retired.count(vn)) continue;
      VertexId v = vnodes_.owner.at(vn);
      for (auto& [cid, cnt] : per_cluster) {
        if (!cover_.live(cid)) continue;
        std::uint64_t cur = cover_.cluster(cid).members.at(v).at(vn);
        cover_.adjust_rho(cid, v, vn, cur - std::min(cur, cnt));
      }
      std::uint64_t rho = rho_.at(vn);
      rho_[vn] = std::max<std::uint64_t>(1, rho - rho / mu);
    }
    // remove pruned + retired virtual nodes everywhere
    std::vector<NewVNode> reinsert;
    for (VirtualNodeId vn : a_prune) {
      VertexId v = vnodes_.owner.at(vn);
      if (!retired.count(vn)) reinsert.push_back(NewVNode{v, vn, rho_.at(vn)});
      remove_vnode_completely(vn);
    }
    for (VirtualNodeId vn : retired) {
      if (a_prune.count(vn)) continue;
      remove_vnode_completely(vn);
    }
    // drop the deleted edges; cut restricted; V(F) become landmarks
    for (EdgeId e : f) {
      const EdgeRec& r = g_.edge(e);
      add_landmark(r.u, delta);
      add_landmark(r.v, delta);
    }
    for (EdgeId e : f) {
      edge_usage_.erase(e);
      g_.remove_edge(e);
    }
    cut_.restrict_to(g_);
    base_cut_.restrict_to(g_);

    run_insert(reinsert, par_.phi_delete, delta);
    return delta;
  }

  EdDelta insert_edges(const std::vector<UnitUpdate>& e_new) {
    EdDelta delta;
    consume_h();
    cover_.set_journal(&delta.cover_events);
    Length h = q_.h_cov;
    std::vector<NewVNode> degree_nodes;
    for (const auto& u : e_new) {
      require(u.edge != 0, "MalformedBatch", "edge insertion must carry a realized id");
      g_.add_edge_with_id(u.edge, u.u, u.v, u.length);
      cut_.add(u.edge, h);
      delta.cut_new.add(u.edge, h);
      add_landmark(u.u, delta);
      add_landmark(u.v, delta);
      degree_nodes.push_back(NewVNode{u.u, 0, 1});
      degree_nodes.push_back(NewVNode{u.v, 0, 1});
    }
    run_insert(degree_nodes, par_.phi_insert, delta);
    return delta;
  }

  EdDelta insert_isolated(const std::vector<std::pair<VertexId, std::uint64_t>>& vs) {
    EdDelta delta;
    cover_.set_journal(&delta.cover_events);
    for (auto& [v, count] : vs) {
      g_.add_vertex_with_id(v);
      if (cover_.num_clusterings() == 0) cover_.add_clustering();
      ClusterId cid = cover_.add_cluster(0);
      for (std::uint64_t i = 0; i < std::max<std::uint64_t>(count, 1); ++i) {
        VirtualNodeId vn = vnodes_.add(v);
        rho_[vn] = 1;
        cover_.insert_vnode(cid, v, vn, 1);
      }
      init_cluster_router(cid);
      if (!dense_) cover_.set_ball_cover(v, {cid});
      delta.recourse += std::max<std::uint64_t>(count, 1);
    }
    cover_.set_journal(nullptr);
    q_.omega = cover_.num_clusterings();
    return delta;
  }

  EdDelta delete_isolated(const std::vector<VertexId>& vs) {
    EdDelta delta;
    cover_.set_journal(&delta.cover_events);
    for (VertexId v : vs) {
      require(g_.has_vertex(v) && g_.degree(v) == 0, "NonIsolatedDeletion", "ed");
      auto it = vnodes_.nodes.find(v);
      if (it != vnodes_.nodes.end()) {
        auto ids = it->second;
        for (VirtualNodeId vn : ids) remove_vnode_completely(vn);
      }
      if (landmarks_.erase(v)) cover_.notify_landmark_removed(v);
      if (!dense_) cover_.clear_ball_cover(v);
      g_.remove_isolated_vertex(v);
      delta.recourse += 1;
    }
    cover_.set_journal(nullptr);
    return delta;
  }

  // Dispatcher over realized pure batches (the maintenance loop).
  EdDelta step(const BatchedUpdate& batch) {
    switch (batch.kind) {
      case UpdateKind::EdgeIns:
        return insert_edges(batch.units);
      case UpdateKind::EdgeDel: {
        std::vector<EdgeId> f;
        for (auto& u : batch.units) f.push_back(u.edge);
        return delete_edges(f);
      }
      case UpdateKind::IsoVertexIns: {
        std::vector<std::pair<VertexId, std::uint64_t>> vs;
        for (auto& u : batch.units) vs.push_back({u.u, std::max<std::uint64_t>(u.weight, 1)});
        return insert_isolated(vs);
      }
      case UpdateKind::IsoVertexDel: {
        std::vector<VertexId> vs;
        for (auto& u : batch.units) vs.push_back(u.u);
        return delete_isolated(vs);
      }
      case UpdateKind::NodeWeightingIns:
      case UpdateKind::TerminalIns: {
        std::vector<NewVNode> a;
        for (auto& u : batch.units)
          for (std::uint64_t i = 0; i < std::max<std::uint64_t>(u.weight, 1); ++i)
            a.push_back(NewVNode{u.u, 0, 1});
        return insert_node_weighting(a);
      }
      default:
        fail("MalformedBatch", "unsupported batch kind for certified-ED");
    }
  }

  // ---------------------------------------------------------------------
  // audits and query helpers

  struct AuditReport {
    CoverReport cover;
    bool landmarks_ok = true;
    bool embedding_ok = true;
    bool bijection_ok = true;
    bool density_ok = true;
    Length measured_h_emb = 0;
    double measured_gamma = 0;
    bool ok() const {
      return cover.ok() && landmarks_ok && embedding_ok && bijection_ok && density_ok;
    }
  };

  AuditReport audit() const {
    AuditReport a;
    MovingCut full = full_cut();
    PairwiseCover check = cover_;
    check.h_cov = q_.h_cov;
    check.h_sep = q_.h_cov;
    a.cover = verify_cover(g_, &full, check, vnodes_);
    a.landmarks_ok = verify_landmarks(g_, cut_, LandmarkSet{landmarks_, q_.sigma});
    std::map<EdgeId, std::uint64_t> load;
    for (auto& [cid, cr] : routers_) {
      for (auto& [key, path] : cr.embed) {
        auto u_it = cr.vertex_vnode.find(key.first);
        auto v_it = cr.vertex_vnode.find(key.second);
        VertexId pu = u_it != cr.vertex_vnode.end() ? vnodes_.owner.at(u_it->second) : 0;
        VertexId pv = v_it != cr.vertex_vnode.end() ? vnodes_.owner.at(v_it->second) : 0;
        Length len = 0;
        for (EdgeId e : path) {
          if (!g_.has_edge(e)) {
            a.embedding_ok = false;
            break;
          }
          len = sat_add(len, g_.edge(e).length);
          load[e]++;
        }
        if (pu != 0 && pv != 0 && !path.empty() && !is_walk(g_, path, pu, pv))
          a.embedding_ok = false;
        if (pu != 0 && pv != 0 && path.empty() && pu != pv) a.embedding_ok = false;
        a.measured_h_emb = std::max(a.measured_h_emb, len);
      }
      std::map<VirtualNodeId, std::uint64_t> counts;
      for (auto& [rv, vn] : cr.vertex_vnode) counts[vn]++;
      const Cluster& cl = cover_.cluster(cid);
      std::map<VirtualNodeId, std::uint64_t> expected;
      for (auto& [v, m] : cl.members)
        for (auto& [vn, rho_s] : m) expected[vn] = rho_s;
      for (auto& [vn, rho_s] : expected) {
        if (counts[vn] != rho_s) a.density_ok = false;
        if (rho_s < rho_.at(vn)) a.density_ok = false;
        if (!dense_ && rho_s != 1) a.density_ok = false;
      }
      for (auto& [vn, cnt] : counts)
        if (!expected.count(vn)) a.bijection_ok = false;
    }
    for (auto& [e, l] : load) a.measured_gamma = std::max(a.measured_gamma, double(l));
    if (a.measured_h_emb > q_.h_emb) a.embedding_ok = false;
    if (a.measured_gamma > q_.gamma_emb + 1e-9) a.embedding_ok = false;
    return a;
  }

  ClusterId shared_cluster(VertexId u, VertexId v) const {
    for (ClusterId cu : cover_.clusters_of_vertex(u))
      if (cover_.membership(cu, v)) return cu;
    return 0;
  }

  // Routes u to v inside a shared cluster: router path plus embeddings.
  bool route_pair(VertexId u, VertexId v, std::vector<EdgeId>* out) const {
    ClusterId shared = shared_cluster(u, v);
    if (shared == 0) return false;
    route_in_cluster(shared, u, v, out);
    return true;
  }

  void route_in_cluster(ClusterId cid, VertexId u, VertexId v, std::vector<EdgeId>* out) const {
    const auto& cr = routers_.at(cid);
    const Cluster& cl = cover_.cluster(cid);
    auto pick = [&](VertexId x) -> Router::Vertex {
      auto it = cl.members.find(x);
      require(it != cl.members.end(), "UnknownVertex", "route_in_cluster");
      for (auto& [vn, rho_s] : it->second) {
        auto vit = cr.vnode_vertices.find(vn);
        if (vit != cr.vnode_vertices.end() && !vit->second.empty())
          return *vit->second.begin();
      }
      fail("RouterDisconnected", "no live router vertex for the vertex");
    };
    Router::Vertex ru = pick(u), rv = pick(v);
    auto rpath = cr.router.path(ru, rv);
    out->clear();
    for (std::size_t i = 0; i + 1 < rpath.size(); ++i) {
      auto key = ordered(rpath[i], rpath[i + 1]);
      auto it = cr.embed.find(key);
      require(it != cr.embed.end(), "EmbeddingMissing", "router edge without a path");
      if (rpath[i] <= rpath[i + 1])
        out->insert(out->end(), it->second.begin(), it->second.end());
      else
        out->insert(out->end(), it->second.rbegin(), it->second.rend());
    }
  }

  // Test hook (Lemma 6.3 executable form): route sampled co-clustered pairs.
  bool sampled_routing_ok(const std::vector<std::pair<VertexId, VertexId>>& pairs,
                          Length* max_len = nullptr, double* max_cong = nullptr) const {
    std::map<EdgeId, double> load;
    Length worst = 0;
    for (auto& [u, v] : pairs) {
      std::vector<EdgeId> walk;
      if (!route_pair(u, v, &walk)) return false;
      Length len = 0;
      for (EdgeId e : walk) {
        len = sat_add(len, g_.edge(e).length);
        load[e] += 1.0;
      }
      if (!walk.empty() && !is_walk(g_, walk, u, v)) return false;
      worst = std::max(worst, len);
    }
    if (max_len) *max_len = worst;
    if (max_cong) {
      *max_cong = 0;
      for (auto& [e, l] : load) *max_cong = std::max(*max_cong, l);
    }
    return true;
  }

  // Thm 6.7: prune a moving cut to a subset with a valid landmark set of
  // distortion sigma while at most halving the length of any long path.
  static std::pair<MovingCut, LandmarkSet> init_landmarks(const Graph& g,
                                                          const MovingCut& base,
                                                          const MovingCut& c, Length sigma,
                                                          const Params& par) {
    MovingCut kept;
    LandmarkSet l;
    l.distortion = sigma;
    MovingCut before = base.plus(c);
    auto len_before = [&](EdgeId e) { return cut_length(g, &before, e); };
    Length h_cov = sigma / 4;
    if (h_cov >= 1) {
      VNodeSet verts = unit_vnodes(g);
      PairwiseCover nc = build_basic_nc(g, verts, h_cov, 1, &before);
      for (auto& [cid, cl] : nc.clusters()) {
        Length total = 0;
        std::vector<EdgeId> internal;
        for (auto& [e, val] : c.cut) {
          const EdgeRec& r = g.edge(e);
          if (cl.members.count(r.u) && cl.members.count(r.v)) {
            internal.push_back(e);
            total = sat_add(total, val);
          }
        }
        Length thr = std::max<Length>(h_cov / 10, 1);
        if (total >= thr) {
          for (EdgeId e : internal)
            if (!kept.cut.count(e)) kept.add(e, c.value(e));
          std::uint64_t d = (2 * internal.size() + std::uint64_t(thr) - 1) / std::uint64_t(thr);
          std::uint64_t added = 0;
          for (auto& [v, m] : cl.members) {
            if (added >= std::max<std::uint64_t>(d, 1)) break;
            l.landmarks.insert(v);
            ++added;
          }
        }
      }
    }
    Length thr2 = std::max<Length>(h_cov / 10, 1);
    for (auto& [e, val] : c.cut) {
      if (len_before(e) >= thr2 && val >= len_before(e) / 10) {
        if (!kept.cut.count(e)) kept.add(e, val);
        l.landmarks.insert(g.edge(e).u);
        l.landmarks.insert(g.edge(e).v);
      }
    }
    return {kept, l};
  }

  std::uint64_t live_rho_total() const {
    std::uint64_t t = 0;
    for (auto& [vn, r] : rho_) t += r;
    return t;
  }

 private:
  struct ClusterRouter {
    Router router;
    std::map<Router::Vertex, VirtualNodeId> vertex_vnode;
    std::map<VirtualNodeId, std::set<Router::Vertex>> vnode_vertices;
    std::map<std::pair<Router::Vertex, Router::Vertex>, std::vector<EdgeId>> embed;
  };

  static std::pair<Router::Vertex, Router::Vertex> ordered(Router::Vertex a, Router::Vertex b) {
    return a <= b ? std::make_pair(a, b) : std::make_pair(b, a);
  }

  void consume_h() {
    if (q_.h_cov / 3 < h_target_) throw BudgetExhausted();
    q_.h_cov /= 3;
    cover_.h_cov = q_.h_cov;
    cover_.h_sep = q_.h_cov;
  }

  void add_landmark(VertexId v, EdDelta& delta) {
    if (!g_.has_vertex(v)) return;
    if (landmarks_.insert(v).second) {
      delta.landmarks_new.push_back(v);
      cover_.notify_landmark_added(v);
    }
  }

  void remove_vnode_completely(VirtualNodeId vn) {
    VertexId v = vnodes_.owner.at(vn);
    auto clusters = cover_.clusters_of_vnode(vn);
    for (ClusterId cid : std::vector<ClusterId>(clusters.begin(), clusters.end())) {
      cover_.remove_vnode(cid, v, vn);
      auto rit = routers_.find(cid);
      if (rit != routers_.end()) {
        auto vit = rit->second.vnode_vertices.find(vn);
        if (vit != rit->second.vnode_vertices.end()) {
          for (Router::Vertex rv : vit->second) rit->second.vertex_vnode.erase(rv);
          rit->second.vnode_vertices.erase(vit);
        }
        if (!cover_.live(cid)) release_router(cid);
      }
    }
    vnodes_.remove(vn);
    rho_.erase(vn);
  }

  void release_router(ClusterId cid) {
    auto it = routers_.find(cid);
    if (it == routers_.end()) return;
    for (auto& [key, path] : it->second.embed)
      for (EdgeId e : path) {
        auto uit = edge_usage_.find(e);
        if (uit == edge_usage_.end()) continue;
        uit->second.erase(cid);
        if (uit->second.empty()) edge_usage_.erase(uit);
      }
    routers_.erase(it);
  }

  void drop_vanished_router_edges(ClusterId cid) {
    auto& cr = routers_.at(cid);
    std::vector<std::pair<Router::Vertex, Router::Vertex>> gone;
    for (auto& [key, path] : cr.embed)
      if (!cr.router.has_edge(key.first, key.second)) gone.push_back(key);
    for (auto& key : gone) {
      for (EdgeId e : cr.embed.at(key)) {
        auto uit = edge_usage_.find(e);
        if (uit == edge_usage_.end()) continue;
        auto cit = uit->second.find(cid);
        if (cit != uit->second.end()) {
          cit->second.erase(key);
          if (cit->second.empty()) uit->second.erase(cit);
        }
        if (uit->second.empty()) edge_usage_.erase(uit);
      }
      cr.embed.erase(key);
    }
  }

  void record_embed(ClusterId cid, Router::Vertex a, Router::Vertex b,
                    std::vector<EdgeId> path) {
    auto key = ordered(a, b);
    auto& cr = routers_.at(cid);
    Length len = 0;
    for (EdgeId e : path) len = sat_add(len, g_.edge(e).length);
    q_.h_emb = std::max(q_.h_emb, len);
    for (EdgeId e : path) {
      edge_usage_[e][cid].insert(key);
      std::uint64_t total = 0;
      for (auto& [c2, set2] : edge_usage_[e]) total += set2.size();
      q_.gamma_emb = std::max(q_.gamma_emb, double(total));
    }
    cr.embed[key] = std::move(path);
  }

  Length embed_budget(Length h) const {
    Length diam = Length(2 + 2 * par_.nc_sep_scale * (par_.nc_beta + 1));
    return sat_mul(sat_mul(diam, 2), std::max<Length>(h, 1));
  }

  void init_cluster_router(ClusterId cid) {
    const Cluster& cl = cover_.cluster(cid);
    ClusterRouter cr;
    std::vector<Router::Vertex> tokens;
    std::map<Router::Vertex, VertexId> owner_of;
    for (auto& [v, m] : cl.members)
      for (auto& [vn, rho_s] : m)
        for (std::uint64_t i = 0; i < rho_s; ++i) {
          Router::Vertex tok = IdPool::next_token();
          tokens.push_back(tok);
          cr.vertex_vnode[tok] = vn;
          cr.vnode_vertices[vn].insert(tok);
          owner_of[tok] = v;
        }
    cr.router = Router::init(tokens, par_.router_b, par_.ed_t_local(), par_.router_prune_denom);
    routers_[cid] = std::move(cr);

    auto& crr = routers_.at(cid);
    MovingCut metric = full_cut();
    Length budget = embed_budget(q_.h_cov);
    std::int64_t cap = std::max<std::int64_t>(1, std::int64_t(std::ceil(1.0 / phi_)));
    std::map<EdgeId, std::int64_t> used;
    for (auto& e : crr.router.edges()) {
      VertexId pu = owner_of.at(e.first), pv = owner_of.at(e.second);
      if (pu == pv) {
        record_embed(cid, e.first, e.second, {});
        continue;
      }
      std::vector<EdgeId> path;
      for (int attempt = 0;; ++attempt) {
        if (greedy_path(pu, pv, metric, budget, cap, used, &path)) break;
        require(attempt < 60, "EmbeddingFailed", "could not embed a router edge");
        if (attempt >= 2)
          budget = sat_mul(budget, 2);
        else
          cap *= 2;
      }
      for (EdgeId e2 : path) used[e2]++;
      record_embed(cid, e.first, e.second, std::move(path));
    }
  }

  bool greedy_path(VertexId s, VertexId t, const MovingCut& metric, Length budget,
                   std::int64_t cap, const std::map<EdgeId, std::int64_t>& used,
                   std::vector<EdgeId>* out) const {
    std::map<VertexId, Length> dist;
    std::map<VertexId, EdgeId> par;
    using Item = std::pair<Length, VertexId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
    dist[s] = 0;
    pq.push({0, s});
    while (!pq.empty()) {
      auto [d, v] = pq.top();
      pq.pop();
      if (d != dist.at(v)) continue;
      if (v == t) break;
      for (EdgeId e : g_.incident(v)) {
        auto uit = used.find(e);
        if (uit != used.end() && uit->second >= cap) continue;
        Length nd = sat_add(d, cut_length(g_, &metric, e));
        if (nd > budget) continue;
        VertexId w = g_.edge(e).other(v);
        auto it = dist.find(w);
        if (it == dist.end() || nd < it->second) {
          dist[w] = nd;
          par[w] = e;
          pq.push({nd, w});
        }
      }
    }
    if (!dist.count(t)) return false;
    out->clear();
    VertexId cur = t;
    while (cur != s) {
      EdgeId e = par.at(cur);
      out->push_back(e);
      cur = g_.edge(e).other(cur);
    }
    std::reverse(out->begin(), out->end());
    return true;
  }

  // ---------------------------------------------------------------------
  // initialization: witnessed-ED substitute, landmark pruning, separated
  // cover, routers, embedding

  void register_vnode(const NewVNode& nv, VirtualNodeId vn) {
    vnodes_.nodes[nv.owner].push_back(vn);
    vnodes_.owner[vn] = nv.owner;
    rho_[vn] = dense_ ? std::max<std::uint64_t>(nv.rho, 1) : 1;
  }

  void build_initial(const std::vector<NewVNode>& a, Length h, double phi) {
    for (auto& nv : a) {
      require(g_.has_vertex(nv.owner), "UnknownVertex", "init node-weighting");
      VirtualNodeId vn = nv.id != 0 ? nv.id : IdPool::next_virtual_node();
      register_vnode(nv, vn);
    }
    // witnessed-ED substitute: cut congested edges until a separated cover
    // admits a greedy embedding within the budget
    MovingCut c_wit = base_cut_;
    std::int64_t cap = std::max<std::int64_t>(1, std::int64_t(std::ceil(1.0 / phi)));
    for (int round = 0; round < 9; ++round) {
      PairwiseCover trial = build_separated_nc(g_, vnodes_, h, par_, &c_wit);
      std::map<EdgeId, std::int64_t> used;
      bool ok = true;
      Length budget = embed_budget(h);
      std::set<EdgeId> blocked;
      for (auto& [cid, cl] : trial.clusters()) {
        std::vector<VertexId> mem;
        for (auto& [v, m] : cl.members) mem.push_back(v);
        for (std::size_t i = 1; i < mem.size() && ok; ++i) {
          std::vector<EdgeId> path;
          std::uint64_t copies = cl.rho_of_vertex(mem[i]);
          for (std::uint64_t cpy = 0; cpy < copies && ok; ++cpy) {
            if (!greedy_path(mem[0], mem[i], c_wit, budget, cap, used, &path)) {
              ok = false;
              for (auto& [e, cnt] : used)
                if (cnt >= cap) blocked.insert(e);
            } else {
              for (EdgeId e : path) used[e]++;
            }
          }
        }
        if (!ok) break;
      }
      if (ok || blocked.empty()) break;
      for (EdgeId e : blocked) c_wit.add(e, h);
    }

    MovingCut c_wit_only;
    for (auto& [e, v] : c_wit.cut) {
      Length extra = v - base_cut_.value(e);
      if (extra > 0) c_wit_only.add(e, extra);
    }
    Length sigma = Length(std::floor(double(h) / par_.kappa_sigma));
    auto [kept, lm] = init_landmarks(g_, base_cut_, c_wit_only, sigma, par_);
    cut_ = kept;
    landmarks_ = lm.landmarks;
    q_.sigma = lm.distortion;

    MovingCut full = full_cut();
    cover_ = build_separated_nc(g_, vnodes_, h, par_, &full);
    cover_.h_cov = h;
    cover_.h_sep = h;
    cover_.set_landmarks(landmarks_);
    q_.b = 1;
    q_.omega = cover_.num_clusterings();
    q_.f = 0;
    // dense covers carry rho_S; the separated construction inserted unit
    // densities, so lift them to rho
    if (dense_) {
      for (auto& [cid, cl] : cover_.clusters())
        for (auto& [v, m] : cl.members)
          for (auto& [vn, rho_s] : m)
            if (rho_s != rho_.at(vn)) cover_.adjust_rho(cid, v, vn, rho_.at(vn));
    }
    std::vector<ClusterId> ids;
    for (auto& [cid, cl] : cover_.clusters()) ids.push_back(cid);
    for (ClusterId cid : ids) init_cluster_router(cid);
  }

  // Node-weighting insertion (the shared engine for direct inserts, edge
  // insertion, and the reinsertion step of edge deletion).
  void run_insert(const std::vector<NewVNode>& a_new_in, double phi, EdDelta& delta) {
    cover_.set_journal(&delta.cover_events);
    std::vector<NewVNode> a_new;
    std::set<VirtualNodeId> new_ids;
    for (auto& nv : a_new_in) {
      NewVNode c = nv;
      if (c.id == 0) c.id = IdPool::next_virtual_node();
      if (!dense_) c.rho = 1;
      register_vnode(c, c.id);
      new_ids.insert(c.id);
      a_new.push_back(c);
    }
    if (a_new.empty()) {
      q_.b += 1;
      q_.f += 1;
      cover_.set_journal(nullptr);
      return;
    }
    Length h_cm = q_.h_cov;
    std::uint64_t omega = std::max<std::uint64_t>(1, std::uint64_t(cover_.num_clusterings()));
    std::uint64_t scale = dense_ ? omega : 1;

    std::map<VertexId, std::uint64_t> src;
    for (auto& nv : a_new) src[nv.owner] += scale * (dense_ ? nv.rho : 1);
    std::map<VertexId, std::uint64_t> sink;
    for (auto& [vn, r] : rho_)
      if (!new_ids.count(vn)) sink[vnodes_.owner.at(vn)] += dense_ ? r : 1;

    MovingCut metric = full_cut();
    CutmatchResult cm = cutmatch(g_, &metric, src, sink, h_cm, phi, par_);
    delta.cut_new = delta.cut_new.plus(cm.cut);
    cut_ = cut_.plus(cm.cut);
    q_.sigma = sat_add(q_.sigma, cm.landmarks.distortion);
    for (VertexId v : cm.landmarks.landmarks) add_landmark(v, delta);

    // canonical unit orders on both sides
    std::map<VertexId, std::vector<std::pair<VirtualNodeId, std::uint64_t>>> sink_slots;
    for (auto& [v, ids] : vnodes_.nodes) {
      auto& slots = sink_slots[v];
      for (VirtualNodeId vn : ids) {
        if (new_ids.count(vn)) continue;
        std::uint64_t r = dense_ ? rho_.at(vn) : 1;
        for (std::uint64_t k = 0; k < r; ++k) slots.push_back({vn, k});
      }
    }
    std::map<VertexId, std::vector<VirtualNodeId>> src_units;
    for (auto& nv : a_new)
      for (std::uint64_t c = 0; c < scale * (dense_ ? nv.rho : 1); ++c)
        src_units[nv.owner].push_back(nv.id);
    std::map<VertexId, std::uint64_t> src_used, sink_used;

    struct Pending {
      Router::Vertex sink_rv;
      std::vector<EdgeId> path;
    };
    std::map<ClusterId, std::map<VirtualNodeId, std::vector<Pending>>> pend;
    for (auto& unit : cm.matching) {
      auto& su = src_units[unit.src];
      require(src_used[unit.src] < su.size(), "CutmatchInternal", "src unit overflow");
      VirtualNodeId src_vn = su[src_used[unit.src]++];
      auto& sl = sink_slots[unit.sink];
      require(sink_used[unit.sink] < sl.size(), "CutmatchInternal", "sink slot overflow");
      auto [sink_vn, item] = sl[sink_used[unit.sink]++];
      for (ClusterId cid : cover_.clusters_of_vnode(sink_vn)) {
        auto& cr = routers_.at(cid);
        auto vit = cr.vnode_vertices.find(sink_vn);
        if (vit == cr.vnode_vertices.end() || vit->second.size() <= item) continue;
        auto rvit = vit->second.begin();
        std::advance(rvit, item);
        pend[cid][src_vn].push_back(Pending{*rvit, unit.path});
      }
    }
    std::map<VirtualNodeId, std::uint64_t> rho_new_of;
    for (auto& nv : a_new) rho_new_of[nv.id] = dense_ ? nv.rho : 1;
    for (auto& [cid, by_vn] : pend) {
      std::vector<Router::Edge> medges;
      std::vector<std::pair<Router::Vertex, const Pending*>> fresh;
      for (auto& [vn, units] : by_vn) {
        if (units.size() < rho_new_of.at(vn)) continue;
        int k = cover_.cluster(cid).clustering;
        VertexId owner = vnodes_.owner.at(vn);
        bool conflict = false;
        for (ClusterId other : cover_.clusters_of_vertex(owner))
          if (other != cid && cover_.cluster(other).clustering == k) conflict = true;
        if (conflict && !cover_.cluster(cid).members.count(owner)) continue;
        bool present = cover_.cluster(cid).members.count(owner) &&
                       cover_.cluster(cid).members.at(owner).count(vn);
        if (!present) cover_.insert_vnode(cid, owner, vn, units.size());
        auto& cr = routers_.at(cid);
        for (auto& p : units) {
          Router::Vertex tok = IdPool::next_token();
          cr.vertex_vnode[tok] = vn;
          cr.vnode_vertices[vn].insert(tok);
          medges.push_back(Router::Edge{p.sink_rv, tok});
          fresh.push_back({tok, &p});
        }
      }
      if (medges.empty()) continue;
      auto& cr = routers_.at(cid);
      try {
        cr.router.insert_matching(medges);
      } catch (const Error& e) {
        if (e.code == "BudgetExceeded") throw BudgetExhausted();
        throw;
      }
      for (auto& [tok, p] : fresh)
        record_embed(cid, p->sink_rv, tok, p->path);
    }
    q_.f += 1;

    // fresh local decomposition over the region untouched by unmatched sinks
    std::set<VertexId> sink_u;
    for (auto& [v, c] : cm.sink_unmatched)
      if (c > 0) sink_u.insert(v);
    std::set<VertexId> touched;
    for (auto& nv : a_new) touched.insert(nv.owner);
    for (auto& [v, c] : cm.sink_matched)
      if (c > 0) touched.insert(v);
    for (auto& [v, c] : cm.sink_sat_remainder)
      if (c > 0) touched.insert(v);
    std::set<VirtualNodeId> a2;
    for (auto& [vn, r] : rho_) {
      VertexId v = vnodes_.owner.at(vn);
      if (!sink_u.count(v) && touched.count(v)) a2.insert(vn);
    }
    if (!a2.empty()) {
      std::set<VertexId> owners;
      for (VirtualNodeId vn : a2) owners.insert(vnodes_.owner.at(vn));
      Graph local(g_.max_len());
      for (VertexId v : owners) local.add_vertex_with_id(v);
      MovingCut local_base;
      MovingCut full = full_cut();
      for (auto& [e, rec] : g_.edges())
        if (owners.count(rec.u) && owners.count(rec.v)) {
          local.add_edge_with_id(e, rec.u, rec.v, rec.length);
          Length extra = full.value(e);
          if (extra > 0) local_base.add(e, extra);
        }
      std::vector<NewVNode> local_a;
      for (VirtualNodeId vn : a2)
        local_a.push_back(NewVNode{vnodes_.owner.at(vn), vn, rho_.at(vn)});
      CertifiedEd sub;
      sub.par_ = par_;
      sub.dense_ = dense_;
      sub.phi_ = phi;
      sub.h_target_ = std::max<Length>(h_cm, 1);
      sub.g_ = local;
      sub.base_cut_ = local_base;
      sub.q_.h_cov = std::max<Length>(h_cm, 1);
      sub.build_initial(local_a, sub.q_.h_cov, phi);
      merge_sub(sub, delta);
    }

    if (!dense_) rebuild_ball_covers(a_new, cm);
    q_.b += 1;
    q_.omega = cover_.num_clusterings();
    cover_.set_journal(nullptr);
    delta.recourse += delta.cover_events.size();
  }

  void merge_sub(CertifiedEd& sub, EdDelta& delta) {
    cut_ = cut_.plus(sub.cut_);
    delta.cut_new = delta.cut_new.plus(sub.cut_);
    for (VertexId v : sub.landmarks_) add_landmark(v, delta);
    q_.sigma = sat_add(q_.sigma, sub.q_.sigma);
    cover_.absorb(sub.cover_);
    for (auto& [cid, cr] : sub.routers_) {
      routers_[cid] = cr;
      for (auto& [key, path] : cr.embed) {
        Length len = 0;
        for (EdgeId e : path) {
          edge_usage_[e][cid].insert(key);
          len = sat_add(len, g_.edge(e).length);
        }
        q_.h_emb = std::max(q_.h_emb, len);
      }
    }
    for (auto& [e, per] : edge_usage_) {
      std::uint64_t total = 0;
      for (auto& [c, s] : per) total += s.size();
      q_.gamma_emb = std::max(q_.gamma_emb, double(total));
    }
    sub_ball_covers_ = sub.cover_.all_ball_covers();
  }

  // plain-mode ball covers after a composition, by the case analysis at
  // vertex granularity
  void rebuild_ball_covers(const std::vector<NewVNode>& a_new, const CutmatchResult& cm) {
    std::map<VertexId, VertexId> partner;
    for (auto& unit : cm.matching)
      if (!partner.count(unit.src)) partner[unit.src] = unit.sink;
    std::set<VertexId> new_vertices;
    for (auto& nv : a_new) new_vertices.insert(nv.owner);

    auto clean_set = [&](std::vector<ClusterId> bc, VertexId v) {
      std::vector<ClusterId> clean;
      for (ClusterId id : bc)
        if (cover_.live(id) && cover_.cluster(id).members.count(v)) clean.push_back(id);
      std::sort(clean.begin(), clean.end());
      clean.erase(std::unique(clean.begin(), clean.end()), clean.end());
      return clean;
    };
    for (VertexId v : new_vertices) {
      std::vector<ClusterId> bc;
      if (const auto* own = cover_.ball_cover(v)) bc = *own;
      auto pit = partner.find(v);
      if (pit != partner.end() && pit->second != v) {
        const auto* pb = cover_.ball_cover(pit->second);
        if (pb) bc.insert(bc.end(), pb->begin(), pb->end());
      }
      auto sit = sub_ball_covers_.find(v);
      if (sit != sub_ball_covers_.end()) bc.insert(bc.end(), sit->second.begin(), sit->second.end());
      auto clean = clean_set(bc, v);
      if (!clean.empty()) cover_.set_ball_cover(v, clean);
    }
    for (auto& [v, bcsub] : sub_ball_covers_) {
      if (new_vertices.count(v)) continue;
      std::vector<ClusterId> bc;
      if (const auto* old = cover_.ball_cover(v)) bc = *old;
      bc.insert(bc.end(), bcsub.begin(), bcsub.end());
      auto clean = clean_set(bc, v);
      if (!clean.empty()) cover_.set_ball_cover(v, clean);
    }
    sub_ball_covers_.clear();
  }

  Params par_;
  bool dense_ = false;
  double phi_ = 0.125;
  Length h_target_ = 1;
  Graph g_;
  MovingCut base_cut_;
  MovingCut cut_;
  std::set<VertexId> landmarks_;
  VNodeSet vnodes_;
  std::map<VirtualNodeId, std::uint64_t> rho_;
  PairwiseCover cover_;
  std::map<ClusterId, ClusterRouter> routers_;
  std::map<EdgeId, std::map<ClusterId, std::set<std::pair<Router::Vertex, Router::Vertex>>>>
      edge_usage_;
  std::map<VertexId, std::vector<ClusterId>> sub_ball_covers_;
  EdQuality q_;
};

// Lemma 7.7: inserts newly created landmarks into the shared node-weighting
// of a family of dense decompositions, iterating until the frontier empties.
struct ClosureResult {
  int iterations = 0;
  bool capped = false;
  std::vector<VertexId> inserted;
};

inline ClosureResult insert_landmarks_closure(std::vector<CertifiedEd*> eds,
                                              const std::vector<std::set<VertexId>>& l_star,
                                              double phi, const Params& par,
                                              std::vector<EdDelta>* deltas = nullptr) {
  ClosureResult res;
  std::set<VertexId> known;
  for (auto* ed : eds)
    for (VertexId v : ed->landmarks()) known.insert(v);
  std::set<VertexId> frontier;
  for (auto& ls : l_star) frontier.insert(ls.begin(), ls.end());
  std::uint64_t rho = std::uint64_t(std::max(1.0, std::ceil(1.0 / phi)));
  while (!frontier.empty()) {
    if (res.iterations >= par.insert_lm_cap) {
      res.capped = true;
      break;
    }
    ++res.iterations;
    std::vector<VertexId> batch(frontier.begin(), frontier.end());
    res.inserted.insert(res.inserted.end(), batch.begin(), batch.end());
    for (VertexId v : batch) known.insert(v);
    std::set<VertexId> next;
    for (std::size_t j = 0; j < eds.size(); ++j) {
      EdDelta d = eds[j]->insert_unit_weighting(batch, rho);
      for (VertexId v : d.landmarks_new)
        if (!known.count(v)) next.insert(v);
      if (deltas) (*deltas)[j].absorb(d);
    }
    frontier = next;
  }
  return res;
}

}  // namespace lce
