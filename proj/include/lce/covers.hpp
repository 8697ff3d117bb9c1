#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "lce/config.hpp"
#include "lce/shortest_paths.hpp"

namespace lce {

// Virtual nodes: each vertex owns a list of them. Covers cluster virtual
// nodes; distances between virtual nodes are distances between owners.
struct VNodeSet {
  std::map<VertexId, std::vector<VirtualNodeId>> nodes;
  std::map<VirtualNodeId, VertexId> owner;

  VirtualNodeId add(VertexId v) {
    VirtualNodeId id = IdPool::next_virtual_node();
    nodes[v].push_back(id);
    owner[id] = v;
    return id;
  }
  void remove(VirtualNodeId id) {
    auto it = owner.find(id);
    require(it != owner.end(), "UnknownVirtualNode", "remove");
    auto& vec = nodes[it->second];
    vec.erase(std::find(vec.begin(), vec.end(), id));
    if (vec.empty()) nodes.erase(it->second);
    owner.erase(it);
  }
  std::uint64_t count(VertexId v) const {
    auto it = nodes.find(v);
    return it == nodes.end() ? 0 : it->second.size();
  }
  std::uint64_t total() const { return owner.size(); }
};

inline VNodeSet unit_vnodes(const Graph& g) {
  VNodeSet s;
  for (auto& [v, _] : g.vertices()) s.add(v);
  return s;
}

struct CoverEvent {
  ClusterId cluster = 0;
  int clustering = -1;
  VertexId vertex = 0;
  VirtualNodeId vnode = 0;
  bool insert = true;
  bool vertex_level = false;  // first vnode of the vertex in / last out
};

// Journal pointers are transient (set around one operation); copies of a
// cover never inherit them.
struct JournalPtr {
  std::vector<CoverEvent>* p = nullptr;
  JournalPtr() = default;
  JournalPtr(const JournalPtr&) {}
  JournalPtr& operator=(const JournalPtr&) {
    p = nullptr;
    return *this;
  }
};

struct RecourseLog {
  std::uint64_t insertions = 0;
  std::uint64_t deletions = 0;
  std::uint64_t total() const { return insertions + deletions; }
};

struct Cluster {
  ClusterId id = 0;
  int clustering = -1;
  // vnode -> item multiplicity (rho_S); 1 everywhere for unit-dense covers
  std::map<VertexId, std::map<VirtualNodeId, std::uint64_t>> members;
  std::set<VertexId> landmarks_in;  // S cap L, kept sorted for l_vertex

  bool empty() const { return members.empty(); }
  std::uint64_t vnode_count() const {
    std::uint64_t c = 0;
    for (auto& [v, m] : members) c += m.size();
    return c;
  }
  std::uint64_t rho_of_vertex(VertexId v) const {
    auto it = members.find(v);
    if (it == members.end()) return 0;
    std::uint64_t r = 0;
    for (auto& [vn, rho] : it->second) r += rho;
    return r;
  }
};

// Pairwise/neighborhood cover with the constant-time access interfaces:
// a per-vertex array indexed by clustering id and a per-cluster landmark BST.
class PairwiseCover {
 public:
  Length h_cov = 0;
  Length h_sep = 0;
  int distributed_b = 1;

  int add_clustering() {
    clusterings_.emplace_back();
    return int(clusterings_.size()) - 1;
  }
  int num_clusterings() const { return int(clusterings_.size()); }

  ClusterId add_cluster(int clustering) {
    require(clustering >= 0 && clustering < num_clusterings(), "BadClustering", "");
    ClusterId id = IdPool::next_cluster();
    Cluster c;
    c.id = id;
    c.clustering = clustering;
    clusters_[id] = std::move(c);
    clusterings_[clustering].push_back(id);
    return id;
  }

  const Cluster& cluster(ClusterId id) const {
    auto it = clusters_.find(id);
    require(it != clusters_.end(), "StaleClusterId", "cluster was removed");
    return it->second;
  }
  bool live(ClusterId id) const { return clusters_.count(id) != 0; }
  const std::map<ClusterId, Cluster>& clusters() const { return clusters_; }
  const std::vector<ClusterId>& clustering(int k) const { return clusterings_[k]; }

  void insert_vnode(ClusterId id, VertexId v, VirtualNodeId vn, std::uint64_t rho = 1) {
    Cluster& c = mutable_cluster(id);
    bool vertex_new = !c.members.count(v);
    if (vertex_new) {
      auto& slot = vertex_slot_[v];
      if (int(slot.size()) <= c.clustering) slot.resize(c.clustering + 1, 0);
      require(slot[c.clustering] == 0, "ClusteringConflict",
              "vertex already in another cluster of this clustering");
      slot[c.clustering] = id;
      if (landmarks_.count(v)) c.landmarks_in.insert(v);
    }
    auto [it, fresh] = c.members[v].emplace(vn, rho);
    require(fresh, "DuplicateVirtualNode", "vnode already in cluster");
    vnode_clusters_[vn].insert(id);
    recourse_.insertions++;
    if (journal_.p) journal_.p->push_back({id, c.clustering, v, vn, true, vertex_new});
  }

  void remove_vnode(ClusterId id, VertexId v, VirtualNodeId vn) {
    Cluster& c = mutable_cluster(id);
    auto vit = c.members.find(v);
    require(vit != c.members.end() && vit->second.count(vn), "UnknownVirtualNode",
            "remove_vnode");
    vit->second.erase(vn);
    bool vertex_gone = vit->second.empty();
    if (vertex_gone) {
      c.members.erase(vit);
      vertex_slot_[v][c.clustering] = 0;
      c.landmarks_in.erase(v);
    }
    auto& vc = vnode_clusters_[vn];
    vc.erase(id);
    if (vc.empty()) vnode_clusters_.erase(vn);
    recourse_.deletions++;
    if (journal_.p) journal_.p->push_back({id, c.clustering, v, vn, false, vertex_gone});
    if (c.empty()) drop_cluster(id);
  }

  // Removes a virtual node from every cluster containing it.
  void remove_vnode_everywhere(VertexId v, VirtualNodeId vn) {
    auto it = vnode_clusters_.find(vn);
    if (it == vnode_clusters_.end()) return;
    auto ids = it->second;
    for (ClusterId id : ids) remove_vnode(id, v, vn);
  }

  void drop_cluster(ClusterId id) {
    auto it = clusters_.find(id);
    require(it != clusters_.end(), "StaleClusterId", "drop_cluster");
    Cluster& c = it->second;
    auto members = c.members;
    for (auto& [v, m] : members)
      for (auto& [vn, rho] : m) remove_vnode(id, v, vn);
    it = clusters_.find(id);
    if (it != clusters_.end()) {
      auto& list = clusterings_[it->second.clustering];
      list.erase(std::find(list.begin(), list.end(), id));
      clusters_.erase(it);
    }
  }

  void adjust_rho(ClusterId id, VertexId v, VirtualNodeId vn, std::uint64_t rho) {
    mutable_cluster(id).members.at(v).at(vn) = rho;
  }

  // O(1) membership: look at the slot of v for the cluster's clustering.
  bool membership(ClusterId id, VertexId v) const {
    const Cluster& c = cluster(id);
    auto it = vertex_slot_.find(v);
    if (it == vertex_slot_.end()) return false;
    if (int(it->second.size()) <= c.clustering) return false;
    return it->second[c.clustering] == id;
  }

  // Returns an arbitrary vertex in S cap L, or 0 when the intersection is
  // empty (vertex ids start at 1).
  VertexId l_vertex(ClusterId id) const {
    const Cluster& c = cluster(id);
    return c.landmarks_in.empty() ? 0 : *c.landmarks_in.begin();
  }

  // The cover keeps its own copy of the landmark set so that the per-cluster
  // BSTs behind l_vertex stay current and the structure remains a value.
  void set_landmarks(const std::set<VertexId>& l) {
    landmarks_ = l;
    for (auto& [id, c] : clusters_) {
      c.landmarks_in.clear();
      for (auto& [v, m] : c.members)
        if (landmarks_.count(v)) c.landmarks_in.insert(v);
    }
  }
  void notify_landmark_added(VertexId v) {
    landmarks_.insert(v);
    auto it = vertex_slot_.find(v);
    if (it == vertex_slot_.end()) return;
    for (ClusterId id : it->second)
      if (id != 0 && clusters_.count(id)) clusters_[id].landmarks_in.insert(v);
  }
  void notify_landmark_removed(VertexId v) {
    landmarks_.erase(v);
    auto it = vertex_slot_.find(v);
    if (it == vertex_slot_.end()) return;
    for (ClusterId id : it->second)
      if (id != 0 && clusters_.count(id)) clusters_[id].landmarks_in.erase(v);
  }

  const std::set<ClusterId>& clusters_of_vnode(VirtualNodeId vn) const {
    static const std::set<ClusterId> kEmpty;
    auto it = vnode_clusters_.find(vn);
    return it == vnode_clusters_.end() ? kEmpty : it->second;
  }
  std::vector<ClusterId> clusters_of_vertex(VertexId v) const {
    std::vector<ClusterId> out;
    auto it = vertex_slot_.find(v);
    if (it == vertex_slot_.end()) return out;
    for (ClusterId id : it->second)
      if (id != 0) out.push_back(id);
    return out;
  }

  void set_ball_cover(VertexId v, std::vector<ClusterId> bc) { ball_cover_[v] = std::move(bc); }
  void clear_ball_cover(VertexId v) { ball_cover_.erase(v); }
  const std::vector<ClusterId>* ball_cover(VertexId v) const {
    auto it = ball_cover_.find(v);
    return it == ball_cover_.end() ? nullptr : &it->second;
  }
  const std::map<VertexId, std::vector<ClusterId>>& all_ball_covers() const {
    return ball_cover_;
  }

  // Appends another cover's clusterings to this one, preserving cluster ids
  // (ids are globally unique). Journals every membership as an insertion.
  void absorb(const PairwiseCover& other) {
    for (int k = 0; k < other.num_clusterings(); ++k) {
      int nk = add_clustering();
      for (ClusterId id : other.clustering(k)) {
        const Cluster& c = other.cluster(id);
        Cluster copy;
        copy.id = id;
        copy.clustering = nk;
        clusters_[id] = copy;
        clusterings_[nk].push_back(id);
        for (auto& [v, m] : c.members)
          for (auto& [vn, rho] : m) {
            Cluster& mine = clusters_[id];
            bool vertex_new = !mine.members.count(v);
            if (vertex_new) {
              auto& slot = vertex_slot_[v];
              if (int(slot.size()) <= nk) slot.resize(nk + 1, 0);
              require(slot[nk] == 0, "ClusteringConflict", "absorb");
              slot[nk] = id;
              if (landmarks_.count(v)) mine.landmarks_in.insert(v);
            }
            mine.members[v][vn] = rho;
            vnode_clusters_[vn].insert(id);
            recourse_.insertions++;
            if (journal_.p) journal_.p->push_back({id, nk, v, vn, true, vertex_new});
          }
      }
    }
  }

  void set_journal(std::vector<CoverEvent>* j) { journal_.p = j; }
  const RecourseLog& recourse() const { return recourse_; }
  void reset_recourse() { recourse_ = RecourseLog{}; }

  std::uint64_t size() const {
    std::uint64_t s = 0;
    for (auto& [id, c] : clusters_) s += c.vnode_count();
    return s;
  }

  std::string dump() const {
    std::ostringstream os;
    for (int k = 0; k < num_clusterings(); ++k)
      for (ClusterId id : clusterings_[k]) {
        os << k << " " << id << ":";
        for (auto& [v, m] : clusters_.at(id).members) os << " " << v;
        os << "\n";
      }
    return os.str();
  }

 private:
  Cluster& mutable_cluster(ClusterId id) {
    auto it = clusters_.find(id);
    require(it != clusters_.end(), "StaleClusterId", "mutation on removed cluster");
    return it->second;
  }

  std::vector<std::vector<ClusterId>> clusterings_;
  std::map<ClusterId, Cluster> clusters_;
  std::map<VertexId, std::vector<ClusterId>> vertex_slot_;
  std::map<VirtualNodeId, std::set<ClusterId>> vnode_clusters_;
  std::map<VertexId, std::vector<ClusterId>> ball_cover_;
  std::set<VertexId> landmarks_;
  JournalPtr journal_;
  RecourseLog recourse_;
};

// ---------------------------------------------------------------------------
// Cover verification (the brute-force arbiter for all cover contracts)

struct CoverReport {
  bool cov_ok = true;
  bool sep_ok = true;
  bool ball_ok = true;
  bool all_covered = true;
  bool disjoint_ok = true;
  Length diameter = 0;
  int width = 0;

  bool ok() const { return cov_ok && sep_ok && ball_ok && all_covered && disjoint_ok; }
};

inline CoverReport verify_cover(const Graph& g, const MovingCut* cut,
                                const PairwiseCover& cover, const VNodeSet& a) {
  CoverReport rep;
  rep.width = cover.num_clusterings();

  std::vector<VertexId> verts;
  for (auto& [v, _] : a.nodes)
    if (g.has_vertex(v)) verts.push_back(v);
  std::map<VertexId, DijkstraResult> sp;
  for (VertexId v : verts) sp[v] = dijkstra(g, v, cut);
  auto dist = [&](VertexId u, VertexId v) { return u == v ? 0 : sp.at(u).at(v); };

  // every virtual node appears somewhere, and owners agree
  for (auto& [vn, owner] : a.owner) {
    if (cover.clusters_of_vnode(vn).empty()) rep.all_covered = false;
  }

  // covering radius (vertex level suffices: clusters contain whole vnodes and
  // a pair of virtual nodes is covered iff some cluster holds both)
  for (VertexId x : verts)
    for (VertexId y : verts) {
      if (y < x) continue;
      if (dist(x, y) > cover.h_cov) continue;
      for (VirtualNodeId vx : a.nodes.at(x))
        for (VirtualNodeId vy : a.nodes.at(y)) {
          bool shared = false;
          const auto& cx = cover.clusters_of_vnode(vx);
          const auto& cy = cover.clusters_of_vnode(vy);
          for (ClusterId id : cx)
            if (vx == vy || cy.count(id)) {
              shared = true;
              break;
            }
          if (!shared) rep.cov_ok = false;
        }
    }

  // separation + diameter + intra-clustering disjointness
  for (int k = 0; k < cover.num_clusterings(); ++k) {
    const auto& ids = cover.clustering(k);
    std::map<VertexId, ClusterId> seen;
    for (ClusterId id : ids) {
      const Cluster& c = cover.cluster(id);
      for (auto& [v, m] : c.members) {
        auto [it, fresh] = seen.emplace(v, id);
        if (!fresh && it->second != id) rep.disjoint_ok = false;
      }
    }
    for (std::size_t i = 0; i < ids.size(); ++i)
      for (std::size_t j = i + 1; j < ids.size(); ++j)
        for (auto& [x, mx] : cover.cluster(ids[i]).members)
          for (auto& [y, my] : cover.cluster(ids[j]).members)
            if (dist(x, y) <= cover.h_sep) rep.sep_ok = false;
  }
  for (auto& [id, c] : cover.clusters()) {
    for (auto& [x, mx] : c.members)
      for (auto& [y, my] : c.members)
        if (x != y && sp.count(x) && sp.count(y))
          rep.diameter = std::max(rep.diameter, dist(x, y));
  }

  // ball covers
  for (auto& [v, bc] : cover.all_ball_covers()) {
    if (!g.has_vertex(v) || !a.nodes.count(v)) continue;
    for (ClusterId id : bc)
      if (!cover.live(id) || !cover.cluster(id).members.count(v)) rep.ball_ok = false;
    for (VertexId u : verts) {
      if (dist(v, u) > cover.h_cov) continue;
      for (VirtualNodeId vn : a.nodes.at(u)) {
        bool inside = false;
        for (ClusterId id : bc) {
          if (!cover.live(id)) continue;
          auto it = cover.cluster(id).members.find(u);
          if (it != cover.cluster(id).members.end() && it->second.count(vn)) {
            inside = true;
            break;
          }
        }
        if (!inside) rep.ball_ok = false;
      }
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Constructions

// Sparse neighborhood cover by iterative region-growing ball carving.
// Covering radius h, diameter <= 2(beta+1)h <= nc_diam_const*beta*h, width
// measured (verify_cover is the arbiter). Every vertex gets a designated
// ball-cover cluster containing its full h-ball.
inline PairwiseCover build_basic_nc(const Graph& g, const VNodeSet& a, Length h, int beta,
                                    const MovingCut* cut = nullptr) {
  PairwiseCover cover;
  cover.h_cov = h;
  cover.h_sep = 0;
  cover.distributed_b = 1;
  std::vector<VertexId> verts;
  for (auto& [v, _] : a.nodes)
    if (g.has_vertex(v)) verts.push_back(v);
  if (verts.empty()) return cover;

  std::map<VertexId, DijkstraResult> sp;
  for (VertexId v : verts) sp[v] = dijkstra(g, v, cut);
  auto ball = [&](VertexId v, Length r) {
    std::vector<VertexId> out;
    for (VertexId u : verts)
      if ((u == v ? 0 : sp.at(v).at(u)) <= r) out.push_back(u);
    return out;
  };

  double grow = std::pow(double(verts.size()), 1.0 / double(beta));
  std::set<VertexId> unsatisfied(verts.begin(), verts.end());
  while (!unsatisfied.empty()) {
    int k = cover.add_clustering();
    std::set<VertexId> residual(verts.begin(), verts.end());
    for (VertexId v : std::vector<VertexId>(unsatisfied.begin(), unsatisfied.end())) {
      if (!unsatisfied.count(v) || !residual.count(v)) continue;
      // ball sizes inside the residual vertex set
      auto res_ball = [&](Length r) {
        std::vector<VertexId> out;
        for (VertexId u : residual)
          if ((u == v ? 0 : sp.at(v).at(u)) <= r) out.push_back(u);
        return out;
      };
      Length r = 0;
      while (r + h <= sat_mul(Length(beta), h)) {
        std::size_t inner = res_ball(r).size();
        std::size_t outer = res_ball(sat_add(r, h)).size();
        if (double(outer) <= grow * double(std::max<std::size_t>(inner, 1))) break;
        r = sat_add(r, h);
      }
      auto s_members = res_ball(sat_add(r, h));
      ClusterId id = cover.add_cluster(k);
      std::set<VertexId> s_set(s_members.begin(), s_members.end());
      for (VertexId u : s_members)
        for (VirtualNodeId vn : a.nodes.at(u)) cover.insert_vnode(id, u, vn);
      for (VertexId u : std::vector<VertexId>(unsatisfied.begin(), unsatisfied.end())) {
        bool inside = true;
        for (VertexId w : ball(u, h))
          if (!s_set.count(w)) {
            inside = false;
            break;
          }
        if (inside) {
          unsatisfied.erase(u);
          cover.set_ball_cover(u, {id});
        }
      }
      for (VertexId u : s_members) residual.erase(u);
    }
  }
  return cover;
}

// Neighborhood cover with separation: h_cov = h_sep = h. Built from the basic
// cover at radius nc_sep_scale*h; each new cluster is the union of h-balls
// around the core of an old cluster. Clusters take whole vertices, so if a
// cluster holds one virtual node of v it holds all of them.
inline PairwiseCover build_separated_nc(const Graph& g, const VNodeSet& a, Length h,
                                        const Params& par, const MovingCut* cut = nullptr) {
  VNodeSet vertex_level = unit_vnodes(g);
  PairwiseCover basic =
      build_basic_nc(g, vertex_level, sat_mul(Length(par.nc_sep_scale), h), par.nc_beta, cut);

  PairwiseCover cover;
  cover.h_cov = h;
  cover.h_sep = h;
  cover.distributed_b = 1;

  // core of an old cluster: vertices whose designated ball cover it is
  std::map<ClusterId, std::vector<VertexId>> cores;
  for (auto& [v, bc] : basic.all_ball_covers())
    if (!bc.empty()) cores[bc.front()].push_back(v);

  // each old cluster's core spawns the union of h-balls around it, further
  // split into components of the "pairwise distance <= h" graph so that any
  // two members of one cluster are h-connected through members
  std::map<VertexId, ClusterId> designated;
  for (int k = 0; k < basic.num_clusterings(); ++k) {
    int nk = cover.add_clustering();
    for (ClusterId old_id : basic.clustering(k)) {
      auto cit = cores.find(old_id);
      if (cit == cores.end()) continue;
      auto reach = dijkstra_multi(g, cit->second, cut, h);
      std::vector<VertexId> members;
      for (auto& [v, d] : reach.dist)
        if (d <= h) members.push_back(v);
      // proximity components among members
      std::map<VertexId, DijkstraResult> sp;
      for (VertexId v : members) sp[v] = dijkstra(g, v, cut, h);
      std::map<VertexId, int> comp;
      int ncomp = 0;
      for (VertexId v : members) {
        if (comp.count(v)) continue;
        int c = ncomp++;
        std::vector<VertexId> stack{v};
        comp[v] = c;
        while (!stack.empty()) {
          VertexId x = stack.back();
          stack.pop_back();
          for (VertexId y : members)
            if (!comp.count(y) && sp.at(x).at(y) <= h) {
              comp[y] = c;
              stack.push_back(y);
            }
        }
      }
      std::vector<ClusterId> comp_cluster(std::size_t(ncomp), 0);
      for (VertexId v : members) {
        auto ait = a.nodes.find(v);
        if (ait == a.nodes.end()) continue;
        ClusterId& id = comp_cluster[std::size_t(comp.at(v))];
        if (id == 0) id = cover.add_cluster(nk);
        for (VirtualNodeId vn : ait->second) cover.insert_vnode(id, v, vn);
      }
      for (VertexId core_v : cit->second) {
        ClusterId id = comp_cluster[std::size_t(comp.at(core_v))];
        if (id != 0) designated[core_v] = id;
      }
    }
  }
  for (auto& [v, bc] : basic.all_ball_covers()) {
    if (!a.nodes.count(v)) continue;
    auto it = designated.find(v);
    if (it != designated.end() && cover.live(it->second) &&
        cover.cluster(it->second).members.count(v))
      cover.set_ball_cover(v, {it->second});
  }
  // far-away virtual nodes may have fallen outside every ball: give them
  // singleton clusters so that the cover spans all of A
  for (auto& [v, vns] : a.nodes) {
    if (!g.has_vertex(v)) continue;
    bool covered = !vns.empty();
    for (VirtualNodeId vn : vns)
      if (cover.clusters_of_vnode(vn).empty()) covered = false;
    if (covered) continue;
    int nk = cover.add_clustering();
    ClusterId id = cover.add_cluster(nk);
    for (VirtualNodeId vn : vns) cover.insert_vnode(id, v, vn);
    cover.set_ball_cover(v, {id});
  }
  return cover;
}

// Cluster-wise restriction of a cover to a sub-node-weighting (Obs 3.5).
inline PairwiseCover restrict_cover(const PairwiseCover& cover, const VNodeSet& a_star) {
  PairwiseCover out;
  out.h_cov = cover.h_cov;
  out.h_sep = cover.h_sep;
  out.distributed_b = cover.distributed_b;
  std::map<ClusterId, ClusterId> renamed;
  for (int k = 0; k < cover.num_clusterings(); ++k) {
    int nk = out.add_clustering();
    for (ClusterId old_id : cover.clustering(k)) {
      const Cluster& c = cover.cluster(old_id);
      ClusterId id = 0;
      for (auto& [v, m] : c.members) {
        auto ait = a_star.nodes.find(v);
        if (ait == a_star.nodes.end()) continue;
        for (VirtualNodeId vn : ait->second) {
          if (!m.count(vn)) continue;
          if (id == 0) {
            id = out.add_cluster(nk);
            renamed[old_id] = id;
          }
          out.insert_vnode(id, v, vn, m.at(vn));
        }
      }
    }
  }
  for (auto& [v, bc] : cover.all_ball_covers()) {
    if (!a_star.nodes.count(v)) continue;
    std::vector<ClusterId> nb;
    for (ClusterId id : bc) {
      auto it = renamed.find(id);
      if (it != renamed.end() && out.live(it->second) &&
          out.cluster(it->second).members.count(v))
        nb.push_back(it->second);
    }
    if (!nb.empty()) out.set_ball_cover(v, std::move(nb));
  }
  return out;
}

}  // namespace lce
