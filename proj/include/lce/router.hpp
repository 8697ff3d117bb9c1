#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <vector>

#include "lce/base.hpp"
#include "lce/graph.hpp"

namespace lce {

// Dynamic router: a unit-length multigraph that is the union of a core graph
// (group hierarchy with leaf cliques and sibling matchings) and an affiliated
// forest grown by matching insertions. Supports batched edge deletions with
// pruning and constant-overhead path reporting. Vertices are opaque tokens
// supplied by the caller.
class Router {
 public:
  using Vertex = std::uint64_t;

  struct Edge {
    Vertex a = 0, b = 0;
  };

  Router() = default;

  static Router init(const std::vector<Vertex>& vertices, int b, int t_local,
                     int prune_denom = 100) {
    Router r;
    r.b_ = std::max(b, 2);
    r.t_local_ = std::max(t_local, 1);
    r.prune_denom_ = std::max(prune_denom, 1);
    std::vector<Vertex> vs = vertices;
    std::sort(vs.begin(), vs.end());
    vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
    require(!vs.empty(), "EmptyRouter", "router needs at least one vertex");
    for (Vertex v : vs) {
      r.state_[v] = VState{};
      r.state_[v].core = true;
    }
    // group hierarchy: split while |B| >= 10b into b nearly equal subgroups
    r.groups_.push_back(Group{0, -1, {}, vs, 1});
    std::vector<int> work{0};
    while (!work.empty()) {
      int gi = work.back();
      work.pop_back();
      auto members = r.groups_[gi].members;  // copy: groups_ may reallocate
      int level = r.groups_[gi].level;
      if (members.size() < std::size_t(10 * r.b_)) {
        // leaf: clique
        for (std::size_t i = 0; i < members.size(); ++i)
          for (std::size_t j = i + 1; j < members.size(); ++j)
            r.add_core_edge(members[i], members[j]);
        continue;
      }
      std::size_t base = members.size() / std::size_t(r.b_);
      std::size_t extra = members.size() % std::size_t(r.b_);
      std::size_t at = 0;
      std::vector<int> kids;
      for (int c = 0; c < r.b_; ++c) {
        std::size_t sz = base + (std::size_t(c) < extra ? 1 : 0);
        std::vector<Vertex> sub(members.begin() + at, members.begin() + at + sz);
        at += sz;
        int id = int(r.groups_.size());
        r.groups_.push_back(Group{id, gi, {}, std::move(sub), level + 1});
        kids.push_back(id);
        work.push_back(id);
      }
      r.groups_[gi].children = kids;
      for (std::size_t i = 0; i < kids.size(); ++i)
        for (std::size_t j = i + 1; j < kids.size(); ++j) {
          auto& b1 = r.groups_[kids[i]].members;
          auto& b2 = r.groups_[kids[j]].members;
          std::size_t k = std::min(b1.size(), b2.size());
          Matching m;
          for (std::size_t x = 0; x < k; ++x) {
            r.add_core_edge(b1[x], b2[x]);
            m.edges.push_back({b1[x], b2[x]});
            m.alive.push_back(true);
          }
          r.matchings_[{kids[i], kids[j]}] = std::move(m);
        }
      r.levels_ = std::max(r.levels_, level + 1);
    }
    return r;
  }

  int levels() const { return levels_; }
  int batches() const { return batches_; }
  // declared diameter bound: core recursion depth (leaf paths may take two
  // hops) plus two tree ascents
  Length declared_hrt() const { return (Length(1) << (levels_ + 2)) + 2 * batches_; }
  // declared congestion bound for the recursive routing
  double declared_grt() const {
    return std::pow(4.0, double(levels_ + 1)) + std::pow(2.0, double(batches_ + 1));
  }

  bool has_vertex(Vertex v) const {
    auto it = state_.find(v);
    return it != state_.end() && !it->second.pruned;
  }
  std::vector<Vertex> live_vertices() const {
    std::vector<Vertex> out;
    for (auto& [v, st] : state_)
      if (!st.pruned) out.push_back(v);
    return out;
  }
  const std::set<std::pair<Vertex, Vertex>>& edges() const { return edges_; }
  bool has_edge(Vertex a, Vertex b) const {
    if (a > b) std::swap(a, b);
    return edges_.count({a, b}) != 0;
  }

  // Batched edge deletion: returns the pruned vertex set. The surviving
  // router is the induced subgraph with no deleted edge.
  std::vector<Vertex> delete_edges(const std::vector<Edge>& batch) {
    require(batches_ < t_local_, "BudgetExceeded", "router update budget exhausted");
    ++batches_;
    std::set<Vertex> affected;
    for (auto& e : batch) {
      Vertex a = e.a, b = e.b;
      if (a > b) std::swap(a, b);
      if (!edges_.count({a, b})) continue;
      remove_edge_everywhere(a, b);
      affected.insert(a);
      affected.insert(b);
    }
    // pruned core vertices: seeded by affected cores, closed bottom-up by the
    // group rule |B cap prune| >= |B| / (denom * t_local)
    std::set<Vertex> prune_core;
    for (Vertex v : affected)
      if (state_.at(v).core && !state_.at(v).pruned) prune_core.insert(v);
    for (int level = levels_; level >= 1; --level) {
      for (auto& g : groups_) {
        if (g.level != level || g.dropped) continue;
        std::size_t hit = 0;
        for (Vertex v : g.members)
          if (prune_core.count(v)) ++hit;
        if (hit == 0) continue;
        double thr = double(g.members.size()) / double(prune_denom_ * t_local_);
        if (double(hit) >= thr) {
          for (Vertex v : g.members) prune_core.insert(v);
          drop_group_and_descendants(g.id);
        }
      }
    }
    // affected affiliated vertices, plus all descendants of anything pruned
    std::set<Vertex> prune = prune_core;
    for (Vertex v : affected)
      if (!state_.at(v).core && !state_.at(v).pruned) prune.insert(v);
    std::vector<Vertex> stack(prune.begin(), prune.end());
    while (!stack.empty()) {
      Vertex v = stack.back();
      stack.pop_back();
      for (Vertex c : state_.at(v).children)
        if (prune.insert(c).second) stack.push_back(c);
    }
    std::vector<Vertex> out;
    for (Vertex v : prune) {
      if (state_.at(v).pruned) continue;
      out.push_back(v);
      prune_vertex(v);
    }
    return out;
  }

  // Matching insertion: fresh vertices become affiliated leaves.
  void insert_matching(const std::vector<Edge>& matching) {
    require(batches_ < t_local_, "BudgetExceeded", "router update budget exhausted");
    ++batches_;
    std::set<Vertex> olds, news;
    for (auto& e : matching) {
      require(has_vertex(e.a), "DuplicateEndpoint", "matching endpoint not live in router");
      require(!state_.count(e.b), "DuplicateEndpoint", "new vertex already present");
      require(olds.insert(e.a).second, "DuplicateEndpoint", "old endpoint repeated");
      require(news.insert(e.b).second, "DuplicateEndpoint", "new vertex repeated");
    }
    for (auto& e : matching) {
      VState st;
      st.core = false;
      st.parent = e.a;
      st.depth = state_.at(e.a).depth + 1;
      state_[e.b] = st;
      state_[e.a].children.push_back(e.b);
      add_edge_set(e.a, e.b);
    }
  }

  // Path reporting: tree ascent plus recursive descent through surviving
  // sibling matchings. Output length is at most declared_hrt().
  std::vector<Vertex> path(Vertex u, Vertex v) const {
    require(has_vertex(u) && has_vertex(v), "UnknownVertex", "router path");
    if (u == v) return {u};
    std::vector<Vertex> up_u = ascend(u);
    std::vector<Vertex> up_v = ascend(v);
    Vertex cu = up_u.back(), cv = up_v.back();
    std::vector<Vertex> mid = core_path(cu, cv);
    std::vector<Vertex> out = up_u;
    for (std::size_t i = 1; i < mid.size(); ++i) out.push_back(mid[i]);
    for (auto it = up_v.rbegin() + 1; it != up_v.rend(); ++it) out.push_back(*it);
    // degenerate overlaps when cu == cv
    std::vector<Vertex> clean;
    for (Vertex x : out)
      if (clean.empty() || clean.back() != x) clean.push_back(x);
    return clean;
  }

  // Test hook: surviving sibling matchings for the structural invariant.
  struct SiblingInfo {
    std::size_t m_total, m_alive, b1, b2;
  };
  std::vector<SiblingInfo> sibling_matchings() const {
    std::vector<SiblingInfo> out;
    for (auto& [key, m] : matchings_) {
      if (groups_[key.first].dropped || groups_[key.second].dropped) continue;
      std::size_t alive = 0;
      for (bool a : m.alive)
        if (a) ++alive;
      out.push_back({m.edges.size(), alive, live_count(key.first), live_count(key.second)});
    }
    return out;
  }

  // Explicit recursive routing of a unit demand set on the current router:
  // demands on affiliated vertices descend to their core roots, then the core
  // demand is routed level by level, spreading inter-child demand evenly over
  // surviving sibling matching edges. Measures congestion; per-pair lengths
  // are audited through path().
  struct Routing {
    std::map<std::pair<Vertex, Vertex>, double> load;
    bool ok = true;
    double congestion() const {
      double c = 0;
      for (auto& [e, l] : load) c = std::max(c, l);
      return c;
    }
  };
  Routing route_demand(const std::vector<std::pair<Vertex, Vertex>>& pairs) const {
    Routing r;
    struct D {
      Vertex u, v;
      double val;
    };
    std::vector<D> core_demand;
    auto add_load = [&](Vertex a, Vertex b, double val) {
      if (a > b) std::swap(a, b);
      r.load[{a, b}] += val;
    };
    for (auto& [u, v] : pairs) {
      if (u == v) continue;
      if (!has_vertex(u) || !has_vertex(v)) {
        r.ok = false;
        continue;
      }
      auto au = ascend(u), av = ascend(v);
      for (std::size_t i = 0; i + 1 < au.size(); ++i) add_load(au[i], au[i + 1], 1.0);
      for (std::size_t i = 0; i + 1 < av.size(); ++i) add_load(av[i], av[i + 1], 1.0);
      core_demand.push_back(D{au.back(), av.back(), 1.0});
    }
    // recursive core routing
    std::function<void(int, std::vector<D>&)> route_group = [&](int gid, std::vector<D>& ds) {
      const Group& g = groups_[gid];
      if (ds.empty()) return;
      if (g.children.empty()) {
        for (auto& d : ds) {
          if (d.u == d.v) continue;
          if (has_edge(d.u, d.v)) {
            add_load(d.u, d.v, d.val);
            continue;
          }
          bool found = false;
          for (Vertex x : g.members)
            if (x != d.u && x != d.v && !state_.at(x).pruned && has_edge(d.u, x) &&
                has_edge(x, d.v)) {
              add_load(d.u, x, d.val);
              add_load(x, d.v, d.val);
              found = true;
              break;
            }
          if (!found) r.ok = false;
        }
        return;
      }
      std::map<int, std::vector<D>> sub;
      auto child_of = [&](Vertex x) {
        for (int c : g.children) {
          if (groups_[c].dropped) continue;
          for (Vertex m : groups_[c].members)
            if (m == x && !state_.at(m).pruned) return c;
        }
        return -1;
      };
      for (auto& d : ds) {
        int cu = child_of(d.u), cv = child_of(d.v);
        if (cu < 0 || cv < 0) {
          r.ok = false;
          continue;
        }
        if (cu == cv) {
          sub[cu].push_back(d);
          continue;
        }
        auto key = cu < cv ? std::make_pair(cu, cv) : std::make_pair(cv, cu);
        auto it = matchings_.find(key);
        std::vector<std::size_t> alive;
        if (it != matchings_.end())
          for (std::size_t i = 0; i < it->second.edges.size(); ++i) {
            auto& e = it->second.edges[i];
            if (it->second.alive[i] && !state_.at(e.a).pruned && !state_.at(e.b).pruned)
              alive.push_back(i);
          }
        if (alive.empty()) {
          r.ok = false;
          continue;
        }
        double each = d.val / double(alive.size());
        for (std::size_t i : alive) {
          Vertex wa = it->second.edges[i].a, wb = it->second.edges[i].b;
          Vertex wu = (key.first == cu) ? wa : wb;
          Vertex wv = (key.first == cu) ? wb : wa;
          add_load(wu, wv, each);
          sub[cu].push_back(D{d.u, wu, each});
          sub[cv].push_back(D{wv, d.v, each});
        }
      }
      for (auto& [c, list] : sub) route_group(c, list);
    };
    route_group(0, core_demand);
    return r;
  }

 private:
  struct VState {
    bool core = false;
    bool pruned = false;
    Vertex parent = 0;
    int depth = 0;
    std::vector<Vertex> children;
  };
  struct Group {
    int id = 0;
    int parent = -1;
    std::vector<int> children;
    std::vector<Vertex> members;
    int level = 1;
    bool dropped = false;
  };
  struct Matching {
    std::vector<Edge> edges;
    std::vector<bool> alive;
  };

  void add_core_edge(Vertex a, Vertex b) { add_edge_set(a, b); }
  void add_edge_set(Vertex a, Vertex b) {
    if (a > b) std::swap(a, b);
    edges_.insert({a, b});
  }
  void remove_edge_everywhere(Vertex a, Vertex b) {
    if (a > b) std::swap(a, b);
    edges_.erase({a, b});
    for (auto& [key, m] : matchings_)
      for (std::size_t i = 0; i < m.edges.size(); ++i) {
        Vertex x = m.edges[i].a, y = m.edges[i].b;
        if (x > y) std::swap(x, y);
        if (x == a && y == b) m.alive[i] = false;
      }
  }
  void prune_vertex(Vertex v) {
    auto& st = state_.at(v);
    st.pruned = true;
    std::vector<std::pair<Vertex, Vertex>> drop;
    for (auto& e : edges_)
      if (e.first == v || e.second == v) drop.push_back(e);
    for (auto& e : drop) {
      edges_.erase(e);
      for (auto& [key, m] : matchings_)
        for (std::size_t i = 0; i < m.edges.size(); ++i) {
          Vertex x = m.edges[i].a, y = m.edges[i].b;
          if (x > y) std::swap(x, y);
          if (x == e.first && y == e.second) m.alive[i] = false;
        }
    }
  }
  void drop_group_and_descendants(int gid) {
    std::vector<int> stack{gid};
    while (!stack.empty()) {
      int g = stack.back();
      stack.pop_back();
      if (groups_[g].dropped) continue;
      groups_[g].dropped = true;
      for (int c : groups_[g].children) stack.push_back(c);
    }
  }
  std::size_t live_count(int gid) const {
    std::size_t c = 0;
    for (Vertex v : groups_[gid].members)
      if (!state_.at(v).pruned) ++c;
    return c;
  }

  std::vector<Vertex> ascend(Vertex v) const {
    std::vector<Vertex> out{v};
    while (!state_.at(out.back()).core) out.push_back(state_.at(out.back()).parent);
    return out;
  }

  // smallest non-dropped group containing both, then descend
  std::vector<Vertex> core_path(Vertex u, Vertex v) const {
    if (u == v) return {u};
    auto p = core_path_in_group(0, u, v);
    require(!p.empty(), "RouterDisconnected", "no surviving core path");
    return p;
  }
  std::vector<Vertex> core_path_in_group(int gid, Vertex u, Vertex v) const {
    const Group& g = groups_[gid];
    if (g.dropped) return {};
    if (u == v) return {u};
    if (g.children.empty()) {
      if (has_edge(u, v)) return {u, v};
      // leaf cliques may have lost single edges; route through a live member
      for (Vertex x : g.members)
        if (x != u && x != v && !state_.at(x).pruned && has_edge(u, x) && has_edge(x, v))
          return {u, x, v};
      return {};
    }
    int cu = -1, cv = -1;
    for (int c : g.children) {
      if (groups_[c].dropped) continue;
      for (Vertex m : groups_[c].members) {
        if (m == u) cu = c;
        if (m == v) cv = c;
      }
    }
    if (cu < 0 || cv < 0) return {};
    if (cu == cv) return core_path_in_group(cu, u, v);
    auto key = cu < cv ? std::make_pair(cu, cv) : std::make_pair(cv, cu);
    auto it = matchings_.find(key);
    if (it == matchings_.end()) return {};
    for (std::size_t i = 0; i < it->second.edges.size(); ++i) {
      if (!it->second.alive[i]) continue;
      Vertex wa = it->second.edges[i].a, wb = it->second.edges[i].b;  // wa in lower child
      Vertex wu = (key.first == cu) ? wa : wb;
      Vertex wv = (key.first == cu) ? wb : wa;
      if (state_.at(wu).pruned || state_.at(wv).pruned) continue;
      auto p1 = core_path_in_group(cu, u, wu);
      if (p1.empty()) continue;
      auto p2 = core_path_in_group(cv, wv, v);
      if (p2.empty()) continue;
      std::vector<Vertex> out = p1;
      for (Vertex x : p2) out.push_back(x);
      return out;
    }
    return {};
  }

  int b_ = 3;
  int t_local_ = 1;
  int prune_denom_ = 100;
  int batches_ = 0;
  int levels_ = 1;
  std::map<Vertex, VState> state_;
  std::vector<Group> groups_;
  std::map<std::pair<int, int>, Matching> matchings_;
  std::set<std::pair<Vertex, Vertex>> edges_;
};

}  // namespace lce
