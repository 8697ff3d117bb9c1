#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include "lce/base.hpp"

namespace lce {

struct EdgeRec {
  VertexId u = 0, v = 0;
  Length length = 1;
  VertexId other(VertexId w) const { return w == u ? v : u; }
};

// Undirected multigraph with positive integer edge lengths and stable ids.
// Value semantics throughout: snapshots and clones are plain copies.
class Graph {
 public:
  Graph() = default;
  explicit Graph(Length max_len) : max_len_(max_len) {}

  VertexId add_vertex() {
    VertexId v = IdPool::next_vertex();
    adj_[v];
    return v;
  }
  void add_vertex_with_id(VertexId v) {
    require(!adj_.count(v), "DuplicateVertex", "vertex already present");
    adj_[v];
  }
  void remove_isolated_vertex(VertexId v) {
    auto it = adj_.find(v);
    require(it != adj_.end(), "UnknownVertex", "remove_isolated_vertex");
    require(it->second.empty(), "NonIsolatedDeletion", "vertex has incident edges");
    adj_.erase(it);
  }
  EdgeId add_edge(VertexId u, VertexId v, Length len) {
    EdgeId e = IdPool::next_edge();
    add_edge_with_id(e, u, v, len);
    return e;
  }
  // Used when mirroring another graph's realized updates.
  void add_edge_with_id(EdgeId e, VertexId u, VertexId v, Length len) {
    require(adj_.count(u) && adj_.count(v), "UnknownVertex", "add_edge");
    require(len >= 1 && len <= max_len_, "BadLength", "edge length out of range");
    require(!edges_.count(e), "DuplicateEdge", "edge id already present");
    edges_[e] = EdgeRec{u, v, len};
    adj_[u].insert(e);
    if (v != u) adj_[v].insert(e);
  }
  void remove_edge(EdgeId e) {
    auto it = edges_.find(e);
    require(it != edges_.end(), "UnknownEdge", "remove_edge");
    adj_[it->second.u].erase(e);
    adj_[it->second.v].erase(e);
    edges_.erase(it);
  }
  // Deletes one u-v parallel edge, lowest edge id first.
  EdgeId remove_one_edge_between(VertexId u, VertexId v) {
    require(adj_.count(u), "UnknownVertex", "remove_one_edge_between");
    for (EdgeId e : adj_.at(u)) {
      const EdgeRec& r = edges_.at(e);
      if ((r.u == u && r.v == v) || (r.u == v && r.v == u)) {
        remove_edge(e);
        return e;
      }
    }
    fail("UnknownEdge", "no edge between the given endpoints");
  }

  bool has_vertex(VertexId v) const { return adj_.count(v) != 0; }
  bool has_edge(EdgeId e) const { return edges_.count(e) != 0; }
  const EdgeRec& edge(EdgeId e) const { return edges_.at(e); }
  const std::set<EdgeId>& incident(VertexId v) const { return adj_.at(v); }
  const std::map<VertexId, std::set<EdgeId>>& vertices() const { return adj_; }
  const std::map<EdgeId, EdgeRec>& edges() const { return edges_; }
  std::size_t num_vertices() const { return adj_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  std::size_t size() const { return adj_.size() + edges_.size(); }
  std::size_t degree(VertexId v) const {
    std::size_t d = 0;
    for (EdgeId e : adj_.at(v)) d += (edges_.at(e).u == edges_.at(e).v) ? 2 : 1;
    return d;
  }
  Length max_len() const { return max_len_; }
  Length total_length() const {
    Length t = 1;
    for (auto& [e, r] : edges_) t = sat_add(t, r.length);
    return t;
  }
  std::uint64_t epoch() const { return epoch_; }
  void bump_epoch() { ++epoch_; }

  bool same_graph(const Graph& o) const {
    if (adj_.size() != o.adj_.size() || edges_.size() != o.edges_.size()) return false;
    for (auto& [v, _] : adj_)
      if (!o.adj_.count(v)) return false;
    for (auto& [e, r] : edges_) {
      auto it = o.edges_.find(e);
      if (it == o.edges_.end()) return false;
      if (it->second.u != r.u || it->second.v != r.v || it->second.length != r.length)
        return false;
    }
    return true;
  }

 private:
  std::map<VertexId, std::set<EdgeId>> adj_;
  std::map<EdgeId, EdgeRec> edges_;
  Length max_len_ = Length(1) << 20;
  std::uint64_t epoch_ = 0;
};

// Integral moving cut: per-edge length increase; G-C has length l+C.
struct MovingCut {
  std::map<EdgeId, Length> cut;

  Length value(EdgeId e) const {
    auto it = cut.find(e);
    return it == cut.end() ? 0 : it->second;
  }
  void add(EdgeId e, Length c) {
    if (c == 0) return;
    cut[e] = sat_add(cut[e], c);
  }
  Length size() const {
    Length s = 0;
    for (auto& [e, c] : cut) s = sat_add(s, c);
    return s;
  }
  void restrict_to(const Graph& g) {
    for (auto it = cut.begin(); it != cut.end();)
      it = g.has_edge(it->first) ? std::next(it) : cut.erase(it);
  }
  MovingCut plus(const MovingCut& o) const {
    MovingCut r = *this;
    for (auto& [e, c] : o.cut) r.add(e, c);
    return r;
  }
};

inline Length cut_length(const Graph& g, const MovingCut* c, EdgeId e) {
  Length l = g.edge(e).length;
  return c ? sat_add(l, c->value(e)) : l;
}

struct LandmarkSet {
  std::set<VertexId> landmarks;
  Length distortion = 0;

  static LandmarkSet unite(const LandmarkSet& a, const LandmarkSet& b) {
    LandmarkSet r = a;
    r.landmarks.insert(b.landmarks.begin(), b.landmarks.end());
    r.distortion = sat_add(a.distortion, b.distortion);
    return r;
  }
};

// Node-weighting A: per-vertex multiplicity of virtual nodes.
struct NodeWeighting {
  std::map<VertexId, std::uint64_t> weights;

  std::uint64_t of(VertexId v) const {
    auto it = weights.find(v);
    return it == weights.end() ? 0 : it->second;
  }
  void add(VertexId v, std::uint64_t a) {
    if (a == 0) return;
    weights[v] += a;
  }
  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (auto& [v, a] : weights) t += a;
    return t;
  }
  bool positive_on(const Graph& g) const {
    for (auto& [v, _] : g.vertices())
      if (of(v) == 0) return false;
    return true;
  }
};

struct Demand {
  // unordered pairs keyed with u <= v
  std::map<std::pair<VertexId, VertexId>, double> pairs;
  void add(VertexId u, VertexId v, double d) {
    if (u > v) std::swap(u, v);
    pairs[{u, v}] += d;
  }
};

struct FlowPath {
  std::vector<EdgeId> edges;  // contiguous walk; empty for a degenerate path
  VertexId from = 0, to = 0;
  double value = 0;
};

struct FlowAssignment {
  std::vector<FlowPath> paths;
  std::map<EdgeId, double> edge_load() const {
    std::map<EdgeId, double> load;
    for (auto& p : paths)
      for (EdgeId e : p.edges) load[e] += p.value;
    return load;
  }
  double congestion() const {
    double c = 0;
    for (auto& [e, l] : edge_load()) c = std::max(c, l);
    return c;
  }
};

// ---------------------------------------------------------------------------
// Batched updates

enum class UpdateKind {
  EdgeIns,
  EdgeDel,
  IsoVertexIns,
  IsoVertexDel,
  NodeWeightingIns,
  TerminalIns,
  TerminalDel,
};

struct UnitUpdate {
  UpdateKind kind;
  VertexId u = 0, v = 0;
  Length length = 0;
  EdgeId edge = 0;          // realized edge id (filled in by apply_batch)
  std::uint64_t weight = 0; // node-weighting amount
};

struct BatchedUpdate {
  UpdateKind kind;
  std::vector<UnitUpdate> units;

  std::uint64_t size() const {
    switch (kind) {
      case UpdateKind::NodeWeightingIns:
      case UpdateKind::IsoVertexIns:
      case UpdateKind::IsoVertexDel: {
        std::uint64_t s = 0;
        for (auto& u : units) s += std::max<std::uint64_t>(u.weight, 1);
        return s;
      }
      default:
        return units.size();
    }
  }
};

// Splits a mixed unit-update stream into pure batches, preserving order
// within each kind. The dispatcher relies on batches being pure.
inline std::vector<BatchedUpdate> split_pure(const std::vector<UnitUpdate>& units) {
  std::vector<BatchedUpdate> out;
  for (const auto& u : units) {
    if (out.empty() || out.back().kind != u.kind) out.push_back(BatchedUpdate{u.kind, {}});
    out.back().units.push_back(u);
  }
  return out;
}

// Pure function of (g, batch): returns the updated graph at epoch+1 together
// with the realized unit updates (concrete edge ids for deletions).
inline std::pair<Graph, std::vector<UnitUpdate>> apply_batch(const Graph& g,
                                                             const BatchedUpdate& batch) {
  Graph out = g;
  std::vector<UnitUpdate> realized;
  for (const auto& u : batch.units) {
    require(u.kind == batch.kind, "MalformedBatch", "mixed kinds in a pure batch");
    UnitUpdate r = u;
    switch (u.kind) {
      case UpdateKind::EdgeIns: {
        require(out.has_vertex(u.u) && out.has_vertex(u.v), "MalformedBatch",
                "edge insertion references a missing vertex");
        r.edge = out.add_edge(u.u, u.v, u.length);
        break;
      }
      case UpdateKind::EdgeDel: {
        if (u.edge != 0) {
          require(out.has_edge(u.edge), "MalformedBatch", "deleting a missing edge");
          r.u = out.edge(u.edge).u;
          r.v = out.edge(u.edge).v;
          r.length = out.edge(u.edge).length;
          out.remove_edge(u.edge);
        } else {
          require(out.has_vertex(u.u) && out.has_vertex(u.v), "MalformedBatch",
                  "edge deletion references a missing vertex");
          r.edge = out.remove_one_edge_between(u.u, u.v);
        }
        break;
      }
      case UpdateKind::IsoVertexIns:
        out.add_vertex_with_id(u.u);
        break;
      case UpdateKind::IsoVertexDel:
        require(out.has_vertex(u.u), "MalformedBatch", "deleting a missing vertex");
        out.remove_isolated_vertex(u.u);
        break;
      case UpdateKind::NodeWeightingIns:
      case UpdateKind::TerminalIns:
      case UpdateKind::TerminalDel:
        require(out.has_vertex(u.u), "MalformedBatch", "weight/terminal on missing vertex");
        break;
    }
    realized.push_back(r);
  }
  out.bump_epoch();
  return {std::move(out), std::move(realized)};
}

}  // namespace lce
