#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace lce {

using VertexId = std::uint64_t;
using EdgeId = std::uint64_t;
using ClusterId = std::uint64_t;
using VirtualNodeId = std::uint64_t;
using Length = std::int64_t;

constexpr Length kInfLength = std::numeric_limits<Length>::max() / 4;

inline Length sat_add(Length a, Length b) {
  if (a >= kInfLength || b >= kInfLength) return kInfLength;
  Length s = a + b;
  return s >= kInfLength ? kInfLength : s;
}

inline Length sat_mul(Length a, Length b) {
  if (a == 0 || b == 0) return 0;
  if (a >= kInfLength || b >= kInfLength) return kInfLength;
  if (a > kInfLength / b) return kInfLength;
  return a * b;
}

// Process-wide pools of identifiers. Ids are never reused; ordering follows
// creation order. Vertex ids created by different components (input graphs,
// sparsifier star centers, stacked-graph copies) are therefore globally
// distinct, which is what the fresh-vertex discipline requires.
class IdPool {
 public:
  static std::uint64_t next_vertex() { return ++vertex_counter_; }
  static std::uint64_t next_edge() { return ++edge_counter_; }
  static std::uint64_t next_cluster() { return ++cluster_counter_; }
  static std::uint64_t next_virtual_node() { return ++vnode_counter_; }
  static std::uint64_t next_token() { return ++token_counter_; }

 private:
  static inline std::uint64_t vertex_counter_ = 0;
  static inline std::uint64_t edge_counter_ = 0;
  static inline std::uint64_t cluster_counter_ = 0;
  static inline std::uint64_t vnode_counter_ = 0;
  static inline std::uint64_t token_counter_ = 0;
};

struct Error : std::runtime_error {
  std::string code;
  Error(std::string c, const std::string& what)
      : std::runtime_error(c + ": " + what), code(std::move(c)) {}
};

[[noreturn]] inline void fail(const std::string& code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool cond, const std::string& code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace lce
