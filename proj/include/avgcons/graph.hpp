#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "avgcons/sampling.hpp"

namespace avgcons {

using NodeId = std::uint32_t;

/// One round's communication topology. An edge (u, v) means that v receives
/// the message u sends. Every node carries a self-loop; constructors add them.
class DirectedGraph {
 public:
  DirectedGraph() = default;

  /// Self-loops are added implicitly. Throws std::out_of_range on an endpoint
  /// outside [0, n).
  DirectedGraph(std::size_t n, const std::vector<std::pair<NodeId, NodeId>>& edges);

  static DirectedGraph self_loops(std::size_t n);
  static DirectedGraph complete(std::size_t n);
  /// Directed ring i -> i+1 (mod n).
  static DirectedGraph ring(std::size_t n);

  std::size_t size() const { return n_; }
  bool has_edge(NodeId u, NodeId v) const { return adj_[u * n_ + v] != 0; }
  void add_edge(NodeId u, NodeId v);

  std::size_t edge_count() const;
  /// Edges in row-major order, self-loops included.
  std::vector<std::pair<NodeId, NodeId>> edges() const;
  std::vector<NodeId> in_neighbors(NodeId v) const;

  friend bool operator==(const DirectedGraph&, const DirectedGraph&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint8_t> adj_;  // n*n, adj_[u*n+v] = edge u->v
};

/// G∘H: (u, w) iff some v has (u, v) in G and (v, w) in H.
DirectedGraph product(const DirectedGraph& g, const DirectedGraph& h);

bool is_strongly_connected(const DirectedGraph& g);
bool is_complete(const DirectedGraph& g);

inline constexpr std::size_t kMaxSubsetEnumerationNodes = 20;

/// Every non-empty S has at least min(c, |V\S|) in-neighbors outside S.
/// Exhaustive over subsets; throws for n > kMaxSubsetEnumerationNodes.
bool is_c_in_connected(const DirectedGraph& g, std::size_t c);

/// Each non-loop edge present independently with probability p.
DirectedGraph random_graph(std::size_t n, double p, RngStream& rng);
/// Random Hamiltonian cycle plus `extra` random edges.
DirectedGraph random_strongly_connected(std::size_t n, std::size_t extra, RngStream& rng);
/// Circulant on a random node order where each node hears its c
/// predecessors, plus `extra` random edges.
DirectedGraph random_c_in_connected(std::size_t n, std::size_t c, std::size_t extra,
                                    RngStream& rng);

enum class ScheduleKind { Fixed, Csc, Delayed, CConnected, Blocking };

const char* to_string(ScheduleKind kind);
ScheduleKind schedule_kind_from_string(const std::string& name);

/// The adversary's dynamic graph. graph_at(t) is a pure function of the
/// schedule's own seed and t; nothing is materialized ahead of time.
class DynamicSchedule {
 public:
  std::size_t size() const { return n_; }
  ScheduleKind kind() const { return kind_; }
  std::uint64_t seed() const { return seed_; }
  /// Kind-specific parameters (T, c, ell).
  const std::map<std::string, std::int64_t>& params() const { return params_; }
  /// For Fixed schedules.
  const DirectedGraph& fixed_graph() const { return fixed_; }

  /// Rounds are numbered from 1.
  DirectedGraph graph_at(std::uint64_t t) const;

  friend DynamicSchedule schedule_fixed(DirectedGraph g);
  friend DynamicSchedule schedule_csc_random(std::size_t n, std::uint64_t seed);
  friend DynamicSchedule schedule_delayed(std::size_t n, std::size_t delay, std::uint64_t seed);
  friend DynamicSchedule schedule_c_connected(std::size_t n, std::size_t c, std::uint64_t seed);
  friend DynamicSchedule schedule_blocking_adversary(std::size_t n, std::size_t ell);

 private:
  std::size_t n_ = 0;
  ScheduleKind kind_ = ScheduleKind::Fixed;
  std::uint64_t seed_ = 0;
  std::map<std::string, std::int64_t> params_;
  DirectedGraph fixed_;
  // Delayed: backbone cycle order and the window slot of each cycle edge.
  std::vector<NodeId> cycle_;
  std::vector<std::size_t> slot_;
};

DynamicSchedule schedule_fixed(DirectedGraph g);
/// Every graph strongly connected: fresh Hamiltonian cycle plus k in [0, n]
/// extra edges per round.
DynamicSchedule schedule_csc_random(std::size_t n, std::uint64_t seed);
/// Every product of `delay` consecutive graphs is strongly connected. One
/// backbone cycle is fixed per seed; its edges are spread over the residues
/// of t mod delay, so any window of `delay` rounds sees every backbone edge.
DynamicSchedule schedule_delayed(std::size_t n, std::size_t delay, std::uint64_t seed);
/// Every graph c-in-connected.
DynamicSchedule schedule_c_connected(std::size_t n, std::size_t c, std::uint64_t seed);
/// Self-loops only in odd rounds, complete in even rounds. Two-round windows
/// are complete, yet with an even vector length the odd cursor positions of
/// the one-entry-per-round protocol only ever travel over self-loops.
DynamicSchedule schedule_blocking_adversary(std::size_t n, std::size_t ell);

}  // namespace avgcons
