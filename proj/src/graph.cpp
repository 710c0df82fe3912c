#include "avgcons/graph.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <random>
#include <stdexcept>

namespace avgcons {

DirectedGraph::DirectedGraph(std::size_t n, const std::vector<std::pair<NodeId, NodeId>>& edges)
    : n_(n), adj_(n * n, 0) {
  for (std::size_t u = 0; u < n; ++u) adj_[u * n + u] = 1;
  for (const auto& [u, v] : edges) add_edge(u, v);
}

DirectedGraph DirectedGraph::self_loops(std::size_t n) { return DirectedGraph(n, {}); }

DirectedGraph DirectedGraph::complete(std::size_t n) {
  DirectedGraph g(n, {});
  std::fill(g.adj_.begin(), g.adj_.end(), 1);
  return g;
}

DirectedGraph DirectedGraph::ring(std::size_t n) {
  DirectedGraph g(n, {});
  for (std::size_t u = 0; u < n; ++u)
    g.add_edge(static_cast<NodeId>(u), static_cast<NodeId>((u + 1) % n));
  return g;
}

void DirectedGraph::add_edge(NodeId u, NodeId v) {
  if (u >= n_ || v >= n_)
    throw std::out_of_range("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                            ") outside a graph of " + std::to_string(n_) + " nodes");
  adj_[u * n_ + v] = 1;
}

std::size_t DirectedGraph::edge_count() const {
  return static_cast<std::size_t>(std::count(adj_.begin(), adj_.end(), std::uint8_t{1}));
}

std::vector<std::pair<NodeId, NodeId>> DirectedGraph::edges() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  for (NodeId u = 0; u < n_; ++u)
    for (NodeId v = 0; v < n_; ++v)
      if (has_edge(u, v)) out.emplace_back(u, v);
  return out;
}

std::vector<NodeId> DirectedGraph::in_neighbors(NodeId v) const {
  std::vector<NodeId> out;
  for (NodeId u = 0; u < n_; ++u)
    if (has_edge(u, v)) out.push_back(u);
  return out;
}

DirectedGraph product(const DirectedGraph& g, const DirectedGraph& h) {
  if (g.size() != h.size()) throw std::invalid_argument("product: node counts differ");
  const auto n = static_cast<NodeId>(g.size());
  DirectedGraph out = DirectedGraph::self_loops(n);
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = 0; v < n; ++v) {
      if (!g.has_edge(u, v)) continue;
      for (NodeId w = 0; w < n; ++w)
        if (h.has_edge(v, w)) out.add_edge(u, w);
    }
  return out;
}

namespace {

std::vector<bool> reach(const DirectedGraph& g, NodeId start, bool forward) {
  const auto n = static_cast<NodeId>(g.size());
  std::vector<bool> seen(n, false);
  std::vector<NodeId> stack{start};
  seen[start] = true;
  while (!stack.empty()) {
    const NodeId u = stack.back();
    stack.pop_back();
    for (NodeId v = 0; v < n; ++v) {
      const bool edge = forward ? g.has_edge(u, v) : g.has_edge(v, u);
      if (edge && !seen[v]) {
        seen[v] = true;
        stack.push_back(v);
      }
    }
  }
  return seen;
}

}  // namespace

bool is_strongly_connected(const DirectedGraph& g) {
  if (g.size() == 0) return true;
  const auto all = [](const std::vector<bool>& s) {
    return std::all_of(s.begin(), s.end(), [](bool b) { return b; });
  };
  return all(reach(g, 0, true)) && all(reach(g, 0, false));
}

bool is_complete(const DirectedGraph& g) { return g.edge_count() == g.size() * g.size(); }

bool is_c_in_connected(const DirectedGraph& g, std::size_t c) {
  if (c == 0) throw std::invalid_argument("is_c_in_connected: c must be positive");
  const std::size_t n = g.size();
  if (n > kMaxSubsetEnumerationNodes)
    throw std::invalid_argument("is_c_in_connected: exhaustive check limited to 20 nodes");
  std::vector<std::uint32_t> in_mask(n, 0);
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = 0; v < n; ++v)
      if (g.has_edge(u, v)) in_mask[v] |= std::uint32_t{1} << u;

  const std::uint32_t full = n == 32 ? ~0u : (std::uint32_t{1} << n) - 1;
  for (std::uint32_t s = 1; s <= full && s != 0; ++s) {
    std::uint32_t heard = 0;
    for (std::uint32_t rest = s; rest != 0; rest &= rest - 1)
      heard |= in_mask[static_cast<std::size_t>(std::countr_zero(rest))];
    const auto outside = static_cast<std::size_t>(std::popcount(heard & ~s));
    const std::size_t need = std::min(c, n - static_cast<std::size_t>(std::popcount(s)));
    if (outside < need) return false;
  }
  return true;
}

namespace {

void add_random_edges(DirectedGraph& g, std::size_t extra, RngStream& rng) {
  const std::size_t n = g.size();
  if (n < 2) return;
  std::uniform_int_distribution<NodeId> node(0, static_cast<NodeId>(n - 1));
  for (std::size_t i = 0; i < extra; ++i) g.add_edge(node(rng), node(rng));
}

std::vector<NodeId> random_order(std::size_t n, RngStream& rng) {
  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), NodeId{0});
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

}  // namespace

DirectedGraph random_graph(std::size_t n, double p, RngStream& rng) {
  if (n == 0) throw std::invalid_argument("graph needs at least one node");
  std::bernoulli_distribution coin(p);
  DirectedGraph g = DirectedGraph::self_loops(n);
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = 0; v < n; ++v)
      if (u != v && coin(rng)) g.add_edge(u, v);
  return g;
}

DirectedGraph random_strongly_connected(std::size_t n, std::size_t extra, RngStream& rng) {
  if (n == 0) throw std::invalid_argument("graph needs at least one node");
  const auto order = random_order(n, rng);
  DirectedGraph g = DirectedGraph::self_loops(n);
  for (std::size_t i = 0; i < n; ++i) g.add_edge(order[i], order[(i + 1) % n]);
  add_random_edges(g, extra, rng);
  return g;
}

DirectedGraph random_c_in_connected(std::size_t n, std::size_t c, std::size_t extra,
                                    RngStream& rng) {
  if (n == 0) throw std::invalid_argument("graph needs at least one node");
  if (c == 0) throw std::invalid_argument("c must be positive");
  // Any S misses each maximal outside arc of length L preceding one of its
  // members by at most max(0, L - c) nodes, so it hears min(c, |V\S|) nodes.
  const auto order = random_order(n, rng);
  DirectedGraph g = DirectedGraph::self_loops(n);
  const std::size_t reach_back = std::min(c, n - 1);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 1; j <= reach_back; ++j) g.add_edge(order[(i + n - j) % n], order[i]);
  add_random_edges(g, extra, rng);
  return g;
}

const char* to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::Fixed: return "fixed";
    case ScheduleKind::Csc: return "csc";
    case ScheduleKind::Delayed: return "delayed";
    case ScheduleKind::CConnected: return "c_connected";
    case ScheduleKind::Blocking: return "blocking";
  }
  return "?";
}

ScheduleKind schedule_kind_from_string(const std::string& name) {
  if (name == "fixed") return ScheduleKind::Fixed;
  if (name == "csc") return ScheduleKind::Csc;
  if (name == "delayed") return ScheduleKind::Delayed;
  if (name == "c_connected") return ScheduleKind::CConnected;
  if (name == "blocking") return ScheduleKind::Blocking;
  throw std::invalid_argument("unknown schedule kind '" + name + "'");
}

DynamicSchedule schedule_fixed(DirectedGraph g) {
  DynamicSchedule s;
  s.n_ = g.size();
  s.kind_ = ScheduleKind::Fixed;
  s.fixed_ = std::move(g);
  return s;
}

DynamicSchedule schedule_csc_random(std::size_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("schedule needs at least one node");
  DynamicSchedule s;
  s.n_ = n;
  s.kind_ = ScheduleKind::Csc;
  s.seed_ = seed;
  return s;
}

DynamicSchedule schedule_delayed(std::size_t n, std::size_t delay, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("schedule needs at least one node");
  if (delay < 1) throw std::invalid_argument("delay must be at least 1");
  DynamicSchedule s;
  s.n_ = n;
  s.kind_ = ScheduleKind::Delayed;
  s.seed_ = seed;
  s.params_["T"] = static_cast<std::int64_t>(delay);
  // Round 0 of the schedule stream is reserved for the backbone.
  RngStream rng(seed, 0, 0, Purpose::Schedule);
  s.cycle_ = random_order(n, rng);
  std::uniform_int_distribution<std::size_t> slot(0, delay - 1);
  s.slot_.resize(n);
  for (auto& e : s.slot_) e = slot(rng);
  return s;
}

DynamicSchedule schedule_c_connected(std::size_t n, std::size_t c, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("schedule needs at least one node");
  if (c < 1) throw std::invalid_argument("c must be at least 1");
  DynamicSchedule s;
  s.n_ = n;
  s.kind_ = ScheduleKind::CConnected;
  s.seed_ = seed;
  s.params_["c"] = static_cast<std::int64_t>(c);
  return s;
}

DynamicSchedule schedule_blocking_adversary(std::size_t n, std::size_t ell) {
  if (n < 2) throw std::invalid_argument("blocking adversary needs n >= 2");
  if (ell < 2 || ell % 2 != 0)
    throw std::invalid_argument("blocking adversary needs an even vector length >= 2");
  DynamicSchedule s;
  s.n_ = n;
  s.kind_ = ScheduleKind::Blocking;
  s.params_["ell"] = static_cast<std::int64_t>(ell);
  return s;
}

DirectedGraph DynamicSchedule::graph_at(std::uint64_t t) const {
  if (t < 1) throw std::invalid_argument("rounds are numbered from 1");
  RngStream rng(seed_, t, 0, Purpose::Schedule);
  switch (kind_) {
    case ScheduleKind::Fixed:
      return fixed_;
    case ScheduleKind::Csc: {
      std::uniform_int_distribution<std::size_t> extra(0, n_);
      const std::size_t k = extra(rng);
      return random_strongly_connected(n_, k, rng);
    }
    case ScheduleKind::Delayed: {
      const auto delay = static_cast<std::size_t>(params_.at("T"));
      const std::size_t residue = static_cast<std::size_t>((t - 1) % delay);
      DirectedGraph g = DirectedGraph::self_loops(n_);
      for (std::size_t i = 0; i < n_; ++i)
        if (slot_[i] == residue) g.add_edge(cycle_[i], cycle_[(i + 1) % n_]);
      return g;
    }
    case ScheduleKind::CConnected: {
      const auto c = static_cast<std::size_t>(params_.at("c"));
      std::uniform_int_distribution<std::size_t> extra(0, n_);
      const std::size_t k = extra(rng);
      return random_c_in_connected(n_, c, k, rng);
    }
    case ScheduleKind::Blocking:
      return t % 2 == 1 ? DirectedGraph::self_loops(n_) : DirectedGraph::complete(n_);
  }
  throw std::logic_error("unhandled schedule kind");
}

}  // namespace avgcons
