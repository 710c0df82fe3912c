#include "avgcons/json_io.hpp"

#include <ostream>
#include <stdexcept>

namespace avgcons {

void to_json(json& j, const DirectedGraph& g) {
  json edges = json::array();
  for (const auto& [u, v] : g.edges())
    if (u != v) edges.push_back({u, v});
  j = json{{"n", g.size()}, {"edges", std::move(edges)}};
}

void from_json(const json& j, DirectedGraph& g) {
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (const auto& e : j.at("edges")) {
    if (!e.is_array() || e.size() != 2) throw std::invalid_argument("edge must be [u, v]");
    edges.emplace_back(e[0].get<NodeId>(), e[1].get<NodeId>());
  }
  g = DirectedGraph(j.at("n").get<std::size_t>(), edges);
}

void to_json(json& j, const DynamicSchedule& s) {
  json params = json::object();
  for (const auto& [k, v] : s.params()) params[k] = v;
  if (s.kind() == ScheduleKind::Fixed) params["graph"] = s.fixed_graph();
  j = json{{"kind", to_string(s.kind())}, {"n", s.size()}, {"seed", s.seed()}, {"params", params}};
}

DynamicSchedule schedule_from_json(const json& j) {
  const auto kind = schedule_kind_from_string(j.at("kind").get<std::string>());
  const auto seed = j.value("seed", std::uint64_t{0});
  const json params = j.value("params", json::object());
  switch (kind) {
    case ScheduleKind::Fixed:
      return schedule_fixed(params.at("graph").get<DirectedGraph>());
    case ScheduleKind::Csc:
      return schedule_csc_random(j.at("n").get<std::size_t>(), seed);
    case ScheduleKind::Delayed:
      return schedule_delayed(j.at("n").get<std::size_t>(), params.at("T").get<std::size_t>(),
                              seed);
    case ScheduleKind::CConnected:
      return schedule_c_connected(j.at("n").get<std::size_t>(), params.at("c").get<std::size_t>(),
                                  seed);
    case ScheduleKind::Blocking:
      return schedule_blocking_adversary(j.at("n").get<std::size_t>(),
                                         params.at("ell").get<std::size_t>());
  }
  throw std::invalid_argument("unhandled schedule kind");
}

void to_json(json& j, const ProtocolParams& p) {
  j = json{{"epsilon", p.epsilon}, {"eta", p.eta}, {"a", p.a}, {"b", p.b}, {"ell", p.ell}};
  j["beta"] = p.beta ? json(*p.beta) : json(nullptr);
  j["N"] = p.N ? json(*p.N) : json(nullptr);
}

void from_json(const json& j, ProtocolParams& p) {
  p.epsilon = j.at("epsilon").get<double>();
  p.eta = j.at("eta").get<double>();
  p.a = j.at("a").get<double>();
  p.b = j.at("b").get<double>();
  p.ell = j.at("ell").get<std::uint64_t>();
  p.beta.reset();
  p.N.reset();
  if (j.contains("beta") && !j["beta"].is_null()) p.beta = j["beta"].get<double>();
  if (j.contains("N") && !j["N"].is_null()) p.N = j["N"].get<double>();
}

json trial_config_to_json(const TrialConfig& cfg) {
  return json{{"protocol", to_string(cfg.protocol)},
              {"params", cfg.params},
              {"inputs", cfg.inputs},
              {"schedule", cfg.schedule},
              {"start_rounds", cfg.start_rounds},
              {"t_max", cfg.t_max},
              {"seed", cfg.seed},
              {"trial", cfg.trial}};
}

std::uint64_t config_hash(const TrialConfig& cfg) {
  // FNV-1a over the canonical dump.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : trial_config_to_json(cfg).dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

void write_trace_jsonl(std::ostream& out, const TrialTrace& trace, std::uint64_t hash) {
  json header{{"type", "header"},
              {"config_hash", hash},
              {"protocol", to_string(trace.protocol)},
              {"n", trace.size()},
              {"params", trace.params},
              {"theta", trace.theta},
              {"s", trace.s},
              {"s_max", trace.s_max},
              {"t_max", trace.horizon()},
              {"offline_estimate", optional_json(trace.offline_estimate)}};
  out << header.dump() << '\n';
  const auto bits = message_bits(trace);
  for (std::size_t i = 0; i < trace.rounds.size(); ++i) {
    const auto& r = trace.rounds[i];
    json agents = json::array();
    for (const auto& a : r.agents) {
      agents.push_back({{"x", optional_json(a.x)},
                        {"d", optional_json(a.d)},
                        {"C", a.C ? json(*a.C) : json(nullptr)}});
    }
    out << json{{"t", r.t}, {"agents", std::move(agents)}, {"msg_bits", bits.per_round[i]}}.dump()
        << '\n';
  }
}

}  // namespace avgcons
