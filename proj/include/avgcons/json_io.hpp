#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "json.hpp"

#include "avgcons/engine.hpp"
#include "avgcons/graph.hpp"
#include "avgcons/quantization.hpp"
#include "avgcons/sampling.hpp"

namespace avgcons {

using nlohmann::json;

// {"n": int, "edges": [[u, v], ...]}; self-loops are omitted on write and
// restored on read.
void to_json(json& j, const DirectedGraph& g);
void from_json(const json& j, DirectedGraph& g);

// {"kind": string, "n": int, "seed": int, "params": {...}}. Fixed schedules
// store their graph under params.graph.
void to_json(json& j, const DynamicSchedule& s);
DynamicSchedule schedule_from_json(const json& j);

void to_json(json& j, const ProtocolParams& p);
void from_json(const json& j, ProtocolParams& p);

inline void to_json(json& j, const QuantExponent& q) { j = q.k; }
inline void from_json(const json& j, QuantExponent& q) { q.k = j.get<std::int64_t>(); }

json trial_config_to_json(const TrialConfig& cfg);

/// Hash of the canonical JSON dump of the config.
std::uint64_t config_hash(const TrialConfig& cfg);

/// Header line followed by one line per round:
///   {"t": int, "agents": [{"x": f|null, "d": f|null, "C": int|null}], "msg_bits": int}
void write_trace_jsonl(std::ostream& out, const TrialTrace& trace, std::uint64_t hash);

}  // namespace avgcons
