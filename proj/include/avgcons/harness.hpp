#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "avgcons/engine.hpp"
#include "avgcons/json_io.hpp"

namespace avgcons {

inline constexpr int kConfigSchema = 1;

/// Schedule choice of an experiment; per-trial seeds are derived from the
/// experiment seed. `kind` is one of ring, complete, fixed, csc, delayed,
/// c_connected, blocking.
struct ScheduleSpec {
  std::string kind = "csc";
  std::size_t T = 1;
  std::size_t c = 1;
  std::optional<DirectedGraph> graph;  // kind == "fixed"
};

/// Parses the CLI form: ring | complete | csc | delayed:T | c-connected:c |
/// blocking.
ScheduleSpec parse_schedule_flag(const std::string& text);

struct ExperimentConfig {
  ProtocolKind protocol = ProtocolKind::R;
  std::size_t n = 4;
  double epsilon = 0.3;
  double eta = 0.2;
  double a = 0.0;
  double b = 1.0;
  std::optional<double> N;
  ScheduleSpec schedule;
  std::uint64_t trials = 1;
  std::uint64_t seed = 0;
  std::uint64_t t_max = 0;  // 0: engine default
  /// Fixed inputs; otherwise i.i.d. uniform on [a, b] per trial.
  std::optional<std::vector<double>> inputs;
  /// Fixed activation rounds; otherwise `s_max` draws staggered starts.
  std::optional<std::vector<std::uint64_t>> start_rounds;
  std::optional<std::uint64_t> s_max;
  /// Binomial slack multiplier on the claimed failure probability.
  double slack_sigma = 3.0;
  unsigned threads = 1;
  std::string out_dir;  // empty: nothing written
};

void validate(const ExperimentConfig& cfg);
json experiment_to_json(const ExperimentConfig& cfg);
ExperimentConfig experiment_from_json(const json& j);

ProtocolParams experiment_params(const ExperimentConfig& cfg);
DynamicSchedule make_schedule(const ScheduleSpec& spec, std::size_t n, std::uint64_t seed,
                              const ProtocolParams& params);
/// Trial `index` of the experiment: schedule seed, inputs and start rounds
/// come from dedicated streams keyed by (seed, index).
TrialConfig make_trial(const ExperimentConfig& cfg, std::uint64_t index);

/// Everything the summary needs from one trial.
struct TrialRecord {
  std::uint64_t trial = 0;
  double theta = 0.0;
  std::optional<double> estimate;  // agreed final estimate, or common decision
  std::optional<double> offline_estimate;
  bool in_band = false;
  std::optional<std::uint64_t> stationary_round;
  std::optional<std::uint64_t> convergence_round;
  std::optional<std::uint64_t> time_bound;
  bool vectors_at_offline_minima = false;
  // Quantized protocols.
  std::optional<bool> samples_in_interval;
  std::uint64_t distinct_exponents = 0;
  std::optional<std::int64_t> level_bound;
  std::uint64_t max_message_bits = 0;
  // rbard.
  std::optional<std::uint64_t> last_decision_round;
  bool terminated = false;
  bool irrevocable = false;
  bool valid = false;
  bool decisions_identical = false;
  bool decided_after_stationary = false;
};

TrialRecord evaluate_trial(const TrialConfig& cfg, const TrialTrace& trace);

json record_to_json(const TrialRecord& r);
TrialRecord record_from_json(const json& j);

struct Verdict {
  bool pass = false;
  double measured = 0.0;
  double threshold = 0.0;
  std::string rule;
};

struct Summary {
  std::string protocol;
  std::size_t n = 0;
  std::uint64_t trials = 0;
  double epsilon = 0.0;
  double eta = 0.0;
  std::uint64_t ell = 0;
  double failure_fraction = 0.0;
  std::optional<double> mean_convergence_round;
  std::optional<std::uint64_t> max_convergence_round;
  std::optional<std::uint64_t> time_bound;
  std::uint64_t time_bound_violations = 0;
  std::map<std::uint64_t, std::uint64_t> decision_rounds;  // round -> trials
  std::uint64_t max_distinct_exponents = 0;
  std::optional<std::int64_t> level_bound;
  std::uint64_t max_message_bits = 0;
  std::map<std::string, Verdict> verdicts;

  bool all_pass() const;
};

/// Deterministic fold over records in trial order.
Summary summarize(const ExperimentConfig& cfg, const std::vector<TrialRecord>& records);

json summary_to_json(const Summary& s);
Summary summary_from_json(const json& j);

/// Runs every trial (on cfg.threads threads), summarizes, and when
/// cfg.out_dir is set writes records.jsonl and summary.json there.
Summary monte_carlo(const ExperimentConfig& cfg, std::vector<TrialRecord>* records = nullptr);

std::vector<TrialRecord> read_records_jsonl(std::istream& in);

/// Fixed CSV columns; see README.
extern const std::vector<std::string> kSummaryCsvColumns;
void write_summary_csv(std::ostream& out, const Summary& s);

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Product-completeness and c-in-connected speedup lemmas on random graphs,
/// plus associativity.
std::vector<CheckResult> verify_graph_lemmas(std::uint64_t seed, std::size_t product_cases = 500,
                                             std::size_t c_cases = 200);

/// Minimum-of-exponentials law and the (rounded) concentration bounds.
std::vector<CheckResult> verify_bounds(std::uint64_t seed, std::uint64_t tail_reps = 10000,
                                       std::uint64_t min_reps = 100000);

}  // namespace avgcons
