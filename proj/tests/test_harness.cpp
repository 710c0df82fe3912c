#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "avgcons/harness.hpp"
#include "doctest.h"

using namespace avgcons;

namespace {

ExperimentConfig small_r() {
  ExperimentConfig cfg;
  cfg.protocol = ProtocolKind::R;
  cfg.n = 5;
  cfg.epsilon = 0.3;
  cfg.eta = 0.2;
  cfg.trials = 12;
  cfg.seed = 21;
  return cfg;
}

bool same_summary(const Summary& a, const Summary& b) {
  return summary_to_json(a) == summary_to_json(b);
}

}  // namespace

TEST_CASE("schedule flags") {
  CHECK(parse_schedule_flag("ring").kind == "ring");
  CHECK(parse_schedule_flag("csc").kind == "csc");
  const auto d = parse_schedule_flag("delayed:3");
  CHECK(d.kind == "delayed");
  CHECK(d.T == 3);
  const auto c = parse_schedule_flag("c-connected:2");
  CHECK(c.kind == "c_connected");
  CHECK(c.c == 2);
  CHECK_THROWS_AS(parse_schedule_flag("delayed"), std::invalid_argument);
  CHECK_THROWS_AS(parse_schedule_flag("delayed:0"), std::invalid_argument);
  CHECK_THROWS_AS(parse_schedule_flag("eventual"), std::invalid_argument);
}

TEST_CASE("experiment config JSON round trip") {
  ExperimentConfig cfg = small_r();
  cfg.protocol = ProtocolKind::RbarD;
  cfg.N = 12;
  cfg.s_max = 5;
  cfg.schedule = parse_schedule_flag("c-connected:2");
  const auto j = experiment_to_json(cfg);
  CHECK(j.at("schema") == kConfigSchema);
  CHECK(experiment_to_json(experiment_from_json(j)) == j);

  ExperimentConfig fixed = small_r();
  fixed.schedule.kind = "fixed";
  fixed.schedule.graph = DirectedGraph::ring(5);
  fixed.inputs = std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5};
  const auto jf = experiment_to_json(fixed);
  CHECK(experiment_from_json(jf).schedule.graph == DirectedGraph::ring(5));
  CHECK(experiment_to_json(experiment_from_json(jf)) == jf);

  auto wrong = j;
  wrong["schema"] = 2;
  CHECK_THROWS_AS(experiment_from_json(wrong), std::invalid_argument);
}

TEST_CASE("experiment validation") {
  auto cfg = small_r();
  cfg.trials = 0;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
  cfg = small_r();
  cfg.slack_sigma = -1;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
  cfg = small_r();
  cfg.s_max = 3;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
  cfg = small_r();
  cfg.inputs = std::vector<double>{0.5};
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
  cfg = small_r();
  cfg.epsilon = 0.6;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
  CHECK_NOTHROW(validate(small_r()));
}

TEST_CASE("trials derive their randomness from (seed, index)") {
  const auto cfg = small_r();
  const auto a = make_trial(cfg, 3);
  const auto b = make_trial(cfg, 3);
  const auto c = make_trial(cfg, 4);
  CHECK(a.inputs == b.inputs);
  CHECK(a.schedule.seed() == b.schedule.seed());
  CHECK(a.inputs != c.inputs);
  CHECK(a.trial == 3);
  for (double x : a.inputs) CHECK((x >= 0.0 && x <= 1.0));

  auto staggered = small_r();
  staggered.protocol = ProtocolKind::RbarD;
  staggered.N = 5;
  staggered.s_max = 5;
  for (std::uint64_t i = 0; i < 20; ++i) {
    const auto t = make_trial(staggered, i);
    CHECK(t.s_max() == 5);
    for (auto s : t.start_rounds) CHECK((s >= 1 && s <= 6));
  }
}

TEST_CASE("a single-agent experiment is decided by its one trial") {
  auto cfg = small_r();
  cfg.n = 1;
  cfg.trials = 1;
  cfg.inputs = std::vector<double>{0.5};
  std::vector<TrialRecord> records;
  const auto s = monte_carlo(cfg, &records);
  REQUIRE(records.size() == 1);
  CHECK(s.failure_fraction == (records[0].in_band ? 0.0 : 1.0));
  CHECK(records[0].stationary_round == 1u);
}

TEST_CASE("same seed gives the same summary; threads do not matter") {
  auto cfg = small_r();
  const auto serial = monte_carlo(cfg);
  CHECK(same_summary(serial, monte_carlo(cfg)));
  cfg.threads = 4;
  CHECK(same_summary(serial, monte_carlo(cfg)));
  cfg.seed = 22;
  CHECK(summary_to_json(monte_carlo(cfg)).at("failure_fraction").is_number());
}

TEST_CASE("summaries recompute from stored records") {
  auto cfg = small_r();
  cfg.protocol = ProtocolKind::Min;
  const auto dir = std::filesystem::temp_directory_path() / "avgcons_harness_test";
  std::filesystem::remove_all(dir);
  cfg.out_dir = dir.string();
  const auto s = monte_carlo(cfg);
  CHECK(s.all_pass());
  CHECK(s.verdicts.count("exact_min") == 1);

  std::ifstream rec(dir / "records.jsonl");
  const auto records = read_records_jsonl(rec);
  CHECK(records.size() == cfg.trials);
  CHECK(same_summary(summarize(cfg, records), s));

  std::ifstream sum(dir / "summary.json");
  const auto j = json::parse(sum);
  CHECK(same_summary(summary_from_json(j), s));
  CHECK(experiment_to_json(experiment_from_json(j.at("config"))) == experiment_to_json(cfg));
  std::filesystem::remove_all(dir);
}

TEST_CASE("record JSON round trip") {
  TrialRecord r;
  r.trial = 4;
  r.theta = 0.25;
  r.estimate = 0.3;
  r.level_bound = 77;
  r.samples_in_interval = true;
  r.terminated = true;
  r.last_decision_round = 19;
  CHECK(record_to_json(record_from_json(record_to_json(r))) == record_to_json(r));
}

TEST_CASE("verdicts follow the binomial rule") {
  auto cfg = small_r();
  cfg.trials = 200;
  std::vector<TrialRecord> records(200);
  for (std::size_t i = 0; i < records.size(); ++i) {
    records[i].trial = i;
    records[i].in_band = i >= 57;  // 57 failures: 0.285 is the threshold
    records[i].time_bound = 4;
    records[i].stationary_round = 3;
    records[i].vectors_at_offline_minima = true;
  }
  auto s = summarize(cfg, records);
  CHECK(s.failure_fraction == doctest::Approx(0.285));
  CHECK(s.verdicts.at("accuracy").threshold == doctest::Approx(0.28485).epsilon(1e-4));
  CHECK_FALSE(s.verdicts.at("accuracy").pass);
  records[0].in_band = true;
  s = summarize(cfg, records);
  CHECK(s.verdicts.at("accuracy").pass);
  CHECK(s.verdicts.at("time_bound").pass);
  records[5].stationary_round = 5;
  CHECK_FALSE(summarize(cfg, records).verdicts.at("time_bound").pass);
}

TEST_CASE("summary CSV has the documented columns") {
  auto cfg = small_r();
  cfg.trials = 3;
  std::ostringstream out;
  write_summary_csv(out, monte_carlo(cfg));
  std::istringstream lines(out.str());
  std::string header, row;
  std::getline(lines, header);
  std::getline(lines, row);
  CHECK(header.rfind("protocol,n,trials,epsilon,eta,ell,failure_fraction", 0) == 0);
  const auto commas = [](const std::string& s) { return std::count(s.begin(), s.end(), ','); };
  CHECK(commas(header) == static_cast<long>(kSummaryCsvColumns.size() - 1));
  CHECK(commas(row) == commas(header));
  CHECK(row.rfind("r,5,3,", 0) == 0);
}

TEST_CASE("graph lemma suite passes on small case counts") {
  const auto checks = verify_graph_lemmas(3, 40, 20);
  CHECK(checks.size() == 5 + 15 + 1);
  for (const auto& c : checks) CHECK_MESSAGE(c.pass, c.name << ": " << c.detail);
}
