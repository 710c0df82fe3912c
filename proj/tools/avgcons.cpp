// Command-line driver: single traces, Monte Carlo sweeps, lemma checks and
// CSV reports.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "avgcons/harness.hpp"

namespace {

using namespace avgcons;

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Flags {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out;
  std::string in;
  std::optional<std::uint64_t> trials;
  std::string protocol;
  std::optional<std::size_t> n;
  std::optional<double> epsilon;
  std::optional<double> eta;
  std::optional<double> a;
  std::optional<double> b;
  std::optional<double> bigN;
  std::string schedule;
  std::optional<std::uint64_t> t_max;
  std::optional<std::uint64_t> s_max;
  std::optional<unsigned> threads;
};

std::uint64_t resolve_seed(const Flags& f, std::uint64_t fallback) {
  if (f.seed) return *f.seed;
  if (const char* env = std::getenv("AVGCONS_SEED")) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw UsageError(std::string("AVGCONS_SEED is not an unsigned integer: ") + env);
  }
  return fallback;
}

// Command-line flags override the config file.
ExperimentConfig build_config(const Flags& f) {
  ExperimentConfig cfg;
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw UsageError("cannot open config " + f.config);
    cfg = experiment_from_json(json::parse(in));
  }
  if (!f.protocol.empty()) cfg.protocol = protocol_from_string(f.protocol);
  if (f.n) cfg.n = *f.n;
  if (f.epsilon) cfg.epsilon = *f.epsilon;
  if (f.eta) cfg.eta = *f.eta;
  if (f.a) cfg.a = *f.a;
  if (f.b) cfg.b = *f.b;
  if (f.bigN) cfg.N = *f.bigN;
  if (!f.schedule.empty()) cfg.schedule = parse_schedule_flag(f.schedule);
  if (f.trials) cfg.trials = *f.trials;
  if (f.t_max) cfg.t_max = *f.t_max;
  if (f.s_max) cfg.s_max = *f.s_max;
  if (f.threads) cfg.threads = *f.threads;
  if (!f.out.empty()) cfg.out_dir = f.out;
  cfg.seed = resolve_seed(f, cfg.seed);
  if (cfg.protocol == ProtocolKind::RbarD && !cfg.N) cfg.N = static_cast<double>(cfg.n);
  return cfg;
}

void print_verdicts(const Summary& s) {
  for (const auto& [name, v] : s.verdicts)
    std::cout << (v.pass ? "PASS " : "FAIL ") << name << ": measured " << v.measured
              << ", threshold " << v.threshold << " (" << v.rule << ")\n";
}

int print_checks(const std::vector<CheckResult>& checks) {
  bool all = true;
  for (const auto& c : checks) {
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    all = all && c.pass;
  }
  return all ? kExitPass : kExitFail;
}

int cmd_run(const Flags& f) {
  ExperimentConfig cfg = build_config(f);
  cfg.out_dir.clear();
  validate(cfg);
  const TrialConfig tc = make_trial(cfg, 0);
  const TrialTrace trace = run_trial(tc);
  const auto hash = config_hash(tc);
  if (f.out.empty()) {
    write_trace_jsonl(std::cout, trace, hash);
  } else {
    std::ofstream out(f.out);
    write_trace_jsonl(out, trace, hash);
    if (!out) throw std::runtime_error("failed to write " + f.out);
  }
  // Only the deterministic time bound is judged on a single trial.
  const TrialRecord r = evaluate_trial(tc, trace);
  if (!r.time_bound) return kExitPass;
  const auto reached = tc.protocol == ProtocolKind::RbarD ? r.last_decision_round : r.stationary_round;
  const bool ok = reached && *reached <= *r.time_bound;
  if (!ok) std::cerr << "trial missed its round bound " << *r.time_bound << '\n';
  return ok ? kExitPass : kExitFail;
}

int cmd_sweep(const Flags& f) {
  const ExperimentConfig cfg = build_config(f);
  const Summary s = monte_carlo(cfg);
  std::cout << "protocol " << s.protocol << ", n " << s.n << ", trials " << s.trials << ", ell "
            << s.ell << ", failure fraction " << s.failure_fraction << '\n';
  print_verdicts(s);
  return s.all_pass() ? kExitPass : kExitFail;
}

int cmd_report(const Flags& f) {
  const std::filesystem::path dir(f.in);
  std::ifstream sum_in(dir / "summary.json");
  std::ifstream rec_in(dir / "records.jsonl");
  if (!sum_in || !rec_in) throw UsageError("expected summary.json and records.jsonl in " + f.in);
  const json stored = json::parse(sum_in);
  const Summary emitted = summary_from_json(stored);
  const Summary recomputed =
      summarize(experiment_from_json(stored.at("config")), read_records_jsonl(rec_in));

  bool consistent = emitted.verdicts.size() == recomputed.verdicts.size();
  for (const auto& [name, v] : emitted.verdicts) {
    const auto it = recomputed.verdicts.find(name);
    if (it == recomputed.verdicts.end() || it->second.pass != v.pass ||
        it->second.measured != v.measured) {
      std::cerr << "verdict '" << name << "' does not match the stored records\n";
      consistent = false;
    }
  }
  if (f.out.empty()) {
    write_summary_csv(std::cout, recomputed);
  } else {
    std::ofstream out(f.out);
    write_summary_csv(out, recomputed);
    if (!out) throw std::runtime_error("failed to write " + f.out);
  }
  return consistent && recomputed.all_pass() ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Randomized average consensus over dynamic networks"};
  app.require_subcommand(1);
  Flags f;

  auto add_seed = [&](CLI::App* c) {
    c->add_option("--seed", f.seed, "Master seed (falls back to AVGCONS_SEED, then 0)");
  };
  auto add_experiment = [&](CLI::App* c) {
    add_seed(c);
    c->add_option("--config", f.config, "JSON experiment config")->check(CLI::ExistingFile);
    c->add_option("--protocol", f.protocol, "min | r | rbar | rbard")
        ->check(CLI::IsMember({"min", "r", "rbar", "rbard"}));
    c->add_option("--n", f.n, "Number of agents")->check(CLI::PositiveNumber);
    c->add_option("--epsilon", f.epsilon, "Accuracy");
    c->add_option("--eta", f.eta, "Error probability");
    c->add_option("--a", f.a, "Lower input bound");
    c->add_option("--b", f.b, "Upper input bound");
    c->add_option("--bigN", f.bigN, "Upper bound on n (rbard; defaults to n)");
    c->add_option("--schedule", f.schedule,
                  "ring | complete | csc | delayed:T | c-connected:c | blocking");
    c->add_option("--t-max", f.t_max, "Rounds to simulate (0: default horizon)");
    c->add_option("--s-max", f.s_max, "Staggered starts in [1, s_max+1] (rbard)");
  };

  auto* run = app.add_subcommand("run", "Run one trial and dump its trace as JSON Lines");
  add_experiment(run);
  run->get_option("--protocol")->required();
  run->get_option("--n")->required();
  run->add_option("--out", f.out, "Trace file (default: stdout)");

  auto* sweep = app.add_subcommand("sweep", "Monte Carlo batch from a JSON config");
  add_experiment(sweep);
  sweep->get_option("--config")->required();
  sweep->add_option("--trials", f.trials, "Override the trial count")->check(CLI::PositiveNumber);
  sweep->add_option("--out", f.out, "Directory for records.jsonl and summary.json");
  sweep->add_option("--threads", f.threads, "Worker threads (0: all cores)");

  auto* vgraph = app.add_subcommand("verify-graph", "Random-graph product lemma suites");
  add_seed(vgraph);
  auto* vbounds = app.add_subcommand("verify-bounds", "Empirical exponential and tail checks");
  add_seed(vbounds);

  auto* report = app.add_subcommand("report", "Recompute a stored sweep and print CSV");
  report->add_option("--in", f.in, "Sweep output directory")->required()->check(CLI::ExistingDirectory);
  report->add_option("--out", f.out, "CSV file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*run) return cmd_run(f);
    if (*sweep) return cmd_sweep(f);
    if (*vgraph) return print_checks(verify_graph_lemmas(resolve_seed(f, 0)));
    if (*vbounds) return print_checks(verify_bounds(resolve_seed(f, 0)));
    if (*report) return cmd_report(f);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const json::exception& e) {
    std::cerr << "error: malformed JSON: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFail;
  }
  return kExitUsage;
}
