// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Thresholds are fixed here; binomial slack is 3 sigma throughout.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "avgcons/harness.hpp"

using namespace avgcons;

namespace {

constexpr std::uint64_t kSeed = 20240601;
constexpr double kSlack = 3.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

ExperimentConfig experiment(ProtocolKind kind, std::size_t n, double eps, double eta,
                            std::uint64_t trials, const std::string& schedule) {
  ExperimentConfig cfg;
  cfg.protocol = kind;
  cfg.n = n;
  cfg.epsilon = eps;
  cfg.eta = eta;
  cfg.trials = trials;
  cfg.seed = kSeed + n;
  cfg.schedule = parse_schedule_flag(schedule);
  cfg.slack_sigma = kSlack;
  cfg.threads = 0;
  return cfg;
}

// Stationary by `bound` and holding the global minima at the horizon, so
// nothing can change afterwards.
bool settled_by(const TrialRecord& r, std::uint64_t bound) {
  return r.stationary_round && *r.stationary_round <= bound && r.vectors_at_offline_minima &&
         r.estimate && r.offline_estimate && *r.estimate == *r.offline_estimate;
}

Outcome criterion_1() {
  const auto p = params_R(0.3, 0.2, 0, 1);
  bool pass = p.ell == 3595;
  std::string detail = fmt("ell=%llu", static_cast<unsigned long long>(p.ell));
  for (std::size_t n : {4, 8, 16}) {
    std::vector<TrialRecord> records;
    monte_carlo(experiment(ProtocolKind::R, n, 0.3, 0.2, 100, "csc"), &records);
    const auto ok = std::count_if(records.begin(), records.end(),
                                  [&](const auto& r) { return settled_by(r, n - 1); });
    pass = pass && ok == 100;
    detail += fmt("; n=%zu: %ld/100 stationary by round %zu", n, static_cast<long>(ok), n - 1);
  }
  return {pass, detail};
}

Outcome criterion_2() {
  std::vector<TrialRecord> records;
  const auto s = monte_carlo(experiment(ProtocolKind::R, 8, 0.3, 0.2, 200, "csc"), &records);
  const double threshold = 0.2 + kSlack * std::sqrt(0.2 * 0.8 / 200.0);
  const bool stationary = std::all_of(records.begin(), records.end(),
                                      [](const auto& r) { return r.estimate.has_value(); });
  return {stationary && s.failure_fraction <= threshold && threshold <= 0.285,
          fmt("failure fraction %.4f <= %.5f over 200 trials", s.failure_fraction, threshold)};
}

Outcome criterion_3() {
  RngStream rng(kSeed, 3, 0, Purpose::Experiment);
  const std::vector<double> points{0.02, 0.05, 0.1};
  const auto stats = min_of_exponentials({1, 2, 3, 4, 5}, points, 100000, rng);
  bool pass = true;
  std::string detail;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double expected = std::exp(-15.0 * points[i]);
    const double err = std::abs(stats.survival[i] - expected);
    pass = pass && err <= 0.01;
    detail += fmt("%sx=%.2f: %.4f vs %.4f", i ? "; " : "", points[i], stats.survival[i], expected);
  }
  return {pass, detail};
}

Outcome criterion_4() {
  bool pass = true;
  double worst_margin = INFINITY;
  int cases = 0;
  std::uint64_t stream = 0;
  for (const auto& [ell, alpha] :
       std::vector<std::pair<std::uint64_t, double>>{{50, 0.1}, {100, 0.2}, {300, 0.1}})
    for (double lambda : {1.0, 3.0})
      for (bool rounded : {false, true}) {
        ConcentrationParams cp{ell, lambda, alpha, std::nullopt};
        if (rounded) cp.beta = 0.1;
        RngStream rng(kSeed, 400 + stream++, 0, Purpose::Experiment);
        const double freq = empirical_tail(cp, 10000, rng);
        const double bound = tail_bound(cp);
        const double limit = bound + kSlack * binomial_sigma(std::min(bound, 1.0), 10000);
        pass = pass && freq <= limit;
        worst_margin = std::min(worst_margin, limit - freq);
        ++cases;
      }
  return {pass, fmt("%d/12 cases under bound + 3 sigma; smallest margin %.4f", cases, worst_margin)};
}

struct RbarRun {
  ExperimentConfig cfg;
  ProtocolParams params;
  std::vector<TrialRecord> records;
  Summary summary;
};

const RbarRun& rbar_run() {
  static const RbarRun run = [] {
    RbarRun r;
    r.cfg = experiment(ProtocolKind::Rbar, 6, 0.4, 0.4, 50, "csc");
    r.params = experiment_params(r.cfg);
    // Two cycles past the bound: enough to see the post-bound wraps.
    r.cfg.t_max = r.params.ell * r.cfg.n + 2 * r.params.ell;
    r.summary = monte_carlo(r.cfg, &r.records);
    return r;
  }();
  return run;
}

Outcome criterion_5() {
  const auto& run = rbar_run();
  const std::uint64_t bound = run.params.ell * run.cfg.n;
  const auto ok = std::count_if(run.records.begin(), run.records.end(),
                                [&](const auto& r) { return settled_by(r, bound); });
  const double threshold = 0.2 + kSlack * binomial_sigma(0.2, 50);
  const bool params_ok = run.params.ell == 8089 && std::abs(*run.params.beta - 0.025) < 1e-15;
  return {params_ok && ok == 50 && run.summary.failure_fraction <= threshold,
          fmt("ell=%llu beta=%.4f; %ld/50 stationary by round %llu; failure %.3f <= %.4f",
              static_cast<unsigned long long>(run.params.ell), *run.params.beta,
              static_cast<long>(ok), static_cast<unsigned long long>(bound),
              run.summary.failure_fraction, threshold)};
}

Outcome criterion_6() {
  const auto& run = rbar_run();
  const auto interval = admissible_interval(0.4, run.params.ell, run.cfg.n, 0, 1);
  const auto levels = count_levels(interval.z, interval.upper, *run.params.beta);
  std::uint64_t ok = 0, max_seen = 0;
  for (const auto& r : run.records) {
    max_seen = std::max(max_seen, r.distinct_exponents);
    if (r.samples_in_interval.value_or(false) &&
        static_cast<std::int64_t>(r.distinct_exponents) <= levels)
      ++ok;
  }
  const double fraction = static_cast<double>(ok) / 50.0;
  const double threshold = 0.8 - kSlack * binomial_sigma(0.8, 50);
  return {fraction >= threshold,
          fmt("%.2f >= %.4f; z=%.4g, levels bound %lld, max distinct %llu", fraction, threshold,
              interval.z, static_cast<long long>(levels), static_cast<unsigned long long>(max_seen))};
}

Outcome criterion_7() {
  auto cfg = experiment(ProtocolKind::RbarD, 8, 0.4, 0.3, 100, "csc");
  cfg.N = 12;
  cfg.s_max = 5;
  const auto p = experiment_params(cfg);
  std::vector<TrialRecord> records;
  monte_carlo(cfg, &records);
  std::uint64_t success = 0, irrevocable = 0;
  const std::uint64_t bound = *cfg.s_max + 2 * cfg.n;
  for (const auto& r : records) {
    const bool by_bound = r.terminated && r.last_decision_round && *r.last_decision_round <= bound;
    if (by_bound && r.decisions_identical && r.valid && r.decided_after_stationary) ++success;
    if (r.irrevocable) ++irrevocable;
  }
  const double fraction = static_cast<double>(success) / 100.0;
  const double threshold = 0.7 - kSlack * binomial_sigma(0.7, 100);
  return {p.ell == 11832 && fraction >= threshold && irrevocable == 100,
          fmt("ell=%llu; success %.2f >= %.4f by round %llu; write-once in %llu/100",
              static_cast<unsigned long long>(p.ell), fraction, threshold,
              static_cast<unsigned long long>(bound), static_cast<unsigned long long>(irrevocable))};
}

Outcome criterion_8() {
  auto sync = experiment(ProtocolKind::RbarD, 8, 0.4, 0.3, 20, "csc");
  sync.N = 12;
  auto staggered = sync;
  staggered.s_max = 5;
  int sync_ok = 0, staggered_ok = 0;
  for (std::uint64_t i = 0; i < 20; ++i) {
    const auto tc = make_trial(sync, i);
    const auto tr = run_trial(tc);
    bool exact = true;
    for (const auto& r : tr.rounds)
      for (const auto& a : r.agents) exact = exact && a.C == r.t;
    sync_ok += exact;

    const auto sc = make_trial(staggered, i);
    const auto st = run_trial(sc);
    bool below = st.s_max == 5;
    for (const auto& r : st.rounds)
      if (r.t <= st.s_max)
        for (const auto& a : r.agents) below = below && a.C.value_or(0) < sc.size();
    staggered_ok += below;
  }
  return {sync_ok == 20 && staggered_ok == 20,
          fmt("C=t with synchronous starts %d/20; C<n up to s_max %d/20", sync_ok, staggered_ok)};
}

Outcome criterion_9() {
  const auto checks = verify_graph_lemmas(kSeed, 500, 200);
  const auto failed = std::count_if(checks.begin(), checks.end(), [](const auto& c) { return !c.pass; });
  std::string detail = fmt("%zu suites, %ld failing", checks.size(), static_cast<long>(failed));
  for (const auto& c : checks)
    if (!c.pass) detail += "; " + c.name + " " + c.detail;
  return {failed == 0, detail};
}

Outcome criterion_10() {
  ProtocolParams p = params_Rbar(0.4, 0.4, 0, 1);
  p.ell = 4;
  const std::size_t n = 3;
  const auto sched = schedule_blocking_adversary(n, p.ell);
  int blocked = 0, mixed = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::vector<RbarState> states, initial;
    RngStream inputs(kSeed, seed, 0, Purpose::Inputs);
    std::uniform_real_distribution<double> theta(0.0, 1.0);
    for (std::size_t u = 0; u < n; ++u) {
      RngStream rng(kSeed, seed, u, Purpose::Samples);
      states.push_back(rbar_init(theta(inputs), p, rng));
    }
    initial = states;
    for (std::uint64_t t = 1; t <= 50 * p.ell; ++t) {
      const auto g = sched.graph_at(t);
      std::vector<Message> out;
      for (const auto& s : states) out.push_back(outbox(s));
      std::vector<RbarState> next;
      for (NodeId v = 0; v < n; ++v) {
        std::vector<const Message*> in;
        for (NodeId u = 0; u < n; ++u)
          if (g.has_edge(u, v)) in.push_back(&out[u]);
        next.push_back(apply(states[v], Inbox(in), p));
      }
      states = std::move(next);
    }
    // Entries 1 and 3 in one-based numbering travel only in odd rounds.
    bool unchanged = true, agreed = true;
    for (std::size_t u = 0; u < n; ++u)
      for (std::size_t i = 0; i < p.ell; ++i) {
        if (i % 2 == 0)
          unchanged = unchanged && states[u].X[i] == initial[u].X[i] && states[u].Y[i] == initial[u].Y[i];
        else
          agreed = agreed && states[u].X[i] == states[0].X[i] && states[u].Y[i] == states[0].Y[i];
      }
    blocked += unchanged;
    mixed += agreed;
  }
  return {blocked == 10, fmt("odd entries untouched after %llu rounds in %d/10 seeds (even entries agreed in %d/10)",
                             static_cast<unsigned long long>(50 * p.ell), blocked, mixed)};
}

Outcome criterion_11() {
  bool pass = true;
  std::string detail;
  for (std::size_t n : {4, 6}) {
    std::vector<TrialRecord> records;
    monte_carlo(experiment(ProtocolKind::R, n, 0.3, 0.2, 50, "delayed:3"), &records);
    const std::uint64_t bound = 3 * (n - 1);
    const auto ok = std::count_if(records.begin(), records.end(),
                                  [&](const auto& r) { return settled_by(r, bound); });
    pass = pass && ok == 50;
    detail += fmt("%sn=%zu: %ld/50 by round %llu", detail.empty() ? "" : "; ", n,
                  static_cast<long>(ok), static_cast<unsigned long long>(bound));
  }
  return {pass, detail};
}

Outcome criterion_12() {
  RngStream rng(kSeed, 12, 0, Purpose::Experiment);
  std::uniform_real_distribution<double> log_x(std::log(1e-9), std::log(1e9));
  std::uniform_int_distribution<int> size(1, 10);
  const std::vector<double> betas{0.01, 0.1, 1.0};
  std::uniform_int_distribution<std::size_t> pick(0, betas.size() - 1);
  long bracket = 0, monotone = 0, idempotent = 0, commute = 0;
  constexpr int kCases = 100000;
  for (int i = 0; i < kCases; ++i) {
    const double beta = betas[pick(rng)];
    const double x = std::exp(log_x(rng));
    const double y = std::exp(log_x(rng));
    const auto qx = quantize(x, beta);
    const double r = dequantize(qx, beta);
    if (!(r <= x && x < (1.0 + beta) * r)) ++bracket;
    const auto qy = quantize(y, beta);
    if (x <= y ? !(qx <= qy) : !(qy <= qx)) ++monotone;
    if (!(quantize(dequantize(qx, beta), beta) == qx)) ++idempotent;

    std::vector<double> set(static_cast<std::size_t>(size(rng)));
    for (auto& s : set) s = std::exp(log_x(rng));
    QuantExponent min_q{INT64_MAX};
    for (double s : set) min_q = std::min(min_q, quantize(s, beta));
    if (!(quantize(*std::min_element(set.begin(), set.end()), beta) == min_q)) ++commute;
  }
  return {bracket + monotone + idempotent + commute == 0,
          fmt("violations over 1e5 cases each: bracketing %ld, monotonicity %ld, idempotence %ld, "
              "min commutation %ld",
              bracket, monotone, idempotent, commute)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"R stationary by n-1 rounds (n = 4, 8, 16)", criterion_1},
      {"R accuracy within eta + 3 sigma (n = 8, 200 trials)", criterion_2},
      {"minimum of exponentials survival function", criterion_3},
      {"concentration tails under the analytic bound", criterion_4},
      {"Rbar stationary by ell*n rounds, accuracy within eta/2 + 3 sigma", criterion_5},
      {"Rbar samples and quantization levels within the admissible interval", criterion_6},
      {"RbarD decides by s_max + 2n; write-once decisions", criterion_7},
      {"firing counter properties", criterion_8},
      {"graph product lemmas", criterion_9},
      {"blocking adversary freezes odd entries", criterion_10},
      {"delay-3 schedule stationary by 3(n-1) rounds", criterion_11},
      {"quantization algebra", criterion_12},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %2zu %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += !o.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
