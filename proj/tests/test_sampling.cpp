#include <cmath>
#include <deque>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "avgcons/sampling.hpp"
#include "doctest.h"

using namespace avgcons;

namespace {

struct ScriptedUniform {
  std::deque<double> values;
  double uniform() {
    const double u = values.front();
    values.pop_front();
    return u;
  }
};

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

TEST_CASE("identical keys reproduce the same sequence") {
  RngStream a(7, 3, 2, Purpose::Samples);
  RngStream b(StreamKey{7, 3, 2, Purpose::Samples});
  for (int i = 0; i < 1000; ++i) CHECK(a() == b());
  CHECK(a.position() == 1000);
}

TEST_CASE("each key component changes the stream") {
  const auto first = [](RngStream s) { return s(); };
  const auto base = first(RngStream(1, 2, 3, Purpose::Samples));
  CHECK(first(RngStream(2, 2, 3, Purpose::Samples)) != base);
  CHECK(first(RngStream(1, 3, 3, Purpose::Samples)) != base);
  CHECK(first(RngStream(1, 2, 4, Purpose::Samples)) != base);
  CHECK(first(RngStream(1, 2, 3, Purpose::Schedule)) != base);
}

TEST_CASE("streams of neighbouring agents are uncorrelated") {
  RngStream a(11, 0, 0, Purpose::Samples);
  RngStream b(11, 0, 1, Purpose::Samples);
  RngStream c(11, 0, 0, Purpose::Schedule);
  std::vector<double> xa, xb, xc;
  for (int i = 0; i < 100000; ++i) {
    xa.push_back(a.uniform());
    xb.push_back(b.uniform());
    xc.push_back(c.uniform());
  }
  CHECK(std::abs(pearson(xa, xb)) < 0.02);
  CHECK(std::abs(pearson(xa, xc)) < 0.02);
}

TEST_CASE("uniform variates lie in (0, 1] with mean 1/2") {
  RngStream s(5, 0, 0, Purpose::Test);
  double sum = 0.0;
  for (int i = 0; i < 200000; ++i) {
    const double u = s.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u <= 1.0);
    sum += u;
  }
  CHECK(sum / 200000.0 == doctest::Approx(0.5).epsilon(0.005));
}

TEST_CASE("the stream drives standard distributions") {
  RngStream s(9, 0, 0, Purpose::Test);
  std::uniform_int_distribution<int> die(1, 6);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 60000; ++i) ++counts[die(s)];
  for (int face = 1; face <= 6; ++face) CHECK(std::abs(counts[face] - 10000) < 500);
}

TEST_CASE("inverse-CDF exponential") {
  CHECK(exponential_from_uniform(1.0, 1.0) == 0.0);
  CHECK(exponential_from_uniform(2.0, std::exp(-1.0)) == doctest::Approx(0.5));
  CHECK(exponential_from_uniform(0.5, std::exp(-3.0)) == doctest::Approx(6.0));
  CHECK_THROWS_AS(exponential_from_uniform(0.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(exponential_from_uniform(-1.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(exponential_from_uniform(1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(exponential_from_uniform(1.0, 1.5), std::invalid_argument);
}

TEST_CASE("scripted sources feed sample_exponential") {
  ScriptedUniform src{{std::exp(-2.0), 1.0, 0.25}};
  CHECK(sample_exponential(4.0, src) == doctest::Approx(0.5));
  CHECK(sample_exponential(1.0, src) == 0.0);
  CHECK(sample_exponential(1.0, src) == doctest::Approx(std::log(4.0)));
  CHECK_THROWS_AS(sample_exponential(0.0, src), std::invalid_argument);
}

TEST_CASE("exponential sample mean and variance") {
  RngStream s(3, 0, 0, Purpose::Test);
  const double rate = 2.5;
  double sum = 0, sq = 0;
  const int reps = 200000;
  for (int i = 0; i < reps; ++i) {
    const double x = sample_exponential(rate, s);
    sum += x;
    sq += x * x;
  }
  const double mean = sum / reps;
  CHECK(mean == doctest::Approx(1.0 / rate).epsilon(0.01));
  CHECK(sq / reps - mean * mean == doctest::Approx(1.0 / (rate * rate)).epsilon(0.03));
}

TEST_CASE("replication count for R") {
  // 27 ln 20 * 4 / 0.09 = 3594.879...
  CHECK(static_cast<double>(ell_formula_R(0.3, 0.2, 0, 1)) == doctest::Approx(3594.879).epsilon(1e-6));
  const auto p = params_R(0.3, 0.2, 0, 1);
  CHECK(p.ell == 3595);
  CHECK_FALSE(p.beta.has_value());
  CHECK(params_R(0.499, 0.499, 0, 0).ell == 226);
  CHECK(params_R(0.499, 0.499, 3, 3).ell == 226);
}

TEST_CASE("replication count and rounding ratio for Rbar") {
  const auto p = params_Rbar(0.4, 0.4, 0, 1);
  CHECK(p.ell == 8089);
  REQUIRE(p.beta.has_value());
  CHECK(*p.beta == doctest::Approx(0.025));
}

TEST_CASE("replication count for RbarD takes the larger branch") {
  CHECK(std::ceil(ell_formula_RbarD_accuracy(0.4, 0.3, 0, 1)) == 11832);
  CHECK(std::ceil(ell_formula_RbarD_firing(0.3, 12)) == 1936);
  CHECK(params_RbarD(0.4, 0.3, 0, 1, 12).ell == 11832);
  CHECK(std::ceil(ell_formula_RbarD_firing(0.3, 1e6)) == 7443);
  CHECK(params_RbarD(0.4, 0.3, 0, 1, 1e6).ell == 11832);
  // A wide network makes the firing branch dominate.
  const auto wide = params_RbarD(0.45, 0.3, 0, 0, 1e30);
  CHECK(wide.ell == static_cast<std::uint64_t>(std::ceil(ell_formula_RbarD_firing(0.3, 1e30))));
  CHECK(*params_RbarD(0.4, 0.3, 0, 1, 12).N == 12);
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(params_R(0.0, 0.2, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(params_R(0.5, 0.2, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(params_R(0.3, 0.5, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(params_R(0.3, -0.1, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(params_R(0.3, 0.2, 2, 1), std::invalid_argument);
  CHECK_THROWS_AS(params_Rbar(0.3, 0.2, 2, 1), std::invalid_argument);
  CHECK_THROWS_AS(params_RbarD(0.3, 0.2, 0, 1, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(params_for(ProtocolKind::RbarD, 0.3, 0.2, 0, 1, std::nullopt),
                  std::invalid_argument);
  CHECK_THROWS_AS(params_Min(1, 0), std::invalid_argument);
  CHECK(params_for(ProtocolKind::Min, 0.3, 0.2, 0, 1, std::nullopt).ell == 1);
}

TEST_CASE("protocol names round-trip") {
  for (auto k : {ProtocolKind::Min, ProtocolKind::R, ProtocolKind::Rbar, ProtocolKind::RbarD})
    CHECK(protocol_from_string(to_string(k)) == k);
  CHECK_THROWS_AS(protocol_from_string("push-sum"), std::invalid_argument);
}

TEST_CASE("analytic tail bound and thresholds") {
  CHECK(tail_bound({400, 1.0, 0.1, {}}) == doctest::Approx(2.0 * std::exp(-4.0 / 3.0)));
  CHECK(tail_bound({400, 1.0, 0.1, {}}) == doctest::Approx(0.52719).epsilon(1e-4));
  CHECK(tail_bound({50, 1.0, 0.1, {}}) == doctest::Approx(1.693).epsilon(1e-3));
  CHECK(tail_bound({300, 1.0, 0.1, {}}) == doctest::Approx(0.7358).epsilon(1e-3));
  CHECK(tail_threshold({100, 1.0, 0.2, {}}) == 0.2);
  CHECK(tail_threshold({100, 1.0, 0.2, 0.1}) == doctest::Approx(0.32));
}

TEST_CASE("binomial slack used by the accuracy criterion") {
  CHECK(0.2 + 3.0 * binomial_sigma(0.2, 200) == doctest::Approx(0.28485).epsilon(1e-4));
  CHECK(binomial_sigma(0.0, 10) == 0.0);
  CHECK(binomial_sigma(1.5, 10) == 0.0);
  CHECK_THROWS_AS(binomial_sigma(0.2, 0), std::invalid_argument);
}

TEST_CASE("empirical tail behaves at the extremes") {
  RngStream s(1, 0, 0, Purpose::Test);
  // Mean of one Exp(1) is far from 1 by 0.01 almost surely.
  CHECK(empirical_tail({1, 1.0, 0.01, {}}, 2000, s) > 0.95);
  // Mean of 5000 draws stays within 0.45 of 1.
  CHECK(empirical_tail({5000, 2.0, 0.45, {}}, 200, s) == 0.0);
  CHECK_THROWS_AS(empirical_tail({10, 1.0, 0.1, {}}, 0, s), std::invalid_argument);
  CHECK_THROWS_AS(empirical_tail({10, 0.0, 0.1, {}}, 10, s), std::invalid_argument);
  CHECK_THROWS_AS(empirical_tail({0, 1.0, 0.1, {}}, 10, s), std::invalid_argument);
}

TEST_CASE("empirical tail is reproducible") {
  RngStream a(4, 0, 0, Purpose::Test), b(4, 0, 0, Purpose::Test);
  CHECK(empirical_tail({30, 3.0, 0.1, 0.1}, 500, a) == empirical_tail({30, 3.0, 0.1, 0.1}, 500, b));
}

TEST_CASE("minimum of exponentials has the summed rate") {
  RngStream s(2, 0, 0, Purpose::Test);
  const auto stats = min_of_exponentials({1, 2, 3, 4, 5}, {0.02, 0.05, 0.1}, 100000, s);
  CHECK(stats.total_rate == 15.0);
  CHECK(stats.mean == doctest::Approx(1.0 / 15.0).epsilon(0.02));
  for (std::size_t i = 0; i < stats.points.size(); ++i)
    CHECK(std::abs(stats.survival[i] - std::exp(-15.0 * stats.points[i])) < 0.01);
  CHECK_THROWS_AS(min_of_exponentials({}, {}, 10, s), std::invalid_argument);
}
