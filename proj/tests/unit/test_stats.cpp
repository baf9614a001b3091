#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"

#include "capflow/stats.hpp"

using namespace capflow;

TEST_CASE("summaries") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const SampleSummary s = summarize(v);
  CHECK(s.mean == 2.5);
  CHECK(s.count == 4);
  // sample variance 5/3, standard error sqrt(5/12)
  CHECK(s.std_error == doctest::Approx(std::sqrt(5.0 / 12.0)).epsilon(1e-15));
}

TEST_CASE("Kolmogorov distribution") {
  // Reference values of P[K > t] from the alternating series.
  CHECK(kolmogorov_survival(1.0) == doctest::Approx(0.26999967167735456).epsilon(1e-12));
  CHECK(kolmogorov_survival(1.36) == doctest::Approx(0.049485876755377876).epsilon(1e-12));
  CHECK(kolmogorov_survival(1.63) == doctest::Approx(0.009846364888486529).epsilon(1e-12));
  CHECK(kolmogorov_survival(0.1) == 1.0);
  CHECK(kolmogorov_survival(5.0) < 1e-20);
  for (double t = 0.2; t < 3.0; t += 0.05) {
    CHECK(kolmogorov_survival(t) >= kolmogorov_survival(t + 0.05));
  }
}

TEST_CASE("KS test") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> samples(2000);
  for (auto& x : samples) {
    x = u(rng);
  }
  const auto uniform_cdf = [](double x) { return std::clamp(x, 0.0, 1.0); };
  const KsResult ok = ks_test(samples, uniform_cdf);
  CHECK(ok.count == 2000);
  CHECK(ok.p_value > 0.01);

  for (auto& x : samples) {
    x = x * x;
  }
  CHECK(ks_test(samples, uniform_cdf).p_value < 1e-6);

  const KsResult one = ks_test({0.5}, uniform_cdf);
  CHECK(one.statistic == doctest::Approx(0.5));
}
