#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace capflow {

struct SampleSummary {
  double mean = 0.0;
  double std_error = 0.0;  // standard error of the mean
  std::size_t count = 0;
};

SampleSummary summarize(std::span<const double> samples);

/// Q(t) = P[K > t] for the Kolmogorov distribution, 2 sum_k (-1)^(k-1) exp(-2 k^2 t^2).
double kolmogorov_survival(double t);

struct KsResult {
  double statistic = 0.0;  // sup |F_n - F|
  double p_value = 1.0;
  std::size_t count = 0;
};

/// One-sample Kolmogorov-Smirnov test. The p-value uses the asymptotic law
/// with Stephens' finite-sample correction (sqrt(n) + 0.12 + 0.11/sqrt(n)) D.
KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf);

}  // namespace capflow
