#include "capflow/stats.hpp"

#include <algorithm>
#include <cmath>

#include "capflow/error.hpp"

namespace capflow {

SampleSummary summarize(std::span<const double> samples) {
  SampleSummary out;
  out.count = samples.size();
  if (samples.empty()) {
    return out;
  }
  double sum = 0.0;
  for (auto v : samples) {
    sum += v;
  }
  out.mean = sum / static_cast<double>(samples.size());
  if (samples.size() > 1) {
    double ss = 0.0;
    for (auto v : samples) {
      ss += (v - out.mean) * (v - out.mean);
    }
    const double n = static_cast<double>(samples.size());
    out.std_error = std::sqrt(ss / (n - 1.0) / n);
  }
  return out;
}

double kolmogorov_survival(double t) {
  if (t <= 0.0) {
    return 1.0;
  }
  // The alternating series converges slowly for small t, where Q is 1 to
  // double precision anyway.
  if (t < 0.2) {
    return 1.0;
  }
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * t * t);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-17) {
      break;
    }
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf) {
  require(!samples.empty(), ErrorKind::InsufficientSamples, "KS test needs at least one sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double F = cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
  }
  KsResult out;
  out.statistic = d;
  out.count = samples.size();
  const double root = std::sqrt(n);
  out.p_value = kolmogorov_survival((root + 0.12 + 0.11 / root) * d);
  return out;
}

}  // namespace capflow
