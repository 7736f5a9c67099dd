#include "robod/evalkit.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "robod/error.h"

namespace robod {

double Auroc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    Fail(ErrorKind::kMetric, "scores and labels differ in length");
  }
  const std::size_t n = scores.size();
  std::size_t positives = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] != 0 && labels[i] != 1) {
      Fail(ErrorKind::kMetric, "labels must be 0 or 1");
    }
    if (!std::isfinite(scores[i])) {
      Fail(ErrorKind::kMetric, "non-finite score at " + std::to_string(i));
    }
    positives += static_cast<std::size_t>(labels[i]);
  }
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) {
    Fail(ErrorKind::kMetric, "AUROC needs both inliers and outliers");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Sum of (1-based, tie-averaged) ranks of the outliers. Ranks are kept
  // doubled so tie averages stay integral.
  double doubled_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double doubled_rank = static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) doubled_rank_sum += doubled_rank;
    }
    i = j;
  }
  const double p = static_cast<double>(positives);
  const double u = doubled_rank_sum / 2.0 - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(negatives));
}

double SortedQuantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) Fail(ErrorKind::kMetric, "quantile of empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

Distribution Summarize(std::span<const double> values) {
  if (values.empty()) Fail(ErrorKind::kMetric, "summary of empty sample");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  Distribution d;
  d.count = sorted.size();
  d.min = sorted.front();
  d.max = sorted.back();
  // Summing the sorted copy makes the result independent of input order.
  double sum = 0.0;
  for (double v : sorted) sum += v;
  d.mean = sum / static_cast<double>(d.count);
  double ss = 0.0;
  for (double v : sorted) ss += (v - d.mean) * (v - d.mean);
  d.std = std::sqrt(ss / static_cast<double>(d.count));
  d.q1 = SortedQuantile(sorted, 0.25);
  d.median = SortedQuantile(sorted, 0.5);
  d.q3 = SortedQuantile(sorted, 0.75);
  return d;
}

SweepSummary SummarizeSweep(const std::vector<Vector>& auroc_per_seed) {
  if (auroc_per_seed.empty()) Fail(ErrorKind::kMetric, "sweep has no seeds");
  SweepSummary s;
  s.auroc = auroc_per_seed;
  Vector means;
  for (const auto& per_config : auroc_per_seed) {
    s.per_seed.push_back(Summarize(per_config));
    means.push_back(s.per_seed.back().mean);
  }
  const Distribution across = Summarize(means);
  s.mean_of_means = across.mean;
  s.std_of_means = across.std;
  return s;
}

nlohmann::ordered_json DistributionJson(const Distribution& d) {
  nlohmann::ordered_json j;
  j["min"] = d.min;
  j["max"] = d.max;
  j["mean"] = d.mean;
  j["std"] = d.std;
  j["q1"] = d.q1;
  j["median"] = d.median;
  j["q3"] = d.q3;
  return j;
}

nlohmann::ordered_json MetricsJson(std::span<const double> run_aurocs) {
  nlohmann::ordered_json j;
  j["auroc"] = std::vector<double>(run_aurocs.begin(), run_aurocs.end());
  const nlohmann::ordered_json dist = DistributionJson(Summarize(run_aurocs));
  for (const auto& [key, value] : dist.items()) j[key] = value;
  j["runs"] = run_aurocs.size();
  return j;
}

}  // namespace robod
