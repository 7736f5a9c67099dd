#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "json.hpp"
#include "robod/numerics.h"

namespace robod {

struct LabeledScores {
  Vector scores;
  std::vector<int> labels;  // 1 = outlier
};

// Rank-based AUROC (Mann-Whitney U with average ranks for ties): the
// probability that a random outlier outscores a random inlier, ties 1/2.
// Throws kMetric unless both classes are present.
double Auroc(std::span<const double> scores, std::span<const int> labels);
inline double Auroc(const LabeledScores& ls) {
  return Auroc(ls.scores, ls.labels);
}

// Linear-interpolation quantile of ascending `sorted` at q in [0, 1]
// (position q * (n - 1)).
double SortedQuantile(std::span<const double> sorted, double q);

struct Distribution {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double std = 0.0;  // population
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  std::size_t count = 0;
};

Distribution Summarize(std::span<const double> values);

struct SweepSummary {
  std::vector<Distribution> per_seed;
  // Cross-seed mean and population std of the per-seed means.
  double mean_of_means = 0.0;
  double std_of_means = 0.0;
  std::vector<Vector> auroc;  // [seed][config]
};

SweepSummary SummarizeSweep(const std::vector<Vector>& auroc_per_seed);

// {"auroc": [...], "min", "max", "mean", "std", "q1", "median", "q3", "runs"}
nlohmann::ordered_json MetricsJson(std::span<const double> run_aurocs);
nlohmann::ordered_json DistributionJson(const Distribution& d);

}  // namespace robod
