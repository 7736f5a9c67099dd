#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "robod/numerics.h"

namespace robod {

// Feature matrix plus labels. For outlier-detection tasks labels are 0
// (inlier) / 1 (outlier); a multiclass source keeps its integer class ids.
struct Dataset {
  std::string name;
  std::vector<std::string> feature_names;
  Matrix features;
  std::vector<int> labels;
  // Provenance: source path and hash, scaler parameters, assembly recipe.
  nlohmann::ordered_json manifest = nlohmann::ordered_json::object();

  std::size_t size() const { return features.rows(); }
  std::size_t dim() const { return features.cols(); }
  double outlier_fraction() const;
};

// Reads a CSV with a header row. Every column other than `label_column` is
// a numeric feature; label cells must be integers. Parse errors name the
// 1-based data row (header excluded) and 1-based column.
Dataset LoadCsv(const std::string& path,
                const std::string& label_column = "label");

void WriteCsv(const std::string& path, const Dataset& ds,
              const std::string& label_column = "label");

// Per-feature (x - min) / (max - min); constant columns become 0.
Dataset MinMaxScale(const Dataset& ds);

struct PollutedRecipe {
  int inlier_class = 0;
  double rate = 0.10;  // fraction of every other class kept as outliers
  std::uint64_t seed = 0;
};

// All rows of the inlier class (label 0) plus, per other class, a seeded
// without-replacement subsample of max(1, round(rate * class size)) rows
// (label 1). Rows keep their original relative order.
Dataset AssemblePolluted(const Dataset& multiclass,
                         const PollutedRecipe& recipe);

// 64-bit FNV-1a of a file's bytes, as 16 hex digits.
std::string HashFile(const std::string& path);

}  // namespace robod
