#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "robod/aes.h"
#include "robod/nn.h"
#include "robod/numerics.h"

namespace robod {

struct VanillaAEConfig {
  std::size_t n_layers = 1;  // encoder layers
  double layer_decay = 2.0;
  double lr = 1e-3;
  std::size_t epochs = 250;
  double dropout = 0.0;
  double weight_decay = 0.0;
  std::uint64_t seed = 0;
  std::size_t batch_size = 64;
  AESOptions activations;
};

struct VanillaAESnapshot {
  std::size_t epoch = 0;
  Vector scores;      // per-point squared reconstruction error
  double loss = 0.0;  // mean of `scores`
};

// Plain symmetric autoencoder of dense layers; encoder widths follow the
// same recurrence as WidthPlan with a single decay.
class VanillaAE {
 public:
  static VanillaAE Init(std::size_t input_dim, std::size_t n_layers,
                        double layer_decay, const AESOptions& activations,
                        Rng& rng);

  const std::vector<DenseLayer>& layers() const { return layers_; }
  const std::vector<std::size_t>& widths() const { return widths_; }

  Matrix Reconstruct(const Matrix& x) const;
  Vector Score(const Matrix& x) const;

  // Forward/backward on one batch with dropout after hidden activations,
  // then one Adam step. Returns the batch loss.
  double TrainStep(const Matrix& batch, double dropout, Rng& rng,
                   AdamState& adam);

 private:
  std::vector<std::size_t> widths_;
  std::vector<DenseLayer> layers_;  // E_1..E_L, D_L..D_1
  AESOptions activations_;
};

// Trains with Adam (shuffled mini-batches, one permutation per epoch) and
// records evaluation-mode scores after each requested epoch; an empty
// request means just the final epoch.
std::vector<VanillaAESnapshot> TrainVanillaAE(
    const Matrix& data, const VanillaAEConfig& config,
    std::span<const std::size_t> snapshot_epochs = {});

Vector VanillaAEScore(const Matrix& data, const VanillaAEConfig& config);

// c(n): average unsuccessful-search path length of a binary search tree on n
// points, 2H(n-1) - 2(n-1)/n with H(i) = ln(i) + Euler's constant; c(1) = 0.
double AveragePathLength(std::size_t n);

struct IsoTreeNode {
  int feature = -1;  // -1 marks a leaf
  double split = 0.0;
  int left = -1;
  int right = -1;
  std::size_t size = 0;  // training points that reached the node
};

struct IsoTree {
  std::vector<IsoTreeNode> nodes;  // nodes[0] is the root

  // Edges to the reached leaf plus c(leaf size).
  double PathLength(std::span<const double> x) const;
  std::size_t Height() const;
};

class IsoForest {
 public:
  IsoForest() = default;
  IsoForest(std::vector<IsoTree> trees, std::size_t subsample);

  std::size_t subsample() const { return subsample_; }
  const std::vector<IsoTree>& trees() const { return trees_; }

  double MeanPathLength(std::span<const double> x) const;
  // 2^(-E[h(x)] / c(subsample)); higher is more anomalous.
  double Score(std::span<const double> x) const;
  Vector ScoreAll(const Matrix& data) const;

 private:
  std::vector<IsoTree> trees_;
  std::size_t subsample_ = 0;
};

struct IsoForestOptions {
  std::size_t trees = 100;
  std::size_t subsample = 256;
  std::uint64_t seed = 0;
  // When the subsample exceeds the data size: use all rows (true) or fail.
  bool clamp_subsample = true;
};

// Each tree draws its subsample and splits from its own derived seed.
// `clamped` reports whether the subsample size was reduced to n.
IsoForest FitIsoForest(const Matrix& data, const IsoForestOptions& options,
                       bool* clamped = nullptr);

}  // namespace robod
