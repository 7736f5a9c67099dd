#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "robod/batchens.h"
#include "robod/nn.h"
#include "robod/numerics.h"

namespace robod {

struct AESOptions {
  Activation hidden = Activation::LeakyRelu(0.01);
  // Sigmoid suits min-max scaled data; use identity for unscaled inputs.
  Activation output = Activation::Sigmoid();
};

// Squared reconstruction errors per stacked row and depth path. Rows follow
// the member block layout; column d-1 holds the error of path AE-2d.
struct PathErrors {
  BlockLayout blocks;
  Matrix errors;

  std::size_t members() const { return blocks.size(); }
  std::size_t depth() const { return errors.cols(); }
  std::size_t block_offset(std::size_t member) const;
  double at(std::size_t member, std::size_t point, std::size_t depth) const;
};

// Mean over members of the per-member mean (over its rows) of the summed
// path errors.
double AESLoss(const PathErrors& errors);

// Sum over depths of member i's error on its point `point`.
double MemberScore(const PathErrors& errors, std::size_t member,
                   std::size_t point);

// How often each layer ran during one forward pass.
struct LayerUsage {
  std::vector<std::size_t> encoder_calls;  // [j] for E_{j+1}
  std::vector<std::size_t> decoder_calls;  // [j] for D_{j+1}
};

struct AESForwardResult {
  std::vector<Matrix> recon;  // [d-1]: stacked reconstructions of AE-2d
  PathErrors errors;
  LayerUsage usage;
};

struct AESGrads {
  std::vector<BEGrads> encoders;
  std::vector<BEGrads> decoders;

  void Zero();
};

// Autoencoder with long skip connections built from zero-masked
// batch-ensemble layers. Path AE-2d runs E_1..E_d then D_d..D_1, so outer
// layer pairs are shared by every deeper path.
class AESModel {
 public:
  AESModel() = default;
  // Layers are initialized in full-path order E_1..E_L, D_L..D_1.
  static AESModel Init(const WidthPlan& plan, const AESOptions& options,
                       Rng& rng);

  const WidthPlan& plan() const { return plan_; }
  const AESOptions& options() const { return options_; }
  std::size_t depth() const { return plan_.depth; }
  std::size_t members() const { return plan_.members(); }
  std::size_t input_dim() const { return plan_.input_dim; }

  // encoder(j) is E_{j+1}; decoder(j) is D_{j+1} (maps width j+1 -> j).
  const BELayer& encoder(std::size_t j) const { return encoders_.at(j); }
  BELayer& encoder(std::size_t j) { return encoders_.at(j); }
  const BELayer& decoder(std::size_t j) const { return decoders_.at(j); }
  BELayer& decoder(std::size_t j) { return decoders_.at(j); }

  std::size_t TrainableCount() const;

  // Evaluation-mode forward over stacked member blocks.
  AESForwardResult Forward(const Matrix& x, const BlockLayout& blocks) const;
  // Every member scores every row of `data`.
  PathErrors Evaluate(const Matrix& data) const;

  // One training forward/backward over stacked member blocks with dropout
  // after every hidden activation. Accumulates into `grads` and returns the
  // batch loss.
  double ForwardBackward(const Matrix& x, const BlockLayout& blocks,
                         const DropoutSpec& dropout, Rng& rng,
                         AESGrads& grads) const;

  AESGrads ZeroGrads() const;
  // Optimizer view of every trainable tensor; weight decay on shared
  // weights only.
  std::vector<ParamSlot> ParamSlots(const AESGrads& grads);

  // Standalone narrow layers of path AE-2d for member i, in application
  // order E_1..E_d, D_d..D_1.
  std::vector<DenseLayer> ExtractPath(std::size_t member,
                                      std::size_t depth) const;

  // Flat parameter payload in the serialization order: per layer (E_1..E_L
  // then D_1..D_L) weight, in-factors, out-factors, biases.
  std::vector<double> Parameters() const;
  void SetParameters(std::span<const double> values);

 private:
  WidthPlan plan_;
  AESOptions options_;
  std::vector<BELayer> encoders_;
  std::vector<BELayer> decoders_;
};

// Runs a narrow path (from ExtractPath) on x: hidden activation on every
// layer but the last, which uses `output`.
Matrix ApplyPath(const std::vector<DenseLayer>& layers, const Matrix& x,
                 const Activation& hidden, const Activation& output);

struct TrainOptions {
  std::size_t epochs = 1;
  double lr = 1e-3;
  double weight_decay = 0.0;
  double dropout = 0.0;
  std::size_t batch_size = 64;
  // Epochs after which a frozen evaluation of the full data is recorded.
  std::vector<std::size_t> snapshot_epochs;
  // Optional per-member training subsets (indices into the data rows).
  std::vector<std::vector<std::size_t>> member_indices;
};

struct Snapshot {
  std::size_t epoch = 0;
  PathErrors errors;  // evaluation mode, every member on every row
  double loss = 0.0;  // AESLoss of `errors`
};

struct TrainResult {
  std::vector<double> epoch_losses;  // mean training batch loss per epoch
  std::vector<Snapshot> snapshots;
};

// Adam training. Each epoch draws one permutation per member (in member
// order) over its subset, then walks them in lock-step mini-batches.
TrainResult TrainAES(AESModel& model, const Matrix& data,
                     const TrainOptions& options, Rng& rng);

// Binary snapshot: 8-byte magic "ROBODAES", little-endian u64 header length,
// JSON header (plan, activations, metadata), then the Parameters() payload
// as little-endian IEEE-754 doubles.
void SaveModel(const std::string& path, const AESModel& model,
               const std::string& metadata_json = "{}");
AESModel LoadModel(const std::string& path, std::string* metadata_json = nullptr);

}  // namespace robod
