#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "robod/nn.h"
#include "robod/numerics.h"

namespace robod {

// Per-member layer widths of a width hyper-ensemble. Member i shrinks its
// encoder by decays[i] per layer: widths[i][j] = max(1, round(widths[i][j-1]
// / decays[i])), widths[i][0] = input_dim.
struct WidthPlan {
  std::size_t input_dim = 0;
  std::size_t depth = 0;
  Vector decays;
  std::vector<std::vector<std::size_t>> widths;  // [member][0..depth]

  std::size_t members() const { return decays.size(); }
  // Shared layer size at depth j (the widest member).
  std::size_t physical_width(std::size_t j) const;
};

WidthPlan PlanWidths(std::size_t input_dim, std::size_t depth,
                     std::span<const double> decays);

// Row counts of the K member mini-batches stacked vertically in one matrix.
using BlockLayout = std::vector<std::size_t>;

std::size_t TotalRows(const BlockLayout& blocks);

struct BEForwardCache {
  Matrix input;  // stacked member blocks, total x fan_in
  Matrix z;      // (X_i o s_i) W, active columns only
  Matrix pre;
  Matrix out;
  Activation act;
  BlockLayout blocks;
};

struct BEGrads {
  Matrix weight;
  Matrix in_factors;
  Matrix out_factors;
  Matrix biases;

  void Zero();
};

// Zero-masked BatchEnsemble layer. Member i computes
//   act(((X_i o s_i) W) o (r_i o alpha_i) + b_i)
// with one shared W (fan_in x fan_out), rank-1 factors s_i (fan_in) and
// r_i (fan_out), and a fixed prefix mask alpha_i keeping the first
// out_width(i) output units. Masked outputs are exactly zero.
//
// Each member also declares an input width: input columns at or beyond it
// are zero for that member (they are the previous layer's masked units) and
// are skipped. A standalone layer uses the full fan_in.
//
// With a single member the rank-1 factors are redundant with W; they are
// fixed to one and excluded from training, which makes the layer an exact
// dense layer.
class BELayer {
 public:
  BELayer() = default;
  BELayer(Matrix weight, Matrix in_factors, Matrix out_factors, Matrix masks,
          Matrix biases, std::vector<std::size_t> in_widths = {});

  // W ~ U[-1/sqrt(fan_in), 1/sqrt(fan_in)]; factors uniform on {-1, +1}
  // (K > 1) or ones (K == 1); biases zero.
  static BELayer Init(std::size_t fan_in, std::size_t fan_out,
                      std::vector<std::size_t> in_widths,
                      std::vector<std::size_t> out_widths, Rng& rng);

  std::size_t members() const { return masks_.rows(); }
  std::size_t fan_in() const { return weight_.rows(); }
  std::size_t fan_out() const { return weight_.cols(); }
  std::size_t in_width(std::size_t i) const { return in_widths_[i]; }
  std::size_t out_width(std::size_t i) const { return out_widths_[i]; }
  bool factors_trainable() const { return members() > 1; }
  bool fully_unmasked() const;

  const Matrix& weight() const { return weight_; }
  Matrix& weight() { return weight_; }
  const Matrix& in_factors() const { return in_factors_; }
  Matrix& in_factors() { return in_factors_; }
  const Matrix& out_factors() const { return out_factors_; }
  Matrix& out_factors() { return out_factors_; }
  const Matrix& biases() const { return biases_; }
  Matrix& biases() { return biases_; }
  const Matrix& masks() const { return masks_; }

  std::size_t TrainableCount() const;

  // Forward over stacked member blocks. Throws kConfig when `act` maps 0 to
  // a nonzero value and some member is masked.
  Matrix Forward(const Matrix& x, const BlockLayout& blocks,
                 const Activation& act, BEForwardCache* cache) const;

  // Accumulates parameter gradients of a cached forward into `grads` and
  // returns the input gradient (active input columns only; empty when
  // `input_grad` is false).
  Matrix Backward(const BEForwardCache& cache, const Matrix& upstream,
                  BEGrads& grads, bool input_grad = true) const;

  BEGrads ZeroGrads() const;

  // Standalone narrow layer for member i: weight W o (s_i r_i^T) restricted
  // to the member's active rows and columns, bias restricted likewise.
  DenseLayer ExtractMember(std::size_t i) const;

 private:
  void Validate();

  Matrix weight_;
  Matrix in_factors_;
  Matrix out_factors_;
  Matrix masks_;
  Matrix biases_;
  std::vector<std::size_t> in_widths_;
  std::vector<std::size_t> out_widths_;
};

}  // namespace robod
