#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "robod/numerics.h"

namespace robod {

enum class ActivationKind { kIdentity, kRelu, kLeakyRelu, kSigmoid };

struct Activation {
  ActivationKind kind = ActivationKind::kIdentity;
  double slope = 0.01;  // leaky_relu only

  static Activation Identity() { return {ActivationKind::kIdentity, 0.0}; }
  static Activation Relu() { return {ActivationKind::kRelu, 0.0}; }
  static Activation LeakyRelu(double slope = 0.01) {
    return {ActivationKind::kLeakyRelu, slope};
  }
  static Activation Sigmoid() { return {ActivationKind::kSigmoid, 0.0}; }

  double Apply(double pre) const {
    switch (kind) {
      case ActivationKind::kIdentity: return pre;
      case ActivationKind::kRelu: return pre > 0.0 ? pre : 0.0;
      case ActivationKind::kLeakyRelu: return pre > 0.0 ? pre : slope * pre;
      case ActivationKind::kSigmoid: return 1.0 / (1.0 + std::exp(-pre));
    }
    return pre;
  }
  // d(out)/d(pre), given both the pre-activation and the activation value.
  double Derivative(double pre, double out) const {
    switch (kind) {
      case ActivationKind::kIdentity: return 1.0;
      case ActivationKind::kRelu: return pre > 0.0 ? 1.0 : 0.0;
      case ActivationKind::kLeakyRelu: return pre > 0.0 ? 1.0 : slope;
      case ActivationKind::kSigmoid: return out * (1.0 - out);
    }
    return 1.0;
  }
  // Whether Apply(0) == 0 exactly; required wherever width masks are used.
  bool PreservesZero() const { return kind != ActivationKind::kSigmoid; }

  std::string Name() const;
  static Activation FromName(const std::string& name);
};

struct DenseGrads {
  Matrix input;
  Matrix weight;
  Vector bias;
};

// Fully connected layer y = act(x W + b) with W of shape fan_in x fan_out.
class DenseLayer {
 public:
  DenseLayer() = default;
  DenseLayer(Matrix weight, Vector bias);

  // W ~ U[-1/sqrt(fan_in), 1/sqrt(fan_in)], b = 0.
  static DenseLayer Init(std::size_t fan_in, std::size_t fan_out, Rng& rng);

  std::size_t fan_in() const { return weight_.rows(); }
  std::size_t fan_out() const { return weight_.cols(); }

  const Matrix& weight() const { return weight_; }
  Matrix& weight() { return weight_; }
  const Vector& bias() const { return bias_; }
  Vector& bias() { return bias_; }

  // Training forward; caches what Backward needs.
  Matrix Forward(const Matrix& x, const Activation& act);
  // Pure evaluation forward, no cache.
  Matrix Apply(const Matrix& x, const Activation& act) const;
  // Gradients of the cached forward; throws kState without one.
  DenseGrads Backward(const Matrix& upstream) const;

 private:
  Matrix PreActivation(const Matrix& x) const;

  Matrix weight_;
  Vector bias_;
  struct Cache {
    Matrix input;
    Matrix pre;
    Matrix out;
    Activation act;
  };
  std::optional<Cache> cache_;
};

struct DropoutSpec {
  double rate = 0.0;
  bool training = false;

  bool active() const { return training && rate > 0.0; }
};

// Inverted dropout. Survivors are scaled by 1/(1-rate). When `keep` is given
// it receives the per-entry multiplier (0 or 1/(1-rate)) for backprop.
Matrix DropoutApply(const DropoutSpec& spec, const Matrix& x, Rng& rng,
                    Matrix* keep = nullptr);

// Mean over rows of the squared L2 distance between rows of `recon` and
// `target`. When `grad` is given it receives d(loss)/d(recon).
double MseLoss(const Matrix& recon, const Matrix& target,
               Matrix* grad = nullptr);
// Per-row squared L2 distance.
Vector RowSquaredErrors(const Matrix& recon, const Matrix& target);

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

// One trainable tensor handed to the optimizer. `decay` selects whether the
// coupled L2 term (weight_decay * value) is added to its gradient.
struct ParamSlot {
  std::span<double> value;
  std::span<const double> grad;
  bool decay = true;
};

// Adam with coupled weight decay. Moment buffers are sized on the first
// Step() and must keep the same layout afterwards.
class AdamState {
 public:
  explicit AdamState(AdamOptions options) : options_(options) {}

  void Step(std::span<const ParamSlot> params);

  long step() const { return step_; }
  const AdamOptions& options() const { return options_; }
  const std::vector<Vector>& first_moments() const { return m_; }
  const std::vector<Vector>& second_moments() const { return v_; }

 private:
  AdamOptions options_;
  long step_ = 0;
  std::vector<Vector> m_;
  std::vector<Vector> v_;
};

struct GradCheckParam {
  std::string name;
  std::span<double> value;
  std::span<const double> analytic;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  std::size_t checked = 0;
  bool passed = false;
};

// Compares analytic gradients against central differences of `loss`.
// Relative error is |a - n| / max(|a|, |n|, 1e-3); the floor keeps
// near-zero partials from amplifying finite-difference round-off.
GradCheckReport GradCheck(const std::function<double()>& loss,
                          std::span<const GradCheckParam> params,
                          double h = 1e-6, double tol = 1e-5);

}  // namespace robod
