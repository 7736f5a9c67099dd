#include "robod/nn.h"

#include <algorithm>
#include <cmath>

#include "robod/error.h"

namespace robod {

std::string Activation::Name() const {
  switch (kind) {
    case ActivationKind::kIdentity: return "identity";
    case ActivationKind::kRelu: return "relu";
    case ActivationKind::kLeakyRelu: return "leaky_relu";
    case ActivationKind::kSigmoid: return "sigmoid";
  }
  return "identity";
}

Activation Activation::FromName(const std::string& name) {
  if (name == "identity") return Identity();
  if (name == "relu") return Relu();
  if (name == "leaky_relu") return LeakyRelu();
  if (name == "sigmoid") return Sigmoid();
  Fail(ErrorKind::kConfig, "unknown activation '" + name + "'");
}

DenseLayer::DenseLayer(Matrix weight, Vector bias)
    : weight_(std::move(weight)), bias_(std::move(bias)) {
  if (bias_.size() != weight_.cols()) {
    Fail(ErrorKind::kShape, "bias length " + std::to_string(bias_.size()) +
                                " != fan_out " +
                                std::to_string(weight_.cols()));
  }
}

DenseLayer DenseLayer::Init(std::size_t fan_in, std::size_t fan_out,
                            Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  return DenseLayer(RandomUniform(rng, -bound, bound, fan_in, fan_out),
                    Vector(fan_out, 0.0));
}

Matrix DenseLayer::PreActivation(const Matrix& x) const {
  if (x.cols() != fan_in()) {
    Fail(ErrorKind::kShape, "dense input has " + std::to_string(x.cols()) +
                                " columns, layer expects " +
                                std::to_string(fan_in()));
  }
  Matrix pre = MatMul(x, weight_);
  for (std::size_t i = 0; i < pre.rows(); ++i) {
    auto r = pre.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += bias_[j];
  }
  return pre;
}

Matrix DenseLayer::Forward(const Matrix& x, const Activation& act) {
  Matrix pre = PreActivation(x);
  Matrix out = pre;
  for (double& v : out.values()) v = act.Apply(v);
  cache_ = Cache{x, std::move(pre), out, act};
  return out;
}

Matrix DenseLayer::Apply(const Matrix& x, const Activation& act) const {
  Matrix out = PreActivation(x);
  for (double& v : out.values()) v = act.Apply(v);
  return out;
}

DenseGrads DenseLayer::Backward(const Matrix& upstream) const {
  if (!cache_) Fail(ErrorKind::kState, "dense backward before forward");
  const Cache& c = *cache_;
  if (upstream.rows() != c.out.rows() || upstream.cols() != c.out.cols()) {
    Fail(ErrorKind::kShape, "upstream gradient shape does not match output");
  }
  Matrix g_pre = upstream;
  for (std::size_t k = 0; k < g_pre.size(); ++k) {
    g_pre.data()[k] *= c.act.Derivative(c.pre.data()[k], c.out.data()[k]);
  }
  DenseGrads grads;
  grads.weight = MatMulTransposeA(c.input, g_pre);
  grads.input = MatMulTransposeB(g_pre, weight_);
  grads.bias.assign(fan_out(), 0.0);
  for (std::size_t i = 0; i < g_pre.rows(); ++i) {
    auto r = g_pre.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) grads.bias[j] += r[j];
  }
  return grads;
}

Matrix DropoutApply(const DropoutSpec& spec, const Matrix& x, Rng& rng,
                    Matrix* keep) {
  if (spec.rate < 0.0 || spec.rate >= 1.0) {
    Fail(ErrorKind::kConfig, "dropout rate must lie in [0, 1)");
  }
  if (!spec.active()) {
    if (keep != nullptr) *keep = Matrix(x.rows(), x.cols(), 1.0);
    return x;
  }
  const double scale = 1.0 / (1.0 - spec.rate);
  Matrix out = x;
  Matrix mask(x.rows(), x.cols());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double m = rng.NextDouble() < spec.rate ? 0.0 : scale;
    mask.data()[k] = m;
    out.data()[k] *= m;
  }
  if (keep != nullptr) *keep = std::move(mask);
  return out;
}

Vector RowSquaredErrors(const Matrix& recon, const Matrix& target) {
  if (recon.rows() != target.rows() || recon.cols() != target.cols()) {
    Fail(ErrorKind::kShape, "reconstruction shape does not match target");
  }
  Vector err(recon.rows(), 0.0);
  for (std::size_t i = 0; i < recon.rows(); ++i) {
    auto a = recon.row(i);
    auto b = target.row(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
      const double d = a[j] - b[j];
      acc += d * d;
    }
    err[i] = acc;
  }
  return err;
}

double MseLoss(const Matrix& recon, const Matrix& target, Matrix* grad) {
  const Vector err = RowSquaredErrors(recon, target);
  const double n = static_cast<double>(recon.rows());
  double total = 0.0;
  for (double e : err) total += e;
  if (grad != nullptr) {
    *grad = Matrix(recon.rows(), recon.cols());
    const double coef = 2.0 / n;
    for (std::size_t k = 0; k < recon.size(); ++k) {
      grad->data()[k] = coef * (recon.data()[k] - target.data()[k]);
    }
  }
  return recon.rows() == 0 ? 0.0 : total / n;
}

void AdamState::Step(std::span<const ParamSlot> params) {
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.emplace_back(p.value.size(), 0.0);
      v_.emplace_back(p.value.size(), 0.0);
    }
  }
  if (params.size() != m_.size()) {
    Fail(ErrorKind::kShape, "adam parameter count changed between steps");
  }
  ++step_;
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  for (std::size_t p = 0; p < params.size(); ++p) {
    const ParamSlot& slot = params[p];
    if (slot.value.size() != m_[p].size() ||
        slot.grad.size() != slot.value.size()) {
      Fail(ErrorKind::kShape, "adam parameter/gradient shape mismatch");
    }
    Vector& m = m_[p];
    Vector& v = v_[p];
    const double wd = slot.decay ? options_.weight_decay : 0.0;
    for (std::size_t k = 0; k < slot.value.size(); ++k) {
      double g = slot.grad[k];
      if (wd != 0.0) g += wd * slot.value[k];
      m[k] = b1 * m[k] + (1.0 - b1) * g;
      v[k] = b2 * v[k] + (1.0 - b2) * g * g;
      const double m_hat = m[k] / correction1;
      const double v_hat = v[k] / correction2;
      slot.value[k] -= options_.lr * m_hat / (std::sqrt(v_hat) + options_.eps);
    }
  }
}

GradCheckReport GradCheck(const std::function<double()>& loss,
                          std::span<const GradCheckParam> params, double h,
                          double tol) {
  GradCheckReport report;
  for (const auto& p : params) {
    if (p.analytic.size() != p.value.size()) {
      Fail(ErrorKind::kShape, "analytic gradient size mismatch for " + p.name);
    }
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      const double saved = p.value[k];
      p.value[k] = saved + h;
      const double up = loss();
      p.value[k] = saved - h;
      const double down = loss();
      p.value[k] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double a = p.analytic[k];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-3});
      const double rel = std::abs(a - numeric) / denom;
      ++report.checked;
      if (report.checked == 1 || rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_param = p.name;
        report.worst_index = k;
      }
    }
  }
  report.passed = report.max_rel_error <= tol;
  return report;
}

}  // namespace robod
