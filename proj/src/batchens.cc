#include "robod/batchens.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "robod/error.h"

namespace robod {

std::size_t WidthPlan::physical_width(std::size_t j) const {
  std::size_t w = 0;
  for (const auto& member : widths) w = std::max(w, member.at(j));
  return w;
}

WidthPlan PlanWidths(std::size_t input_dim, std::size_t depth,
                     std::span<const double> decays) {
  if (decays.empty()) Fail(ErrorKind::kConfig, "width plan needs a decay");
  if (input_dim == 0) Fail(ErrorKind::kConfig, "width plan needs input_dim > 0");
  WidthPlan plan;
  plan.input_dim = input_dim;
  plan.depth = depth;
  plan.decays.assign(decays.begin(), decays.end());
  for (double decay : decays) {
    if (!(decay > 1.0)) {
      Fail(ErrorKind::kConfig,
           "decay rate must exceed 1, got " + std::to_string(decay));
    }
    std::vector<std::size_t> w{input_dim};
    for (std::size_t j = 1; j <= depth; ++j) {
      const double next = std::round(static_cast<double>(w.back()) / decay);
      w.push_back(std::max<std::size_t>(1, static_cast<std::size_t>(next)));
    }
    plan.widths.push_back(std::move(w));
  }
  return plan;
}

std::size_t TotalRows(const BlockLayout& blocks) {
  return std::accumulate(blocks.begin(), blocks.end(), std::size_t{0});
}

void BEGrads::Zero() {
  weight.Fill(0.0);
  in_factors.Fill(0.0);
  out_factors.Fill(0.0);
  biases.Fill(0.0);
}

BELayer::BELayer(Matrix weight, Matrix in_factors, Matrix out_factors,
                 Matrix masks, Matrix biases,
                 std::vector<std::size_t> in_widths)
    : weight_(std::move(weight)),
      in_factors_(std::move(in_factors)),
      out_factors_(std::move(out_factors)),
      masks_(std::move(masks)),
      biases_(std::move(biases)),
      in_widths_(std::move(in_widths)) {
  Validate();
}

void BELayer::Validate() {
  const std::size_t k = masks_.rows();
  const std::size_t m = weight_.rows();
  const std::size_t r = weight_.cols();
  if (k == 0) Fail(ErrorKind::kShape, "batch-ensemble layer needs a member");
  if (in_factors_.rows() != k || in_factors_.cols() != m ||
      out_factors_.rows() != k || out_factors_.cols() != r ||
      masks_.cols() != r || biases_.rows() != k || biases_.cols() != r) {
    Fail(ErrorKind::kShape, "batch-ensemble factor shapes inconsistent with " +
                                std::to_string(m) + "x" + std::to_string(r) +
                                " weight and " + std::to_string(k) +
                                " members");
  }
  if (in_widths_.empty()) in_widths_.assign(k, m);
  if (in_widths_.size() != k) {
    Fail(ErrorKind::kShape, "one input width per member required");
  }
  out_widths_.assign(k, 0);
  for (std::size_t i = 0; i < k; ++i) {
    if (in_widths_[i] > m) {
      Fail(ErrorKind::kShape, "member input width exceeds fan_in");
    }
    auto alpha = masks_.row(i);
    std::size_t active = 0;
    while (active < r && alpha[active] == 1.0) ++active;
    for (std::size_t j = active; j < r; ++j) {
      if (alpha[j] != 0.0) {
        Fail(ErrorKind::kConfig,
             "masks must be 0/1 prefix masks (member " + std::to_string(i) +
                 ")");
      }
      if (biases_(i, j) != 0.0) {
        Fail(ErrorKind::kConfig, "bias must be zero at masked positions");
      }
    }
    out_widths_[i] = active;
  }
}

BELayer BELayer::Init(std::size_t fan_in, std::size_t fan_out,
                      std::vector<std::size_t> in_widths,
                      std::vector<std::size_t> out_widths, Rng& rng) {
  const std::size_t k = out_widths.size();
  if (k == 0 || in_widths.size() != k) {
    Fail(ErrorKind::kShape, "one input and output width per member required");
  }
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Matrix weight = RandomUniform(rng, -bound, bound, fan_in, fan_out);
  Matrix s(k, fan_in, 1.0);
  Matrix r(k, fan_out, 1.0);
  if (k > 1) {
    for (double& v : s.values()) v = rng.NextDouble() < 0.5 ? -1.0 : 1.0;
    for (double& v : r.values()) v = rng.NextDouble() < 0.5 ? -1.0 : 1.0;
  }
  Matrix masks(k, fan_out);
  for (std::size_t i = 0; i < k; ++i) {
    if (out_widths[i] > fan_out) {
      Fail(ErrorKind::kShape, "member width exceeds layer fan_out");
    }
    for (std::size_t j = 0; j < out_widths[i]; ++j) masks(i, j) = 1.0;
  }
  return BELayer(std::move(weight), std::move(s), std::move(r),
                 std::move(masks), Matrix(k, fan_out), std::move(in_widths));
}

bool BELayer::fully_unmasked() const {
  return std::all_of(out_widths_.begin(), out_widths_.end(),
                     [&](std::size_t w) { return w == fan_out(); });
}

std::size_t BELayer::TrainableCount() const {
  std::size_t n = weight_.size() + biases_.size();
  if (factors_trainable()) n += in_factors_.size() + out_factors_.size();
  return n;
}

BEGrads BELayer::ZeroGrads() const {
  return BEGrads{Matrix(fan_in(), fan_out()), Matrix(members(), fan_in()),
                 Matrix(members(), fan_out()), Matrix(members(), fan_out())};
}

Matrix BELayer::Forward(const Matrix& x, const BlockLayout& blocks,
                        const Activation& act, BEForwardCache* cache) const {
  const std::size_t k = members();
  const std::size_t m = fan_in();
  const std::size_t r = fan_out();
  if (blocks.size() != k) {
    Fail(ErrorKind::kShape, "expected " + std::to_string(k) +
                                " member blocks, got " +
                                std::to_string(blocks.size()));
  }
  if (x.cols() != m || x.rows() != TotalRows(blocks)) {
    Fail(ErrorKind::kShape, "batch-ensemble input is " +
                                std::to_string(x.rows()) + "x" +
                                std::to_string(x.cols()) + ", layer expects " +
                                std::to_string(TotalRows(blocks)) + "x" +
                                std::to_string(m));
  }
  if (!act.PreservesZero() && !fully_unmasked()) {
    Fail(ErrorKind::kConfig, "activation " + act.Name() +
                                 " does not map 0 to 0 on a masked layer");
  }

  Matrix z(x.rows(), r);
  Matrix pre(x.rows(), r);
  Matrix out(x.rows(), r);
  std::vector<double> u;
  std::size_t offset = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t n = blocks[i];
    const std::size_t a_in = in_widths_[i];
    const std::size_t a_out = out_widths_[i];
    auto s = in_factors_.row(i);
    auto rf = out_factors_.row(i);
    auto b = biases_.row(i);
    u.resize(n * a_in);
    for (std::size_t row = 0; row < n; ++row) {
      auto xr = x.row(offset + row);
      for (std::size_t c = 0; c < a_in; ++c) u[row * a_in + c] = xr[c] * s[c];
    }
    Gemm(n, a_in, a_out, u.data(), a_in, weight_.data(), r,
         z.data() + offset * r, r, false);
    for (std::size_t row = 0; row < n; ++row) {
      auto zr = z.row(offset + row);
      auto pr = pre.row(offset + row);
      auto orow = out.row(offset + row);
      for (std::size_t c = 0; c < a_out; ++c) {
        pr[c] = zr[c] * rf[c] + b[c];
        orow[c] = act.Apply(pr[c]);
      }
    }
    offset += n;
  }
  if (cache != nullptr) {
    cache->input = x;
    cache->z = std::move(z);
    cache->pre = std::move(pre);
    cache->out = out;
    cache->act = act;
    cache->blocks = blocks;
  }
  return out;
}

Matrix BELayer::Backward(const BEForwardCache& cache, const Matrix& upstream,
                         BEGrads& grads, bool input_grad) const {
  if (cache.blocks.empty()) {
    Fail(ErrorKind::kState, "batch-ensemble backward before forward");
  }
  const std::size_t k = members();
  const std::size_t m = fan_in();
  const std::size_t r = fan_out();
  if (upstream.rows() != cache.out.rows() || upstream.cols() != r) {
    Fail(ErrorKind::kShape, "upstream gradient shape does not match output");
  }
  if (grads.weight.rows() != m || grads.weight.cols() != r ||
      grads.biases.rows() != k) {
    Fail(ErrorKind::kShape, "gradient buffers do not match layer");
  }
  Matrix grad_input = input_grad ? Matrix(cache.input.rows(), m) : Matrix();
  const bool need_g_u = input_grad || factors_trainable();
  std::vector<double> u, g_z, g_u;
  std::size_t offset = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t n = cache.blocks[i];
    const std::size_t a_in = in_widths_[i];
    const std::size_t a_out = out_widths_[i];
    auto s = in_factors_.row(i);
    auto rf = out_factors_.row(i);
    auto gb = grads.biases.row(i);
    auto gr = grads.out_factors.row(i);
    auto gs = grads.in_factors.row(i);

    g_z.resize(n * a_out);
    for (std::size_t row = 0; row < n; ++row) {
      auto up = upstream.row(offset + row);
      auto pr = cache.pre.row(offset + row);
      auto orow = cache.out.row(offset + row);
      auto zr = cache.z.row(offset + row);
      for (std::size_t c = 0; c < a_out; ++c) {
        const double g_pre = up[c] * cache.act.Derivative(pr[c], orow[c]);
        gb[c] += g_pre;
        gr[c] += g_pre * zr[c];
        g_z[row * a_out + c] = g_pre * rf[c];
      }
    }
    u.resize(n * a_in);
    for (std::size_t row = 0; row < n; ++row) {
      auto xr = cache.input.row(offset + row);
      for (std::size_t c = 0; c < a_in; ++c) u[row * a_in + c] = xr[c] * s[c];
    }
    GemmTransposeA(n, a_in, a_out, u.data(), a_in, g_z.data(), a_out,
                   grads.weight.data(), r, true);
    if (!need_g_u) {
      offset += n;
      continue;
    }
    g_u.resize(n * a_in);
    GemmTransposeB(n, a_out, a_in, g_z.data(), a_out, weight_.data(), r,
                   g_u.data(), a_in, false);
    for (std::size_t row = 0; row < n; ++row) {
      auto xr = cache.input.row(offset + row);
      for (std::size_t c = 0; c < a_in; ++c) {
        const double g = g_u[row * a_in + c];
        gs[c] += g * xr[c];
      }
      if (input_grad) {
        auto gi = grad_input.row(offset + row);
        for (std::size_t c = 0; c < a_in; ++c) gi[c] = g_u[row * a_in + c] * s[c];
      }
    }
    offset += n;
  }
  return grad_input;
}

DenseLayer BELayer::ExtractMember(std::size_t i) const {
  if (i >= members()) {
    Fail(ErrorKind::kIndex, "member " + std::to_string(i) + " out of range (" +
                                std::to_string(members()) + " members)");
  }
  const std::size_t a_in = in_widths_[i];
  const std::size_t a_out = out_widths_[i];
  Matrix w(a_in, a_out);
  for (std::size_t p = 0; p < a_in; ++p) {
    for (std::size_t c = 0; c < a_out; ++c) {
      w(p, c) = weight_(p, c) * (in_factors_(i, p) * out_factors_(i, c));
    }
  }
  Vector b(biases_.row(i).begin(), biases_.row(i).begin() + a_out);
  return DenseLayer(std::move(w), std::move(b));
}

}  // namespace robod
