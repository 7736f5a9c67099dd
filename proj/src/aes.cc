#include "robod/aes.h"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <set>

#include "json.hpp"
#include "robod/error.h"

namespace robod {

namespace {

// Inverted dropout over the active prefix of each member block, drawing one
// uniform per active entry in row-major order.
Matrix BlockDropout(const Matrix& h, const BlockLayout& blocks,
                    const std::vector<std::size_t>& widths, double rate,
                    Rng& rng, Matrix& keep) {
  Matrix out = h;
  keep = Matrix(h.rows(), h.cols());
  const double scale = 1.0 / (1.0 - rate);
  std::size_t offset = 0;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    for (std::size_t row = 0; row < blocks[i]; ++row) {
      auto o = out.row(offset + row);
      auto k = keep.row(offset + row);
      for (std::size_t c = 0; c < widths[i]; ++c) {
        const double m = rng.NextDouble() < rate ? 0.0 : scale;
        k[c] = m;
        o[c] *= m;
      }
    }
    offset += blocks[i];
  }
  return out;
}

void MultiplyInPlace(Matrix& g, const Matrix& keep) {
  if (keep.empty()) return;
  for (std::size_t k = 0; k < g.size(); ++k) g.data()[k] *= keep.data()[k];
}

void AddInPlace(Matrix& acc, const Matrix& g, bool& first) {
  if (first) {
    acc = g;
    first = false;
    return;
  }
  for (std::size_t k = 0; k < acc.size(); ++k) acc.data()[k] += g.data()[k];
}

std::vector<std::size_t> MemberWidths(const WidthPlan& plan, std::size_t j) {
  std::vector<std::size_t> w;
  for (const auto& member : plan.widths) w.push_back(member[j]);
  return w;
}

Matrix StackCopies(const Matrix& data, std::size_t copies) {
  Matrix x(data.rows() * copies, data.cols());
  for (std::size_t c = 0; c < copies; ++c) {
    std::copy(data.values().begin(), data.values().end(),
              x.data() + c * data.size());
  }
  return x;
}

}  // namespace

std::size_t PathErrors::block_offset(std::size_t member) const {
  if (member >= blocks.size()) {
    Fail(ErrorKind::kIndex, "member " + std::to_string(member) +
                                " out of range (" +
                                std::to_string(blocks.size()) + " members)");
  }
  std::size_t offset = 0;
  for (std::size_t i = 0; i < member; ++i) offset += blocks[i];
  return offset;
}

double PathErrors::at(std::size_t member, std::size_t point,
                      std::size_t depth) const {
  if (point >= blocks.at(member) || depth >= errors.cols()) {
    Fail(ErrorKind::kIndex, "path error index out of range");
  }
  return errors(block_offset(member) + point, depth);
}

double AESLoss(const PathErrors& errors) {
  const std::size_t k = errors.members();
  if (k == 0) return 0.0;
  double loss = 0.0;
  std::size_t offset = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t n = errors.blocks[i];
    double member_total = 0.0;
    for (std::size_t d = 0; d < errors.depth(); ++d) {
      double path_total = 0.0;
      for (std::size_t row = 0; row < n; ++row) {
        path_total += errors.errors(offset + row, d);
      }
      if (n > 0) member_total += path_total / static_cast<double>(n);
    }
    loss += member_total;
    offset += n;
  }
  return loss / static_cast<double>(k);
}

double MemberScore(const PathErrors& errors, std::size_t member,
                   std::size_t point) {
  if (member >= errors.members() || point >= errors.blocks[member]) {
    Fail(ErrorKind::kIndex, "member score index out of range");
  }
  const std::size_t row = errors.block_offset(member) + point;
  double s = 0.0;
  for (std::size_t d = 0; d < errors.depth(); ++d) s += errors.errors(row, d);
  return s;
}

void AESGrads::Zero() {
  for (auto& g : encoders) g.Zero();
  for (auto& g : decoders) g.Zero();
}

AESModel AESModel::Init(const WidthPlan& plan, const AESOptions& options,
                        Rng& rng) {
  if (plan.depth == 0) Fail(ErrorKind::kConfig, "AE-S needs depth >= 1");
  if (!options.hidden.PreservesZero()) {
    Fail(ErrorKind::kConfig, "hidden activation must map 0 to 0");
  }
  AESModel model;
  model.plan_ = plan;
  model.options_ = options;
  const std::size_t depth = plan.depth;
  model.encoders_.resize(depth);
  model.decoders_.resize(depth);
  for (std::size_t j = 0; j < depth; ++j) {
    model.encoders_[j] =
        BELayer::Init(plan.physical_width(j), plan.physical_width(j + 1),
                      MemberWidths(plan, j), MemberWidths(plan, j + 1), rng);
  }
  for (std::size_t j = depth; j-- > 0;) {
    model.decoders_[j] =
        BELayer::Init(plan.physical_width(j + 1), plan.physical_width(j),
                      MemberWidths(plan, j + 1), MemberWidths(plan, j), rng);
  }
  return model;
}

std::size_t AESModel::TrainableCount() const {
  std::size_t n = 0;
  for (const auto& l : encoders_) n += l.TrainableCount();
  for (const auto& l : decoders_) n += l.TrainableCount();
  return n;
}

AESForwardResult AESModel::Forward(const Matrix& x,
                                   const BlockLayout& blocks) const {
  if (x.cols() != input_dim()) {
    Fail(ErrorKind::kShape, "AE-S input has " + std::to_string(x.cols()) +
                                " columns, model expects " +
                                std::to_string(input_dim()));
  }
  const std::size_t depth = plan_.depth;
  AESForwardResult result;
  result.usage.encoder_calls.assign(depth, 0);
  result.usage.decoder_calls.assign(depth, 0);
  std::vector<Matrix> h(depth + 1);
  h[0] = x;
  for (std::size_t j = 0; j < depth; ++j) {
    h[j + 1] = encoders_[j].Forward(h[j], blocks, options_.hidden, nullptr);
    ++result.usage.encoder_calls[j];
  }
  result.errors.blocks = blocks;
  result.errors.errors = Matrix(x.rows(), depth);
  for (std::size_t d = 1; d <= depth; ++d) {
    Matrix g = h[d];
    for (std::size_t e = d; e >= 1; --e) {
      const Activation& act = e == 1 ? options_.output : options_.hidden;
      g = decoders_[e - 1].Forward(g, blocks, act, nullptr);
      ++result.usage.decoder_calls[e - 1];
    }
    const Vector err = RowSquaredErrors(g, x);
    for (std::size_t row = 0; row < err.size(); ++row) {
      result.errors.errors(row, d - 1) = err[row];
    }
    result.recon.push_back(std::move(g));
  }
  return result;
}

PathErrors AESModel::Evaluate(const Matrix& data) const {
  const std::size_t k = members();
  const BlockLayout blocks(k, data.rows());
  return Forward(StackCopies(data, k), blocks).errors;
}

double AESModel::ForwardBackward(const Matrix& x, const BlockLayout& blocks,
                                 const DropoutSpec& dropout, Rng& rng,
                                 AESGrads& grads) const {
  if (x.cols() != input_dim()) {
    Fail(ErrorKind::kShape, "AE-S input has " + std::to_string(x.cols()) +
                                " columns, model expects " +
                                std::to_string(input_dim()));
  }
  const std::size_t depth = plan_.depth;
  const std::size_t k = members();
  const bool drop = dropout.active();

  std::vector<BEForwardCache> enc_cache(depth);
  std::vector<Matrix> h(depth + 1);
  std::vector<Matrix> enc_keep(depth + 1);
  h[0] = x;
  for (std::size_t j = 0; j < depth; ++j) {
    Matrix a = encoders_[j].Forward(h[j], blocks, options_.hidden,
                                    &enc_cache[j]);
    h[j + 1] = drop ? BlockDropout(a, blocks, MemberWidths(plan_, j + 1),
                                   dropout.rate, rng, enc_keep[j + 1])
                    : std::move(a);
  }

  // dec_cache[d-1][e-1]: decoder D_e on path AE-2d; dec_keep likewise for
  // the dropout applied to D_e's output (e > 1).
  std::vector<std::vector<BEForwardCache>> dec_cache(depth);
  std::vector<std::vector<Matrix>> dec_keep(depth);
  std::vector<Matrix> recon(depth);
  for (std::size_t d = 1; d <= depth; ++d) {
    dec_cache[d - 1].resize(d);
    dec_keep[d - 1].resize(d);
    Matrix g = h[d];
    for (std::size_t e = d; e >= 1; --e) {
      const Activation& act = e == 1 ? options_.output : options_.hidden;
      g = decoders_[e - 1].Forward(g, blocks, act, &dec_cache[d - 1][e - 1]);
      if (e > 1 && drop) {
        g = BlockDropout(g, blocks, MemberWidths(plan_, e - 1), dropout.rate,
                         rng, dec_keep[d - 1][e - 1]);
      }
    }
    recon[d - 1] = std::move(g);
  }

  // Loss: (1/K) sum_i sum_d mean_rows ||x - x_hat||^2.
  double loss = 0.0;
  std::vector<double> coef(k, 0.0);
  {
    std::size_t offset = 0;
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t n = blocks[i];
      if (n > 0) {
        coef[i] = 2.0 / (static_cast<double>(k) * static_cast<double>(n));
      }
      offset += n;
    }
    for (std::size_t d = 0; d < depth; ++d) {
      const Vector err = RowSquaredErrors(recon[d], x);
      offset = 0;
      for (std::size_t i = 0; i < k; ++i) {
        const std::size_t n = blocks[i];
        double total = 0.0;
        for (std::size_t row = 0; row < n; ++row) total += err[offset + row];
        if (n > 0) loss += total / static_cast<double>(n);
        offset += n;
      }
    }
    loss /= static_cast<double>(k);
  }

  std::vector<Matrix> grad_h(depth + 1);
  std::vector<bool> grad_h_first(depth + 1, true);
  for (std::size_t d = 1; d <= depth; ++d) {
    Matrix up(x.rows(), x.cols());
    std::size_t offset = 0;
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t row = 0; row < blocks[i]; ++row) {
        auto u = up.row(offset + row);
        auto r = recon[d - 1].row(offset + row);
        auto t = x.row(offset + row);
        for (std::size_t c = 0; c < u.size(); ++c) {
          u[c] = coef[i] * (r[c] - t[c]);
        }
      }
      offset += blocks[i];
    }
    for (std::size_t e = 1; e <= d; ++e) {
      Matrix g_in = decoders_[e - 1].Backward(dec_cache[d - 1][e - 1], up,
                                              grads.decoders[e - 1]);
      if (e < d) {
        MultiplyInPlace(g_in, dec_keep[d - 1][e]);
        up = std::move(g_in);
      } else {
        bool first = grad_h_first[d];
        AddInPlace(grad_h[d], g_in, first);
        grad_h_first[d] = first;
      }
    }
  }
  for (std::size_t j = depth; j >= 1; --j) {
    Matrix g = std::move(grad_h[j]);
    MultiplyInPlace(g, enc_keep[j]);
    const bool want_input = j > 1;
    Matrix g_in = encoders_[j - 1].Backward(enc_cache[j - 1], g,
                                            grads.encoders[j - 1], want_input);
    if (want_input) {
      bool first = grad_h_first[j - 1];
      AddInPlace(grad_h[j - 1], g_in, first);
      grad_h_first[j - 1] = first;
    }
  }
  return loss;
}

AESGrads AESModel::ZeroGrads() const {
  AESGrads grads;
  for (const auto& l : encoders_) grads.encoders.push_back(l.ZeroGrads());
  for (const auto& l : decoders_) grads.decoders.push_back(l.ZeroGrads());
  return grads;
}

std::vector<ParamSlot> AESModel::ParamSlots(const AESGrads& grads) {
  std::vector<ParamSlot> slots;
  auto add = [&](BELayer& layer, const BEGrads& g) {
    slots.push_back({layer.weight().values(), g.weight.values(), true});
    if (layer.factors_trainable()) {
      slots.push_back({layer.in_factors().values(), g.in_factors.values(), false});
      slots.push_back({layer.out_factors().values(), g.out_factors.values(), false});
    }
    slots.push_back({layer.biases().values(), g.biases.values(), false});
  };
  for (std::size_t j = 0; j < encoders_.size(); ++j) add(encoders_[j], grads.encoders[j]);
  for (std::size_t j = 0; j < decoders_.size(); ++j) add(decoders_[j], grads.decoders[j]);
  return slots;
}

std::vector<DenseLayer> AESModel::ExtractPath(std::size_t member,
                                              std::size_t depth) const {
  if (member >= members()) {
    Fail(ErrorKind::kIndex, "member " + std::to_string(member) + " out of range");
  }
  if (depth < 1 || depth > plan_.depth) {
    Fail(ErrorKind::kIndex, "depth " + std::to_string(depth) + " out of range");
  }
  std::vector<DenseLayer> layers;
  for (std::size_t j = 0; j < depth; ++j) {
    layers.push_back(encoders_[j].ExtractMember(member));
  }
  for (std::size_t e = depth; e >= 1; --e) {
    layers.push_back(decoders_[e - 1].ExtractMember(member));
  }
  return layers;
}

Matrix ApplyPath(const std::vector<DenseLayer>& layers, const Matrix& x,
                 const Activation& hidden, const Activation& output) {
  Matrix g = x;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    g = layers[l].Apply(g, l + 1 == layers.size() ? output : hidden);
  }
  return g;
}

std::vector<double> AESModel::Parameters() const {
  std::vector<double> out;
  auto add = [&](const BELayer& l) {
    for (const Matrix* m : {&l.weight(), &l.in_factors(), &l.out_factors(),
                            &l.biases()}) {
      out.insert(out.end(), m->values().begin(), m->values().end());
    }
  };
  for (const auto& l : encoders_) add(l);
  for (const auto& l : decoders_) add(l);
  return out;
}

void AESModel::SetParameters(std::span<const double> values) {
  std::size_t pos = 0;
  auto take = [&](BELayer& l) {
    for (Matrix* m : {&l.weight(), &l.in_factors(), &l.out_factors(),
                      &l.biases()}) {
      if (pos + m->size() > values.size()) {
        Fail(ErrorKind::kShape, "parameter payload too short");
      }
      std::copy_n(values.begin() + pos, m->size(), m->data());
      pos += m->size();
    }
  };
  for (auto& l : encoders_) take(l);
  for (auto& l : decoders_) take(l);
  if (pos != values.size()) {
    Fail(ErrorKind::kShape, "parameter payload length mismatch");
  }
}

TrainResult TrainAES(AESModel& model, const Matrix& data,
                     const TrainOptions& options, Rng& rng) {
  const std::size_t k = model.members();
  const std::size_t n = data.rows();
  if (options.epochs < 1) Fail(ErrorKind::kConfig, "epochs must be >= 1");
  if (options.batch_size < 1) Fail(ErrorKind::kConfig, "batch size must be >= 1");
  if (options.dropout < 0.0 || options.dropout >= 1.0) {
    Fail(ErrorKind::kConfig, "dropout rate must lie in [0, 1)");
  }
  const std::set<std::size_t> snapshot_at(options.snapshot_epochs.begin(),
                                          options.snapshot_epochs.end());
  for (std::size_t e : snapshot_at) {
    if (e < 1 || e > options.epochs) {
      Fail(ErrorKind::kConfig, "snapshot epoch " + std::to_string(e) +
                                   " outside 1.." +
                                   std::to_string(options.epochs));
    }
  }

  std::vector<std::vector<std::size_t>> subsets = options.member_indices;
  if (subsets.empty()) {
    std::vector<std::size_t> all(n);
    for (std::size_t r = 0; r < n; ++r) all[r] = r;
    subsets.assign(k, all);
  }
  if (subsets.size() != k) {
    Fail(ErrorKind::kConfig, "need one training subset per member");
  }
  std::size_t longest = 0;
  for (std::size_t i = 0; i < k; ++i) {
    if (subsets[i].empty()) {
      Fail(ErrorKind::kConfig, "member " + std::to_string(i) +
                                   " has an empty training subset");
    }
    for (std::size_t r : subsets[i]) {
      if (r >= n) Fail(ErrorKind::kIndex, "training index out of range");
    }
    longest = std::max(longest, subsets[i].size());
  }

  AdamState adam(AdamOptions{options.lr, 0.9, 0.999, 1e-8,
                             options.weight_decay});
  AESGrads grads = model.ZeroGrads();
  const std::vector<ParamSlot> slots = model.ParamSlots(grads);
  const DropoutSpec dropout{options.dropout, true};
  const std::size_t bs = options.batch_size;
  const std::size_t steps = (longest + bs - 1) / bs;

  TrainResult result;
  for (std::size_t epoch = 1; epoch <= options.epochs; ++epoch) {
    std::vector<std::vector<std::size_t>> perms(k);
    for (std::size_t i = 0; i < k; ++i) {
      perms[i] = RandomPermutation(rng, subsets[i].size());
    }
    double epoch_loss = 0.0;
    for (std::size_t t = 0; t < steps; ++t) {
      BlockLayout blocks(k, 0);
      for (std::size_t i = 0; i < k; ++i) {
        const std::size_t m = subsets[i].size();
        const std::size_t begin = std::min(m, t * bs);
        blocks[i] = std::min(m, begin + bs) - begin;
      }
      Matrix x(TotalRows(blocks), data.cols());
      std::size_t row = 0;
      for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t b = 0; b < blocks[i]; ++b) {
          const std::size_t src = subsets[i][perms[i][t * bs + b]];
          std::copy(data.row(src).begin(), data.row(src).end(),
                    x.row(row++).begin());
        }
      }
      grads.Zero();
      epoch_loss += model.ForwardBackward(x, blocks, dropout, rng, grads);
      adam.Step(slots);
    }
    result.epoch_losses.push_back(epoch_loss / static_cast<double>(steps));
    if (snapshot_at.count(epoch) != 0) {
      Snapshot snap;
      snap.epoch = epoch;
      snap.errors = model.Evaluate(data);
      snap.loss = AESLoss(snap.errors);
      result.snapshots.push_back(std::move(snap));
    }
  }
  return result;
}

namespace {

constexpr char kMagic[8] = {'R', 'O', 'B', 'O', 'D', 'A', 'E', 'S'};

void WriteU64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t ReadU64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) Fail(ErrorKind::kParse, "truncated model file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

}  // namespace

void SaveModel(const std::string& path, const AESModel& model,
               const std::string& metadata_json) {
  nlohmann::json header;
  const WidthPlan& plan = model.plan();
  header["format"] = "robod-aes";
  header["version"] = 1;
  header["input_dim"] = plan.input_dim;
  header["depth"] = plan.depth;
  header["decays"] = plan.decays;
  header["widths"] = plan.widths;
  header["hidden_activation"] = model.options().hidden.Name();
  header["hidden_slope"] = model.options().hidden.slope;
  header["output_activation"] = model.options().output.Name();
  header["metadata"] = nlohmann::json::parse(metadata_json);
  const std::vector<double> params = model.Parameters();
  header["parameter_count"] = params.size();
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorKind::kIo, "cannot write model file " + path);
  out.write(kMagic, sizeof(kMagic));
  WriteU64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (double v : params) WriteU64(out, std::bit_cast<std::uint64_t>(v));
  if (!out) Fail(ErrorKind::kIo, "failed writing model file " + path);
}

AESModel LoadModel(const std::string& path, std::string* metadata_json) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorKind::kIo, "cannot open model file " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0) {
    Fail(ErrorKind::kParse, path + " is not a model snapshot");
  }
  const std::uint64_t header_len = ReadU64(in);
  std::string text(header_len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(header_len));
  if (!in) Fail(ErrorKind::kParse, "truncated model header");
  const nlohmann::json header = nlohmann::json::parse(text);

  const auto decays = header.at("decays").get<std::vector<double>>();
  const WidthPlan plan = PlanWidths(header.at("input_dim").get<std::size_t>(),
                                    header.at("depth").get<std::size_t>(),
                                    decays);
  AESOptions options;
  options.hidden = Activation::FromName(header.at("hidden_activation"));
  options.hidden.slope = header.at("hidden_slope").get<double>();
  options.output = Activation::FromName(header.at("output_activation"));
  Rng unused(0);
  AESModel model = AESModel::Init(plan, options, unused);
  const std::size_t count = header.at("parameter_count").get<std::size_t>();
  std::vector<double> params(count);
  for (double& v : params) v = std::bit_cast<double>(ReadU64(in));
  model.SetParameters(params);
  if (metadata_json != nullptr) *metadata_json = header.at("metadata").dump();
  return model;
}

}  // namespace robod
