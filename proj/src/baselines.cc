#include "robod/baselines.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "robod/error.h"

namespace robod {

VanillaAE VanillaAE::Init(std::size_t input_dim, std::size_t n_layers,
                          double layer_decay, const AESOptions& activations,
                          Rng& rng) {
  if (n_layers < 1) Fail(ErrorKind::kConfig, "n_layers must be >= 1");
  const double decays[] = {layer_decay};
  const WidthPlan plan = PlanWidths(input_dim, n_layers, decays);
  VanillaAE ae;
  ae.widths_ = plan.widths[0];
  ae.activations_ = activations;
  for (std::size_t j = 0; j < n_layers; ++j) {
    ae.layers_.push_back(DenseLayer::Init(ae.widths_[j], ae.widths_[j + 1], rng));
  }
  for (std::size_t j = n_layers; j-- > 0;) {
    ae.layers_.push_back(DenseLayer::Init(ae.widths_[j + 1], ae.widths_[j], rng));
  }
  return ae;
}

Matrix VanillaAE::Reconstruct(const Matrix& x) const {
  Matrix h = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const bool last = l + 1 == layers_.size();
    h = layers_[l].Apply(h, last ? activations_.output : activations_.hidden);
  }
  return h;
}

Vector VanillaAE::Score(const Matrix& x) const {
  return RowSquaredErrors(Reconstruct(x), x);
}

double VanillaAE::TrainStep(const Matrix& batch, double dropout, Rng& rng,
                            AdamState& adam) {
  const DropoutSpec spec{dropout, true};
  const std::size_t count = layers_.size();
  std::vector<Matrix> keep(count);
  Matrix h = batch;
  for (std::size_t l = 0; l < count; ++l) {
    const bool last = l + 1 == count;
    h = layers_[l].Forward(h, last ? activations_.output : activations_.hidden);
    if (!last && spec.active()) h = DropoutApply(spec, h, rng, &keep[l]);
  }
  Matrix g;
  const double loss = MseLoss(h, batch, &g);

  std::vector<DenseGrads> grads(count);
  for (std::size_t l = count; l-- > 0;) {
    grads[l] = layers_[l].Backward(g);
    if (l > 0) {
      g = std::move(grads[l].input);
      if (!keep[l - 1].empty()) {
        for (std::size_t k = 0; k < g.size(); ++k) {
          g.data()[k] *= keep[l - 1].data()[k];
        }
      }
    }
  }
  std::vector<ParamSlot> slots;
  for (std::size_t l = 0; l < count; ++l) {
    slots.push_back({layers_[l].weight().values(), grads[l].weight.values(), true});
    slots.push_back({layers_[l].bias(), grads[l].bias, false});
  }
  adam.Step(slots);
  return loss;
}

std::vector<VanillaAESnapshot> TrainVanillaAE(
    const Matrix& data, const VanillaAEConfig& config,
    std::span<const std::size_t> snapshot_epochs) {
  if (config.epochs < 1) Fail(ErrorKind::kConfig, "epochs must be >= 1");
  if (config.batch_size < 1) Fail(ErrorKind::kConfig, "batch size must be >= 1");
  if (config.dropout < 0.0 || config.dropout >= 1.0) {
    Fail(ErrorKind::kConfig, "dropout rate must lie in [0, 1)");
  }
  std::set<std::size_t> snap(snapshot_epochs.begin(), snapshot_epochs.end());
  if (snap.empty()) snap.insert(config.epochs);
  for (std::size_t e : snap) {
    if (e < 1 || e > config.epochs) {
      Fail(ErrorKind::kConfig, "snapshot epoch outside 1..epochs");
    }
  }
  Rng rng(config.seed);
  VanillaAE ae = VanillaAE::Init(data.cols(), config.n_layers,
                                 config.layer_decay, config.activations, rng);
  AdamState adam(AdamOptions{config.lr, 0.9, 0.999, 1e-8, config.weight_decay});
  const std::size_t n = data.rows();
  const std::size_t bs = config.batch_size;
  const std::size_t steps = (n + bs - 1) / bs;
  std::vector<VanillaAESnapshot> out;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const std::vector<std::size_t> perm = RandomPermutation(rng, n);
    for (std::size_t t = 0; t < steps; ++t) {
      const std::size_t begin = t * bs;
      const std::size_t rows = std::min(n, begin + bs) - begin;
      Matrix batch(rows, data.cols());
      for (std::size_t b = 0; b < rows; ++b) {
        auto src = data.row(perm[begin + b]);
        std::copy(src.begin(), src.end(), batch.row(b).begin());
      }
      ae.TrainStep(batch, config.dropout, rng, adam);
    }
    if (snap.count(epoch) != 0) {
      VanillaAESnapshot s;
      s.epoch = epoch;
      s.scores = ae.Score(data);
      double total = 0.0;
      for (double v : s.scores) total += v;
      s.loss = total / static_cast<double>(n);
      out.push_back(std::move(s));
    }
  }
  return out;
}

Vector VanillaAEScore(const Matrix& data, const VanillaAEConfig& config) {
  return TrainVanillaAE(data, config).back().scores;
}

double AveragePathLength(std::size_t n) {
  if (n <= 1) return 0.0;
  constexpr double kEulerGamma = 0.5772156649015329;
  const double m = static_cast<double>(n - 1);
  const double harmonic = std::log(m) + kEulerGamma;
  return 2.0 * harmonic - 2.0 * m / static_cast<double>(n);
}

double IsoTree::PathLength(std::span<const double> x) const {
  int node = 0;
  double edges = 0.0;
  while (nodes[node].feature >= 0) {
    const IsoTreeNode& nd = nodes[node];
    node = x[nd.feature] < nd.split ? nd.left : nd.right;
    edges += 1.0;
  }
  return edges + AveragePathLength(nodes[node].size);
}

std::size_t IsoTree::Height() const {
  std::vector<std::size_t> depth(nodes.size(), 0);
  std::size_t h = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    h = std::max(h, depth[i]);
    if (nodes[i].feature >= 0) {
      depth[nodes[i].left] = depth[i] + 1;
      depth[nodes[i].right] = depth[i] + 1;
    }
  }
  return h;
}

IsoForest::IsoForest(std::vector<IsoTree> trees, std::size_t subsample)
    : trees_(std::move(trees)), subsample_(subsample) {
  if (trees_.empty()) Fail(ErrorKind::kConfig, "forest needs at least one tree");
}

double IsoForest::MeanPathLength(std::span<const double> x) const {
  double total = 0.0;
  for (const auto& t : trees_) total += t.PathLength(x);
  return total / static_cast<double>(trees_.size());
}

double IsoForest::Score(std::span<const double> x) const {
  const double c = AveragePathLength(subsample_);
  if (c <= 0.0) return 0.5;
  return std::exp2(-MeanPathLength(x) / c);
}

Vector IsoForest::ScoreAll(const Matrix& data) const {
  Vector out(data.rows());
  for (std::size_t r = 0; r < data.rows(); ++r) out[r] = Score(data.row(r));
  return out;
}

namespace {

struct TreeBuilder {
  const Matrix& data;
  std::size_t height_limit;
  Rng& rng;
  IsoTree tree;

  int Build(std::vector<std::size_t>& rows, std::size_t begin, std::size_t end,
            std::size_t height) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(IsoTreeNode{});
    tree.nodes[id].size = end - begin;
    if (height >= height_limit || end - begin <= 1) return id;

    // Features that still vary within the node.
    std::vector<std::size_t> candidates;
    std::vector<double> lo, hi;
    for (std::size_t c = 0; c < data.cols(); ++c) {
      double mn = data(rows[begin], c);
      double mx = mn;
      for (std::size_t i = begin + 1; i < end; ++i) {
        mn = std::min(mn, data(rows[i], c));
        mx = std::max(mx, data(rows[i], c));
      }
      if (mx > mn) {
        candidates.push_back(c);
        lo.push_back(mn);
        hi.push_back(mx);
      }
    }
    if (candidates.empty()) return id;
    const std::size_t pick = rng.UniformInt(candidates.size());
    const std::size_t feature = candidates[pick];
    double split = lo[pick];
    while (!(split > lo[pick])) split = rng.Uniform(lo[pick], hi[pick]);

    const auto mid = std::partition(
        rows.begin() + static_cast<std::ptrdiff_t>(begin),
        rows.begin() + static_cast<std::ptrdiff_t>(end),
        [&](std::size_t r) { return data(r, feature) < split; });
    const auto m = static_cast<std::size_t>(mid - rows.begin());
    tree.nodes[id].feature = static_cast<int>(feature);
    tree.nodes[id].split = split;
    const int left = Build(rows, begin, m, height + 1);
    const int right = Build(rows, m, end, height + 1);
    tree.nodes[id].left = left;
    tree.nodes[id].right = right;
    return id;
  }
};

}  // namespace

IsoForest FitIsoForest(const Matrix& data, const IsoForestOptions& options,
                       bool* clamped) {
  if (options.trees < 1) Fail(ErrorKind::kConfig, "need at least one tree");
  if (options.subsample < 1) Fail(ErrorKind::kConfig, "subsample must be >= 1");
  const std::size_t n = data.rows();
  if (n == 0) Fail(ErrorKind::kConfig, "cannot fit a forest on no data");
  std::size_t psi = options.subsample;
  if (clamped != nullptr) *clamped = false;
  if (psi > n) {
    if (!options.clamp_subsample) {
      Fail(ErrorKind::kConfig, "subsample " + std::to_string(psi) +
                                   " exceeds " + std::to_string(n) + " rows");
    }
    psi = n;
    if (clamped != nullptr) *clamped = true;
  }
  const auto height_limit =
      static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(psi))));
  std::vector<IsoTree> trees;
  trees.reserve(options.trees);
  for (std::size_t t = 0; t < options.trees; ++t) {
    Rng rng(DeriveSeed(options.seed, t));
    std::vector<std::size_t> rows = SampleWithoutReplacement(rng, n, psi);
    TreeBuilder builder{data, height_limit, rng, {}};
    builder.Build(rows, 0, rows.size(), 0);
    trees.push_back(std::move(builder.tree));
  }
  return IsoForest(std::move(trees), psi);
}

}  // namespace robod
