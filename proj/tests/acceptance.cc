// Acceptance checks. Prints one PASS/FAIL/SKIP line per criterion.
//
//   acceptance --group properties     criteria 1-7 (fast, synthetic)
//   acceptance --group quantitative   criteria 8-13 (needs benchmark CSVs)
//
// Benchmark CSVs (cardio.csv, thyroid.csv, lympho.csv with a 0/1 `label`
// column) are looked up in $ROBOD_DATA_DIR, then <source>/data. Exit codes:
// 0 all checked criteria pass, 1 some fail, 77 everything skipped.

#include <chrono>
#include <cstdarg>
#include <cstring>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "robod/aes.h"
#include "robod/baselines.h"
#include "robod/batchens.h"
#include "robod/dataio.h"
#include "robod/ensemble.h"
#include "robod/error.h"
#include "robod/evalkit.h"
#include "robod/nn.h"

namespace fs = std::filesystem;
using namespace robod;

namespace {

enum class Verdict { kPass, kFail, kSkip };

struct Outcome {
  Verdict verdict;
  std::string detail;
};

Outcome Check(bool ok, std::string detail) {
  return {ok ? Verdict::kPass : Verdict::kFail, std::move(detail)};
}

std::string Fmt(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
std::string Fmt(const char* fmt, ...) {
  char buf[512];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, args);
  va_end(args);
  return buf;
}

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

bool SameBits(std::span<const double> a, std::span<const double> b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

Matrix Uniform(Rng& rng, std::size_t r, std::size_t c, double lo = -1, double hi = 1) {
  return RandomUniform(rng, lo, hi, r, c);
}

double Dot(const Matrix& a, const Matrix& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a.data()[i] * b.data()[i];
  return s;
}

// Random layer with random prefix masks, biases on active units and member
// inputs zero beyond their widths.
struct RandomBE {
  BELayer layer;
  BlockLayout blocks;
  Matrix input;
};

RandomBE MakeRandomBE(Rng& rng, std::size_t k) {
  const std::size_t m = 2 + rng.UniformInt(6);
  const std::size_t r = 2 + rng.UniformInt(6);
  std::vector<std::size_t> in_w(k), out_w(k);
  BlockLayout blocks(k);
  Matrix masks(k, r, 0.0), biases(k, r, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    in_w[i] = 1 + rng.UniformInt(m);
    out_w[i] = 1 + rng.UniformInt(r);
    blocks[i] = 1 + rng.UniformInt(4);
    for (std::size_t c = 0; c < out_w[i]; ++c) {
      masks(i, c) = 1.0;
      biases(i, c) = rng.Uniform(-0.5, 0.5);
    }
  }
  RandomBE out{BELayer(Uniform(rng, m, r), Uniform(rng, k, m, 0.5, 1.5),
                       Uniform(rng, k, r, -1.5, 1.5), masks, biases, in_w),
               blocks, Matrix()};
  out.input = Uniform(rng, TotalRows(blocks), m);
  std::size_t row = 0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t b = 0; b < blocks[i]; ++b, ++row) {
      for (std::size_t c = in_w[i]; c < m; ++c) out.input(row, c) = 0.0;
    }
  }
  return out;
}

Matrix Stack(const Matrix& x, std::size_t k) {
  Matrix out(x.rows() * k, x.cols());
  for (std::size_t i = 0; i < k; ++i) {
    std::copy(x.data(), x.data() + x.size(), out.data() + i * x.size());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Properties

Outcome GradientSuite() {
  Rng rng(101);
  double worst = 0.0;
  std::string where;
  std::size_t checked = 0;
  auto record = [&](const GradCheckReport& r, const std::string& what) {
    checked += r.checked;
    if (r.max_rel_error > worst || !r.passed) {
      worst = std::max(worst, r.max_rel_error);
      where = what + ":" + r.worst_param;
    }
    return r.passed;
  };
  bool ok = true;
  const Activation acts[] = {Activation::Identity(), Activation::Relu(),
                             Activation::LeakyRelu(0.01), Activation::Sigmoid()};
  for (int trial = 0; trial < 5; ++trial) {
    for (const Activation& act : acts) {
      DenseLayer layer = DenseLayer::Init(2 + rng.UniformInt(5), 2 + rng.UniformInt(5), rng);
      for (double& b : layer.bias()) b = rng.Uniform(-0.3, 0.3);
      Matrix x = Uniform(rng, 3, layer.fan_in());
      const Matrix probe = Uniform(rng, 3, layer.fan_out());
      layer.Forward(x, act);
      const DenseGrads g = layer.Backward(probe);
      const std::vector<GradCheckParam> params = {
          {"W", layer.weight().values(), g.weight.values()},
          {"b", layer.bias(), g.bias},
          {"x", x.values(), g.input.values()}};
      ok &= record(GradCheck([&] { return Dot(layer.Apply(x, act), probe); }, params),
                   "dense/" + act.Name());
    }
    for (const Activation& act : {Activation::Identity(), Activation::LeakyRelu(0.01)}) {
      RandomBE be = MakeRandomBE(rng, 2 + rng.UniformInt(3));
      const Matrix probe = Uniform(rng, be.input.rows(), be.layer.fan_out());
      BEForwardCache cache;
      be.layer.Forward(be.input, be.blocks, act, &cache);
      BEGrads g = be.layer.ZeroGrads();
      const Matrix gx = be.layer.Backward(cache, probe, g);
      const std::vector<GradCheckParam> params = {
          {"W", be.layer.weight().values(), g.weight.values()},
          {"s", be.layer.in_factors().values(), g.in_factors.values()},
          {"r", be.layer.out_factors().values(), g.out_factors.values()},
          {"b", be.layer.biases().values(), g.biases.values()},
          {"x", be.input.values(), gx.values()}};
      ok &= record(GradCheck([&] {
                     return Dot(be.layer.Forward(be.input, be.blocks, act, nullptr), probe);
                   }, params),
                   "batchens/" + act.Name());
    }
    {
      const std::size_t d = 4 + rng.UniformInt(4);
      const double decays[] = {rng.Uniform(1.2, 2.0), rng.Uniform(2.0, 3.5)};
      AESModel model = AESModel::Init(PlanWidths(d, 2, decays), AESOptions{}, rng);
      for (std::size_t j = 0; j < 2; ++j) {
        for (BELayer* l : {&model.encoder(j), &model.decoder(j)}) {
          for (std::size_t i = 0; i < 2; ++i) {
            for (std::size_t c = 0; c < l->out_width(i); ++c) {
              l->biases()(i, c) = rng.Uniform(-0.2, 0.2);
            }
          }
        }
      }
      const Matrix x = Uniform(rng, 7, d, 0, 1);
      const BlockLayout blocks = {4, 3};
      AESGrads g = model.ZeroGrads();
      Rng unused(0);
      model.ForwardBackward(x, blocks, DropoutSpec{}, unused, g);
      std::vector<GradCheckParam> params;
      for (std::size_t j = 0; j < 2; ++j) {
        for (auto [l, lg] : {std::pair{&model.encoder(j), &g.encoders[j]},
                             std::pair{&model.decoder(j), &g.decoders[j]}}) {
          params.push_back({"W", l->weight().values(), lg->weight.values()});
          params.push_back({"s", l->in_factors().values(), lg->in_factors.values()});
          params.push_back({"r", l->out_factors().values(), lg->out_factors.values()});
          params.push_back({"b", l->biases().values(), lg->biases.values()});
        }
      }
      ok &= record(GradCheck([&] { return AESLoss(model.Forward(x, blocks).errors); },
                             params),
                   "aes-k2-l2");
    }
  }
  return Check(ok, Fmt("%zu partials, worst relative error %.2e (%s), tol 1e-5",
                       checked, worst, where.empty() ? "-" : where.c_str()));
}

Outcome MemberExtraction() {
  Rng rng(202);
  double worst = 0.0;
  const Activation leaky = Activation::LeakyRelu(0.01);
  for (int trial = 0; trial < 50; ++trial) {
    const RandomBE be = MakeRandomBE(rng, 1 + rng.UniformInt(5));
    const Matrix y = be.layer.Forward(be.input, be.blocks, leaky, nullptr);
    std::size_t row = 0;
    for (std::size_t i = 0; i < be.blocks.size(); ++i) {
      const DenseLayer member = be.layer.ExtractMember(i);
      Matrix xi(be.blocks[i], member.fan_in());
      for (std::size_t b = 0; b < be.blocks[i]; ++b) {
        for (std::size_t c = 0; c < member.fan_in(); ++c) xi(b, c) = be.input(row + b, c);
      }
      const Matrix yi = member.Apply(xi, leaky);
      for (std::size_t b = 0; b < be.blocks[i]; ++b) {
        for (std::size_t c = 0; c < be.layer.fan_out(); ++c) {
          const double expect = c < member.fan_out() ? yi(b, c) : 0.0;
          worst = std::max(worst, std::abs(expect - y(row + b, c)));
        }
      }
      row += be.blocks[i];
    }
  }
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t d = 3 + rng.UniformInt(20);
    const std::size_t depth = 1 + rng.UniformInt(6);
    const std::size_t k = 1 + rng.UniformInt(8);
    std::vector<double> decays(k);
    for (double& v : decays) v = rng.Uniform(1.2, 3.5);
    AESModel model = AESModel::Init(PlanWidths(d, depth, decays), AESOptions{}, rng);
    for (std::size_t j = 0; j < depth; ++j) {
      for (BELayer* l : {&model.encoder(j), &model.decoder(j)}) {
        for (std::size_t i = 0; i < k; ++i) {
          for (std::size_t c = 0; c < l->out_width(i); ++c) {
            l->biases()(i, c) = rng.Uniform(-0.3, 0.3);
          }
        }
      }
    }
    const Matrix x = Uniform(rng, 5, d, 0, 1);
    const auto out = model.Forward(Stack(x, k), BlockLayout(k, 5));
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t p = 1; p <= depth; ++p) {
        const Matrix recon = ApplyPath(model.ExtractPath(i, p), x, model.options().hidden,
                                       model.options().output);
        for (std::size_t r = 0; r < 5; ++r) {
          for (std::size_t c = 0; c < d; ++c) {
            worst = std::max(worst, std::abs(recon(r, c) - out.recon[p - 1](i * 5 + r, c)));
          }
        }
      }
    }
  }
  return Check(worst <= 1e-10,
               Fmt("50 random layers + 10 AE-S models, max abs diff %.2e (tol 1e-10)", worst));
}

Outcome MaskingExactness() {
  Rng data_rng(303);
  const std::size_t n = 256, d = 12, depth = 4;
  const Matrix data = Uniform(data_rng, n, d, 0, 1);
  Rng rng(304);
  const std::vector<double> decays = {1.5, 2.0, 2.5, 3.25};
  const std::size_t k = decays.size();
  AESModel model = AESModel::Init(PlanWidths(d, depth, decays), AESOptions{}, rng);
  std::vector<Matrix> masks;
  for (std::size_t j = 0; j < depth; ++j) {
    masks.push_back(model.encoder(j).masks());
    masks.push_back(model.decoder(j).masks());
  }
  AdamState adam(AdamOptions{1e-2, 0.9, 0.999, 1e-8, 1e-5});
  AESGrads grads = model.ZeroGrads();
  const BlockLayout blocks(k, 16);
  const Activation hidden = model.options().hidden;
  std::size_t nonzero = 0, checked = 0;
  bool masks_same = true;
  const int steps = 500;
  for (int step = 0; step < steps; ++step) {
    Matrix batch(16 * k, d);
    for (std::size_t r = 0; r < batch.rows(); ++r) {
      const auto src = data.row(rng.UniformInt(n));
      std::copy(src.begin(), src.end(), batch.row(r).begin());
    }
    grads.Zero();
    model.ForwardBackward(batch, blocks, DropoutSpec{0.2, true}, rng, grads);
    adam.Step(model.ParamSlots(grads));

    // Every layer on real activations: encoders down, then decoders up.
    auto count = [&](const BELayer& l, const Matrix& y) {
      std::size_t row = 0;
      for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t b = 0; b < blocks[i]; ++b, ++row) {
          for (std::size_t c = l.out_width(i); c < l.fan_out(); ++c) {
            ++checked;
            nonzero += y(row, c) != 0.0 || std::signbit(y(row, c));
          }
        }
      }
    };
    Matrix h = batch;
    for (std::size_t j = 0; j < depth; ++j) {
      h = model.encoder(j).Forward(h, blocks, hidden, nullptr);
      count(model.encoder(j), h);
    }
    for (std::size_t j = depth; j-- > 1;) {
      h = model.decoder(j).Forward(h, blocks, hidden, nullptr);
      count(model.decoder(j), h);
    }
    for (std::size_t j = 0; j < depth; ++j) {
      masks_same &= SameBits(masks[2 * j].values(), model.encoder(j).masks().values());
      masks_same &= SameBits(masks[2 * j + 1].values(), model.decoder(j).masks().values());
    }
  }
  return Check(nonzero == 0 && masks_same,
               Fmt("%d steps, %zu masked outputs checked, %zu not +0.0; masks %s",
                   steps, checked, nonzero, masks_same ? "bitwise unchanged" : "CHANGED"));
}

Outcome DegenerateEnsemble() {
  Rng rng(404);
  const Matrix data = Uniform(rng, 150, 9, 0, 1);
  bool ok = true;
  std::size_t cases = 0;
  for (double dropout : {0.0, 0.2}) {
    for (double decay : {1.5, 2.75}) {
      RobodOptions o;
      o.decays = {decay};
      o.depth = 1;
      o.seed = 405 + cases;
      o.grid = HpGrid{{{"epochs", {5}}, {"lr", {1e-3}}, {"dropout", {dropout}},
                       {"weight_decay", {1e-5}}}};
      const RobodResult r = RobodScore(data, o);
      VanillaAEConfig v;
      v.n_layers = 1;
      v.layer_decay = decay;
      v.lr = 1e-3;
      v.epochs = 5;
      v.dropout = dropout;
      v.weight_decay = 1e-5;
      v.seed = RunSeed(o.seed, ExpandGrid(o.grid)[0]);
      ok &= SameBits(r.scores, VanillaAEScore(data, v));
      ++cases;
    }
  }
  return Check(ok, Fmt("%zu seed/HP cases, K=L=B=1 scores %s vanilla AE", cases,
                       ok ? "bitwise equal to" : "DIFFER from"));
}

Outcome AurocOracle() {
  Rng rng(505);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.UniformInt(300);
    Vector s(n);
    std::vector<int> y(n);
    const std::uint64_t levels = 2 + rng.UniformInt(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng.UniformInt(levels)) / levels;
      y[i] = rng.Bernoulli(0.2) ? 1 : 0;
    }
    y[0] = 1;
    y[n - 1] = 0;
    double wins = 0, pairs = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!y[i]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (y[j]) continue;
        pairs += 1;
        wins += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
      }
    }
    worst = std::max(worst, std::abs(Auroc(s, y) - wins / pairs));
  }
  return Check(worst <= 1e-12, Fmt("200 tied instances, max diff %.2e (tol 1e-12)", worst));
}

Outcome SnapshotDeterminism() {
  Rng data_rng(606);
  const Matrix data = Uniform(data_rng, 96, 10, 0, 1);
  const WidthPlan plan = PlanWidths(10, 6, DefaultMemberDecays());
  TrainOptions longer;
  longer.epochs = 500;
  longer.lr = 1e-3;
  longer.dropout = 0.2;
  longer.weight_decay = 1e-5;
  longer.snapshot_epochs = {250, 500};
  TrainOptions shorter = longer;
  shorter.epochs = 250;
  shorter.snapshot_epochs = {250};
  Rng ra(607), rb(607);
  AESModel a = AESModel::Init(plan, AESOptions{}, ra);
  AESModel b = AESModel::Init(plan, AESOptions{}, rb);
  const TrainResult long_run = TrainAES(a, data, longer, ra);
  const TrainResult short_run = TrainAES(b, data, shorter, rb);
  const bool ok = SameBits(long_run.snapshots[0].errors.errors.values(),
                           short_run.snapshots[0].errors.errors.values());
  return Check(ok, Fmt("K=8 L=6 on 96x10: epoch-250 snapshot of a 500-epoch run %s",
                       ok ? "bitwise equals the 250-epoch run" : "DIFFERS"));
}

Outcome SubsampleBookkeeping() {
  Rng data_rng(707);
  const std::size_t n = 200, k = 8;
  const double delta = 0.5;
  const Matrix data = Uniform(data_rng, n, 6, 0, 1);
  RobodOptions o;
  o.decays = DefaultMemberDecays();
  o.depth = 3;
  o.delta = delta;
  o.seed = 708;
  o.grid = HpGrid{{{"epochs", {2}}}};
  const RobodResult r = RobodScore(data, o);
  std::size_t violations = 0, fallback = 0;
  for (std::size_t x = 0; x < n; ++x) {
    bool any_out = false;
    for (std::size_t i = 0; i < k; ++i) any_out |= !r.plan->InSample(i, x);
    const bool flagged = r.fallback[x] != 0;
    fallback += flagged;
    if (flagged == any_out) ++violations;
    for (std::size_t i = 0; i < k; ++i) {
      const bool used = r.contributions(x, i) == 1.0;
      if (!flagged && used && r.plan->InSample(i, x)) ++violations;
      if (!flagged && !used && !r.plan->InSample(i, x)) ++violations;
      if (flagged && !used) ++violations;
    }
  }
  violations += fallback != r.fallback_count;

  // Rate check over many independent plans of the same shape.
  // A point is in a member's sample with probability take / n, independently
  // across members.
  const double take = std::ceil(delta * static_cast<double>(n));
  const double p = std::pow(take / static_cast<double>(n), static_cast<double>(k));
  const int plans = 400;
  std::size_t pooled = 0;
  Rng plan_rng(709);
  for (int t = 0; t < plans; ++t) {
    const SubsamplePlan plan = DrawSubsamplePlan(n, k, delta, plan_rng);
    for (std::size_t x = 0; x < n; ++x) {
      bool covered = false;
      for (std::size_t i = 0; i < k && !covered; ++i) covered = !plan.InSample(i, x);
      pooled += !covered;
    }
  }
  const double trials = static_cast<double>(plans) * n;
  const double mu = trials * p, sigma = std::sqrt(trials * p * (1 - p));
  const double single_mu = n * p, single_sigma = std::sqrt(n * p * (1 - p));
  const bool rate_ok = std::abs(static_cast<double>(pooled) - mu) <= 3 * sigma &&
                       std::abs(static_cast<double>(fallback) - single_mu) <= 3 * single_sigma &&
                       pooled > 0;
  return Check(violations == 0 && rate_ok,
               Fmt("audit n=200 K=8 delta=0.5: %zu violations, %zu fallback points "
                   "(expected %.2f +- %.2f); pooled over %d plans: %zu (expected %.1f +- %.1f)",
                   violations, fallback, single_mu, 3 * single_sigma, plans, pooled, mu,
                   3 * sigma));
}

// ---------------------------------------------------------------------------
// Quantitative

std::optional<fs::path> DataDir() {
  std::vector<fs::path> candidates;
  if (const char* env = std::getenv("ROBOD_DATA_DIR"); env != nullptr && *env) {
    candidates.emplace_back(env);
  }
  candidates.emplace_back(fs::path(ROBOD_SOURCE_DIR) / "data");
  for (const auto& c : candidates) {
    if (fs::exists(c / "cardio.csv")) return c;
  }
  return std::nullopt;
}

struct Bench {
  fs::path dir;
  std::map<std::string, Dataset> cache;

  const Dataset* Get(const std::string& name) {
    if (auto it = cache.find(name); it != cache.end()) return &it->second;
    const fs::path p = dir / (name + ".csv");
    if (!fs::exists(p)) return nullptr;
    return &cache.emplace(name, MinMaxScale(LoadCsv(p.string()))).first->second;
  }
};

const std::uint64_t kSeeds[] = {0, 1, 2};

struct MethodRun {
  Distribution auroc;
  double seconds = 0.0;
};

MethodRun RunRobod(const Dataset& ds, double delta) {
  Vector aurocs;
  MethodRun out;
  for (std::uint64_t seed : kSeeds) {
    RobodOptions o;
    o.seed = seed;
    o.delta = delta;
    const RobodResult r = RobodScore(ds.features, o);
    aurocs.push_back(Auroc(r.scores, ds.labels));
    out.seconds += r.seconds;
  }
  out.auroc = Summarize(aurocs);
  return out;
}

std::map<std::string, MethodRun> g_runs;

const MethodRun& Cached(const std::string& key, const std::function<MethodRun()>& fn) {
  auto it = g_runs.find(key);
  if (it == g_runs.end()) it = g_runs.emplace(key, fn()).first;
  return it->second;
}

std::string MeanStd(const Distribution& d) {
  return Fmt("%.4f +- %.4f", d.mean, d.std);
}

Outcome MissingData(const std::string& name) {
  return {Verdict::kSkip, name + ".csv not found in data directory"};
}

Outcome RobodCardio(Bench& b) {
  const Dataset* cardio = b.Get("cardio");
  if (cardio == nullptr) return MissingData("cardio");
  const MethodRun& r = Cached("robod/cardio", [&] { return RunRobod(*cardio, 0.0); });
  return Check(std::abs(r.auroc.mean - 0.935) <= 0.03 && r.auroc.std <= 0.01,
               "ROBOD Cardio AUROC " + MeanStd(r.auroc) +
                   " (target 0.935 +- 0.03, std <= 0.01)");
}

Outcome RobodLymphoThyroid(Bench& b) {
  const Dataset* lympho = b.Get("lympho");
  const Dataset* thyroid = b.Get("thyroid");
  if (lympho == nullptr) return MissingData("lympho");
  if (thyroid == nullptr) return MissingData("thyroid");
  const MethodRun& l = Cached("robod/lympho", [&] { return RunRobod(*lympho, 0.0); });
  const MethodRun& t = Cached("robod/thyroid", [&] { return RunRobod(*thyroid, 0.0); });
  return Check(l.auroc.mean >= 0.95 && std::abs(t.auroc.mean - 0.861) <= 0.05,
               "Lympho " + MeanStd(l.auroc) + " (>= 0.95), Thyroid " + MeanStd(t.auroc) +
                   " (0.861 +- 0.05)");
}

Outcome RobodSubCardio(Bench& b) {
  const Dataset* cardio = b.Get("cardio");
  if (cardio == nullptr) return MissingData("cardio");
  const MethodRun& full = Cached("robod/cardio", [&] { return RunRobod(*cardio, 0.0); });
  const MethodRun& sub = Cached("robod-sub/cardio", [&] { return RunRobod(*cardio, 0.1); });
  const double ratio = sub.seconds / full.seconds;
  return Check(std::abs(sub.auroc.mean - 0.918) <= 0.04 && ratio < 0.35,
               "ROBOD-0.1 Cardio AUROC " + MeanStd(sub.auroc) +
                   Fmt(" (0.918 +- 0.04), time ratio %.3f (< 0.35)", ratio));
}

Outcome IRobodCardio(Bench& b) {
  const Dataset* cardio = b.Get("cardio");
  if (cardio == nullptr) return MissingData("cardio");
  const MethodRun& full = Cached("robod/cardio", [&] { return RunRobod(*cardio, 0.0); });
  const MethodRun& ir = Cached("irobod/cardio", [&] {
    Vector aurocs;
    MethodRun out;
    for (std::uint64_t seed : kSeeds) {
      IRobodOptions o;
      o.seed = seed;
      const RobodResult r = IRobodScore(cardio->features, o);
      aurocs.push_back(Auroc(r.scores, cardio->labels));
      out.seconds += r.seconds;
    }
    out.auroc = Summarize(aurocs);
    return out;
  });
  const double ratio = full.seconds / ir.seconds;
  return Check(std::abs(ir.auroc.mean - 0.871) <= 0.04 && ratio <= 1.0 / 3.0,
               "i-ROBOD Cardio AUROC " + MeanStd(ir.auroc) +
                   Fmt(" (0.871 +- 0.04), ROBOD/i-ROBOD time %.3f (<= 0.333)", ratio));
}

Outcome IsoForestSweeps(Bench& b) {
  const std::pair<const char*, double> targets[] = {
      {"cardio", 0.941}, {"thyroid", 0.979}, {"lympho", 0.995}};
  bool ok = true;
  std::string detail;
  for (const auto& [name, target] : targets) {
    const Dataset* ds = b.Get(name);
    if (ds == nullptr) return MissingData(name);
    const SweepResult r = Sweep(IsoForestDetector(ds->features), IsoForestDefaultGrid(),
                                ds->labels, kSeeds);
    double grid_std = 0.0;
    for (const auto& d : r.summary.per_seed) grid_std = std::max(grid_std, d.std);
    ok &= std::abs(r.summary.mean_of_means - target) <= 0.03 && grid_std <= 0.03;
    detail += Fmt("%s%s %.4f (%.3f +- 0.03, grid std %.4f)", detail.empty() ? "" : "; ",
                  name, r.summary.mean_of_means, target, grid_std);
  }
  return Check(ok, detail);
}

Outcome Sensitivity(Bench& b) {
  const Dataset* cardio = b.Get("cardio");
  if (cardio == nullptr) return MissingData("cardio");
  const SweepResult r = Sweep(VanillaAEDetector(cardio->features, VanillaAEConfig{}),
                              VanillaDefaultGrid(), cardio->labels, kSeeds);
  double spread = 0.0;
  int hyper_wins = 0;
  for (std::size_t s = 0; s < r.seeds.size(); ++s) {
    spread += r.summary.per_seed[s].std / r.seeds.size();
    hyper_wins += r.hyper_auroc[s] >= r.summary.per_seed[s].mean;
  }
  return Check(spread >= 0.04 && hyper_wins >= 2,
               Fmt("per-config std %.4f (>= 0.04), hyper-ensemble >= mean on %d/3 seeds "
                   "(mean of means %.4f)",
                   spread, hyper_wins, r.summary.mean_of_means));
}

struct Criterion {
  int id;
  std::string name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::string group = "all";
  app.add_option("--group", group, "properties, quantitative or all")
      ->check(CLI::IsMember({"properties", "quantitative", "all"}));
  CLI11_PARSE(app, argc, argv);

  std::vector<Criterion> criteria;
  if (group != "quantitative") {
    criteria.push_back({1, "gradient suite", GradientSuite});
    criteria.push_back({2, "member extraction", MemberExtraction});
    criteria.push_back({3, "masking exactness", MaskingExactness});
    criteria.push_back({4, "degenerate ensemble", DegenerateEnsemble});
    criteria.push_back({5, "AUROC oracle", AurocOracle});
    criteria.push_back({6, "snapshot determinism", SnapshotDeterminism});
    criteria.push_back({7, "subsample bookkeeping", SubsampleBookkeeping});
  }
  const std::optional<fs::path> data_dir = DataDir();
  Bench bench{data_dir.value_or(fs::path()), {}};
  if (group != "properties") {
    auto needs_data = [&](std::function<Outcome(Bench&)> fn) -> std::function<Outcome()> {
      return [&, fn] {
        if (!data_dir) {
          return Outcome{Verdict::kSkip,
                         "benchmark CSVs not found (set ROBOD_DATA_DIR or add data/)"};
        }
        return fn(bench);
      };
    };
    criteria.push_back({8, "ROBOD Cardio", needs_data(RobodCardio)});
    criteria.push_back({9, "ROBOD Lympho/Thyroid", needs_data(RobodLymphoThyroid)});
    criteria.push_back({10, "ROBOD-0.1 Cardio", needs_data(RobodSubCardio)});
    criteria.push_back({11, "i-ROBOD Cardio", needs_data(IRobodCardio)});
    criteria.push_back({12, "Isolation Forest sweeps", needs_data(IsoForestSweeps)});
    criteria.push_back({13, "sensitivity signature", needs_data(Sensitivity)});
  }

  int passed = 0, failed = 0, skipped = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {Verdict::kFail, std::string("exception: ") + e.what()};
    }
    const char* tag = o.verdict == Verdict::kPass ? "PASS"
                      : o.verdict == Verdict::kFail ? "FAIL"
                                                    : "SKIP";
    std::printf("[%s] criterion %2d %-24s %s (%.1f s)\n", tag, c.id, c.name.c_str(),
                o.detail.c_str(), Seconds(start));
    std::fflush(stdout);
    (o.verdict == Verdict::kPass ? passed : o.verdict == Verdict::kFail ? failed : skipped)++;
  }
  std::printf("%d passed, %d failed, %d skipped\n", passed, failed, skipped);
  if (failed > 0) return 1;
  if (passed == 0 && skipped > 0) return 77;
  return 0;
}
