#include "robod/ensemble.h"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "robod/error.h"

namespace robod {

namespace {

constexpr std::uint64_t kPlanStream = 0x5355425341ULL;

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since)
      .count();
}

void CheckNames(const HpGrid& grid, std::initializer_list<const char*> allowed,
                const std::string& what) {
  for (const auto& [name, values] : grid.dims) {
    const bool ok = std::any_of(allowed.begin(), allowed.end(),
                                [&](const char* a) { return name == a; });
    if (!ok) Fail(ErrorKind::kConfig, what + " grid does not accept '" + name + "'");
  }
}

std::size_t ToCount(double v, const std::string& name) {
  if (!(v >= 1.0) || v != std::floor(v)) {
    Fail(ErrorKind::kConfig, name + " must be a positive integer");
  }
  return static_cast<std::size_t>(v);
}

// Configs that differ only in `epochs`, in first-appearance order.
struct EpochGroup {
  std::vector<std::size_t> members;  // config indices
  std::vector<std::size_t> epochs;   // sorted unique
};

std::vector<EpochGroup> GroupByEpochs(const std::vector<HpConfig>& configs,
                                      std::size_t default_epochs) {
  std::map<std::vector<std::pair<std::string, double>>, std::size_t> index;
  std::vector<EpochGroup> groups;
  for (const HpConfig& c : configs) {
    std::vector<std::pair<std::string, double>> key;
    for (const auto& kv : c.values) {
      if (kv.first != "epochs") key.push_back(kv);
    }
    std::sort(key.begin(), key.end());
    auto [it, fresh] = index.emplace(key, groups.size());
    if (fresh) groups.emplace_back();
    EpochGroup& g = groups[it->second];
    g.members.push_back(c.index);
    if (default_epochs > 0) {
      g.epochs.push_back(
          ToCount(c.Get("epochs", static_cast<double>(default_epochs)), "epochs"));
    }
  }
  for (EpochGroup& g : groups) {
    std::sort(g.epochs.begin(), g.epochs.end());
    g.epochs.erase(std::unique(g.epochs.begin(), g.epochs.end()), g.epochs.end());
  }
  return groups;
}

std::size_t EpochOf(const HpConfig& c, std::size_t default_epochs) {
  return ToCount(c.Get("epochs", static_cast<double>(default_epochs)), "epochs");
}

Vector MeanOf(const std::vector<ConfigRun>& runs) {
  std::vector<Vector> all;
  all.reserve(runs.size());
  for (const auto& r : runs) all.push_back(r.scores);
  return HyperEnsemble(all);
}

constexpr std::size_t kDefaultEpochs = 250;

}  // namespace

bool HpGrid::Has(const std::string& name) const {
  return std::any_of(dims.begin(), dims.end(),
                     [&](const auto& d) { return d.first == name; });
}

std::size_t HpGrid::Size() const {
  std::size_t b = 1;
  for (const auto& d : dims) b *= d.second.size();
  return b;
}

HpGrid HpGrid::FromJson(const nlohmann::ordered_json& j) {
  if (!j.is_object()) Fail(ErrorKind::kConfig, "grid must be a JSON object");
  HpGrid grid;
  for (const auto& [name, values] : j.items()) {
    std::vector<double> list;
    if (values.is_array()) {
      for (const auto& v : values) {
        if (!v.is_number()) {
          Fail(ErrorKind::kConfig, "grid values for '" + name + "' must be numbers");
        }
        list.push_back(v.get<double>());
      }
    } else if (values.is_number()) {
      list.push_back(values.get<double>());
    } else {
      Fail(ErrorKind::kConfig, "grid entry '" + name + "' must be a number list");
    }
    grid.dims.emplace_back(name, std::move(list));
  }
  return grid;
}

nlohmann::ordered_json HpGrid::ToJson() const {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [name, values] : dims) j[name] = values;
  return j;
}

bool HpConfig::Has(const std::string& name) const {
  return std::any_of(values.begin(), values.end(),
                     [&](const auto& kv) { return kv.first == name; });
}

double HpConfig::Get(const std::string& name) const {
  for (const auto& [k, v] : values) {
    if (k == name) return v;
  }
  Fail(ErrorKind::kConfig, "config has no value for '" + name + "'");
}

double HpConfig::Get(const std::string& name, double fallback) const {
  for (const auto& [k, v] : values) {
    if (k == name) return v;
  }
  return fallback;
}

nlohmann::ordered_json HpConfig::ToJson() const {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [k, v] : values) j[k] = v;
  return j;
}

std::vector<HpConfig> ExpandGrid(const HpGrid& grid) {
  if (grid.dims.empty()) Fail(ErrorKind::kConfig, "grid has no dimensions");
  std::set<std::string> names;
  for (const auto& [name, values] : grid.dims) {
    if (values.empty()) {
      Fail(ErrorKind::kConfig, "grid dimension '" + name + "' has no values");
    }
    if (!names.insert(name).second) {
      Fail(ErrorKind::kConfig, "grid dimension '" + name + "' appears twice");
    }
  }
  const std::size_t total = grid.Size();
  std::vector<HpConfig> out(total);
  for (std::size_t b = 0; b < total; ++b) {
    out[b].index = b;
    // Mixed-radix digits with the last dimension fastest.
    std::size_t rest = b;
    std::vector<double> picked(grid.dims.size());
    for (std::size_t d = grid.dims.size(); d-- > 0;) {
      const std::size_t len = grid.dims[d].second.size();
      picked[d] = grid.dims[d].second[rest % len];
      rest /= len;
    }
    for (std::size_t d = 0; d < grid.dims.size(); ++d) {
      out[b].values.emplace_back(grid.dims[d].first, picked[d]);
    }
  }
  return out;
}

HpGrid RobodDefaultGrid() {
  return HpGrid{{{"epochs", {250, 500}},
                 {"lr", {1e-3, 1e-4}},
                 {"dropout", {0.0, 0.2}},
                 {"weight_decay", {0.0, 1e-5}}}};
}

HpGrid VanillaDefaultGrid() {
  return HpGrid{{{"n_layers", {2, 3, 4, 5, 6}},
                 {"layer_decay", {1.5, 1.75, 2, 2.25, 2.5, 2.75, 3, 3.25}},
                 {"epochs", {250, 500}},
                 {"lr", {1e-3, 1e-4}},
                 {"dropout", {0.0, 0.2}},
                 {"weight_decay", {0.0, 1e-5}}}};
}

HpGrid IsoForestDefaultGrid() {
  return HpGrid{{{"trees", {50, 100, 200, 500}},
                 {"subsample", {64, 128, 256, 512}}}};
}

std::vector<double> DefaultMemberDecays() {
  return {1.5, 1.75, 2.0, 2.25, 2.5, 2.75, 3.0, 3.25};
}

std::uint64_t RunSeed(std::uint64_t base_seed, const HpConfig& config) {
  std::vector<std::pair<std::string, double>> kv;
  for (const auto& p : config.values) {
    if (p.first != "epochs") kv.push_back(p);
  }
  std::sort(kv.begin(), kv.end());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t byte) {
    h ^= byte;
    h *= 0x100000001b3ULL;
  };
  for (const auto& [name, value] : kv) {
    for (char c : name) mix(static_cast<unsigned char>(c));
    mix(0);
    const double v = value == 0.0 ? 0.0 : value;  // fold -0 into +0
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int s = 0; s < 64; s += 8) mix((bits >> s) & 0xff);
  }
  return DeriveSeed(base_seed, h);
}

void ParallelFor(std::size_t count, std::size_t jobs,
                 const std::function<void(std::size_t)>& fn) {
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min(jobs, count);
  if (jobs <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

bool SubsamplePlan::InSample(std::size_t member, std::size_t point) const {
  const auto& s = in_sample.at(member);
  return std::binary_search(s.begin(), s.end(), point);
}

SubsamplePlan DrawSubsamplePlan(std::size_t n, std::size_t members,
                                double delta, Rng& rng) {
  if (!(delta > 0.0 && delta < 1.0)) {
    Fail(ErrorKind::kConfig, "sampling rate must lie in (0, 1)");
  }
  if (members == 0) Fail(ErrorKind::kConfig, "plan needs at least one member");
  SubsamplePlan plan;
  plan.delta = delta;
  plan.n = n;
  const auto take = std::min<std::size_t>(
      n, static_cast<std::size_t>(std::ceil(delta * static_cast<double>(n))));
  for (std::size_t i = 0; i < members; ++i) {
    std::vector<std::size_t> in = SampleWithoutReplacement(rng, n, take);
    std::sort(in.begin(), in.end());
    std::vector<std::size_t> out;
    out.reserve(n - in.size());
    std::size_t k = 0;
    for (std::size_t r = 0; r < n; ++r) {
      if (k < in.size() && in[k] == r) {
        ++k;
      } else {
        out.push_back(r);
      }
    }
    plan.in_sample.push_back(std::move(in));
    plan.out_sample.push_back(std::move(out));
  }
  return plan;
}

Vector CombineMemberScores(const PathErrors& errors, const SubsamplePlan* plan,
                           Matrix* contributions, std::vector<char>* fallback) {
  const std::size_t k = errors.members();
  const std::size_t depth = errors.depth();
  if (k == 0) Fail(ErrorKind::kShape, "no members to combine");
  const std::size_t n = errors.blocks[0];
  for (std::size_t b : errors.blocks) {
    if (b != n) Fail(ErrorKind::kShape, "members scored different row counts");
  }
  // held_out(x, i) == 1 when member i did not train on x.
  Matrix held_out(n, k, 1.0);
  if (plan != nullptr) {
    if (plan->members() != k || plan->n != n) {
      Fail(ErrorKind::kShape, "subsample plan does not match the scores");
    }
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t r : plan->in_sample[i]) held_out(r, i) = 0.0;
    }
  }
  if (contributions != nullptr) *contributions = Matrix(n, k, 0.0);
  if (fallback != nullptr) fallback->assign(n, 0);

  Vector out(n);
  for (std::size_t x = 0; x < n; ++x) {
    std::size_t used = 0;
    for (std::size_t i = 0; i < k; ++i) used += held_out(x, i) != 0.0;
    const bool fall_back = used == 0;
    if (fall_back) used = k;
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      if (!fall_back && held_out(x, i) == 0.0) continue;
      sum += MemberScore(errors, i, x);
      if (contributions != nullptr) (*contributions)(x, i) = 1.0;
    }
    out[x] = sum / static_cast<double>(used * depth);
    if (fallback != nullptr) (*fallback)[x] = fall_back ? 1 : 0;
  }
  return out;
}

RobodResult RobodScore(const Matrix& data, const RobodOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  CheckNames(options.grid, {"epochs", "lr", "dropout", "weight_decay", "batch_size"},
             "ROBOD");
  if (options.delta != 0.0 && !(options.delta > 0.0 && options.delta < 1.0)) {
    Fail(ErrorKind::kConfig, "sampling rate must lie in (0, 1)");
  }
  if (data.rows() == 0) Fail(ErrorKind::kConfig, "no data rows");
  const WidthPlan plan = PlanWidths(data.cols(), options.depth, options.decays);
  const std::vector<HpConfig> configs = ExpandGrid(options.grid);
  const std::vector<EpochGroup> groups = GroupByEpochs(configs, kDefaultEpochs);
  const std::size_t k = plan.members();

  RobodResult result;
  if (options.delta > 0.0) {
    Rng plan_rng(DeriveSeed(options.seed, kPlanStream));
    result.plan = DrawSubsamplePlan(data.rows(), k, options.delta, plan_rng);
  }
  const SubsamplePlan* sub = result.plan ? &*result.plan : nullptr;

  result.runs.resize(configs.size());
  ParallelFor(groups.size(), options.jobs, [&](std::size_t g) {
    const auto group_start = std::chrono::steady_clock::now();
    const EpochGroup& group = groups[g];
    const HpConfig& head = configs[group.members.front()];
    Rng rng(RunSeed(options.seed, head));
    AESModel model = AESModel::Init(plan, options.activations, rng);
    TrainOptions train;
    train.epochs = group.epochs.back();
    train.lr = head.Get("lr", 1e-3);
    train.weight_decay = head.Get("weight_decay", 0.0);
    train.dropout = head.Get("dropout", 0.0);
    train.batch_size = ToCount(
        head.Get("batch_size", static_cast<double>(options.batch_size)),
        "batch_size");
    train.snapshot_epochs = group.epochs;
    if (sub != nullptr) train.member_indices = sub->in_sample;
    const TrainResult trained = TrainAES(model, data, train, rng);
    const double seconds = Seconds(group_start);
    for (std::size_t c : group.members) {
      const std::size_t epoch = EpochOf(configs[c], kDefaultEpochs);
      const auto snap = std::find_if(
          trained.snapshots.begin(), trained.snapshots.end(),
          [&](const Snapshot& s) { return s.epoch == epoch; });
      ConfigRun& run = result.runs[c];
      run.config = configs[c];
      // The plan is shared by every config; config 0 records the audit trail.
      const bool audit = sub != nullptr && c == 0;
      run.scores = CombineMemberScores(snap->errors, sub,
                                       audit ? &result.contributions : nullptr,
                                       audit ? &result.fallback : nullptr);
      run.loss = snap->loss;
      run.seconds = seconds;
    }
  });
  result.scores = MeanOf(result.runs);
  if (sub != nullptr) {
    result.fallback_count = static_cast<std::size_t>(
        std::count(result.fallback.begin(), result.fallback.end(), 1));
  }
  result.seconds = Seconds(start);
  return result;
}

VanillaAEConfig VanillaConfigFrom(const HpConfig& config,
                                  const VanillaAEConfig& base) {
  VanillaAEConfig c = base;
  c.n_layers = ToCount(config.Get("n_layers", static_cast<double>(c.n_layers)),
                       "n_layers");
  c.layer_decay = config.Get("layer_decay", c.layer_decay);
  c.lr = config.Get("lr", c.lr);
  c.epochs = ToCount(config.Get("epochs", static_cast<double>(c.epochs)), "epochs");
  c.dropout = config.Get("dropout", c.dropout);
  c.weight_decay = config.Get("weight_decay", c.weight_decay);
  c.batch_size = ToCount(
      config.Get("batch_size", static_cast<double>(c.batch_size)), "batch_size");
  return c;
}

RobodResult IRobodScore(const Matrix& data, const IRobodOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  CheckNames(options.grid,
             {"n_layers", "layer_decay", "epochs", "lr", "dropout",
              "weight_decay", "batch_size"},
             "i-ROBOD");
  if (!options.grid.Has("n_layers") || !options.grid.Has("layer_decay")) {
    Fail(ErrorKind::kConfig, "i-ROBOD grid needs n_layers and layer_decay");
  }
  if (data.rows() == 0) Fail(ErrorKind::kConfig, "no data rows");
  const std::vector<HpConfig> configs = ExpandGrid(options.grid);
  VanillaAEConfig base;
  base.batch_size = options.batch_size;
  base.activations = options.activations;
  base.epochs = kDefaultEpochs;

  RobodResult result;
  result.runs.resize(configs.size());
  ParallelFor(configs.size(), options.jobs, [&](std::size_t c) {
    const auto run_start = std::chrono::steady_clock::now();
    VanillaAEConfig vc = VanillaConfigFrom(configs[c], base);
    vc.seed = RunSeed(options.seed, configs[c]);
    auto snaps = TrainVanillaAE(data, vc);
    ConfigRun& run = result.runs[c];
    run.config = configs[c];
    run.scores = std::move(snaps.back().scores);
    run.loss = snaps.back().loss;
    run.seconds = Seconds(run_start);
  });
  result.scores = MeanOf(result.runs);
  result.seconds = Seconds(start);
  return result;
}

Vector HyperEnsemble(const std::vector<Vector>& scores) {
  if (scores.empty()) Fail(ErrorKind::kConfig, "no score vectors to average");
  const std::size_t n = scores.front().size();
  Vector out(n, 0.0);
  for (const Vector& s : scores) {
    if (s.size() != n) Fail(ErrorKind::kShape, "score vectors differ in length");
    for (std::size_t x = 0; x < n; ++x) out[x] += s[x];
  }
  const auto b = static_cast<double>(scores.size());
  for (double& v : out) v /= b;
  return out;
}

std::size_t SelectByLowestLoss(std::span<const double> losses) {
  std::size_t best = 0;
  bool found = false;
  for (std::size_t i = 0; i < losses.size(); ++i) {
    if (std::isnan(losses[i])) continue;
    if (!found || losses[i] < losses[best]) {
      best = i;
      found = true;
    }
  }
  return best;
}

Detector VanillaAEDetector(const Matrix& data, const VanillaAEConfig& base) {
  return [&data, base](const HpConfig& config,
                       std::span<const std::size_t> epochs,
                       std::uint64_t seed) {
    VanillaAEConfig vc = VanillaConfigFrom(config, base);
    vc.seed = seed;
    std::vector<std::size_t> want(epochs.begin(), epochs.end());
    if (want.empty()) want.push_back(vc.epochs);
    vc.epochs = *std::max_element(want.begin(), want.end());
    const auto snaps = TrainVanillaAE(data, vc, want);
    std::vector<DetectorOutput> out;
    for (std::size_t e : want) {
      const auto it = std::find_if(snaps.begin(), snaps.end(),
                                   [&](const auto& s) { return s.epoch == e; });
      out.push_back({it->scores, it->loss});
    }
    return out;
  };
}

Detector IsoForestDetector(const Matrix& data) {
  return [&data](const HpConfig& config, std::span<const std::size_t>,
                 std::uint64_t seed) {
    IsoForestOptions opts;
    opts.trees = ToCount(config.Get("trees", 100.0), "trees");
    opts.subsample = ToCount(config.Get("subsample", 256.0), "subsample");
    opts.seed = seed;
    const IsoForest forest = FitIsoForest(data, opts);
    return std::vector<DetectorOutput>{
        {forest.ScoreAll(data), std::numeric_limits<double>::quiet_NaN()}};
  };
}

SweepResult Sweep(const Detector& detector, const HpGrid& grid,
                  std::span<const int> labels,
                  std::span<const std::uint64_t> seeds, std::size_t jobs,
                  const SweepCache* cache) {
  if (seeds.empty()) Fail(ErrorKind::kConfig, "sweep needs at least one seed");
  SweepResult result;
  result.configs = ExpandGrid(grid);
  result.seeds.assign(seeds.begin(), seeds.end());
  const bool has_epochs = grid.Has("epochs");
  const std::vector<EpochGroup> groups =
      GroupByEpochs(result.configs, has_epochs ? kDefaultEpochs : 0);
  const std::size_t n_configs = result.configs.size();
  result.runs.assign(seeds.size(), std::vector<SweepRun>(n_configs));

  ParallelFor(seeds.size() * groups.size(), jobs, [&](std::size_t job) {
    const std::size_t s = job / groups.size();
    const EpochGroup& group = groups[job % groups.size()];
    if (cache != nullptr && cache->load) {
      std::vector<std::optional<SweepRun>> cached;
      for (std::size_t c : group.members) cached.push_back(cache->load(s, c));
      if (std::all_of(cached.begin(), cached.end(),
                      [](const auto& r) { return r.has_value(); })) {
        for (std::size_t m = 0; m < group.members.size(); ++m) {
          result.runs[s][group.members[m]] = std::move(*cached[m]);
        }
        return;
      }
    }
    const auto start = std::chrono::steady_clock::now();
    const HpConfig& head = result.configs[group.members.front()];
    const std::vector<DetectorOutput> outputs =
        detector(head, group.epochs, RunSeed(seeds[s], head));
    const double seconds = Seconds(start);
    for (std::size_t c : group.members) {
      std::size_t slot = 0;
      if (has_epochs) {
        const std::size_t e = EpochOf(result.configs[c], kDefaultEpochs);
        slot = static_cast<std::size_t>(
            std::find(group.epochs.begin(), group.epochs.end(), e) -
            group.epochs.begin());
      }
      SweepRun& run = result.runs[s][c];
      run.scores = outputs.at(slot).scores;
      run.loss = outputs.at(slot).loss;
      run.seconds = seconds;
      if (cache != nullptr && cache->store) cache->store(s, c, run);
    }
  });

  // Labels are only touched once every score is in.
  std::vector<Vector> auroc(seeds.size(), Vector(n_configs));
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    std::vector<Vector> all;
    Vector losses;
    for (std::size_t c = 0; c < n_configs; ++c) {
      SweepRun& run = result.runs[s][c];
      run.auroc = Auroc(run.scores, labels);
      auroc[s][c] = run.auroc;
      all.push_back(run.scores);
      losses.push_back(run.loss);
    }
    const std::size_t chosen = SelectByLowestLoss(losses);
    result.chosen_by_loss.push_back(chosen);
    result.chosen_auroc.push_back(auroc[s][chosen]);
    result.hyper_auroc.push_back(Auroc(HyperEnsemble(all), labels));
  }
  result.summary = SummarizeSweep(auroc);
  return result;
}

nlohmann::ordered_json SweepJson(const SweepResult& result) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json configs = nlohmann::ordered_json::array();
  for (const auto& c : result.configs) configs.push_back(c.ToJson());
  j["configs"] = configs;
  j["seeds"] = result.seeds;
  nlohmann::ordered_json per_seed = nlohmann::ordered_json::array();
  for (std::size_t s = 0; s < result.seeds.size(); ++s) {
    nlohmann::ordered_json e = DistributionJson(result.summary.per_seed[s]);
    e["seed"] = result.seeds[s];
    e["auroc"] = result.summary.auroc[s];
    Vector losses;
    for (const auto& run : result.runs[s]) losses.push_back(run.loss);
    e["loss"] = losses;
    e["chosen_by_loss"] = result.chosen_by_loss[s];
    e["chosen_auroc"] = result.chosen_auroc[s];
    e["hyper_ensemble_auroc"] = result.hyper_auroc[s];
    per_seed.push_back(e);
  }
  j["per_seed"] = per_seed;
  j["mean_of_means"] = result.summary.mean_of_means;
  j["std_of_means"] = result.summary.std_of_means;
  const Distribution hyper = Summarize(result.hyper_auroc);
  j["hyper_ensemble_auroc_mean"] = hyper.mean;
  j["chosen_auroc_mean"] = Summarize(result.chosen_auroc).mean;
  return j;
}

void WriteScoresCsv(const std::string& path, std::span<const double> scores) {
  std::ofstream out(path);
  if (!out) Fail(ErrorKind::kIo, "cannot write " + path);
  out << "point_index,score\n";
  char buf[40];
  for (std::size_t i = 0; i < scores.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", scores[i]);
    out << i << ',' << buf << '\n';
  }
  if (!out) Fail(ErrorKind::kIo, "failed writing " + path);
}

Vector ReadScoresCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kIo, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("point_index,score", 0) != 0) {
    Fail(ErrorKind::kParse, path + ": missing point_index,score header");
  }
  Vector out;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++row;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      Fail(ErrorKind::kParse, path + ": row " + std::to_string(row) + ": no comma");
    }
    try {
      std::size_t used = 0;
      const std::string idx_text = line.substr(0, comma);
      const auto idx = std::stoull(idx_text, &used);
      if (used != idx_text.size() || idx != out.size()) throw std::invalid_argument("");
      const std::string val_text = line.substr(comma + 1);
      const double v = std::stod(val_text, &used);
      if (used != val_text.size() && val_text.substr(used) != "\r") {
        throw std::invalid_argument("");
      }
      out.push_back(v);
    } catch (const std::exception&) {
      Fail(ErrorKind::kParse, path + ": row " + std::to_string(row) + ": malformed");
    }
  }
  return out;
}

}  // namespace robod
