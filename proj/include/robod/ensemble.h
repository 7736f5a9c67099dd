#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "robod/aes.h"
#include "robod/baselines.h"
#include "robod/evalkit.h"
#include "robod/numerics.h"

namespace robod {

// Ordered hyperparameter grid: name -> candidate values. Recognized names:
// epochs, lr, dropout, weight_decay, batch_size, n_layers, layer_decay,
// trees, subsample.
struct HpGrid {
  std::vector<std::pair<std::string, std::vector<double>>> dims;

  bool Has(const std::string& name) const;
  std::size_t Size() const;  // product of list lengths
  static HpGrid FromJson(const nlohmann::ordered_json& j);
  nlohmann::ordered_json ToJson() const;
};

struct HpConfig {
  std::size_t index = 0;
  std::vector<std::pair<std::string, double>> values;

  bool Has(const std::string& name) const;
  double Get(const std::string& name) const;  // kConfig when absent
  double Get(const std::string& name, double fallback) const;
  nlohmann::ordered_json ToJson() const;
};

// Cartesian product with the first dimension varying slowest.
std::vector<HpConfig> ExpandGrid(const HpGrid& grid);

// Training grid folded into one BE autoencoder per non-epoch combination.
HpGrid RobodDefaultGrid();
// Architecture plus training grid for standalone autoencoders.
HpGrid VanillaDefaultGrid();
HpGrid IsoForestDefaultGrid();
// The eight member decay rates of the default width plan.
std::vector<double> DefaultMemberDecays();

// Seed for one training run: mixes the base seed with a hash of the config
// values other than `epochs`, taken in name order. Runs that differ only in
// epoch count share a seed; reordering the grid does not change any seed.
std::uint64_t RunSeed(std::uint64_t base_seed, const HpConfig& config);

// Runs fn(0..count-1) on up to `jobs` threads (0 = hardware concurrency).
// The first exception thrown by any task is rethrown after all finish.
void ParallelFor(std::size_t count, std::size_t jobs,
                 const std::function<void(std::size_t)>& fn);

struct SubsamplePlan {
  double delta = 0.0;
  std::size_t n = 0;
  std::vector<std::vector<std::size_t>> in_sample;   // sorted, per member
  std::vector<std::vector<std::size_t>> out_sample;  // sorted complement

  std::size_t members() const { return in_sample.size(); }
  bool InSample(std::size_t member, std::size_t point) const;
};

// Each member gets ceil(delta * n) distinct rows.
SubsamplePlan DrawSubsamplePlan(std::size_t n, std::size_t members,
                                double delta, Rng& rng);

struct ConfigRun {
  HpConfig config;
  Vector scores;       // per-config aggregated score per point
  double loss = 0.0;   // evaluation-mode loss on the full data
  double seconds = 0.0;
};

struct RobodOptions {
  std::vector<double> decays = DefaultMemberDecays();  // one per member
  std::size_t depth = 6;
  HpGrid grid = RobodDefaultGrid();
  std::uint64_t seed = 0;
  std::size_t batch_size = 64;
  AESOptions activations;
  std::size_t jobs = 1;
  // Subsampled variant when in (0, 1); 0 trains every member on all rows.
  double delta = 0.0;
};

struct RobodResult {
  std::vector<ConfigRun> runs;  // grid order
  Vector scores;                // mean of the per-config scores
  double seconds = 0.0;
  // Subsampled variant only.
  std::optional<SubsamplePlan> plan;
  Matrix contributions;         // n x K, 1 where member i scored point x
  std::vector<char> fallback;   // 1 where no member held x out of sample
  std::size_t fallback_count = 0;
};

RobodResult RobodScore(const Matrix& data, const RobodOptions& options);

// Per-config combination of member scores, sum_i s_i(x) / (K' * L). With
// `plan`, only members that did not train on x count toward K'; points with
// no such member use all members and are flagged in `fallback`.
// `contributions` (n x K) marks which members were summed for each point.
Vector CombineMemberScores(const PathErrors& errors,
                           const SubsamplePlan* plan,
                           Matrix* contributions = nullptr,
                           std::vector<char>* fallback = nullptr);

struct IRobodOptions {
  HpGrid grid = VanillaDefaultGrid();
  std::uint64_t seed = 0;
  std::size_t batch_size = 64;
  AESOptions activations;
  std::size_t jobs = 1;
};

// Trains every config, epoch values included, as its own autoencoder and
// averages the reconstruction errors.
RobodResult IRobodScore(const Matrix& data, const IRobodOptions& options);

VanillaAEConfig VanillaConfigFrom(const HpConfig& config,
                                  const VanillaAEConfig& base);

// Pointwise mean of score vectors.
Vector HyperEnsemble(const std::vector<Vector>& scores);
// Argmin over non-NaN losses; ties go to the lowest index. Returns 0 when
// every loss is NaN.
std::size_t SelectByLowestLoss(std::span<const double> losses);

struct DetectorOutput {
  Vector scores;
  double loss = 0.0;
};

// Trains one model for `config` and reports one output per requested epoch
// (a single output when `epochs` is empty).
using Detector = std::function<std::vector<DetectorOutput>(
    const HpConfig& config, std::span<const std::size_t> epochs,
    std::uint64_t seed)>;

// Both keep a reference to `data`. Isolation forests report a NaN loss.
Detector VanillaAEDetector(const Matrix& data, const VanillaAEConfig& base);
Detector IsoForestDetector(const Matrix& data);

struct SweepRun {
  Vector scores;
  double loss = 0.0;
  double auroc = 0.0;
  double seconds = 0.0;
};

// Optional per-(seed, config) result cache for resumable sweeps.
struct SweepCache {
  std::function<std::optional<SweepRun>(std::size_t seed_index,
                                        std::size_t config_index)>
      load;
  std::function<void(std::size_t seed_index, std::size_t config_index,
                     const SweepRun& run)>
      store;
};

struct SweepResult {
  std::vector<HpConfig> configs;
  std::vector<std::uint64_t> seeds;
  std::vector<std::vector<SweepRun>> runs;  // [seed][config]
  SweepSummary summary;
  std::vector<std::size_t> chosen_by_loss;  // per seed
  std::vector<double> chosen_auroc;         // per seed
  std::vector<double> hyper_auroc;          // per seed
};

SweepResult Sweep(const Detector& detector, const HpGrid& grid,
                  std::span<const int> labels,
                  std::span<const std::uint64_t> seeds, std::size_t jobs = 1,
                  const SweepCache* cache = nullptr);

// Scores-derived summary only; timings are left out so reruns compare equal.
nlohmann::ordered_json SweepJson(const SweepResult& result);

void WriteScoresCsv(const std::string& path, std::span<const double> scores);
Vector ReadScoresCsv(const std::string& path);

}  // namespace robod
