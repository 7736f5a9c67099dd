// Command-line front end: robod, robod-sub, irobod, vanilla-ae, iforest,
// sweep, report.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "robod/baselines.h"
#include "robod/dataio.h"
#include "robod/ensemble.h"
#include "robod/error.h"
#include "robod/evalkit.h"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace robod;

namespace {

constexpr const char* kOutputEnv = "ROBOD_OUTPUT_DIR";

struct Settings {
  std::string command;
  std::string data;
  std::string label_col = "label";
  std::string out;
  std::string grid_file;
  std::string config_file;
  std::string resume;
  bool no_scale = false;
  std::size_t k = 8;
  std::size_t l = 6;
  std::vector<double> decays;
  double delta = 0.1;
  std::size_t seeds = 1;
  std::uint64_t seed = 0;
  std::size_t jobs = 0;
  std::size_t batch_size = 64;
  // Single-model settings.
  std::size_t n_layers = 2;
  double layer_decay = 2.0;
  double lr = 1e-3;
  std::size_t epochs = 250;
  double dropout = 0.0;
  double weight_decay = 0.0;
  std::size_t trees = 100;
  std::size_t subsample = 256;
  std::string detector = "vanilla-ae";
  // report
  std::vector<std::string> runs;
  std::string csv = "report.csv";

  std::optional<HpGrid> grid;
};

void WriteJson(const fs::path& path, const ordered_json& j) {
  std::ofstream out(path);
  if (!out) Fail(ErrorKind::kIo, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

ordered_json ReadJson(const fs::path& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kIo, "cannot open " + path.string());
  try {
    return ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kParse, path.string() + ": " + e.what());
  }
}

std::string Timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  localtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", &tm);
  return buf;
}

fs::path OutputRoot(const Settings& s) {
  if (!s.out.empty()) return s.out;
  if (const char* env = std::getenv(kOutputEnv); env != nullptr && *env) {
    return env;
  }
  return "runs";
}

fs::path MakeRunDir(const Settings& s, const std::string& dataset) {
  const fs::path root = OutputRoot(s);
  const std::string stem = s.command + "-" + dataset + "-" + Timestamp();
  fs::path dir = root / stem;
  for (int n = 2; fs::exists(dir); ++n) dir = root / (stem + "-" + std::to_string(n));
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) Fail(ErrorKind::kIo, "cannot create " + dir.string() + ": " + ec.message());
  return dir;
}

std::vector<double> MemberDecays(const Settings& s) {
  if (!s.decays.empty()) {
    if (s.decays.size() != s.k) {
      Fail(ErrorKind::kConfig, "--decays needs exactly --k values");
    }
    return s.decays;
  }
  // 1.5, 1.75, ... extends the default eight-member list.
  std::vector<double> d;
  for (std::size_t i = 0; i < s.k; ++i) d.push_back(1.5 + 0.25 * static_cast<double>(i));
  return d;
}

HpGrid GridFor(const Settings& s) {
  if (s.grid) return *s.grid;
  if (s.command == "irobod") return VanillaDefaultGrid();
  if (s.command == "sweep") {
    return s.detector == "iforest" ? IsoForestDefaultGrid() : VanillaDefaultGrid();
  }
  return RobodDefaultGrid();
}

void Validate(const Settings& s) {
  if (s.data.empty()) Fail(ErrorKind::kConfig, "--data is required");
  if (s.seeds < 1) Fail(ErrorKind::kConfig, "--seeds must be >= 1");
  if (s.command == "robod" || s.command == "robod-sub") {
    if (s.k < 1 || s.l < 1) Fail(ErrorKind::kConfig, "--k and --l must be >= 1");
    for (double d : MemberDecays(s)) {
      if (!(d > 1.0)) Fail(ErrorKind::kConfig, "member decays must exceed 1");
    }
  }
  if (s.command == "robod-sub" && !(s.delta > 0.0 && s.delta < 1.0)) {
    Fail(ErrorKind::kConfig, "--delta must lie in (0, 1)");
  }
  if (s.command == "sweep" && s.detector != "vanilla-ae" && s.detector != "iforest") {
    Fail(ErrorKind::kConfig, "--detector must be vanilla-ae or iforest");
  }
  if (s.command == "vanilla-ae" && !(s.layer_decay > 1.0)) {
    Fail(ErrorKind::kConfig, "--layer-decay must exceed 1");
  }
  if (s.command != "vanilla-ae" && s.command != "iforest") {
    ExpandGrid(GridFor(s));  // rejects empty dimensions up front
  }
}

ordered_json ResolvedConfig(const Settings& s) {
  ordered_json j;
  j["command"] = s.command;
  j["data"] = s.data;
  j["label_col"] = s.label_col;
  j["scale"] = s.no_scale ? "none" : "minmax";
  j["seed"] = s.seed;
  j["seeds"] = s.seeds;
  j["batch_size"] = s.batch_size;
  if (s.command == "robod" || s.command == "robod-sub") {
    j["k"] = s.k;
    j["l"] = s.l;
    j["decays"] = MemberDecays(s);
  }
  if (s.command == "robod-sub") j["delta"] = s.delta;
  if (s.command == "vanilla-ae") {
    j["n_layers"] = s.n_layers;
    j["layer_decay"] = s.layer_decay;
    j["lr"] = s.lr;
    j["epochs"] = s.epochs;
    j["dropout"] = s.dropout;
    j["weight_decay"] = s.weight_decay;
  }
  if (s.command == "iforest") {
    j["trees"] = s.trees;
    j["subsample"] = s.subsample;
  }
  if (s.command == "sweep") j["detector"] = s.detector;
  if (s.command != "vanilla-ae" && s.command != "iforest") {
    j["grid"] = GridFor(s).ToJson();
  }
  return j;
}

Dataset LoadData(const Settings& s) {
  Dataset ds = LoadCsv(s.data, s.label_col);
  return s.no_scale ? ds : MinMaxScale(ds);
}

struct SeedOutcome {
  Vector scores;
  std::vector<ConfigRun> runs;  // may be empty
  double seconds = 0.0;
  ordered_json extra = ordered_json::object();
};

void WriteRunScores(const fs::path& dir, std::size_t seed_index,
                    const SeedOutcome& o) {
  const fs::path scores = dir / "scores";
  fs::create_directories(scores);
  WriteScoresCsv((scores / ("seed" + std::to_string(seed_index) + ".csv")).string(),
                 o.scores);
  if (o.runs.size() > 1) {
    const fs::path per = scores / ("seed" + std::to_string(seed_index));
    fs::create_directories(per);
    for (const ConfigRun& r : o.runs) {
      WriteScoresCsv((per / ("config" + std::to_string(r.config.index) + ".csv")).string(),
                     r.scores);
    }
  }
}

SeedOutcome RunOnce(const Settings& s, const Matrix& x, std::uint64_t seed) {
  SeedOutcome o;
  const auto start = std::chrono::steady_clock::now();
  if (s.command == "robod" || s.command == "robod-sub") {
    RobodOptions opts;
    opts.decays = MemberDecays(s);
    opts.depth = s.l;
    opts.grid = GridFor(s);
    opts.seed = seed;
    opts.batch_size = s.batch_size;
    opts.jobs = s.jobs;
    if (s.command == "robod-sub") opts.delta = s.delta;
    RobodResult r = RobodScore(x, opts);
    o.scores = std::move(r.scores);
    o.runs = std::move(r.runs);
    if (r.plan) {
      o.extra["delta"] = r.plan->delta;
      o.extra["fallback_points"] = r.fallback_count;
    }
  } else if (s.command == "irobod") {
    IRobodOptions opts;
    opts.grid = GridFor(s);
    opts.seed = seed;
    opts.batch_size = s.batch_size;
    opts.jobs = s.jobs;
    RobodResult r = IRobodScore(x, opts);
    o.scores = std::move(r.scores);
    o.runs = std::move(r.runs);
  } else if (s.command == "vanilla-ae") {
    VanillaAEConfig c;
    c.n_layers = s.n_layers;
    c.layer_decay = s.layer_decay;
    c.lr = s.lr;
    c.epochs = s.epochs;
    c.dropout = s.dropout;
    c.weight_decay = s.weight_decay;
    c.batch_size = s.batch_size;
    // Same seed derivation as a one-config ROBOD grid over these values.
    HpConfig hp;
    hp.values = {{"epochs", static_cast<double>(s.epochs)},
                 {"lr", s.lr},
                 {"dropout", s.dropout},
                 {"weight_decay", s.weight_decay}};
    c.seed = RunSeed(seed, hp);
    o.scores = VanillaAEScore(x, c);
  } else if (s.command == "iforest") {
    IsoForestOptions opts;
    opts.trees = s.trees;
    opts.subsample = s.subsample;
    opts.seed = seed;
    bool clamped = false;
    const IsoForest forest = FitIsoForest(x, opts, &clamped);
    if (clamped) {
      std::cerr << "warning: subsample " << s.subsample << " exceeds " << x.rows()
                << " rows; using all rows\n";
      o.extra["subsample_used"] = forest.subsample();
    }
    o.scores = forest.ScoreAll(x);
  }
  o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                  .count();
  return o;
}

int RunDetectorCommand(const Settings& s) {
  Validate(s);
  const Dataset ds = LoadData(s);
  const fs::path dir = MakeRunDir(s, ds.name);
  WriteJson(dir / "config.json", ResolvedConfig(s));
  ordered_json manifest = ds.manifest;
  WriteJson(dir / "manifest.json", manifest);

  std::vector<SeedOutcome> outcomes;
  ordered_json timing = ordered_json::array();
  for (std::size_t i = 0; i < s.seeds; ++i) {
    SeedOutcome o = RunOnce(s, ds.features, s.seed + i);
    WriteRunScores(dir, i, o);
    ordered_json t;
    t["seed"] = s.seed + i;
    t["seconds"] = o.seconds;
    ordered_json per = ordered_json::array();
    for (const ConfigRun& r : o.runs) per.push_back(r.seconds);
    if (!per.empty()) t["config_seconds"] = per;
    timing.push_back(t);
    outcomes.push_back(std::move(o));
  }
  WriteJson(dir / "timing.json", timing);

  // Labels are read only from here on.
  Vector aurocs;
  Vector seconds;
  ordered_json extras = ordered_json::array();
  for (const SeedOutcome& o : outcomes) {
    aurocs.push_back(Auroc(o.scores, ds.labels));
    seconds.push_back(o.seconds);
    extras.push_back(o.extra);
  }
  ordered_json metrics;
  metrics["method"] = s.command;
  metrics["dataset"] = ds.name;
  const ordered_json summary = MetricsJson(aurocs);
  for (const auto& [key, value] : summary.items()) metrics[key] = value;
  metrics["seeds"] = ordered_json::array();
  for (std::size_t i = 0; i < s.seeds; ++i) metrics["seeds"].push_back(s.seed + i);
  metrics["seconds"] = seconds;
  double total = 0.0;
  for (double v : seconds) total += v;
  metrics["seconds_total"] = total;
  if (!outcomes.front().runs.empty()) metrics["configs"] = outcomes.front().runs.size();
  if (!outcomes.front().extra.empty()) metrics["per_seed"] = extras;
  WriteJson(dir / "metrics.json", metrics);

  if (s.command == "robod-sub") {
    ordered_json sub;
    sub["delta"] = s.delta;
    ordered_json counts = ordered_json::array();
    for (const SeedOutcome& o : outcomes) counts.push_back(o.extra["fallback_points"]);
    sub["fallback_points"] = counts;
    manifest["subsample"] = sub;
    WriteJson(dir / "manifest.json", manifest);
  }
  std::cout << dir.string() << '\n';
  std::printf("%s on %s: AUROC %.4f +- %.4f over %zu seed(s), %.1f s\n",
              s.command.c_str(), ds.name.c_str(), metrics["mean"].get<double>(),
              metrics["std"].get<double>(), s.seeds, total);
  return 0;
}

int RunSweepCommand(const Settings& s) {
  Validate(s);
  const Dataset ds = LoadData(s);
  const ordered_json config = ResolvedConfig(s);
  fs::path dir;
  if (!s.resume.empty()) {
    dir = s.resume;
    const ordered_json previous = ReadJson(dir / "config.json");
    if (previous != config) {
      Fail(ErrorKind::kConfig, "resumed run was started with a different config");
    }
  } else {
    dir = MakeRunDir(s, ds.name);
    WriteJson(dir / "config.json", config);
  }
  WriteJson(dir / "manifest.json", ds.manifest);

  const HpGrid grid = GridFor(s);
  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < s.seeds; ++i) seeds.push_back(s.seed + i);
  VanillaAEConfig base;
  base.batch_size = s.batch_size;
  const Detector detector = s.detector == "iforest"
                                ? IsoForestDetector(ds.features)
                                : VanillaAEDetector(ds.features, base);

  auto score_path = [&](std::size_t si, std::size_t ci) {
    return dir / "scores" / ("seed" + std::to_string(si)) /
           ("config" + std::to_string(ci) + ".csv");
  };
  auto meta_path = [&](std::size_t si, std::size_t ci) {
    return dir / "results" / ("seed" + std::to_string(si)) /
           ("config" + std::to_string(ci) + ".json");
  };
  SweepCache cache;
  cache.load = [&](std::size_t si, std::size_t ci) -> std::optional<SweepRun> {
    // The metadata file is written last, so its presence marks completion.
    if (!fs::exists(meta_path(si, ci)) || !fs::exists(score_path(si, ci))) {
      return std::nullopt;
    }
    const ordered_json meta = ReadJson(meta_path(si, ci));
    SweepRun run;
    run.scores = ReadScoresCsv(score_path(si, ci).string());
    run.loss = meta["loss"].is_null() ? std::nan("") : meta["loss"].get<double>();
    run.seconds = meta["seconds"].get<double>();
    return run;
  };
  cache.store = [&](std::size_t si, std::size_t ci, const SweepRun& run) {
    fs::create_directories(score_path(si, ci).parent_path());
    fs::create_directories(meta_path(si, ci).parent_path());
    WriteScoresCsv(score_path(si, ci).string(), run.scores);
    ordered_json meta;
    meta["loss"] = run.loss;  // NaN serializes as null
    meta["seconds"] = run.seconds;
    WriteJson(meta_path(si, ci), meta);
  };

  const auto start = std::chrono::steady_clock::now();
  const SweepResult result = Sweep(detector, grid, ds.labels, seeds, s.jobs, &cache);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  WriteJson(dir / "sweep.json", SweepJson(result));

  Vector all;
  Vector seconds;
  for (const auto& per_seed : result.runs) {
    double t = 0.0;
    for (const SweepRun& r : per_seed) {
      all.push_back(r.auroc);
      t += r.seconds;
    }
    seconds.push_back(t);
  }
  ordered_json metrics;
  metrics["method"] = s.detector + "-sweep";
  metrics["dataset"] = ds.name;
  // One entry per (seed, config): the spread is the sensitivity to HPs.
  const ordered_json summary = MetricsJson(all);
  for (const auto& [key, value] : summary.items()) metrics[key] = value;
  metrics["seeds"] = seeds;
  metrics["configs"] = result.configs.size();
  metrics["mean_of_means"] = result.summary.mean_of_means;
  metrics["std_of_means"] = result.summary.std_of_means;
  metrics["hyper_ensemble_auroc"] = result.hyper_auroc;
  metrics["chosen_by_loss_auroc"] = result.chosen_auroc;
  metrics["seconds"] = seconds;
  double total = 0.0;
  for (double v : seconds) total += v;
  metrics["seconds_total"] = total;
  WriteJson(dir / "metrics.json", metrics);
  ordered_json timing;
  timing["elapsed_seconds"] = elapsed;
  WriteJson(dir / "timing.json", timing);

  std::cout << dir.string() << '\n';
  std::printf("%s sweep on %s: %zu configs, mean AUROC %.4f (std %.4f), "
              "hyper-ensemble %.4f\n",
              s.detector.c_str(), ds.name.c_str(), result.configs.size(),
              metrics["mean"].get<double>(), metrics["std"].get<double>(),
              Summarize(result.hyper_auroc).mean);
  return 0;
}

std::string Cell(const Vector& v) {
  const Distribution d = Summarize(v);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f+-%.3f", d.mean, d.std);
  return buf;
}

int RunReportCommand(const Settings& s) {
  if (s.runs.empty()) Fail(ErrorKind::kConfig, "report needs at least one run directory");
  struct Entry {
    Vector auroc;
    Vector seconds;
  };
  std::map<std::string, std::map<std::string, Entry>> table;  // method -> dataset
  std::vector<std::string> methods, datasets, absent;
  for (const std::string& run : s.runs) {
    const fs::path metrics_path = fs::path(run) / "metrics.json";
    if (!fs::exists(metrics_path)) {
      absent.push_back(run);
      continue;
    }
    const ordered_json m = ReadJson(metrics_path);
    const std::string method = m.at("method").get<std::string>();
    const std::string dataset = m.at("dataset").get<std::string>();
    if (std::find(methods.begin(), methods.end(), method) == methods.end()) {
      methods.push_back(method);
    }
    if (std::find(datasets.begin(), datasets.end(), dataset) == datasets.end()) {
      datasets.push_back(dataset);
    }
    Entry& e = table[method][dataset];
    for (double a : m.at("auroc")) e.auroc.push_back(a);
    for (double t : m.at("seconds")) e.seconds.push_back(t);
  }

  auto mean_seconds = [&](const std::string& method, const std::string& dataset)
      -> std::optional<double> {
    auto mi = table.find(method);
    if (mi == table.end()) return std::nullopt;
    auto di = mi->second.find(dataset);
    if (di == mi->second.end() || di->second.seconds.empty()) return std::nullopt;
    return Summarize(di->second.seconds).mean;
  };

  std::ostringstream text, csv;
  text << std::left;
  text.width(18);
  text << "method";
  csv << "method";
  for (const auto& d : datasets) {
    text.width(18);
    text << d;
    csv << ',' << d;
  }
  text << '\n';
  csv << '\n';
  for (const auto& m : methods) {
    text.width(18);
    text << m;
    csv << m;
    for (const auto& d : datasets) {
      auto it = table[m].find(d);
      const std::string cell = it == table[m].end() ? "-" : Cell(it->second.auroc);
      text.width(18);
      text << cell;
      csv << ',' << cell;
    }
    text << '\n';
    csv << '\n';
  }
  // Time savings of the shared-weight ensemble over independent training.
  bool any_savings = false;
  std::ostringstream savings_text, savings_csv;
  for (const auto& d : datasets) {
    const auto fast = mean_seconds("robod", d);
    const auto slow = mean_seconds("irobod", d);
    if (!fast || !slow || *slow <= 0.0) continue;
    any_savings = true;
    const double pct = 100.0 * (1.0 - *fast / *slow);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%s: robod %.1f s, irobod %.1f s, savings %.2f%%\n",
                  d.c_str(), *fast, *slow, pct);
    savings_text << buf;
    std::snprintf(buf, sizeof(buf), "%s,%.6g,%.6g,%.4f\n", d.c_str(), *fast, *slow, pct);
    savings_csv << buf;
  }
  std::cout << text.str();
  if (any_savings) std::cout << '\n' << savings_text.str();
  for (const auto& a : absent) std::cout << "absent: " << a << " (no metrics.json)\n";

  std::ofstream out(s.csv);
  if (!out) Fail(ErrorKind::kIo, "cannot write " + s.csv);
  out << csv.str();
  if (any_savings) {
    out << "\ndataset,robod_seconds,irobod_seconds,savings_percent\n"
        << savings_csv.str();
  }
  return 0;
}

// Fills options that were not given on the command line from a JSON file.
void ApplyConfigFile(CLI::App& sub, Settings& s) {
  if (s.config_file.empty()) return;
  const ordered_json j = ReadJson(s.config_file);
  if (!j.is_object()) Fail(ErrorKind::kConfig, "config file must hold a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "grid") {
      const CLI::Option* grid_opt = sub.get_option_no_throw("--grid");
      if (grid_opt == nullptr) {
        Fail(ErrorKind::kConfig, s.command + " does not take a grid");
      }
      if (grid_opt->count() == 0) {
        s.grid = HpGrid::FromJson(value);
      }
      continue;
    }
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    CLI::Option* opt = nullptr;
    try {
      opt = sub.get_option(flag);
    } catch (const CLI::OptionNotFound&) {
      Fail(ErrorKind::kConfig, "config file key '" + key + "' is not an option of " +
                                   s.command);
    }
    if (opt->count() > 0) continue;  // command line wins
    std::vector<std::string> items;
    auto text = [](const ordered_json& v) {
      return v.is_string() ? v.get<std::string>() : v.dump();
    };
    if (value.is_array()) {
      for (const auto& v : value) items.push_back(text(v));
    } else {
      items.push_back(text(value));
    }
    try {
      for (const auto& item : items) opt->add_result(item);
      opt->run_callback();
    } catch (const CLI::Error& e) {
      Fail(ErrorKind::kConfig, "config file key '" + key + "': " + e.what());
    }
  }
}

void PrintError(const std::string& kind, const std::string& message) {
  ordered_json j;
  j["error"]["kind"] = kind;
  j["error"]["message"] = message;
  std::cout << j.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hyperparameter-robust outlier detection experiments"};
  app.require_subcommand(1);
  Settings s;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--data", s.data, "CSV file with a header row");
    sub->add_option("--label-col", s.label_col, "Name of the 0/1 label column");
    sub->add_option("--out", s.out,
                    std::string("Output root (default $") + kOutputEnv + " or ./runs)");
    sub->add_option("--seeds", s.seeds, "Number of seeds, run as seed, seed+1, ...");
    sub->add_option("--seed", s.seed, "First seed");
    sub->add_option("--jobs", s.jobs, "Parallel training jobs (0 = all cores)");
    sub->add_option("--batch-size", s.batch_size, "Mini-batch size");
    sub->add_flag("--no-scale", s.no_scale, "Skip min-max feature scaling");
    sub->add_option("--config", s.config_file,
                    "JSON file of option values; command-line flags override it");
  };
  auto add_grid = [&](CLI::App* sub) {
    sub->add_option("--grid", s.grid_file, "JSON grid: {\"name\": [values], ...}");
  };
  auto add_ensemble = [&](CLI::App* sub) {
    sub->add_option("--k", s.k, "Ensemble members (width variants)");
    sub->add_option("--l", s.l, "Depth of the skip-connection autoencoder");
    sub->add_option("--decays", s.decays, "Per-member width decay rates");
  };

  CLI::App* robod = app.add_subcommand("robod", "Zero-masked batch-ensemble AE-S hyper-ensemble");
  add_common(robod);
  add_grid(robod);
  add_ensemble(robod);

  CLI::App* robod_sub = app.add_subcommand("robod-sub", "ROBOD with per-member subsampling");
  add_common(robod_sub);
  add_grid(robod_sub);
  add_ensemble(robod_sub);
  robod_sub->add_option("--delta", s.delta, "Per-member sampling rate in (0, 1)");

  CLI::App* irobod = app.add_subcommand("irobod", "Independently trained autoencoder hyper-ensemble");
  add_common(irobod);
  add_grid(irobod);

  CLI::App* vanilla = app.add_subcommand("vanilla-ae", "Single autoencoder");
  add_common(vanilla);
  vanilla->add_option("--n-layers", s.n_layers, "Encoder layers");
  vanilla->add_option("--layer-decay", s.layer_decay, "Width shrink factor per layer");
  vanilla->add_option("--lr", s.lr, "Adam learning rate");
  vanilla->add_option("--epochs", s.epochs, "Training epochs");
  vanilla->add_option("--dropout", s.dropout, "Dropout rate");
  vanilla->add_option("--weight-decay", s.weight_decay, "L2 weight decay");

  CLI::App* iforest = app.add_subcommand("iforest", "Isolation Forest");
  add_common(iforest);
  iforest->add_option("--trees", s.trees, "Number of trees");
  iforest->add_option("--subsample", s.subsample, "Rows per tree");

  CLI::App* sweep = app.add_subcommand("sweep", "Hyperparameter sensitivity sweep");
  add_common(sweep);
  add_grid(sweep);
  sweep->add_option("--detector", s.detector, "vanilla-ae or iforest");
  sweep->add_option("--resume", s.resume, "Continue an interrupted sweep directory");

  CLI::App* report = app.add_subcommand("report", "Compare finished runs");
  report->add_option("runs", s.runs, "Run directories")->required();
  report->add_option("--csv", s.csv, "CSV output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    PrintError("config", e.what());
    return 2;
  }

  try {
    CLI::App* chosen = app.get_subcommands().front();
    s.command = chosen->get_name();
    if (s.command != "report") {
      ApplyConfigFile(*chosen, s);
      if (!s.grid_file.empty()) s.grid = HpGrid::FromJson(ReadJson(s.grid_file));
    }
    if (s.command == "report") return RunReportCommand(s);
    if (s.command == "sweep") return RunSweepCommand(s);
    return RunDetectorCommand(s);
  } catch (const Error& e) {
    PrintError(std::string(ErrorKindName(e.kind())), e.what());
    return 2;
  } catch (const std::exception& e) {
    PrintError("internal", e.what());
    return 3;
  }
}
