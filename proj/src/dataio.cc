#include "robod/dataio.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "robod/error.h"

namespace robod {

namespace {

std::string Trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  std::string out(s.substr(b, e - b));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') {
    out = out.substr(1, out.size() - 2);
  }
  return out;
}

std::vector<std::string> SplitLine(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      cells.push_back(Trim(std::string_view(line).substr(start)));
      break;
    }
    cells.push_back(Trim(std::string_view(line).substr(start, comma - start)));
    start = comma + 1;
  }
  return cells;
}

bool ParseDouble(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* begin = s.data();
  if (*begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

std::string ParseError(const std::string& path, std::size_t row,
                       std::size_t col, const std::string& what) {
  return path + ": row " + std::to_string(row) + ", column " +
         std::to_string(col) + ": " + what;
}

}  // namespace

double Dataset::outlier_fraction() const {
  if (labels.empty()) return 0.0;
  const auto outliers = std::count(labels.begin(), labels.end(), 1);
  return static_cast<double>(outliers) / static_cast<double>(labels.size());
}

std::string HashFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorKind::kIo, "cannot open " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 14];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

Dataset LoadCsv(const std::string& path, const std::string& label_column) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kIo, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) Fail(ErrorKind::kParse, path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = SplitLine(line);
  const auto label_it = std::find(header.begin(), header.end(), label_column);
  if (label_it == header.end()) {
    Fail(ErrorKind::kParse,
         path + ": no label column named '" + label_column + "'");
  }
  const auto label_pos = static_cast<std::size_t>(label_it - header.begin());

  Dataset ds;
  const std::string base = path.substr(path.find_last_of('/') + 1);
  ds.name = base.substr(0, base.find_last_of('.'));
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != label_pos) ds.feature_names.push_back(header[c]);
  }
  const std::size_t d = ds.feature_names.size();
  std::vector<double> values;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (Trim(line).empty()) continue;
    ++row;
    const std::vector<std::string> cells = SplitLine(line);
    if (cells.size() != header.size()) {
      Fail(ErrorKind::kParse,
           ParseError(path, row, std::min(cells.size(), header.size()) + 1,
                      "expected " + std::to_string(header.size()) +
                          " cells, found " + std::to_string(cells.size())));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v = 0.0;
      if (!ParseDouble(cells[c], v)) {
        Fail(ErrorKind::kParse,
             ParseError(path, row, c + 1, "non-numeric cell '" + cells[c] + "'"));
      }
      if (c == label_pos) {
        if (v != std::floor(v)) {
          Fail(ErrorKind::kParse,
               ParseError(path, row, c + 1, "label must be an integer"));
        }
        ds.labels.push_back(static_cast<int>(v));
      } else {
        values.push_back(v);
      }
    }
  }
  ds.features = Matrix(row, d, std::move(values));
  ds.manifest["source"] = path;
  ds.manifest["fnv1a64"] = HashFile(path);
  ds.manifest["label_column"] = label_column;
  ds.manifest["rows"] = ds.size();
  ds.manifest["dim"] = d;
  return ds;
}

void WriteCsv(const std::string& path, const Dataset& ds,
              const std::string& label_column) {
  std::ofstream out(path);
  if (!out) Fail(ErrorKind::kIo, "cannot write " + path);
  for (std::size_t c = 0; c < ds.dim(); ++c) {
    out << (c < ds.feature_names.size() ? ds.feature_names[c]
                                        : "x" + std::to_string(c))
        << ',';
  }
  out << label_column << '\n';
  char buf[32];
  for (std::size_t r = 0; r < ds.size(); ++r) {
    for (double v : ds.features.row(r)) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out << buf << ',';
    }
    out << (r < ds.labels.size() ? ds.labels[r] : 0) << '\n';
  }
  if (!out) Fail(ErrorKind::kIo, "failed writing " + path);
}

Dataset MinMaxScale(const Dataset& ds) {
  Dataset out = ds;
  const std::size_t n = ds.size();
  const std::size_t d = ds.dim();
  std::vector<double> mins(d), maxs(d);
  for (std::size_t c = 0; c < d; ++c) {
    double lo = n > 0 ? ds.features(0, c) : 0.0;
    double hi = lo;
    for (std::size_t r = 1; r < n; ++r) {
      lo = std::min(lo, ds.features(r, c));
      hi = std::max(hi, ds.features(r, c));
    }
    mins[c] = lo;
    maxs[c] = hi;
    const double range = hi - lo;
    for (std::size_t r = 0; r < n; ++r) {
      out.features(r, c) = range > 0.0 ? (ds.features(r, c) - lo) / range : 0.0;
    }
  }
  nlohmann::ordered_json scaler;
  scaler["kind"] = "minmax";
  scaler["min"] = mins;
  scaler["max"] = maxs;
  out.manifest["scaler"] = scaler;
  return out;
}

Dataset AssemblePolluted(const Dataset& multiclass,
                         const PollutedRecipe& recipe) {
  if (!(recipe.rate > 0.0 && recipe.rate <= 1.0)) {
    Fail(ErrorKind::kConfig, "polluted subsample rate must lie in (0, 1]");
  }
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t r = 0; r < multiclass.labels.size(); ++r) {
    by_class[multiclass.labels[r]].push_back(r);
  }
  if (by_class.count(recipe.inlier_class) == 0) {
    Fail(ErrorKind::kConfig, "inlier class " +
                                 std::to_string(recipe.inlier_class) +
                                 " not present");
  }
  Rng rng(recipe.seed);
  std::vector<char> keep(multiclass.size(), 0);
  nlohmann::ordered_json counts = nlohmann::ordered_json::object();
  for (const auto& [cls, rows] : by_class) {
    if (cls == recipe.inlier_class) {
      for (std::size_t r : rows) keep[r] = 1;
      counts[std::to_string(cls)] = rows.size();
      continue;
    }
    const auto take = std::max<std::size_t>(
        1, static_cast<std::size_t>(
               std::llround(recipe.rate * static_cast<double>(rows.size()))));
    for (std::size_t pick : SampleWithoutReplacement(rng, rows.size(), take)) {
      keep[rows[pick]] = 1;
    }
    counts[std::to_string(cls)] = take;
  }

  Dataset out;
  out.name = multiclass.name + "-polluted-" + std::to_string(recipe.inlier_class);
  out.feature_names = multiclass.feature_names;
  std::vector<double> values;
  std::vector<std::size_t> kept_rows;
  for (std::size_t r = 0; r < multiclass.size(); ++r) {
    if (!keep[r]) continue;
    kept_rows.push_back(r);
    auto row = multiclass.features.row(r);
    values.insert(values.end(), row.begin(), row.end());
    out.labels.push_back(multiclass.labels[r] == recipe.inlier_class ? 0 : 1);
  }
  out.features = Matrix(kept_rows.size(), multiclass.dim(), std::move(values));
  out.manifest = multiclass.manifest;
  nlohmann::ordered_json r;
  r["inlier_class"] = recipe.inlier_class;
  r["rate"] = recipe.rate;
  r["seed"] = recipe.seed;
  r["rounding"] = "max(1, round(rate * class_size))";
  r["kept_per_class"] = counts;
  r["source_rows"] = kept_rows;
  out.manifest["polluted_recipe"] = r;
  return out;
}

}  // namespace robod
