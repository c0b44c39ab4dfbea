// Tabular data preparation: CSV ingestion, missing-value handling, Pearson
// correlation, relevance/redundancy feature selection, min-max scaling and
// seeded (optionally stratified) train/test splitting.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "phishvqc/csv.hpp"
#include "phishvqc/error.hpp"
#include "phishvqc/log.hpp"

namespace phishvqc {

// Row-major dense matrix of feature values.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

  std::vector<double> column(std::size_t c) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
  }

  void append_row(std::span<const double> values) {
    if (values.size() != cols_) throw ContractViolation("row width mismatch");
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
  }

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Labels follow the source dataset: 1 = legitimate, 0 = phishing.
inline constexpr int kLegitimate = 1;
inline constexpr int kPhishing = 0;

struct Dataset {
  std::vector<std::string> feature_names;
  FeatureMatrix features;
  std::vector<int> labels;
  std::string provenance;
  std::vector<std::string> dropped_columns;  // non-numeric, excluded at load

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t feature_count() const noexcept { return feature_names.size(); }

  void check_invariants() const {
    if (features.rows() != labels.size()) {
      throw ContractViolation("feature rows != label count");
    }
    if (features.cols() != feature_names.size()) {
      throw ContractViolation("feature columns != feature name count");
    }
    for (int y : labels) {
      if (y != 0 && y != 1) throw ContractViolation("labels must be 0 or 1");
    }
  }

  std::size_t count_label(int label) const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
  }

  // New dataset holding the given rows, in the given order.
  Dataset subset(std::span<const std::size_t> rows) const {
    Dataset out;
    out.feature_names = feature_names;
    out.provenance = provenance;
    out.dropped_columns = dropped_columns;
    out.features = FeatureMatrix(0, feature_count());
    out.labels.reserve(rows.size());
    for (std::size_t r : rows) {
      out.features.append_row(features.row(r));
      out.labels.push_back(labels.at(r));
    }
    return out;
  }

  // New dataset holding only the named columns, in the given order.
  Dataset select_columns(std::span<const std::string> names) const {
    std::vector<std::size_t> idx;
    for (const auto& name : names) {
      const auto it = std::find(feature_names.begin(), feature_names.end(), name);
      if (it == feature_names.end()) throw SchemaError("unknown feature column '" + name + "'");
      idx.push_back(static_cast<std::size_t>(it - feature_names.begin()));
    }
    Dataset out;
    out.feature_names.assign(names.begin(), names.end());
    out.labels = labels;
    out.provenance = provenance;
    out.dropped_columns = dropped_columns;
    out.features = FeatureMatrix(size(), idx.size());
    for (std::size_t r = 0; r < size(); ++r)
      for (std::size_t c = 0; c < idx.size(); ++c) out.features(r, c) = features(r, idx[c]);
    return out;
  }
};

// ---------------------------------------------------------------- loading

enum class MissingPolicy {
  Reject,  // first missing cell is a load error naming row and column
  Keep,    // missing cells become NaN, to be resolved by check_missing()
};

struct LoadOptions {
  MissingPolicy missing = MissingPolicy::Reject;
};

inline Dataset load_csv(std::istream& in, const std::string& label_column,
                        const LoadOptions& options = {}, std::string provenance = "<stream>") {
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header) throw SchemaError("CSV input is empty: " + provenance);
  for (auto& h : *header) h = std::string(csv::trim(h));
  // Strip a UTF-8 byte-order mark from the first header cell.
  if (!header->empty() && header->front().rfind("\xEF\xBB\xBF", 0) == 0) {
    header->front().erase(0, 3);
  }

  const auto label_it = std::find(header->begin(), header->end(), label_column);
  if (label_it == header->end()) {
    throw SchemaError("label column '" + label_column + "' not found in " + provenance);
  }
  const std::size_t label_idx = static_cast<std::size_t>(label_it - header->begin());
  const std::size_t width = header->size();

  std::vector<csv::Row> rows;
  while (auto row = reader.next()) {
    if (row->size() == 1 && csv::trim(row->front()).empty()) continue;  // blank line
    if (row->size() != width) {
      throw ParseError("expected " + std::to_string(width) + " fields, found " +
                           std::to_string(row->size()) + " in " + provenance,
                       rows.size() + 2);
    }
    rows.push_back(std::move(*row));
  }

  // A column is numeric when every non-missing cell parses as a number.
  std::vector<bool> numeric(width, true);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < width; ++c) {
      if (!numeric[c] || c == label_idx) continue;
      if (!csv::is_missing(row[c]) && !csv::parse_number(row[c])) numeric[c] = false;
    }
  }

  Dataset ds;
  ds.provenance = std::move(provenance);
  std::vector<std::size_t> kept;
  for (std::size_t c = 0; c < width; ++c) {
    if (c == label_idx) continue;
    if (numeric[c]) {
      kept.push_back(c);
      ds.feature_names.push_back((*header)[c]);
    } else {
      ds.dropped_columns.push_back((*header)[c]);
    }
  }
  if (!ds.dropped_columns.empty()) {
    std::string names;
    for (const auto& n : ds.dropped_columns) names += (names.empty() ? "" : ", ") + n;
    log::notice("dropped non-numeric columns: " + names);
  }

  ds.features = FeatureMatrix(rows.size(), kept.size());
  ds.labels.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::size_t line = r + 2;  // header is line 1
    const auto label = csv::parse_number(row[label_idx]);
    if (!label) {
      throw SchemaError("non-numeric label '" + row[label_idx] + "' at row " +
                        std::to_string(line));
    }
    if (*label != 0.0 && *label != 1.0) {
      throw SchemaError("label must be 0 or 1, found '" + row[label_idx] + "' at row " +
                        std::to_string(line));
    }
    ds.labels.push_back(static_cast<int>(*label));
    for (std::size_t k = 0; k < kept.size(); ++k) {
      const std::string& cell = row[kept[k]];
      if (csv::is_missing(cell)) {
        if (options.missing == MissingPolicy::Reject) {
          throw SchemaError("missing value at row " + std::to_string(line) + ", column '" +
                            ds.feature_names[k] + "'");
        }
        ds.features(r, k) = std::numeric_limits<double>::quiet_NaN();
      } else {
        ds.features(r, k) = *csv::parse_number(cell);
      }
    }
  }
  return ds;
}

inline Dataset load_csv(const std::filesystem::path& path, const std::string& label_column,
                        const LoadOptions& options = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset file '" + path.string() + "'");
  return load_csv(in, label_column, options, path.string());
}

// ----------------------------------------------------------- missing values

struct MissingReport {
  std::vector<std::pair<std::string, std::size_t>> per_column;
  std::size_t rows_dropped = 0;

  std::size_t total() const {
    std::size_t t = 0;
    for (const auto& [_, n] : per_column) t += n;
    return t;
  }
};

// Counts NaN cells per column and drops every incomplete row in place.
inline MissingReport check_missing(Dataset& ds) {
  MissingReport report;
  std::vector<std::size_t> counts(ds.feature_count(), 0);
  std::vector<std::size_t> complete;
  complete.reserve(ds.size());
  for (std::size_t r = 0; r < ds.size(); ++r) {
    bool ok = true;
    for (std::size_t c = 0; c < ds.feature_count(); ++c) {
      if (std::isnan(ds.features(r, c))) {
        ++counts[c];
        ok = false;
      }
    }
    if (ok) complete.push_back(r);
  }
  for (std::size_t c = 0; c < ds.feature_count(); ++c) {
    report.per_column.emplace_back(ds.feature_names[c], counts[c]);
  }
  report.rows_dropped = ds.size() - complete.size();
  if (report.rows_dropped > 0) {
    log::notice("dropped " + std::to_string(report.rows_dropped) +
                " rows with missing values");
    if (complete.empty()) throw InvalidInput("no complete rows remain after dropping missing values");
    ds = ds.subset(complete);
  } else if (ds.size() == 0) {
    throw InvalidInput("no complete rows: dataset is empty");
  }
  return report;
}

// ------------------------------------------------------------- correlation

// Pearson coefficient, or nullopt when either input is constant.
inline std::optional<double> try_pearson_correlation(std::span<const double> x,
                                                     std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidInput("correlation inputs differ in length");
  if (x.size() < 2) throw InvalidInput("correlation needs at least two samples");
  auto constant = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double e) { return e == v.front(); });
  };
  if (constant(x) || constant(y)) return std::nullopt;

  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// Constant inputs are reported as correlation 0.
inline double pearson_correlation(std::span<const double> x, std::span<const double> y) {
  if (auto r = try_pearson_correlation(x, y)) return *r;
  log::debug("correlation undefined for a constant input; using 0");
  return 0.0;
}

// --------------------------------------------------------------- selection

enum class DropReason { Redundant, Constant };

inline std::string_view to_string(DropReason r) {
  return r == DropReason::Redundant ? "redundant" : "constant";
}

struct DroppedFeature {
  std::string name;
  DropReason reason = DropReason::Redundant;
  double correlation = 0.0;  // |corr| with partner; 0 for constant columns
  std::string partner;       // kept feature it duplicates; empty if constant
};

struct SelectionReport {
  std::vector<std::string> kept;  // original column order
  std::vector<DroppedFeature> dropped;
  double threshold = 0.5;
  std::map<std::string, double> target_correlations;
};

// Greedy relevance/redundancy filter. Features are visited by decreasing
// |corr(feature, label)| (ties: column order); a feature is dropped when its
// |corr| with an already-kept feature exceeds `threshold`. Constant columns
// have no defined relevance and are dropped outright.
inline SelectionReport select_features(const Dataset& ds, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw InvalidConfig("selection threshold must lie in (0, 1), got " + std::to_string(threshold));
  }
  ds.check_invariants();
  const std::size_t p = ds.feature_count();
  std::vector<double> label_values(ds.labels.begin(), ds.labels.end());
  std::vector<std::vector<double>> columns(p);
  for (std::size_t c = 0; c < p; ++c) columns[c] = ds.features.column(c);

  SelectionReport report;
  report.threshold = threshold;
  std::vector<double> relevance(p, 0.0);
  std::vector<bool> is_constant(p, false);
  for (std::size_t c = 0; c < p; ++c) {
    const auto r = try_pearson_correlation(columns[c], label_values);
    if (!r) {
      if (std::all_of(columns[c].begin(), columns[c].end(),
                      [&](double v) { return v == columns[c].front(); })) {
        is_constant[c] = true;
        log::notice("feature '" + ds.feature_names[c] + "' is constant; correlation treated as 0");
      }
    }
    report.target_correlations[ds.feature_names[c]] = r.value_or(0.0);
    relevance[c] = std::abs(r.value_or(0.0));
  }

  std::vector<std::size_t> order(p);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return relevance[a] > relevance[b]; });

  std::vector<std::size_t> kept_idx;
  std::vector<bool> keep(p, false);
  for (std::size_t c : order) {
    if (is_constant[c]) {
      report.dropped.push_back({ds.feature_names[c], DropReason::Constant, 0.0, {}});
      continue;
    }
    double worst = 0.0;
    std::optional<std::size_t> partner;
    for (std::size_t k : kept_idx) {
      const double r = std::abs(pearson_correlation(columns[c], columns[k]));
      if (r > threshold && r > worst) {
        worst = r;
        partner = k;
      }
    }
    if (partner) {
      report.dropped.push_back(
          {ds.feature_names[c], DropReason::Redundant, worst, ds.feature_names[*partner]});
    } else {
      kept_idx.push_back(c);
      keep[c] = true;
    }
  }
  for (std::size_t c = 0; c < p; ++c) {
    if (keep[c]) report.kept.push_back(ds.feature_names[c]);
  }
  return report;
}

// ----------------------------------------------------------- normalization

// Per-column min-max scaler, fit on one split and reused on others.
struct MinMaxScaler {
  std::vector<double> min;
  std::vector<double> max;

  static MinMaxScaler fit(const Dataset& ds) {
    MinMaxScaler s;
    const std::size_t p = ds.feature_count();
    s.min.assign(p, std::numeric_limits<double>::infinity());
    s.max.assign(p, -std::numeric_limits<double>::infinity());
    for (std::size_t r = 0; r < ds.size(); ++r) {
      for (std::size_t c = 0; c < p; ++c) {
        s.min[c] = std::min(s.min[c], ds.features(r, c));
        s.max[c] = std::max(s.max[c], ds.features(r, c));
      }
    }
    if (ds.size() == 0) {
      s.min.assign(p, 0.0);
      s.max.assign(p, 0.0);
    }
    return s;
  }

  // Values outside the fitted range are clamped into [0, 1]; constant
  // columns map to 0.
  Dataset transform(const Dataset& ds, std::size_t* clamped = nullptr) const {
    if (ds.feature_count() != min.size()) {
      throw ContractViolation("scaler fitted on " + std::to_string(min.size()) +
                              " columns, dataset has " + std::to_string(ds.feature_count()));
    }
    Dataset out = ds;
    std::size_t clamp_count = 0;
    for (std::size_t r = 0; r < out.size(); ++r) {
      for (std::size_t c = 0; c < min.size(); ++c) {
        const double span = max[c] - min[c];
        double v = span > 0.0 ? (ds.features(r, c) - min[c]) / span : 0.0;
        if (v < 0.0 || v > 1.0) {
          ++clamp_count;
          v = std::clamp(v, 0.0, 1.0);
        }
        out.features(r, c) = v;
      }
    }
    if (clamp_count > 0) {
      log::notice("clamped " + std::to_string(clamp_count) + " values outside the fitted range");
    }
    if (clamped) *clamped = clamp_count;
    return out;
  }
};

inline Dataset normalize(const Dataset& ds) { return MinMaxScaler::fit(ds).transform(ds); }

// ----------------------------------------------------------------- splitting

struct SplitSpec {
  std::size_t train_count = 640;
  std::size_t test_count = 160;
  std::uint64_t seed = 42;
  bool stratified = true;
  // Share of class 1 in each split when stratified.
  double positive_fraction = 0.5;
};

struct SplitResult {
  Dataset train;
  Dataset test;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
};

inline SplitResult split(const Dataset& ds, const SplitSpec& spec) {
  if (spec.train_count == 0 || spec.test_count == 0) {
    throw InvalidConfig("train and test counts must be positive");
  }
  if (spec.train_count > ds.size() || spec.test_count > ds.size() - spec.train_count) {
    throw InvalidConfig("insufficient rows: requested " + std::to_string(spec.train_count) + " + " +
                        std::to_string(spec.test_count) + " samples from " +
                        std::to_string(ds.size()));
  }
  std::mt19937_64 rng(spec.seed);
  SplitResult result;

  if (spec.stratified) {
    if (!(spec.positive_fraction >= 0.0 && spec.positive_fraction <= 1.0)) {
      throw InvalidConfig("positive_fraction must lie in [0, 1]");
    }
    const auto pos_train =
        static_cast<std::size_t>(std::llround(spec.positive_fraction * spec.train_count));
    const auto pos_test =
        static_cast<std::size_t>(std::llround(spec.positive_fraction * spec.test_count));
    const std::size_t want[2] = {(spec.train_count - pos_train) + (spec.test_count - pos_test),
                                 pos_train + pos_test};
    const std::size_t train_want[2] = {spec.train_count - pos_train, pos_train};
    for (int label : {0, 1}) {
      std::vector<std::size_t> pool;
      for (std::size_t r = 0; r < ds.size(); ++r)
        if (ds.labels[r] == label) pool.push_back(r);
      if (pool.size() < want[label]) {
        throw InvalidConfig("insufficient rows: class " + std::to_string(label) + " has " +
                            std::to_string(pool.size()) + " samples, stratified split needs " +
                            std::to_string(want[label]));
      }
      std::shuffle(pool.begin(), pool.end(), rng);
      result.train_indices.insert(result.train_indices.end(), pool.begin(),
                                  pool.begin() + static_cast<std::ptrdiff_t>(train_want[label]));
      result.test_indices.insert(result.test_indices.end(),
                                 pool.begin() + static_cast<std::ptrdiff_t>(train_want[label]),
                                 pool.begin() + static_cast<std::ptrdiff_t>(want[label]));
    }
  } else {
    std::vector<std::size_t> pool(ds.size());
    std::iota(pool.begin(), pool.end(), 0);
    std::shuffle(pool.begin(), pool.end(), rng);
    const auto train_end = pool.begin() + static_cast<std::ptrdiff_t>(spec.train_count);
    result.train_indices.assign(pool.begin(), train_end);
    result.test_indices.assign(train_end,
                               train_end + static_cast<std::ptrdiff_t>(spec.test_count));
  }

  std::sort(result.train_indices.begin(), result.train_indices.end());
  std::sort(result.test_indices.begin(), result.test_indices.end());
  result.train = ds.subset(result.train_indices);
  result.test = ds.subset(result.test_indices);
  return result;
}

// Audit export: one "split,row_index" line per selected row.
inline void write_split_csv(const SplitResult& s, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write split file '" + path.string() + "'");
  out << "split,row_index\n";
  for (std::size_t i : s.train_indices) out << "train," << i << '\n';
  for (std::size_t i : s.test_indices) out << "test," << i << '\n';
}

// ------------------------------------------------------------ synthetic data

// Two isotropic unit-variance Gaussian classes. Class 1 is shifted by
// +separation/2 on even-indexed features and -separation/2 on odd ones;
// class 0 by the opposite, so each feature's class means differ by
// `separation` standard deviations.
struct SyntheticSpec {
  std::size_t rows = 2000;
  std::size_t features = 4;
  double separation = 3.0;
  std::uint64_t seed = 7;
};

inline Dataset make_two_gaussians(const SyntheticSpec& spec) {
  if (spec.rows < 2 || spec.features < 1) throw InvalidConfig("synthetic data needs >= 2 rows and >= 1 feature");
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  Dataset ds;
  ds.provenance = "synthetic:two-gaussians";
  for (std::size_t c = 0; c < spec.features; ++c) ds.feature_names.push_back("x" + std::to_string(c));
  ds.features = FeatureMatrix(spec.rows, spec.features);
  ds.labels.resize(spec.rows);
  for (std::size_t r = 0; r < spec.rows; ++r) {
    const int label = static_cast<int>(r % 2);
    ds.labels[r] = label;
    const double sign = label == 1 ? 1.0 : -1.0;
    for (std::size_t c = 0; c < spec.features; ++c) {
      const double pattern = c % 2 == 0 ? 1.0 : -1.0;
      ds.features(r, c) = sign * pattern * 0.5 * spec.separation + noise(rng);
    }
  }
  return ds;
}

}  // namespace phishvqc
