// Experiment harness: flat key=value configs, the load -> missing-check ->
// select -> split -> normalize -> train -> evaluate pipeline, run artifacts,
// an SVG trace plot and cross-run comparison tables.
#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "phishvqc/ansatz.hpp"
#include "phishvqc/cobyla.hpp"
#include "phishvqc/csv.hpp"
#include "phishvqc/dataprep.hpp"
#include "phishvqc/error.hpp"
#include "phishvqc/log.hpp"
#include "phishvqc/report.hpp"
#include "phishvqc/vqc.hpp"

namespace phishvqc {

// ------------------------------------------------------------ configuration

struct ExperimentConfig {
  std::string name = "ASetup";
  std::string dataset_path;  // defaults to $PHISHVQC_DATA
  std::string label_column = "label";
  bool drop_missing = true;  // false: a missing cell aborts the load

  bool synthetic = false;
  std::size_t synthetic_rows = 0;  // 0: twice train_count + test_count, capped
  std::size_t synthetic_features = 32;
  double synthetic_separation = 3.0;
  std::uint64_t synthetic_seed = 7;

  bool select_features = true;
  double selection_threshold = 0.5;

  std::size_t train_count = 640;
  std::size_t test_count = 160;
  bool stratified = true;
  double positive_fraction = 0.5;

  AnsatzFamily ansatz = AnsatzFamily::RealAmplitudes;
  std::size_t reps = 3;
  Entanglement entanglement = Entanglement::Full;

  std::size_t budget = 300;
  double rho_begin = 1.0;
  double rho_end = 1e-4;
  std::uint64_t seed = 42;

  std::string output_directory = "phishvqc-out";

  static ExperimentConfig defaults() {
    ExperimentConfig c;
    if (const char* env = std::getenv("PHISHVQC_DATA"); env && *env) c.dataset_path = env;
    return c;
  }
};

namespace detail {

inline bool parse_bool(const std::string& key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw InvalidConfig("'" + key + "' expects a boolean, got '" + std::string(v) + "'");
}

inline double parse_real(const std::string& key, std::string_view v) {
  const auto d = csv::parse_number(v);
  if (!d || !std::isfinite(*d)) {
    throw InvalidConfig("'" + key + "' expects a number, got '" + std::string(v) + "'");
  }
  return *d;
}

inline std::uint64_t parse_unsigned(const std::string& key, std::string_view v) {
  v = csv::trim(v);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size()) {
    throw InvalidConfig("'" + key + "' expects a non-negative integer, got '" + std::string(v) + "'");
  }
  return out;
}

}  // namespace detail

inline void set_option(ExperimentConfig& c, const std::string& key, const std::string& value) {
  using namespace detail;
  const std::string v(csv::trim(value));
  if (key == "name") c.name = v;
  else if (key == "dataset_path") c.dataset_path = v;
  else if (key == "label_column") c.label_column = v;
  else if (key == "drop_missing") c.drop_missing = parse_bool(key, v);
  else if (key == "synthetic") c.synthetic = parse_bool(key, v);
  else if (key == "synthetic_rows") c.synthetic_rows = parse_unsigned(key, v);
  else if (key == "synthetic_features") c.synthetic_features = parse_unsigned(key, v);
  else if (key == "synthetic_separation") c.synthetic_separation = parse_real(key, v);
  else if (key == "synthetic_seed") c.synthetic_seed = parse_unsigned(key, v);
  else if (key == "select_features") c.select_features = parse_bool(key, v);
  else if (key == "selection_threshold") c.selection_threshold = parse_real(key, v);
  else if (key == "train_count") c.train_count = parse_unsigned(key, v);
  else if (key == "test_count") c.test_count = parse_unsigned(key, v);
  else if (key == "stratified") c.stratified = parse_bool(key, v);
  else if (key == "positive_fraction") c.positive_fraction = parse_real(key, v);
  else if (key == "ansatz") c.ansatz = parse_ansatz_family(v);
  else if (key == "reps") c.reps = parse_unsigned(key, v);
  else if (key == "entanglement") c.entanglement = parse_entanglement(v);
  else if (key == "budget") c.budget = parse_unsigned(key, v);
  else if (key == "rho_begin") c.rho_begin = parse_real(key, v);
  else if (key == "rho_end") c.rho_end = parse_real(key, v);
  else if (key == "seed") c.seed = parse_unsigned(key, v);
  else if (key == "output_directory") c.output_directory = v;
  else throw InvalidConfig("unknown config key '" + key + "'");
}

// "key=value" form used by command-line overrides.
inline void apply_assignment(ExperimentConfig& c, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw InvalidConfig("expected key=value, got '" + std::string(assignment) + "'");
  }
  set_option(c, std::string(csv::trim(assignment.substr(0, eq))),
             std::string(assignment.substr(eq + 1)));
}

// Flat key = value lines; '#' or ';' starts a comment.
inline void load_config(ExperimentConfig& c, std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find_first_of("#;"); hash != std::string::npos) line.erase(hash);
    const auto trimmed = csv::trim(line);
    if (trimmed.empty() || trimmed == "\r") continue;
    std::string body(trimmed);
    if (!body.empty() && body.back() == '\r') body.pop_back();
    try {
      if (body.front() == '[') throw InvalidConfig("sections are not supported");
      apply_assignment(c, body);
    } catch (const InvalidConfig& e) {
      throw InvalidConfig(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

inline ExperimentConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  ExperimentConfig c = ExperimentConfig::defaults();
  load_config(c, in, path.string());
  return c;
}

inline void validate(const ExperimentConfig& c) {
  if (!c.synthetic && c.dataset_path.empty()) {
    throw InvalidConfig("no dataset: set dataset_path, export PHISHVQC_DATA, or pass --synthetic");
  }
  if (c.select_features && !(c.selection_threshold > 0.0 && c.selection_threshold < 1.0)) {
    throw InvalidConfig("selection_threshold must lie in (0, 1)");
  }
  if (c.train_count == 0 || c.test_count == 0) throw InvalidConfig("train_count and test_count must be positive");
  if (!(c.positive_fraction >= 0.0 && c.positive_fraction <= 1.0)) {
    throw InvalidConfig("positive_fraction must lie in [0, 1]");
  }
  if (c.reps == 0) throw InvalidConfig("reps must be >= 1");
  if (c.synthetic && c.synthetic_features == 0) throw InvalidConfig("synthetic_features must be >= 1");
  if (c.output_directory.empty()) throw InvalidConfig("output_directory must not be empty");
}

// Everything except output_directory, so reports are location independent.
inline Json config_to_json(const ExperimentConfig& c) {
  Json j{{"name", c.name},
         {"dataset_path", c.synthetic ? std::string() : c.dataset_path},
         {"label_column", c.label_column},
         {"drop_missing", c.drop_missing},
         {"synthetic", c.synthetic}};
  if (c.synthetic) {
    j["synthetic_rows"] = c.synthetic_rows;
    j["synthetic_features"] = c.synthetic_features;
    j["synthetic_separation"] = c.synthetic_separation;
    j["synthetic_seed"] = c.synthetic_seed;
  }
  j["select_features"] = c.select_features;
  j["selection_threshold"] = c.selection_threshold;
  j["train_count"] = c.train_count;
  j["test_count"] = c.test_count;
  j["stratified"] = c.stratified;
  j["positive_fraction"] = c.positive_fraction;
  j["ansatz"] = std::string(to_string(c.ansatz));
  j["reps"] = c.reps;
  j["entanglement"] = std::string(to_string(c.entanglement));
  j["budget"] = c.budget;
  j["rho_begin"] = c.rho_begin;
  j["rho_end"] = c.rho_end;
  j["seed"] = c.seed;
  return j;
}

// ---------------------------------------------------------------- stages

class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error(stage + " stage failed: " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

template <class F>
auto run_stage(std::string_view stage, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(std::string(stage), e.what());
  }
}

inline Dataset load_dataset(const ExperimentConfig& c) {
  if (c.synthetic) {
    SyntheticSpec s;
    // Auto size is capped; oversized requests then fail in the split stage.
    constexpr std::size_t kAutoRowCap = 1'000'000;
    s.rows = c.synthetic_rows > 0
                 ? c.synthetic_rows
                 : std::min(kAutoRowCap, 2 * (c.train_count + c.test_count));
    s.features = c.synthetic_features;
    s.separation = c.synthetic_separation;
    s.seed = c.synthetic_seed;
    return make_two_gaussians(s);
  }
  LoadOptions opts;
  opts.missing = c.drop_missing ? MissingPolicy::Keep : MissingPolicy::Reject;
  return load_csv(std::filesystem::path(c.dataset_path), c.label_column, opts);
}

struct PreparedData {
  Dataset train;
  Dataset test;
  std::string provenance;
  std::size_t rows_loaded = 0;
  MissingReport missing;
  SelectionReport selection;
  bool selection_applied = false;
  MinMaxScaler scaler;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
  std::size_t zero_rows_dropped = 0;
};

namespace detail {

// Rows that normalize to all zeros cannot be amplitude encoded.
inline std::size_t drop_zero_rows(Dataset& ds) {
  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < ds.size(); ++r) {
    const auto row = ds.features.row(r);
    if (std::any_of(row.begin(), row.end(), [](double v) { return v != 0.0; })) keep.push_back(r);
  }
  const std::size_t dropped = ds.size() - keep.size();
  if (dropped > 0) ds = ds.subset(keep);
  return dropped;
}

}  // namespace detail

inline PreparedData prepare_data(const ExperimentConfig& c) {
  validate(c);
  PreparedData p;
  Dataset ds = run_stage("load", [&] { return load_dataset(c); });
  p.provenance = ds.provenance;
  p.rows_loaded = ds.size();

  p.missing = run_stage("missing-check", [&] { return check_missing(ds); });

  run_stage("select", [&] {
    if (c.select_features) {
      p.selection = select_features(ds, c.selection_threshold);
      p.selection_applied = true;
      ds = ds.select_columns(p.selection.kept);
    } else {
      p.selection.kept = ds.feature_names;
      p.selection.threshold = c.selection_threshold;
    }
    if (required_qubits(ds.feature_count()) > kMaxQubits) {
      throw InvalidConfig(std::to_string(ds.feature_count()) + " features exceed the simulator limit");
    }
  });

  auto parts = run_stage("split", [&] {
    SplitSpec spec;
    spec.train_count = c.train_count;
    spec.test_count = c.test_count;
    spec.seed = c.seed;
    spec.stratified = c.stratified;
    spec.positive_fraction = c.positive_fraction;
    return split(ds, spec);
  });
  p.train_indices = std::move(parts.train_indices);
  p.test_indices = std::move(parts.test_indices);

  run_stage("normalize", [&] {
    p.scaler = MinMaxScaler::fit(parts.train);
    p.train = p.scaler.transform(parts.train);
    p.test = p.scaler.transform(parts.test);
    p.zero_rows_dropped = detail::drop_zero_rows(p.train) + detail::drop_zero_rows(p.test);
    if (p.zero_rows_dropped > 0) {
      log::notice("dropped " + std::to_string(p.zero_rows_dropped) +
                  " rows that normalize to the zero vector");
    }
    if (p.train.size() == 0 || p.test.size() == 0) {
      throw InvalidInput("no encodable rows left after normalization");
    }
  });
  return p;
}

inline AnsatzSpec ansatz_for(const ExperimentConfig& c, std::size_t feature_count) {
  return AnsatzSpec{c.ansatz, required_qubits(feature_count), c.reps, c.entanglement};
}

inline OptimizerConfig optimizer_for(const ExperimentConfig& c) {
  return OptimizerConfig{c.budget, c.rho_begin, c.rho_end, c.seed};
}

inline Json data_summary(const PreparedData& p) {
  return Json{{"provenance", p.provenance},
              {"rows_loaded", p.rows_loaded},
              {"rows_dropped_missing", p.missing.rows_dropped},
              {"feature_count", p.train.feature_count()},
              {"features", p.train.feature_names},
              {"train_count", p.train.size()},
              {"test_count", p.test.size()},
              {"train_class_counts", {p.train.count_label(0), p.train.count_label(1)}},
              {"test_class_counts", {p.test.count_label(0), p.test.count_label(1)}},
              {"zero_rows_dropped", p.zero_rows_dropped}};
}

inline Json selection_json(const PreparedData& p) {
  Json j = to_json(p.selection);
  j["applied"] = p.selection_applied;
  return j;
}

// Everything needed to score new data with a trained model.
inline Json model_file_json(const TrainReport& r, const PreparedData& p) {
  return Json{{"model", to_json(r.model)},
              {"features", p.train.feature_names},
              {"scaler", {{"min", p.scaler.min}, {"max", p.scaler.max}}}};
}

inline Json report_json(const ExperimentConfig& c, const PreparedData& p, const TrainReport& r) {
  Json j{{"setup", c.name}, {"config", config_to_json(c)}, {"data", data_summary(p)}};
  const Json run = to_json(r);
  for (const auto& [key, value] : run.items()) j[key] = value;
  return j;
}

// ------------------------------------------------------------------ plotting

namespace detail {

inline std::string fmt(double v, const char* spec = "%.2f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace detail

inline std::vector<double> read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open trace '" + path.string() + "'");
  csv::Reader reader(in);
  const auto header = reader.next();
  if (!header || header->size() != 2 || csv::trim((*header)[0]) != "iteration" ||
      csv::trim((*header)[1]) != "best_loss") {
    throw ParseError("trace header must be 'iteration,best_loss'", 1);
  }
  std::vector<double> values;
  std::size_t row_no = 1;
  while (auto row = reader.next()) {
    ++row_no;
    if (row->size() == 1 && csv::trim(row->front()).empty()) continue;
    if (row->size() != 2) throw ParseError("expected 2 fields", row_no);
    const auto it = csv::parse_number((*row)[0]);
    const auto v = csv::parse_number((*row)[1]);
    if (!it || !v || !std::isfinite(*v)) throw ParseError("non-numeric trace entry", row_no);
    values.push_back(*v);
  }
  return values;
}

inline std::string trace_svg(const std::vector<double>& values, const std::string& title) {
  if (values.empty()) throw InvalidInput("trace is empty; nothing to plot");
  constexpr double W = 640, H = 400, L = 70, R = 20, T = 40, B = 50;
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  double lo = *lo_it, hi = *hi_it;
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const std::size_t n = values.size();
  auto x_of = [&](std::size_t i) {
    return n == 1 ? L + (W - L - R) / 2 : L + (W - L - R) * static_cast<double>(i) / (n - 1);
  };
  auto y_of = [&](double v) { return T + (H - T - B) * (hi - v) / (hi - lo); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title
      << "</text>\n"
      << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
      << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B
      << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12
      << "\" text-anchor=\"middle\" font-size=\"13\">iteration</text>\n"
      << "<text x=\"18\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" font-size=\"13\" "
      << "transform=\"rotate(-90 18 " << (T + H - B) / 2 << ")\">best loss</text>\n"
      << "<text x=\"" << L - 6 << "\" y=\"" << T + 4 << "\" text-anchor=\"end\" font-size=\"11\">"
      << detail::fmt(hi, "%.4g") << "</text>\n"
      << "<text x=\"" << L - 6 << "\" y=\"" << H - B + 4
      << "\" text-anchor=\"end\" font-size=\"11\">" << detail::fmt(lo, "%.4g") << "</text>\n"
      << "<text x=\"" << L << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\" font-size=\"11\">1</text>\n"
      << "<text x=\"" << W - R << "\" y=\"" << H - B + 16
      << "\" text-anchor=\"middle\" font-size=\"11\">" << n << "</text>\n"
      << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < n; ++i) {
    svg << (i ? " " : "") << detail::fmt(x_of(i)) << ',' << detail::fmt(y_of(values[i]));
  }
  svg << "\"/>\n";
  if (n == 1) {
    svg << "<circle cx=\"" << detail::fmt(x_of(0)) << "\" cy=\"" << detail::fmt(y_of(values[0]))
        << "\" r=\"3\" fill=\"steelblue\"/>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

inline void emit_trace_plot(const std::filesystem::path& trace_path,
                            const std::filesystem::path& out_path) {
  const auto values = read_trace_csv(trace_path);
  const auto svg = trace_svg(values, "Objective value per iteration");
  std::ofstream out(out_path);
  if (!out) throw IoError("cannot write '" + out_path.string() + "'");
  out << svg;
}

// --------------------------------------------------------------- full run

struct RunArtifacts {
  std::filesystem::path report_path;
  std::filesystem::path trace_path;
  std::filesystem::path selection_path;
  std::filesystem::path model_path;
  std::optional<std::filesystem::path> plot_path;
};

struct RunResult {
  RunArtifacts artifacts;
  Json report;
};

inline std::string json_number(double v) { return Json(v).dump(); }

// One Table III style row; numbers are printed exactly as stored in the report.
inline void print_summary(std::ostream& os, const Json& report) {
  const auto& m = report.at("metrics");
  const auto& a = report.at("model").at("ansatz");
  os << std::left << std::setw(12) << "setup" << std::setw(20) << "ansatz" << std::setw(22)
     << "macro_precision" << std::setw(22) << "macro_recall" << std::setw(22) << "macro_f1"
     << "wall_time_s\n";
  const std::string ansatz =
      a.at("family").get<std::string>() + " r" + std::to_string(a.at("reps").get<std::size_t>());
  os << std::setw(12) << report.at("setup").get<std::string>() << std::setw(20) << ansatz
     << std::setw(22) << json_number(m.at("macro_precision").get<double>()) << std::setw(22)
     << json_number(m.at("macro_recall").get<double>()) << std::setw(22)
     << json_number(m.at("macro_f1").get<double>())
     << json_number(report.at("wall_time_seconds").get<double>()) << '\n';
}

inline RunResult run_experiment(const ExperimentConfig& c, std::ostream* summary = nullptr,
                                bool emit_plot = true) {
  const PreparedData p = prepare_data(c);
  TrainReport r = run_stage("train", [&] {
    return train(p.train, ansatz_for(c, p.train.feature_count()), optimizer_for(c));
  });
  r.metrics = run_stage("evaluate", [&] { return evaluate(r.model, p.test); });

  RunResult result;
  result.report = report_json(c, p, r);
  run_stage("write", [&] {
    const std::filesystem::path dir(c.output_directory);
    std::filesystem::create_directories(dir);
    auto& a = result.artifacts;
    a.report_path = dir / "report.json";
    a.trace_path = dir / "trace.csv";
    a.selection_path = dir / "selection.json";
    a.model_path = dir / "model.json";
    write_json(result.report, a.report_path);
    write_trace_csv(r.trace, a.trace_path);
    write_json(selection_json(p), a.selection_path);
    write_json(model_file_json(r, p), a.model_path);
    if (emit_plot) {
      a.plot_path = dir / "trace.svg";
      emit_trace_plot(a.trace_path, *a.plot_path);
    }
  });
  if (summary) print_summary(*summary, result.report);
  return result;
}

// ------------------------------------------------------------- comparison

struct ComparisonRow {
  std::string source;
  std::string setup;
  std::string ansatz;
  double macro_f1 = 0.0;
  double wall_time_seconds = 0.0;
  std::size_t evaluations_used = 0;
};

inline ComparisonRow comparison_row(const Json& report, const std::string& source) {
  try {
    ComparisonRow row;
    row.source = source;
    row.setup = report.at("setup").get<std::string>();
    const auto& a = report.at("model").at("ansatz");
    row.ansatz =
        a.at("family").get<std::string>() + " r" + std::to_string(a.at("reps").get<std::size_t>());
    row.macro_f1 = report.at("metrics").at("macro_f1").get<double>();
    row.wall_time_seconds = report.at("wall_time_seconds").get<double>();
    row.evaluations_used = report.at("optimizer").at("evaluations_used").get<std::size_t>();
    return row;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(source + ": not a run report (" + e.what() + ")");
  }
}

// Rows sorted by macro F1, best first; equal scores keep input order.
inline std::vector<ComparisonRow> compare_runs(const std::vector<std::filesystem::path>& paths) {
  if (paths.size() < 2) throw InvalidConfig("compare needs at least two report files");
  std::vector<ComparisonRow> rows;
  for (const auto& path : paths) rows.push_back(comparison_row(read_json(path), path.string()));
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.macro_f1 > b.macro_f1; });
  return rows;
}

inline void write_comparison_text(std::ostream& os, const std::vector<ComparisonRow>& rows) {
  os << std::left << std::setw(12) << "setup" << std::setw(22) << "ansatz" << std::setw(12)
     << "macro_f1" << std::setw(14) << "wall_time_s" << "evaluations\n";
  for (const auto& r : rows) {
    os << std::setw(12) << r.setup << std::setw(22) << r.ansatz << std::setw(12)
       << detail::fmt(r.macro_f1, "%.4f") << std::setw(14)
       << detail::fmt(r.wall_time_seconds, "%.3f") << r.evaluations_used << '\n';
  }
}

inline void write_comparison_csv(std::ostream& os, const std::vector<ComparisonRow>& rows) {
  os << "setup,ansatz,macro_f1,wall_time_seconds,evaluations_used,report\n";
  for (const auto& r : rows) {
    os << r.setup << ',' << r.ansatz << ',' << json_number(r.macro_f1) << ','
       << json_number(r.wall_time_seconds) << ',' << r.evaluations_used << ",\"" << r.source
       << "\"\n";
  }
}

}  // namespace phishvqc
