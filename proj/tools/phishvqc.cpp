// phishvqc: command-line harness for the phishing-URL VQC pipeline.
//
//   phishvqc run --config configs/asetup.cfg --ansatz efficient-su2
//   phishvqc compare out/a/report.json out/b/report.json
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "phishvqc/experiment.hpp"

namespace fs = std::filesystem;
using namespace phishvqc;

namespace {

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> ansatz;
  std::optional<std::size_t> reps;
  std::optional<std::size_t> budget;
  std::optional<double> threshold;
  std::optional<std::string> out_dir;
  std::optional<std::string> data;
  bool synthetic = false;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("-c,--config", o.config_path, "Preset or config file (key = value lines)");
  cmd->add_option("--seed", o.seed, "Seed for splitting and parameter initialization");
  cmd->add_option("--ansatz", o.ansatz, "real-amplitudes | efficient-su2")
      ->check(CLI::IsMember({"real-amplitudes", "efficient-su2"}));
  cmd->add_option("--reps", o.reps, "Ansatz repetitions")->check(CLI::PositiveNumber);
  cmd->add_option("--budget", o.budget, "COBYLA objective-evaluation budget");
  cmd->add_option("--threshold", o.threshold, "Feature-selection correlation threshold");
  cmd->add_option("--out-dir", o.out_dir, "Directory for reports and traces");
  cmd->add_option("--data", o.data, "Dataset CSV (default: $PHISHVQC_DATA)");
  cmd->add_flag("--synthetic", o.synthetic, "Use a generated two-Gaussian dataset");
  cmd->add_option("--set", o.overrides, "Override any config key: --set key=value");
}

ExperimentConfig resolve(const CommonOptions& o) {
  ExperimentConfig c =
      o.config_path.empty() ? ExperimentConfig::defaults() : load_config_file(o.config_path);
  for (const auto& kv : o.overrides) apply_assignment(c, kv);
  if (o.seed) c.seed = *o.seed;
  if (o.ansatz) c.ansatz = parse_ansatz_family(*o.ansatz);
  if (o.reps) c.reps = *o.reps;
  if (o.budget) c.budget = *o.budget;
  if (o.threshold) c.selection_threshold = *o.threshold;
  if (o.out_dir) c.output_directory = *o.out_dir;
  if (o.data) c.dataset_path = *o.data;
  if (o.synthetic) c.synthetic = true;
  return c;
}

fs::path ensure_out_dir(const ExperimentConfig& c) {
  fs::path dir(c.output_directory);
  fs::create_directories(dir);
  return dir;
}

int cmd_ingest(const CommonOptions& o) {
  auto c = resolve(o);
  validate(c);
  Dataset ds = run_stage("load", [&] { return load_dataset(c); });
  const std::size_t loaded = ds.size();
  const auto missing = run_stage("missing-check", [&] { return check_missing(ds); });

  Json summary{{"provenance", ds.provenance},
               {"rows_loaded", loaded},
               {"rows_after_missing_check", ds.size()},
               {"feature_count", ds.feature_count()},
               {"features", ds.feature_names},
               {"dropped_columns", ds.dropped_columns},
               {"class_counts", {{"phishing", ds.count_label(0)}, {"legitimate", ds.count_label(1)}}}};
  Json missing_json = Json::object();
  for (const auto& [name, count] : missing.per_column) {
    if (count > 0) missing_json[name] = count;
  }
  summary["missing_by_column"] = missing_json;

  const auto path = ensure_out_dir(c) / "ingest.json";
  write_json(summary, path);
  std::cout << "rows: " << ds.size() << " (" << missing.rows_dropped << " dropped for missing values)\n"
            << "features: " << ds.feature_count() << " numeric, " << ds.dropped_columns.size()
            << " non-numeric dropped\n"
            << "legitimate: " << ds.count_label(1) << "  phishing: " << ds.count_label(0) << '\n'
            << "wrote " << path.string() << '\n';
  return 0;
}

int cmd_select(const CommonOptions& o) {
  auto c = resolve(o);
  validate(c);
  Dataset ds = run_stage("load", [&] { return load_dataset(c); });
  run_stage("missing-check", [&] { return check_missing(ds); });
  const auto report = run_stage("select", [&] { return select_features(ds, c.selection_threshold); });

  const auto path = ensure_out_dir(c) / "selection.json";
  write_json(to_json(report), path);
  std::cout << "threshold " << report.threshold << ": kept " << report.kept.size() << " of "
            << ds.feature_count() << " features\n";
  for (const auto& name : report.kept) {
    std::cout << "  keep  " << name << "  corr=" << report.target_correlations.at(name) << '\n';
  }
  for (const auto& d : report.dropped) {
    std::cout << "  drop  " << d.name << "  " << to_string(d.reason);
    if (!d.partner.empty()) std::cout << " (|corr|=" << d.correlation << " with " << d.partner << ')';
    std::cout << '\n';
  }
  std::cout << "wrote " << path.string() << '\n';
  return 0;
}

int cmd_train(const CommonOptions& o) {
  auto c = resolve(o);
  const auto p = prepare_data(c);
  const auto spec = ansatz_for(c, p.train.feature_count());
  std::cout << "training " << to_string(spec.family) << " reps=" << spec.reps << " on "
            << p.train.size() << " samples, " << p.train.feature_count() << " features, "
            << spec.n_qubits << " qubits, " << parameter_count(spec) << " parameters\n";
  const auto r = run_stage("train", [&] { return train(p.train, spec, optimizer_for(c)); });

  const auto dir = ensure_out_dir(c);
  write_json(report_json(c, p, r), dir / "report.json");
  write_trace_csv(r.trace, dir / "trace.csv");
  write_json(selection_json(p), dir / "selection.json");
  write_json(model_file_json(r, p), dir / "model.json");
  std::cout << "final loss " << r.trace.final_value << " after " << r.trace.evaluations_used
            << " evaluations (" << to_string(r.trace.termination) << "), wall time "
            << r.wall_time_seconds << " s\n"
            << "wrote " << (dir / "model.json").string() << '\n';
  return 0;
}

int cmd_evaluate(const CommonOptions& o, const std::string& model_arg) {
  auto c = resolve(o);
  const fs::path model_path = model_arg.empty() ? fs::path(c.output_directory) / "model.json" : fs::path(model_arg);
  const Json file = read_json(model_path);
  const auto p = prepare_data(c);
  const auto metrics = run_stage("evaluate", [&] {
    VqcModel model;
    std::vector<std::string> features;
    std::vector<double> lo, hi;
    try {
      model = model_from_json(file.at("model"));
      features = file.at("features").get<std::vector<std::string>>();
      lo = file.at("scaler").at("min").get<std::vector<double>>();
      hi = file.at("scaler").at("max").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(model_path.string() + ": not a model file (" + e.what() + ")");
    }
    if (features != p.train.feature_names || lo != p.scaler.min || hi != p.scaler.max) {
      throw InvalidConfig("model was trained with a different data configuration");
    }
    return evaluate(model, p.test);
  });

  const auto path = ensure_out_dir(c) / "metrics.json";
  write_json(to_json(metrics), path);
  std::cout << "test samples " << metrics.total() << "  accuracy " << metrics.accuracy() << '\n'
            << "macro precision " << metrics.macro_precision << "  macro recall "
            << metrics.macro_recall << "  macro F1 " << metrics.macro_f1 << '\n'
            << "wrote " << path.string() << '\n';
  return 0;
}

int cmd_run(const CommonOptions& o) {
  auto c = resolve(o);
  const auto result = run_experiment(c, &std::cout);
  const auto& a = result.artifacts;
  std::cout << "artifacts: " << a.report_path.string() << ", " << a.trace_path.string() << ", "
            << a.selection_path.string() << ", " << a.model_path.string();
  if (a.plot_path) std::cout << ", " << a.plot_path->string();
  std::cout << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variational quantum classifier for phishing-URL detection"};
  app.require_subcommand(1);
  app.fallthrough();
  bool quiet = false, verbose = false;
  app.add_flag("-q,--quiet", quiet, "Suppress notices");
  app.add_flag("-v,--verbose", verbose, "Print debug notices");

  CommonOptions common;
  std::string model_path, trace_path, svg_path, csv_path;
  std::vector<std::string> reports;

  auto* ingest = app.add_subcommand("ingest", "Load the dataset and report missing values");
  auto* select = app.add_subcommand("select", "Run correlation-based feature selection");
  auto* train = app.add_subcommand("train", "Prepare data and train the classifier");
  auto* evaluate = app.add_subcommand("evaluate", "Score a trained model on the test split");
  auto* run = app.add_subcommand("run", "Full pipeline with reports, trace and plot");
  for (auto* cmd : {ingest, select, train, evaluate, run}) add_common(cmd, common);
  evaluate->add_option("--model", model_path, "Model file (default: <out-dir>/model.json)");

  auto* plot = app.add_subcommand("plot", "Render a trace CSV as an SVG line chart");
  plot->add_option("trace", trace_path, "Trace CSV (iteration,best_loss)")->required();
  plot->add_option("-o,--out", svg_path, "Output SVG (default: trace path with .svg)");

  auto* compare = app.add_subcommand("compare", "Tabulate several run reports");
  compare->add_option("reports", reports, "Report JSON files")->required();
  compare->add_option("--csv", csv_path, "Also write the table as CSV");

  CLI11_PARSE(app, argc, argv);
  log::set_level(quiet ? log::Level::Quiet : verbose ? log::Level::Debug : log::Level::Notice);

  try {
    if (*ingest) return cmd_ingest(common);
    if (*select) return cmd_select(common);
    if (*train) return cmd_train(common);
    if (*evaluate) return cmd_evaluate(common, model_path);
    if (*run) return cmd_run(common);
    if (*plot) {
      const fs::path out = svg_path.empty() ? fs::path(trace_path).replace_extension(".svg") : fs::path(svg_path);
      emit_trace_plot(trace_path, out);
      std::cout << "wrote " << out.string() << '\n';
      return 0;
    }
    if (*compare) {
      if (reports.size() < 2) {
        std::cerr << "usage: phishvqc compare REPORT REPORT [REPORT...]\n";
        return 2;
      }
      std::vector<fs::path> paths(reports.begin(), reports.end());
      const auto rows = compare_runs(paths);
      write_comparison_text(std::cout, rows);
      if (!csv_path.empty()) {
        std::ofstream out(csv_path);
        if (!out) throw IoError("cannot write '" + csv_path + "'");
        write_comparison_csv(out, rows);
      }
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "phishvqc: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "phishvqc: unexpected error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
