// JSON serialization of selection reports, optimizer traces, metrics and
// trained models.
#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "phishvqc/ansatz.hpp"
#include "phishvqc/cobyla.hpp"
#include "phishvqc/dataprep.hpp"
#include "phishvqc/error.hpp"
#include "phishvqc/metrics.hpp"
#include "phishvqc/vqc.hpp"

namespace phishvqc {

using Json = nlohmann::ordered_json;

inline Json to_json(const SelectionReport& r) {
  Json dropped = Json::array();
  for (const auto& d : r.dropped) {
    Json entry{{"name", d.name}, {"reason", std::string(to_string(d.reason))},
               {"correlation", d.correlation}};
    if (!d.partner.empty()) entry["partner"] = d.partner;
    dropped.push_back(std::move(entry));
  }
  Json target = Json::object();
  for (const auto& [name, corr] : r.target_correlations) target[name] = corr;
  return Json{{"threshold", r.threshold},
              {"kept_count", r.kept.size()},
              {"kept", r.kept},
              {"dropped", std::move(dropped)},
              {"target_correlations", std::move(target)}};
}

inline Json to_json(const EvalMetrics& m) {
  auto per_class = [&](int c) {
    return Json{{"precision", m.precision[c]}, {"recall", m.recall[c]}, {"f1", m.f1[c]}};
  };
  return Json{{"confusion", {{m.confusion[0][0], m.confusion[0][1]},
                             {m.confusion[1][0], m.confusion[1][1]}}},
              {"accuracy", m.accuracy()},
              {"phishing", per_class(0)},
              {"legitimate", per_class(1)},
              {"macro_precision", m.macro_precision},
              {"macro_recall", m.macro_recall},
              {"macro_f1", m.macro_f1}};
}

inline Json to_json(const AnsatzSpec& s) {
  return Json{{"family", std::string(to_string(s.family))},
              {"n_qubits", s.n_qubits},
              {"reps", s.reps},
              {"entanglement", std::string(to_string(s.entanglement))}};
}

inline AnsatzSpec ansatz_from_json(const Json& j) {
  AnsatzSpec s;
  s.family = parse_ansatz_family(j.at("family").get<std::string>());
  s.n_qubits = j.at("n_qubits").get<std::size_t>();
  s.reps = j.at("reps").get<std::size_t>();
  s.entanglement = parse_entanglement(j.at("entanglement").get<std::string>());
  return s;
}

inline Json to_json(const VqcModel& m) {
  return Json{{"ansatz", to_json(m.spec)},
              {"feature_count", m.feature_count},
              {"n_qubits", m.n_qubits},
              {"params", m.params}};
}

inline VqcModel model_from_json(const Json& j) {
  return VqcModel::create(ansatz_from_json(j.at("ansatz")),
                          j.at("params").get<std::vector<double>>(),
                          j.at("feature_count").get<std::size_t>());
}

inline Json to_json(const OptimizationTrace& t) {
  return Json{{"evaluations_used", t.evaluations_used},
              {"termination", std::string(to_string(t.termination))},
              {"final_loss", t.final_value},
              {"best_loss_per_iteration", t.best_value_per_iteration}};
}

inline Json to_json(const TrainReport& r) {
  Json j{{"seed", r.seed},
         {"model", to_json(r.model)},
         {"optimizer", to_json(r.trace)},
         {"metrics", r.metrics ? to_json(*r.metrics) : Json(nullptr)},
         {"wall_time_seconds", r.wall_time_seconds}};
  return j;
}

inline void write_json(const Json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

inline Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(path.string() + ": invalid JSON (" + e.what() + ")");
  }
}

// Two-column CSV: iteration (1-based), best loss so far.
inline void write_trace_csv(const OptimizationTrace& t, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "iteration,best_loss\n";
  out.precision(17);
  for (std::size_t i = 0; i < t.best_value_per_iteration.size(); ++i) {
    out << i + 1 << ',' << t.best_value_per_iteration[i] << '\n';
  }
}

}  // namespace phishvqc
