// Acceptance gate. Each criterion is one test; a listener prints a single
// PASS / FAIL / NOT RUN line per criterion after it finishes.
#include <gtest/gtest.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "oracle.hpp"
#include "phishvqc/experiment.hpp"

using namespace phishvqc;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances and limits.
constexpr double kOracleTol = 1e-10;
constexpr double kUnitNormTol = 1e-12;
constexpr double kMetricTol = 1e-12;
constexpr double kQuadraticTol = 1e-2;
constexpr double kRosenbrockMax = 1e-2;
constexpr double kC1Seconds = 10.0;
constexpr double kC3Seconds = 1.0;
constexpr double kC5Seconds = 60.0;
constexpr double kC5Accuracy = 0.90;
constexpr int kC5RequiredSeeds = 4;
constexpr std::size_t kKeptMin = 24, kKeptMax = 40;
constexpr double kC6MacroF1 = 0.80;
constexpr double kC7MacroF1 = 0.78;

std::map<std::string, std::string> g_notes;

void note(const std::string& s) {
  g_notes[::testing::UnitTest::GetInstance()->current_test_info()->name()] = s;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, const char* spec = "%.4g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

class CriterionPrinter : public ::testing::EmptyTestEventListener {
  void OnTestEnd(const ::testing::TestInfo& info) override {
    const auto* r = info.result();
    const char* status = r->Skipped() ? "NOT RUN" : r->Passed() ? "PASS" : "FAIL";
    std::string name = info.name();
    std::printf("ACCEPTANCE %-34s %-7s %s\n", name.c_str(), status, g_notes[name].c_str());
    std::fflush(stdout);
  }
};

// Real-data reproduction shared by criteria 6 and 7.
void reproduce_setup(const char* name, std::size_t train_count, std::size_t test_count,
                     std::size_t reps, double band) {
  const char* data = std::getenv("PHISHVQC_DATA");
  if (!data || !*data || !fs::exists(data)) {
    note("dataset unavailable: set PHISHVQC_DATA to the PhiUSIIL CSV");
    GTEST_SKIP() << "PHISHVQC_DATA not set or file missing";
  }
  log::set_level(log::Level::Quiet);
  std::ostringstream summary;
  bool any_ansatz_ok = false;
  std::size_t kept = 0;
  for (auto family : {AnsatzFamily::RealAmplitudes, AnsatzFamily::EfficientSU2}) {
    bool all_seeds_ok = true;
    summary << to_string(family) << ":";
    for (std::uint64_t seed : {1, 2, 3}) {
      ExperimentConfig c = ExperimentConfig::defaults();
      c.name = name;
      c.dataset_path = data;
      c.train_count = train_count;
      c.test_count = test_count;
      c.reps = reps;
      c.ansatz = family;
      c.seed = seed;
      const auto p = prepare_data(c);
      kept = p.selection.kept.size();
      const auto r = train(p.train, ansatz_for(c, p.train.feature_count()), optimizer_for(c));
      const auto m = evaluate(r.model, p.test);
      summary << " " << fmt(m.macro_f1, "%.3f");
      all_seeds_ok = all_seeds_ok && m.macro_f1 >= band;
    }
    summary << "; ";
    any_ansatz_ok = any_ansatz_ok || all_seeds_ok;
  }
  note("kept " + std::to_string(kept) + " features; macro F1 " + summary.str() + "band >= " +
       fmt(band, "%.2f"));
  EXPECT_GE(kept, kKeptMin);
  EXPECT_LE(kept, kKeptMax);
  EXPECT_TRUE(any_ansatz_ok);
}

}  // namespace

TEST(Acceptance, C1_SimulatorOracleEquivalence) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + trial % 4;
    std::uniform_int_distribution<std::size_t> len(0, 100);
    const auto circuit = oracle::random_circuit(n, len(rng), rng);
    std::vector<oracle::C> start(std::size_t{1} << n, 0.0);
    start[0] = 1.0;
    const auto expected = oracle::simulate(n, circuit.gates(), start);
    const auto got = run_circuit(StateVector(n), circuit);
    for (std::size_t i = 0; i < expected.size(); ++i) worst = std::max(worst, std::abs(got[i] - expected[i]));
  }
  const double secs = seconds_since(t0);
  note("200 circuits, max |diff| " + fmt(worst) + ", " + fmt(secs, "%.2f") + " s");
  EXPECT_LE(worst, kOracleTol);
  EXPECT_LT(secs, kC1Seconds);
}

TEST(Acceptance, C2_AmplitudeEncoding) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> len(1, 64);
  std::uniform_real_distribution<double> val(-10.0, 10.0);
  double worst = 0.0;
  bool padding_ok = true;
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<double> x(len(rng));
    for (auto& v : x) v = val(rng);
    const auto e = amplitude_encode(x);
    worst = std::max(worst, std::abs(e.state.norm_squared() - 1.0));
    for (std::size_t i = x.size(); i < e.padded_length; ++i) padding_ok = padding_ok && e.state[i] == Complex(0.0, 0.0);
  }
  note("10000 vectors, max |norm-1| " + fmt(worst) + ", 32 features -> " +
       std::to_string(required_qubits(32)) + " qubits");
  EXPECT_LE(worst, kUnitNormTol);
  EXPECT_TRUE(padding_ok);
  EXPECT_EQ(required_qubits(32), 5u);
}

TEST(Acceptance, C3_AnsatzParameterCountLaw) {
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t checked = 0;
  for (std::size_t n = 1; n <= 8; ++n) {
    for (std::size_t reps = 1; reps <= 5; ++reps) {
      const std::size_t pairs = n * (n - 1) / 2;
      const AnsatzSpec ra{AnsatzFamily::RealAmplitudes, n, reps};
      const AnsatzSpec su{AnsatzFamily::EfficientSU2, n, reps};
      ASSERT_EQ(parameter_count(ra), (reps + 1) * n);
      ASSERT_EQ(parameter_count(su), (reps + 1) * 2 * n);
      ASSERT_EQ(build_circuit(ra, std::vector<double>(parameter_count(ra), 0.1)).size(),
                (reps + 1) * n + reps * pairs);
      ASSERT_EQ(build_circuit(su, std::vector<double>(parameter_count(su), 0.1)).size(),
                (reps + 1) * 2 * n + reps * pairs);
      checked += 2;
    }
  }
  const double secs = seconds_since(t0);
  note(std::to_string(checked) + " specs, " + fmt(secs * 1000, "%.2f") + " ms");
  EXPECT_LT(secs, kC3Seconds);
}

TEST(Acceptance, C4_OptimizerConvergence) {
  auto quad = [](std::span<const double> x) {
    return (x[0] - 1.0) * (x[0] - 1.0) + (x[1] - 2.0) * (x[1] - 2.0);
  };
  auto rosen = [](std::span<const double> x) {
    const double d = x[1] - x[0] * x[0];
    return (1.0 - x[0]) * (1.0 - x[0]) + 100.0 * (d * d);
  };
  const std::vector<double> origin{0.0, 0.0}, start{-1.2, 1.0};
  const auto q = minimize(quad, origin, OptimizerConfig{});
  OptimizerConfig long_run;
  long_run.max_iterations = 5000;
  const auto r1 = minimize(rosen, start, long_run);
  const auto r2 = minimize(rosen, start, long_run);
  const double qdist = std::hypot(q.final_params[0] - 1.0, q.final_params[1] - 2.0);
  note("quadratic dist " + fmt(qdist) + " in " + std::to_string(q.evaluations_used) +
       " evals; Rosenbrock f " + fmt(r1.final_value) + " in " + std::to_string(r1.evaluations_used) + " evals");
  EXPECT_LE(qdist, kQuadraticTol);
  EXPECT_LE(q.evaluations_used, 300u);
  EXPECT_LT(r1.final_value, kRosenbrockMax);
  EXPECT_LE(r1.evaluations_used, 5000u);
  EXPECT_EQ(r1.best_value_per_iteration, r2.best_value_per_iteration);
  EXPECT_EQ(r1.final_params, r2.final_params);
}

TEST(Acceptance, C5_SyntheticEndToEnd) {
  log::set_level(log::Level::Quiet);
  const auto t0 = std::chrono::steady_clock::now();
  SyntheticSpec s;
  s.rows = 400;
  s.features = 4;
  s.separation = 3.0;
  s.seed = 7;
  const auto data = make_two_gaussians(s);
  int passing = 0;
  std::string accs;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto parts = split(data, SplitSpec{100, 40, seed, true});
    const auto scaler = MinMaxScaler::fit(parts.train);
    const auto train_set = scaler.transform(parts.train);
    const auto test_set = scaler.transform(parts.test);
    const AnsatzSpec spec{AnsatzFamily::RealAmplitudes, required_qubits(4), 2};
    OptimizerConfig cfg;
    cfg.max_iterations = 300;
    cfg.seed = seed;
    const auto r = train(train_set, spec, cfg);
    const double acc = evaluate(r.model, test_set).accuracy();
    accs += (accs.empty() ? "" : " ") + fmt(acc, "%.3f");
    passing += acc >= kC5Accuracy;
  }
  const double secs = seconds_since(t0);
  note("accuracy per seed " + accs + " (" + std::to_string(passing) + "/5 >= 0.90), " +
       fmt(secs, "%.2f") + " s");
  EXPECT_GE(passing, kC5RequiredSeeds);
  EXPECT_LT(secs, kC5Seconds);
}

TEST(Acceptance, C6_ASetupReproduction) { reproduce_setup("ASetup", 640, 160, 3, kC6MacroF1); }

TEST(Acceptance, C7_BSetupReproduction) { reproduce_setup("BSetup", 960, 240, 4, kC7MacroF1); }

TEST(Acceptance, C8_MetricsSuite) {
  // TP=8, FN=1, FP=2, TN=9 with class 1 positive.
  const auto m = metrics_from_confusion({{{9, 2}, {1, 8}}});
  EXPECT_NEAR(m.precision[1], 0.8, kMetricTol);
  EXPECT_NEAR(m.recall[1], 8.0 / 9.0, kMetricTol);
  EXPECT_NEAR(m.f1[1], 16.0 / 19.0, kMetricTol);
  const std::vector<int> truth{0, 0, 0, 0, 0, 1, 1, 1, 1, 1}, all_one(10, 1);
  const auto skew = compute_metrics(truth, all_one);
  EXPECT_NEAR(skew.macro_f1, (0.0 + 2.0 / 3.0) / 2.0, kMetricTol);
  const auto perfect = compute_metrics(truth, truth);
  EXPECT_EQ(perfect.macro_f1, 1.0);

  // Independent recomputation over every confusion matrix with entries <= 5.
  double worst = 0.0;
  for (std::size_t tn = 0; tn <= 5; ++tn)
    for (std::size_t fp = 0; fp <= 5; ++fp)
      for (std::size_t fn = 0; fn <= 5; ++fn)
        for (std::size_t tp = 0; tp <= 5; ++tp) {
          if (tn + fp + fn + tp == 0) continue;
          auto f1 = [](double a, double b, double c) {
            const double p = a + b > 0 ? a / (a + b) : 0.0, r = a + c > 0 ? a / (a + c) : 0.0;
            return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
          };
          const double expected = (f1(tp, fp, fn) + f1(tn, fn, fp)) / 2;
          worst = std::max(worst, std::abs(metrics_from_confusion({{{tn, fp}, {fn, tp}}}).macro_f1 - expected));
        }
  note("hand examples reproduced; macro F1 cross-check max |diff| " + fmt(worst));
  EXPECT_LE(worst, kMetricTol);
}

TEST(Acceptance, C9_DeterminismAndWallTimeScaling) {
  const fs::path root = fs::temp_directory_path() / "phishvqc_acceptance_c9";
  fs::remove_all(root);
  auto run = [&](const std::string& preset, const std::string& out) {
    const std::string cmd = std::string(PHISHVQC_CLI) + " run -q --config " + PHISHVQC_SOURCE_DIR +
                            "/configs/" + preset + " --synthetic --set select_features=false --out-dir " +
                            (root / out).string() + " > " + (root.string() + "_" + out + ".log") + " 2>&1";
    const int status = std::system(cmd.c_str());
    EXPECT_EQ(status, 0) << cmd;
    return read_json(root / out / "report.json");
  };
  Json a1 = run("asetup.cfg", "a1"), a2 = run("asetup.cfg", "a2"), b = run("bsetup.cfg", "b");
  const double wa = a1["wall_time_seconds"].get<double>(), wb = b["wall_time_seconds"].get<double>();
  a1.erase("wall_time_seconds");
  a2.erase("wall_time_seconds");
  const bool identical = a1.dump() == a2.dump();
  note(std::string("reports ") + (identical ? "identical" : "DIFFER") + " modulo wall time; wall time A " +
       fmt(wa, "%.3f") + " s, B " + fmt(wb, "%.3f") + " s (synthetic 32 features)");
  EXPECT_TRUE(identical);
  EXPECT_GT(wa, 0.0);
  EXPECT_GT(wb, wa);
  fs::remove_all(root);
}

int main(int argc, char** argv) {
  ::testing::InitGoogleTest(&argc, argv);
  ::testing::UnitTest::GetInstance()->listeners().Append(new CriterionPrinter);
  return RUN_ALL_TESTS();
}
