#include "delaygp/config.hpp"
#include "delaygp/csv_io.hpp"
#include "delaygp/errors.hpp"
#include "delaygp/experiments.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <set>

using namespace delaygp;

namespace {

ExperimentConfig quick(ExperimentKind kind) {
  ExperimentConfig cfg;
  cfg.kind = kind;
  cfg.horizon = 2.0;
  cfg.reps = 2;
  cfg.n0 = 25;
  cfg.grid_step = 0.1;
  cfg.write_traces = true;
  return cfg;
}

std::filesystem::path scratch(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("delaygp_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("config parsing") {
  const ExperimentConfig cfg = parse_config(R"({"experiment": "online-trigger", "reps": 3, "delays": [1, 0.5],
                                               "initial_layout": "uniform", "lengthscale": 0.3, "seed": 7})");
  CHECK(cfg.kind == ExperimentKind::online_trigger);
  CHECK(cfg.reps == 3);
  CHECK(cfg.delays == std::vector<double>{1.0, 0.5});
  CHECK(cfg.initial_layout == InitialLayout::uniform);
  CHECK(cfg.kernel.lengthscale == 0.3);
  CHECK(cfg.seed == 7);
  CHECK(cfg.n0 == 100);

  CHECK_THROWS_AS(parse_config(R"({"repetitions": 3})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"reps": "three"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"reps": 0})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"dt": true})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"n0": -4})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"gains": [2.0, 1.0]})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"plant": "pendulum"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"experiment": "sweep"})"), ConfigError);
  CHECK_THROWS_AS(parse_config("[1, 2]"), ConfigError);
  CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("config dump round trips") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::dataset_sweep;
  cfg.delay_per_sample = 0.0123456789012345;
  cfg.n0_sweep = {16, 36};
  cfg.seed = 18446744073709551557ull;
  const ExperimentConfig back = parse_config(dump_config(cfg));
  CHECK(dump_config(back) == dump_config(cfg));
  CHECK(back.seed == cfg.seed);
  CHECK(back.delay_per_sample == cfg.delay_per_sample);
}

TEST_CASE("seed derivation") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t rep = 0; rep < 50; ++rep) {
    for (std::uint64_t stream = 0; stream < 4; ++stream) seen.insert(derive_seed(1, stream, rep));
  }
  CHECK(seen.size() == 200);
  CHECK(derive_seed(5, 1, 3) == derive_seed(5, 1, 3));
  CHECK(derive_seed(5, 1, 3) != derive_seed(6, 1, 3));
}

TEST_CASE("initial data layout") {
  const PlantSpec plant = sin_sigmoid_plant();
  std::mt19937_64 rng(1);
  const TrainingSet full = initial_data(plant, 100, InitialLayout::grid, 0.01, rng);
  REQUIRE(full.size() == 100);
  CHECK(full.inputs.front()(0) == -1.5);
  CHECK(full.inputs.front()(1) == -1.5);
  CHECK(full.inputs.back()(0) == 1.5);
  CHECK(full.inputs.back()(1) == 1.5);
  CHECK(full.inputs[1](0) == doctest::Approx(-1.5 + 3.0 / 9.0));

  const TrainingSet partial = initial_data(plant, 10, InitialLayout::grid, 0.01, rng);
  REQUIRE(partial.size() == 10);
  CHECK(partial.inputs[4](0) == 0.0);
  CHECK(partial.inputs[4](1) == 0.0);
  CHECK(plant.domain.contains(partial.inputs[9]));

  double max_noise = 0.0;
  for (std::size_t i = 0; i < full.size(); ++i) {
    max_noise = std::max(max_noise, std::abs(full.targets[i](0) - plant.f(full.inputs[i])(0)));
  }
  CHECK(max_noise > 0.0);
  CHECK(max_noise < 0.06);

  const TrainingSet u = initial_data(plant, 30, InitialLayout::uniform, 0.01, rng);
  for (const Vector& x : u.inputs) CHECK(plant.domain.contains(x));
}

TEST_CASE("aggregates recompute from records") {
  ResultTable t;
  t.records = {{"gp", 0.5, 1, 0, 2.0, 0.0, 0, 0}, {"gp", 0.5, 0, 0, 1.0, 0.0, 3, 1},
               {"baseline", 0.0, 0, 0, 0.4, 0.0, 0, 0}, {"gp", 0.1, 0, 0, 0.2, 0.0, 0, 0}};
  t.sort();
  CHECK(t.records[0].series == "baseline");
  CHECK(t.records[1].sweep == 0.1);
  CHECK(t.records[2].rep == 0);
  const Aggregate a = t.find("gp", 0.5);
  CHECK(a.count == 2);
  CHECK(a.mean == 1.5);
  CHECK(a.min == 1.0);
  CHECK(a.max == 2.0);
  CHECK(a.evaluated == 3);
  CHECK(a.selected == 1);
  CHECK_THROWS_AS(t.find("gp", 7.0), InvalidArgument);
}

TEST_CASE("CSV format") {
  CHECK(format_real(0.1) == "0.10000000000000001");
  CHECK(format_real(std::nan("")) == "nan");
  ResultTable t;
  t.records = {{"gp", 0.1, 0, 12345678901234567890ull, 1.0 / 3.0, std::nan(""), 4, 2}};
  const std::string csv = results_csv(t);
  CHECK(csv.find('\r') == std::string::npos);
  CHECK(csv.substr(0, csv.find('\n')) == "series,sweep,rep,seed,max_error,error_bound,evaluated,selected");
  CHECK(csv.find("0.33333333333333331") != std::string::npos);
  const ResultTable back = parse_results_csv(csv);
  REQUIRE(back.records.size() == 1);
  CHECK(back.records[0].max_error == 1.0 / 3.0);
  CHECK(back.records[0].seed == 12345678901234567890ull);
  CHECK(std::isnan(back.records[0].error_bound));
  CHECK_THROWS_AS(parse_results_csv("bad header\n"), InvalidArgument);
}

TEST_CASE("delay sweep is reproducible and consistent") {
  ExperimentConfig cfg = quick(ExperimentKind::delay_sweep);
  cfg.delays = {0.5, 0.01};
  const ExperimentOutput a = run_delay_sweep(cfg);
  const ExperimentOutput b = run_delay_sweep(cfg);
  CHECK(results_csv(a.table) == results_csv(b.table));
  CHECK(a.table.records.size() == 6);
  CHECK(a.traces.size() == 3);

  const auto dir = scratch("delay");
  const auto files = write_experiment(dir.string(), a);
  CHECK(files.size() == 5);
  const ResultTable reread = parse_results_csv(read_file((dir / "results.csv").string()));
  CHECK(results_csv(reread) == results_csv(a.table));
  std::filesystem::remove_all(dir);

  for (const ResultRecord& r : a.table.records) {
    if (r.series == "baseline") CHECK(std::isnan(r.error_bound));
    if (r.series == "gp" && r.sweep == 0.5) CHECK(std::isnan(r.error_bound));
    if (r.series == "gp" && r.sweep == 0.01) CHECK(r.error_bound > r.max_error);
  }
  CHECK(a.table.find("gp", 0.5).mean > a.table.find("gp", 0.01).mean);
}

TEST_CASE("dataset sweep with negligible delay improves with data") {
  ExperimentConfig cfg = quick(ExperimentKind::dataset_sweep);
  cfg.horizon = 8.0;
  cfg.certify = false;
  cfg.n0_sweep = {9, 36, 100};
  cfg.delay_per_sample = 1e-6;
  const ExperimentOutput out = run_dataset_sweep(cfg);
  const double e9 = out.table.find("gp", 9).mean;
  const double e36 = out.table.find("gp", 36).mean;
  const double e100 = out.table.find("gp", 100).mean;
  CHECK(e36 <= e9);
  CHECK(e100 <= e36);
}

TEST_CASE("online trigger runs") {
  ExperimentConfig cfg = quick(ExperimentKind::online_trigger);
  cfg.online_delay_bounds = {0.05, 0.3};
  cfg.capacity = 40;
  const ExperimentOutput out = run_online_trigger(cfg);
  CHECK(out.table.records.size() == 6);
  for (const ResultRecord& r : out.table.records) {
    CHECK(r.selected <= r.evaluated);
    if (r.series == "online") {
      CHECK(r.evaluated > 0);
      CHECK(r.max_error <= r.error_bound);
    }
  }
  const auto rows = delta_tilde_rows(out.table, cfg.offline_delay);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].delta_tilde == doctest::Approx(0.29));
  CHECK(delta_tilde_csv(rows).find("delta_bar,delta_tilde") == 0);

  cfg.online_delay_bounds = {0.5};
  CHECK_THROWS_AS(run_online_trigger(cfg), PreconditionViolation);
  CHECK_THROWS_AS(check_preconditions(cfg), PreconditionViolation);
}

TEST_CASE("trade-off report") {
  ExperimentConfig cfg = quick(ExperimentKind::tradeoff);
  cfg.delta_bar_1 = 0.01;
  cfg.delta_bar_2 = 0.01;
  const TradeoffReport r = run_tradeoff_report(cfg);
  CHECK(r.offline_certified == (r.e_bar_1 <= r.e_bar_2));
  const TradeoffReport back = tradeoff_from_json(tradeoff_to_json(r));
  CHECK(back.e_bar_1 == r.e_bar_1);
  CHECK(back.e_bar_2 == r.e_bar_2);
  CHECK(back.first_rhs == r.first_rhs);
  CHECK(back.second_rhs == r.second_rhs);
  CHECK(back.eta_tilde == r.eta_tilde);
  CHECK(back.delta_tilde == r.delta_tilde);
  CHECK(back.offline_certified == r.offline_certified);
  CHECK(tradeoff_to_json(back) == tradeoff_to_json(r));
  CHECK_THROWS_AS(tradeoff_from_json("{}"), ConfigError);

  cfg.delta_bar_2 = 0.6;
  CHECK_THROWS_AS(run_tradeoff_report(cfg), PreconditionViolation);
}
