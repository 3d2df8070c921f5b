#pragma once

// Monte-Carlo harness for the delay sweep, the data-set-size sweep, the
// event-triggered online learning runs and the offline-vs-online report.

#include "delaygp/delayed_loop.hpp"
#include "delaygp/error_bound.hpp"
#include "delaygp/event_trigger.hpp"
#include "delaygp/gp_regression.hpp"
#include "delaygp/plant_control.hpp"

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace delaygp {

enum class ExperimentKind { delay_sweep, dataset_sweep, online_trigger, tradeoff };
enum class InitialLayout { grid, uniform };

std::string to_string(ExperimentKind kind);
std::string to_string(InitialLayout layout);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::delay_sweep;

  std::string plant = "sin-sigmoid";  // or "zero"
  int order = 2;                      // only used by the zero plant
  int dim = 1;
  double reference_amplitude = 1.0;
  double reference_omega = 1.0;
  std::vector<double> gains{-2.0, -2.0};

  KernelParams kernel;
  double noise_std = 0.01;
  InitialLayout initial_layout = InitialLayout::grid;
  std::size_t n0 = 100;

  std::vector<double> delays{2.0, 0.5, 0.1, 0.01, 0.001};
  bool baseline = true;

  std::vector<std::size_t> n0_sweep{10, 20, 30, 40, 50, 60, 70, 80, 90, 100,
                                    110, 120, 130, 140, 150, 160, 170, 180, 190, 200};
  double delay_per_sample = 0.05;  // Delta = c N0 in the data-set sweep

  std::vector<double> online_delay_bounds{0.01, 0.1, 0.45};  // Delta(t) = (bound / capacity^2) N(t)^2
  std::size_t capacity = 200;
  double offline_delay = 0.01;

  double delta_bar_1 = 0.01;
  double delta_bar_2 = 0.01;

  double confidence = 0.01;  // delta of the uniform error bound
  double tau = 1e-3;
  double grid_step = 0.02;   // grid for Lipschitz constants and eta extrema
  double lipschitz_safety = 1.1;
  bool certify = true;       // compute error bounds where admissible

  double horizon = 20.0;
  double dt = 1e-3;
  int reps = 10;
  std::uint64_t seed = 1;
  std::string out_dir = "results";
  bool write_traces = true;

  /// Throws ConfigError on any inconsistent or out-of-range value.
  void validate() const;
};

/// Independent stream for (master seed, purpose, repetition).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t rep);

PlantSpec make_plant(const ExperimentConfig& cfg);
Reference make_reference(const ExperimentConfig& cfg);
ControllerGains make_gains(const ExperimentConfig& cfg);
LoopConfig make_loop_config(const ExperimentConfig& cfg);

/// Grid layout: the largest k^d <= N0 evenly spaced points (endpoints
/// included), the remainder uniform at random. Targets are f(x) plus
/// Gaussian noise.
TrainingSet initial_data(const PlantSpec& plant, std::size_t n0, InitialLayout layout, double noise_std,
                         std::mt19937_64& rng);

/// Everything needed to evaluate the bound constants of one model at any delay.
struct Certification {
  double l_f = 0.0;
  Companion system;
  Matrix p;
  Matrix q;
  EtaBound eta;
};

Certification certify(const ExperimentConfig& cfg, const PlantSpec& plant, const ControllerGains& gains,
                      const GpModel& model, double l_f);
BoundConstants constants_at(const Certification& cert, const Reference& ref, const BoxDomain& domain,
                            double delta_bar);

/// L_f of the configured plant on its domain.
double plant_lipschitz(const ExperimentConfig& cfg, const PlantSpec& plant);

/// Throws PreconditionViolation when a bound-certified mode requests
/// Delta_bar >= 1 / (2 L_f).
void check_preconditions(const ExperimentConfig& cfg);

struct ResultRecord {
  std::string series;
  double sweep = 0.0;
  int rep = 0;
  std::uint64_t seed = 0;
  double max_error = 0.0;
  double error_bound = 0.0;  // NaN when no bound is certified
  std::size_t evaluated = 0;
  std::size_t selected = 0;
};

struct Aggregate {
  std::string series;
  double sweep = 0.0;
  std::size_t count = 0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t evaluated = 0;  // totals over repetitions
  std::size_t selected = 0;
};

struct ResultTable {
  std::vector<ResultRecord> records;

  /// Orders records by (series, sweep, rep).
  void sort();
  /// One row per (series, sweep), in the same order as the sorted records.
  std::vector<Aggregate> aggregate() const;
  /// Aggregate row for the given key; throws InvalidArgument if absent.
  Aggregate find(const std::string& series, double sweep) const;
};

struct NamedTrace {
  std::string series;
  double sweep = 0.0;
  SimTrace trace;
};

struct ExperimentOutput {
  ResultTable table;
  std::vector<NamedTrace> traces;  // repetition 0 only, when enabled
};

ExperimentOutput run_delay_sweep(const ExperimentConfig& cfg);
ExperimentOutput run_dataset_sweep(const ExperimentConfig& cfg);
ExperimentOutput run_online_trigger(const ExperimentConfig& cfg);

struct DeltaTildeRow {
  double delta_bar = 0.0;
  double delta_tilde = 0.0;
  double online_mean = 0.0;
  double offline_mean = 0.0;
  double online_min = 0.0;
  double online_max = 0.0;
};

/// Online max error against Delta_tilde = Delta_bar - offline delay.
std::vector<DeltaTildeRow> delta_tilde_rows(const ResultTable& table, double offline_delay);

/// Certificate for the configured Delta_bar_1, Delta_bar_2 using the
/// repetition-0 initial model for the error-bound extrema.
TradeoffReport run_tradeoff_report(const ExperimentConfig& cfg);

}  // namespace delaygp
