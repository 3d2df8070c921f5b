#include "delaygp/config.hpp"
#include "delaygp/csv_io.hpp"
#include "delaygp/errors.hpp"
#include "delaygp/experiments.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace {

enum Exit : int { kOk = 0, kFailure = 1, kConfig = 2, kDivergence = 3, kPrecondition = 4 };

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> reps;
  std::optional<std::string> out;
  std::optional<double> dt;
  bool quiet = false;
};

delaygp::ExperimentConfig resolve(const Overrides& o, std::optional<delaygp::ExperimentKind> kind) {
  delaygp::ExperimentConfig cfg = o.config_path.empty() ? delaygp::ExperimentConfig{} : delaygp::load_config(o.config_path);
  if (kind) cfg.kind = *kind;
  if (o.seed) cfg.seed = *o.seed;
  if (o.reps) cfg.reps = *o.reps;
  if (o.out) cfg.out_dir = *o.out;
  if (o.dt) cfg.dt = *o.dt;
  cfg.validate();
  return cfg;
}

void print_aggregates(const delaygp::ResultTable& table) {
  std::printf("%-10s %14s %6s %14s %14s %14s %10s %10s\n", "series", "sweep", "reps", "mean", "min", "max", "evaluated",
              "selected");
  for (const auto& a : table.aggregate()) {
    std::printf("%-10s %14.6g %6zu %14.6g %14.6g %14.6g %10zu %10zu\n", a.series.c_str(), a.sweep, a.count, a.mean,
                a.min, a.max, a.evaluated, a.selected);
  }
}

int run_experiment(const Overrides& o, delaygp::ExperimentKind kind) {
  const delaygp::ExperimentConfig cfg = resolve(o, kind);
  const std::filesystem::path dir(cfg.out_dir);

  if (kind == delaygp::ExperimentKind::tradeoff) {
    const delaygp::TradeoffReport r = delaygp::run_tradeoff_report(cfg);
    delaygp::write_file((dir / "tradeoff.json").string(), delaygp::tradeoff_to_json(r));
    if (!o.quiet) {
      std::printf("e_bar_1 = %.17g (offline, delta_bar_1 = %.17g)\n", r.e_bar_1, r.delta_bar_1);
      std::printf("e_bar_2 = %.17g (online, delta_bar_2 = %.17g)\n", r.e_bar_2, r.delta_bar_2);
      std::printf("first:  delta_bar_2 >= %.17g ? %s\n", r.first_rhs, r.first_holds ? "yes" : "no");
      std::printf("second: delta_tilde = %.17g >= %.17g ? %s\n", r.delta_tilde, r.second_rhs,
                  r.second_holds ? "yes" : "no");
      std::printf("verdict: %s\n", r.offline_certified ? "offline certified" : "no certificate");
    }
    return kOk;
  }

  delaygp::ExperimentOutput out;
  if (kind == delaygp::ExperimentKind::delay_sweep) out = delaygp::run_delay_sweep(cfg);
  if (kind == delaygp::ExperimentKind::dataset_sweep) out = delaygp::run_dataset_sweep(cfg);
  if (kind == delaygp::ExperimentKind::online_trigger) out = delaygp::run_online_trigger(cfg);

  const auto written = delaygp::write_experiment(cfg.out_dir, out);
  if (kind == delaygp::ExperimentKind::online_trigger) {
    delaygp::write_file((dir / "delta_tilde.csv").string(),
                        delaygp::delta_tilde_csv(delaygp::delta_tilde_rows(out.table, cfg.offline_delay)));
  }
  if (!o.quiet) {
    print_aggregates(out.table);
    std::printf("wrote %zu files to %s\n", written.size() + (kind == delaygp::ExperimentKind::online_trigger ? 1 : 0),
                cfg.out_dir.c_str());
  }
  return kOk;
}

int validate_config(const Overrides& o) {
  const delaygp::ExperimentConfig cfg = resolve(o, std::nullopt);
  delaygp::check_preconditions(cfg);
  if (!o.quiet) std::cout << delaygp::dump_config(cfg);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Delay-aware GP tracking control experiments"};
  app.require_subcommand(1);
  Overrides o;

  auto add_common = [&o](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "master RNG seed");
    sub->add_option("--reps", o.reps, "Monte-Carlo repetitions");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--dt", o.dt, "integration step");
    sub->add_flag("--quiet", o.quiet, "suppress the summary");
  };

  struct Entry {
    const char* name;
    const char* help;
    std::optional<delaygp::ExperimentKind> kind;
  };
  const Entry entries[] = {
      {"delay-sweep", "max tracking error against a constant computation delay", delaygp::ExperimentKind::delay_sweep},
      {"dataset-sweep", "max tracking error against the initial data-set size with delay c N0",
       delaygp::ExperimentKind::dataset_sweep},
      {"online-trigger", "event-triggered online learning with delay c N(t)^2",
       delaygp::ExperimentKind::online_trigger},
      {"tradeoff", "certificate comparing offline and online learning bounds", delaygp::ExperimentKind::tradeoff},
      {"validate-config", "check a configuration and print it with defaults filled in", std::nullopt},
  };
  std::vector<std::pair<CLI::App*, std::optional<delaygp::ExperimentKind>>> subs;
  for (const Entry& e : entries) {
    CLI::App* sub = app.add_subcommand(e.name, e.help);
    add_common(sub);
    subs.emplace_back(sub, e.kind);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    for (const auto& [sub, kind] : subs) {
      if (!sub->parsed()) continue;
      return kind ? run_experiment(o, *kind) : validate_config(o);
    }
  } catch (const delaygp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const delaygp::DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << '\n';
    return kDivergence;
  } catch (const delaygp::PreconditionViolation& e) {
    std::cerr << "precondition violated: " << e.what() << '\n';
    return kPrecondition;
  } catch (const delaygp::InvalidArgument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
