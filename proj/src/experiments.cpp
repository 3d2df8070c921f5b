#include "delaygp/experiments.hpp"

#include "delaygp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <tuple>

namespace delaygp {

namespace {

constexpr std::uint64_t kDataStream = 1;
constexpr std::uint64_t kLoopStream = 2;
constexpr std::uint64_t kDatasetStreamBase = 1000;

const double kNaN = std::numeric_limits<double>::quiet_NaN();

template <class Fn>
void parallel_tasks(std::size_t count, Fn&& fn) {
  std::exception_ptr error;
  const auto n = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < n; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(delaygp_task_error)
      {
        if (!error) error = std::current_exception();
      }
    }
  }
  if (error) std::rethrow_exception(error);
}

void config_check(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

GpModel initial_model(const ExperimentConfig& cfg, const PlantSpec& plant, std::size_t n0, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const TrainingSet data = initial_data(plant, n0, cfg.initial_layout, cfg.noise_std, rng);
  return GpModel::fit(cfg.kernel, plant.domain, data);
}

ResultRecord record_from(const std::string& series, double sweep, int rep, std::uint64_t seed, const SimTrace& tr,
                         double bound) {
  ResultRecord r;
  r.series = series;
  r.sweep = sweep;
  r.rep = rep;
  r.seed = seed;
  r.max_error = tr.max_error();
  r.error_bound = bound;
  r.evaluated = tr.evaluated();
  r.selected = tr.selected();
  return r;
}

struct Setup {
  PlantSpec plant;
  Reference reference;
  ControllerGains gains;
  LoopConfig loop;
  double l_f;
};

Setup make_setup(const ExperimentConfig& cfg) {
  cfg.validate();
  PlantSpec plant = make_plant(cfg);
  Reference ref = make_reference(cfg);
  ControllerGains gains = make_gains(cfg);
  LoopConfig loop = make_loop_config(cfg);
  const double l_f = plant_lipschitz(cfg, plant);
  return {std::move(plant), std::move(ref), std::move(gains), std::move(loop), l_f};
}

ExperimentOutput assemble(std::vector<ResultRecord> records, std::vector<std::optional<NamedTrace>> traces) {
  ExperimentOutput out;
  out.table.records = std::move(records);
  out.table.sort();
  for (auto& t : traces) {
    if (t) out.traces.push_back(std::move(*t));
  }
  std::sort(out.traces.begin(), out.traces.end(), [](const NamedTrace& a, const NamedTrace& b) {
    return std::tie(a.series, a.sweep) < std::tie(b.series, b.sweep);
  });
  return out;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::delay_sweep:
      return "delay-sweep";
    case ExperimentKind::dataset_sweep:
      return "dataset-sweep";
    case ExperimentKind::online_trigger:
      return "online-trigger";
    case ExperimentKind::tradeoff:
      return "tradeoff";
  }
  return "unknown";
}

std::string to_string(InitialLayout layout) { return layout == InitialLayout::grid ? "grid" : "uniform"; }

void ExperimentConfig::validate() const {
  config_check(plant == "sin-sigmoid" || plant == "zero", "plant must be \"sin-sigmoid\" or \"zero\"");
  if (plant == "sin-sigmoid") config_check(order == 2 && dim == 1, "the sin-sigmoid plant has order 2 and dim 1");
  config_check(order >= 1 && dim >= 1, "order and dim must be at least 1");
  config_check(static_cast<int>(gains.size()) == order, "gains needs one entry per derivative order");
  config_check(std::isfinite(reference_amplitude) && std::isfinite(reference_omega), "reference must be finite");
  config_check(kernel.signal_std > 0.0 && kernel.lengthscale > 0.0, "kernel parameters must be positive");
  config_check(noise_std > 0.0 && std::isfinite(noise_std), "noise_std must be positive");
  config_check(n0 >= 1, "n0 must be at least 1");
  for (double d : delays) config_check(d > 0.0 && std::isfinite(d), "delays must be positive");
  for (std::size_t n : n0_sweep) config_check(n >= 1, "n0_sweep entries must be at least 1");
  config_check(delay_per_sample > 0.0 && std::isfinite(delay_per_sample), "delay_per_sample must be positive");
  for (double d : online_delay_bounds) config_check(d > 0.0 && std::isfinite(d), "online delay bounds must be positive");
  config_check(capacity >= 1, "capacity must be at least 1");
  config_check(n0 <= capacity || kind != ExperimentKind::online_trigger, "n0 must not exceed capacity");
  config_check(offline_delay > 0.0 && std::isfinite(offline_delay), "offline_delay must be positive");
  config_check(delta_bar_1 >= 0.0 && delta_bar_1 <= delta_bar_2, "tradeoff needs 0 <= delta_bar_1 <= delta_bar_2");
  config_check(confidence > 0.0 && confidence < 1.0, "confidence must lie in (0, 1)");
  config_check(tau > 0.0 && std::isfinite(tau), "tau must be positive");
  config_check(grid_step > 0.0 && std::isfinite(grid_step), "grid_step must be positive");
  config_check(lipschitz_safety >= 1.0, "lipschitz_safety must be at least 1");
  config_check(horizon >= 0.0 && std::isfinite(horizon), "horizon must be nonnegative");
  config_check(dt > 0.0 && std::isfinite(dt), "dt must be positive");
  config_check(reps >= 1, "reps must be at least 1");
  config_check(!out_dir.empty(), "out_dir must not be empty");
  try {
    ControllerGains g = diagonal_gains(gains, dim);
    if (!is_hurwitz(build_companion(g, order, dim).a)) throw ConfigError("gains do not give a Hurwitz closed loop");
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t rep) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(master), hi(master), lo(stream), hi(stream), lo(rep), hi(rep)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

PlantSpec make_plant(const ExperimentConfig& cfg) {
  return cfg.plant == "zero" ? zero_plant(cfg.order, cfg.dim) : sin_sigmoid_plant();
}

Reference make_reference(const ExperimentConfig& cfg) {
  return sinusoid_reference(cfg.order, cfg.dim, cfg.reference_amplitude, cfg.reference_omega);
}

ControllerGains make_gains(const ExperimentConfig& cfg) { return diagonal_gains(cfg.gains, cfg.dim); }

LoopConfig make_loop_config(const ExperimentConfig& cfg) {
  return LoopConfig{make_plant(cfg), make_reference(cfg),  make_gains(cfg), Vector(),
                    cfg.horizon,      cfg.dt,               Vector::Constant(cfg.dim, cfg.noise_std), 2.0};
}

TrainingSet initial_data(const PlantSpec& plant, std::size_t n0, InitialLayout layout, double noise_std,
                         std::mt19937_64& rng) {
  const std::size_t d = plant.domain.dim();
  TrainingSet ts;
  ts.noise_std = Vector::Constant(plant.dim, noise_std);

  if (layout == InitialLayout::grid) {
    std::size_t k = static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(n0), 1.0 / static_cast<double>(d)) + 1e-9));
    while (std::pow(static_cast<double>(k), static_cast<double>(d)) > static_cast<double>(n0)) --k;
    std::size_t total = 1;
    for (std::size_t j = 0; j < d; ++j) total *= k;
    if (k == 0) total = 0;
    for (std::size_t flat = 0; flat < total; ++flat) {
      Vector x(static_cast<Eigen::Index>(d));
      std::size_t rest = flat;
      for (std::size_t j = 0; j < d; ++j) {
        const std::size_t idx = rest % k;
        rest /= k;
        const Interval& a = plant.domain.axis(j);
        x(static_cast<Eigen::Index>(j)) =
            k == 1 ? 0.5 * (a.lo + a.hi) : a.lo + a.width() * static_cast<double>(idx) / static_cast<double>(k - 1);
      }
      ts.inputs.push_back(x);
    }
  }
  while (ts.inputs.size() < n0) {
    Vector x(static_cast<Eigen::Index>(d));
    for (std::size_t j = 0; j < d; ++j) {
      const Interval& a = plant.domain.axis(j);
      x(static_cast<Eigen::Index>(j)) = std::uniform_real_distribution<double>(a.lo, a.hi)(rng);
    }
    ts.inputs.push_back(x);
  }
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (const Vector& x : ts.inputs) {
    Vector y = plant.f(x);
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += noise_std * gauss(rng);
    ts.targets.push_back(y);
  }
  return ts;
}

double plant_lipschitz(const ExperimentConfig& cfg, const PlantSpec& plant) {
  return estimate_lipschitz_grid(plant.f, static_cast<std::size_t>(plant.dim), plant.domain, cfg.grid_step,
                                 cfg.lipschitz_safety);
}

Certification certify(const ExperimentConfig& cfg, const PlantSpec& plant, const ControllerGains& gains,
                      const GpModel& model, double l_f) {
  Certification c;
  c.l_f = l_f;
  c.system = build_companion(gains, plant.order, plant.dim);
  c.q = gains.q_matrix;
  c.p = solve_lyapunov(c.system.a, c.q);
  EtaBoundOptions opts;
  opts.bound = BoundParams{cfg.confidence, cfg.tau, plant.domain};
  opts.l_f = l_f;
  opts.grid_step = cfg.grid_step;
  opts.safety = cfg.lipschitz_safety;
  c.eta = make_eta_bound(model, opts);
  return c;
}

BoundConstants constants_at(const Certification& cert, const Reference& ref, const BoxDomain& domain,
                            double delta_bar) {
  return bound_constants(cert.system, cert.p, cert.q, cert.l_f, cert.eta, ref, domain, delta_bar);
}

void check_preconditions(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.kind != ExperimentKind::online_trigger && cfg.kind != ExperimentKind::tradeoff) return;
  const PlantSpec plant = make_plant(cfg);
  const double limit = 0.5 / plant_lipschitz(cfg, plant);
  auto require = [limit](double d, const char* what) {
    if (!(d < limit)) {
      std::ostringstream os;
      os << what << " = " << d << " violates the delay bound Delta_bar < 1/(2 L_f) = " << limit;
      throw PreconditionViolation(os.str());
    }
  };
  if (cfg.kind == ExperimentKind::online_trigger) {
    for (double d : cfg.online_delay_bounds) require(d, "online delay bound");
    require(cfg.offline_delay, "offline_delay");
  } else {
    require(cfg.delta_bar_2, "delta_bar_2");
  }
}

void ResultTable::sort() {
  std::stable_sort(records.begin(), records.end(), [](const ResultRecord& a, const ResultRecord& b) {
    return std::tie(a.series, a.sweep, a.rep) < std::tie(b.series, b.sweep, b.rep);
  });
}

std::vector<Aggregate> ResultTable::aggregate() const {
  std::vector<Aggregate> out;
  std::map<std::pair<std::string, double>, std::size_t> index;
  for (const ResultRecord& r : records) {
    const auto key = std::make_pair(r.series, r.sweep);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, out.size()).first;
      Aggregate a;
      a.series = r.series;
      a.sweep = r.sweep;
      a.min = r.max_error;
      a.max = r.max_error;
      out.push_back(a);
    }
    Aggregate& a = out[it->second];
    a.count += 1;
    a.mean += r.max_error;
    a.min = std::min(a.min, r.max_error);
    a.max = std::max(a.max, r.max_error);
    a.evaluated += r.evaluated;
    a.selected += r.selected;
  }
  for (Aggregate& a : out) a.mean /= static_cast<double>(a.count);
  return out;
}

Aggregate ResultTable::find(const std::string& series, double sweep) const {
  for (const Aggregate& a : aggregate()) {
    if (a.series == series && a.sweep == sweep) return a;
  }
  std::ostringstream os;
  os << "no results for series " << series << " at " << sweep;
  throw InvalidArgument(os.str());
}

ExperimentOutput run_delay_sweep(const ExperimentConfig& cfg) {
  const Setup s = make_setup(cfg);
  const auto reps = static_cast<std::size_t>(cfg.reps);
  const double limit = 0.5 / s.l_f;

  std::vector<std::optional<GpModel>> models(reps);
  std::vector<std::optional<Certification>> certs(reps);
  const bool any_certifiable =
      cfg.certify && std::any_of(cfg.delays.begin(), cfg.delays.end(), [limit](double d) { return d < limit; });
  parallel_tasks(reps, [&](std::size_t rep) {
    models[rep] = initial_model(cfg, s.plant, cfg.n0, derive_seed(cfg.seed, kDataStream, rep));
    if (any_certifiable) certs[rep] = certify(cfg, s.plant, s.gains, *models[rep], s.l_f);
  });

  const std::size_t per_rep = cfg.delays.size() + (cfg.baseline ? 1 : 0);
  std::vector<ResultRecord> records(reps * per_rep);
  std::vector<std::optional<NamedTrace>> traces(records.size());
  parallel_tasks(records.size(), [&](std::size_t task) {
    const std::size_t rep = task / per_rep;
    const std::size_t j = task % per_rep;
    const std::uint64_t seed = derive_seed(cfg.seed, kLoopStream, rep);
    const bool is_baseline = j == cfg.delays.size();
    const double delay = is_baseline ? 0.0 : cfg.delays[j];
    const std::string series = is_baseline ? "baseline" : "gp";

    SimTrace tr = is_baseline ? run(s.loop, std::nullopt, DelayModel::constant(1.0), nullptr, seed)
                              : run(s.loop, models[rep], DelayModel::constant(delay), nullptr, seed);
    double bound = kNaN;
    if (!is_baseline && certs[rep] && delay < limit) {
      bound = tracking_bound_offline(constants_at(*certs[rep], s.reference, s.plant.domain, delay));
    }
    records[task] = record_from(series, delay, static_cast<int>(rep), seed, tr, bound);
    if (rep == 0 && cfg.write_traces) traces[task] = NamedTrace{series, delay, std::move(tr)};
  });
  return assemble(std::move(records), std::move(traces));
}

ExperimentOutput run_dataset_sweep(const ExperimentConfig& cfg) {
  const Setup s = make_setup(cfg);
  const auto reps = static_cast<std::size_t>(cfg.reps);
  const double limit = 0.5 / s.l_f;
  const std::size_t sizes = cfg.n0_sweep.size();

  std::vector<ResultRecord> records(reps * sizes);
  std::vector<std::optional<NamedTrace>> traces(records.size());
  parallel_tasks(records.size(), [&](std::size_t task) {
    const std::size_t rep = task / sizes;
    const std::size_t n0 = cfg.n0_sweep[task % sizes];
    const GpModel model = initial_model(cfg, s.plant, n0, derive_seed(cfg.seed, kDatasetStreamBase + n0, rep));
    const double delay = cfg.delay_per_sample * static_cast<double>(n0);
    const std::uint64_t seed = derive_seed(cfg.seed, kLoopStream, rep);
    SimTrace tr = run(s.loop, model, DelayModel::constant(delay), nullptr, seed);

    double bound = kNaN;
    if (cfg.certify && delay < limit) {
      const Certification cert = certify(cfg, s.plant, s.gains, model, s.l_f);
      bound = tracking_bound_offline(constants_at(cert, s.reference, s.plant.domain, delay));
    }
    const auto sweep = static_cast<double>(n0);
    records[task] = record_from("gp", sweep, static_cast<int>(rep), seed, tr, bound);
    if (rep == 0 && cfg.write_traces) traces[task] = NamedTrace{"gp", sweep, std::move(tr)};
  });
  return assemble(std::move(records), std::move(traces));
}

ExperimentOutput run_online_trigger(const ExperimentConfig& cfg) {
  check_preconditions(cfg);
  const Setup s = make_setup(cfg);
  const auto reps = static_cast<std::size_t>(cfg.reps);

  std::vector<std::optional<GpModel>> models(reps);
  std::vector<std::optional<Certification>> certs(reps);
  parallel_tasks(reps, [&](std::size_t rep) {
    models[rep] = initial_model(cfg, s.plant, cfg.n0, derive_seed(cfg.seed, kDataStream, rep));
    certs[rep] = certify(cfg, s.plant, s.gains, *models[rep], s.l_f);
  });

  const std::size_t per_rep = cfg.online_delay_bounds.size() + 1;
  std::vector<ResultRecord> records(reps * per_rep);
  std::vector<std::optional<NamedTrace>> traces(records.size());
  const auto cap2 = static_cast<double>(cfg.capacity) * static_cast<double>(cfg.capacity);
  parallel_tasks(records.size(), [&](std::size_t task) {
    const std::size_t rep = task / per_rep;
    const std::size_t j = task % per_rep;
    const std::uint64_t seed = derive_seed(cfg.seed, kLoopStream, rep);
    const Certification& cert = *certs[rep];

    if (j == cfg.online_delay_bounds.size()) {
      const double delay = cfg.offline_delay;
      SimTrace tr = run(s.loop, models[rep], DelayModel::constant(delay), nullptr, seed);
      const double bound = tracking_bound_offline(constants_at(cert, s.reference, s.plant.domain, delay));
      records[task] = record_from("offline", delay, static_cast<int>(rep), seed, tr, bound);
      if (rep == 0 && cfg.write_traces) traces[task] = NamedTrace{"offline", delay, std::move(tr)};
      return;
    }

    const double delta_bar = cfg.online_delay_bounds[j];
    TriggerPolicy policy;
    policy.bc = constants_at(cert, s.reference, s.plant.domain, delta_bar);
    policy.e_bar = min_error_bound(policy.bc);
    policy.eta = cert.eta;
    policy.deletion = DeletionKind::oldest_first;
    policy.capacity = cfg.capacity;
    SimTrace tr = run(s.loop, models[rep], DelayModel::quadratic(delta_bar / cap2), &policy, seed);
    records[task] = record_from("online", delta_bar, static_cast<int>(rep), seed, tr, policy.e_bar);
    if (rep == 0 && cfg.write_traces) traces[task] = NamedTrace{"online", delta_bar, std::move(tr)};
  });
  return assemble(std::move(records), std::move(traces));
}

std::vector<DeltaTildeRow> delta_tilde_rows(const ResultTable& table, double offline_delay) {
  const Aggregate offline = table.find("offline", offline_delay);
  std::vector<DeltaTildeRow> rows;
  for (const Aggregate& a : table.aggregate()) {
    if (a.series != "online") continue;
    DeltaTildeRow r;
    r.delta_bar = a.sweep;
    r.delta_tilde = a.sweep - offline_delay;
    r.online_mean = a.mean;
    r.offline_mean = offline.mean;
    r.online_min = a.min;
    r.online_max = a.max;
    rows.push_back(r);
  }
  return rows;
}

TradeoffReport run_tradeoff_report(const ExperimentConfig& cfg) {
  check_preconditions(cfg);
  const Setup s = make_setup(cfg);
  const GpModel model = initial_model(cfg, s.plant, cfg.n0, derive_seed(cfg.seed, kDataStream, 0));
  const Certification cert = certify(cfg, s.plant, s.gains, model, s.l_f);
  TradeoffInputs ti;
  ti.delta_bar_1 = cfg.delta_bar_1;
  ti.delta_bar_2 = cfg.delta_bar_2;
  ti.eta_sup = cert.eta.eta_sup;
  ti.eta_inf = cert.eta.eta_inf;
  ti.bc = constants_at(cert, s.reference, s.plant.domain, cfg.delta_bar_2);
  return offline_beats_online(ti);
}

}  // namespace delaygp
