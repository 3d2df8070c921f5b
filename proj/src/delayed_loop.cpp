#include "delaygp/delayed_loop.hpp"

#include "delaygp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace delaygp {

double DelayModel::evaluate(std::size_t data_size) const {
  const auto n = static_cast<double>(data_size);
  double d = coefficient;
  if (kind == DelayKind::linear) d = coefficient * n;
  if (kind == DelayKind::quadratic) d = coefficient * n * n;
  if (cap) d = std::min(d, *cap);
  if (!(d > 0.0) || !std::isfinite(d)) {
    std::ostringstream os;
    os << "delay model yields non-positive delay " << d << " at data-set size " << data_size;
    throw InvalidArgument(os.str());
  }
  return d;
}

double DelayModel::bound(std::size_t max_size) const {
  const auto n = static_cast<double>(max_size);
  double d = coefficient;
  if (kind == DelayKind::linear) d = coefficient * n;
  if (kind == DelayKind::quadratic) d = coefficient * n * n;
  if (cap) d = std::min(d, *cap);
  return d;
}

double DelaySchedule::advance(double delta) {
  times_.push_back(times_.back() + delta);
  return times_.back();
}

std::optional<std::size_t> DelaySchedule::kappa(double t) const {
  const auto first_not_before = std::lower_bound(times_.begin(), times_.end(), t);
  const auto strictly_before = static_cast<std::size_t>(first_not_before - times_.begin());
  if (strictly_before < 2) return std::nullopt;
  return strictly_before - 2;
}

std::optional<std::size_t> kappa(const DelaySchedule& schedule, double t) { return schedule.kappa(t); }

double SimTrace::max_error() const {
  double m = 0.0;
  for (double e : error_norm) m = std::max(m, e);
  return m;
}

std::size_t SimTrace::selected() const {
  return static_cast<std::size_t>(std::count_if(triggers.begin(), triggers.end(), [](const TriggerEvent& e) { return e.added; }));
}

void LoopConfig::validate() const {
  plant.validate();
  gains.validate(plant.order, plant.dim);
  if (reference.order() != plant.order || reference.dim() != plant.dim) {
    throw InvalidArgument("reference shape does not match the plant");
  }
  if (!(dt > 0.0)) throw InvalidArgument("integration step must be positive");
  if (!(horizon >= 0.0)) throw InvalidArgument("horizon must be nonnegative");
  if (initial_state.size() != 0 && initial_state.size() != plant.state_dim()) {
    throw InvalidArgument("initial state has wrong dimension");
  }
  if (noise_std.size() != 0 && noise_std.size() != plant.dim) throw InvalidArgument("noise_std must have n entries");
  if (!(guard_factor >= 1.0)) throw InvalidArgument("guard factor must be at least 1");
}

Vector rk4_step(const Vector& x, double t, double h, const Vector& f_hat, const PlantSpec& plant,
                const Reference& ref, const ControllerGains& gains) {
  const Vector k1 = closed_loop_rhs(t, x, f_hat, plant, ref, gains);
  const Vector k2 = closed_loop_rhs(t + 0.5 * h, x + 0.5 * h * k1, f_hat, plant, ref, gains);
  const Vector k3 = closed_loop_rhs(t + 0.5 * h, x + 0.5 * h * k2, f_hat, plant, ref, gains);
  const Vector k4 = closed_loop_rhs(t + h, x + h * k3, f_hat, plant, ref, gains);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Vector step(const Vector& x, double t, double h, const Vector& f_hat, const PlantSpec& plant, const Reference& ref,
            const ControllerGains& gains, const BoxDomain& guard) {
  if (!(h > 0.0)) throw InvalidArgument("step size must be positive");
  Vector next = rk4_step(x, t, h, f_hat, plant, ref, gains);
  if (!guard.contains(next, 0.0)) {
    std::ostringstream os;
    os << "state left the guard box at t = " << t + h;
    throw DivergenceError(os.str());
  }
  return next;
}

namespace {

struct Recorder {
  SimTrace& trace;
  const Reference& ref;

  void operator()(double t, const Vector& x, const Vector& f_hat, std::size_t n) {
    const Vector xd = ref.state(t);
    trace.time.push_back(t);
    trace.state.push_back(x);
    trace.reference.push_back(xd);
    trace.error_norm.push_back((x - xd).norm());
    trace.compensation.push_back(f_hat);
    trace.data_size.push_back(n);
  }
};

bool reaches(double target, double t) {
  return std::isfinite(target) && target - t <= 1e-10 * std::max(1.0, std::abs(target));
}

}  // namespace

SimTrace run(const LoopConfig& config, std::optional<GpModel> model, const DelayModel& delay,
             const TriggerPolicy* trigger, std::uint64_t seed) {
  config.validate();
  const PlantSpec& plant = config.plant;
  const Reference& ref = config.reference;
  const Eigen::Index n = plant.dim;

  if (model && (static_cast<int>(model->input_dim()) != plant.state_dim() || model->output_dim() != static_cast<std::size_t>(n))) {
    throw InvalidArgument("model shape does not match the plant");
  }
  if (trigger) {
    if (!model) throw InvalidArgument("event trigger requires a GP model");
    trigger->validate();
    if (config.noise_std.size() != n) throw InvalidArgument("event trigger requires measurement noise levels");
    const double realized = delay.bound(trigger->capacity);
    if (realized > trigger->bc.delta_bar * (1.0 + 1e-12)) {
      std::ostringstream os;
      os << "delay model bound " << realized << " exceeds the certified delta_bar " << trigger->bc.delta_bar;
      throw PreconditionViolation(os.str());
    }
  }

  const BoxDomain guard = plant.domain.scaled(config.guard_factor);
  Vector x = config.initial_state.size() != 0 ? config.initial_state : ref.state(0.0);
  if (!guard.contains(x, 0.0)) throw DivergenceError("initial state lies outside the guard box");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  SimTrace trace;
  Recorder record{trace, ref};
  Vector f_hat = Vector::Zero(n);
  std::optional<Vector> pending;
  DelaySchedule schedule;
  double next_eval = model ? 0.0 : std::numeric_limits<double>::infinity();
  double t = 0.0;
  const double horizon = config.horizon;
  record(t, x, f_hat, model ? model->size() : 0);

  while (t < horizon) {
    if (model && t >= next_eval) {
      if (pending) f_hat = *pending;

      ScheduleEvent ev;
      ev.start = t;
      ev.sample_index = trace.time.size() - 1;
      if (trigger) {
        TriggerEvent te;
        te.time = t;
        te.eta_norm = eta_at(*model, x, trigger->eta);
        te.upsilon = threshold((x - ref.state(t)).norm(), *trigger);
        te.fired = should_update(te.eta_norm, te.upsilon);
        if (te.fired && model->domain().contains(x)) {
          Vector y = plant.f(x);
          for (Eigen::Index i = 0; i < n; ++i) y(i) += config.noise_std(i) * gauss(rng);
          apply_deletion(*model, *trigger);
          model->add_sample(x, y);
          te.added = true;
        }
        trace.triggers.push_back(te);
      }
      ev.prediction = model->mean(x);
      pending = ev.prediction;
      ev.commit = schedule.advance(delay.evaluate(model->size()));
      next_eval = ev.commit;
      trace.schedule.push_back(std::move(ev));
    }

    double target = t + config.dt;
    if (reaches(next_eval, target)) target = next_eval;
    if (reaches(horizon, target)) target = std::min(horizon, target);
    x = step(x, t, target - t, f_hat, plant, ref, config.gains, guard);
    t = target;
    record(t, x, f_hat, model ? model->size() : 0);
  }
  return trace;
}

}  // namespace delaygp
