#pragma once

// Fixed-step closed-loop simulation with zero-order-hold, delayed GP
// compensation. Model evaluations start back to back at t_0 = 0,
// t_{k+1} = t_k + Delta(t_k); the result computed from x(t_k) becomes the
// active compensation once t > t_{k+1}.

#include "delaygp/event_trigger.hpp"
#include "delaygp/gp_regression.hpp"
#include "delaygp/plant_control.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace delaygp {

enum class DelayKind { constant, linear, quadratic };

/// Simulated computation time as a function of the data-set size N:
/// constant c, c N or c N^2, optionally capped.
struct DelayModel {
  DelayKind kind = DelayKind::constant;
  double coefficient = 0.0;
  std::optional<double> cap;

  static DelayModel constant(double delay) { return {DelayKind::constant, delay, std::nullopt}; }
  static DelayModel linear(double c) { return {DelayKind::linear, c, std::nullopt}; }
  static DelayModel quadratic(double c, std::optional<double> cap = std::nullopt) {
    return {DelayKind::quadratic, c, cap};
  }

  /// Throws InvalidArgument if the delay would not be positive and finite.
  double evaluate(std::size_t data_size) const;

  /// Delta_bar for data sets no larger than `max_size`.
  double bound(std::size_t max_size) const;
};

class DelaySchedule {
 public:
  DelaySchedule() : times_{0.0} {}

  /// Appends t_{k+1} = t_k + delta and returns it.
  double advance(double delta);

  const std::vector<double>& times() const { return times_; }

  /// kappa(t) = max { k : t_{k+1} < t }; empty while t <= t_1 (no commit yet).
  /// Exact only for t up to the last appended time.
  std::optional<std::size_t> kappa(double t) const;

 private:
  std::vector<double> times_;
};

/// Free function form for schedules with a known delay sequence.
std::optional<std::size_t> kappa(const DelaySchedule& schedule, double t);

struct ScheduleEvent {
  double start = 0.0;   // t_k, when x(t_k) is read
  double commit = 0.0;  // t_{k+1}, when the prediction becomes available
  std::size_t sample_index = 0;  // trace index holding x(t_k)
  Vector prediction;
};

struct TriggerEvent {
  double time = 0.0;
  double eta_norm = 0.0;
  double upsilon = 0.0;
  bool fired = false;
  bool added = false;  // false when fired but x(t_k) was outside the GP domain
};

struct SimTrace {
  std::vector<double> time;
  std::vector<Vector> state;
  std::vector<Vector> reference;
  std::vector<double> error_norm;
  std::vector<Vector> compensation;  // value held on (time[i-1], time[i]]
  std::vector<std::size_t> data_size;
  std::vector<ScheduleEvent> schedule;
  std::vector<TriggerEvent> triggers;

  double max_error() const;
  std::size_t evaluated() const { return triggers.size(); }
  std::size_t selected() const;
};

struct LoopConfig {
  PlantSpec plant;
  Reference reference;
  ControllerGains gains;
  Vector initial_state;  // empty means x_d(0)
  double horizon = 20.0;
  double dt = 1e-3;
  Vector noise_std;  // measurement noise of the highest derivative
  double guard_factor = 2.0;

  void validate() const;
};

/// One classical RK4 step of the closed loop with f_hat held constant.
Vector rk4_step(const Vector& x, double t, double h, const Vector& f_hat, const PlantSpec& plant,
                const Reference& ref, const ControllerGains& gains);

/// Advances x by `h` and throws DivergenceError if the result leaves `guard`.
Vector step(const Vector& x, double t, double h, const Vector& f_hat, const PlantSpec& plant, const Reference& ref,
            const ControllerGains& gains, const BoxDomain& guard);

/// Simulates the loop over [0, horizon].
///
/// Without a model the compensation is identically zero (the baseline
/// controller) and no schedule is run. With a trigger policy, each cycle at
/// t_k evaluates ||eta(x(t_k))|| against the threshold and, when it fires,
/// measures f(x(t_k)) plus Gaussian noise, applies the deletion strategy and
/// adds the sample before predicting. The delay of the cycle is charged with
/// the data-set size after the update. Deterministic for a given seed.
SimTrace run(const LoopConfig& config, std::optional<GpModel> model, const DelayModel& delay,
             const TriggerPolicy* trigger, std::uint64_t seed);

}  // namespace delaygp
