#pragma once

// Event-triggered model updates under computational delay: trigger threshold,
// minimal admissible tracking bound, data deletion and the certificate that
// an offline model already beats online learning.

#include "delaygp/error_bound.hpp"
#include "delaygp/gp_regression.hpp"
#include "delaygp/plant_control.hpp"

#include <cstddef>
#include <functional>
#include <string>

namespace delaygp {

enum class DeletionKind { oldest_first, none, custom };

/// Picks the index of the sample to evict from a full model.
using DeletionStrategy = std::function<std::size_t(const GpModel&)>;

struct TriggerPolicy {
  double e_bar = 0.0;
  BoundConstants bc;
  EtaBound eta;  // beta and gamma used to evaluate ||eta(x)|| online
  DeletionKind deletion = DeletionKind::oldest_first;
  DeletionStrategy custom;  // used when deletion == custom
  std::size_t capacity = 200;

  /// Throws PreconditionViolation unless e_bar >= min_error_bound(bc) and
  /// the delay bound is admissible; InvalidArgument for capacity 0 or a
  /// missing custom strategy.
  void validate() const;
};

/// 2 chi (F + F_d + xi L_f F) delta_bar + chi xi eta_inf.
double min_error_bound(const BoundConstants& bc);

/// xi^{-1} max(||e(t_k)||, chi^{-1} e_bar) - 2 (xi^{-1} (F + F_d) + L_f F) delta_bar.
/// May be nonpositive, in which case every cycle triggers.
double threshold(double e_norm, const TriggerPolicy& policy);

inline bool should_update(double eta_norm, double upsilon) { return upsilon <= 0.0 || eta_norm >= upsilon; }

/// Evicts samples until size() <= capacity - 1 so the next sample fits.
/// Identity when the model is below capacity or deletion == none.
void apply_deletion(GpModel& model, const TriggerPolicy& policy);

struct TradeoffInputs {
  double delta_bar_1 = 0.0;  // offline model delay bound
  double delta_bar_2 = 0.0;  // online learning delay bound
  double eta_sup = 0.0;
  double eta_inf = 0.0;
  BoundConstants bc;

  /// Throws PreconditionViolation unless delta_bar_1 <= delta_bar_2 < 1 / (2 L_f).
  void validate() const;
};

struct TradeoffReport {
  double delta_bar_1 = 0.0;
  double delta_bar_2 = 0.0;
  double delta_tilde = 0.0;
  double eta_tilde = 0.0;
  double e_bar_1 = 0.0;  // offline bound at delta_bar_1
  double e_bar_2 = 0.0;  // minimal online bound at delta_bar_2
  // first disjunct: delta_bar_2 >= first_rhs
  double first_rhs = 0.0;
  bool first_holds = false;
  // second disjunct: delta_tilde >= second_rhs
  double second_rhs = 0.0;
  bool second_holds = false;
  bool offline_certified = false;
};

/// Evaluates both disjuncts with F taken at delta_bar_2; e_bar_1 uses F at
/// delta_bar_1. Certification implies e_bar_1 <= e_bar_2.
TradeoffReport offline_beats_online(const TradeoffInputs& ti);

}  // namespace delaygp
