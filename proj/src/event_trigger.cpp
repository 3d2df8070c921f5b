#include "delaygp/event_trigger.hpp"

#include "delaygp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace delaygp {

double min_error_bound(const BoundConstants& bc) {
  if (!(bc.delta_bar < bc.delay_limit())) {
    throw PreconditionViolation("delay bound violates delta_bar < 1/(2 L_f)");
  }
  const double f = bc.f_const;
  return 2.0 * bc.chi * (f + bc.f_d + bc.xi * bc.l_f * f) * bc.delta_bar + bc.chi * bc.xi * bc.eta_inf;
}

void TriggerPolicy::validate() const {
  if (capacity == 0) throw InvalidArgument("trigger capacity must be at least 1");
  if (deletion == DeletionKind::custom && !custom) throw InvalidArgument("custom deletion needs a strategy");
  const double minimal = min_error_bound(bc);
  if (e_bar < minimal * (1.0 - 1e-12)) {
    std::ostringstream os;
    os << "tracking bound " << e_bar << " is below the minimal admissible bound " << minimal;
    throw PreconditionViolation(os.str());
  }
}

double threshold(double e_norm, const TriggerPolicy& policy) {
  const BoundConstants& bc = policy.bc;
  const double f = bc.f_const;
  return std::max(e_norm, policy.e_bar / bc.chi) / bc.xi -
         2.0 * ((f + bc.f_d) / bc.xi + bc.l_f * f) * bc.delta_bar;
}

void apply_deletion(GpModel& model, const TriggerPolicy& policy) {
  if (policy.deletion == DeletionKind::none) return;
  while (model.size() > 0 && model.size() >= policy.capacity) {
    const std::size_t index = policy.deletion == DeletionKind::oldest_first ? 0 : policy.custom(model);
    model.delete_sample(index);
  }
}

void TradeoffInputs::validate() const {
  if (!(delta_bar_1 >= 0.0) || !(delta_bar_1 <= delta_bar_2)) {
    throw PreconditionViolation("tradeoff needs 0 <= delta_bar_1 <= delta_bar_2");
  }
  if (!(delta_bar_2 < bc.delay_limit())) {
    std::ostringstream os;
    os << "online delay bound " << delta_bar_2 << " violates delta_bar_2 < 1/(2 L_f) = " << bc.delay_limit();
    throw PreconditionViolation(os.str());
  }
  if (!(eta_inf >= 0.0) || !(eta_sup >= 0.0)) throw InvalidArgument("eta bounds must be nonnegative");
}

TradeoffReport offline_beats_online(const TradeoffInputs& ti) {
  ti.validate();
  BoundConstants offline = ti.bc.with_delay(ti.delta_bar_1);
  offline.eta_sup = ti.eta_sup;
  BoundConstants online = ti.bc.with_delay(ti.delta_bar_2);
  online.eta_inf = ti.eta_inf;

  TradeoffReport r;
  r.delta_bar_1 = ti.delta_bar_1;
  r.delta_bar_2 = ti.delta_bar_2;
  r.delta_tilde = ti.delta_bar_2 - ti.delta_bar_1;
  r.eta_tilde = ti.eta_sup - ti.eta_inf;
  r.e_bar_1 = tracking_bound_offline(offline);
  r.e_bar_2 = min_error_bound(online);

  const double f = online.f_const;
  const double drift = f + online.f_d;
  r.first_rhs = online.xi * r.eta_tilde / (2.0 * drift);
  r.first_holds = ti.delta_bar_2 >= r.first_rhs;
  r.second_rhs = (online.xi * r.eta_tilde - 2.0 * drift * ti.delta_bar_1) / (2.0 * (online.xi * online.l_f * f + drift));
  r.second_holds = r.delta_tilde >= r.second_rhs;
  r.offline_certified = r.first_holds || r.second_holds;
  return r;
}

}  // namespace delaygp
