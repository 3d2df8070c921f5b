#pragma once

#include "delaygp/error_bound.hpp"
#include "delaygp/types.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace delaygp {

/// m-th order plant in controllable canonical form,
///   q1' = q2, ..., q_{m-1}' = q_m, q_m' = f(x) + u,   x = [q1; ...; q_m] in R^{mn}.
struct PlantSpec {
  int order = 2;  // m
  int dim = 1;    // n
  VectorField f;  // true nonlinearity, only used for simulation and oracle checks
  BoxDomain domain;

  int state_dim() const { return order * dim; }
  void validate() const;
};

/// f(x) = sin(x1) + 0.5 / (1 + exp(x2 / 10)) on [-1.5, 1.5]^2.
PlantSpec sin_sigmoid_plant();

/// f(x) = 0 on [-1.5, 1.5]^{mn}; a linear test plant.
PlantSpec zero_plant(int order = 2, int dim = 1);

struct ReferenceBounds {
  double state_sup = 0.0;        // sup ||x_d(t)||
  double feedforward_sup = 0.0;  // sup ||q'_{d,m}(t)|| = sup ||q_{d,m+1}(t)||
  double derivative_sup = 0.0;   // F_d >= sup ||x_d'(t)||
};

/// Reference x_d = [q_{d,1}; ...; q_{d,m}] with q'_{d,i} = q_{d,i+1}.
///
/// The callable returns all m + 1 blocks stacked, i.e. a vector of size
/// (m + 1) n. The chain relation is checked by central differences at
/// construction. Bounds are taken from `declared` when given, otherwise
/// estimated on a time grid over [0, horizon].
class Reference {
 public:
  using Blocks = std::function<Vector(double)>;

  Reference(int order, int dim, Blocks blocks, std::optional<ReferenceBounds> declared, double horizon = 20.0);

  Vector blocks(double t) const { return blocks_(t); }
  Vector state(double t) const;        // x_d(t)
  Vector feedforward(double t) const;  // q'_{d,m}(t)
  Vector derivative(double t) const;   // x_d'(t)
  const ReferenceBounds& bounds() const { return bounds_; }
  int order() const { return order_; }
  int dim() const { return dim_; }

 private:
  int order_;
  int dim_;
  Blocks blocks_;
  ReferenceBounds bounds_;
};

/// q_{d,i}(t) = a w^{i-1} sin(w t + (i-1) pi / 2) in every output component,
/// with bounds in closed form. For m = 2, a = w = 1 this is x_d = [sin t; cos t].
Reference sinusoid_reference(int order, int dim, double amplitude, double omega);

struct ControllerGains {
  std::vector<Matrix> lambdas;  // m blocks, each n x n
  Matrix q_matrix;              // mn x mn, symmetric positive definite

  void validate(int order, int dim) const;
};

/// Scalar gains lambda_i * I_n with Q = I.
ControllerGains diagonal_gains(const std::vector<double>& lambdas, int dim);

struct Companion {
  Matrix a;  // mn x mn
  Matrix b;  // mn x n
};

/// A = [0 I; Lambda_1 ... Lambda_m], B = [0; I_n].
Companion build_companion(const ControllerGains& gains, int order, int dim);

double spectral_norm(const Matrix& m);
bool is_hurwitz(const Matrix& a);

/// Solves A^T P + P A = -Q. Throws NoSolution (with the offending eigenvalues)
/// if A is not Hurwitz, InvalidArgument if Q is not symmetric or shapes differ.
Matrix solve_lyapunov(const Matrix& a, const Matrix& q);

/// Constants of the delay-aware tracking bounds.
struct BoundConstants {
  Matrix p_matrix;
  double xi = 0.0;   // 2 ||P|| ||Q^{-1}||
  double chi = 0.0;  // sqrt(||P^{-1}|| ||P||)
  double f_numerator = 0.0;  // ||A|| sup||x|| + ||[L_1..L_m]|| sup||x_d|| + sup||q'_{d,m}|| + eta_sup
  double f_const = 0.0;      // f_numerator / (1 - 2 L_f delta_bar)
  double f_d = 0.0;
  double l_f = 0.0;
  double eta_sup = 0.0;
  double eta_inf = 0.0;
  double delta_bar = 0.0;

  /// 1 / (2 L_f), the exclusive upper limit on delta_bar.
  double delay_limit() const;

  /// Same constants re-evaluated at another delay bound.
  /// Throws PreconditionViolation if delta_bar >= 1 / (2 L_f).
  BoundConstants with_delay(double delta_bar) const;
};

/// Throws NoSolution for non-Hurwitz A and PreconditionViolation if the
/// delay bound violates delta_bar < 1 / (2 L_f).
BoundConstants bound_constants(const Companion& sys, const Matrix& p, const Matrix& q, double l_f, const EtaBound& eta,
                               const Reference& ref, const BoxDomain& domain, double delta_bar);

/// chi xi (2 L_f F delta_bar + eta_sup).
double tracking_bound_offline(const BoundConstants& bc);

/// u = q'_{d,m}(t) - f_hat + sum_i Lambda_i e_i(t).
Vector control_input(double t, const Vector& x, const Reference& ref, const Vector& f_hat,
                     const ControllerGains& gains);

/// Closed-loop state derivative with the compensation held at `f_hat`.
Vector closed_loop_rhs(double t, const Vector& x, const Vector& f_hat, const PlantSpec& plant, const Reference& ref,
                       const ControllerGains& gains);

}  // namespace delaygp
