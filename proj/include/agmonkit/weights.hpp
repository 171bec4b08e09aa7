#pragma once

#include <functional>
#include <string>

namespace agmonkit {

enum class WeightFamily { power, exponential, custom };

/// Increasing weight phi >= 1 on [0, inf) with bounded logarithmic
/// derivative M_phi = sup |phi'/phi|.
///
///   power(r):       phi(t) = (1 + t)^r,  M_phi = r   (attained at t = 0)
///   exponential(a): phi(t) = exp(a t),   M_phi = a
///
/// Custom weights bring their own evaluator, derivative and claimed M_phi;
/// the claim is checked on samples when the weight is built.
class Weight {
 public:
  static Weight power(double r);
  static Weight exponential(double a);
  /// Throws if sampled |phi'/phi| exceeds the claimed bound by more than 1e-6
  /// or phi fails to be >= 1 and nondecreasing on the samples.
  static Weight custom(std::string name, std::function<double(double)> phi,
                       std::function<double(double)> dphi, double claimed_m_phi,
                       bool log_derivative_vanishes);

  WeightFamily family() const { return family_; }
  /// r for power, a for exponential, 0 for custom.
  double parameter() const { return param_; }
  std::string describe() const;

  /// Custom weights only: the M_phi supplied by the caller.
  double claimed_log_derivative() const { return claimed_m_; }
  bool claims_vanishing_log_derivative() const { return vanishes_; }

  double operator()(double t) const;
  double derivative(double t) const;

 private:
  WeightFamily family_ = WeightFamily::power;
  double param_ = 1.0;
  std::string name_;
  std::function<double(double)> phi_;
  std::function<double(double)> dphi_;
  double claimed_m_ = 0.0;
  bool vanishes_ = false;
};

struct AdmissibilityFlags {
  bool grows_to_infinity = false;
  bool bounded_log_derivative = false;
  /// phi'(t)/phi(t) -> 0 as t -> infinity.
  bool log_derivative_vanishes = false;
};

/// phi(t); throws for t < 0.
double eval_weight(const Weight& w, double t);
double log_derivative_bound(const Weight& w);
/// max{0, 1 - M_phi^-2}; the (H2) track needs epsilon strictly above this.
double epsilon_threshold(const Weight& w);
AdmissibilityFlags check_admissible(const Weight& w);

/// Smallest t0 with sup_{t > t0} |phi'/phi| <= 1, used to pick the cutoff
/// radius. power(r) -> max(0, r - 1); exponential(a) -> 0 if a <= 1, else
/// infinity.
double unit_log_derivative_onset(const Weight& w);

}  // namespace agmonkit
