#include "agmonkit/weights.hpp"

#include <cmath>
#include <limits>

#include "agmonkit/error.hpp"
#include "agmonkit/field_io.hpp"

namespace agmonkit {
namespace {

constexpr double kCustomTolerance = 1e-6;

// Log-spaced samples of [0, 1e3] plus zero.
template <typename F>
void for_each_sample(F&& f) {
  f(0.0);
  for (int k = 0; k <= 4000; ++k) f(std::pow(10.0, -4.0 + 7.0 * k / 4000.0));
}

}  // namespace

Weight Weight::power(double r) {
  if (!(r > 0.0) || !std::isfinite(r)) throw InvalidArgument("power weight needs r > 0");
  Weight w;
  w.family_ = WeightFamily::power;
  w.param_ = r;
  return w;
}

Weight Weight::exponential(double a) {
  if (!(a > 0.0) || !std::isfinite(a)) throw InvalidArgument("exponential weight needs a > 0");
  Weight w;
  w.family_ = WeightFamily::exponential;
  w.param_ = a;
  return w;
}

Weight Weight::custom(std::string name, std::function<double(double)> phi,
                      std::function<double(double)> dphi, double claimed_m_phi,
                      bool log_derivative_vanishes) {
  if (!phi || !dphi) throw InvalidArgument("custom weight needs phi and phi'");
  if (!(claimed_m_phi > 0.0) || !std::isfinite(claimed_m_phi)) {
    throw InvalidArgument("custom weight needs a finite M_phi > 0");
  }
  double prev = phi(0.0);
  if (!(prev >= 1.0)) throw InvalidArgument("custom weight: phi(0) must be >= 1");
  double worst = 0.0;
  for_each_sample([&](double t) {
    const double v = phi(t);
    if (!(v >= prev * (1.0 - 1e-15))) {
      throw InvalidArgument("custom weight: phi is not nondecreasing near t=" + format_double(t));
    }
    prev = v;
    worst = std::fmax(worst, std::fabs(dphi(t) / v));
  });
  if (worst > claimed_m_phi * (1.0 + kCustomTolerance)) {
    throw InvalidArgument("custom weight: sampled sup|phi'/phi| = " + format_double(worst) +
                          " exceeds the claimed M_phi = " + format_double(claimed_m_phi));
  }
  Weight w;
  w.family_ = WeightFamily::custom;
  w.param_ = 0.0;
  w.name_ = std::move(name);
  w.phi_ = std::move(phi);
  w.dphi_ = std::move(dphi);
  w.claimed_m_ = claimed_m_phi;
  w.vanishes_ = log_derivative_vanishes;
  return w;
}

std::string Weight::describe() const {
  switch (family_) {
    case WeightFamily::power:
      return "power(r=" + format_double(param_) + ")";
    case WeightFamily::exponential:
      return "exp(a=" + format_double(param_) + ")";
    case WeightFamily::custom:
      return "custom(" + name_ + ")";
  }
  return "?";
}

double Weight::operator()(double t) const {
  switch (family_) {
    case WeightFamily::power:
      return std::pow(1.0 + t, param_);
    case WeightFamily::exponential:
      return std::exp(param_ * t);
    case WeightFamily::custom:
      return phi_(t);
  }
  return 0.0;
}

double Weight::derivative(double t) const {
  switch (family_) {
    case WeightFamily::power:
      return param_ * std::pow(1.0 + t, param_ - 1.0);
    case WeightFamily::exponential:
      return param_ * std::exp(param_ * t);
    case WeightFamily::custom:
      return dphi_(t);
  }
  return 0.0;
}

double eval_weight(const Weight& w, double t) {
  if (!(t >= 0.0)) throw InvalidArgument("weight argument must be >= 0, got " + format_double(t));
  return w(t);
}

double log_derivative_bound(const Weight& w) {
  switch (w.family()) {
    case WeightFamily::power:
    case WeightFamily::exponential:
      return w.parameter();
    case WeightFamily::custom:
      return w.claimed_log_derivative();
  }
  return 0.0;
}

double epsilon_threshold(const Weight& w) {
  const double m = log_derivative_bound(w);
  return std::fmax(0.0, 1.0 - 1.0 / (m * m));
}

AdmissibilityFlags check_admissible(const Weight& w) {
  switch (w.family()) {
    case WeightFamily::power:
      return {true, true, true};
    case WeightFamily::exponential:
      return {true, true, false};
    case WeightFamily::custom:
      return {w(1e6) > w(0.0), true, w.claims_vanishing_log_derivative()};
  }
  return {};
}

double unit_log_derivative_onset(const Weight& w) {
  switch (w.family()) {
    case WeightFamily::power:
      return std::fmax(0.0, w.parameter() - 1.0);
    case WeightFamily::exponential:
      return w.parameter() <= 1.0 ? 0.0 : std::numeric_limits<double>::infinity();
    case WeightFamily::custom: {
      // Last sample where the log-derivative still exceeds one.
      double onset = 0.0;
      for_each_sample([&](double t) {
        if (std::fabs(w.derivative(t) / w(t)) > 1.0) onset = t;
      });
      return onset;
    }
  }
  return 0.0;
}

}  // namespace agmonkit
