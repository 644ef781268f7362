#pragma once

#include <cstddef>
#include <functional>
#include <string>

namespace plap {

/// Volume of the unit ball in R^d, pi^{d/2} / Gamma(d/2 + 1).
double unit_ball_volume(std::size_t d);

/// A radial kernel profile eta on [0, 1] together with the constants the
/// normalized graph operators need.
///
/// sigma_eta is the second moment int |z_1|^2 eta(|z|) dz over R^d, mass is
/// int_{B(0,1)} eta(|z|) dz, r0 maximizes r * eta(r) on [0, 1], and theta_eta is
/// the largest theta with r eta(r) + theta (r - r0)^2 <= r0 eta(r0) on [0, 1].
class Kernel {
 public:
  using Profile = std::function<double(double)>;

  Kernel() = default;

  /// e^{-4 t^2} on [0, 1], zero outside. Default for all experiments.
  static Kernel gaussian(std::size_t d);
  /// Smooth compact bump exp(1 - 1/(1 - t^2)) on [0, 1).
  static Kernel bump(std::size_t d);

  double operator()(double t) const { return eta_(t); }

  /// Same profile multiplied by c > 0; constants rescale accordingly.
  Kernel scaled(double c) const;

  const std::string& name() const { return name_; }
  std::size_t dim() const { return dim_; }
  double sigma_eta() const { return sigma_eta_; }
  double mass() const { return mass_; }
  double r0() const { return r0_; }
  double r0_eta_r0() const { return r0_eta_r0_; }
  double theta_eta() const { return theta_eta_; }
  bool strict_max_holds() const { return theta_eta_ > 0.0; }

 private:
  friend Kernel kernel_constants(Profile eta, std::size_t d, std::string name);

  Profile eta_;
  std::string name_;
  std::size_t dim_ = 0;
  double sigma_eta_ = 0.0;
  double mass_ = 0.0;
  double r0_ = 0.0;
  double r0_eta_r0_ = 0.0;
  double theta_eta_ = 0.0;
};

/// Validates eta (nonnegative, nonincreasing, zero beyond 1) and computes the
/// kernel constants: radial adaptive quadrature for sigma_eta and the mass,
/// golden-section search with a Newton polish for r0, a 10^4-point grid scan
/// for theta_eta. Throws std::invalid_argument on an invalid profile.
Kernel kernel_constants(Kernel::Profile eta, std::size_t d,
                        std::string name = "custom");

/// Adaptive Simpson quadrature of f on [a, b].
double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol = 1e-13);

}  // namespace plap
