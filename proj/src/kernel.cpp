#include "plap/kernel.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace plap {

double unit_ball_volume(std::size_t d) {
  const double h = 0.5 * static_cast<double>(d);
  return std::pow(std::numbers::pi, h) / std::tgamma(h + 1.0);
}

namespace {

double simpson_step(const std::function<double(double)>& f, double a, double b,
                    double fa, double fm, double fb, double whole, double tol,
                    int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

// d/dr of g at r by a five-point stencil.
double derivative(const std::function<double(double)>& g, double r, double h) {
  return (-g(r + 2 * h) + 8 * g(r + h) - 8 * g(r - h) + g(r - 2 * h)) / (12 * h);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol) {
  // Split into panels first so narrow features are not skipped.
  constexpr int kPanels = 64;
  double total = 0.0;
  const double h = (b - a) / kPanels;
  for (int i = 0; i < kPanels; ++i) {
    const double lo = a + i * h;
    const double hi = (i + 1 == kPanels) ? b : lo + h;
    const double flo = f(lo);
    const double fhi = f(hi);
    const double fm = f(0.5 * (lo + hi));
    const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fm + fhi);
    total += simpson_step(f, lo, hi, flo, fm, fhi, whole, tol / kPanels, 40);
  }
  return total;
}

Kernel kernel_constants(Kernel::Profile eta, std::size_t d, std::string name) {
  if (!eta) throw std::invalid_argument("kernel: empty profile");
  if (d == 0) throw std::invalid_argument("kernel: dimension must be positive");

  constexpr int kGrid = 10000;
  double prev = eta(0.0);
  for (int i = 0; i <= kGrid; ++i) {
    const double t = static_cast<double>(i) / kGrid;
    const double v = eta(t);
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("kernel: eta must be finite and nonnegative");
    }
    if (v > prev * (1.0 + 1e-12) + 1e-300) {
      throw std::invalid_argument("kernel: eta must be nonincreasing");
    }
    prev = v;
  }
  for (double t : {1.0 + 1e-9, 1.001, 1.5, 2.0, 10.0}) {
    if (eta(t) != 0.0) {
      throw std::invalid_argument("kernel: eta must vanish for t > 1");
    }
  }

  Kernel k;
  k.eta_ = std::move(eta);
  k.name_ = std::move(name);
  k.dim_ = d;
  const double dd = static_cast<double>(d);
  const double alpha = unit_ball_volume(d);
  const auto& f = k.eta_;

  // Radial coordinates: int |z_1|^2 eta = (1/d) int |z|^2 eta
  //   = alpha(d) int_0^1 r^{d+1} eta(r) dr, and the mass is
  //   d alpha(d) int_0^1 r^{d-1} eta(r) dr.
  k.sigma_eta_ = alpha * integrate([&](double r) { return std::pow(r, dd + 1) * f(r); },
                                   0.0, 1.0);
  k.mass_ = dd * alpha *
            integrate([&](double r) { return std::pow(r, dd - 1) * f(r); }, 0.0, 1.0);
  if (!(k.sigma_eta_ > 0.0)) {
    throw std::invalid_argument("kernel: sigma_eta must be positive");
  }

  const std::function<double(double)> g = [&](double r) { return r * f(r); };
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.0;
  double b = 1.0;
  double c = b - invphi * (b - a);
  double e = a + invphi * (b - a);
  double gc = g(c);
  double ge = g(e);
  while (b - a > 1e-12) {
    if (gc > ge) {
      b = e;
      e = c;
      ge = gc;
      c = b - invphi * (b - a);
      gc = g(c);
    } else {
      a = c;
      c = e;
      gc = ge;
      e = a + invphi * (b - a);
      ge = g(e);
    }
  }
  double r0 = 0.5 * (a + b);
  constexpr double h = 1e-3;
  if (r0 > 3 * h && r0 < 1.0 - 3 * h) {
    const std::function<double(double)> dg = [&](double r) { return derivative(g, r, h); };
    for (int it = 0; it < 5; ++it) {
      const double d1 = dg(r0);
      const double d2 = derivative(dg, r0, h);
      if (!(d2 < 0.0)) break;
      const double next = r0 - d1 / d2;
      if (!(next > 0.0 && next < 1.0) || g(next) < g(r0) - 1e-15) break;
      r0 = next;
    }
  }
  k.r0_ = r0;
  k.r0_eta_r0_ = g(r0);

  double theta = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= kGrid; ++i) {
    const double r = static_cast<double>(i) / kGrid;
    const double gap = r - r0;
    if (std::abs(gap) < 1e-6) continue;
    theta = std::min(theta, (k.r0_eta_r0_ - g(r)) / (gap * gap));
  }
  k.theta_eta_ = std::max(theta, 0.0);
  return k;
}

Kernel Kernel::gaussian(std::size_t d) {
  return kernel_constants(
      [](double t) { return (t >= 0.0 && t <= 1.0) ? std::exp(-4.0 * t * t) : 0.0; }, d,
      "gaussian");
}

Kernel Kernel::bump(std::size_t d) {
  return kernel_constants(
      [](double t) {
        if (t < 0.0 || t >= 1.0) return 0.0;
        return std::exp(1.0 - 1.0 / (1.0 - t * t));
      },
      d, "bump");
}

Kernel Kernel::scaled(double c) const {
  if (!(c > 0.0)) throw std::invalid_argument("kernel: scale must be positive");
  Kernel k = *this;
  Profile base = eta_;
  k.eta_ = [base, c](double t) { return c * base(t); };
  k.sigma_eta_ *= c;
  k.mass_ *= c;
  k.r0_eta_r0_ *= c;
  k.theta_eta_ *= c;
  return k;
}

}  // namespace plap
