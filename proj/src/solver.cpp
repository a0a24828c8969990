#include "twf/solver.hpp"

#include <cmath>
#include <numbers>

namespace twf {

namespace {

// Upper tail P(xi > t) of the standard normal.
double upper_q(double t) { return 0.5 * std::erfc(t / std::numbers::sqrt2); }

double normal_pdf(double t) {
  return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi);
}

// E[xi^2 1{|xi| >= t}] = 2 (t phi(t) + Q(t)),  t >= 0.
double tail_second_moment(double t) {
  return 2.0 * (t * normal_pdf(t) + upper_q(t));
}

}  // namespace

ParamCheck validate_params(const TruncationParams& p, StepMode mode) {
  if (!(p.alpha_z_lb >= 0.0) || !(p.alpha_z_ub >= p.alpha_z_lb) ||
      !(p.alpha_h > 0.0) || !(p.alpha_y > 0.0) || !(p.alpha_p > 0.0))
    throw std::invalid_argument("validate_params: malformed trimming levels");

  const double a_lo = std::sqrt(1.01) * p.alpha_z_lb;
  const double a_hi = std::sqrt(0.99) * p.alpha_z_ub;

  // Mass lost to the z-band trimming, as a second moment and as a probability.
  const double m_lo = 1.0 - tail_second_moment(a_lo);  // E[xi^2, |xi| <= a_lo]
  const double m_hi = tail_second_moment(a_hi);
  const double zeta1_moment = m_lo + m_hi;
  const double zeta1_prob =
      (1.0 - 2.0 * upper_q(a_lo)) + 2.0 * upper_q(a_hi);

  ParamCheck out;
  out.zeta1 = std::max(zeta1_moment, zeta1_prob);
  out.zeta2 = tail_second_moment(0.473 * p.alpha_h);

  // Step-size budget.  The numerator uses the trimmed-moment losses; the
  // probability form enters only the feasibility inequality below.
  const double c_num = std::sqrt(2.0 / (9.0 * std::numbers::pi));
  out.mu0 = (0.994 - zeta1_moment - out.zeta2 - c_num / p.alpha_h) /
            (2.0 * (1.02 + 0.665 / p.alpha_h));

  if (mode == StepMode::fixed) {
    const double c_ok = std::sqrt(8.0 / (9.0 * std::numbers::pi));
    double lhs = 2.0 * (out.zeta1 + out.zeta2) + c_ok / p.alpha_h;
    out.ok = lhs < 1.99 && p.alpha_y >= 3.0;
  } else {
    out.ok = p.alpha_z_lb > 0.0 && p.alpha_z_lb <= 0.1 &&
             p.alpha_z_ub >= 5.0 && p.alpha_h >= 6.0 && p.alpha_y >= 3.0 &&
             p.alpha_p >= 5.0;
  }
  return out;
}

}  // namespace twf
