#include "curvflow/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "curvflow/types.hpp"

namespace curvflow::conditions {

void ParameterSet::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("ParameterSet: " + what); };
  if (n < 0) fail("n must be >= 0");
  if (!(mu >= 2.0)) fail("mu must be >= 2");
  if (deg < 3) fail("deg must be >= 3");
  if (wdeg < 1) fail("wdeg must be >= 1");
  if (!(epsilon > 0.0)) fail("epsilon must be > 0");
  if (!(gamma > 0.0)) fail("gamma must be > 0");
  if (!(delta > 0.0)) fail("delta must be > 0");
  if (!(h > 0.0)) fail("h must be > 0");
}

double nu(double mu, int wdeg) { return 3.0 / mu - 3.5 + (4.0 / 3.0) * wdeg; }

std::optional<Interval> delta_interval(double mu, int wdeg) {
  const double upper = nu(mu, wdeg);
  const double lower = mu > 3.0 ? 2.0 : 3.0 / mu - 0.5;
  if (lower < upper) return Interval{lower, upper};
  return std::nullopt;
}

double wdeg_lower_bound(double mu) {
  if (mu > 3.0) return 0.75 * (5.5 - 3.0 / mu);
  return 2.25;
}

std::array<double, 5> contraction_exponents(const ParameterSet& p) {
  const double d = p.n + 1.0;
  const double m = std::min(0.0, 1.0 - d / p.mu);
  const double half = d / 2.0;
  return {
      2.0 * (p.delta + 1.0) - d / p.mu + m - half,
      p.delta + p.deg + m - half,
      p.delta + 1.0 + m - half,
      2.0 * (p.deg - 1.0) + m + d / p.mu - half,
      p.deg - 1.0 + m + d / p.mu - half,
  };
}

ConditionReport sufficient_conditions(const ParameterSet& p) {
  ConditionReport r;
  r.nu = nu(p.mu, p.wdeg);
  r.delta_interval = delta_interval(p.mu, p.wdeg);
  r.exponents = contraction_exponents(p);

  const double d = p.n + 1.0;
  auto& s = r.sufficient;
  s.delta_lower = p.mu > 3.0 ? p.delta > 2.0 : p.delta > 3.0 / p.mu - 0.5;
  s.boundary_strip = d / p.mu - d / 2.0 + p.wdeg - 2.0 + p.wdeg / d > p.delta;
  s.boundary_ball = p.wdeg - 2.0 + p.wdeg / p.mu > p.delta;
  s.wdeg_vs_deg = 2 * p.wdeg <= p.deg;
  s.contraction = std::all_of(r.exponents.begin(), r.exponents.end(), [](double e) { return e > 0.0; });

  try {
    r.rho = rho_radius(p.epsilon, p.gamma, p.h, p.delta);
  } catch (const RadiusOverflow& e) {
    r.rho_error = e.what();
  }
  return r;
}

double rho_radius(double epsilon, double gamma, double h, double delta) {
  if (!(epsilon > 0.0 && gamma > 0.0 && h > 0.0 && delta >= 0.0)) {
    throw ConfigError("rho_radius: epsilon, gamma, h must be > 0 and delta >= 0");
  }
  const double exponent = std::pow(epsilon, -gamma);
  if (exponent > 700.0) {
    std::ostringstream os;
    os << "radius overflows: eps^-gamma = " << exponent << " > 700";
    throw RadiusOverflow(os.str());
  }
  return std::exp(exponent) * std::pow(h, delta);
}

Budget bound_budget(const ParameterSet& p, double rho, double u_norm) {
  const double d = p.n + 1.0;
  const double h = p.h;
  Budget b;
  b.I1 = std::pow(h, 1.0 - d / p.mu) * rho;
  b.I2 = std::pow(h, p.deg - 1.0) * u_norm;
  b.I3 = std::pow(h, 1.0 + std::min(0.0, 1.0 - d / p.mu));
  const double s = b.I1 + b.I2;
  b.A = s / h * (s + h + 1.0) * b.I3 + s / h * b.I3;
  b.B = s * b.I3;
  return b;
}

nlohmann::json to_json(const ParameterSet& p) {
  return {{"n", p.n},         {"mu", p.mu},       {"deg", p.deg},     {"wdeg", p.wdeg},
          {"epsilon", p.epsilon}, {"gamma", p.gamma}, {"delta", p.delta}, {"h", p.h}};
}

nlohmann::json to_json(const ConditionReport& r) {
  nlohmann::json j;
  j["nu"] = r.nu;
  if (r.delta_interval) {
    j["delta_interval"] = {r.delta_interval->first, r.delta_interval->second};
  } else {
    j["delta_interval"] = nullptr;
  }
  j["exponents"] = r.exponents;
  j["sufficient"] = {{"delta_lower", r.sufficient.delta_lower},
                     {"boundary_strip", r.sufficient.boundary_strip},
                     {"boundary_ball", r.sufficient.boundary_ball},
                     {"wdeg_vs_deg", r.sufficient.wdeg_vs_deg},
                     {"contraction", r.sufficient.contraction},
                     {"all", r.sufficient.all()}};
  if (r.rho) {
    j["rho"] = *r.rho;
  } else {
    j["rho"] = nullptr;
    j["rho_error"] = r.rho_error;
  }
  return j;
}

}  // namespace curvflow::conditions
