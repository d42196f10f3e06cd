#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

namespace curvflow::conditions {

/// Discretisation and regularisation parameters entering the radius rule
/// rho = exp(eps^-gamma) h^delta and the admissibility conditions.
struct ParameterSet {
  int n = 2;          ///< spatial dimension minus one
  double mu = 2.0;    ///< integrability exponent of the W^{2,mu} ball
  int deg = 9;        ///< polynomial degree of the element
  int wdeg = 3;       ///< boundary approximation order
  double epsilon = 1.0;
  double gamma = 1.0;
  double delta = 1.5;
  double h = 0.1;

  /// Throws ConfigError naming the first violated invariant.
  void validate() const;
};

using Interval = std::pair<double, double>;

double nu(double mu, int wdeg);

/// Admissible delta range; empty when the lower end is not below nu.
std::optional<Interval> delta_interval(double mu, int wdeg);

double wdeg_lower_bound(double mu);

/// Powers of h of the five contraction terms, in the order
/// h^-1 I1^2 I3, h^-1 I1 I2 I3, h^-1 I1 I3, h^-1 I2^2 I3, h^-1 I2 I3.
std::array<double, 5> contraction_exponents(const ParameterSet& p);

struct SufficientConditions {
  bool delta_lower = false;      ///< delta > 2 (mu > 3) or delta > 3/mu - 1/2
  bool boundary_strip = false;   ///< (n+1)/mu - (n+1)/2 + wdeg - 2 + wdeg/(n+1) > delta
  bool boundary_ball = false;    ///< wdeg - 2 + wdeg/mu > delta
  bool wdeg_vs_deg = false;      ///< wdeg <= deg/2
  bool contraction = false;      ///< all five exponents positive

  bool all() const {
    return delta_lower && boundary_strip && boundary_ball && wdeg_vs_deg && contraction;
  }
};

struct ConditionReport {
  double nu = 0.0;
  std::optional<Interval> delta_interval;
  std::array<double, 5> exponents{};
  SufficientConditions sufficient;
  std::optional<double> rho;  ///< empty when the radius overflows
  std::string rho_error;
};

ConditionReport sufficient_conditions(const ParameterSet& p);

class RadiusOverflow : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

/// exp(eps^-gamma) * h^delta. Throws RadiusOverflow if eps^-gamma > 700.
double rho_radius(double epsilon, double gamma, double h, double delta);

/// Budget quantities of the contraction estimate with all generic constants
/// and the factor exp(P(1/eps)) normalised to one.
struct Budget {
  double I1 = 0.0;
  double I2 = 0.0;
  double I3 = 0.0;
  double A = 0.0;
  double B = 0.0;
};

Budget bound_budget(const ParameterSet& p, double rho, double u_norm);

nlohmann::json to_json(const ParameterSet& p);
nlohmann::json to_json(const ConditionReport& r);

}  // namespace curvflow::conditions
