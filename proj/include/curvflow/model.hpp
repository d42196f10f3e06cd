#pragma once

#include <array>
#include <string>

#include "curvflow/types.hpp"

namespace curvflow {

/// eta(r) = sigma r^alpha. Admissible: IMCF (sigma = alpha = 1) or powers of
/// mean curvature (sigma = -1, alpha = -1/k).
struct FlowRegime {
  int sigma = -1;
  double alpha = -1.0;

  static FlowRegime mcf(int k = 1);
  static FlowRegime imcf();
  /// "mcf", "mcf<k>" or "imcf".
  static FlowRegime parse(const std::string& name);

  bool is_mcf() const { return sigma < 0; }
  std::string name() const;
  /// Throws ConfigError outside the two admissible families.
  void validate() const;
};

struct EtaValue {
  double value = 0.0;
  double derivative = 0.0;
};

/// Throws ConfigError for r <= 0.
EtaValue eta(const FlowRegime& regime, double r);

/// sqrt(|z|^2 + eps^2)
double f_eps(const Vec2& z, double eps);

/// Third derivative tensor T(i, j, m), symmetric in all indices.
using Tensor3 = std::array<Mat2, 2>;  // T[i](j, m)

struct FepsDerivatives {
  Vec2 gradient = Vec2::Zero();
  Mat2 hessian = Mat2::Zero();
  Tensor3 third{Mat2::Zero(), Mat2::Zero()};
};

/// Derivatives in z of f_eps. `dim` = 1 restricts to the first component.
FepsDerivatives f_eps_derivatives(const Vec2& z, double eps, int dim = 2);

struct LinearizedCoeffs {
  Mat2 a = Mat2::Zero();   ///< -D^2 f_eps(Du)
  Vec2 c = Vec2::Zero();   ///< eta'(|Du|_eps) D f_eps(Du)
  double lambda = 0.0;     ///< smallest eigenvalue of -a, eps^2 / |Du|_eps^3
  double Lambda = 0.0;     ///< largest eigenvalue of -a, 1 / |Du|_eps
};

LinearizedCoeffs linearized_coeffs(const FlowRegime& regime, double eps, const Vec2& grad_u, int dim = 2);

}  // namespace curvflow
