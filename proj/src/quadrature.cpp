#include "curvflow/quadrature.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace curvflow {

// Golub-Welsch: nodes are the eigenvalues of the Jacobi matrix of the
// Legendre recurrence, weights come from the first eigenvector components.
QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw ConfigError("Gauss rule needs at least one point");
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    J(k, k - 1) = J(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  QuadratureRule r;
  r.degree = 2 * n - 1;
  for (int i = 0; i < n; ++i) {
    const double x = es.eigenvalues()(i);
    const double v = es.eigenvectors()(0, i);
    r.points.emplace_back(0.5 * (x + 1.0), 0.0);
    r.weights.push_back(v * v);  // 2 v^2 on [-1,1], halved for [0,1]
  }
  return r;
}

QuadratureRule interval_rule(int degree) {
  QuadratureRule r = gauss_legendre(std::max(1, (degree + 2) / 2));
  return r;
}

QuadratureRule triangle_rule(int degree) {
  // x = s, y = t (1 - s) with Jacobian (1 - s); the collapsed integrand has
  // degree + 1 in s.
  const int n = std::max(1, (degree + 3) / 2);
  const QuadratureRule g = gauss_legendre(n);
  QuadratureRule r;
  r.degree = 2 * n - 2;
  for (int i = 0; i < n; ++i) {
    const double s = g.points[i].x();
    for (int j = 0; j < n; ++j) {
      const double t = g.points[j].x();
      r.points.emplace_back(s, t * (1.0 - s));
      r.weights.push_back(g.weights[i] * g.weights[j] * (1.0 - s));
    }
  }
  return r;
}

QuadratureRule reference_rule(int dim, int degree) {
  return dim == 1 ? interval_rule(degree) : triangle_rule(degree);
}

}  // namespace curvflow
