#include "curvflow/model.hpp"

#include <cmath>

namespace curvflow {

FlowRegime FlowRegime::mcf(int k) {
  if (k < 1) throw ConfigError("mean curvature power k must be >= 1");
  return {-1, -1.0 / k};
}

FlowRegime FlowRegime::imcf() { return {1, 1.0}; }

FlowRegime FlowRegime::parse(const std::string& name) {
  if (name == "imcf") return imcf();
  if (name == "mcf") return mcf(1);
  if (name.rfind("mcf", 0) == 0) {
    try {
      size_t used = 0;
      const int k = std::stoi(name.substr(3), &used);
      if (used == name.size() - 3) return mcf(k);
    } catch (const std::exception&) {
    }
  }
  throw ConfigError("unknown regime '" + name + "' (expected mcf, mcf<k> or imcf)");
}

std::string FlowRegime::name() const {
  if (sigma > 0) return "imcf";
  const int k = static_cast<int>(std::lround(-1.0 / alpha));
  return k == 1 ? "mcf" : "mcf" + std::to_string(k);
}

void FlowRegime::validate() const {
  if (sigma == 1 && alpha == 1.0) return;
  if (sigma == -1 && alpha < 0.0) {
    const double k = -1.0 / alpha;
    if (k >= 1.0 - 1e-12 && std::abs(k - std::round(k)) < 1e-9) return;
  }
  throw ConfigError("regime must be sigma=1, alpha=1 or sigma=-1, alpha=-1/k");
}

EtaValue eta(const FlowRegime& regime, double r) {
  if (!(r > 0.0)) throw ConfigError("eta: argument must be positive");
  const double v = regime.sigma * std::pow(r, regime.alpha);
  return {v, regime.alpha * v / r};
}

double f_eps(const Vec2& z, double eps) { return std::sqrt(z.squaredNorm() + eps * eps); }

FepsDerivatives f_eps_derivatives(const Vec2& z_in, double eps, int dim) {
  Vec2 z = z_in;
  if (dim == 1) z.y() = 0.0;
  const double r = f_eps(z, eps);
  const double r3 = r * r * r;
  const double r5 = r3 * r * r;
  FepsDerivatives d;
  d.gradient = z / r;
  d.hessian = Mat2::Identity() / r - z * z.transpose() / r3;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      for (int m = 0; m < 2; ++m) {
        const double dij = i == j, dim_ = i == m, djm = j == m;
        d.third[i](j, m) = -(dij * z[m] + dim_ * z[j] + djm * z[i]) / r3 + 3.0 * z[i] * z[j] * z[m] / r5;
      }
    }
  }
  if (dim == 1) {
    d.hessian(0, 1) = d.hessian(1, 0) = d.hessian(1, 1) = 0.0;
    const double t = d.third[0](0, 0);
    d.third = {Mat2::Zero(), Mat2::Zero()};
    d.third[0](0, 0) = t;
  }
  return d;
}

LinearizedCoeffs linearized_coeffs(const FlowRegime& regime, double eps, const Vec2& grad_u, int dim) {
  Vec2 z = grad_u;
  if (dim == 1) z.y() = 0.0;
  const auto d = f_eps_derivatives(z, eps, dim);
  const double r = f_eps(z, eps);
  LinearizedCoeffs k;
  k.a = -d.hessian;
  k.c = eta(regime, r).derivative * d.gradient;
  k.Lambda = 1.0 / r;
  k.lambda = eps * eps / (r * r * r);
  return k;
}

}  // namespace curvflow
