#include "curvflow/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace curvflow {

namespace {

// quintic Hermite basis on [0,1] in monomial coefficients
constexpr double kQuintic[6][6] = {
    {1, 0, 0, -10, 15, -6},   {0, 1, 0, -6, 8, -3},  {0, 0, 0.5, -1.5, 1.5, -0.5},
    {0, 0, 0, 10, -15, 6},    {0, 0, 0, -4, 7, -3},  {0, 0, 0, 0.5, -1, 0.5},
};

// value, first and second derivative in t of sum_i c[i] t^i
std::array<double, 3> poly5(const double* c, double t) {
  double v = 0, d = 0, dd = 0;
  for (int i = 5; i >= 0; --i) {
    dd = dd * t + 2.0 * d;
    d = d * t + v;
    v = v * t + c[i];
  }
  return {v, d, dd};
}

}  // namespace

RadialProfile::RadialProfile(const FlowRegime& regime, double eps, double R, int n, int resolution)
    : regime_(regime), eps_(eps), R_(R), n_(n) {
  regime_.validate();
  if (!(eps > 0.0)) throw ConfigError("oracle: eps must be > 0");
  if (!(R > 0.0)) throw ConfigError("oracle: R must be > 0");
  if (n < 0) throw ConfigError("oracle: n must be >= 0");
  if (resolution < 16) throw ConfigError("oracle: resolution must be >= 16");
  resolution_ = (resolution + 3) / 4 * 4;
  iR_ = resolution_;
  H_ = R_ / resolution_;
  const int steps = resolution_ + resolution_ / 4;

  struct Blowup {};
  auto rhs = [&](double r, double psi) -> std::array<double, 2> {
    if (!(std::abs(psi) < 1.0)) throw Blowup{};
    const double s = std::sqrt(1.0 - psi * psi);
    const double dpsi = r == 0.0 ? eta(regime_, eps_).value / (n_ + 1.0)
                                 : eta(regime_, eps_ / s).value - n_ * psi / r;
    return {dpsi, eps_ * psi / s};
  };

  double psi = 0.0, U = 0.0;
  r_.push_back(0.0);
  psi_.push_back(0.0);
  std::vector<double> Us{0.0};
  for (int j = 0; j < steps; ++j) {
    const double r = j * H_;
    try {
      const auto k1 = rhs(r, psi);
      const auto k2 = rhs(r + 0.5 * H_, psi + 0.5 * H_ * k1[0]);
      const auto k3 = rhs(r + 0.5 * H_, psi + 0.5 * H_ * k2[0]);
      const auto k4 = rhs(r + H_, psi + H_ * k3[0]);
      const double npsi = psi + H_ / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
      const double nU = U + H_ / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
      if (!(std::abs(npsi) < 1.0 - 1e-10)) throw Blowup{};
      psi = npsi;
      U = nU;
    } catch (const Blowup&) {
      if (j < iR_) {
        std::ostringstream os;
        os << "oracle: no regular radial solution for " << regime_.name() << ", eps = " << eps_ << ", R = " << R_
           << ", n = " << n_ << " (gradient blows up near r = " << r << ")";
        throw SolverError(os.str());
      }
      break;
    }
    r_.push_back((j + 1) * H_);
    psi_.push_back(psi);
    Us.push_back(U);
  }

  const double UR = Us[iR_];
  const size_t m = r_.size();
  dpsi_.resize(m);
  u_.resize(m);
  du_.resize(m);
  d2u_.resize(m);
  for (size_t j = 0; j < m; ++j) {
    const double p = psi_[j];
    const double s2 = 1.0 - p * p;
    dpsi_[j] = rhs(r_[j], p)[0];
    u_[j] = Us[j] - UR;
    du_[j] = eps_ * p / std::sqrt(s2);
    d2u_[j] = eps_ * dpsi_[j] / (s2 * std::sqrt(s2));
  }
  u_[iR_] = 0.0;
}

RadialProfile::Local RadialProfile::locate(double r) const {
  const int last = static_cast<int>(r_.size()) - 1;
  int j = std::clamp(static_cast<int>(std::floor(r / H_)), 0, last - 1);
  return {j, (r - r_[j]) / H_, H_};
}

double RadialProfile::value(double r) const {
  r = std::abs(r);
  if (r > extent()) {
    const double d = r - extent();
    return u_.back() + du_.back() * d + 0.5 * d2u_.back() * d * d;
  }
  const auto [j, t, H] = locate(r);
  const double f[6] = {u_[j], H * du_[j], H * H * d2u_[j], u_[j + 1], H * du_[j + 1], H * H * d2u_[j + 1]};
  double v = 0.0;
  for (int k = 0; k < 6; ++k) v += f[k] * poly5(kQuintic[k], t)[0];
  return v;
}

double RadialProfile::d1(double r) const {
  r = std::abs(r);
  if (r > extent()) return du_.back() + d2u_.back() * (r - extent());
  const auto [j, t, H] = locate(r);
  const double f[6] = {u_[j], H * du_[j], H * H * d2u_[j], u_[j + 1], H * du_[j + 1], H * H * d2u_[j + 1]};
  double v = 0.0;
  for (int k = 0; k < 6; ++k) v += f[k] * poly5(kQuintic[k], t)[1];
  return v / H;
}

double RadialProfile::d2(double r) const {
  r = std::abs(r);
  if (r > extent()) return d2u_.back();
  const auto [j, t, H] = locate(r);
  const double f[6] = {u_[j], H * du_[j], H * H * d2u_[j], u_[j + 1], H * du_[j + 1], H * H * d2u_[j + 1]};
  double v = 0.0;
  for (int k = 0; k < 6; ++k) v += f[k] * poly5(kQuintic[k], t)[2];
  return v / (H * H);
}

Jet RadialProfile::jet(const Vec2& x) const {
  Jet j;
  if (n_ == 0) {
    const double r = std::abs(x.x());
    const double s = x.x() < 0.0 ? -1.0 : 1.0;
    j.value = value(r);
    j.grad = Vec2(s * d1(r), 0.0);
    j.hess(0, 0) = d2(r);
    return j;
  }
  if (n_ != 1) throw ConfigError("oracle: jets are available for n = 0 and n = 1 only");
  const double r = x.norm();
  const double u2 = d2(r);
  j.value = value(r);
  if (r < 1e-9 * R_) {
    j.grad = u2 * x;
    j.hess = u2 * Mat2::Identity();
    return j;
  }
  const Vec2 e = x / r;
  const double u1 = d1(r);
  j.grad = u1 * e;
  j.hess = u2 * e * e.transpose() + (u1 / r) * (Mat2::Identity() - e * e.transpose());
  return j;
}

JetFn RadialProfile::jet_fn() const {
  return [p = *this](const Vec2& x) { return p.jet(x); };
}

double RadialProfile::ode_residual() const {
  double res = 0.0;
  for (int j = 0; j < iR_; ++j) {
    const double t = 0.5, H = H_;
    const double h00 = 2 * t * t * t - 3 * t * t + 1, h10 = t * t * t - 2 * t * t + t;
    const double h01 = -2 * t * t * t + 3 * t * t, h11 = t * t * t - t * t;
    const double d00 = 6 * t * t - 6 * t, d10 = 3 * t * t - 4 * t + 1, d01 = -6 * t * t + 6 * t, d11 = 3 * t * t - 2 * t;
    const double psi = h00 * psi_[j] + h10 * H * dpsi_[j] + h01 * psi_[j + 1] + h11 * H * dpsi_[j + 1];
    const double dpsi = (d00 * psi_[j] + d10 * H * dpsi_[j] + d01 * psi_[j + 1] + d11 * H * dpsi_[j + 1]) / H;
    const double r = r_[j] + t * H;
    const double grad_eps = eps_ / std::sqrt(1.0 - psi * psi);
    res = std::max(res, std::abs(dpsi + n_ * psi / r - eta(regime_, grad_eps).value));
  }
  return res;
}

double RadialProfile::estimate_accuracy() {
  const RadialProfile fine(regime_, eps_, R_, n_, 2 * resolution_);
  double d = 0.0;
  for (int j = 0; j <= iR_; ++j) d = std::max(d, std::abs(u_[j] - fine.u_[2 * j]));
  accuracy_ = d;
  return d;
}

nlohmann::json RadialProfile::metadata() const {
  return {{"regime", regime_.name()},   {"sigma", regime_.sigma},      {"alpha", regime_.alpha},
          {"eps", eps_},                {"R", R_},                     {"n", n_},
          {"resolution", resolution_},  {"extent", extent()},          {"accuracy_estimate", accuracy_},
          {"ode_residual", ode_residual()}, {"sign", sign()},          {"u_center", u_.front()}};
}

RadialProfile radial_solve(const FlowRegime& regime, double eps, double R, int n, int resolution) {
  RadialProfile p(regime, eps, R, n, resolution);
  p.estimate_accuracy();
  return p;
}

double exact_mcf_arrival(double R, int n, double r) {
  if (n < 1) throw ConfigError("exact arrival time needs n >= 1");
  if (std::abs(r) > R) throw ConfigError("exact arrival time: point outside the ball");
  return (R * R - r * r) / (2.0 * n);
}

double exact_mcf_arrival(double R, int n, const Vec2& x) { return exact_mcf_arrival(R, n, x.norm()); }

std::vector<GapRow> regularization_gap(const FlowRegime& regime, double R, int n, const std::vector<double>& eps_list,
                                       int resolution) {
  if (!regime.is_mcf() || regime.alpha != -1.0) throw ConfigError("regularization gap needs the mcf regime (k = 1)");
  std::vector<GapRow> rows;
  for (double eps : eps_list) {
    const RadialProfile p = radial_solve(regime, eps, R, n, resolution);
    GapRow row;
    row.eps = eps;
    row.accuracy = p.accuracy();
    row.ode_residual = p.ode_residual();
    for (size_t j = 0; j < p.r().size() && p.r()[j] <= R; ++j) {
      row.gap = std::max(row.gap, std::abs(p.u()[j] - exact_mcf_arrival(R, n, p.r()[j])));
    }
    rows.push_back(row);
  }
  return rows;
}

void write_profile_csv(std::ostream& os, const RadialProfile& p, int stride) {
  stride = std::max(stride, 1);
  char buf[128];
  os << "r,u,du\n";
  const int iR = p.resolution();
  for (int j = 0; j <= iR; ++j) {
    if (j % stride != 0 && j != iR) continue;
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", p.r()[j], p.u()[j], p.du()[j]);
    os << buf;
  }
}

}  // namespace curvflow
