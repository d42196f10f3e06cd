#include "curvflow/boundary_map.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

namespace curvflow {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

}  // namespace

BoundaryMap::BoundaryMap(const Domain& domain, const Mesh& mesh, double eps_width,
                         const BoundaryMapOptions& options)
    : domain_(domain), eps_(eps_width), h_(mesh.h()) {
  if (!(eps_width > 0.0)) throw ConfigError("boundary map: eps_width must be > 0");
  if (!(options.kappa > 0.0 && options.kappa < 1.0)) throw ConfigError("boundary map: kappa must lie in (0, 1)");
  if (domain.dim() != mesh.dim()) throw ConfigError("boundary map: mesh and domain dimensions differ");
  if (h_ > options.tolerance_factor * eps_width * eps_width) {
    std::ostringstream os;
    os << "boundary map: h = " << h_ << " exceeds " << options.tolerance_factor << " * eps_width^2 = "
       << options.tolerance_factor * eps_width * eps_width;
    throw ConfigError(os.str());
  }

  const auto& facets = mesh.boundary_facets();
  if (domain.kind == Domain::Kind::interval) {
    for (int f = 0; f < static_cast<int>(facets.size()); ++f) {
      const Vec2 p = mesh.facet_point(f, 0.0);
      const double u = signed_distance(domain, p);
      if (std::abs(u) >= eps_) throw ConfigError("boundary map: boundary node outside the strip");
      (p.x() < 0.0 ? u_minus_ : u_plus_) = u;
    }
  } else {
    std::vector<std::pair<double, double>> samples;
    for (int f = 0; f < static_cast<int>(facets.size()); ++f) {
      for (double s : {0.0, 0.25, 0.5, 0.75}) {
        const Vec2 p = mesh.facet_point(f, s);
        const double u = signed_distance(domain, p);
        if (std::abs(u) >= eps_) {
          throw ConfigError("boundary map: boundary of facet " + std::to_string(f) + " outside the strip");
        }
        samples.emplace_back(std::atan2(p.y(), p.x()), u);
      }
    }
    std::sort(samples.begin(), samples.end());
    const int n = static_cast<int>(samples.size());
    for (const auto& [t, u] : samples) {
      theta_.push_back(t);
      u_.push_back(u);
    }
    auto gap = [&](int i) { return i + 1 < n ? theta_[i + 1] - theta_[i] : theta_[0] + two_pi - theta_[i]; };
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd rhs(n);
    for (int i = 0; i < n; ++i) {
      const int ip = (i + 1) % n, im = (i + n - 1) % n;
      const double hl = gap(im), hr = gap(i);
      trip.emplace_back(i, im, hl);
      trip.emplace_back(i, i, 2.0 * (hl + hr));
      trip.emplace_back(i, ip, hr);
      rhs(i) = 6.0 * ((u_[ip] - u_[i]) / hr - (u_[i] - u_[im]) / hl);
    }
    Eigen::SparseMatrix<double> A(n, n);
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(A);
    if (lu.info() != Eigen::Success) throw SolverError("boundary map: spline system is singular");
    const Eigen::VectorXd M = lu.solve(rhs);
    m_.assign(M.data(), M.data() + n);
  }

  det_min_ = det_max_ = 1.0;
  const int ns = std::max(options.samples, 2);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    bool near = false;
    for (int i = 0; i <= mesh.dim(); ++i) {
      near = near || signed_distance(domain, mesh.vertex(mesh.cell(c)[i])) >= -2.0 * eps_ - h_;
    }
    if (!near) continue;
    for (int i = 0; i < ns; ++i) {
      for (int j = 0; j < (mesh.dim() == 1 ? 1 : ns - i); ++j) {
        const Vec2 ref = mesh.dim() == 1 ? Vec2((i + 0.5) / ns, 0.0) : Vec2((i + 1.0 / 3.0) / ns, (j + 1.0 / 3.0) / ns);
        const double det = jacobian_det(mesh.map(c, ref));
        det_min_ = std::min(det_min_, det);
        det_max_ = std::max(det_max_, det);
        if (!(std::abs(det - 1.0) < options.kappa)) {
          std::ostringstream os;
          os << "boundary map: Jacobian determinant " << det << " outside (" << 1.0 - options.kappa << ", "
             << 1.0 + options.kappa << ") in cell " << c;
          throw ConfigError(os.str());
        }
      }
    }
  }
}

double BoundaryMap::cutoff(double t) const {
  const double x = std::clamp((t + 2.0 * eps_) / eps_, 0.0, 1.0);
  return x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
}

double BoundaryMap::cutoff_d1(double t) const {
  const double x = (t + 2.0 * eps_) / eps_;
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return 30.0 * x * x * (1.0 - x) * (1.0 - x) / eps_;
}

double BoundaryMap::cutoff_d2(double t) const {
  const double x = (t + 2.0 * eps_) / eps_;
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return 60.0 * x * (1.0 - x) * (1.0 - 2.0 * x) / (eps_ * eps_);
}

BoundaryMap::Spline BoundaryMap::eval_offset(const Vec2& x) const {
  if (domain_.kind == Domain::Kind::interval) return {x.x() < 0.0 ? u_minus_ : u_plus_, 0.0, 0.0};
  const int n = static_cast<int>(theta_.size());
  double t = std::atan2(x.y(), x.x());
  // interval i with theta_[i] <= t < theta_[i+1], wrapping around
  int i = static_cast<int>(std::upper_bound(theta_.begin(), theta_.end(), t) - theta_.begin()) - 1;
  if (i < 0) {
    i = n - 1;
    t += two_pi;
  }
  const int ip = (i + 1) % n;
  const double h = i + 1 < n ? theta_[i + 1] - theta_[i] : theta_[0] + two_pi - theta_[i];
  const double A = (theta_[i] + h - t) / h, B = 1.0 - A;
  const double R = domain_.R;
  Spline s;
  s.value = A * u_[i] + B * u_[ip] + ((A * A * A - A) * m_[i] + (B * B * B - B) * m_[ip]) * h * h / 6.0;
  s.d1 = ((u_[ip] - u_[i]) / h - (3.0 * A * A - 1.0) / 6.0 * h * m_[i] + (3.0 * B * B - 1.0) / 6.0 * h * m_[ip]) / R;
  s.d2 = (A * m_[i] + B * m_[ip]) / (R * R);
  return s;
}

double BoundaryMap::offset(const Vec2& x) const { return eval_offset(x).value; }
double BoundaryMap::offset_d1(const Vec2& x) const { return eval_offset(x).d1; }
double BoundaryMap::offset_d2(const Vec2& x) const { return eval_offset(x).d2; }

Vec2 BoundaryMap::apply(const Vec2& x) const {
  const double t = signed_distance(domain_, x);
  const double rho = cutoff(t);
  if (rho == 0.0) return x;
  const double r = domain_.R + t;
  const double rn = r - offset(x) * rho;
  if (domain_.kind == Domain::Kind::interval) return Vec2(x.x() < 0.0 ? -rn : rn, 0.0);
  return x * (rn / r);
}

double BoundaryMap::jacobian_det(const Vec2& x) const {
  const double t = signed_distance(domain_, x);
  if (cutoff(t) == 0.0 && cutoff_d1(t) == 0.0) return 1.0;
  const double u = offset(x);
  const double radial = 1.0 - u * cutoff_d1(t);
  if (domain_.kind == Domain::Kind::interval) return radial;
  const double r = domain_.R + t;
  return (r - u * cutoff(t)) / r * radial;
}

BoundaryMap::OffsetBounds BoundaryMap::offset_bounds() const {
  OffsetBounds b;
  const double h2 = h_ * h_;
  if (domain_.kind == Domain::Kind::interval) {
    b.value = std::max(std::abs(u_minus_), std::abs(u_plus_)) / h2;
    return b;
  }
  const int n = static_cast<int>(theta_.size());
  for (int i = 0; i < n; ++i) {
    const double hi = i + 1 < n ? theta_[i + 1] - theta_[i] : theta_[0] + two_pi - theta_[i];
    for (double f : {0.0, 0.5}) {
      const double t = theta_[i] + f * hi;
      const Spline s = eval_offset(Vec2(std::cos(t), std::sin(t)));
      b.value = std::max(b.value, std::abs(s.value) / h2);
      b.slope = std::max(b.slope, std::abs(s.d1) / h_);
      b.curvature = std::max(b.curvature, std::abs(s.d2));
    }
  }
  return b;
}

}  // namespace curvflow
