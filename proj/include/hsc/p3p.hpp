#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "hsc/geometry.hpp"

namespace hsc {

struct Correspondence {
  Eigen::Vector2d pixel = Eigen::Vector2d::Zero();
  Eigen::Vector3d point = Eigen::Vector3d::Zero();
  std::uint32_t point_id = 0;
};

enum class P3PStatus { kOk, kCollinear, kCoincidentRays, kNoSolution };

inline const char* to_string(P3PStatus s) {
  switch (s) {
    case P3PStatus::kOk: return "ok";
    case P3PStatus::kCollinear: return "collinear world points";
    case P3PStatus::kCoincidentRays: return "coincident pixel rays";
    case P3PStatus::kNoSolution: return "no real solution";
  }
  return "?";
}

struct P3PResult {
  P3PStatus status = P3PStatus::kNoSolution;
  std::vector<Pose> poses;  // at most 4
};

namespace p3p_detail {

// Polynomials as coefficient arrays, lowest degree first.
using Poly = std::vector<double>;

inline Poly mul(const Poly& a, const Poly& b) {
  Poly r(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return r;
}

inline Poly add(Poly a, const Poly& b, double scale = 1.0) {
  if (a.size() < b.size()) a.resize(b.size(), 0.0);
  for (std::size_t i = 0; i < b.size(); ++i) a[i] += scale * b[i];
  return a;
}

inline double eval(const Poly& p, double x) {
  double r = 0.0;
  for (std::size_t i = p.size(); i-- > 0;) r = r * x + p[i];
  return r;
}

inline double eval_derivative(const Poly& p, double x) {
  double r = 0.0;
  for (std::size_t i = p.size(); i-- > 1;) r = r * x + static_cast<double>(i) * p[i];
  return r;
}

/// Real roots via companion-matrix eigenvalues, then Newton polishing.
/// Near-real complex pairs are kept; the pose refinement decides.
inline std::vector<double> real_roots(Poly p) {
  double scale = 0.0;
  for (double c : p) scale = std::max(scale, std::abs(c));
  if (scale == 0.0) return {};
  while (p.size() > 1 && std::abs(p.back()) <= 1e-14 * scale) p.pop_back();
  const std::size_t n = p.size() - 1;
  std::vector<double> roots;
  if (n == 0) return roots;
  if (n == 1) {
    roots.push_back(-p[0] / p[1]);
  } else {
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 1; i < n; ++i) companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n - 1)) = -p[i] / p[n];
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
      const std::complex<double> z = es.eigenvalues()[i];
      if (std::abs(z.imag()) <= 1e-4 * std::max(1.0, std::abs(z.real()))) roots.push_back(z.real());
    }
  }
  for (double& x : roots) {
    for (int it = 0; it < 3; ++it) {
      const double d = eval_derivative(p, x);
      if (d == 0.0) break;
      const double step = eval(p, x) / d;
      if (!std::isfinite(step) || std::abs(eval(p, x - step)) > std::abs(eval(p, x))) break;
      x -= step;
    }
  }
  return roots;
}

inline Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

/// Newton iterations on the six normalized-image residuals of three points.
/// Square system; converges quadratically to the nearby exact solution.
inline void refine(Eigen::Matrix3d& r, Eigen::Vector3d& t, const std::array<Eigen::Vector3d, 3>& world,
                   const std::array<Eigen::Vector2d, 3>& normalized) {
  auto residual = [&](const Eigen::Matrix3d& rr, const Eigen::Vector3d& tt, Eigen::Matrix<double, 6, 1>& out) {
    for (int i = 0; i < 3; ++i) {
      const Eigen::Vector3d y = rr * world[i] + tt;
      out.segment<2>(2 * i) = y.head<2>() / y.z() - normalized[i];
    }
    return out.norm();
  };
  Eigen::Matrix<double, 6, 1> res;
  double err = residual(r, t, res);
  for (int it = 0; it < 10 && err > 0.0; ++it) {
    Eigen::Matrix<double, 6, 6> jac;
    for (int i = 0; i < 3; ++i) {
      const Eigen::Vector3d rx = r * world[i];
      const Eigen::Vector3d y = rx + t;
      Eigen::Matrix<double, 2, 3> dproj;
      dproj << 1.0 / y.z(), 0.0, -y.x() / (y.z() * y.z()), 0.0, 1.0 / y.z(), -y.y() / (y.z() * y.z());
      jac.block<2, 3>(2 * i, 0) = -dproj * skew(rx);
      jac.block<2, 3>(2 * i, 3) = dproj;
    }
    const Eigen::FullPivLU<Eigen::Matrix<double, 6, 6>> lu(jac);
    if (!lu.isInvertible()) break;
    const Eigen::Matrix<double, 6, 1> delta = -lu.solve(res);
    if (!delta.allFinite()) break;
    const Eigen::Vector3d w = delta.head<3>();
    Eigen::Matrix3d r_new = r;
    if (w.norm() > 0.0) r_new = Eigen::AngleAxisd(w.norm(), w.normalized()).toRotationMatrix() * r;
    const Eigen::Vector3d t_new = t + delta.tail<3>();
    Eigen::Matrix<double, 6, 1> res_new;
    const double err_new = residual(r_new, t_new, res_new);
    if (!(err_new < err)) break;
    r = r_new;
    t = t_new;
    res = res_new;
    err = err_new;
  }
}

}  // namespace p3p_detail

/// Calibrated perspective-three-point solver. Distances along the three
/// bearing rays follow from the law-of-cosines system, reduced to a quartic
/// in the depth ratio s3/s1; each real root gives camera-frame points that are
/// aligned to the world points, then polished by Newton iterations on the
/// reprojection residuals. Only poses that reproject all three points within
/// 1e-6 px with positive depth are returned.
inline P3PResult solve_p3p(std::span<const Correspondence> corrs, const Intrinsics& k) {
  using namespace p3p_detail;
  if (corrs.size() != 3) throw std::invalid_argument("solve_p3p needs exactly 3 correspondences");
  P3PResult out;
  std::array<Eigen::Vector3d, 3> x;
  std::array<Eigen::Vector3d, 3> j;
  std::array<Eigen::Vector2d, 3> m;
  for (int i = 0; i < 3; ++i) {
    x[i] = corrs[i].point;
    m[i] = Eigen::Vector2d((corrs[i].pixel.x() - k.cx) / k.focal, (corrs[i].pixel.y() - k.cy) / k.focal);
    j[i] = Eigen::Vector3d(m[i].x(), m[i].y(), 1.0).normalized();
  }

  const double c01 = (x[0] - x[1]).norm();
  const double c02 = (x[0] - x[2]).norm();
  const double c12 = (x[1] - x[2]).norm();
  const double longest = std::max({c01, c02, c12});
  const double twice_area = (x[1] - x[0]).cross(x[2] - x[0]).norm();
  if (!(longest > 0.0) || twice_area / longest <= 1e-9) {
    out.status = P3PStatus::kCollinear;
    return out;
  }
  for (int a = 0; a < 3; ++a) {
    for (int b = a + 1; b < 3; ++b) {
      if (j[a].cross(j[b]).norm() < 1e-12) {
        out.status = P3PStatus::kCoincidentRays;
        return out;
      }
    }
  }

  // Side lengths opposite each vertex, normalized by the longest side.
  const double a = c12 / longest, b = c02 / longest, c = c01 / longest;
  const double a2 = a * a, b2 = b * b, c2 = c * c;
  const double cos_a = j[1].dot(j[2]);
  const double cos_b = j[0].dot(j[2]);
  const double cos_g = j[0].dot(j[1]);

  // With u = s2/s1 and v = s3/s1:  u = N(v) / D(v), and substituting into
  // b^2 (1 + u^2 - 2 u cos_g) = c^2 P(v) gives a quartic in v.
  const Poly pv{1.0, -2.0 * cos_b, 1.0};
  const Poly nv{(a2 - c2) + b2, -2.0 * cos_b * (a2 - c2), (a2 - c2) - b2};
  const Poly dv{2.0 * b2 * cos_g, -2.0 * b2 * cos_a};
  const Poly dd = mul(dv, dv);
  Poly quartic = mul(dd, Poly{b2});
  quartic = add(quartic, mul(nv, nv), b2);
  quartic = add(quartic, mul(nv, dv), -2.0 * b2 * cos_g);
  quartic = add(quartic, mul(pv, dd), -c2);

  const Eigen::Vector3d centroid_x = (x[0] + x[1] + x[2]) / 3.0;
  for (double v : real_roots(quartic)) {
    const double d = eval(dv, v);
    if (std::abs(d) < 1e-14) continue;
    const double u = eval(nv, v) / d;
    const double p = eval(pv, v);
    if (!(p > 0.0)) continue;
    const double s1 = b / std::sqrt(p) * longest;
    const double s2 = u * s1, s3 = v * s1;
    if (!(s1 > 0.0 && s2 > 0.0 && s3 > 0.0)) continue;

    const std::array<Eigen::Vector3d, 3> y{s1 * j[0], s2 * j[1], s3 * j[2]};
    const Eigen::Vector3d centroid_y = (y[0] + y[1] + y[2]) / 3.0;
    Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
    for (int i = 0; i < 3; ++i) h += (x[i] - centroid_x) * (y[i] - centroid_y).transpose();
    const Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d fix = Eigen::Matrix3d::Identity();
    fix(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0 ? -1.0 : 1.0;
    Eigen::Matrix3d r = svd.matrixV() * fix * svd.matrixU().transpose();
    Eigen::Vector3d t = centroid_y - r * centroid_x;
    refine(r, t, x, m);

    const Pose pose = Pose::from_rt(r, t);
    bool good = is_rotation(pose.rotation, 1e-9);
    for (int i = 0; i < 3 && good; ++i) {
      good = reprojection_error(pose, k, corrs[i].pixel, x[i]) < 1e-6;
    }
    if (!good) continue;
    const bool duplicate = std::any_of(out.poses.begin(), out.poses.end(), [&](const Pose& q) {
      return (q.rotation - pose.rotation).norm() < 1e-9 && (q.center - pose.center).norm() < 1e-9 * (1.0 + pose.center.norm());
    });
    if (!duplicate && out.poses.size() < 4) out.poses.push_back(pose);
  }
  out.status = out.poses.empty() ? P3PStatus::kNoSolution : P3PStatus::kOk;
  return out;
}

}  // namespace hsc
