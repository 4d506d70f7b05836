#pragma once

// Matrix-level group computations for the Euclidean and sphere models.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "equizeta/errors.hpp"
#include "equizeta/special_functions.hpp"

namespace equizeta {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Reduce an angle to (-pi, pi].
inline double normalize_angle(double theta) {
  double t = std::remainder(theta, two_pi);
  if (t <= -pi) t += two_pi;
  return t;
}

/// True when theta is in target + 2 pi Z within tol.
inline bool angle_congruent(double theta, double target, double tol) {
  return std::abs(normalize_angle(theta - target)) <= tol;
}

struct RotationBlock {
  double theta = 0.0;

  explicit RotationBlock(double t = 0.0) : theta(normalize_angle(t)) {}

  Eigen::Matrix2d matrix() const {
    Eigen::Matrix2d m;
    m << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    return m;
  }
};

/// diag(r(t_1), ..., r(t_k), 1, ..., 1) in SO(n); needs 2k <= n.
inline MatrixXd block_rotation(int n, const std::vector<double>& thetas) {
  require(static_cast<int>(2 * thetas.size()) <= n, Errc::domain,
          "block_rotation: too many angles for the dimension");
  MatrixXd m = MatrixXd::Identity(n, n);
  for (std::size_t i = 0; i < thetas.size(); ++i)
    m.block<2, 2>(2 * i, 2 * i) = RotationBlock(thetas[i]).matrix();
  return m;
}

inline bool is_special_orthogonal(const MatrixXd& r, double tol) {
  if (r.rows() != r.cols() || r.rows() == 0) return false;
  const auto n = r.rows();
  double dev = (r.transpose() * r - MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
  return dev <= tol && std::abs(r.determinant() - 1.0) <= tol;
}

struct KernelInfo {
  int kernel_dim = 0;
  std::optional<VectorXd> axis;
  double smallest_excluded = 0.0;  // witness: first singular value above tol
};

/// Fix the sign of v so that its first nonzero component is positive.
inline VectorXd canonical_sign(VectorXd v, double tol = 1e-12) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > tol) {
      if (v(i) < 0) v = -v;
      break;
    }
  }
  return v;
}

/// dim ker(r - I) and, when it is one, the unit axis. Singular values of r - I
/// in (tol, 100 tol] are rejected rather than rounded either way.
inline KernelInfo axis_and_kernel(const MatrixXd& r, double tol = 1e-10) {
  require(r.rows() == r.cols() && r.rows() > 0, Errc::domain, "axis_and_kernel: square matrix required");
  const auto n = r.rows();
  double dev = (r.transpose() * r - MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
  require(dev <= std::max(tol, 1e-12), Errc::domain, "axis_and_kernel: matrix is not orthogonal");

  Eigen::JacobiSVD<MatrixXd> svd(r - MatrixXd::Identity(n, n), Eigen::ComputeFullV);
  const VectorXd& s = svd.singularValues();
  KernelInfo info;
  info.smallest_excluded = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) <= tol) {
      ++info.kernel_dim;
    } else {
      require(s(i) > 100.0 * tol, Errc::domain,
              "axis_and_kernel: eigenvalue 1 multiplicity is numerically ambiguous");
      info.smallest_excluded = std::min(info.smallest_excluded, s(i));
    }
  }
  if (info.kernel_dim == 1) {
    VectorXd v = svd.matrixV().col(n - 1);
    info.axis = canonical_sign(v / v.norm());
  }
  return info;
}

/// Orthogonal rotation with an optional distinguished axis (dim ker(r - I) = 1).
struct AxisRotation {
  int n = 0;
  MatrixXd matrix;
  std::optional<VectorXd> axis;

  static AxisRotation from_matrix(const MatrixXd& m, double tol = 1e-10) {
    require(is_special_orthogonal(m, std::max(tol, 1e-12)), Errc::domain,
            "AxisRotation: matrix must lie in SO(n)");
    AxisRotation a;
    a.n = static_cast<int>(m.rows());
    a.matrix = m;
    a.axis = axis_and_kernel(m, tol).axis;
    return a;
  }

  /// diag(r(theta), ..., 1) with the rotation in the first plane and e_n fixed.
  static AxisRotation planar(int n, double theta) {
    require(n >= 2, Errc::domain, "AxisRotation: dimension must be at least 2");
    return from_matrix(block_rotation(n, {theta}));
  }

  const VectorXd& v0() const {
    require(axis.has_value(), Errc::domain, "AxisRotation: no one-dimensional axis");
    return *axis;
  }
};

/// Columns span the orthogonal complement of the unit vector v.
inline MatrixXd orthogonal_complement(const VectorXd& v) {
  const auto n = v.size();
  Eigen::HouseholderQR<MatrixXd> qr{MatrixXd(v)};
  MatrixXd q = qr.householderQ() * MatrixXd::Identity(n, n);
  return q.rightCols(n - 1);
}

/// The unique w orthogonal to v0 with (I - r) w = w_prime.
inline VectorXd solve_transverse(const AxisRotation& r, const VectorXd& w_prime) {
  const VectorXd& v0 = r.v0();
  require(w_prime.size() == r.n, Errc::domain, "solve_transverse: dimension mismatch");
  require(std::abs(w_prime.dot(v0)) <= 1e-10, Errc::domain,
          "solve_transverse: w_prime must be orthogonal to the axis");
  if (w_prime.norm() == 0.0) return VectorXd::Zero(r.n);

  MatrixXd b = orthogonal_complement(v0);
  MatrixXd m = b.transpose() * (MatrixXd::Identity(r.n, r.n) - r.matrix) * b;
  Eigen::FullPivLU<MatrixXd> lu(m);
  require(lu.isInvertible() && std::abs(lu.determinant()) > 1e-12, Errc::singular,
          "solve_transverse: (I - r) is singular on the axis complement");
  VectorXd w = b * lu.solve(b.transpose() * w_prime);
  double residual = ((MatrixXd::Identity(r.n, r.n) - r.matrix) * w - w_prime).norm();
  require(residual < 1e-10 * std::max(1.0, w_prime.norm()), Errc::singular,
          "solve_transverse: residual check failed");
  return w;
}

/// x -> r x + y.
struct EuclideanMotion {
  VectorXd y;
  MatrixXd r;

  VectorXd apply(const VectorXd& x) const { return r * x + y; }
  VectorXd rotate(const VectorXd& v) const { return r * v; }

  EuclideanMotion compose(const EuclideanMotion& o) const { return {r * o.y + y, r * o.r}; }
  EuclideanMotion inverse() const {
    MatrixXd rt = r.transpose();
    return {-(rt * y), rt};
  }
  /// h g h^{-1}
  static EuclideanMotion conjugate(const EuclideanMotion& h, const EuclideanMotion& g) {
    return h.compose(g).compose(h.inverse());
  }
};

/// Does the geodesic through (x, v) close up to g at time l, i.e. x + l v = g x and r v = v?
inline bool euclidean_fixed_condition(const EuclideanMotion& g, double l, const VectorXd& x,
                                      const VectorXd& v) {
  require(std::abs(v.norm() - 1.0) <= 1e-10, Errc::domain,
          "euclidean_fixed_condition: v must be a unit vector");
  if ((g.r * v - v).norm() > 1e-9) return false;
  VectorXd w = x - x.dot(v) * v;
  const auto n = g.r.rows();
  VectorXd lhs = (g.r - MatrixXd::Identity(n, n)) * w;
  return (lhs - (l * v - g.y)).norm() <= 1e-9;
}

struct PoincareData {
  double l = 0.0;
  int det_sign = 1;
  double det_abs = 0.0;
  double det_restricted_squared = 0.0;  // second route, det((I - r)|v0-perp)^2
};

/// det(1 - P) for the geodesic flow on R^n x S^{n-1}. In the basis (v0-perp position,
/// v0-perp direction) 1 - P is block upper triangular with (I - r) on the diagonal.
inline PoincareData poincare_determinant_euclidean(const AxisRotation& r, double l) {
  KernelInfo k = axis_and_kernel(r.matrix);
  require(k.kernel_dim == 1, Errc::domain,
          "poincare_determinant_euclidean: ker(r - I) must be one-dimensional");
  const int n = r.n;
  MatrixXd b = orthogonal_complement(*k.axis);
  MatrixXd i_minus_r = b.transpose() * (MatrixXd::Identity(n, n) - r.matrix) * b;
  MatrixXd shear = -l * (b.transpose() * r.matrix * b);

  const int m = n - 1;
  MatrixXd one_minus_p = MatrixXd::Zero(2 * m, 2 * m);
  one_minus_p.topLeftCorner(m, m) = i_minus_r;
  one_minus_p.topRightCorner(m, m) = shear;
  one_minus_p.bottomRightCorner(m, m) = i_minus_r;

  PoincareData out;
  out.l = l;
  double assembled = one_minus_p.determinant();
  double restricted = i_minus_r.determinant();
  out.det_restricted_squared = restricted * restricted;
  require(std::abs(assembled - out.det_restricted_squared) <= 1e-10 * std::max(1.0, std::abs(assembled)),
          Errc::singular, "poincare_determinant_euclidean: assembled and restricted routes disagree");
  require(assembled != 0.0, Errc::domain, "poincare_determinant_euclidean: degenerate orbit");
  out.det_sign = assembled > 0 ? 1 : -1;
  out.det_abs = std::abs(assembled);
  return out;
}

namespace detail {

inline std::vector<cplx> eigenvalues_of(const MatrixXd& a) {
  Eigen::EigenSolver<MatrixXd> es(a, false);
  std::vector<cplx> out;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) out.push_back(es.eigenvalues()(i));
  return out;
}

// index of the unique eigenvalue within tol of 1
inline std::size_t unit_eigenvalue_index(const std::vector<cplx>& ev, double tol) {
  std::size_t count = 0, idx = 0;
  for (std::size_t i = 0; i < ev.size(); ++i) {
    if (std::abs(ev[i] - 1.0) <= tol) {
      ++count;
      idx = i;
    }
  }
  require(count == 1, Errc::domain, "signed_wedge_trace: eigenvalue 1 must be simple");
  return idx;
}

}  // namespace detail

/// Elementary symmetric polynomials e_0..e_n of the eigenvalues, i.e. tr of the exterior powers.
inline std::vector<cplx> exterior_power_traces(const MatrixXd& a) {
  std::vector<cplx> e{1.0};
  for (cplx lam : detail::eigenvalues_of(a)) {
    e.push_back(0.0);
    for (std::size_t j = e.size() - 1; j >= 1; --j) e[j] += lam * e[j - 1];
  }
  return e;
}

/// sum_j (-1)^j j tr(wedge^j A), for A with a simple eigenvalue 1.
inline cplx signed_wedge_trace(const MatrixXd& a, double tol = 1e-8) {
  detail::unit_eigenvalue_index(detail::eigenvalues_of(a), tol);
  std::vector<cplx> e = exterior_power_traces(a);
  cplx s = 0.0;
  for (std::size_t j = 1; j < e.size(); ++j) s += (j % 2 ? -1.0 : 1.0) * static_cast<double>(j) * e[j];
  return s;
}

/// -det((1 - A) on V / ker(1 - A)), the closed form of signed_wedge_trace.
inline cplx quotient_determinant(const MatrixXd& a, double tol = 1e-8) {
  auto ev = detail::eigenvalues_of(a);
  std::size_t skip = detail::unit_eigenvalue_index(ev, tol);
  cplx p = 1.0;
  for (std::size_t i = 0; i < ev.size(); ++i)
    if (i != skip) p *= 1.0 - ev[i];
  return -p;
}

// Linearised return maps of the sphere geodesic flows, as Ad(exp(-l X0)) in the
// left trivialisation, X0 = E12.

/// so(3) in the basis (E12, E13, E23).
inline MatrixXd adjoint_return_so3(double l) {
  MatrixXd a = MatrixXd::Identity(3, 3);
  a.block<2, 2>(1, 1) = RotationBlock(-l).matrix();
  return a;
}

/// so(4)/h with h = span(E34), basis (E12, E13, E23, E14, E24).
inline MatrixXd adjoint_return_so4_quotient(double l) {
  MatrixXd a = MatrixXd::Identity(5, 5);
  a.block<2, 2>(1, 1) = RotationBlock(-l).matrix();
  a.block<2, 2>(3, 3) = RotationBlock(-l).matrix();
  return a;
}

/// sgn det(1 - P) via the signed wedge trace (which equals -det on the quotient).
inline int poincare_sign(const MatrixXd& return_map) {
  double v = -signed_wedge_trace(return_map).real();
  require(v != 0.0, Errc::domain, "poincare_sign: degenerate return map");
  return v > 0 ? 1 : -1;
}

// w_{+1} = I, w_{-1} = [[0,1],[1,0]]; r(eps t) = w_eps r(t) w_eps.
inline Eigen::Matrix2d reflection_w(int eps) {
  Eigen::Matrix2d w;
  if (eps > 0)
    w.setIdentity();
  else
    w << 0, 1, 1, 0;
  return w;
}

struct SphereType1 {
  int eps;
  Eigen::Matrix2d a, d;
};
struct SphereType2 {
  int eps;
  Eigen::Matrix2d b, c;
};
struct NotPeriodic {};
using SphereClass = std::variant<SphereType1, SphereType2, NotPeriodic>;

/// Classify x in SO(4) with x^{-1} g x = diag(r(l), h), g = diag(r(theta1), r(theta2)).
/// Block diagonal x gives l = eps theta1; block antidiagonal x = [[0, b w_eps], [c w_eps, 0]]
/// gives l = eps theta2. Both block patterns must carry the same eps for det x = +1.
inline SphereClass sphere_fixed_classifier(const Eigen::Matrix4d& x, double theta1, double theta2,
                                           double l, double tol = 1e-10) {
  require(is_special_orthogonal(x, std::max(tol, 1e-12)), Errc::domain,
          "sphere_fixed_classifier: x must lie in SO(4)");
  const Eigen::Matrix4d g = block_rotation(4, {theta1, theta2});
  const Eigen::Matrix2d x11 = x.topLeftCorner<2, 2>(), x12 = x.topRightCorner<2, 2>();
  const Eigen::Matrix2d x21 = x.bottomLeftCorner<2, 2>(), x22 = x.bottomRightCorner<2, 2>();

  auto conj_ok = [&](double h_angle) {
    Eigen::Matrix4d target = block_rotation(4, {l, h_angle});
    return (x.transpose() * g * x - target).cwiseAbs().maxCoeff() <= 1e-8;
  };

  if (x12.cwiseAbs().maxCoeff() <= tol && x21.cwiseAbs().maxCoeff() <= tol) {
    int eps = x11.determinant() > 0 ? 1 : -1;
    if (angle_congruent(l, eps * theta1, tol) && conj_ok(eps * theta2)) {
      Eigen::Matrix2d w = reflection_w(eps);
      return SphereType1{eps, x11 * w, x22 * w};
    }
    return NotPeriodic{};
  }
  if (x11.cwiseAbs().maxCoeff() <= tol && x22.cwiseAbs().maxCoeff() <= tol) {
    int eps = x12.determinant() > 0 ? 1 : -1;
    if (angle_congruent(l, eps * theta2, tol) && conj_ok(eps * theta1)) {
      Eigen::Matrix2d w = reflection_w(eps);
      return SphereType2{eps, x12 * w, x21 * w};
    }
    return NotPeriodic{};
  }
  return NotPeriodic{};
}

}  // namespace equizeta
