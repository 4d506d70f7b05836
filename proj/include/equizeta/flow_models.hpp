#pragma once

// The worked geometries: group elements, delocalised length spectra, orbit data and
// nondegeneracy diagnostics. Periods are stored with the G/Z coset integral already
// folded in, so the zeta engine only ever sees (l, sign, holonomy, period).

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "equizeta/errors.hpp"
#include "equizeta/group_geometry.hpp"
#include "equizeta/special_functions.hpp"

namespace equizeta {

struct LineModel {
  cplx alpha{};
};
struct IntegerLatticeModel {
  cplx alpha{};
};
struct CircleModel {
  cplx alpha{};
};
/// R^n x S^{n-1} with H = (a Z v0 + Gamma') x| <r>, r of finite order `order`.
struct EuclideanLatticeModel {
  int n = 3;
  double a = 1.0;
  AxisRotation rotation;
  int order = 1;
  cplx alpha_v0{};
};
struct Sphere2Model {};
struct Sphere3Model {};

using FlowModel = std::variant<LineModel, IntegerLatticeModel, CircleModel, EuclideanLatticeModel,
                               Sphere2Model, Sphere3Model>;

struct LineElement {
  double g = 0.0;
};
struct LatticeElement {
  long g = 0;
};
struct CircleElement {
  double r0 = 0.0;  // 0 is the identity class
};
struct EuclideanElement {
  long l0 = 1;
  VectorXd w_prime;  // empty means zero
  int m = 1;
};
struct Sphere2Element {
  double theta = 1.0;
};
struct Sphere3Element {
  double theta1 = 1.0;
  double theta2 = std::numbers::sqrt2;
};

using GroupElementSpec = std::variant<LineElement, LatticeElement, CircleElement, EuclideanElement,
                                      Sphere2Element, Sphere3Element>;

struct OrbitContribution {
  double l = 0.0;
  int sign = 1;
  cplx holonomy = 1.0;
  double period = 1.0;
};

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

inline std::string model_name(const FlowModel& m) {
  return std::visit(overloaded{[](const LineModel&) { return std::string("line"); },
                               [](const IntegerLatticeModel&) { return std::string("lattice"); },
                               [](const CircleModel&) { return std::string("circle"); },
                               [](const EuclideanLatticeModel&) { return std::string("euclid"); },
                               [](const Sphere2Model&) { return std::string("sphere2"); },
                               [](const Sphere3Model&) { return std::string("sphere3"); }},
                    m);
}

inline cplx model_alpha(const FlowModel& m) {
  return std::visit(overloaded{[](const LineModel& x) { return x.alpha; },
                               [](const IntegerLatticeModel& x) { return x.alpha; },
                               [](const CircleModel& x) { return x.alpha; },
                               [](const EuclideanLatticeModel& x) { return x.alpha_v0; },
                               [](const auto&) { return cplx{}; }},
                    m);
}

/// Euclidean model with r = diag(r(theta), ..., r(theta), 1) fixing e_n, n odd.
/// theta must be 2 pi p / order with gcd(p, order) = 1; inputs within 1e-6 are snapped.
inline EuclideanLatticeModel make_euclidean_model(int n, double a, double theta, int order, cplx alpha_v0) {
  require(n >= 3 && n % 2 == 1, Errc::domain, "euclid: n must be odd and at least 3");
  require(a > 0.0 && std::isfinite(a), Errc::domain, "euclid: a must be positive");
  require(order >= 1, Errc::domain, "euclid: order must be positive");
  double step = two_pi / order;
  long p = std::lround(theta / step);
  require(std::abs(theta - p * step) <= 1e-6, Errc::domain,
          "euclid: theta must be 2 pi p / order for the stated order");
  long pm = ((p % order) + order) % order;
  require(std::gcd(pm, static_cast<long>(order)) == 1, Errc::domain,
          "euclid: rotation order differs from the stated order");
  std::vector<double> thetas((n - 1) / 2, p * step);
  EuclideanLatticeModel mdl;
  mdl.n = n;
  mdl.a = a;
  mdl.order = order;
  mdl.alpha_v0 = alpha_v0;
  mdl.rotation = AxisRotation::from_matrix(block_rotation(n, thetas));
  MatrixXd pw = MatrixXd::Identity(n, n);
  for (int i = 0; i < order; ++i) pw = pw * mdl.rotation.matrix;
  require((pw - MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-10, Errc::domain,
          "euclid: r^order != I");
  return mdl;
}

inline MatrixXd matrix_power(const MatrixXd& r, int m) {
  const auto n = r.rows();
  MatrixXd base = m >= 0 ? r : MatrixXd(r.transpose());
  MatrixXd out = MatrixXd::Identity(n, n);
  for (int i = 0; i < std::abs(m); ++i) out = out * base;
  return out;
}

inline VectorXd transverse_translation(const EuclideanLatticeModel& mdl, const EuclideanElement& e) {
  if (e.w_prime.size() == 0) return VectorXd::Zero(mdl.n);
  require(e.w_prime.size() == mdl.n, Errc::domain, "euclid: w_prime has the wrong dimension");
  return e.w_prime;
}

/// g = (a l0 v0 + w', r^m) as an affine motion.
inline EuclideanMotion euclidean_motion(const EuclideanLatticeModel& mdl, const EuclideanElement& e) {
  VectorXd v0 = VectorXd::Zero(mdl.n);
  v0(mdl.n - 1) = 1.0;
  if (mdl.rotation.axis) v0 = *mdl.rotation.axis;
  return {mdl.a * static_cast<double>(e.l0) * v0 + transverse_translation(mdl, e),
          matrix_power(mdl.rotation.matrix, e.m)};
}

/// {+-(y, v0)} for a motion whose rotation has a one-dimensional axis.
inline std::vector<double> length_spectrum_of_motion(const EuclideanMotion& g, double window) {
  KernelInfo k = axis_and_kernel(g.r);
  require(k.kernel_dim == 1, Errc::domain, "euclid: rotation part must have a one-dimensional axis");
  double l = std::abs(g.y.dot(*k.axis));
  if (l <= 1e-12 || l > window) return {};
  return {-l, l};
}

struct SpectrumDetail {
  std::vector<double> values;
  std::vector<int> multiplicity;
  int collisions = 0;
};

namespace detail {

// every element of offset + 2 pi Z inside [-L, L], excluding 0
inline void append_shifted_family(std::vector<double>& out, double offset, double window) {
  long lo = static_cast<long>(std::ceil((-window - offset) / two_pi));
  long hi = static_cast<long>(std::floor((window - offset) / two_pi));
  for (long k = lo; k <= hi; ++k) {
    double v = offset + two_pi * static_cast<double>(k);
    if (std::abs(v) > 1e-12 && std::abs(v) <= window) out.push_back(v);
  }
}

inline SpectrumDetail dedupe(std::vector<double> raw) {
  std::sort(raw.begin(), raw.end());
  SpectrumDetail d;
  for (double v : raw) {
    if (!d.values.empty() && std::abs(v - d.values.back()) <= 1e-10) {
      ++d.multiplicity.back();
      ++d.collisions;
    } else {
      d.values.push_back(v);
      d.multiplicity.push_back(1);
    }
  }
  return d;
}

inline std::vector<double> sphere_offsets(const GroupElementSpec& g) {
  if (auto* s = std::get_if<Sphere2Element>(&g)) return {s->theta, -s->theta};
  const auto& s3 = std::get<Sphere3Element>(g);
  return {s3.theta1, -s3.theta1, s3.theta2, -s3.theta2};
}

template <class T>
const T& element_as(const GroupElementSpec& g, const char* model) {
  const T* p = std::get_if<T>(&g);
  require(p != nullptr, Errc::domain, std::string("group element does not match model ") + model);
  return *p;
}

}  // namespace detail

/// Sorted spectrum in 0 < |l| <= window, with collision bookkeeping.
inline SpectrumDetail length_spectrum_detail(const FlowModel& model, const GroupElementSpec& g,
                                             double window) {
  require(window > 0.0 && std::isfinite(window), Errc::domain, "length_spectrum: window must be positive");
  return std::visit(
      overloaded{
          [&](const LineModel&) {
            double x = detail::element_as<LineElement>(g, "line").g;
            std::vector<double> v;
            if (x != 0.0 && std::abs(x) <= window) v.push_back(x);
            return detail::dedupe(v);
          },
          [&](const IntegerLatticeModel&) {
            double x = static_cast<double>(detail::element_as<LatticeElement>(g, "lattice").g);
            std::vector<double> v;
            if (x != 0.0 && std::abs(x) <= window) v.push_back(x);
            return detail::dedupe(v);
          },
          [&](const CircleModel&) {
            double r0 = detail::element_as<CircleElement>(g, "circle").r0;
            require(r0 >= 0.0 && r0 < 1.0, Errc::domain, "circle: r0 must lie in [0, 1)");
            std::vector<double> v;
            long lo = static_cast<long>(std::ceil(-window - r0));
            long hi = static_cast<long>(std::floor(window - r0));
            for (long n = lo; n <= hi; ++n) {
              double l = static_cast<double>(n) + r0;
              if (l != 0.0) v.push_back(l);
            }
            return detail::dedupe(v);
          },
          [&](const EuclideanLatticeModel& m) {
            const auto& e = detail::element_as<EuclideanElement>(g, "euclid");
            require(e.l0 != 0, Errc::domain, "euclid: l0 must be a nonzero integer");
            return detail::dedupe(length_spectrum_of_motion(euclidean_motion(m, e), window));
          },
          [&](const auto&) {
            std::vector<double> v;
            for (double off : detail::sphere_offsets(g)) detail::append_shifted_family(v, off, window);
            return detail::dedupe(v);
          }},
      model);
}

inline std::vector<double> length_spectrum(const FlowModel& model, const GroupElementSpec& g, double window) {
  return length_spectrum_detail(model, g, window).values;
}

/// Orbit data at one spectrum point.
inline std::vector<OrbitContribution> orbit_contributions(const FlowModel& model, const GroupElementSpec& g,
                                                          double l) {
  auto in_spectrum = [&] {
    for (double v : length_spectrum(model, g, std::abs(l) + 1e-9))
      if (std::abs(v - l) <= 1e-10) return true;
    return false;
  };
  require(l != 0.0 && in_spectrum(), Errc::domain, "orbit_contributions: l is not in the length spectrum");

  return std::visit(
      overloaded{
          [&](const LineModel& m) {
            return std::vector<OrbitContribution>{{l, 1, std::exp(m.alpha * l), 1.0}};
          },
          [&](const IntegerLatticeModel& m) {
            return std::vector<OrbitContribution>{{l, 1, std::exp(m.alpha * l), 1.0}};
          },
          [&](const CircleModel& m) {
            return std::vector<OrbitContribution>{{l, 1, std::exp(m.alpha * l), 1.0}};
          },
          [&](const EuclideanLatticeModel& m) {
            const auto& e = std::get<EuclideanElement>(g);
            EuclideanMotion motion = euclidean_motion(m, e);
            AxisRotation rot = AxisRotation::from_matrix(motion.r);
            PoincareData pd = poincare_determinant_euclidean(rot, l);
            // the holonomy does not depend on the orientation of the orbit
            double L = m.a * static_cast<double>(e.l0);
            return std::vector<OrbitContribution>{
                {l, pd.det_sign, std::exp(L * m.alpha_v0), m.a / static_cast<double>(m.order)}};
          },
          [&](const auto&) {
            std::vector<OrbitContribution> out;
            bool s3 = std::holds_alternative<Sphere3Model>(model);
            int sign = poincare_sign(s3 ? adjoint_return_so4_quotient(l) : adjoint_return_so3(l));
            for (double off : detail::sphere_offsets(g))
              if (angle_congruent(l, off, 1e-10)) out.push_back({l, sign, 1.0, two_pi});
            return out;
          }},
      model);
}

// ---- chi-primitive periods -------------------------------------------------

enum class CutoffKind { constant, smoothed_indicator, raised_cosine, gaussian };

/// Nonnegative profile centred at an off-axis point. The partition property is imposed
/// afterwards by dividing through the sum over group translates.
struct CutoffProfile {
  CutoffKind kind = CutoffKind::smoothed_indicator;
  double radius = 1.3;     // support radius (Gaussian: truncation radius is derived)
  double smoothing = 0.4;  // transition width of the smoothed indicator
  double width = 0.35;     // Gaussian standard deviation
  std::vector<double> center{0.23, -0.11, 0.31};
};

struct QuadratureSpec {
  int panels = 96;
  double tol = 1e-10;  // tail certification for untruncated profiles
};

namespace detail {

inline double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

inline double profile_support(const CutoffProfile& p, double tol) {
  if (p.kind == CutoffKind::gaussian) return p.width * std::sqrt(2.0 * std::log(1.0 / tol)) + p.width;
  return p.radius;
}

inline double profile_value(const CutoffProfile& p, double dist) {
  switch (p.kind) {
    case CutoffKind::constant: return 1.0;
    case CutoffKind::smoothed_indicator: return smooth_step((p.radius - dist) / p.smoothing);
    case CutoffKind::raised_cosine: return dist >= p.radius ? 0.0 : 0.5 * (1.0 + std::cos(pi * dist / p.radius));
    case CutoffKind::gaussian: return std::exp(-0.5 * dist * dist / (p.width * p.width));
  }
  return 0.0;
}

template <class F>
double composite_gauss(F&& f, double lo, double hi, int panels) {
  double h = (hi - lo) / panels, total = 0.0;
  for (int i = 0; i < panels; ++i)
    total += boost::math::quadrature::gauss<double, 10>::integrate(f, lo + i * h, lo + (i + 1) * h);
  return total;
}

// 1-D models: H = R (continuous translates) or Z acting on the line by translation.
inline double period_on_line(const CutoffProfile& p, const QuadratureSpec& q, bool discrete) {
  const double c = p.center.empty() ? 0.0 : p.center[0];
  const double R = profile_support(p, q.tol);
  auto phi = [&](double x) { return profile_value(p, std::abs(x - c)); };
  auto translate_sum = [&](double x) {
    if (!discrete) return composite_gauss([&](double t) { return phi(x - t); }, x - c - R, x - c + R, q.panels);
    double s = 0.0;
    for (long k = static_cast<long>(std::floor(x - c - R)); k <= static_cast<long>(std::ceil(x - c + R)); ++k)
      s += phi(x - static_cast<double>(k));
    return s;
  };
  require(translate_sum(c) > 0.0, Errc::domain, "chi period: profile translates do not cover");
  // the orbit is the whole line; chi vanishes outside [c - R, c + R]
  if (!discrete) {
    double norm = translate_sum(0.0);
    return composite_gauss([&](double s) { return phi(s) / norm; }, c - R, c + R, q.panels);
  }
  return composite_gauss([&](double s) { return phi(s) / translate_sum(s); }, c - R, c + R, q.panels);
}

inline Eigen::Matrix<double, 3, 2> transverse_lattice_basis(int order) {
  Eigen::Matrix<double, 3, 2> b = Eigen::Matrix<double, 3, 2>::Zero();
  b(0, 0) = 1.0;
  if (order == 3 || order == 6) {
    b(0, 1) = 0.5;
    b(1, 1) = std::sqrt(3.0) / 2.0;
  } else {
    b(1, 1) = 1.0;
  }
  return b;
}

// sum over h in H / Z of the integral of chi along h gamma, with gamma through (w, +-v0).
inline double period_euclidean(const EuclideanLatticeModel& m, const EuclideanElement& e, int orbit_sign,
                               const CutoffProfile& p, const QuadratureSpec& q) {
  require(m.n == 3, Errc::domain, "chi period: numeric Euclidean periods are implemented for n = 3");
  require(m.order == 1 || m.order == 2 || m.order == 3 || m.order == 4 || m.order == 6, Errc::domain,
          "chi period: order must be crystallographic");
  require(p.kind != CutoffKind::constant, Errc::domain, "chi period: constant profile is not integrable here");
  require(p.center.size() == 3, Errc::domain, "chi period: profile centre must be a 3-vector");

  EuclideanMotion g = euclidean_motion(m, e);
  AxisRotation rm = AxisRotation::from_matrix(g.r);
  const Eigen::Vector3d v0 = rm.v0();
  const Eigen::Vector3d w = solve_transverse(rm, g.y - g.y.dot(v0) * v0);
  const Eigen::Vector3d c(p.center[0], p.center[1], p.center[2]);
  const double R = profile_support(p, q.tol);
  const auto basis = transverse_lattice_basis(m.order);
  const double a = m.a;

  std::vector<Eigen::Matrix3d> rots;
  for (int j = 0; j < m.order; ++j) rots.push_back(matrix_power(m.rotation.matrix, j));

  // lattice points gamma' of Gamma' with |gamma' - target_perp| < radius
  const int span = static_cast<int>(std::ceil(R * 1.2)) + 1;
  const Eigen::Matrix<double, 2, 3> pinv = (basis.transpose() * basis).inverse() * basis.transpose();
  auto transverse_points = [&](const Eigen::Vector3d& target, double radius) {
    std::vector<Eigen::Vector3d> pts;
    Eigen::Vector3d tp = target - target.dot(v0) * v0;
    Eigen::Vector2d coords = pinv * tp;
    for (int i = -span; i <= span; ++i)
      for (int j = -span; j <= span; ++j) {
        Eigen::Vector3d gp = basis * Eigen::Vector2d(std::round(coords(0)) + i, std::round(coords(1)) + j);
        if ((gp - tp).norm() < radius) pts.push_back(gp);
      }
    return pts;
  };
  auto phi = [&](const Eigen::Vector3d& x) { return profile_value(p, (x - c).norm()); };
  // S(x) = sum_{j, gamma} phi(r^{-j}(x - gamma)) = sum_j sum_gamma phi over |x - gamma - r^j c| < R
  auto translate_sum = [&](const Eigen::Vector3d& x) {
    double s = 0.0;
    for (const auto& rj : rots) {
      Eigen::Vector3d target = x - rj * c;
      double along = target.dot(v0);
      long lo = static_cast<long>(std::floor((along - R) / a)), hi = static_cast<long>(std::ceil((along + R) / a));
      for (const auto& gp : transverse_points(target, R))
        for (long k = lo; k <= hi; ++k) {
          Eigen::Vector3d gamma = gp + a * static_cast<double>(k) * v0;
          s += phi(rj.transpose() * (x - gamma));
        }
    }
    return s;
  };

  double total = 0.0;
  for (const auto& gp : transverse_points(c - w, R)) {
    Eigen::Vector3d base = w + gp;
    double centre = orbit_sign * (c - base).dot(v0);
    auto integrand = [&](double s) {
      Eigen::Vector3d x = base + orbit_sign * s * v0;
      double ph = phi(x);
      if (ph == 0.0) return 0.0;
      double S = translate_sum(x);
      require(S > 0.0, Errc::domain, "chi period: translate sum vanished");
      return ph / S;
    };
    total += composite_gauss(integrand, centre - R, centre + R, q.panels);
  }
  return total;
}

}  // namespace detail

/// Numerical chi-primitive period (coset-summed for the Euclidean model). orbit_id 0 is
/// the orbit through +v0, 1 the one through -v0; other models have a single orbit.
inline double chi_primitive_period_numeric(const FlowModel& model, const GroupElementSpec& g, int orbit_id,
                                           const CutoffProfile& profile, const QuadratureSpec& quad = {}) {
  require(quad.panels >= 1, Errc::domain, "chi period: at least one panel required");
  return std::visit(
      overloaded{
          [&](const LineModel&) {
            detail::element_as<LineElement>(g, "line");
            require(profile.kind != CutoffKind::constant, Errc::domain, "chi period: constant profile on R");
            return detail::period_on_line(profile, quad, false);
          },
          [&](const IntegerLatticeModel&) {
            detail::element_as<LatticeElement>(g, "lattice");
            require(profile.kind != CutoffKind::constant, Errc::domain, "chi period: constant profile on R");
            return detail::period_on_line(profile, quad, true);
          },
          [&](const CircleModel&) {
            detail::element_as<CircleElement>(g, "circle");
            // compact group of unit volume acting on a circle of length 1
            const double c = profile.center.empty() ? 0.0 : profile.center[0];
            auto phi = [&](double x) {
              double d = std::abs(std::remainder(x - c, 1.0));
              return profile.kind == CutoffKind::constant ? 1.0 : detail::profile_value(profile, d);
            };
            double norm = detail::composite_gauss(phi, 0.0, 1.0, quad.panels);
            require(norm > 0.0, Errc::domain, "chi period: profile vanishes identically");
            return detail::composite_gauss([&](double s) { return phi(s) / norm; }, 0.0, 1.0, quad.panels);
          },
          [&](const EuclideanLatticeModel& m) {
            require(orbit_id == 0 || orbit_id == 1, Errc::domain, "chi period: euclid orbit_id is 0 or 1");
            return detail::period_euclidean(m, detail::element_as<EuclideanElement>(g, "euclid"),
                                            orbit_id == 0 ? 1 : -1, profile, quad);
          },
          [&](const auto&) {
            // compact G: chi = 1 after normalising G/Z to unit volume; the curve closes after 2 pi
            require(profile.kind == CutoffKind::constant, Errc::domain,
                    "chi period: sphere models use the constant cutoff");
            return detail::composite_gauss([](double) { return 1.0; }, 0.0, two_pi, quad.panels);
          }},
      model);
}

// ---- diagnostics -------------------------------------------------------------

struct RationalHit {
  std::string quantity;
  long p = 0;
  long q = 1;
};

/// p/q with q <= q_max and |x - p/q| < err, if any.
inline std::optional<std::pair<long, long>> rational_approximation(double x, long q_max = 10'000,
                                                                   double err = 1e-12) {
  for (long q = 1; q <= q_max; ++q) {
    double p = std::round(x * static_cast<double>(q));
    if (std::abs(x - p / static_cast<double>(q)) < err) return std::make_pair(static_cast<long>(p), q);
  }
  return std::nullopt;
}

struct ModelDiagnostics {
  bool nondegenerate = true;
  std::string witness;
  int kernel_dim = -1;  // Euclidean only
  bool dense_powers_ok = true;
  std::vector<RationalHit> rational_hits;
  bool alpha_imaginary = true;
  bool alpha_in_two_pi_i_z = false;
  bool continuation_available = true;
  bool laplacian_kernel_nonzero = false;
  int collisions = 0;
};

inline ModelDiagnostics validate_model(const FlowModel& model, const GroupElementSpec& g) {
  ModelDiagnostics d;
  cplx alpha = model_alpha(model);
  d.alpha_imaginary = std::abs(alpha.real()) <= 1e-14;
  d.alpha_in_two_pi_i_z = in_two_pi_i_lattice(alpha);

  auto check_ratio = [&](const std::string& name, double angle) {
    if (auto hit = rational_approximation(angle / two_pi)) {
      d.dense_powers_ok = false;
      d.rational_hits.push_back({name, hit->first, hit->second});
    }
  };

  std::visit(
      overloaded{
          [&](const LineModel&) { d.witness = "translation flow: no transverse directions"; },
          [&](const IntegerLatticeModel&) { d.witness = "translation flow: no transverse directions"; },
          [&](const CircleModel&) {
            d.witness = "translation flow on the circle: no transverse directions";
            d.continuation_available = !d.alpha_in_two_pi_i_z;
            d.laplacian_kernel_nonzero = d.alpha_in_two_pi_i_z;
          },
          [&](const EuclideanLatticeModel& m) {
            const EuclideanElement* e = std::get_if<EuclideanElement>(&g);
            MatrixXd rm = e ? matrix_power(m.rotation.matrix, e->m) : m.rotation.matrix;
            KernelInfo k = axis_and_kernel(rm);
            d.kernel_dim = k.kernel_dim;
            d.nondegenerate = k.kernel_dim == 1;
            std::ostringstream os;
            os << "dim ker(r^m - I) = " << k.kernel_dim << ", smallest nonzero singular value "
               << k.smallest_excluded;
            d.witness = os.str();
          },
          [&](const Sphere2Model&) {
            const auto* s = std::get_if<Sphere2Element>(&g);
            double th = s ? s->theta : 1.0;
            check_ratio("theta", th);
            double gap = 2.0 - 2.0 * std::cos(th);
            d.nondegenerate = gap > 1e-8;
            d.witness = "det(1 - Ad) on the quotient = " + std::to_string(gap);
            d.continuation_available = false;
            d.laplacian_kernel_nonzero = true;
            d.collisions = length_spectrum_detail(model, g, 8.0 * two_pi).collisions;
          },
          [&](const Sphere3Model&) {
            const auto* s = std::get_if<Sphere3Element>(&g);
            double t1 = s ? s->theta1 : 1.0, t2 = s ? s->theta2 : std::numbers::sqrt2;
            check_ratio("theta1", t1);
            check_ratio("theta2", t2);
            check_ratio("theta1-theta2", t1 - t2);
            check_ratio("theta1+theta2", t1 + t2);
            double gap = std::min(2.0 - 2.0 * std::cos(t1), 2.0 - 2.0 * std::cos(t2));
            gap = gap * gap;
            d.nondegenerate = gap > 1e-8;
            d.witness = "min det(1 - Ad) on the quotient = " + std::to_string(gap);
            d.continuation_available = false;
            d.laplacian_kernel_nonzero = true;
            d.collisions = length_spectrum_detail(model, g, 8.0 * two_pi).collisions;
          }},
      model);
  return d;
}

// ---- key=value construction ----------------------------------------------------

/// Parses "a+bi", "a-bi", "bi", "a", "i", "-i" (whitespace-free, '+' and 'e' exponents allowed).
inline cplx parse_complex(const std::string& text) {
  std::string s;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) s.push_back(ch);
  require(!s.empty(), Errc::invalid_config, "complex value is empty");
  auto to_double = [&](const std::string& part) {
    if (part.empty() || part == "+") return 1.0;
    if (part == "-") return -1.0;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(part, &used);
    } catch (const std::exception&) {
      fail(Errc::invalid_config, "cannot parse number '" + part + "' in '" + text + "'");
    }
    require(used == part.size(), Errc::invalid_config, "cannot parse number '" + part + "' in '" + text + "'");
    return v;
  };
  if (s.back() != 'i') return {to_double(s), 0.0};
  std::string body = s.substr(0, s.size() - 1);
  // split at the last sign that is not the leading sign and not part of an exponent
  std::size_t split = std::string::npos;
  for (std::size_t k = body.size(); k-- > 1;) {
    if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
      split = k;
      break;
    }
  }
  if (split == std::string::npos) return {0.0, to_double(body)};
  return {to_double(body.substr(0, split)), to_double(body.substr(split))};
}

using ParamMap = std::map<std::string, std::string>;

/// "k1=v1,k2=v2" (or one pair per line); later keys override earlier ones.
inline ParamMap parse_params(const std::string& text) {
  ParamMap out;
  std::string item;
  auto flush = [&] {
    std::size_t b = item.find_first_not_of(" \t\r");
    std::size_t e = item.find_last_not_of(" \t\r");
    if (b == std::string::npos) {
      item.clear();
      return;
    }
    std::string t = item.substr(b, e - b + 1);
    item.clear();
    if (t[0] == '#') return;
    std::size_t eq = t.find('=');
    require(eq != std::string::npos && eq > 0, Errc::invalid_config, "parameter '" + t + "' is not key=value");
    out[t.substr(0, eq)] = t.substr(eq + 1);
  };
  for (char ch : text) {
    if (ch == ',' || ch == '\n') flush();
    else item.push_back(ch);
  }
  flush();
  return out;
}

struct Problem {
  FlowModel model;
  GroupElementSpec element;
};

namespace detail {

struct ParamReader {
  const ParamMap& p;
  std::vector<std::string> used;

  bool has(const std::string& k) const { return p.count(k) > 0; }
  std::string raw(const std::string& k) {
    used.push_back(k);
    auto it = p.find(k);
    require(it != p.end(), Errc::invalid_config, "missing parameter '" + k + "'");
    return it->second;
  }
  double real(const std::string& k) {
    cplx v = parse_complex(raw(k));
    require(v.imag() == 0.0 && std::isfinite(v.real()), Errc::invalid_config, "parameter '" + k + "' must be real");
    return v.real();
  }
  double real_or(const std::string& k, double fallback) { return has(k) ? real(k) : fallback; }
  long integer(const std::string& k) {
    double v = real(k);
    require(v == std::round(v) && std::abs(v) < 1e15, Errc::invalid_config, "parameter '" + k + "' must be an integer");
    return static_cast<long>(v);
  }
  long integer_or(const std::string& k, long fallback) { return has(k) ? integer(k) : fallback; }
  cplx complex_or(const std::string& k, cplx fallback) { return has(k) ? parse_complex(raw(k)) : fallback; }

  void finish() const {
    for (const auto& [k, v] : p)
      require(std::find(used.begin(), used.end(), k) != used.end(), Errc::invalid_config,
              "unknown parameter '" + k + "'");
  }
};

}  // namespace detail

inline Problem build_problem(const std::string& model, const ParamMap& params) {
  detail::ParamReader rd{params, {}};
  Problem pr;
  if (model == "line") {
    pr.model = LineModel{rd.complex_or("alpha", 0.0)};
    pr.element = LineElement{rd.real("g")};
  } else if (model == "lattice") {
    pr.model = IntegerLatticeModel{rd.complex_or("alpha", 0.0)};
    pr.element = LatticeElement{rd.integer("g")};
  } else if (model == "circle") {
    pr.model = CircleModel{rd.complex_or("alpha", 0.0)};
    double r0 = rd.real_or("r0", 0.0);
    require(r0 >= 0.0 && r0 < 1.0, Errc::invalid_config, "circle: r0 must lie in [0, 1)");
    pr.element = CircleElement{r0};
  } else if (model == "euclid") {
    int n = static_cast<int>(rd.integer_or("n", 3));
    double a = rd.real_or("a", 1.0);
    double theta = rd.real("theta");
    int order = static_cast<int>(rd.integer("order"));
    cplx av = rd.complex_or("alpha_v0", 0.0);
    try {
      pr.model = make_euclidean_model(n, a, theta, order, av);
    } catch (const Error& e) {
      fail(Errc::invalid_config, e.what());
    }
    EuclideanElement el;
    el.l0 = rd.integer_or("l0", 1);
    el.m = static_cast<int>(rd.integer_or("m", 1));
    require(el.l0 != 0, Errc::invalid_config, "euclid: l0 must be nonzero");
    if (rd.has("w_prime")) {
      std::string s = rd.raw("w_prime");
      std::vector<double> comps;
      std::stringstream ss(s);
      std::string tok;
      while (std::getline(ss, tok, ';')) comps.push_back(parse_complex(tok).real());
      require(static_cast<int>(comps.size()) == n, Errc::invalid_config, "euclid: w_prime needs n components");
      el.w_prime = Eigen::Map<VectorXd>(comps.data(), n);
      const auto& rot = std::get<EuclideanLatticeModel>(pr.model).rotation;
      if (rot.axis)
        require(std::abs(el.w_prime.dot(*rot.axis)) <= 1e-10, Errc::invalid_config,
                "euclid: w_prime must be orthogonal to the axis");
    }
    pr.element = el;
  } else if (model == "sphere2") {
    pr.model = Sphere2Model{};
    pr.element = Sphere2Element{rd.real("theta")};
  } else if (model == "sphere3") {
    pr.model = Sphere3Model{};
    pr.element = Sphere3Element{rd.real("theta1"), rd.real("theta2")};
  } else {
    fail(Errc::invalid_config, "unknown model '" + model + "'");
  }
  rd.finish();
  return pr;
}

}  // namespace equizeta
