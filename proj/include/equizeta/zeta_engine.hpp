#pragma once

// log R^g(sigma) = 1/2 sum_l sum_orbits sign * holonomy * period * e^{-|l| sigma} / |l|,
// its flat-trace atomic measure, the closed / continued forms, torsion values, and
// the consistency checks built on them.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "equizeta/errors.hpp"
#include "equizeta/flow_models.hpp"
#include "equizeta/resummation.hpp"
#include "equizeta/special_functions.hpp"
#include "equizeta/summation.hpp"

namespace equizeta {

struct Atom {
  double l = 0.0;
  cplx coeff{};
};

struct AtomicMeasure {
  std::vector<Atom> atoms;  // sorted by l
  double window = 0.0;
};

enum class Method { direct, closed, continuation };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::direct: return "direct";
    case Method::closed: return "closed";
    case Method::continuation: return "continuation";
  }
  return "direct";
}

struct ZetaEvaluation {
  cplx sigma{};
  cplx log_R{};
  Method method = Method::direct;
  double est_error = 0.0;
  std::size_t terms = 0;
};

struct FriedReport {
  cplx log_R_at_0{};
  cplx log_T{};
  std::optional<cplx> residual;
  bool applicable = false;
  std::string reason;
  double est_error = 0.0;
  // circle classes: windowed Cesaro resummation of the torsion series
  std::optional<cplx> oracle_log_T;
  double oracle_error = 0.0;
  std::optional<cplx> oracle_residual;
};

inline bool has_infinite_spectrum(const FlowModel& m) {
  return std::holds_alternative<CircleModel>(m) || std::holds_alternative<Sphere2Model>(m) ||
         std::holds_alternative<Sphere3Model>(m);
}

inline bool is_sphere(const FlowModel& m) {
  return std::holds_alternative<Sphere2Model>(m) || std::holds_alternative<Sphere3Model>(m);
}

namespace detail {

inline void require_nondegenerate(const FlowModel& model, const GroupElementSpec& g) {
  ModelDiagnostics d = validate_model(model, g);
  require(d.nondegenerate, Errc::domain, "flow is degenerate for this element: " + d.witness);
}

// H_l = sum over orbits of sign * holonomy * period
inline cplx orbit_weight(const FlowModel& model, const GroupElementSpec& g, double l) {
  cplx h = 0.0;
  for (const auto& o : orbit_contributions(model, g, l)) h += static_cast<double>(o.sign) * o.holonomy * o.period;
  return h;
}

// smallest window whose tail bound is below tol, and that bound
inline std::pair<double, double> direct_window(const FlowModel& model, cplx sigma, double tol) {
  if (!has_infinite_spectrum(model)) return {std::numeric_limits<double>::infinity(), 0.0};
  const double decay = sigma.real() - std::abs(model_alpha(model).real());
  require(sigma.real() > 0.0, Errc::domain, "direct sum needs Re(sigma) > 0 for an infinite spectrum");
  require(decay > 0.0, Errc::domain, "direct sum needs Re(sigma) > |Re(alpha)|");
  auto tail = [&](double L) {
    if (std::holds_alternative<CircleModel>(model))
      return 0.5 * 2.0 * std::exp(-L * decay) / (L * -std::expm1(-decay));
    double families = std::holds_alternative<Sphere2Model>(model) ? 4.0 : 8.0;
    return 0.5 * two_pi * families * std::exp(-L * decay) / (L * -std::expm1(-two_pi * decay));
  };
  double L = 50.0 / decay;
  while (tail(L) > tol) L *= 2.0;
  if (L > static_cast<double>(term_cap) / 2.0)
    fail(Errc::non_convergent, "direct sum: tail bound cannot reach tol within the term cap");
  return {L, tail(L)};
}

inline double finite_window(const FlowModel& model, const GroupElementSpec& g) {
  return std::visit(overloaded{[&](const LineModel&) { return std::abs(std::get<LineElement>(g).g) + 1.0; },
                               [&](const IntegerLatticeModel&) {
                                 return std::abs(static_cast<double>(std::get<LatticeElement>(g).g)) + 1.0;
                               },
                               [&](const EuclideanLatticeModel& m) {
                                 return m.a * std::abs(static_cast<double>(std::get<EuclideanElement>(g).l0)) + 1.0;
                               },
                               [&](const auto&) { return 1.0; }},
                    model);
}

}  // namespace detail

/// Atoms (l, -H_l) for every spectrum point with |l| <= window.
inline AtomicMeasure flat_trace_measure(const FlowModel& model, const GroupElementSpec& g, double window) {
  detail::require_nondegenerate(model, g);
  AtomicMeasure m;
  m.window = window;
  for (double l : length_spectrum(model, g, window)) m.atoms.push_back({l, -detail::orbit_weight(model, g, l)});
  return m;
}

inline auto psi_sigma(cplx sigma) {
  return [sigma](double t) { return std::exp(-sigma * std::abs(t)) / std::abs(t); };
}

template <class Psi>
cplx pair_with_test_function(const AtomicMeasure& m, Psi&& psi) {
  CompensatedSum<cplx> s;
  for (const auto& a : m.atoms) s.add(a.coeff * psi(a.l));
  return s.value();
}

/// log R truncated to |l| <= window, no tail accounting.
inline ZetaEvaluation ruelle_log_window(const FlowModel& model, const GroupElementSpec& g, cplx sigma,
                                        double window) {
  detail::require_nondegenerate(model, g);
  auto psi = psi_sigma(sigma);
  CompensatedSum<cplx> s;
  std::size_t terms = 0;
  for (double l : length_spectrum(model, g, window)) {
    s.add(detail::orbit_weight(model, g, l) * psi(l));
    ++terms;
  }
  return {sigma, 0.5 * s.value(), Method::direct, 8.0 * machine_eps * s.magnitude(), terms};
}

inline ZetaEvaluation ruelle_log_direct(const FlowModel& model, const GroupElementSpec& g, cplx sigma,
                                        double tol = 1e-12) {
  auto [L, tail] = detail::direct_window(model, sigma, tol);
  if (!std::isfinite(L)) L = detail::finite_window(model, g);
  ZetaEvaluation ev = ruelle_log_window(model, g, sigma, L);
  ev.est_error += tail;
  return ev;
}

namespace detail {

inline void require_off_lattice(cplx alpha, cplx sigma) {
  for (double sgn : {1.0, -1.0}) {
    cplx e = sgn * alpha - sigma;
    if (std::abs(e.real()) <= 1e-10 && distance_to_lattice(e.imag(), two_pi) <= 1e-10)
      fail(Errc::singular_point, "sigma lies on +-alpha + 2 pi i Z");
    if (e.real() > 0.0 && distance_to_lattice(e.imag(), two_pi) <= 1e-10)
      fail(Errc::singular_point, "sigma lies on a branch cut of the continuation");
  }
}

}  // namespace detail

inline ZetaEvaluation ruelle_log_closed(const FlowModel& model, const GroupElementSpec& g, cplx sigma) {
  detail::require_nondegenerate(model, g);
  auto line_like = [&](cplx alpha, double x) -> ZetaEvaluation {
    if (x == 0.0) return {sigma, 0.0, Method::closed, 0.0, 0};
    cplx v = std::exp(alpha * x - std::abs(x) * sigma) / (2.0 * std::abs(x));
    return {sigma, v, Method::closed, 4.0 * machine_eps * std::abs(v), 1};
  };
  return std::visit(
      overloaded{
          [&](const LineModel& m) { return line_like(m.alpha, std::get<LineElement>(g).g); },
          [&](const IntegerLatticeModel& m) {
            return line_like(m.alpha, static_cast<double>(std::get<LatticeElement>(g).g));
          },
          [&](const EuclideanLatticeModel& m) -> ZetaEvaluation {
            const double L = m.a * static_cast<double>(std::get<EuclideanElement>(g).l0);
            cplx v = (m.a / m.order) * std::exp(L * m.alpha_v0 - std::abs(L) * sigma) / std::abs(L);
            return {sigma, v, Method::closed, 4.0 * machine_eps * std::abs(v), 2};
          },
          [&](const CircleModel& m) -> ZetaEvaluation {
            const double r0 = std::get<CircleElement>(g).r0;
            detail::require_off_lattice(m.alpha, sigma);
            if (r0 == 0.0) {
              cplx v = 0.5 * (log_one_minus(std::exp(m.alpha - sigma)) + log_one_minus(std::exp(-m.alpha - sigma)));
              return {sigma, v, Method::closed, 8.0 * machine_eps * std::max(1.0, std::abs(v)), 2};
            }
            cplx up = m.alpha - sigma, down = -m.alpha - sigma;
            if (r0 == 0.5 && up.real() < 0.0 && down.real() < 0.0) {
              cplx v = 0.5 * (atanh_of_exp(0.5 * up) + atanh_of_exp(0.5 * down));
              return {sigma, v, Method::closed, 8.0 * machine_eps * std::max(1.0, std::abs(v)), 2};
            }
            SeriesResult f = bilateral_exp_sum_continued_with_error({r0, m.alpha}, sigma);
            if (!f.converged) fail(Errc::non_convergent, "circle continuation did not converge");
            return {sigma, 0.5 * f.value, Method::continuation, 0.5 * f.est_error, f.terms_used};
          },
          [&](const auto&) -> ZetaEvaluation {
            fail(Errc::not_applicable,
                 "sphere models have no continuation in sigma (alpha = 0); use the direct sum with Re(sigma) > 0");
          }},
      model);
}

struct TorsionValue {
  cplx log_T{};
  double est_error = 0.0;
};

inline TorsionValue torsion_log_detail(const FlowModel& model, const GroupElementSpec& g) {
  require(!is_sphere(model), Errc::not_applicable,
          "torsion is not defined here: the kernel of the Laplacian is nonzero");
  cplx alpha = model_alpha(model);
  require(std::abs(alpha.real()) <= 1e-14, Errc::domain, "torsion requires purely imaginary alpha");
  detail::require_nondegenerate(model, g);
  auto line_like = [&](double x) -> TorsionValue {
    require(x != 0.0, Errc::domain, "torsion closed form needs g != 0");
    cplx v = std::exp(alpha * x) / (2.0 * std::abs(x));
    return {v, 4.0 * machine_eps * std::abs(v)};
  };
  return std::visit(
      overloaded{
          [&](const LineModel&) { return line_like(std::get<LineElement>(g).g); },
          [&](const IntegerLatticeModel&) { return line_like(static_cast<double>(std::get<LatticeElement>(g).g)); },
          [&](const EuclideanLatticeModel& m) -> TorsionValue {
            // a times the torsion for the group generated by translations along v0
            const double L = m.a * static_cast<double>(std::get<EuclideanElement>(g).l0);
            cplx v = m.a * (2.0 / m.order) * std::exp(L * m.alpha_v0) / (2.0 * std::abs(L));
            return {v, 4.0 * machine_eps * std::abs(v)};
          },
          [&](const CircleModel& m) -> TorsionValue {
            require(!in_two_pi_i_lattice(m.alpha), Errc::domain, "circle torsion requires alpha not in 2 pi i Z");
            const double r0 = std::get<CircleElement>(g).r0;
            if (r0 == 0.0) {
              cplx s = 2.0 * std::sinh(0.5 * m.alpha);
              cplx v = -0.5 * std::log(-(s * s));
              return {v, 8.0 * machine_eps * std::max(1.0, std::abs(v))};
            }
            double rt = 1.0 - r0;  // -r0 mod 1
            SeriesResult f = bilateral_exp_sum_continued_with_error({rt, -m.alpha}, 0.0);
            return {0.5 * f.value, 0.5 * f.est_error};
          },
          [&](const auto&) -> TorsionValue { fail(Errc::not_applicable, "no torsion"); }},
      model);
}

inline cplx torsion_log(const FlowModel& model, const GroupElementSpec& g) {
  return torsion_log_detail(model, g).log_T;
}

inline FriedReport fried_residual(const FlowModel& model, const GroupElementSpec& g, double tol = 1e-12) {
  (void)tol;
  FriedReport rep;
  ModelDiagnostics d = validate_model(model, g);
  if (is_sphere(model)) {
    rep.reason = "kernel of the Laplacian is nonzero and log R has no continuation to sigma = 0";
    return rep;
  }
  if (!d.nondegenerate) {
    rep.reason = "flow is degenerate: " + d.witness;
    return rep;
  }
  if (!d.alpha_imaginary) {
    rep.reason = "torsion comparison needs a unitary connection (purely imaginary alpha)";
    return rep;
  }
  if (d.laplacian_kernel_nonzero || !d.continuation_available) {
    rep.reason = "alpha lies in 2 pi i Z: kernel of the Laplacian is nonzero and the continuation is excluded";
    return rep;
  }
  try {
    ZetaEvaluation r0 = ruelle_log_closed(model, g, 0.0);
    TorsionValue t = torsion_log_detail(model, g);
    rep.log_R_at_0 = r0.log_R;
    rep.log_T = t.log_T;
    rep.est_error = r0.est_error + t.est_error;
  } catch (const Error& e) {
    rep.reason = e.what();
    return rep;
  }
  rep.applicable = true;
  rep.residual = rep.log_R_at_0 - rep.log_T;
  rep.reason = "applicable";

  if (const auto* c = std::get_if<CircleModel>(&model)) {
    const double r0 = std::get<CircleElement>(g).r0;
    if (r0 != 0.0) {
      SeriesResult o = bilateral_exp_sum_resummed({1.0 - r0, -c->alpha}, 0.0);
      rep.oracle_log_T = 0.5 * o.value;
      rep.oracle_error = 0.5 * o.est_error;
      rep.oracle_residual = rep.log_T - *rep.oracle_log_T;
    }
  }
  return rep;
}

struct CheckResult {
  cplx lhs{};
  cplx rhs{};
  double diff = 0.0;
};

/// sum over 0 < |g| <= N of 2 log R^g (integer lattice) against 2 log R^e (circle identity class).
inline CheckResult product_decomposition_check(cplx alpha, cplx sigma, long N) {
  require(sigma.real() > 0.0, Errc::domain, "product decomposition needs Re(sigma) > 0");
  require(N >= 1, Errc::domain, "product decomposition needs N >= 1");
  CompensatedSum<cplx> lhs;
  FlowModel lat = IntegerLatticeModel{alpha};
  for (long k = 1; k <= N; ++k) {
    lhs.add(2.0 * ruelle_log_closed(lat, LatticeElement{k}, sigma).log_R);
    lhs.add(2.0 * ruelle_log_closed(lat, LatticeElement{-k}, sigma).log_R);
  }
  cplx rhs = 2.0 * ruelle_log_closed(CircleModel{alpha}, CircleElement{0.0}, sigma).log_R;
  return {lhs.value(), rhs, std::abs(lhs.value() - rhs)};
}

/// log R^g for G = R against H = Z at the same integer g.
inline CheckResult subgroup_power_check(double g, cplx alpha, cplx sigma) {
  require(g != 0.0 && g == std::round(g), Errc::domain, "subgroup check needs a nonzero integer g");
  cplx lhs = ruelle_log_closed(LineModel{alpha}, LineElement{g}, sigma).log_R;
  cplx rhs = ruelle_log_closed(IntegerLatticeModel{alpha}, LatticeElement{static_cast<long>(g)}, sigma).log_R;
  return {lhs, rhs, std::abs(lhs - rhs)};
}

enum class MethodChoice { direct, closed, automatic };

/// closed form when available, else the direct orbit sum.
inline ZetaEvaluation evaluate(const Problem& p, cplx sigma, MethodChoice method, double tol) {
  switch (method) {
    case MethodChoice::direct: return ruelle_log_direct(p.model, p.element, sigma, tol);
    case MethodChoice::closed: return ruelle_log_closed(p.model, p.element, sigma);
    case MethodChoice::automatic:
      // spheres have no continuation: outside Re(sigma) > 0 the closed route reports NotApplicable
      if (is_sphere(p.model) && sigma.real() > 0.0) return ruelle_log_direct(p.model, p.element, sigma, tol);
      return ruelle_log_closed(p.model, p.element, sigma);
  }
  return ruelle_log_direct(p.model, p.element, sigma, tol);
}

}  // namespace equizeta
