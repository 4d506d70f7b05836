#pragma once

// Complex series engines: Gauss 2F1 with analytic continuation, the bilateral
// exponential sum F(z; r, alpha) = sum_{n in Z} e^{alpha(n+r) - |n+r| z} / |n+r|,
// and the elementary log / atanh series that the circle and sphere models reduce to.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <vector>

#include "equizeta/errors.hpp"
#include "equizeta/summation.hpp"

namespace equizeta {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr double machine_eps = std::numeric_limits<double>::epsilon();
inline constexpr std::size_t term_cap = 10'000'000;

/// Value of a truncated series together with its truncation bookkeeping.
/// When `converged` is false, `value` is the partial sum reached at the cap.
struct SeriesResult {
  cplx value{};
  std::size_t terms_used = 0;
  double est_error = 0.0;
  bool converged = true;
};

/// Parameters of F(z; r, alpha). Only r mod 1 matters; `offset()` returns it in (0, 1).
struct BilateralSumParams {
  double r = 0.5;
  cplx alpha{};
  bool unitary = false;  // caller asserts Re(alpha) = 0

  void validate() const {
    require(std::isfinite(r) && std::isfinite(alpha.real()) && std::isfinite(alpha.imag()),
            Errc::domain, "bilateral sum: non-finite parameter");
    double frac = r - std::floor(r);
    require(frac > 1e-14 && frac < 1.0 - 1e-14, Errc::domain,
            "bilateral sum: offset r must not be an integer");
    if (unitary)
      require(std::abs(alpha.real()) <= 1e-14, Errc::domain,
              "bilateral sum: unitary flag requires Re(alpha) = 0");
  }

  double offset() const { return r - std::floor(r); }
};

/// Distance from x to the nearest point of period * Z.
inline double distance_to_lattice(double x, double period) {
  double k = std::round(x / period);
  return std::abs(x - k * period);
}

/// True when alpha lies in 2*pi*i*Z within `tol`.
inline bool in_two_pi_i_lattice(cplx alpha, double tol = 1e-12) {
  return std::abs(alpha.real()) <= tol && distance_to_lattice(alpha.imag(), two_pi) <= tol;
}

namespace detail {

inline bool is_nonpositive_integer(cplx c, double tol = 1e-14) {
  return std::abs(c.imag()) <= tol && c.real() <= tol &&
         std::abs(c.real() - std::round(c.real())) <= tol;
}

// Lanczos (g = 7, n = 9) log-gamma with reflection; used for Gauss's sum at z = 1.
inline cplx log_gamma(cplx z) {
  static constexpr double coef[9] = {
      0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
      771.32342877765313,      -176.61502916214059,   12.507343278686905,
      -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};
  if (z.real() < 0.5) return std::log(pi) - std::log(std::sin(pi * z)) - log_gamma(1.0 - z);
  z -= 1.0;
  cplx x = coef[0];
  for (int i = 1; i < 9; ++i) x += coef[i] / (z + static_cast<double>(i));
  cplx t = z + 7.5;
  return 0.5 * std::log(two_pi) + (z + 0.5) * std::log(t) - t + std::log(x);
}

struct LocalSolution {
  cplx value{};
  cplx derivative{};
  std::size_t terms = 0;
  double err = 0.0;
  bool converged = true;
};

// Maclaurin series of 2F1 and its derivative. Meant for |z| <= 0.8 or terminating series.
inline LocalSolution hyp2f1_power_series(cplx a, cplx b, cplx c, cplx z, double tol) {
  CompensatedSum<cplx> sum, dsum;
  cplx term = 1.0;
  sum.add(term);
  LocalSolution out;
  double tail = std::numeric_limits<double>::infinity();
  std::size_t n = 0;
  for (; n < term_cap; ++n) {
    const double dn = static_cast<double>(n);
    cplx ratio = (a + dn) * (b + dn) / ((c + dn) * (dn + 1.0));
    term *= ratio * z;
    if (term == 0.0) {
      tail = 0.0;
      break;
    }
    sum.add(term);
    dsum.add(term * (dn + 1.0));
    double rho = std::abs(ratio * z);
    if (n >= 2 && rho < 1.0) {
      // (n+2) bounds the growth factor of the derivative's tail.
      tail = std::abs(term) * (dn + 2.0) * rho / (1.0 - rho);
      if (tail <= tol * std::max(std::abs(sum.value()), 1e-300)) break;
    }
  }
  out.value = sum.value();
  out.derivative = (z == 0.0) ? a * b / c : dsum.value() / z;
  out.terms = n + 1;
  out.converged = n < term_cap;
  out.err = (std::isfinite(tail) ? tail : std::abs(term)) + 4.0 * machine_eps * sum.magnitude();
  return out;
}

// One Taylor step of the hypergeometric ODE  z(1-z)w'' + [c-(a+b+1)z]w' - ab w = 0,
// re-expanded at z0 and evaluated at z0 + h (|h| well inside the radius min(|z0|, |1-z0|)).
inline LocalSolution hyp2f1_ode_step(cplx a, cplx b, cplx c, cplx z0, cplx w, cplx dw, cplx h) {
  const cplx p0 = z0 * (1.0 - z0);
  const cplx p1 = 1.0 - 2.0 * z0;
  const cplx q0 = c - (a + b + 1.0) * z0;
  const cplx q1 = -(a + b + 1.0);
  const cplx ab = a * b;

  CompensatedSum<cplx> val, der;
  val.add(w);
  val.add(dw * h);
  der.add(dw);

  cplx ck = w, ck1 = dw;  // c_k, c_{k+1}
  cplx hk1 = h;           // h^{k+1}
  double last = std::abs(dw * h), prev = std::abs(w);
  std::size_t k = 0;
  for (; k < 400; ++k) {
    const double dk = static_cast<double>(k);
    cplx ck2 = -((p1 * (dk * (dk + 1.0)) + q0 * (dk + 1.0)) * ck1 +
                 (-dk * (dk - 1.0) + q1 * dk - ab) * ck) /
               (p0 * ((dk + 1.0) * (dk + 2.0)));
    cplx hk2 = hk1 * h;
    cplx t = ck2 * hk2;
    val.add(t);
    der.add((dk + 2.0) * ck2 * hk1);
    prev = last;
    last = std::abs(t);
    ck = ck1;
    ck1 = ck2;
    hk1 = hk2;
    double scale = std::max(std::abs(val.value()), 1e-300);
    if (k >= 3 && last <= 1e-17 * scale && prev <= 1e-17 * scale) break;
  }
  LocalSolution out;
  out.value = val.value();
  out.derivative = der.value();
  out.terms = k + 3;
  out.converged = k < 400;
  out.err = 2.0 * (last + prev) + 4.0 * machine_eps * val.magnitude();
  return out;
}

// Continues 2F1 from a point on |z| = 1/2 to z by stepping the ODE along a polyline
// that never crosses the cut [1, inf). Points on the cut are reached from above.
inline SeriesResult hyp2f1_by_ode(cplx a, cplx b, cplx c, cplx z, double tol) {
  cplx z0 = 0.5 * z / std::abs(z);
  LocalSolution s = hyp2f1_power_series(a, b, c, z0, tol);
  cplx w = s.value, dw = s.derivative;
  double err = s.err;
  std::size_t terms = s.terms;

  std::vector<cplx> path;
  if (z.real() > 1.0) path.emplace_back(1.0, z.imag() < 0.0 ? -0.5 : 0.5);
  path.push_back(z);

  std::size_t steps = 0;
  for (cplx target : path) {
    while (z0 != target) {
      cplx d = target - z0;
      double radius = std::min(std::abs(z0), std::abs(1.0 - z0));
      bool last = std::abs(d) <= 0.5 * radius;
      cplx h = last ? d : d / std::abs(d) * (0.5 * radius);
      LocalSolution st = hyp2f1_ode_step(a, b, c, z0, w, dw, h);
      // propagated error grows with the local solution's magnitude ratio
      double growth = std::abs(w) > 0.0 ? std::max(1.0, std::abs(st.value) / std::abs(w)) : 1.0;
      err = err * growth + st.err;
      w = st.value;
      dw = st.derivative;
      terms += st.terms;
      z0 = last ? target : z0 + h;
      if (++steps > 200'000 || !st.converged)
        fail(Errc::non_convergent, "hyp2f1: analytic continuation did not converge");
    }
  }
  return {w, terms, err, true};
}

}  // namespace detail

/// Gauss hypergeometric 2F1(a, b; c; z), principal branch (cut on [1, inf)).
///
/// |z| <= 0.8 uses the Maclaurin series, the Pfaff map z -> z/(z-1) is used when it
/// lands inside |.| <= 0.8, and every other point is reached by Taylor-stepping the
/// hypergeometric ODE. z = 1 uses Gauss's summation when Re(c-a-b) > 0.
inline SeriesResult hyp2f1(cplx a, cplx b, cplx c, cplx z, double tol = 1e-15) {
  require(!detail::is_nonpositive_integer(c), Errc::domain,
          "hyp2f1: c must not be a nonpositive integer");
  if (z == 0.0) return {1.0, 1, 0.0, true};

  if (std::abs(z - 1.0) <= tol) {
    cplx excess = c - a - b;
    require(excess.real() > 0.0, Errc::non_convergent,
            "hyp2f1: z = 1 lies on the singular locus when Re(c-a-b) <= 0");
    if (detail::is_nonpositive_integer(c - a) || detail::is_nonpositive_integer(c - b))
      return {0.0, 1, 0.0, true};
    cplx lg = detail::log_gamma(c) + detail::log_gamma(excess) - detail::log_gamma(c - a) -
              detail::log_gamma(c - b);
    cplx v = std::exp(lg);
    return {v, 1, 1e-13 * std::abs(v), true};
  }

  const bool terminating = detail::is_nonpositive_integer(a) || detail::is_nonpositive_integer(b);
  if (terminating || std::abs(z) <= 0.8) {
    auto s = detail::hyp2f1_power_series(a, b, c, z, tol);
    return {s.value, s.terms, s.err, s.converged};
  }

  cplx zp = z / (z - 1.0);
  if (std::abs(zp) <= 0.8) {
    cplx pre = std::pow(1.0 - z, -a);
    auto s = detail::hyp2f1_power_series(a, c - b, c, zp, tol);
    return {pre * s.value, s.terms, std::abs(pre) * s.err, s.converged};
  }
  return detail::hyp2f1_by_ode(a, b, c, z, tol);
}

/// sum_{n >= 0} e^{(n+s) E} / (n+s) = e^{sE}/s * 2F1(1, s; s+1; e^E), for s > 0.
inline SeriesResult half_line_exp_sum(cplx exponent, double s, double tol = 1e-15) {
  SeriesResult f = hyp2f1(1.0, s, s + 1.0, std::exp(exponent), tol);
  cplx pre = std::exp(s * exponent) / s;
  return {pre * f.value, f.terms_used, std::abs(pre) * f.est_error, f.converged};
}

/// F(z; r, alpha) by symmetric truncation of the defining bilateral sum.
/// Needs Re(z) > |Re(alpha)|; the tail bound is recorded in est_error.
inline SeriesResult bilateral_exp_sum_direct(const BilateralSumParams& p, cplx z,
                                             double tol = 1e-14) {
  p.validate();
  require(z.real() > 0.0, Errc::domain,
          "bilateral_exp_sum_direct: Re(z) must be positive; use the continued variant");
  const double decay = z.real() - std::abs(p.alpha.real());
  require(decay > 0.0, Errc::domain,
          "bilateral_exp_sum_direct: Re(z) must exceed |Re(alpha)| for absolute convergence");

  const double r = p.offset();
  const double gap = std::min(r, 1.0 - r);
  const double geometric = -std::expm1(-decay);
  CompensatedSum<cplx> sum;
  std::size_t terms = 0;
  double tail = 0.0;
  for (std::size_t n = 0;; ++n) {
    const double lp = static_cast<double>(n) + r;
    const double ln = static_cast<double>(n) + 1.0 - r;
    cplx tp = std::exp(lp * (p.alpha - z)) / lp;
    cplx tn = std::exp(ln * (-p.alpha - z)) / ln;
    sum.add(tp);
    sum.add(tn);
    terms += 2;
    const double x = static_cast<double>(n) + 1.0 + gap;
    tail = 2.0 * std::exp(-x * decay) / (x * geometric);
    const double current = std::max(std::abs(tp), std::abs(tn));
    if (tail < tol && current < tol * std::abs(sum.value())) break;
    if (terms >= term_cap)
      fail(Errc::non_convergent, "bilateral_exp_sum_direct: tail bound did not reach tol");
  }
  return {sum.value(), terms, tail + 4.0 * machine_eps * sum.magnitude(), true};
}

/// F(z; r, alpha) continued through the 2F1 representation
///   F(z) = Phi(alpha - z; r) + Phi(-alpha - z; 1 - r),  Phi(E; s) = sum_{n>=0} e^{(n+s)E}/(n+s).
/// Valid off the lattice +-alpha + 2 pi i Z and off the horizontal cuts that end there.
inline SeriesResult bilateral_exp_sum_continued_with_error(const BilateralSumParams& p, cplx z,
                                                           double tol = 1e-15) {
  p.validate();
  constexpr double lattice_tol = 1e-10;
  for (double sgn : {1.0, -1.0}) {
    cplx e = sgn * p.alpha - z;  // exponent whose exponential feeds 2F1
    if (std::abs(e.real()) <= lattice_tol && distance_to_lattice(e.imag(), two_pi) <= lattice_tol)
      fail(Errc::singular_point, "bilateral sum continuation: z lies on +-alpha + 2 pi i Z");
    if (e.real() > 0.0 && distance_to_lattice(e.imag(), two_pi) <= lattice_tol)
      fail(Errc::singular_point, "bilateral sum continuation: z lies on a branch cut");
  }
  const double r = p.offset();
  SeriesResult up = half_line_exp_sum(p.alpha - z, r, tol);
  SeriesResult down = half_line_exp_sum(-p.alpha - z, 1.0 - r, tol);
  return {up.value + down.value, up.terms_used + down.terms_used,
          up.est_error + down.est_error + machine_eps * (std::abs(up.value) + std::abs(down.value)),
          up.converged && down.converged};
}

inline cplx bilateral_exp_sum_continued(const BilateralSumParams& p, cplx z) {
  return bilateral_exp_sum_continued_with_error(p, z).value;
}

/// -log(1 - z), principal branch. Series for small |z| keeps full relative accuracy.
inline cplx log_one_minus(cplx z) {
  require(z != 1.0, Errc::domain, "log_one_minus: z = 1 is a logarithmic singularity");
  if (std::abs(z) < 0.25) {
    cplx power = z, sum = 0.0;
    for (int k = 1; k < 200; ++k) {
      cplx t = power / static_cast<double>(k);
      sum += t;
      if (std::abs(t) <= 1e-18 * std::abs(sum)) break;
      power *= z;
    }
    return sum;
  }
  return -std::log(1.0 - z);
}

/// 2 atanh(e^z) for Re(z) < 0. Equals sum_{n>=0} e^{(n+1/2) 2z} / (n+1/2).
inline cplx atanh_of_exp(cplx z) {
  require(z.real() < 0.0, Errc::domain, "atanh_of_exp: Re(z) must be negative");
  return 2.0 * std::atanh(std::exp(z));
}

}  // namespace equizeta
