#pragma once

// Resummation of conditionally convergent bilateral series sum_{n in Z} a_n.
// Symmetric partial sums S_k = sum_{|n| <= k} a_n are smoothed by repeated moving
// averages over a window that starts at k = first. Averaging from k = 0 would keep
// an O(1/first) bias, so the window is taken far out in the tail.

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "equizeta/errors.hpp"
#include "equizeta/special_functions.hpp"
#include "equizeta/summation.hpp"

namespace equizeta {

struct CesaroWindow {
  std::size_t first = 200'000;
  std::size_t width = 200'000;
  int depth = 3;
};

/// `term(n)` for every integer n. est_error is the change between the last two depths
/// plus a rounding allowance.
template <class Term>
SeriesResult symmetric_windowed_cesaro(Term&& term, CesaroWindow w = {}) {
  require(w.width >= 1 && w.depth >= 2, Errc::domain, "cesaro: width >= 1 and depth >= 2 required");
  const std::size_t last = w.first + static_cast<std::size_t>(w.depth) * w.width;

  CompensatedSum<cplx> head;
  head.add(term(0L));
  for (std::size_t k = 1; k <= w.first; ++k) {
    const long n = static_cast<long>(k);
    head.add(term(n));
    head.add(term(-n));
  }
  const cplx base = head.value();

  // deviations S_k - S_first keep the averaging free of cancellation against |S|
  std::vector<cplx> seq;
  seq.reserve(last - w.first + 1);
  CompensatedSum<cplx> dev;
  seq.push_back(0.0);
  for (std::size_t k = w.first + 1; k <= last; ++k) {
    const long n = static_cast<long>(k);
    dev.add(term(n));
    dev.add(term(-n));
    seq.push_back(dev.value());
  }

  const double inv = 1.0 / static_cast<double>(w.width + 1);
  cplx previous_depth{};
  for (int d = 0; d < w.depth; ++d) {
    std::vector<cplx> next(seq.size() - w.width);
    CompensatedSum<cplx> run;
    for (std::size_t i = 0; i <= w.width; ++i) run.add(seq[i]);
    next[0] = run.value() * inv;
    for (std::size_t i = 1; i < next.size(); ++i) {
      // fresh sums keep the sliding window exact enough over 1e5+ shifts
      if (i % 4096 == 0) {
        run = {};
        for (std::size_t j = i; j <= i + w.width; ++j) run.add(seq[j]);
      } else {
        run.add(seq[i + w.width]);
        run.add(-seq[i - 1]);
      }
      next[i] = run.value() * inv;
    }
    if (d == w.depth - 2) previous_depth = next[0];
    seq = std::move(next);
  }
  const cplx value = base + seq[0];
  const double rounding = 16.0 * machine_eps * (head.magnitude() + dev.magnitude());
  return {value, 2 * last + 1, std::abs(seq[0] - previous_depth) + rounding, true};
}

/// F(z; r, alpha) on Re z = 0 (or anywhere the bilateral sum only converges conditionally).
inline SeriesResult bilateral_exp_sum_resummed(const BilateralSumParams& p, cplx z,
                                               CesaroWindow w = {}) {
  p.validate();
  const double r = p.offset();
  auto term = [&](long n) {
    const double x = static_cast<double>(n) + r;
    return std::exp(p.alpha * x - std::abs(x) * z) / std::abs(x);
  };
  return symmetric_windowed_cesaro(term, w);
}

}  // namespace equizeta
