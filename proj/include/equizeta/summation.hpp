#pragma once

#include <cmath>
#include <complex>
#include <type_traits>

namespace equizeta {

/// Neumaier-compensated accumulator for real or complex addends.
template <class T>
class CompensatedSum {
 public:
  void add(const T& x) {
    if constexpr (std::is_floating_point_v<T>) {
      add_real(sum_, comp_, x);
    } else {
      auto re = sum_.real(), ce = comp_.real();
      auto im = sum_.imag(), ci = comp_.imag();
      add_real(re, ce, x.real());
      add_real(im, ci, x.imag());
      sum_ = T(re, im);
      comp_ = T(ce, ci);
    }
    abs_ += std::abs(x);
  }
  CompensatedSum& operator+=(const T& x) {
    add(x);
    return *this;
  }
  T value() const { return sum_ + comp_; }
  /// Sum of |addends|; scales the rounding-error estimate.
  double magnitude() const { return abs_; }

 private:
  template <class R>
  static void add_real(R& s, R& c, R x) {
    R t = s + x;
    if (std::abs(s) >= std::abs(x))
      c += (s - t) + x;
    else
      c += (x - t) + s;
    s = t;
  }

  T sum_{};
  T comp_{};
  double abs_ = 0.0;
};

}  // namespace equizeta
