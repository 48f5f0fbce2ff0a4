// Independent reference implementations used as test oracles. These stay
// deliberately naive (index-by-index loops, closed forms) and must not call
// into the library paths they are checking.
#ifndef WADV_TESTS_ORACLES_HPP
#define WADV_TESTS_ORACLES_HPP

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "wadv/common.hpp"

namespace oracles {

using wadv::Cplx;
using wadv::CVec;
using wadv::Index;

/// direct O(n*m) causal convolution
inline CVec naive_convolve(const CVec& x, const CVec& taps) {
  CVec y = CVec::Zero(x.size());
  for (Index n = 0; n < x.size(); ++n)
    for (Index m = 0; m < taps.size(); ++m)
      if (n - m >= 0) y[n] += taps[m] * x[n - m];
  return y;
}

/// element-by-element cyclic tiling sum
inline CVec naive_tile_sum(const CVec& a, const CVec& b, Index offset) {
  CVec out = a;
  for (Index n = 0; n < a.size(); ++n) {
    Index j = (n - offset) % b.size();
    if (j < 0) j += b.size();
    out[n] += b[j];
  }
  return out;
}

inline double naive_energy(const CVec& x) {
  double acc = 0.0;
  for (Index n = 0; n < x.size(); ++n)
    acc += x[n].real() * x[n].real() + x[n].imag() * x[n].imag();
  return acc;
}

/// Gaussian tail Q(x)
inline double qfunc(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

/// theoretical BPSK/QPSK (Gray) bit error rate over AWGN at Es/N0
inline double bpsk_ber(double esn0_db) {
  return qfunc(std::sqrt(2.0 * std::pow(10.0, esn0_db / 10.0)));
}
inline double qpsk_ber(double esn0_db) {
  return qfunc(std::sqrt(std::pow(10.0, esn0_db / 10.0)));
}

/// central finite difference of f along coordinate i
inline double central_diff(const std::function<double(const wadv::RVec&)>& f,
                           const wadv::RVec& x, Index i, double h = 1e-4) {
  wadv::RVec xp = x, xm = x;
  xp[i] += h;
  xm[i] -= h;
  return (f(xp) - f(xm)) / (2.0 * h);
}

/// |a-b| <= max(atol, rtol*max(|a|,|b|))
inline bool close(double a, double b, double atol, double rtol) {
  return std::abs(a - b) <= std::max(atol, rtol * std::max(std::abs(a),
                                                           std::abs(b)));
}

}  // namespace oracles

#endif  // WADV_TESTS_ORACLES_HPP
