#ifndef SPECBVP_TEST_HELPERS_HPP
#define SPECBVP_TEST_HELPERS_HPP

#include <algorithm>
#include <vector>

#include "specbvp/types.hpp"

namespace specbvp::testing {

/// Dense matrix exponential by scaling and squaring with a truncated Taylor
/// series. Test-side oracle, independent of the spectral calculus used by
/// the library.
inline Matrix expm_oracle(const Matrix& m) {
  const double norm = m.cwiseAbs().sum();
  int squarings = 0;
  Matrix scaled = m;
  if (norm > 0.5) {
    squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm / 0.5))));
    scaled /= std::pow(2.0, squarings);
  }
  Matrix result = Matrix::Identity(m.rows(), m.cols());
  Matrix term = result;
  for (int k = 1; k <= 30; ++k) {
    term = term * scaled / static_cast<double>(k);
    result += term;
    if (term.norm() < 1e-18 * result.norm()) break;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

/// Sorted copy by (Re, Im).
inline std::vector<Complex> sorted_complex(std::vector<Complex> v) {
  std::sort(v.begin(), v.end(), [](Complex a, Complex b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return v;
}

/// Max distance between two sorted spectra of equal size.
inline double spectrum_distance(std::vector<Complex> a, std::vector<Complex> b) {
  a = sorted_complex(std::move(a));
  b = sorted_complex(std::move(b));
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace specbvp::testing

#endif
