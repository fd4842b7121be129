#ifndef RIESZWAVE_FFT_HPP
#define RIESZWAVE_FFT_HPP

#include <complex>
#include <vector>

#include <Eigen/Core>

namespace rieszwave {

using ComplexArray = Eigen::ArrayXcd;

/// In-place N-D transform of a row-major array with `dims` extents.
/// Forward: X_p = sum_j x_j exp(-2 pi i p.j / n); inverse is scaled by 1/prod(n).
void fft_nd(ComplexArray& data, const std::vector<int>& dims, bool inverse);

/// Cubic shorthand: k axes of n points each.
inline void fft_cube(ComplexArray& data, int n, int k, bool inverse) {
  fft_nd(data, std::vector<int>(k, n), inverse);
}

}  // namespace rieszwave

#endif  // RIESZWAVE_FFT_HPP
