#include "rieszwave/fft.hpp"

#include <unsupported/Eigen/FFT>

namespace rieszwave {

void fft_nd(ComplexArray& data, const std::vector<int>& dims, bool inverse) {
  thread_local Eigen::FFT<double> engine;
  const int rank = static_cast<int>(dims.size());
  Eigen::Index total = 1;
  for (int n : dims) total *= n;
  std::vector<std::complex<double>> in, out;
  Eigen::Index stride = total;
  for (int axis = 0; axis < rank; ++axis) {
    const int n = dims[axis];
    stride /= n;
    if (n == 1) continue;
    in.resize(n);
    out.resize(n);
    const Eigen::Index block = stride * n;
    for (Eigen::Index outer = 0; outer < total; outer += block) {
      for (Eigen::Index inner = 0; inner < stride; ++inner) {
        const Eigen::Index base = outer + inner;
        for (int j = 0; j < n; ++j) in[j] = data[base + j * stride];
        if (inverse) {
          engine.inv(out.data(), in.data(), n);
        } else {
          engine.fwd(out.data(), in.data(), n);
        }
        for (int j = 0; j < n; ++j) data[base + j * stride] = out[j];
      }
    }
  }
}

}  // namespace rieszwave
