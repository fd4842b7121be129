#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "rieszwave/errors.hpp"
#include "rieszwave/fft.hpp"
#include "rieszwave/noise_field.hpp"
#include "rieszwave/numerics.hpp"
#include "rieszwave/wave_kernel.hpp"

using namespace rieszwave;

namespace {

double ckbeta_closed_form(int k, double beta) {
  return std::tgamma((k - beta) / 2) / (std::pow(2.0, beta) * std::pow(std::numbers::pi, k / 2.0) * std::tgamma(beta / 2));
}

// Covariance of two unit cells at offset D: second difference of |z|^{2-b}/((1-b)(2-b)).
double unit_cell_cov(int D, double b) {
  auto F = [b](double z) { return std::pow(std::abs(z), 2 - b) / ((1 - b) * (2 - b)); };
  return F(D + 1) - 2 * F(D) + F(D - 1);
}

Eigen::VectorXd v1(double a) { return Eigen::VectorXd::Constant(1, a); }

}  // namespace

TEST_CASE("calibrated normalization matches the closed form") {
  for (auto [k, beta] : {std::pair{1, 0.5}, {2, 0.8}, {1, 0.9}}) {
    const auto rep = calibration_battery(beta, k);
    CHECK(rep.coefficient_of_variation < 1e-3);
    CHECK(rep.ratios.size() == 5);
    CHECK(rep.value == doctest::Approx(ckbeta_closed_form(k, beta)).epsilon(1e-8));
  }
  CHECK(ckbeta_closed_form(1, 0.5) == doctest::Approx(0.398942280401).epsilon(1e-11));
}

TEST_CASE("k=1 spectrum reproduces the exact cell covariance") {
  const GridSpec g{2.0, 64, 0.1, 4, 1};
  const double beta = 0.5, h = g.dx();
  const auto spec = noise_spectrum(g, beta);
  CHECK(spec->clipped == 0.0);
  ComplexArray c = spec->lambda.cast<std::complex<double>>();
  fft_cube(c, g.n_space, 1, true);
  for (int D = 0; D < 32; ++D) {
    CHECK(c[D].real() == doctest::Approx(std::pow(h, 2 - beta) * unit_cell_cov(D, beta)).epsilon(1e-12));
  }
}

TEST_CASE("sampling is deterministic and independent of the worker count") {
  const GridSpec g{1.0, 32, 1.0 / 16, 8, 2};
  const auto a = sample_noise(g, 2, 0.8, 7, 1);
  const auto b = sample_noise(g, 2, 0.8, 7, 3);
  CHECK((a.increments == b.increments).all());
  const auto c = sample_noise(g, 2, 0.8, 8, 1);
  CHECK(!(a.increments == c.increments).all());
  const auto z = zero_noise(g, 2, 0.8);
  CHECK((z.increments == 0.0).all());
  CHECK(z.increments.size() == a.increments.size());
}

TEST_CASE("empirical variance of a unit box increment") {
  const GridSpec g{4.0, 64, 1.0, 64, 1};
  const double beta = 0.5;
  const auto box = TestFunction::box(v1(0.0), v1(1.0));
  std::vector<double> sq;
  for (std::uint64_t s = 0; s < 40; ++s) {
    const auto noise = sample_noise(g, 1, beta, 1000 + s);
    for (int n = 0; n < g.n_time; ++n) {
      const double m = apply_to_slice(noise, n, 0, box);
      sq.push_back(m * m);
    }
  }
  const auto ms = mean_and_stderr(sq);
  const double exact = 2.0 / ((1 - beta) * (2 - beta));
  CHECK(std::abs(ms.mean - exact) < 4 * ms.stderr_);
}

TEST_CASE("covariance functional for boxes and time factors") {
  const auto a = TestFunction::box(v1(0.0), v1(1.0));
  const auto b = TestFunction::box(v1(1.0), v1(3.0));
  CHECK(covariance_functional(a, a, 0.5, 1) == doctest::Approx(8.0 / 3.0).epsilon(1e-10));
  const double F3 = std::pow(3.0, 1.5), F2 = std::pow(2.0, 1.5), F1 = 1.0;
  CHECK(covariance_functional(a, b, 0.5, 1) == doctest::Approx((F3 - F2 - F1) / 0.75).epsilon(1e-10));
  const auto at = a.during(0.0, 2.0), bt = a.during(1.5, 4.0);
  CHECK(covariance_functional(at, bt, 0.5, 1) == doctest::Approx(0.5 * 8.0 / 3.0).epsilon(1e-10));
  CHECK(covariance_functional(a, TestFunction::box(v1(2.0), v1(2.0)), 0.5, 1) == 0.0);
}

TEST_CASE("real-space and fourier norms agree after calibration") {
  const double beta = 0.5;
  const double ck = ckbeta_closed_form(1, beta);
  const auto box = TestFunction::box(v1(-0.3), v1(0.7));
  CHECK(ck * h_norm_fourier(box, beta, 1) == doctest::Approx(h_norm_realspace(box, beta, 1)).epsilon(1e-6));
  Eigen::VectorXd c2(2);
  c2 << 0.2, -0.1;
  const auto bump = TestFunction::bump(c2, 0.4, 2.0);
  CHECK(ckbeta_closed_form(2, 0.8) * h_norm_fourier(bump, 0.8, 2) ==
        doctest::Approx(h_norm_realspace(bump, 0.8, 2)).epsilon(1e-6));
}

TEST_CASE("grid functions on aligned cells") {
  Eigen::ArrayXd vals(2);
  vals << 1.0, 1.0;
  const auto f = TestFunction::grid_function(v1(0.0), 0.5, {2}, vals);
  CHECK(h_norm_realspace(f, 0.5, 1) == doctest::Approx(8.0 / 3.0).epsilon(1e-10));
}

TEST_CASE("slices only accept aligned boxes") {
  const GridSpec g{1.0, 16, 0.1, 2, 1};
  const auto noise = sample_noise(g, 1, 0.5, 3);
  CHECK_THROWS_AS(apply_to_slice(noise, 0, 0, TestFunction::box(v1(0.01), v1(0.5))), DomainError);
  const auto whole = TestFunction::box(v1(-1.0), v1(1.0));
  CHECK(apply_to_slice(noise, 1, 0, whole) == doctest::Approx(noise.slice(1, 0).sum()));
}
