#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "rieszwave/errors.hpp"
#include "rieszwave/noise_field.hpp"
#include "rieszwave/wave_kernel.hpp"

using namespace rieszwave;

namespace {

// \int_{R^k} sin^2|w| |w|^{beta-k-2} dw via the Mellin transform of sin^2.
double riesz_closed_form(int k, double beta) {
  const double s = beta - 2.0;
  const double area = 2.0 * std::pow(std::numbers::pi, k / 2.0) / std::tgamma(k / 2.0);
  return area * (-std::tgamma(s) * std::cos(std::numbers::pi * s / 2.0) / std::pow(2.0, s + 1.0));
}

// Composite Simpson in three variables for the smooth phi integrand at large |z|.
double phi_simpson(double z, double lambda, double beta, int n) {
  auto simpson = [n](auto&& f, double a, double b) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
  };
  return simpson(
      [&](double r) {
        return simpson(
            [&](double u) {
              return simpson([&](double v) { return std::pow(std::abs(z + u - v), -beta); }, -lambda - r, lambda + r);
            },
            -r, r);
      },
      0.0, 1.0);
}

}  // namespace

TEST_CASE("fourier symbol") {
  CHECK(fourier_symbol(1.0, 2.0) == doctest::Approx(std::sin(2.0) / 2.0));
  CHECK(fourier_symbol(0.0, 3.0) == 0.0);
  CHECK(fourier_symbol(0.5f, 1.0f) == doctest::Approx(std::sin(0.5f)));
  CHECK_THROWS_AS(fourier_symbol(1.0, 0.0), DomainError);
  CHECK_THROWS_AS(fourier_symbol(-1.0, 1.0), DomainError);
}

TEST_CASE("sphere areas") {
  CHECK(sphere_area(1) == doctest::Approx(2.0));
  CHECK(sphere_area(2) == doctest::Approx(2 * std::numbers::pi));
  CHECK(sphere_area(3) == doctest::Approx(4 * std::numbers::pi));
}

TEST_CASE("parameter validation cites the noise hypothesis") {
  CHECK_NOTHROW((WaveParams{1, 0.5}.validate()));
  CHECK_THROWS_AS((WaveParams{1, 1.0}.validate()), DomainError);
  CHECK_THROWS_AS((WaveParams{4, 0.5}.validate()), DomainError);
  try {
    WaveParams{3, 2.5}.validate();
    FAIL("expected DomainError");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("(C1)") != std::string::npos);
  }
}

TEST_CASE("riesz constant against the closed form") {
  for (auto [k, beta] : {std::pair{1, 0.5}, {2, 0.8}, {3, 1.2}, {1, 0.1}, {3, 1.9}}) {
    const auto c = riesz_constant({k, beta});
    CHECK(c.value == doctest::Approx(riesz_closed_form(k, beta)).epsilon(1e-8));
    CHECK(c.quadrature_error < 1e-6 * c.value);
  }
  CHECK(riesz_closed_form(1, 0.5) == doctest::Approx(4.726543602415).epsilon(1e-11));
}

TEST_CASE("kernel norm scales like r^(2-beta)") {
  const WaveParams p{2, 0.8};
  const double c = riesz_closed_form(2, 0.8);
  CHECK(kernel_h_norm_sq(1.0, p) == doctest::Approx(c).epsilon(1e-8));
  CHECK(kernel_h_norm_sq(0.6, p) / kernel_h_norm_sq(0.3, p) == doctest::Approx(std::pow(2.0, 1.2)).epsilon(1e-13));
  CHECK(time_integrated_norm(0.0, 1.0, p) == doctest::Approx(c / 2.2).epsilon(1e-8));
  CHECK(time_integrated_norm(1.0, 0.5, p) ==
        doctest::Approx(c * (std::pow(1.5, 2.2) - 1.0) / 2.2).epsilon(1e-8));
}

TEST_CASE("spectral quadrature reproduces the kernel norm") {
  for (auto [k, beta] : {std::pair{1, 0.5}, {3, 1.2}}) {
    const double c = riesz_closed_form(k, beta);
    for (double r : {0.25, 2.0}) {
      CHECK(spectral_h_norm_sq(r, {k, beta}) == doctest::Approx(c * std::pow(r, 2.0 - beta)).epsilon(1e-4));
    }
  }
}

TEST_CASE("phi matches direct quadrature away from the singularity") {
  for (double lambda : {0.0, 0.5, 1.0}) {
    CHECK(phi_k1(32.0, lambda, 0.5) == doctest::Approx(phi_simpson(32.0, lambda, 0.5, 40)).epsilon(1e-8));
  }
  CHECK(phi_k1(0.0, 0.0, 0.5) == doctest::Approx(3.01699).epsilon(1e-5));
  CHECK(cross_inner_product_k1(2.0, 1.0, 4.0, 0.5) == doctest::Approx(std::pow(2.0, 2.5) * phi_k1(2.0, 0.5, 0.5)));
}

TEST_CASE("phi decreases with distance") {
  for (double lambda : {0.0, 0.5, 1.0}) {
    double prev = phi_k1(1.0, lambda, 0.5);
    for (double z : {2.0, 4.0, 8.0, 16.0, 32.0}) {
      const double v = phi_k1(z, lambda, 0.5);
      CHECK(v <= prev);
      prev = v;
    }
  }
}

TEST_CASE("spectral density needs a calibration") {
  clear_ckbeta_cache();
  CHECK_THROWS_AS(spectral_density(1.0, {1, 0.3}), StateError);
  store_ckbeta(1, 0.3, 0.25);
  CHECK(spectral_density(2.0, {1, 0.3}) == doctest::Approx(0.25 * std::pow(2.0, -0.7)));
  CHECK(store_ckbeta(1, 0.3, 0.5) == 0.25);
  clear_ckbeta_cache();
}

TEST_CASE("fourier form of phi agrees with the real-space form") {
  calibrate_ckbeta(0.5, 1);
  CHECK(phi_fourier(2.0, 0.5, {1, 0.5}) == doctest::Approx(phi_k1(2.0, 0.5, 0.5)).epsilon(1e-4));
}

TEST_CASE("oracle table") {
  const auto rows = oracle_table({1, 0.5});
  CHECK(!rows.empty());
  std::ostringstream s;
  write_oracle_csv(s, rows);
  CHECK(s.str().rfind("op,params,value,error_estimate", 0) == 0);
}
