#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "rieszwave/errors.hpp"
#include "rieszwave/fft.hpp"
#include "rieszwave/grid.hpp"
#include "rieszwave/numerics.hpp"
#include "rieszwave/rng.hpp"

using namespace rieszwave;

TEST_CASE("gauss-legendre is exact for polynomials of degree 2n-1") {
  const auto& gl = gauss_legendre(5);
  const auto r = gl.integrate([](double x) { return std::pow(x, 9); }, 0.0, 1.0);
  CHECK(r == doctest::Approx(0.1).epsilon(1e-14));
  GaussLegendre<float> glf(4);
  CHECK(glf.integrate([](float x) { return x * x; }, 0.0f, 3.0f) == doctest::Approx(9.0f).epsilon(1e-6));
}

TEST_CASE("gauss-jacobi weights carry s^alpha") {
  for (double alpha : {-0.5, 0.3, 1.7}) {
    GaussJacobi01 gj(8, alpha);
    double s = 0;
    for (std::size_t i = 0; i < gj.nodes.size(); ++i) s += gj.weights[i] * gj.nodes[i] * gj.nodes[i];
    CHECK(s == doctest::Approx(1.0 / (alpha + 3.0)).epsilon(1e-13));
  }
}

TEST_CASE("adaptive quadrature handles endpoint singularities") {
  auto r = integrate_adaptive([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, 1e-12, 1e-12);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-10));
  r = integrate_adaptive([](double x) { return std::sin(x); }, 0.0, std::numbers::pi, 1e-13, 1e-13);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("adaptive quadrature reports a partial estimate when it gives up") {
  try {
    integrate_adaptive([](double x) { return 1.0 / x; }, 0.0, 1.0, 1e-12, 1e-12, 40);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(std::isfinite(e.partial_estimate()));
    CHECK(e.partial_estimate() > 10.0);
  }
}

TEST_CASE("wynn epsilon accelerates an alternating series") {
  WynnEpsilon w;
  double s = 0;
  for (int n = 1; n <= 20; ++n) {
    s += (n % 2 ? 1.0 : -1.0) / n;
    w.push(s);
  }
  CHECK(std::abs(s - std::log(2.0)) > 1e-2);
  CHECK(w.estimate() == doctest::Approx(std::log(2.0)).epsilon(1e-10));
}

TEST_CASE("pairwise sums and standard errors") {
  std::vector<double> v{1, 2, 3, 4};
  CHECK(pairwise_sum(v) == 10.0);
  const auto ms = mean_and_stderr(v);
  CHECK(ms.mean == doctest::Approx(2.5));
  CHECK(ms.stderr_ == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
  std::vector<double> many(100001, 0.1);
  CHECK(pairwise_sum(many) == doctest::Approx(10000.1).epsilon(1e-14));
}

TEST_CASE("parallel_for is independent of the worker count and rethrows") {
  std::vector<double> a(1000), b(1000);
  parallel_for(a.size(), 1, [&](std::size_t i) { a[i] = std::sin(double(i)); });
  parallel_for(b.size(), 4, [&](std::size_t i) { b[i] = std::sin(double(i)); });
  CHECK(a == b);
  CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
                    if (i == 7) throw std::runtime_error("boom");
                  }),
                  std::runtime_error);
}

TEST_CASE("substreams differ and are reproducible") {
  CHECK(substream_seed(1, {2, 3}) == substream_seed(1, {2, 3}));
  CHECK(substream_seed(1, {2, 3}) != substream_seed(1, {3, 2}));
  CHECK(substream_seed(1, {2}) != substream_seed(2, {2}));
}

TEST_CASE("fft round trip and a known transform") {
  ComplexArray a(8);
  for (int i = 0; i < 8; ++i) a[i] = std::complex<double>(i, -i);
  ComplexArray b = a;
  fft_nd(b, {2, 4}, false);
  ComplexArray direct(8);
  for (int p = 0; p < 2; ++p) {
    for (int q = 0; q < 4; ++q) {
      std::complex<double> s = 0;
      for (int x = 0; x < 2; ++x) {
        for (int y = 0; y < 4; ++y) {
          s += a[x * 4 + y] * std::polar(1.0, -2 * std::numbers::pi * (double(p * x) / 2 + double(q * y) / 4));
        }
      }
      direct[p * 4 + q] = s;
    }
  }
  CHECK((b - direct).abs().maxCoeff() < 1e-12);
  fft_nd(b, {2, 4}, true);
  CHECK((b - a).abs().maxCoeff() < 1e-12);
}

TEST_CASE("grid geometry") {
  GridSpec g{2.0, 16, 0.25, 8, 2};
  CHECK(g.dx() == 0.25);
  CHECK(g.points() == 256);
  CHECK(g.coord(0) == doctest::Approx(-2.0 + 0.125));
  CHECK(g.cell_of(g.coord(5)) == 5);
  const auto idx = g.unflat(g.flat({3, 11}));
  CHECK(idx == std::vector<int>{3, 11});
  CHECK_THROWS_AS(g.flat({16, 0}), IndexError);
  GridSpec bad = g;
  bad.n_space = 12;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  CHECK(signed_bin(9, 16) == -7);
}
