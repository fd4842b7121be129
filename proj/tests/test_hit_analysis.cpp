#include <cmath>
#include <random>
#include <string>

#include "doctest.h"
#include "rieszwave/errors.hpp"
#include "rieszwave/hit_analysis.hpp"

using namespace rieszwave;

namespace {

Eigen::VectorXd v1(double a) { return Eigen::VectorXd::Constant(1, a); }

SpaceTimeWindow unit_window() { return {0.5, 1.0, v1(-0.5), v1(0.5)}; }

const GridSpec kGrid{2.0, 128, 1.0 / 32, 32, 1};

}  // namespace

TEST_CASE("polarity of the documented cases") {
  CHECK(polarity_classify(5, 1, 1.0) == Polarity::Polar);
  CHECK(polarity_classify(1, 3, 0.1) == Polarity::NonPolar);
  CHECK(polarity_classify(3, 1, 0.5) == Polarity::Polar);
  CHECK(polarity_classify(2, 1, 0.5) == Polarity::Open);
  CHECK(to_string(Polarity::NonPolar) == "NonPolar");
  CHECK_THROWS_AS(polarity_classify(1, 1, 1.5), DomainError);
  CHECK_THROWS_AS(polarity_classify(1, 3, 2.0), DomainError);
}

TEST_CASE("classifier agrees with its defining inequalities on random parameters") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> dd(1, 12), kk(1, 3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const int d = dd(rng), k = kk(rng);
    const double beta = std::min(2.0, double(k)) * (0.001 + 0.998 * u(rng));
    const double E = 2.0 * (k + 1) / (2.0 - beta);
    const auto p = polarity_classify(d, k, beta);
    if (p == Polarity::NonPolar) {
      CHECK(d * (1 + 4.0 * d / (2 - beta)) - E < 0);
      CHECK(lower_bound_capacity_order(d, k, beta, 1e-9, std::nullopt, CapacityVariant::SpaceTime) < 0);
    } else if (p == Polarity::Polar) {
      CHECK(d > E);
      CHECK(upper_bound_order(d, k, BoundCase::AdditiveC1, {beta}, std::min(1e-9, (d - E) / 2)) > 0);
    } else {
      CHECK(d <= E);
      CHECK(d * (1 + 4.0 * d / (2 - beta)) >= E);
    }
    CHECK(gaussian_order(d, k, beta) == d - E);
  }
}

TEST_CASE("upper bound orders") {
  CHECK(upper_bound_order(4, 1, BoundCase::AdditiveC1, {1.0}, 0.1) == doctest::Approx(-0.1));
  HypothesisParams a;
  a.alpha = 0.25;
  CHECK(upper_bound_order(3, 2, BoundCase::AdditiveC1Prime, a, 0.5) == doctest::Approx(3 - 0.5 - 3 / 0.75));
  HypothesisParams e;
  e.eta = 0.5;
  CHECK(case_delta(2, BoundCase::MultK2, e) == doctest::Approx(0.25));
  HypothesisParams m;
  m.beta = 0.5;
  m.mu = 1.0;
  CHECK(case_delta(3, BoundCase::MultK3, m) == doctest::Approx(0.75));
  m.beta = 1.5;
  m.mu = 0.2;
  CHECK(case_delta(3, BoundCase::MultK3, m) == doctest::Approx(0.25));
  CHECK(upper_bound_order(6, 2, BoundCase::AdditiveC1, {0.8}, 1e-12) == doctest::Approx(gaussian_order(6, 2, 0.8)));
  CHECK_THROWS_AS(upper_bound_order(4, 1, BoundCase::AdditiveC1, {1.0}, 4.0), DomainError);
  try {
    upper_bound_order(4, 2, BoundCase::MultK2, {}, 0.1);
    FAIL("expected DomainError");
  } catch (const DomainError& err) {
    CHECK(std::string(err.what()).find("(C2)") != std::string::npos);
  }
  HypothesisParams bad;
  bad.alpha = 1.5;
  CHECK_THROWS_WITH_AS(case_delta(1, BoundCase::AdditiveC1Prime, bad), doctest::Contains("(C1')"), DomainError);
  CHECK_THROWS_WITH_AS(case_delta(2, BoundCase::MultK1, {0.5}), doctest::Contains("(C3)"), DomainError);
  CHECK(parse_bound_case("mult-k3") == BoundCase::MultK3);
  CHECK(to_string(BoundCase::AdditiveC1Prime) == "additive-C1'");
}

TEST_CASE("lower bound capacity orders") {
  CHECK(lower_bound_capacity_order(1, 3, 0.1, 0.01, std::nullopt, CapacityVariant::SpaceTime) ==
        doctest::Approx(1 + 4 / 1.9 + 0.01 - 8 / 1.9));
  CHECK(lower_bound_capacity_order(1, 3, 0.1, 0.01, std::nullopt, CapacityVariant::SpaceTime) ==
        doctest::Approx(-1.096).epsilon(1e-3));
  CHECK(lower_bound_capacity_order(2, 1, 0.5, 0.1, 1.5, CapacityVariant::SpaceTime) ==
        doctest::Approx(2 + 0.1 - 4 / 1.5));
  const double st = lower_bound_capacity_order(2, 2, 0.8, 0.1, 2.5, CapacityVariant::SpaceTime);
  CHECK(lower_bound_capacity_order(2, 2, 0.8, 0.1, 2.5, CapacityVariant::FixedT) ==
        doctest::Approx(st + 6 / 1.2 - 4 / 1.2));
  CHECK(lower_bound_capacity_order(2, 2, 0.8, 0.1, 2.5, CapacityVariant::FixedX) ==
        doctest::Approx(st + 6 / 1.2 - 2 / 1.2));
  CHECK_THROWS_AS(lower_bound_capacity_order(2, 2, 0.8, 0.0, std::nullopt, CapacityVariant::FixedX), DomainError);
}

TEST_CASE("exponent report") {
  const auto r = exponent_report(5, 1, 1.0, 0.1, 0.01);
  CHECK(r.polarity == Polarity::Polar);
  CHECK(r.gaussian_order == doctest::Approx(1.0));
  CHECK(r.upper_hausdorff_order == doctest::Approx(0.9));
  const auto j = r.to_json();
  CHECK(j["polarity"] == "Polar");
  CHECK(j["gaussian_order"].get<double>() == doctest::Approx(1.0));
}

TEST_CASE("wilson interval") {
  const auto [lo, hi] = wilson_interval(50, 100);
  CHECK(lo == doctest::Approx(0.40383153).epsilon(1e-7));
  CHECK(hi == doctest::Approx(0.59616847).epsilon(1e-7));
  const auto [z0, z1] = wilson_interval(0, 400);
  CHECK(z0 == 0.0);
  CHECK(z1 > 0.0);
  for (std::size_t n : {100, 400, 1600, 6400, 12345}) {
    CHECK(wilson_interval(0, n).first == 0.0);
    CHECK(wilson_interval(n, n).second == 1.0);
  }
}

TEST_CASE("hitting probabilities on trivial and nested targets") {
  const auto model = additive_model(1, 0.5);
  std::vector<TargetSet> targets{TargetSet::empty(1), TargetSet::box(v1(-8.7), v1(8.7)),
                                 TargetSet::ball(v1(1.5), 0.05), TargetSet::ball(v1(1.5), 0.2)};
  const auto est = mc_hitting_probabilities(model, unit_window(), targets, kGrid, 200, 42);
  CHECK(est[0].p_hat == 0.0);
  CHECK(est[1].p_hat >= 0.99);
  CHECK(est[2].p_hat <= est[3].p_hat);
  CHECK(est[2].p_hat > 0.0);
  for (const auto& e : est) {
    CHECK(e.ci_low <= e.p_hat);
    CHECK(e.p_hat <= e.ci_high);
    CHECK(e.n_paths == 200);
    CHECK(e.eps_snap > 0.0);
  }
  const auto again = mc_hitting_probability(model, unit_window(), targets[2], kGrid, 200, 42);
  CHECK(again.hits == est[2].hits);
  HitOptions fixed;
  fixed.eps_snap = 0.0;
  CHECK(mc_hitting_probability(model, unit_window(), targets[2], kGrid, 200, 42, fixed).p_hat <= est[2].p_hat);
}

TEST_CASE("hitting preconditions") {
  const auto model = additive_model(1, 0.5);
  const auto target = TargetSet::ball(v1(0.0), 0.1);
  CHECK_THROWS_AS(mc_hitting_probability(model, unit_window(), target, kGrid, 50, 1), DomainError);
  CHECK_THROWS_AS(mc_hitting_probability(model, {0.5, 1.0, v1(-1.5), v1(1.5)}, target, kGrid, 100, 1), DomainError);
  CHECK_THROWS_AS(mc_hitting_probability(model, {0.5, 2.0, v1(-0.5), v1(0.5)}, target, kGrid, 100, 1), DomainError);
  CHECK_THROWS_AS(mc_hitting_probability(model, unit_window(), TargetSet::ball(Eigen::VectorXd::Zero(2), 0.1), kGrid,
                                         100, 1),
                  DomainError);
  CHECK_THROWS_AS(SpaceTimeWindow({0.0, 1.0, v1(0), v1(1)}).validate(), DomainError);
}

TEST_CASE("sandwich table for a negative order") {
  const auto model = additive_model(1, 0.5);
  std::vector<TargetSet> fam{TargetSet::ball(v1(1.5), 0.4), TargetSet::ball(v1(1.5), 0.1)};
  SandwichOptions opts;
  opts.n_grid = 100;
  const auto rep = sandwich_report(model, unit_window(), fam, kGrid, 100, 3, opts);
  REQUIRE(rep.rows.size() == 2);
  for (const auto& r : rep.rows) {
    CHECK(r.capacity_order < 0);
    CHECK(r.capacity == 1.0);
  }
  const auto csv = sandwich_csv(rep);
  CHECK(csv.rfind("target_id,p_hat,ci_low,ci_high,capacity_order,capacity,hausdorff_order,hausdorff,polarity\n", 0) == 0);
  CHECK(csv == sandwich_csv(sandwich_report(model, unit_window(), fam, kGrid, 100, 3, opts)));
}

TEST_CASE("sandwich table in the polar regime") {
  const auto model = additive_model(1, 0.5, 3);
  const Eigen::VectorXd z = Eigen::VectorXd::Constant(3, 0.3);
  std::vector<TargetSet> fam{TargetSet::ball(z, 0.4), TargetSet::ball(z, 0.1), TargetSet::points({z})};
  SandwichOptions opts;
  opts.n_grid = 200;
  opts.hausdorff_depth = 8;
  const auto rep = sandwich_report(model, unit_window(), fam, kGrid, 200, 9, opts);
  CHECK(rep.rows[0].polarity == Polarity::Polar);
  CHECK(rep.rows[0].capacity_order > 0);
  CHECK(rep.rows[0].capacity > rep.rows[1].capacity);
  CHECK(rep.rows[2].capacity == 0.0);
  CHECK(rep.rows[2].hausdorff == 0.0);
  CHECK(rep.rows[2].hit.p_hat <= rep.rows[1].hit.p_hat);
  CHECK(rep.ordering_ok);
}
