#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "aoipg/cost.hpp"

using namespace aoipg;

namespace {

// Tanh-sinh quadrature copes with the sqrt-type endpoint behaviour of t^0.5.
template <class F>
double quadrature(F f, double a, double b) {
  static boost::math::quadrature::tanh_sinh<double> integrator;
  return integrator.integrate(f, a, b);
}

}  // namespace

TEST_SUITE("cost") {
  TEST_CASE("penalty values") {
    CHECK(penalty_value(IdentityPenalty{}, 2.5) == 2.5);
    CHECK(penalty_value(PowerPenalty{2.0}, 3.0) == doctest::Approx(9.0));
    CHECK(penalty_value(ExponentialPenalty{0.5}, 2.0) == doctest::Approx(std::exp(1.0)));
    CHECK(penalty_value(StepPenalty{2.0}, 1.3) == 2.0);
    CHECK(penalty_value(ScaledExpPenalty{3.0, 1.0}, 1.0) == doctest::Approx(3.0 * (std::exp(1.0) - 1.0)));
  }

  TEST_CASE("penalties start at zero and never decrease") {
    const std::vector<PenaltyFunction> zero_at_origin{IdentityPenalty{}, PowerPenalty{1.5}, StepPenalty{1.0},
                                                      ScaledExpPenalty{2.0, 0.3}};
    for (const auto& p : zero_at_origin) CHECK(penalty_value(p, 0.0) == 0.0);
    // The exponential penalty is e^(gamma t) and starts at 1.
    CHECK(penalty_value(ExponentialPenalty{0.7}, 0.0) == 1.0);

    const std::vector<PenaltyFunction> all{IdentityPenalty{}, PowerPenalty{0.5}, PowerPenalty{2.5},
                                           ExponentialPenalty{0.4}, StepPenalty{1.7}, ScaledExpPenalty{2.0, 0.3}};
    for (const auto& p : all) {
      double last = penalty_value(p, 0.0);
      for (int i = 1; i <= 1000; ++i) {
        const double v = penalty_value(p, i * 0.01);
        CHECK(v >= last);
        last = v;
      }
    }
  }

  TEST_CASE("closed-form integrals match numerical quadrature") {
    const std::vector<PenaltyFunction> smooth{IdentityPenalty{}, PowerPenalty{0.5}, PowerPenalty{1.5},
                                              PowerPenalty{3.0}, ExponentialPenalty{0.4}, ScaledExpPenalty{2.0, 0.3}};
    const std::vector<std::pair<double, double>> intervals{{0.0, 1.0}, {0.5, 3.25}, {2.0, 7.0}, {1.0, 1.0001}};
    for (const auto& p : smooth) {
      for (auto [a, b] : intervals) {
        const double ref = quadrature([&](double t) { return penalty_value(p, t); }, a, b);
        CHECK(penalty_integral(p, a, b) == doctest::Approx(ref).epsilon(1e-9));
      }
    }
  }

  TEST_CASE("step penalty integral by hand") {
    // floor(t) over [0, 3.5]: 0 + 1 + 2 + 3 * 0.5.
    CHECK(penalty_integral(StepPenalty{1.0}, 0.0, 3.5) == doctest::Approx(4.5));
    // floor(2t) over [0.25, 1.2]: 0 on [0.25,0.5), 1 on [0.5,1), 2 on [1,1.2].
    CHECK(penalty_integral(StepPenalty{2.0}, 0.25, 1.2) == doctest::Approx(0.5 + 0.4));
    CHECK(penalty_integral(StepPenalty{1.0}, 2.0, 2.0) == 0.0);
  }

  TEST_CASE("integral is additive over adjacent intervals") {
    const std::vector<PenaltyFunction> all{IdentityPenalty{}, PowerPenalty{1.5}, ExponentialPenalty{0.2},
                                           StepPenalty{1.3}, ScaledExpPenalty{1.0, 0.5}};
    for (const auto& p : all) {
      const double whole = penalty_integral(p, 0.3, 4.9);
      const double split = penalty_integral(p, 0.3, 2.2) + penalty_integral(p, 2.2, 4.9);
      CHECK(whole == doctest::Approx(split).epsilon(1e-12));
    }
  }

  TEST_CASE("integral rejects bad limits") {
    CHECK_THROWS_AS(penalty_integral(IdentityPenalty{}, -1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(penalty_integral(IdentityPenalty{}, 2.0, 1.0), std::invalid_argument);
  }

  TEST_CASE("penalty validation") {
    CHECK_THROWS_AS(validate(PenaltyFunction{PowerPenalty{0.0}}), std::invalid_argument);
    CHECK_THROWS_AS(validate(PenaltyFunction{ExponentialPenalty{-1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(validate(PenaltyFunction{StepPenalty{0.0}}), std::invalid_argument);
    CHECK_THROWS_AS(validate(PenaltyFunction{ScaledExpPenalty{0.0, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(validate(CostModel{PeakViolation{0.0}, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(validate(CostModel{PenaltyBased{IdentityPenalty{}}, -1.0}), std::invalid_argument);
    CHECK(penalty_name(ScaledExpPenalty{}) == "scaled_exp");
  }

  TEST_CASE("AoI cost over a delivery interval") {
    const CostModel identity{PenaltyBased{IdentityPenalty{}}, 1.0};
    // Age runs from 1 to 3: integral of t is (9 - 1) / 2.
    CHECK(aoi_cost(identity, 1.0, 2.0) == doctest::Approx(4.0));
    CHECK(delivery_cost(identity, DeliveryRecord{1.0, 2.0, 3}) == doctest::Approx(7.0));
  }

  TEST_CASE("peak violation uses a strict threshold") {
    const CostModel peak{PeakViolation{5.0}, 0.5};
    CHECK(aoi_cost(peak, 2.0, 3.0) == 0.0);
    CHECK(aoi_cost(peak, 2.0, 3.0001) == 1.0);
    CHECK(aoi_cost(peak, 6.0, 0.5) == 1.0);
    CHECK(delivery_cost(peak, DeliveryRecord{2.0, 4.0, 2}) == doctest::Approx(2.0));
  }
}
